#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lowswitch/mdp.hpp"

namespace lowswitch {

// MDP file format: one JSON document
//   {"H": int, "S": int, "A": int,
//    "transitions": [h][x][a][x'] nested arrays of probabilities,
//    "rewards": [h][x][a], "initial_dist": [p...]}
// The loader validates and rejects any invariant violation.

inline nlohmann::ordered_json mdp_to_json(const MdpSpec& mdp) {
    nlohmann::ordered_json j;
    j["H"] = mdp.horizon;
    j["S"] = mdp.num_states;
    j["A"] = mdp.num_actions;
    auto transitions = nlohmann::ordered_json::array();
    auto rewards = nlohmann::ordered_json::array();
    for (int h = 0; h < mdp.horizon; ++h) {
        auto th = nlohmann::ordered_json::array();
        auto rh = nlohmann::ordered_json::array();
        for (int x = 0; x < mdp.num_states; ++x) {
            auto tx = nlohmann::ordered_json::array();
            auto rx = nlohmann::ordered_json::array();
            for (int a = 0; a < mdp.num_actions; ++a) {
                const auto row = mdp.transition_row(h, x, a);
                tx.push_back(std::vector<double>(row.begin(), row.end()));
                rx.push_back(mdp.reward(h, x, a));
            }
            th.push_back(tx);
            rh.push_back(rx);
        }
        transitions.push_back(th);
        rewards.push_back(rh);
    }
    j["transitions"] = transitions;
    j["rewards"] = rewards;
    j["initial_dist"] = mdp.initial_dist;
    return j;
}

inline MdpSpec mdp_from_json(const nlohmann::json& j) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key != "H" && key != "S" && key != "A" && key != "transitions" &&
            key != "rewards" && key != "initial_dist")
            throw std::invalid_argument("unknown MDP field: " + key);
    }
    MdpSpec mdp;
    mdp.horizon = j.at("H").get<int>();
    mdp.num_states = j.at("S").get<int>();
    mdp.num_actions = j.at("A").get<int>();
    if (mdp.horizon < 1 || mdp.num_states < 1 || mdp.num_actions < 1)
        throw std::invalid_argument("H, S, A must all be positive");

    const auto& transitions = j.at("transitions");
    const auto& rewards = j.at("rewards");
    const auto expect_size = [](const nlohmann::json& arr, int n, const char* what) {
        if (!arr.is_array() || static_cast<int>(arr.size()) != n)
            throw std::invalid_argument(std::string("bad shape in ") + what);
    };
    expect_size(transitions, mdp.horizon, "transitions");
    expect_size(rewards, mdp.horizon, "rewards");
    for (int h = 0; h < mdp.horizon; ++h) {
        expect_size(transitions[h], mdp.num_states, "transitions");
        expect_size(rewards[h], mdp.num_states, "rewards");
        for (int x = 0; x < mdp.num_states; ++x) {
            expect_size(transitions[h][x], mdp.num_actions, "transitions");
            expect_size(rewards[h][x], mdp.num_actions, "rewards");
            for (int a = 0; a < mdp.num_actions; ++a) {
                expect_size(transitions[h][x][a], mdp.num_states, "transitions");
                for (int y = 0; y < mdp.num_states; ++y)
                    mdp.transitions.push_back(transitions[h][x][a][y].get<double>());
                mdp.rewards.push_back(rewards[h][x][a].get<double>());
            }
        }
    }
    mdp.initial_dist = j.at("initial_dist").get<std::vector<double>>();

    const auto errors = validate(mdp);
    if (!errors.empty())
        throw std::invalid_argument("MDP file rejected: " + errors.front());
    return mdp;
}

inline MdpSpec load_mdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open MDP file: " + path);
    nlohmann::json j;
    in >> j;
    return mdp_from_json(j);
}

inline void save_mdp_file(const MdpSpec& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write MDP file: " + path);
    out << mdp_to_json(mdp).dump(2) << "\n";
}

// Policy snapshots as JSON action tables: [h][x] of 1-based actions.
inline nlohmann::ordered_json policy_to_json(const DeterministicPolicy& policy) {
    auto rows = nlohmann::ordered_json::array();
    for (int h = 0; h < policy.horizon; ++h) {
        auto row = nlohmann::ordered_json::array();
        for (int x = 0; x < policy.num_states; ++x) row.push_back(policy.at(h, x) + 1);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace lowswitch

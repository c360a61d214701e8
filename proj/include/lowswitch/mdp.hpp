#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowswitch/rng.hpp"

namespace lowswitch {

constexpr double kStochasticVectorTol = 1e-12;

// Episodic tabular MDP with deterministic rewards in [0,1].
// Steps h, states x and actions a are 0-based internally and 1-based in
// file formats and logs.
struct MdpSpec {
    int horizon = 0;      // H
    int num_states = 0;   // S
    int num_actions = 0;  // A
    // transitions[h][x][a] is a probability vector over next states,
    // flattened in index order [h][x][a][x'].
    std::vector<double> transitions;
    // rewards[h][x][a], flattened.
    std::vector<double> rewards;
    // distribution of the initial state x_1.
    std::vector<double> initial_dist;

    std::size_t sa_index(int h, int x, int a) const {
        return (static_cast<std::size_t>(h) * num_states + x) * num_actions + a;
    }
    std::span<const double> transition_row(int h, int x, int a) const {
        return {transitions.data() + sa_index(h, x, a) * num_states,
                static_cast<std::size_t>(num_states)};
    }
    double reward(int h, int x, int a) const { return rewards[sa_index(h, x, a)]; }
};

// H x S table of actions.
struct DeterministicPolicy {
    int horizon = 0;
    int num_states = 0;
    std::vector<int> actions;  // [h][x]

    int& at(int h, int x) { return actions[static_cast<std::size_t>(h) * num_states + x]; }
    int at(int h, int x) const { return actions[static_cast<std::size_t>(h) * num_states + x]; }

    bool operator==(const DeterministicPolicy& other) const = default;
};

struct Trajectory {
    struct Step {
        int state;
        int action;
        double reward;
    };
    std::vector<Step> steps;  // length H
    int terminal_state = 0;   // x_{H+1}

    double total_return() const {
        double r = 0.0;
        for (const auto& s : steps) r += s.reward;
        return r;
    }
};

// v[h][x] for h = 0..H (row H is identically zero) and, when filled,
// q[h][x][a] for h = 0..H-1.
struct ValueTables {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> v;
    std::vector<double> q;

    double value(int h, int x) const { return v[static_cast<std::size_t>(h) * num_states + x]; }
    double action_value(int h, int x, int a) const {
        return q[(static_cast<std::size_t>(h) * num_states + x) * num_actions + a];
    }
};

// All invariant violations, with indices reported 1-based. Empty == ok.
inline std::vector<std::string> validate(const MdpSpec& mdp) {
    std::vector<std::string> errors;
    if (mdp.horizon < 1 || mdp.num_states < 1 || mdp.num_actions < 1) {
        errors.push_back("H, S, A must all be positive");
        return errors;
    }
    const std::size_t n_sa = static_cast<std::size_t>(mdp.horizon) * mdp.num_states * mdp.num_actions;
    if (mdp.transitions.size() != n_sa * mdp.num_states)
        errors.push_back("transitions table has wrong size");
    if (mdp.rewards.size() != n_sa) errors.push_back("rewards table has wrong size");
    if (mdp.initial_dist.size() != static_cast<std::size_t>(mdp.num_states))
        errors.push_back("initial_dist has wrong size");
    if (!errors.empty()) return errors;

    const auto check_dist = [&errors](std::span<const double> p, const std::string& where) {
        double sum = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] < 0.0)
                errors.push_back(where + ": negative entry at index " + std::to_string(i + 1));
            sum += p[i];
        }
        if (std::fabs(sum - 1.0) > kStochasticVectorTol)
            errors.push_back(where + ": entries sum to " + std::to_string(sum));
    };

    for (int h = 0; h < mdp.horizon; ++h)
        for (int x = 0; x < mdp.num_states; ++x)
            for (int a = 0; a < mdp.num_actions; ++a) {
                const std::string where = "(h=" + std::to_string(h + 1) +
                                          ",x=" + std::to_string(x + 1) +
                                          ",a=" + std::to_string(a + 1) + ")";
                check_dist(mdp.transition_row(h, x, a), "transitions" + where);
                const double r = mdp.reward(h, x, a);
                if (r < 0.0 || r > 1.0)
                    errors.push_back("rewards" + where + ": value " + std::to_string(r) +
                                     " outside [0,1]");
            }
    check_dist(mdp.initial_dist, "initial_dist");
    return errors;
}

inline void require_valid(const MdpSpec& mdp) {
    const auto errors = validate(mdp);
    if (!errors.empty()) throw std::invalid_argument("invalid MDP: " + errors.front());
}

inline void require_shape_match(const MdpSpec& mdp, const DeterministicPolicy& policy) {
    if (policy.horizon != mdp.horizon || policy.num_states != mdp.num_states ||
        policy.actions.size() !=
            static_cast<std::size_t>(mdp.horizon) * mdp.num_states)
        throw std::invalid_argument("policy shape does not match MDP");
    for (const int a : policy.actions)
        if (a < 0 || a >= mdp.num_actions)
            throw std::invalid_argument("policy action out of range");
}

inline Trajectory sample_episode(const MdpSpec& mdp, const DeterministicPolicy& policy,
                                 Rng& rng) {
    require_shape_match(mdp, policy);
    Trajectory traj;
    traj.steps.reserve(mdp.horizon);
    int x = rng.categorical(mdp.initial_dist);
    for (int h = 0; h < mdp.horizon; ++h) {
        const int a = policy.at(h, x);
        traj.steps.push_back({x, a, mdp.reward(h, x, a)});
        x = rng.categorical(mdp.transition_row(h, x, a));
    }
    traj.terminal_state = x;
    return traj;
}

// Exact optimal V and Q by backward induction h = H..1:
//   q[h][x][a] = r_h(x,a) + sum_{x'} P_h(x'|x,a) v[h+1][x'],
//   v[h][x] = max_a q[h][x][a].
inline ValueTables optimal_values(const MdpSpec& mdp) {
    ValueTables out{mdp.horizon, mdp.num_states, mdp.num_actions, {}, {}};
    out.v.assign(static_cast<std::size_t>(mdp.horizon + 1) * mdp.num_states, 0.0);
    out.q.assign(static_cast<std::size_t>(mdp.horizon) * mdp.num_states * mdp.num_actions, 0.0);
    for (int h = mdp.horizon - 1; h >= 0; --h)
        for (int x = 0; x < mdp.num_states; ++x) {
            double best = -1.0;
            for (int a = 0; a < mdp.num_actions; ++a) {
                const auto row = mdp.transition_row(h, x, a);
                double ev = 0.0;
                for (int y = 0; y < mdp.num_states; ++y)
                    ev += row[y] * out.value(h + 1, y);
                const double qv = mdp.reward(h, x, a) + ev;
                out.q[(static_cast<std::size_t>(h) * mdp.num_states + x) * mdp.num_actions + a] = qv;
                best = std::max(best, qv);
            }
            out.v[static_cast<std::size_t>(h) * mdp.num_states + x] = best;
        }
    return out;
}

// Exact evaluation of a fixed deterministic policy.
inline ValueTables policy_values(const MdpSpec& mdp, const DeterministicPolicy& policy) {
    require_shape_match(mdp, policy);
    ValueTables out{mdp.horizon, mdp.num_states, mdp.num_actions, {}, {}};
    out.v.assign(static_cast<std::size_t>(mdp.horizon + 1) * mdp.num_states, 0.0);
    for (int h = mdp.horizon - 1; h >= 0; --h)
        for (int x = 0; x < mdp.num_states; ++x) {
            const int a = policy.at(h, x);
            const auto row = mdp.transition_row(h, x, a);
            double ev = 0.0;
            for (int y = 0; y < mdp.num_states; ++y) ev += row[y] * out.value(h + 1, y);
            out.v[static_cast<std::size_t>(h) * mdp.num_states + x] =
                mdp.reward(h, x, a) + ev;
        }
    return out;
}

// Greedy policy w.r.t. the q table, ties broken by lowest action index.
inline DeterministicPolicy greedy_policy(const ValueTables& values) {
    DeterministicPolicy pol{values.horizon, values.num_states,
                            std::vector<int>(static_cast<std::size_t>(values.horizon) *
                                             values.num_states)};
    for (int h = 0; h < values.horizon; ++h)
        for (int x = 0; x < values.num_states; ++x) {
            int best = 0;
            for (int a = 1; a < values.num_actions; ++a)
                if (values.action_value(h, x, a) > values.action_value(h, x, best)) best = a;
            pol.at(h, x) = best;
        }
    return pol;
}

inline double expected_initial_value(const MdpSpec& mdp, const ValueTables& values) {
    double total = 0.0;
    for (int x = 0; x < mdp.num_states; ++x)
        total += mdp.initial_dist[x] * values.value(0, x);
    return total;
}

// Dense random instance: transition rows are normalized independent
// uniform(0,1) weights, rewards uniform(0,1), initial distribution uniform.
inline MdpSpec make_random_mdp(int horizon, int num_states, int num_actions, Rng& rng) {
    if (horizon < 1 || num_states < 1 || num_actions < 1)
        throw std::invalid_argument("H, S, A must all be positive");
    MdpSpec mdp;
    mdp.horizon = horizon;
    mdp.num_states = num_states;
    mdp.num_actions = num_actions;
    const std::size_t n_sa = static_cast<std::size_t>(horizon) * num_states * num_actions;
    mdp.transitions.resize(n_sa * num_states);
    mdp.rewards.resize(n_sa);
    for (std::size_t i = 0; i < n_sa; ++i) {
        double* row = mdp.transitions.data() + i * num_states;
        double sum = 0.0;
        for (int y = 0; y < num_states; ++y) {
            row[y] = rng.uniform01();
            sum += row[y];
        }
        for (int y = 0; y < num_states; ++y) row[y] /= sum;
        mdp.rewards[i] = rng.uniform01();
    }
    mdp.initial_dist.assign(num_states, 1.0 / num_states);
    return mdp;
}

// Hard family: uniform transitions and initial state, reward 1 exactly on
// the hidden action table a_star. An H-fold bank of parallel A-armed
// bandits; the optimal value from every state is H.
inline MdpSpec make_hard_instance(int horizon, int num_states, int num_actions,
                                  const DeterministicPolicy& a_star) {
    if (a_star.horizon != horizon || a_star.num_states != num_states)
        throw std::invalid_argument("a_star shape does not match (H, S)");
    for (const int a : a_star.actions)
        if (a < 0 || a >= num_actions)
            throw std::invalid_argument("a_star action out of range");
    MdpSpec mdp;
    mdp.horizon = horizon;
    mdp.num_states = num_states;
    mdp.num_actions = num_actions;
    const std::size_t n_sa = static_cast<std::size_t>(horizon) * num_states * num_actions;
    mdp.transitions.assign(n_sa * num_states, 1.0 / num_states);
    mdp.rewards.assign(n_sa, 0.0);
    for (int h = 0; h < horizon; ++h)
        for (int x = 0; x < num_states; ++x)
            mdp.rewards[mdp.sa_index(h, x, a_star.at(h, x))] = 1.0;
    mdp.initial_dist.assign(num_states, 1.0 / num_states);
    return mdp;
}

inline DeterministicPolicy random_action_table(int horizon, int num_states,
                                               int num_actions, Rng& rng) {
    DeterministicPolicy table{horizon, num_states,
                              std::vector<int>(static_cast<std::size_t>(horizon) * num_states)};
    for (int& a : table.actions)
        a = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(num_actions)));
    return table;
}

// Fraction of (h,x) pairs where the policy matches a_star, divided by S:
// the exact expected initial value of a policy on the hard instance.
inline double hard_instance_policy_value(const DeterministicPolicy& policy,
                                         const DeterministicPolicy& a_star) {
    if (policy.actions.size() != a_star.actions.size())
        throw std::invalid_argument("shape mismatch");
    int matches = 0;
    for (std::size_t i = 0; i < policy.actions.size(); ++i)
        if (policy.actions[i] == a_star.actions[i]) ++matches;
    return static_cast<double>(matches) / a_star.num_states;
}

}  // namespace lowswitch

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lowswitch/agent.hpp"
#include "lowswitch/mdp.hpp"
#include "lowswitch/rng.hpp"

namespace lowswitch {

struct LowerBoundConfig {
    int horizon = 2;
    int num_states = 3;
    int num_actions = 4;
    std::int64_t switch_budget = -1;  // defaults to floor(H*S*A/2)
    int draws = 200;                  // hidden action tables sampled
    std::int64_t episodes = 500;      // per draw
    // Bonus constant of the capped explorer. Smaller than the learner
    // default so the budget actually gets spent at desk scale; any choice
    // keeps the agent inside the budgeted class the bound quantifies over.
    double agent_c = 0.25;
    double failure_prob = 0.05;

    std::int64_t effective_budget() const {
        return switch_budget >= 0
                   ? switch_budget
                   : static_cast<std::int64_t>(horizon) * num_states * num_actions / 2;
    }
};

struct LowerBoundReport {
    int draws = 0;
    std::int64_t episodes = 0;
    std::int64_t budget = 0;
    // Mean over draws and episodes of the exact per-episode value
    // E_{x1}[V_1^{pi_k}].
    double mean_value = 0.0;
    // Mean over draws and episodes of the cumulative switch count before
    // each episode.
    double mean_cum_switches = 0.0;
    // Standard error of the per-draw statistic mean_k[V] - mean_k[N]/SA.
    double centered_se = 0.0;
    double value_se = 0.0;
    bool warned_small_a = false;
};

// One draw: a UCB2H explorer on the hidden-instance whose policy syncs are
// suppressed once the local switch budget would be exceeded, and which only
// ever switches a row to a previously untried action.
struct LowerBoundDrawStats {
    double mean_value = 0.0;
    double mean_cum_switches = 0.0;
    std::int64_t total_switches = 0;
};

inline LowerBoundDrawStats run_budgeted_explorer(const LowerBoundConfig& cfg,
                                                 const DeterministicPolicy& a_star,
                                                 Rng& rng) {
    const MdpSpec mdp =
        make_hard_instance(cfg.horizon, cfg.num_states, cfg.num_actions, a_star);
    AgentConfig agent_cfg;
    agent_cfg.variant = ExplorationVariant::Ucb2Hoeffding;
    agent_cfg.hoeffding_c = cfg.agent_c;
    agent_cfg.failure_prob = cfg.failure_prob;
    agent_cfg.planned_episodes = cfg.episodes;
    AgentState agent(agent_cfg, mdp);
    const std::int64_t budget = cfg.effective_budget();

    std::vector<char> tried(static_cast<std::size_t>(cfg.horizon) * cfg.num_states *
                                cfg.num_actions,
                            0);
    std::int64_t switches_used = 0;
    double value_sum = 0.0;
    double switch_sum = 0.0;

    for (std::int64_t k = 1; k <= cfg.episodes; ++k) {
        switch_sum += static_cast<double>(switches_used);
        value_sum += hard_instance_policy_value(agent.current_policy(), a_star);

        int x = rng.categorical(mdp.initial_dist);
        for (int h = 0; h < cfg.horizon; ++h) {
            const int a = agent.act(h, x);
            tried[agent.sa_index(h, x, a)] = 1;
            const double r = mdp.reward(h, x, a);
            const int x_next = rng.categorical(mdp.transition_row(h, x, a));

            // Same update as the plain learner, but with the sync gated:
            // a trigger may only switch the row to an untried action, and
            // only while the switch budget lasts.
            const bool fired = agent.observe_update_only(h, x, a, r, x_next);
            if (fired) {
                int cand = 0;
                for (int aa = 1; aa < cfg.num_actions; ++aa)
                    if (agent.q_running_value(h, x, aa) > agent.q_running_value(h, x, cand))
                        cand = aa;
                if (cand == a) {
                    agent.sync_row(h, x);  // argmax unchanged: not a switch
                } else if (!tried[agent.sa_index(h, x, cand)] && switches_used < budget) {
                    agent.sync_row(h, x);
                    ++switches_used;
                }
                // Otherwise the sync is suppressed and the row stays stale.
            }
            x = x_next;
        }
    }
    return {value_sum / static_cast<double>(cfg.episodes),
            switch_sum / static_cast<double>(cfg.episodes), switches_used};
}

inline LowerBoundReport run_lower_bound_experiment(const LowerBoundConfig& cfg,
                                                   const Rng& master) {
    if (cfg.draws < 1) throw std::invalid_argument("draws must be >= 1");
    LowerBoundReport report;
    report.draws = cfg.draws;
    report.episodes = cfg.episodes;
    report.budget = cfg.effective_budget();
    report.warned_small_a = cfg.num_actions < 4;

    const double sa = static_cast<double>(cfg.num_states) * cfg.num_actions;
    std::vector<double> draw_values(static_cast<std::size_t>(cfg.draws));
    std::vector<double> draw_centered(static_cast<std::size_t>(cfg.draws));
    double value_total = 0.0;
    double switch_total = 0.0;
    for (int d = 0; d < cfg.draws; ++d) {
        Rng astar_rng = master.substream(static_cast<std::uint64_t>(d), 1);
        Rng run_rng = master.substream(static_cast<std::uint64_t>(d), 2);
        const DeterministicPolicy a_star =
            random_action_table(cfg.horizon, cfg.num_states, cfg.num_actions, astar_rng);
        const auto stats = run_budgeted_explorer(cfg, a_star, run_rng);
        draw_values[static_cast<std::size_t>(d)] = stats.mean_value;
        draw_centered[static_cast<std::size_t>(d)] =
            stats.mean_value - stats.mean_cum_switches / sa;
        value_total += stats.mean_value;
        switch_total += stats.mean_cum_switches;
    }
    report.mean_value = value_total / cfg.draws;
    report.mean_cum_switches = switch_total / cfg.draws;

    const auto stderr_of = [&](const std::vector<double>& xs, double mean) {
        if (xs.size() < 2) return 0.0;
        double ss = 0.0;
        for (const double v : xs) ss += (v - mean) * (v - mean);
        return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                         static_cast<double>(xs.size()));
    };
    report.value_se = stderr_of(draw_values, report.mean_value);
    double centered_mean = 0.0;
    for (const double v : draw_centered) centered_mean += v;
    centered_mean /= static_cast<double>(cfg.draws);
    report.centered_se = stderr_of(draw_centered, centered_mean);
    return report;
}

}  // namespace lowswitch

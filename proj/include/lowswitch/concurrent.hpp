#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lowswitch/agent.hpp"
#include "lowswitch/mdp.hpp"
#include "lowswitch/metrics.hpp"
#include "lowswitch/rng.hpp"

namespace lowswitch {

struct ConcurrentConfig {
    int machines = 1;  // M
    AgentConfig agent;
    // Stop once this many episodes have been kept (the final partial phase
    // is truncated at the episode reaching the target) ...
    std::int64_t total_kept_episodes = 0;
    // ... or when this many rounds have been played, if nonnegative.
    std::int64_t max_rounds = -1;

    void validate() const {
        if (machines < 1) throw std::invalid_argument("machines must be >= 1");
        if (total_kept_episodes < 1 && max_rounds < 0)
            throw std::invalid_argument("a stopping criterion is required");
        agent.validate();
    }
};

struct ConcurrentResult {
    std::int64_t rounds = 0;
    std::int64_t kept = 0;
    std::int64_t discarded = 0;
    // Policy-update (phase-transition) count; the rounds bound
    // R <= policy_syncs + ceil(kept/M) + 1 is stated against this.
    std::int64_t policy_syncs = 0;

    // Ordered kept-trajectory log, with per-episode metadata.
    std::vector<Trajectory> kept_log;
    std::vector<int> phase_of_episode;          // per kept episode
    std::vector<bool> episode_fired_trigger;    // per kept episode
    // Frozen policy of each phase; phase_policies.size() == phases started.
    std::vector<DeterministicPolicy> phase_policies;
    DeterministicPolicy final_policy;

    // Episode-start-policy switching costs of the equivalent sequential
    // execution, for cross-module invariants.
    std::int64_t local_switch_cost = 0;
    std::int64_t global_switch_cost = 0;
    double cumulative_regret = 0.0;

    double speedup() const {
        return rounds == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(rounds);
    }
};

// Concurrent Q-learning: M machines play the frozen policy each round;
// trajectories are aggregated in machine order and fed through the UCB2
// trigger bookkeeping. The first episode whose processing fires a trigger
// ends the phase; the rest of that round is discarded. Per-(phase, round,
// machine) substreams make the result independent of execution order.
inline ConcurrentResult run_concurrent(const MdpSpec& mdp, const ConcurrentConfig& config,
                                       const Rng& master) {
    config.validate();
    require_valid(mdp);
    AgentConfig agent_cfg = config.agent;
    if (agent_cfg.planned_episodes == 0)
        agent_cfg.planned_episodes = config.total_kept_episodes;

    AgentState agent(agent_cfg, mdp);
    RegretLedger regret(mdp);
    SwitchLedger switches(mdp.horizon, mdp.num_states);
    ConcurrentResult result;
    const int machines = config.machines;

    bool stop = false;
    for (std::int64_t phase = 0; !stop; ++phase) {
        const DeterministicPolicy frozen = agent.current_policy();
        result.phase_policies.push_back(frozen);
        bool phase_done = false;
        for (std::int64_t round = 1; !phase_done && !stop; ++round) {
            if (config.max_rounds >= 0 && result.rounds >= config.max_rounds) {
                stop = true;
                break;
            }
            ++result.rounds;
            // All M machines play the frozen policy on independent streams.
            std::vector<Trajectory> batch;
            batch.reserve(machines);
            for (int m = 1; m <= machines; ++m) {
                Rng stream = master.substream(static_cast<std::uint64_t>(phase),
                                              static_cast<std::uint64_t>(round),
                                              static_cast<std::uint64_t>(m));
                batch.push_back(sample_episode(mdp, frozen, stream));
            }
            // Aggregate in machine order; stop at the first trigger.
            for (int m = 1; m <= machines; ++m) {
                const Trajectory& traj = batch[static_cast<std::size_t>(m - 1)];
                switches.record_policy(frozen);
                regret.record_episode(frozen, traj.steps.front().state);
                bool fired = false;
                for (int h = 0; h < mdp.horizon; ++h) {
                    const auto& step = traj.steps[static_cast<std::size_t>(h)];
                    const int x_next = h + 1 < mdp.horizon
                                           ? traj.steps[static_cast<std::size_t>(h + 1)].state
                                           : traj.terminal_state;
                    fired |= agent.observe(h, step.state, step.action, step.reward, x_next);
                }
                result.kept_log.push_back(traj);
                result.phase_of_episode.push_back(static_cast<int>(phase));
                result.episode_fired_trigger.push_back(fired);
                ++result.kept;
                if (config.total_kept_episodes > 0 &&
                    result.kept >= config.total_kept_episodes) {
                    stop = true;
                    result.discarded += machines - m;
                    break;
                }
                if (fired) {
                    phase_done = true;
                    ++result.policy_syncs;
                    result.discarded += machines - m;
                    break;
                }
            }
        }
    }
    result.final_policy = agent.current_policy();
    result.local_switch_cost = switches.local_cost();
    result.global_switch_cost = switches.global_cost();
    result.cumulative_regret = regret.cumulative_regret();
    return result;
}

// Strong determinized form of the execution-path equivalence: feeding the
// kept trajectories, in order, through a fresh sequential learner must
// reproduce the recorded actions, trigger episodes and phase policies
// exactly.
inline bool replay_equivalence_check(const MdpSpec& mdp, const ConcurrentResult& result,
                                     const AgentConfig& agent_config,
                                     std::int64_t total_kept_episodes = 0) {
    AgentConfig cfg = agent_config;
    if (cfg.planned_episodes == 0)
        cfg.planned_episodes =
            total_kept_episodes > 0 ? total_kept_episodes : result.kept;
    AgentState agent(cfg, mdp);
    if (result.kept != static_cast<std::int64_t>(result.kept_log.size())) return false;

    for (std::size_t k = 0; k < result.kept_log.size(); ++k) {
        const int phase = result.phase_of_episode[k];
        if (phase < 0 || phase >= static_cast<int>(result.phase_policies.size()))
            return false;
        // The policy in force must match the recorded frozen policy.
        if (agent.current_policy() != result.phase_policies[static_cast<std::size_t>(phase)])
            return false;
        const Trajectory& traj = result.kept_log[k];
        bool fired = false;
        for (int h = 0; h < mdp.horizon; ++h) {
            const auto& step = traj.steps[static_cast<std::size_t>(h)];
            if (agent.act(h, step.state) != step.action) return false;
            if (step.reward != mdp.reward(h, step.state, step.action)) return false;
            const int x_next = h + 1 < mdp.horizon
                                   ? traj.steps[static_cast<std::size_t>(h + 1)].state
                                   : traj.terminal_state;
            fired |= agent.observe(h, step.state, step.action, step.reward, x_next);
        }
        if (fired != static_cast<bool>(result.episode_fired_trigger[k])) return false;
        // A trigger ends the phase unless the run stopped at this episode.
        if (k + 1 < result.kept_log.size()) {
            const int next_phase = result.phase_of_episode[k + 1];
            if (fired && next_phase != phase + 1) return false;
            if (!fired && next_phase != phase) return false;
        }
    }
    return agent.current_policy() == result.final_policy;
}

struct MistakeBoundReport {
    std::int64_t exploration_actions = 0;   // R * H * M, bookkeeping identity
    std::int64_t eps_suboptimal_episodes = 0;
    double epsilon = 0.0;
    double final_policy_gap = 0.0;
    bool final_policy_eps_optimal = false;
    // Zero when the final policy is eps-optimal: running it forever makes
    // no further mistakes.
    std::int64_t post_exploration_mistakes = 0;
};

// Counts exploration-phase actions (all M machines are charged each round,
// including partial rounds) and eps-suboptimal kept episodes, judged by the
// exact expected initial value of each episode's frozen policy.
inline MistakeBoundReport mistake_bound_report(const MdpSpec& mdp,
                                               const ConcurrentResult& result,
                                               int machines, double epsilon) {
    MistakeBoundReport report;
    report.epsilon = epsilon;
    report.exploration_actions =
        result.rounds * static_cast<std::int64_t>(mdp.horizon) * machines;

    const ValueTables opt = optimal_values(mdp);
    const double v_star = expected_initial_value(mdp, opt);
    std::vector<double> phase_value(result.phase_policies.size());
    for (std::size_t p = 0; p < result.phase_policies.size(); ++p)
        phase_value[p] =
            expected_initial_value(mdp, policy_values(mdp, result.phase_policies[p]));
    for (std::size_t k = 0; k < result.kept_log.size(); ++k) {
        const double gap = v_star - phase_value[static_cast<std::size_t>(
                                        result.phase_of_episode[k])];
        if (gap > epsilon) ++report.eps_suboptimal_episodes;
    }
    report.final_policy_gap =
        v_star - expected_initial_value(mdp, policy_values(mdp, result.final_policy));
    report.final_policy_eps_optimal = report.final_policy_gap <= epsilon;
    report.post_exploration_mistakes = report.final_policy_eps_optimal
                                           ? 0
                                           : -1;  // unbounded without further learning
    return report;
}

}  // namespace lowswitch

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lowswitch/mdp.hpp"
#include "lowswitch/metrics.hpp"
#include "lowswitch/rng.hpp"
#include "lowswitch/schedule.hpp"

namespace lowswitch {

enum class ExplorationVariant {
    Ucb2Hoeffding,
    Ucb2Bernstein,
    VanillaHoeffding,  // always-switch baseline: every update syncs the policy
};

struct AgentConfig {
    ExplorationVariant variant = ExplorationVariant::Ucb2Hoeffding;
    // Schedule parameters; 0 means "use defaults for the MDP horizon".
    double eta = 0.0;
    std::int64_t r_star = 0;
    double hoeffding_c = 1.0;
    double bernstein_c1 = 1.0;
    double bernstein_c2 = 2.0;
    double failure_prob = 0.05;          // p
    std::int64_t planned_episodes = 0;   // K; the bonuses depend on T = K*H
    // Keep per-(h,x,a) bonus histories for the telescoping check.
    bool record_bonus_history = false;

    void validate() const {
        if (planned_episodes < 0) throw std::invalid_argument("K must be >= 0");
        if (!(failure_prob > 0.0 && failure_prob < 1.0))
            throw std::invalid_argument("failure probability must lie in (0,1)");
        if (hoeffding_c <= 0.0 || bernstein_c1 <= 0.0 || bernstein_c2 <= 0.0)
            throw std::invalid_argument("bonus constants must be positive");
        if (eta != 0.0 && !(eta > 0.0 && eta <= 1.0))
            throw std::invalid_argument("eta must lie in (0,1]");
    }
};

// Hoeffding-type bonus b_t = c sqrt(H^3 l / t).
inline double bonus_hoeffding(std::int64_t t, int horizon, double ell, double c) {
    const double h = static_cast<double>(horizon);
    return c * std::sqrt(h * h * h * ell / static_cast<double>(t));
}

// Empirical variance of the accumulated next-step values: second moment
// minus squared mean, clamped at zero.
inline double sample_variance_w(std::int64_t t, double mu_acc, double sigma_acc) {
    const double td = static_cast<double>(t);
    const double mean = mu_acc / td;
    return std::max(0.0, sigma_acc / td - mean * mean);
}

// beta_t = min{ c1 ( sqrt((H/t)(W_t + H) l) + sqrt(H^7 S A) l / t ),
//               c2 sqrt(H^3 l / t) }.
inline double beta_bernstein(std::int64_t t, double w, int horizon, int num_states,
                             int num_actions, double ell, double c1, double c2) {
    const double h = static_cast<double>(horizon);
    const double td = static_cast<double>(t);
    const double variance_branch =
        c1 * (std::sqrt(h / td * (w + h) * ell) +
              std::sqrt(std::pow(h, 7) * num_states * num_actions) * ell / td);
    const double hoeffding_branch = c2 * std::sqrt(h * h * h * ell / td);
    return std::min(variance_branch, hoeffding_branch);
}

// b_t = (beta_t - (1 - alpha_t) beta_{t-1}) / (2 alpha_t). Deliberately not
// clamped at zero: the telescoped sum 2 sum_i alpha_t^i b_i must equal
// beta_t exactly.
inline double bonus_bernstein(double beta_t, double beta_prev, double alpha_t) {
    if (alpha_t <= 0.0) throw std::invalid_argument("alpha_t must be positive");
    return (beta_t - (1.0 - alpha_t) * beta_prev) / (2.0 * alpha_t);
}

// The learner's mutable state: a running estimate q_running updated on
// every visit, and a delayed copy q_policy that selects actions and is
// synced row-wise at schedule triggers.
class AgentState {
  public:
    AgentState(const AgentConfig& config, const MdpSpec& mdp)
        : config_(config), horizon_(mdp.horizon), num_states_(mdp.num_states),
          num_actions_(mdp.num_actions),
          schedule_(make_schedule(config, mdp.horizon)) {
        config_.validate();
        if (config_.planned_episodes < 1)
            throw std::invalid_argument("planned_episodes must be set before running");
        const double t_total =
            static_cast<double>(config_.planned_episodes) * horizon_;
        ell_ = std::log(static_cast<double>(num_states_) * num_actions_ * t_total /
                        config_.failure_prob);
        const std::size_t n_sa =
            static_cast<std::size_t>(horizon_) * num_states_ * num_actions_;
        q_running_.assign(n_sa, static_cast<double>(horizon_));
        q_policy_.assign(n_sa, static_cast<double>(horizon_));
        visits_.assign(n_sa, 0);
        v_running_.assign(static_cast<std::size_t>(horizon_ + 1) * num_states_, 0.0);
        for (int h = 0; h < horizon_; ++h)
            for (int x = 0; x < num_states_; ++x)
                v_running_[static_cast<std::size_t>(h) * num_states_ + x] =
                    static_cast<double>(horizon_);
        if (config_.variant == ExplorationVariant::Ucb2Bernstein) {
            mu_acc_.assign(n_sa, 0.0);
            sigma_acc_.assign(n_sa, 0.0);
            beta_prev_.assign(n_sa, 0.0);
        }
        if (config_.record_bonus_history) bonus_history_.resize(n_sa);
    }

    int horizon() const { return horizon_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double ell() const { return ell_; }
    const AgentConfig& config() const { return config_; }
    const TriggerSchedule& schedule() const { return schedule_; }

    // argmax over the delayed estimates, ties broken by lowest index.
    int act(int h, int x) const {
        const double* row = q_policy_.data() + row_index(h, x);
        int best = 0;
        for (int a = 1; a < num_actions_; ++a)
            if (row[a] > row[best]) best = a;
        return best;
    }

    // One Q-learning update from an observed transition. Returns whether a
    // schedule trigger fired (and the policy row was synced).
    bool observe(int h, int x, int a, double r, int x_next) {
        const bool fired = observe_update_only(h, x, a, r, x_next);
        if (fired) sync_row(h, x);
        return fired;
    }

    // The same update with the policy sync left to the caller, for agents
    // that gate their switches (e.g. under a switch budget).
    bool observe_update_only(int h, int x, int a, double r, int x_next) {
        const std::size_t i = sa_index(h, x, a);
        const std::int64_t t = ++visits_[i];
        const double alpha = alpha_step(horizon_, t);
        const double v_next = v_running_[static_cast<std::size_t>(h + 1) * num_states_ + x_next];

        double bonus = 0.0;
        switch (config_.variant) {
            case ExplorationVariant::Ucb2Hoeffding:
            case ExplorationVariant::VanillaHoeffding:
                bonus = bonus_hoeffding(t, horizon_, ell_, config_.hoeffding_c);
                break;
            case ExplorationVariant::Ucb2Bernstein: {
                // Accumulators take the new observation before W_t is formed.
                mu_acc_[i] += v_next;
                sigma_acc_[i] += v_next * v_next;
                const double w = sample_variance_w(t, mu_acc_[i], sigma_acc_[i]);
                const double beta =
                    beta_bernstein(t, w, horizon_, num_states_, num_actions_, ell_,
                                   config_.bernstein_c1, config_.bernstein_c2);
                bonus = bonus_bernstein(beta, beta_prev_[i], alpha);
                beta_prev_[i] = beta;
                break;
            }
        }
        if (config_.record_bonus_history) bonus_history_[i].push_back(bonus);

        q_running_[i] = (1.0 - alpha) * q_running_[i] + alpha * (r + v_next + bonus);

        const double* qrow = q_running_.data() + row_index(h, x);
        double vmax = qrow[0];
        for (int aa = 1; aa < num_actions_; ++aa) vmax = std::max(vmax, qrow[aa]);
        v_running_[static_cast<std::size_t>(h) * num_states_ + x] =
            std::min(static_cast<double>(horizon_), std::max(0.0, vmax));

        return config_.variant == ExplorationVariant::VanillaHoeffding
                   ? true
                   : schedule_.is_trigger(t);
    }

    // Row-wise sync of the delayed estimates (the whole action row).
    void sync_row(int h, int x) {
        const std::size_t base = row_index(h, x);
        for (int a = 0; a < num_actions_; ++a) q_policy_[base + a] = q_running_[base + a];
    }

    DeterministicPolicy current_policy() const {
        DeterministicPolicy pol{horizon_, num_states_,
                                std::vector<int>(static_cast<std::size_t>(horizon_) *
                                                 num_states_)};
        for (int h = 0; h < horizon_; ++h)
            for (int x = 0; x < num_states_; ++x) pol.at(h, x) = act(h, x);
        return pol;
    }

    std::int64_t visit_count(int h, int x, int a) const { return visits_[sa_index(h, x, a)]; }
    double q_running_value(int h, int x, int a) const { return q_running_[sa_index(h, x, a)]; }
    double q_policy_value(int h, int x, int a) const { return q_policy_[sa_index(h, x, a)]; }
    double v_running_value(int h, int x) const {
        return v_running_[static_cast<std::size_t>(h) * num_states_ + x];
    }
    double beta_current(int h, int x, int a) const {
        return beta_prev_.empty() ? 0.0 : beta_prev_[sa_index(h, x, a)];
    }
    const std::vector<double>& bonus_history(int h, int x, int a) const {
        return bonus_history_[sa_index(h, x, a)];
    }

    std::size_t sa_index(int h, int x, int a) const {
        return (static_cast<std::size_t>(h) * num_states_ + x) * num_actions_ + a;
    }

  private:
    static TriggerSchedule make_schedule(const AgentConfig& config, int horizon) {
        if (config.variant == ExplorationVariant::VanillaHoeffding ||
            (config.eta == 0.0 && config.r_star == 0))
            return TriggerSchedule::with_defaults(horizon);
        if (config.eta == 0.0 || config.r_star == 0)
            throw std::invalid_argument("eta and r_star must be set together");
        return TriggerSchedule(config.eta, config.r_star);
    }

    std::size_t row_index(int h, int x) const {
        return (static_cast<std::size_t>(h) * num_states_ + x) * num_actions_;
    }

    AgentConfig config_;
    int horizon_;
    int num_states_;
    int num_actions_;
    TriggerSchedule schedule_;
    double ell_ = 0.0;
    std::vector<double> q_running_;
    std::vector<double> q_policy_;
    std::vector<double> v_running_;  // rows 0..H, row H fixed at zero
    std::vector<std::int64_t> visits_;
    std::vector<double> mu_acc_;
    std::vector<double> sigma_acc_;
    std::vector<double> beta_prev_;
    std::vector<std::vector<double>> bonus_history_;
};

struct EpisodeRecord {
    std::int64_t episode = 0;        // 1-based
    int initial_state = 0;           // 0-based internally
    double regret_increment = 0.0;
    double cum_regret = 0.0;
    std::int64_t cum_local_switches = 0;
    std::int64_t cum_global_switches = 0;
    int triggers = 0;
    double realized_return = 0.0;
};

struct RunResult {
    std::vector<EpisodeRecord> episodes;
    // Distinct episode-start policies in first-seen order, and the id used
    // by each episode. Policy snapshots at switch points are exactly the
    // positions where ids change.
    std::vector<DeterministicPolicy> distinct_policies;
    std::vector<int> episode_policy_id;
    std::int64_t local_switch_cost = 0;
    std::int64_t global_switch_cost = 0;
    double cumulative_regret = 0.0;
    std::int64_t negative_increments_flagged = 0;

    std::int64_t episodes_played() const {
        return static_cast<std::int64_t>(episodes.size());
    }
};

// Play one episode with the agent's current delayed policy, applying
// updates step by step exactly in the inner-loop order (so a trigger at
// step h syncs row (h, x_h) immediately).
inline Trajectory play_episode(AgentState& agent, const MdpSpec& mdp, Rng& rng,
                               int* triggers_fired = nullptr) {
    Trajectory traj;
    traj.steps.reserve(mdp.horizon);
    int x = rng.categorical(mdp.initial_dist);
    int fired = 0;
    for (int h = 0; h < mdp.horizon; ++h) {
        const int a = agent.act(h, x);
        const double r = mdp.reward(h, x, a);
        const int x_next = rng.categorical(mdp.transition_row(h, x, a));
        traj.steps.push_back({x, a, r});
        fired += agent.observe(h, x, a, r, x_next) ? 1 : 0;
        x = x_next;
    }
    traj.terminal_state = x;
    if (triggers_fired) *triggers_fired = fired;
    return traj;
}

// K episodes of the configured learner on the given MDP. Regret is the
// exact DP evaluation of the episode-start policy; switching costs are
// differences of consecutive episode-start policies.
inline RunResult run_agent(const AgentConfig& config, const MdpSpec& mdp,
                           std::int64_t episodes, Rng& rng) {
    AgentConfig cfg = config;
    if (cfg.planned_episodes == 0) cfg.planned_episodes = episodes;
    if (cfg.planned_episodes != episodes)
        throw std::invalid_argument("config.planned_episodes must equal K");
    require_valid(mdp);

    RunResult result;
    if (episodes == 0) return result;

    AgentState agent(cfg, mdp);
    RegretLedger regret(mdp);
    SwitchLedger switches(mdp.horizon, mdp.num_states);
    std::unordered_map<std::vector<int>, int, PolicyTableHash> policy_ids;
    result.episodes.reserve(static_cast<std::size_t>(episodes));
    result.episode_policy_id.reserve(static_cast<std::size_t>(episodes));

    for (std::int64_t k = 1; k <= episodes; ++k) {
        const DeterministicPolicy policy = agent.current_policy();
        switches.record_policy(policy);
        auto [it, inserted] =
            policy_ids.emplace(policy.actions, static_cast<int>(result.distinct_policies.size()));
        if (inserted) result.distinct_policies.push_back(policy);
        result.episode_policy_id.push_back(it->second);

        int fired = 0;
        const Trajectory traj = play_episode(agent, mdp, rng, &fired);
        const int x1 = traj.steps.front().state;
        const double inc = regret.record_episode(policy, x1);
        if (inc < -1e-9) ++result.negative_increments_flagged;

        EpisodeRecord rec;
        rec.episode = k;
        rec.initial_state = x1;
        rec.regret_increment = inc;
        rec.cum_regret = regret.cumulative_regret();
        rec.cum_local_switches = switches.local_cost();
        rec.cum_global_switches = switches.global_cost();
        rec.triggers = fired;
        rec.realized_return = traj.total_return();
        result.episodes.push_back(rec);
    }
    result.local_switch_cost = switches.local_cost();
    result.global_switch_cost = switches.global_cost();
    result.cumulative_regret = regret.cumulative_regret();
    return result;
}

// Uniform mixture over the episode-start policies of a run, stored as
// weighted distinct snapshots.
struct MixturePolicy {
    std::vector<DeterministicPolicy> policies;
    std::vector<double> weights;
};

inline MixturePolicy extract_mixture_policy(const RunResult& result,
                                            std::int64_t first_episodes = 0) {
    const std::int64_t total = result.episodes_played();
    const std::int64_t count =
        first_episodes > 0 ? std::min(first_episodes, total) : total;
    if (count == 0) throw std::invalid_argument("cannot extract mixture of an empty run");
    std::vector<std::int64_t> tally(result.distinct_policies.size(), 0);
    for (std::int64_t k = 0; k < count; ++k) ++tally[result.episode_policy_id[k]];
    MixturePolicy mix;
    for (std::size_t id = 0; id < tally.size(); ++id)
        if (tally[id] > 0) {
            mix.policies.push_back(result.distinct_policies[id]);
            mix.weights.push_back(static_cast<double>(tally[id]) /
                                  static_cast<double>(count));
        }
    return mix;
}

// V*_1(x1) - V^mix_1(x1), both sides exact.
inline double pac_gap(const MdpSpec& mdp, const MixturePolicy& mixture, int x1) {
    const ValueTables opt = optimal_values(mdp);
    double mix_value = 0.0;
    for (std::size_t j = 0; j < mixture.policies.size(); ++j)
        mix_value += mixture.weights[j] * policy_values(mdp, mixture.policies[j]).value(0, x1);
    return opt.value(0, x1) - mix_value;
}

}  // namespace lowswitch

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "lowswitch/mdp.hpp"
#include "lowswitch/schedule.hpp"

namespace lowswitch {

// Number of (h,x) pairs on which the two policies prescribe different
// actions.
inline std::int64_t local_switch_cost(const DeterministicPolicy& p1,
                                      const DeterministicPolicy& p2) {
    if (p1.horizon != p2.horizon || p1.num_states != p2.num_states)
        throw std::invalid_argument("local_switch_cost: shape mismatch");
    std::int64_t n = 0;
    for (std::size_t i = 0; i < p1.actions.size(); ++i)
        if (p1.actions[i] != p2.actions[i]) ++n;
    return n;
}

// Cumulative local and global switching cost over a sequence of
// episode-start policies, with per-(h,x) counts.
class SwitchLedger {
  public:
    SwitchLedger(int horizon, int num_states)
        : horizon_(horizon), num_states_(num_states),
          per_pair_(static_cast<std::size_t>(horizon) * num_states, 0) {}

    // Record the policy in force at the next episode start.
    void record_policy(const DeterministicPolicy& policy) {
        if (has_prev_) {
            std::int64_t diff = 0;
            for (std::size_t i = 0; i < policy.actions.size(); ++i)
                if (policy.actions[i] != prev_.actions[i]) {
                    ++per_pair_[i];
                    ++diff;
                }
            local_ += diff;
            if (diff > 0) ++global_;
        }
        prev_ = policy;
        has_prev_ = true;
    }

    std::int64_t local_cost() const { return local_; }
    std::int64_t global_cost() const { return global_; }
    const std::vector<std::int64_t>& per_pair_counts() const { return per_pair_; }

  private:
    int horizon_;
    int num_states_;
    std::vector<std::int64_t> per_pair_;
    DeterministicPolicy prev_;
    bool has_prev_ = false;
    std::int64_t local_ = 0;
    std::int64_t global_ = 0;
};

struct PolicyTableHash {
    std::size_t operator()(const std::vector<int>& actions) const {
        std::uint64_t h = 1469598103934665603ULL;
        for (const int a : actions) {
            h ^= static_cast<std::uint64_t>(a) + 0x9e3779b97f4a7c15ULL;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

// Exact per-episode regret, V*_1(x_1) - V^pi_1(x_1), with policy
// evaluations cached by the action-table content (hash plus full key
// comparison, so collisions cannot corrupt values).
class RegretLedger {
  public:
    explicit RegretLedger(const MdpSpec& mdp)
        : mdp_(&mdp), optimal_(optimal_values(mdp)) {}

    // Returns the regret increment for an episode started in state x1
    // under the given policy, and accumulates it.
    double record_episode(const DeterministicPolicy& policy, int x1) {
        const auto& v1 = initial_values(policy);
        const double inc = optimal_.value(0, x1) - v1[x1];
        cumulative_ += inc;
        ++episodes_;
        return inc;
    }

    // V^pi_1 per initial state, from the cache.
    const std::vector<double>& initial_values(const DeterministicPolicy& policy) {
        auto it = cache_.find(policy.actions);
        if (it == cache_.end()) {
            const auto values = policy_values(*mdp_, policy);
            std::vector<double> row(values.v.begin(),
                                    values.v.begin() + mdp_->num_states);
            it = cache_.emplace(policy.actions, std::move(row)).first;
        }
        return it->second;
    }

    const ValueTables& optimal() const { return optimal_; }
    double cumulative_regret() const { return cumulative_; }
    std::int64_t episodes() const { return episodes_; }
    std::size_t cache_size() const { return cache_.size(); }

  private:
    const MdpSpec* mdp_;
    ValueTables optimal_;
    std::unordered_map<std::vector<int>, std::vector<double>, PolicyTableHash> cache_;
    double cumulative_ = 0.0;
    std::int64_t episodes_ = 0;
};

// Deterministic upper bound on the local switching cost of a UCB2-scheduled
// run: each (h,x,a) contributes at most tau(r_star) stage-I triggers plus
// one trigger per epoch index r in (r_star, log_{1+eta}(K+H)], with one
// epoch of slack for the epoch straddling K.
inline std::int64_t switching_bound(int horizon, int num_states, int num_actions,
                                    std::int64_t episodes, double eta,
                                    std::int64_t r_star) {
    const std::int64_t tau_r_star = detail::tau_of(eta, r_star);
    const double stage2 =
        std::max(0.0, std::log(static_cast<double>(episodes + horizon) / num_actions) /
                              std::log1p(eta) -
                          static_cast<double>(r_star) + 1.0);
    const double per_pair =
        static_cast<double>(horizon) * num_states * num_actions *
        (static_cast<double>(tau_r_star) + stage2);
    return static_cast<std::int64_t>(std::ceil(per_pair));
}

}  // namespace lowswitch

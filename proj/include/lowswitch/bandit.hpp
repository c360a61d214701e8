#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lowswitch/rng.hpp"
#include "lowswitch/schedule.hpp"

namespace lowswitch {

// Bernoulli arms with means in [0,1]; a mean of 0 or 1 is a point mass.
struct BanditInstance {
    std::vector<double> means;

    void validate() const {
        if (means.empty()) throw std::invalid_argument("at least one arm required");
        for (const double m : means)
            if (m < 0.0 || m > 1.0)
                throw std::invalid_argument("arm means must lie in [0,1]");
    }
    double best_mean() const {
        double best = means.front();
        for (const double m : means) best = std::max(best, m);
        return best;
    }
};

struct BanditEpochLogEntry {
    std::int64_t start_pull;  // 1-based pull index at which the epoch began
    int arm;
    std::int64_t epoch_index;  // r_j at the time the epoch was played
    std::int64_t length;
};

struct BanditRunResult {
    std::vector<int> pulls;                 // chosen arm per pull
    double pseudo_regret = 0.0;             // sum of (mu* - mu_{a_t})
    std::int64_t switch_count = 0;          // changes of arm between pulls
    std::vector<std::int64_t> epoch_counts; // final r_j per arm
    std::vector<std::int64_t> pull_counts;  // pulls per arm
    std::vector<BanditEpochLogEntry> epoch_log;
};

// Confidence radius a_r = sqrt((1+eta) ln(e t / tau(r)) / (2 tau(r))),
// where t is the current total pull count.
inline double ucb2_confidence_radius(std::int64_t t, std::int64_t tau_r, double eta) {
    if (t < 1 || tau_r < 1) throw std::invalid_argument("t and tau(r) must be >= 1");
    const double ln_term =
        std::max(0.0, 1.0 + std::log(static_cast<double>(t) / static_cast<double>(tau_r)));
    return std::sqrt((1.0 + eta) * ln_term / (2.0 * static_cast<double>(tau_r)));
}

// UCB2: play each arm once, then repeatedly pick the arm maximizing
// mean + a_{r_j} and play it for a whole epoch of max(1, tau(r_j+1) -
// tau(r_j)) pulls. The final epoch is truncated at T and does not advance
// the arm's epoch index, so sum_j tau(r_j) <= T holds at termination.
inline BanditRunResult run_ucb2(const BanditInstance& instance, std::int64_t total_pulls,
                                double eta, Rng& rng) {
    instance.validate();
    const int num_arms = static_cast<int>(instance.means.size());
    if (total_pulls < num_arms)
        throw std::invalid_argument("T must be at least the number of arms");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0,1)");

    BanditRunResult result;
    result.epoch_counts.assign(num_arms, 0);
    result.pull_counts.assign(num_arms, 0);
    std::vector<double> reward_sum(num_arms, 0.0);
    const double best = instance.best_mean();
    int last_arm = -1;

    const auto pull = [&](int arm) {
        const double reward = rng.bernoulli(instance.means[arm]) ? 1.0 : 0.0;
        reward_sum[arm] += reward;
        ++result.pull_counts[arm];
        result.pulls.push_back(arm);
        result.pseudo_regret += best - instance.means[arm];
        if (last_arm != -1 && arm != last_arm) ++result.switch_count;
        last_arm = arm;
    };

    for (int j = 0; j < num_arms; ++j) pull(j);

    while (static_cast<std::int64_t>(result.pulls.size()) < total_pulls) {
        const std::int64_t t = static_cast<std::int64_t>(result.pulls.size());
        int chosen = 0;
        double best_index = -1.0;
        for (int j = 0; j < num_arms; ++j) {
            const std::int64_t tau_r = detail::tau_of(eta, result.epoch_counts[j]);
            const double index = reward_sum[j] / result.pull_counts[j] +
                                 ucb2_confidence_radius(t, tau_r, eta);
            if (index > best_index) {
                best_index = index;
                chosen = j;
            }
        }
        const std::int64_t r = result.epoch_counts[chosen];
        const std::int64_t nominal =
            std::max<std::int64_t>(1, detail::tau_of(eta, r + 1) - detail::tau_of(eta, r));
        const std::int64_t remaining = total_pulls - t;
        const std::int64_t length = std::min(nominal, remaining);
        result.epoch_log.push_back({t + 1, chosen, r, length});
        for (std::int64_t i = 0; i < length; ++i) pull(chosen);
        if (length == nominal) ++result.epoch_counts[chosen];
    }
    return result;
}

// Classical UCB1 baseline: index mean + sqrt(2 ln t / n_j), one pull per
// selection. Switches on nearly every pull while exploring.
inline BanditRunResult run_ucb1_baseline(const BanditInstance& instance,
                                         std::int64_t total_pulls, Rng& rng) {
    instance.validate();
    const int num_arms = static_cast<int>(instance.means.size());
    if (total_pulls < num_arms)
        throw std::invalid_argument("T must be at least the number of arms");

    BanditRunResult result;
    result.epoch_counts.assign(num_arms, 0);
    result.pull_counts.assign(num_arms, 0);
    std::vector<double> reward_sum(num_arms, 0.0);
    const double best = instance.best_mean();
    int last_arm = -1;

    const auto pull = [&](int arm) {
        const double reward = rng.bernoulli(instance.means[arm]) ? 1.0 : 0.0;
        reward_sum[arm] += reward;
        ++result.pull_counts[arm];
        result.pulls.push_back(arm);
        result.pseudo_regret += best - instance.means[arm];
        if (last_arm != -1 && arm != last_arm) ++result.switch_count;
        last_arm = arm;
    };

    for (int j = 0; j < num_arms; ++j) pull(j);
    while (static_cast<std::int64_t>(result.pulls.size()) < total_pulls) {
        const auto t = static_cast<double>(result.pulls.size());
        int chosen = 0;
        double best_index = -1.0;
        for (int j = 0; j < num_arms; ++j) {
            const double index = reward_sum[j] / result.pull_counts[j] +
                                 std::sqrt(2.0 * std::log(t) / result.pull_counts[j]);
            if (index > best_index) {
                best_index = index;
                chosen = j;
            }
        }
        pull(chosen);
    }
    return result;
}

// Deterministic accounting checks from the epoch structure; used by the
// harness after every bandit run.
struct BanditInvariantReport {
    bool pull_conservation = false;  // sum_j pulls == T
    bool epoch_budget = false;       // sum_j tau(r_j) <= T + A
    bool switch_bound = false;       // switches <= sum_j r_j + A
    std::int64_t epoch_sum = 0;
    std::int64_t switch_limit = 0;
};

inline BanditInvariantReport check_bandit_invariants(const BanditRunResult& result,
                                                     std::int64_t total_pulls,
                                                     double eta) {
    BanditInvariantReport rep;
    const auto num_arms = static_cast<std::int64_t>(result.pull_counts.size());
    std::int64_t pulls = 0;
    for (const auto n : result.pull_counts) pulls += n;
    rep.pull_conservation = pulls == total_pulls;
    std::int64_t tau_sum = 0;
    std::int64_t r_sum = 0;
    for (const auto r : result.epoch_counts) {
        tau_sum += detail::tau_of(eta, r);
        r_sum += r;
    }
    rep.epoch_sum = tau_sum;
    rep.epoch_budget = tau_sum <= total_pulls + num_arms;
    rep.switch_limit = r_sum + num_arms;
    rep.switch_bound = result.switch_count <= rep.switch_limit;
    return rep;
}

}  // namespace lowswitch

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lowswitch {

// Learning rate alpha_t = (H+1)/(H+t).
inline double alpha_step(int horizon, std::int64_t t) {
    if (t < 1) throw std::invalid_argument("alpha_step: t must be >= 1");
    return static_cast<double>(horizon + 1) / static_cast<double>(horizon + t);
}

// Default schedule parameters: eta = 1/(2H(H+1)),
// r_star = ceil(ln(10 H^2) / ln(1 + eta)).
struct ScheduleParams {
    double eta;
    std::int64_t r_star;
};

inline ScheduleParams default_schedule_params(int horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const double h = static_cast<double>(horizon);
    const double eta = 1.0 / (2.0 * h * (h + 1.0));
    const double raw = std::log(10.0 * h * h) / std::log1p(eta);
    return {eta, static_cast<std::int64_t>(std::ceil(raw))};
}

namespace detail {

// tau(r) = ceil((1+eta)^r), with a snap-to-integer guard so that exact
// integer powers (e.g. eta = 1) are not rounded up by floating error.
inline std::int64_t tau_of(double eta, std::int64_t r) {
    const long double base = 1.0L + static_cast<long double>(eta);
    // Exact integer base: integer power, overflow-saturated.
    if (base == std::floor(base)) {
        const auto b = static_cast<std::int64_t>(base);
        std::int64_t v = 1;
        for (std::int64_t i = 0; i < r; ++i) {
            if (v > (INT64_MAX >> 2) / b) return INT64_MAX >> 2;
            v *= b;
        }
        return v;
    }
    const long double x = std::exp(static_cast<long double>(r) * std::log(base));
    if (x > static_cast<long double>(INT64_MAX >> 2)) return INT64_MAX >> 2;
    const long double nearest = std::floor(x + 0.5L);
    if (std::fabs(x - nearest) < 1e-9L) return static_cast<std::int64_t>(nearest);
    return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace detail

// The UCB2 triggering sequence
//   {t_n} = {1, ..., tau(r_star)} U {tau(r_star+1), tau(r_star+2), ...}.
// Immutable after construction: tau values are precomputed past max_time
// (default 2^40 visits, far beyond any reachable count), so the object is
// safe to share across threads and queries never mutate state.
class TriggerSchedule {
  public:
    explicit TriggerSchedule(double eta, std::int64_t r_star,
                             std::int64_t max_time = std::int64_t{1} << 40)
        : eta_(eta), r_star_(r_star) {
        if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
        if (r_star < 1) throw std::invalid_argument("r_star must be >= 1");
        if (max_time < 2) throw std::invalid_argument("max_time must be >= 2");
        constexpr std::int64_t kMaxEntries = 8'000'000;
        for (std::int64_t r = 0;; ++r) {
            const std::int64_t t = detail::tau_of(eta_, r);
            taus_.push_back(t);
            if (t >= max_time) break;
            if (static_cast<std::int64_t>(taus_.size()) > kMaxEntries)
                throw std::invalid_argument(
                    "eta is too small to tabulate the trigger sequence");
        }
        if (r_star_ >= static_cast<std::int64_t>(taus_.size()))
            throw std::invalid_argument("r_star exceeds the tabulated range");
        // Deduplicated stage-II triggers, strictly above tau(r_star).
        // Small-r duplicates of tau can only repeat values already covered
        // by stage I; the filter keeps the sequence strictly increasing.
        const std::int64_t stage1_end = tau(r_star_);
        std::int64_t prev = stage1_end;
        for (std::int64_t rr = r_star_ + 1;
             rr < static_cast<std::int64_t>(taus_.size()); ++rr) {
            if (taus_[rr] > prev) {
                stage2_.push_back(taus_[rr]);
                prev = taus_[rr];
            }
        }
    }

    static TriggerSchedule with_defaults(int horizon) {
        const auto p = default_schedule_params(horizon);
        return TriggerSchedule(p.eta, p.r_star);
    }

    double eta() const { return eta_; }
    std::int64_t r_star() const { return r_star_; }
    std::int64_t stage1_end() const { return tau(r_star_); }

    std::int64_t tau(std::int64_t r) const {
        if (r < 0) throw std::invalid_argument("tau: r must be >= 0");
        if (r >= static_cast<std::int64_t>(taus_.size()))
            throw std::out_of_range("tau: r beyond the tabulated range");
        return taus_[r];
    }

    bool is_trigger(std::int64_t t) const {
        if (t < 1) throw std::invalid_argument("is_trigger: t must be >= 1");
        require_covered(t);
        if (t <= stage1_end()) return true;
        return std::binary_search(stage2_.begin(), stage2_.end(), t);
    }

    // Largest trigger <= t; tau_last(0) = 0 by convention (pairs with the
    // never-visited case alpha_0^0 = 1).
    std::int64_t tau_last(std::int64_t t) const {
        if (t < 0) throw std::invalid_argument("tau_last: t must be >= 0");
        if (t <= stage1_end()) return t;
        require_covered(t);
        const auto it = std::upper_bound(stage2_.begin(), stage2_.end(), t);
        if (it == stage2_.begin()) return stage1_end();
        return *(it - 1);
    }

    // Trigger strictly after t, for epoch-length queries.
    std::int64_t next_trigger_after(std::int64_t t) const {
        if (t < stage1_end()) return t + 1;
        require_covered(t + 1);
        const auto it = std::upper_bound(stage2_.begin(), stage2_.end(), t);
        if (it == stage2_.end())
            throw std::out_of_range("next_trigger_after: beyond the tabulated range");
        return *it;
    }

  private:
    void require_covered(std::int64_t t) const {
        if (t > taus_.back())
            throw std::out_of_range("trigger schedule queried beyond its range");
    }

    double eta_;
    std::int64_t r_star_;
    std::vector<std::int64_t> taus_;    // tau(0), tau(1), ...
    std::vector<std::int64_t> stage2_;  // deduplicated triggers > tau(r_star)
};

// Weight vector (alpha_t^0, ..., alpha_t^t) with
//   alpha_t^0 = prod_{i<=t} (1 - alpha_i),  alpha_t^i = alpha_i *
//   prod_{tau=i+1..t} (1 - alpha_tau).
// Computed in O(t) by a suffix-product pass.
inline std::vector<double> alpha_weights(int horizon, std::int64_t t) {
    if (t < 0) throw std::invalid_argument("alpha_weights: t must be >= 0");
    std::vector<double> w(static_cast<std::size_t>(t) + 1);
    if (t == 0) {
        w[0] = 1.0;
        return w;
    }
    w[0] = 0.0;  // alpha_1 = 1 annihilates the prior term for t >= 1
    double suffix = 1.0;
    for (std::int64_t i = t; i >= 1; --i) {
        w[static_cast<std::size_t>(i)] = alpha_step(horizon, i) * suffix;
        suffix *= 1.0 - alpha_step(horizon, i);
    }
    return w;
}

// Incremental sweep over t = 1, 2, ... maintaining the full weight vector,
// for property checks that need every t in a range. Advancing from t to
// t+1 multiplies all entries by (1 - alpha_{t+1}) and appends alpha_{t+1}.
class AlphaWeightSweep {
  public:
    explicit AlphaWeightSweep(int horizon) : horizon_(horizon), weights_{1.0} {}

    std::int64_t t() const { return static_cast<std::int64_t>(weights_.size()) - 1; }
    const std::vector<double>& weights() const { return weights_; }

    void advance() {
        const double a = alpha_step(horizon_, t() + 1);
        for (double& w : weights_) w *= 1.0 - a;
        weights_.push_back(a);
    }

  private:
    int horizon_;
    std::vector<double> weights_;
};

}  // namespace lowswitch

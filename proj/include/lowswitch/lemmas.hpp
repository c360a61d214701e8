#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lowswitch/schedule.hpp"

namespace lowswitch {

struct PropertyCheck {
    std::string name;
    bool passed = false;
    // Worst-case signed margin: smallest slack to the bound across the
    // sweep (negative means violated).
    double worst_margin = 0.0;
    std::string detail;
};

namespace detail {

// alpha_t^i = alpha_i * prod_{tau=i+1..t} (1 - alpha_tau), evaluated in
// closed form: the product telescopes to
//   (t-1)! / (i-1)! * (H+i)! / (H+t)!,
// computed through lgamma so spaced-out t are O(1) each.
inline double alpha_ti_closed(int horizon, std::int64_t i, std::int64_t t) {
    if (t < i) return 0.0;
    if (t == i) return alpha_step(horizon, i);
    const double lg = std::lgamma(static_cast<double>(t)) -
                      std::lgamma(static_cast<double>(i)) +
                      std::lgamma(static_cast<double>(horizon + i + 1)) -
                      std::lgamma(static_cast<double>(horizon + t + 1));
    return alpha_step(horizon, i) * std::exp(lg);
}

// Exact tail sum_{t > T} alpha_t^i = (1 + 1/H) * alpha_{T+1}^i / alpha_{T+1}.
inline double alpha_tail(int horizon, std::int64_t i, std::int64_t t_end) {
    return (1.0 + 1.0 / horizon) * alpha_ti_closed(horizon, i, t_end + 1) /
           alpha_step(horizon, t_end + 1);
}

}  // namespace detail

// Core properties of the weight vectors, swept over t <= t_max:
//   (sum)    sum_{i=1..t} alpha_t^i = 1 within 1e-9
//   (max)    max_i alpha_t^i <= 2H/t
//   (sq)     sum_i (alpha_t^i)^2 <= 2H/t
//   (series) partial sums sum_{t=i..T} alpha_t^i stay <= 1 + 1/H + 1e-9
//            and reach >= 1 + 1/H - 1e-3 for every i <= i_max.
inline std::vector<PropertyCheck> check_alpha_properties(int horizon, std::int64_t t_max,
                                                         std::int64_t i_max) {
    std::vector<PropertyCheck> checks;
    const double limit = 1.0 + 1.0 / horizon;

    double worst_sum = 1e300, worst_max = 1e300, worst_sq = 1e300;
    AlphaWeightSweep sweep(horizon);
    for (std::int64_t t = 1; t <= t_max; ++t) {
        sweep.advance();
        const auto& w = sweep.weights();
        double sum = 0.0, sumsq = 0.0, wmax = 0.0;
        for (std::int64_t i = 1; i <= t; ++i) {
            const double v = w[static_cast<std::size_t>(i)];
            sum += v;
            sumsq += v * v;
            wmax = std::max(wmax, v);
        }
        const double cap = 2.0 * horizon / static_cast<double>(t);
        worst_sum = std::min(worst_sum, 1e-9 - std::fabs(sum - 1.0));
        worst_max = std::min(worst_max, cap - wmax);
        worst_sq = std::min(worst_sq, cap - sumsq);
    }
    checks.push_back({"weights sum to one", worst_sum >= 0.0, worst_sum,
                      "t <= " + std::to_string(t_max)});
    checks.push_back({"max weight <= 2H/t", worst_max >= 0.0, worst_max, ""});
    checks.push_back({"sum of squared weights <= 2H/t", worst_sq >= 0.0, worst_sq, ""});

    // Partial sums per starting index i: iterate with running products until
    // every tracked tail is negligible, then confirm against the closed form.
    const std::int64_t tracked = i_max;
    std::vector<double> running(static_cast<std::size_t>(tracked) + 1, 0.0);
    std::vector<double> partial(static_cast<std::size_t>(tracked) + 1, 0.0);
    double worst_upper = 1e300;
    const std::int64_t hard_cap = 50'000'000;
    std::int64_t t = 0;
    bool done = false;
    while (!done && t < hard_cap) {
        ++t;
        const double a = alpha_step(horizon, t);
        const std::int64_t upto = std::min<std::int64_t>(tracked, t);
        for (std::int64_t i = 1; i <= upto; ++i) {
            running[static_cast<std::size_t>(i)] *= 1.0 - a;
            if (i == t) running[static_cast<std::size_t>(i)] = a;
            partial[static_cast<std::size_t>(i)] += running[static_cast<std::size_t>(i)];
            worst_upper =
                std::min(worst_upper, limit + 1e-9 - partial[static_cast<std::size_t>(i)]);
        }
        if (t >= tracked) {
            // Remaining mass for the slowest index (largest i).
            done = detail::alpha_tail(horizon, tracked, t) < 1e-4;
        }
    }
    double worst_reach = 1e300, worst_vs_closed = 1e300;
    for (std::int64_t i = 1; i <= tracked; ++i) {
        const double reached = partial[static_cast<std::size_t>(i)];
        worst_reach = std::min(worst_reach, reached - (limit - 1e-3));
        const double closed = limit - detail::alpha_tail(horizon, i, t);
        worst_vs_closed = std::min(worst_vs_closed, 1e-6 - std::fabs(reached - closed));
    }
    checks.push_back({"partial series bounded by 1 + 1/H", worst_upper >= 0.0, worst_upper,
                      "i <= " + std::to_string(i_max)});
    checks.push_back({"partial series reaches 1 + 1/H", worst_reach >= 0.0, worst_reach,
                      "summed to t = " + std::to_string(t)});
    checks.push_back({"partial series matches closed form", worst_vs_closed >= 0.0,
                      worst_vs_closed, ""});
    return checks;
}

// Error accumulation under delayed updates:
//   S~_i = sum_{t >= i, tau_last(t) <= i-1} alpha_t^i
//        + sum_{t: tau_last(t) >= i} alpha_{tau_last(t)}^i  <=  1 + 3/H.
// Terms are grouped per trigger epoch (the inner factor is constant between
// consecutive triggers) and truncated once the remaining mass of
// sum_t alpha_t^i falls below tail_tol.
struct ErrorAccumulationResult {
    std::int64_t worst_i = 0;
    double worst_value = 0.0;
    double bound = 0.0;
    bool passed = false;
    double tail_tol = 0.0;
};

inline double error_accumulation_sum(int horizon, const TriggerSchedule& schedule,
                                     std::int64_t i, double tail_tol = 1e-9) {
    double total = 0.0;
    // Leading stretch with tau_last(t) < i: from i up to the first trigger
    // >= i (exclusive). Inside stage I every t is a trigger, so this only
    // bites between stage-II triggers.
    std::int64_t first_trigger = i;
    if (!schedule.is_trigger(std::max<std::int64_t>(1, i)))
        first_trigger = schedule.next_trigger_after(i);
    for (std::int64_t t = i; t < first_trigger; ++t)
        total += detail::alpha_ti_closed(horizon, i, t);

    // Epoch-grouped tail: every t in [s, next(s)) contributes alpha_s^i.
    const double guard = (1.0 + 1.0 / horizon) * (1.0 + 1.0 / horizon);
    std::int64_t s = first_trigger;
    for (;;) {
        const std::int64_t next = schedule.next_trigger_after(s);
        total += static_cast<double>(next - s) * detail::alpha_ti_closed(horizon, i, s);
        if (guard * detail::alpha_ti_closed(horizon, i, next) / alpha_step(horizon, next) <
            tail_tol)
            break;
        s = next;
    }
    return total;
}

inline ErrorAccumulationResult check_error_accumulation(int horizon,
                                                        std::int64_t i_max,
                                                        double tolerance = 1e-6,
                                                        double tail_tol = 1e-9) {
    const TriggerSchedule schedule = TriggerSchedule::with_defaults(horizon);
    ErrorAccumulationResult res;
    res.bound = 1.0 + 3.0 / horizon;
    res.tail_tol = tail_tol;
    for (std::int64_t i = 1; i <= i_max; ++i) {
        const double s = error_accumulation_sum(horizon, schedule, i, tail_tol);
        if (s > res.worst_value) {
            res.worst_value = s;
            res.worst_i = i;
        }
    }
    res.passed = res.worst_value <= res.bound + tolerance;
    return res;
}

// tau(r+1) - 1 - tau(r) <= eta tau(r) for r >= r_star, up to the largest
// table entry below the given ceiling.
inline PropertyCheck check_tau_spacing(const TriggerSchedule& schedule,
                                       std::int64_t tau_ceiling = 1'000'000'000) {
    PropertyCheck check{"epoch spacing tau(r+1)-1-tau(r) <= eta tau(r)", true, 1e300, ""};
    for (std::int64_t r = schedule.r_star();; ++r) {
        const std::int64_t tau_r = schedule.tau(r);
        const std::int64_t tau_next = schedule.tau(r + 1);
        if (tau_next > tau_ceiling || tau_next <= tau_r) break;
        const double margin = schedule.eta() * static_cast<double>(tau_r) -
                              static_cast<double>(tau_next - 1 - tau_r);
        check.worst_margin = std::min(check.worst_margin, margin);
        if (margin < 0.0) check.passed = false;
    }
    return check;
}

// tau_last(t) >= t / (1 + eta) for all t >= 1 up to t_max.
inline PropertyCheck check_tau_last_lower_bound(const TriggerSchedule& schedule,
                                                std::int64_t t_max) {
    PropertyCheck check{"tau_last(t) >= t/(1+eta)", true, 1e300, ""};
    for (std::int64_t t = 1; t <= t_max; ++t) {
        const double margin = static_cast<double>(schedule.tau_last(t)) -
                              static_cast<double>(t) / (1.0 + schedule.eta());
        check.worst_margin = std::min(check.worst_margin, margin);
        if (margin < 0.0) check.passed = false;
    }
    return check;
}

}  // namespace lowswitch

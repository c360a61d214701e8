#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lowswitch/rng.hpp"
#include "lowswitch/schedule.hpp"

using namespace lowswitch;

TEST_CASE("default parameters match the closed-form choices", "[schedule]") {
    // eta = 1/(2H(H+1)); r_star = ceil(ln(10 H^2)/ln(1+eta)), evaluated in
    // high precision: H=1 -> ln(10)/ln(1.25) = 10.3189... -> 11, and
    // H=2 -> ln(40)/ln(13/12) = 46.086... -> 47.
    const auto p1 = default_schedule_params(1);
    REQUIRE(p1.eta == Catch::Approx(0.25));
    REQUIRE(p1.r_star == 11);

    const auto p2 = default_schedule_params(2);
    REQUIRE(p2.eta == Catch::Approx(1.0 / 12.0));
    REQUIRE(p2.r_star == 47);

    REQUIRE(default_schedule_params(3).r_star == 111);
    REQUIRE(default_schedule_params(5).r_star == 335);
}

TEST_CASE("tau is the guarded ceiling of (1+eta)^r", "[schedule]") {
    const TriggerSchedule s(0.25, 11);
    REQUIRE(s.tau(0) == 1);
    REQUIRE(s.tau(11) == 12);  // 1.25^11 = 11.64... -> 12

    // Exact integer powers must not round up: eta = 1 gives powers of two.
    const TriggerSchedule exact(1.0, 2);
    for (int r = 0; r <= 40; ++r) REQUIRE(exact.tau(r) == (1LL << r));
}

TEST_CASE("trigger set is stage I plus spaced stage II", "[schedule]") {
    // eta=1, r_star=2: triggers {1,2,3,4} U {8,16,32,...}.
    const TriggerSchedule s(1.0, 2);
    REQUIRE(s.stage1_end() == 4);
    for (std::int64_t t = 1; t <= 4; ++t) REQUIRE(s.is_trigger(t));
    REQUIRE_FALSE(s.is_trigger(5));
    REQUIRE_FALSE(s.is_trigger(6));
    REQUIRE_FALSE(s.is_trigger(7));
    REQUIRE(s.is_trigger(8));
    REQUIRE_FALSE(s.is_trigger(9));
    REQUIRE(s.is_trigger(16));

    REQUIRE(s.tau_last(0) == 0);
    REQUIRE(s.tau_last(4) == 4);
    REQUIRE(s.tau_last(6) == 4);
    REQUIRE(s.tau_last(8) == 8);
    REQUIRE(s.tau_last(15) == 8);
    REQUIRE(s.next_trigger_after(4) == 8);
    REQUIRE(s.next_trigger_after(8) == 16);
    REQUIRE(s.next_trigger_after(0) == 1);
}

TEST_CASE("t just above stage I is not a trigger when spacing allows", "[schedule]") {
    const TriggerSchedule s = TriggerSchedule::with_defaults(2);
    const std::int64_t edge = s.stage1_end();
    if (s.next_trigger_after(edge) > edge + 1) REQUIRE_FALSE(s.is_trigger(edge + 1));
}

TEST_CASE("triggers enumerate consistently with is_trigger", "[schedule]") {
    const TriggerSchedule s = TriggerSchedule::with_defaults(3);
    std::int64_t t = 0;
    // next_trigger_after must walk exactly the is_trigger set.
    for (int steps = 0; steps < 200; ++steps) {
        const std::int64_t next = s.next_trigger_after(t);
        for (std::int64_t u = t + 1; u < next && u < t + 200; ++u)
            REQUIRE_FALSE(s.is_trigger(u));
        REQUIRE(s.is_trigger(next));
        REQUIRE(s.tau_last(next) == next);
        if (next > 1) REQUIRE(s.tau_last(next - 1) < next);
        t = next;
    }
}

TEST_CASE("trigger queries match a brute-force set for random parameters", "[schedule]") {
    lowswitch::Rng rng{99};
    for (int trial = 0; trial < 25; ++trial) {
        const double eta = 0.05 + 0.9 * rng.uniform01();
        const std::int64_t r_star = 1 + static_cast<std::int64_t>(rng.uniform_below(12));
        const TriggerSchedule s(eta, r_star);
        // Brute force: stage I is every count up to tau(r_star), stage II
        // the ceilings of (1+eta)^r above it.
        const std::int64_t limit = 4000;
        std::vector<char> in_set(limit + 1, 0);
        for (std::int64_t t = 1; t <= std::min(limit, s.tau(r_star)); ++t) in_set[t] = 1;
        for (std::int64_t r = r_star + 1;; ++r) {
            const std::int64_t t = s.tau(r);
            if (t > limit) break;
            in_set[t] = 1;
        }
        std::int64_t last = 0;
        for (std::int64_t t = 1; t <= limit; ++t) {
            REQUIRE(s.is_trigger(t) == static_cast<bool>(in_set[t]));
            if (in_set[t]) last = t;
            REQUIRE(s.tau_last(t) == last);
        }
    }
}

TEST_CASE("tau_last never drops below t/(1+eta)", "[schedule]") {
    for (const int h : {1, 2, 3, 5}) {
        const TriggerSchedule s = TriggerSchedule::with_defaults(h);
        for (std::int64_t t = 1; t <= 20000; ++t)
            REQUIRE(static_cast<double>(s.tau_last(t)) >=
                    static_cast<double>(t) / (1.0 + s.eta()) - 1e-12);
    }
}

TEST_CASE("alpha_t has the prescribed form", "[schedule]") {
    REQUIRE(alpha_step(1, 1) == 1.0);
    REQUIRE(alpha_step(7, 1) == 1.0);
    REQUIRE(alpha_step(1, 3) == Catch::Approx(0.5));
    REQUIRE(alpha_step(2, 10) == Catch::Approx(0.25));
}

TEST_CASE("alpha weight vectors", "[schedule]") {
    SECTION("t = 0 is the lone prior weight") {
        const auto w = alpha_weights(3, 0);
        REQUIRE(w.size() == 1);
        REQUIRE(w[0] == 1.0);
    }
    SECTION("t = 1 concentrates on the single sample") {
        const auto w = alpha_weights(3, 1);
        REQUIRE(w.size() == 2);
        REQUIRE(w[0] == 0.0);
        REQUIRE(w[1] == 1.0);
    }
    SECTION("H = 1, t = 2 gives (0, 1/3, 2/3)") {
        const auto w = alpha_weights(1, 2);
        REQUIRE(w[0] == 0.0);
        REQUIRE(w[1] == Catch::Approx(1.0 / 3.0));
        REQUIRE(w[2] == Catch::Approx(2.0 / 3.0));
    }
    SECTION("weights sum to one and match the sweep") {
        AlphaWeightSweep sweep(2);
        for (std::int64_t t = 1; t <= 200; ++t) {
            sweep.advance();
            const auto w = alpha_weights(2, t);
            REQUIRE(w.size() == sweep.weights().size());
            double sum = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                REQUIRE(w[i] == Catch::Approx(sweep.weights()[i]).margin(1e-12));
                sum += w[i];
            }
            REQUIRE(sum == Catch::Approx(1.0).margin(1e-10));
        }
    }
}

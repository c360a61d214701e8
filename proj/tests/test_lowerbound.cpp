#include <catch2/catch_amalgamated.hpp>

#include "lowswitch/lowerbound.hpp"
#include "lowswitch/rng.hpp"

using namespace lowswitch;

TEST_CASE("zero budget pins the explorer to its initial policy", "[lowerbound]") {
    LowerBoundConfig cfg;
    cfg.horizon = 2;
    cfg.num_states = 3;
    cfg.num_actions = 4;
    cfg.switch_budget = 0;
    cfg.draws = 120;
    cfg.episodes = 200;
    const LowerBoundReport report = run_lower_bound_experiment(cfg, Rng{42});
    // Every switch is suppressed, so each (h,x) matches the hidden action
    // with probability exactly 1/A: the mean value is H/A up to Monte-Carlo
    // noise.
    REQUIRE(report.mean_cum_switches == 0.0);
    const double expected = static_cast<double>(cfg.horizon) / cfg.num_actions;
    REQUIRE(std::fabs(report.mean_value - expected) <= 4.0 * report.value_se);
}

TEST_CASE("budgeted explorer never exceeds its switch budget", "[lowerbound]") {
    LowerBoundConfig cfg;
    cfg.horizon = 2;
    cfg.num_states = 3;
    cfg.num_actions = 4;
    cfg.draws = 1;
    cfg.episodes = 800;
    REQUIRE(cfg.effective_budget() == 12);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng astar_rng = Rng{seed}.substream(0, 1);
        Rng run_rng = Rng{seed}.substream(0, 2);
        const auto a_star =
            random_action_table(cfg.horizon, cfg.num_states, cfg.num_actions, astar_rng);
        const auto stats = run_budgeted_explorer(cfg, a_star, run_rng);
        REQUIRE(stats.total_switches <= cfg.effective_budget());
    }
}

TEST_CASE("experiment satisfies the budgeted-exploration caps", "[lowerbound]") {
    LowerBoundConfig cfg;  // defaults: H=2, S=3, A=4, budget 12
    cfg.draws = 100;
    cfg.episodes = 300;
    const LowerBoundReport report = run_lower_bound_experiment(cfg, Rng{7});
    const double h = static_cast<double>(cfg.horizon);
    REQUIRE(report.mean_value <= 0.75 * h + 0.05 * h);
    const double sa = static_cast<double>(cfg.num_states) * cfg.num_actions;
    REQUIRE(report.mean_value <=
            h / cfg.num_actions + report.mean_cum_switches / sa + 3.0 * report.centered_se);
    // The budget does get used at this bonus scale.
    REQUIRE(report.mean_cum_switches > 0.0);
}

TEST_CASE("experiment is deterministic in the master seed", "[lowerbound]") {
    LowerBoundConfig cfg;
    cfg.draws = 10;
    cfg.episodes = 100;
    const LowerBoundReport a = run_lower_bound_experiment(cfg, Rng{3});
    const LowerBoundReport b = run_lower_bound_experiment(cfg, Rng{3});
    REQUIRE(a.mean_value == b.mean_value);
    REQUIRE(a.mean_cum_switches == b.mean_cum_switches);
}

// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Thresholds and tolerances are pinned in code; seeds are
// fixed so every number below is reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lowswitch/agent.hpp"
#include "lowswitch/bandit.hpp"
#include "lowswitch/concurrent.hpp"
#include "lowswitch/harness.hpp"
#include "lowswitch/lemmas.hpp"
#include "lowswitch/lowerbound.hpp"
#include "lowswitch/mdp.hpp"
#include "lowswitch/metrics.hpp"

using namespace lowswitch;

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Outcome {
    bool passed = false;
    std::string detail;
};

// The fixed MDP shared by the switching-growth and regret criteria:
// a hidden-action (hard-family) instance of shape H=3, S=4, A=3.
MdpSpec fixed_hard_343() {
    Rng rng{4};
    const auto a_star = random_action_table(3, 4, 3, rng);
    return make_hard_instance(3, 4, 3, a_star);
}

struct GrowthRunStats {
    std::vector<double> nsw_4k, nsw_16k, nsw_64k;
    std::vector<double> regret_16k, regret_64k, vanilla_64k;
};

// Ten seeds on the fixed MDP, K = 64000, UCB2H plus the vanilla baseline.
const GrowthRunStats& growth_runs() {
    static const GrowthRunStats stats = [] {
        GrowthRunStats out;
        const MdpSpec mdp = fixed_hard_343();
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            AgentConfig cfg;
            cfg.variant = ExplorationVariant::Ucb2Hoeffding;
            cfg.planned_episodes = 64000;
            Rng rng{seed};
            const RunResult res = run_agent(cfg, mdp, 64000, rng);
            out.nsw_4k.push_back(
                static_cast<double>(res.episodes[3999].cum_local_switches));
            out.nsw_16k.push_back(
                static_cast<double>(res.episodes[15999].cum_local_switches));
            out.nsw_64k.push_back(
                static_cast<double>(res.episodes[63999].cum_local_switches));
            out.regret_16k.push_back(res.episodes[15999].cum_regret);
            out.regret_64k.push_back(res.episodes[63999].cum_regret);

            AgentConfig vcfg;
            vcfg.variant = ExplorationVariant::VanillaHoeffding;
            vcfg.planned_episodes = 64000;
            Rng vrng{seed};
            const RunResult vres = run_agent(vcfg, mdp, 64000, vrng);
            out.vanilla_64k.push_back(vres.episodes[63999].cum_regret);
        }
        return out;
    }();
    return stats;
}

char buffer[1024];

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    std::snprintf(buffer, sizeof(buffer), f, args...);
    return buffer;
}

// 1. Stepsize lemma suite: H in {1,2,3,5}, t <= 1e4, i <= 200.
Outcome criterion_stepsize_lemmas() {
    bool ok = true;
    double worst = 1e300;
    for (const int h : {1, 2, 3, 5})
        for (const auto& check : check_alpha_properties(h, 10000, 200)) {
            ok &= check.passed;
            worst = std::min(worst, check.worst_margin);
        }
    return {ok, fmt("worst margin %.3g across H in {1,2,3,5}", worst)};
}

// 2. Error-accumulation suite: default (eta, r_star), H in {2,3}, i <= 500,
//    S~_i <= 1 + 3/H + 1e-6 with tail truncation at 1e-9.
Outcome criterion_error_accumulation() {
    bool ok = true;
    std::string detail;
    for (const int h : {2, 3}) {
        const auto res = check_error_accumulation(h, 500, 1e-6, 1e-9);
        ok &= res.passed;
        detail += fmt("H=%d worst %.6f at i=%lld (bound %.4f); ", h, res.worst_value,
                      static_cast<long long>(res.worst_i), res.bound);
    }
    return {ok, detail};
}

struct SweepOutcome {
    std::int64_t runs = 0;
    std::int64_t bound_violations = 0;
    std::int64_t ordering_violations = 0;
    std::int64_t telescoping_violations = 0;
    std::int64_t ucb2b_runs = 0;
    double worst_telescoping_error = 0.0;
};

// The >= 100-run sweep behind criteria 3 and 7: H <= 4, S <= 6, A <= 4,
// K <= 1e5, both UCB2 variants, random and hidden-action instances.
const SweepOutcome& bound_sweep() {
    static const SweepOutcome out = [] {
        SweepOutcome sweep;
        const auto check_run = [&sweep](const MdpSpec& mdp, const AgentConfig& cfg,
                                        std::int64_t episodes, std::uint64_t seed) {
            AgentConfig run_cfg = cfg;
            run_cfg.record_bonus_history =
                cfg.variant == ExplorationVariant::Ucb2Bernstein;
            Rng rng{seed};
            RegretLedger regret(mdp);
            SwitchLedger switches(mdp.horizon, mdp.num_states);
            AgentState agent(run_cfg, mdp);
            for (std::int64_t k = 0; k < episodes; ++k) {
                switches.record_policy(agent.current_policy());
                play_episode(agent, mdp, rng);
            }
            ++sweep.runs;
            const auto params = default_schedule_params(mdp.horizon);
            const std::int64_t bound =
                switching_bound(mdp.horizon, mdp.num_states, mdp.num_actions, episodes,
                                params.eta, params.r_star);
            if (switches.local_cost() > bound) ++sweep.bound_violations;
            const std::int64_t hs_cap = static_cast<std::int64_t>(mdp.horizon) *
                                        mdp.num_states * (episodes - 1);
            if (switches.global_cost() > switches.local_cost() ||
                switches.local_cost() > hs_cap)
                ++sweep.ordering_violations;
            if (run_cfg.variant == ExplorationVariant::Ucb2Bernstein) {
                ++sweep.ucb2b_runs;
                for (int h = 0; h < mdp.horizon; ++h)
                    for (int x = 0; x < mdp.num_states; ++x)
                        for (int a = 0; a < mdp.num_actions; ++a) {
                            const std::int64_t t = agent.visit_count(h, x, a);
                            if (t == 0) continue;
                            const auto& hist = agent.bonus_history(h, x, a);
                            const auto w = alpha_weights(mdp.horizon, t);
                            double sum = 0.0;
                            for (std::int64_t i = 1; i <= t; ++i)
                                sum += w[static_cast<std::size_t>(i)] *
                                       hist[static_cast<std::size_t>(i - 1)];
                            const double err =
                                std::fabs(2.0 * sum - agent.beta_current(h, x, a));
                            sweep.worst_telescoping_error =
                                std::max(sweep.worst_telescoping_error, err);
                            if (err > 1e-8) ++sweep.telescoping_violations;
                        }
            }
        };

        std::uint64_t instance_seed = 100;
        for (const int h : {1, 2, 3, 4})
            for (const int s : {2, 4, 6})
                for (const int a : {2, 3, 4}) {
                    Rng ir{++instance_seed};
                    const MdpSpec mdp = make_random_mdp(h, s, a, ir);
                    for (const auto variant : {ExplorationVariant::Ucb2Hoeffding,
                                               ExplorationVariant::Ucb2Bernstein}) {
                        AgentConfig cfg;
                        cfg.variant = variant;
                        cfg.planned_episodes = 2000;
                        check_run(mdp, cfg, 2000, instance_seed * 7 + 1);
                    }
                }
        for (const int h : {2, 3, 4})
            for (const int a : {2, 4}) {
                Rng ir{++instance_seed};
                const auto a_star = random_action_table(h, 3, a, ir);
                const MdpSpec mdp = make_hard_instance(h, 3, a, a_star);
                for (const auto variant : {ExplorationVariant::Ucb2Hoeffding,
                                           ExplorationVariant::Ucb2Bernstein}) {
                    for (const std::uint64_t seed : {3ULL, 4ULL, 5ULL}) {
                        AgentConfig cfg;
                        cfg.variant = variant;
                        cfg.planned_episodes = 3000;
                        check_run(mdp, cfg, 3000, seed);
                    }
                }
            }
        // Long-run coverage of the K range.
        Rng ir{9};
        const MdpSpec big = make_random_mdp(2, 2, 2, ir);
        for (const auto variant :
             {ExplorationVariant::Ucb2Hoeffding, ExplorationVariant::Ucb2Bernstein}) {
            AgentConfig cfg;
            cfg.variant = variant;
            cfg.planned_episodes = 100000;
            check_run(big, cfg, 100000, 12);
        }
        return sweep;
    }();
    return out;
}

// 3. Deterministic switching bound, zero violations over the sweep.
Outcome criterion_switching_bound() {
    const auto& sweep = bound_sweep();
    const bool ok = sweep.runs >= 100 && sweep.bound_violations == 0 &&
                    sweep.ordering_violations == 0;
    return {ok, fmt("%lld runs, %lld bound violations, %lld ordering violations",
                    static_cast<long long>(sweep.runs),
                    static_cast<long long>(sweep.bound_violations),
                    static_cast<long long>(sweep.ordering_violations))};
}

// 4. Logarithmic switching growth on the fixed MDP.
Outcome criterion_switching_growth() {
    const auto& g = growth_runs();
    const double d1 = median(g.nsw_16k) - median(g.nsw_4k);
    const double d2 = median(g.nsw_64k) - median(g.nsw_16k);
    const double slack = 2.0 * 3 * 4 * 3;
    return {d2 <= d1 + slack,
            fmt("median diffs %.1f then %.1f (allowed %.1f)", d1, d2, d1 + slack)};
}

// 5. Sublinear regret and parity with the always-switch baseline.
Outcome criterion_sublinear_regret() {
    const auto& g = growth_runs();
    const double r16 = median(g.regret_16k);
    const double r64 = median(g.regret_64k);
    const double v64 = median(g.vanilla_64k);
    const bool ok = r64 <= 3.0 * r16 && r64 <= 2.0 * v64;
    return {ok, fmt("regret 16k=%.1f 64k=%.1f (ratio %.2f <= 3.0); vanilla 64k=%.1f "
                    "(ratio %.2f <= 2.0)",
                    r16, r64, r64 / r16, v64, r64 / v64)};
}

// 6. Optimism of the running estimate at default constants.
Outcome criterion_optimism() {
    Rng mr{15};
    const MdpSpec mdp = make_random_mdp(2, 3, 2, mr);
    const ValueTables opt = optimal_values(mdp);
    const int seeds = 20;
    int violating_runs = 0;
    for (int seed = 1; seed <= seeds; ++seed) {
        AgentConfig cfg;
        cfg.planned_episodes = 2000;
        AgentState agent(cfg, mdp);
        Rng rng{static_cast<std::uint64_t>(seed)};
        bool violated = false;
        for (int k = 0; k < 2000 && !violated; ++k) {
            play_episode(agent, mdp, rng);
            for (int h = 0; h < mdp.horizon && !violated; ++h)
                for (int x = 0; x < mdp.num_states && !violated; ++x)
                    for (int a = 0; a < mdp.num_actions && !violated; ++a)
                        violated =
                            agent.q_running_value(h, x, a) + 1e-9 < opt.action_value(h, x, a);
        }
        violating_runs += violated ? 1 : 0;
    }
    const double fraction = static_cast<double>(violating_runs) / seeds;
    const double cap = std::max(0.05, 0.1);  // max(p, 0.1) at the default p
    return {fraction <= cap,
            fmt("%d of %d runs violated (fraction %.2f <= %.2f)", violating_runs, seeds,
                fraction, cap)};
}

// 7. Bernstein telescoping, zero violations across all UCB2B sweep runs.
Outcome criterion_bernstein_telescoping() {
    const auto& sweep = bound_sweep();
    return {sweep.ucb2b_runs > 0 && sweep.telescoping_violations == 0,
            fmt("%lld UCB2B runs, %lld violations, worst |2*sum - beta| = %.2e",
                static_cast<long long>(sweep.ucb2b_runs),
                static_cast<long long>(sweep.telescoping_violations),
                sweep.worst_telescoping_error)};
}

// 8. PAC decay of the uniform mixture policy at a deterministic start.
Outcome criterion_pac_decay() {
    Rng ir{1};
    MdpSpec mdp = make_random_mdp(2, 3, 2, ir);
    mdp.initial_dist = {1.0, 0.0, 0.0};
    std::vector<double> gap_10k, gap_40k;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        AgentConfig cfg;
        cfg.planned_episodes = 40000;
        Rng rng{seed};
        const RunResult res = run_agent(cfg, mdp, 40000, rng);
        gap_10k.push_back(pac_gap(mdp, extract_mixture_policy(res, 10000), 0));
        gap_40k.push_back(pac_gap(mdp, extract_mixture_policy(res), 0));
    }
    const double g10 = median(gap_10k);
    const double g40 = median(gap_40k);
    return {g40 <= 0.75 * g10,
            fmt("median gap 10k=%.4f 40k=%.4f (ratio %.3f <= 0.75)", g10, g40, g40 / g10)};
}

// 9. Concurrent correctness: replay equivalence, the rounds bound, and a
//    strict round decrease when M doubles.
Outcome criterion_concurrent() {
    Rng ir{7};
    const auto a_star = random_action_table(2, 2, 2, ir);
    const MdpSpec mdp = make_hard_instance(2, 2, 2, a_star);
    bool all_ok = true;
    std::vector<double> rounds_m4, rounds_m8;
    for (const int machines : {4, 8}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            ConcurrentConfig cfg;
            cfg.machines = machines;
            cfg.total_kept_episodes = 4000;
            cfg.agent.variant = ExplorationVariant::Ucb2Hoeffding;
            cfg.agent.planned_episodes = 4000;
            const ConcurrentResult res = run_concurrent(mdp, cfg, Rng{seed});
            all_ok &= replay_equivalence_check(mdp, res, cfg.agent, 4000);
            const std::int64_t ceil_km = (res.kept + machines - 1) / machines;
            all_ok &= res.rounds <= res.policy_syncs + ceil_km + 1;
            (machines == 4 ? rounds_m4 : rounds_m8)
                .push_back(static_cast<double>(res.rounds));
        }
    }
    const double m4 = median(rounds_m4);
    const double m8 = median(rounds_m8);
    all_ok &= m8 < m4;
    return {all_ok, fmt("median rounds M=4: %.0f, M=8: %.0f; replay + bound on all runs",
                        m4, m8)};
}

// 10. Lower-bound experiment on the hidden-action family.
Outcome criterion_lower_bound() {
    LowerBoundConfig cfg;  // H=2, S=3, A=4, budget floor(HSA/2) = 12
    cfg.draws = 200;
    cfg.episodes = 500;
    const LowerBoundReport rep = run_lower_bound_experiment(cfg, Rng{1});
    const double h = 2.0;
    const double cap1 = 0.75 * h + 0.05 * h;
    const double cap2 =
        h / 4.0 + rep.mean_cum_switches / 12.0 + 3.0 * rep.centered_se;
    const bool ok = rep.mean_value <= cap1 && rep.mean_value <= cap2;
    return {ok, fmt("mean value %.4f <= %.2f and <= %.4f (mean switches %.2f)",
                    rep.mean_value, cap1, cap2, rep.mean_cum_switches)};
}

// 11. Bandit suite: switch bound on every run, regret parity with UCB1,
//     and sublinear regret growth.
Outcome criterion_bandit() {
    const BanditInstance inst{{0.9, 0.5}};
    const double eta = 0.25;
    const std::int64_t big = 100000, small = 1000;
    const double switch_cap =
        2.0 * (1.0 + std::log((big + 2.0) / 2.0) / std::log1p(eta)) + 2.0;
    bool all_ok = true;
    std::vector<double> r2_big, r2_small, r1_big;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng_big = Rng{seed}.substream(1);
        Rng rng_small = Rng{seed}.substream(3);
        Rng rng_ucb1 = Rng{seed}.substream(2);
        const auto ucb2 = run_ucb2(inst, big, eta, rng_big);
        all_ok &= static_cast<double>(ucb2.switch_count) <= switch_cap;
        const auto rep = check_bandit_invariants(ucb2, big, eta);
        all_ok &= rep.pull_conservation && rep.epoch_budget && rep.switch_bound;
        const auto ucb2s = run_ucb2(inst, small, eta, rng_small);
        const auto ucb1 = run_ucb1_baseline(inst, big, rng_ucb1);
        r2_big.push_back(ucb2.pseudo_regret);
        r2_small.push_back(ucb2s.pseudo_regret);
        r1_big.push_back(ucb1.pseudo_regret);
    }
    const double med2 = median(r2_big), med1 = median(r1_big), meds = median(r2_small);
    const double rate_big = med2 / static_cast<double>(big);
    const double rate_small = meds / static_cast<double>(small);
    all_ok &= med2 <= 1.5 * med1;
    all_ok &= rate_big < 0.2 * rate_small;
    return {all_ok,
            fmt("switch cap %.1f on all runs; median regret UCB2 %.1f vs UCB1 %.1f; "
                "rate ratio %.3f < 0.2",
                switch_cap, med2, med1, rate_big / rate_small)};
}

// 12. Oracle equivalence: backward induction against exhaustive policy
//     enumeration on 50 small instances, exact to 1e-12.
Outcome criterion_oracle_equivalence() {
    struct Shape {
        int h, s, a;
    };
    // Every shape satisfies H*S*log2(A) <= 16.
    const std::vector<Shape> shapes{{2, 2, 2}, {2, 2, 4}, {4, 2, 2}, {2, 4, 2},
                                    {3, 2, 2}, {2, 3, 2}, {1, 4, 4}, {4, 4, 2},
                                    {1, 2, 4}, {2, 2, 3}};
    int instances = 0;
    double worst = 0.0;
    Rng master{2024};
    for (const auto& shape : shapes) {
        for (int copy = 0; copy < 5; ++copy) {
            Rng ir = master.substream(static_cast<std::uint64_t>(instances), 0);
            const MdpSpec mdp = make_random_mdp(shape.h, shape.s, shape.a, ir);
            ++instances;
            const ValueTables fast = optimal_values(mdp);
            // Enumerate all A^(H*S) deterministic policies.
            const int cells = shape.h * shape.s;
            DeterministicPolicy pol{shape.h, shape.s, std::vector<int>(cells, 0)};
            std::vector<double> best(shape.s, -1.0);
            for (;;) {
                const ValueTables pv = policy_values(mdp, pol);
                for (int x = 0; x < shape.s; ++x)
                    best[x] = std::max(best[x], pv.value(0, x));
                int pos = 0;
                while (pos < cells) {
                    if (++pol.actions[pos] < shape.a) break;
                    pol.actions[pos] = 0;
                    ++pos;
                }
                if (pos == cells) break;
            }
            for (int x = 0; x < shape.s; ++x)
                worst = std::max(worst, std::fabs(best[x] - fast.value(0, x)));
        }
    }
    return {instances == 50 && worst <= 1e-12,
            fmt("%d instances, worst |enumeration - DP| = %.2e", instances, worst)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "stepsize lemma suite", criterion_stepsize_lemmas},
        {2, "error-accumulation suite", criterion_error_accumulation},
        {3, "deterministic switching bound", criterion_switching_bound},
        {4, "logarithmic switching growth", criterion_switching_growth},
        {5, "sublinear regret", criterion_sublinear_regret},
        {6, "optimism", criterion_optimism},
        {7, "bernstein telescoping", criterion_bernstein_telescoping},
        {8, "pac decay", criterion_pac_decay},
        {9, "concurrent correctness", criterion_concurrent},
        {10, "lower-bound experiment", criterion_lower_bound},
        {11, "bandit suite", criterion_bandit},
        {12, "oracle equivalence", criterion_oracle_equivalence},
    };

    bool all_passed = true;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        const Outcome outcome = criterion.run();
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        all_passed &= outcome.passed;
        std::printf("[%s] criterion %2d: %s (%.2f s) - %s\n",
                    outcome.passed ? "PASS" : "FAIL", criterion.id, criterion.name,
                    seconds, outcome.detail.c_str());
    }
    std::printf(all_passed ? "acceptance: all criteria passed\n"
                           : "acceptance: FAILURES present\n");
    return all_passed ? 0 : 1;
}

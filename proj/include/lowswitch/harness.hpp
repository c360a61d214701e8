#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lowswitch/agent.hpp"
#include "lowswitch/bandit.hpp"
#include "lowswitch/concurrent.hpp"
#include "lowswitch/lemmas.hpp"
#include "lowswitch/lowerbound.hpp"
#include "lowswitch/mdp_io.hpp"
#include "lowswitch/metrics.hpp"

namespace lowswitch {

// Config problems exit with code 2, broken runtime invariants with code 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MdpSource {
    enum class Kind { Random, Hard, File } kind = Kind::Random;
    int horizon = 2;
    int num_states = 2;
    int num_actions = 2;
    std::uint64_t seed = 1;  // instance seed (random weights or a_star draw)
    std::string path;

    MdpSpec build() const {
        switch (kind) {
            case Kind::Random: {
                Rng rng{seed};
                return make_random_mdp(horizon, num_states, num_actions, rng);
            }
            case Kind::Hard: {
                Rng rng{seed};
                const auto a_star =
                    random_action_table(horizon, num_states, num_actions, rng);
                return make_hard_instance(horizon, num_states, num_actions, a_star);
            }
            case Kind::File:
                return load_mdp_file(path);
        }
        throw ConfigError("unreachable mdp source kind");
    }
};

struct ExperimentConfig {
    MdpSource mdp;
    AgentConfig agent;
    std::int64_t episodes = 0;
    std::vector<std::int64_t> sweep_episodes;
    std::vector<std::uint64_t> seeds{1};
    std::vector<int> machines{1};
    std::int64_t max_rounds = -1;
    std::string output_dir = ".";
    std::string prefix = "run";
};

namespace detail {

inline void reject_unknown_fields(const nlohmann::json& j,
                                  std::initializer_list<const char*> allowed,
                                  const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return key == k;
            }) == allowed.end())
            throw ConfigError("unknown field \"" + key + "\" in " + where);
    }
}

inline ExplorationVariant parse_variant(const std::string& name) {
    if (name == "ucb2-hoeffding" || name == "ucb2h") return ExplorationVariant::Ucb2Hoeffding;
    if (name == "ucb2-bernstein" || name == "ucb2b") return ExplorationVariant::Ucb2Bernstein;
    if (name == "vanilla-hoeffding" || name == "vanilla")
        return ExplorationVariant::VanillaHoeffding;
    throw ConfigError("unknown algorithm variant \"" + name + "\"");
}

}  // namespace detail

inline MdpSource parse_mdp_source(const nlohmann::json& j) {
    detail::reject_unknown_fields(j, {"type", "H", "S", "A", "seed", "path"}, "mdp");
    MdpSource src;
    const std::string type = j.at("type").get<std::string>();
    if (type == "random") src.kind = MdpSource::Kind::Random;
    else if (type == "hard") src.kind = MdpSource::Kind::Hard;
    else if (type == "file") src.kind = MdpSource::Kind::File;
    else throw ConfigError("unknown mdp type \"" + type + "\"");
    if (src.kind == MdpSource::Kind::File) {
        src.path = j.at("path").get<std::string>();
    } else {
        src.horizon = j.at("H").get<int>();
        src.num_states = j.at("S").get<int>();
        src.num_actions = j.at("A").get<int>();
        if (j.contains("seed")) src.seed = j.at("seed").get<std::uint64_t>();
    }
    return src;
}

inline AgentConfig parse_agent_config(const nlohmann::json& j) {
    detail::reject_unknown_fields(
        j, {"variant", "eta", "r_star", "c", "c1", "c2", "p"}, "algorithm");
    AgentConfig cfg;
    cfg.variant = detail::parse_variant(j.at("variant").get<std::string>());
    if (j.contains("eta")) cfg.eta = j.at("eta").get<double>();
    if (j.contains("r_star")) cfg.r_star = j.at("r_star").get<std::int64_t>();
    if (j.contains("c")) cfg.hoeffding_c = j.at("c").get<double>();
    if (j.contains("c1")) cfg.bernstein_c1 = j.at("c1").get<double>();
    if (j.contains("c2")) cfg.bernstein_c2 = j.at("c2").get<double>();
    if (j.contains("p")) cfg.failure_prob = j.at("p").get<double>();
    return cfg;
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    detail::reject_unknown_fields(j,
                                  {"mdp", "algorithm", "episodes", "sweep_episodes",
                                   "seeds", "machines", "max_rounds", "output_dir",
                                   "prefix"},
                                  "config");
    ExperimentConfig cfg;
    try {
        cfg.mdp = parse_mdp_source(j.at("mdp"));
        cfg.agent = parse_agent_config(j.at("algorithm"));
        if (j.contains("episodes")) cfg.episodes = j.at("episodes").get<std::int64_t>();
        if (j.contains("sweep_episodes"))
            cfg.sweep_episodes = j.at("sweep_episodes").get<std::vector<std::int64_t>>();
        if (j.contains("seeds"))
            cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("machines"))
            cfg.machines = j.at("machines").get<std::vector<int>>();
        if (j.contains("max_rounds")) cfg.max_rounds = j.at("max_rounds").get<std::int64_t>();
        if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("prefix")) cfg.prefix = j.at("prefix").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
    cfg.agent.validate();
    return cfg;
}

// Worker pool over independent grid cells. Each cell owns its random
// stream and output file, so scheduling cannot perturb results; outputs
// are collected by index and written in deterministic order afterwards.
template <typename Fn>
void run_cells(std::size_t count, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(
        count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_experiment_config(j);
}

// Cross-module invariants re-asserted on every run the harness executes.
inline void assert_run_invariants(const ExperimentConfig& cfg, const MdpSpec& mdp,
                                  const AgentConfig& agent_cfg, std::int64_t episodes,
                                  const RunResult& result) {
    const std::int64_t hs_cap =
        static_cast<std::int64_t>(mdp.horizon) * mdp.num_states * std::max<std::int64_t>(episodes - 1, 0);
    if (result.global_switch_cost > result.local_switch_cost ||
        result.local_switch_cost > hs_cap)
        throw InvariantViolation("switching-cost ordering violated");
    if (agent_cfg.variant != ExplorationVariant::VanillaHoeffding && episodes > 0) {
        const auto params = agent_cfg.eta > 0.0
                                ? ScheduleParams{agent_cfg.eta, agent_cfg.r_star}
                                : default_schedule_params(mdp.horizon);
        const std::int64_t bound =
            switching_bound(mdp.horizon, mdp.num_states, mdp.num_actions, episodes,
                            params.eta, params.r_star);
        if (result.local_switch_cost > bound)
            throw InvariantViolation("deterministic switching bound violated");
    }
    double prev_regret = 0.0;
    std::int64_t prev_local = 0, prev_global = 0;
    for (const auto& rec : result.episodes) {
        if (rec.regret_increment < -1e-9)
            throw InvariantViolation("negative regret increment beyond tolerance");
        if (rec.cum_regret < prev_regret - 1e-9 || rec.cum_local_switches < prev_local ||
            rec.cum_global_switches < prev_global)
            throw InvariantViolation("cumulative fields must be nondecreasing");
        prev_regret = rec.cum_regret;
        prev_local = rec.cum_local_switches;
        prev_global = rec.cum_global_switches;
    }
    (void)cfg;
}

// One EpisodeRecord per line; the field set is fixed and documented in the
// README. State indices are 1-based in files.
inline void write_jsonl(const RunResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& rec : result.episodes) {
        nlohmann::ordered_json line;
        line["episode"] = rec.episode;
        line["initial_state"] = rec.initial_state + 1;
        line["regret_increment"] = rec.regret_increment;
        line["cum_regret"] = rec.cum_regret;
        line["cum_n_switch"] = rec.cum_local_switches;
        line["cum_n_switch_gl"] = rec.cum_global_switches;
        line["triggers"] = rec.triggers;
        line["realized_return"] = rec.realized_return;
        out << line.dump() << "\n";
    }
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct RunSummaryRow {
    std::uint64_t seed = 0;
    std::int64_t episodes = 0;
    double final_regret = 0.0;
    std::int64_t n_switch = 0;
    std::int64_t n_switch_gl = 0;
    std::int64_t distinct_policies = 0;
    double wall_time_s = 0.0;
};

inline constexpr const char* kSummaryHeader =
    "seed,K,final_regret,n_switch,n_switch_gl,distinct_policies,wall_time";

inline void write_summary_csv(const std::vector<RunSummaryRow>& rows,
                              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << kSummaryHeader << "\n";
    for (const auto& row : rows)
        out << row.seed << ',' << row.episodes << ',' << format_double(row.final_regret)
            << ',' << row.n_switch << ',' << row.n_switch_gl << ','
            << row.distinct_policies << ',' << format_double(row.wall_time_s) << "\n";
}

// `run`: one JSONL file per seed plus a summary CSV row per run. Seeds are
// independent cells on the worker pool.
inline std::vector<RunSummaryRow> cli_run(const ExperimentConfig& cfg) {
    if (cfg.episodes < 0) throw ConfigError("episodes must be >= 0");
    const MdpSpec mdp = cfg.mdp.build();
    std::filesystem::create_directories(cfg.output_dir);
    std::vector<RunSummaryRow> rows(cfg.seeds.size());
    run_cells(cfg.seeds.size(), [&](std::size_t cell) {
        const std::uint64_t seed = cfg.seeds[cell];
        AgentConfig agent_cfg = cfg.agent;
        agent_cfg.planned_episodes = cfg.episodes;
        Rng rng{seed};
        const auto start = std::chrono::steady_clock::now();
        const RunResult result = run_agent(agent_cfg, mdp, cfg.episodes, rng);
        const auto elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        assert_run_invariants(cfg, mdp, agent_cfg, cfg.episodes, result);
        const std::string jsonl_path = cfg.output_dir + "/" + cfg.prefix + "_seed" +
                                       std::to_string(seed) + ".jsonl";
        write_jsonl(result, jsonl_path);
        rows[cell] = {seed, cfg.episodes, result.cumulative_regret,
                      result.local_switch_cost, result.global_switch_cost,
                      static_cast<std::int64_t>(result.distinct_policies.size()),
                      elapsed};
    });
    write_summary_csv(rows, cfg.output_dir + "/" + cfg.prefix + "_summary.csv");
    return rows;
}

// `sweep`: the run grid over sweep_episodes x seeds, summary CSV only.
inline std::vector<RunSummaryRow> cli_sweep(const ExperimentConfig& cfg) {
    if (cfg.sweep_episodes.empty())
        throw ConfigError("sweep requires a nonempty sweep_episodes list");
    const MdpSpec mdp = cfg.mdp.build();
    std::filesystem::create_directories(cfg.output_dir);
    std::vector<RunSummaryRow> rows(cfg.sweep_episodes.size() * cfg.seeds.size());
    run_cells(rows.size(), [&](std::size_t cell) {
        const std::int64_t episodes = cfg.sweep_episodes[cell / cfg.seeds.size()];
        const std::uint64_t seed = cfg.seeds[cell % cfg.seeds.size()];
        AgentConfig agent_cfg = cfg.agent;
        agent_cfg.planned_episodes = episodes;
        Rng rng{seed};
        const auto start = std::chrono::steady_clock::now();
        const RunResult result = run_agent(agent_cfg, mdp, episodes, rng);
        const auto elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        assert_run_invariants(cfg, mdp, agent_cfg, episodes, result);
        rows[cell] = {seed, episodes, result.cumulative_regret,
                      result.local_switch_cost, result.global_switch_cost,
                      static_cast<std::int64_t>(result.distinct_policies.size()),
                      elapsed};
    });
    write_summary_csv(rows, cfg.output_dir + "/" + cfg.prefix + "_summary.csv");
    return rows;
}

struct BanditReportRow {
    std::string algorithm;
    std::uint64_t seed = 0;
    std::int64_t pulls = 0;
    double regret = 0.0;
    std::int64_t switches = 0;
};

// `bandit`: UCB2 and the UCB1 baseline per seed, CSV report.
inline std::vector<BanditReportRow> cli_bandit(const std::vector<double>& arm_means,
                                               std::int64_t total_pulls, double eta,
                                               const std::vector<std::uint64_t>& seeds,
                                               const std::string& output_dir,
                                               const std::string& prefix) {
    const BanditInstance instance{arm_means};
    instance.validate();
    if (total_pulls < static_cast<std::int64_t>(arm_means.size()))
        throw ConfigError("T must be at least the number of arms");
    std::vector<BanditReportRow> rows(2 * seeds.size());
    run_cells(seeds.size(), [&](std::size_t cell) {
        const std::uint64_t seed = seeds[cell];
        Rng rng2 = Rng{seed}.substream(1);
        Rng rng1 = Rng{seed}.substream(2);
        const auto ucb2 = run_ucb2(instance, total_pulls, eta, rng2);
        const auto rep = check_bandit_invariants(ucb2, total_pulls, eta);
        if (!rep.pull_conservation || !rep.epoch_budget || !rep.switch_bound)
            throw InvariantViolation("bandit epoch accounting violated");
        const auto ucb1 = run_ucb1_baseline(instance, total_pulls, rng1);
        rows[2 * cell] = {"ucb2", seed, total_pulls, ucb2.pseudo_regret, ucb2.switch_count};
        rows[2 * cell + 1] = {"ucb1", seed, total_pulls, ucb1.pseudo_regret,
                              ucb1.switch_count};
    });
    std::filesystem::create_directories(output_dir);
    std::ofstream out(output_dir + "/" + prefix + "_bandit.csv", std::ios::binary);
    out << "algorithm,seed,T,regret,switches\n";
    for (const auto& row : rows)
        out << row.algorithm << ',' << row.seed << ',' << row.pulls << ','
            << format_double(row.regret) << ',' << row.switches << "\n";
    return rows;
}

// Expected PAC gap marginalized over the initial distribution.
inline double expected_pac_gap(const MdpSpec& mdp, const MixturePolicy& mixture) {
    const ValueTables opt = optimal_values(mdp);
    double gap = expected_initial_value(mdp, opt);
    for (std::size_t j = 0; j < mixture.policies.size(); ++j)
        gap -= mixture.weights[j] *
               expected_initial_value(mdp, policy_values(mdp, mixture.policies[j]));
    return gap;
}

struct ConcurrentReportRow {
    int machines = 0;
    std::uint64_t seed = 0;
    std::int64_t rounds = 0;
    std::int64_t kept = 0;
    std::int64_t discarded = 0;
    std::int64_t n_switch = 0;  // policy syncs (phase transitions)
    double pac_gap = 0.0;
};

// `concurrent`: sweep over machine counts; every run is replayed through a
// fresh sequential learner and checked against the rounds bound.
inline std::vector<ConcurrentReportRow> cli_concurrent(const ExperimentConfig& cfg) {
    if (cfg.episodes < 1) throw ConfigError("concurrent requires episodes >= 1");
    const MdpSpec mdp = cfg.mdp.build();
    std::filesystem::create_directories(cfg.output_dir);
    std::vector<ConcurrentReportRow> rows(cfg.machines.size() * cfg.seeds.size());
    run_cells(rows.size(), [&](std::size_t cell) {
        const int machines = cfg.machines[cell / cfg.seeds.size()];
        const std::uint64_t seed = cfg.seeds[cell % cfg.seeds.size()];
        ConcurrentConfig run_cfg;
        run_cfg.machines = machines;
        run_cfg.agent = cfg.agent;
        run_cfg.agent.planned_episodes = cfg.episodes;
        run_cfg.total_kept_episodes = cfg.episodes;
        run_cfg.max_rounds = cfg.max_rounds;
        const ConcurrentResult result = run_concurrent(mdp, run_cfg, Rng{seed});
        if (!replay_equivalence_check(mdp, result, run_cfg.agent, cfg.episodes))
            throw InvariantViolation("concurrent replay equivalence failed");
        const std::int64_t ceil_km = (result.kept + machines - 1) / std::max(machines, 1);
        if (result.rounds > result.policy_syncs + ceil_km + 1)
            throw InvariantViolation("concurrent rounds bound violated");

        MixturePolicy mixture;
        std::vector<std::int64_t> tally(result.phase_policies.size(), 0);
        for (const int p : result.phase_of_episode) ++tally[p];
        for (std::size_t p = 0; p < tally.size(); ++p)
            if (tally[p] > 0) {
                mixture.policies.push_back(result.phase_policies[p]);
                mixture.weights.push_back(static_cast<double>(tally[p]) /
                                          static_cast<double>(result.kept));
            }
        const double gap = expected_pac_gap(mdp, mixture);
        rows[cell] = {machines,       seed,         result.rounds, result.kept,
                      result.discarded, result.policy_syncs, gap};
    });
    std::ofstream jsonl(cfg.output_dir + "/" + cfg.prefix + "_concurrent.jsonl",
                        std::ios::binary);
    for (const auto& row : rows) {
        nlohmann::ordered_json summary;
        summary["M"] = row.machines;
        summary["seed"] = row.seed;
        summary["rounds"] = row.rounds;
        summary["kept"] = row.kept;
        summary["discarded"] = row.discarded;
        summary["n_switch"] = row.n_switch;
        summary["speedup"] =
            row.rounds == 0 ? 0.0
                            : static_cast<double>(row.kept) / static_cast<double>(row.rounds);
        jsonl << summary.dump() << "\n";
    }
    std::ofstream csv(cfg.output_dir + "/" + cfg.prefix + "_concurrent.csv",
                      std::ios::binary);
    csv << "M,seed,rounds,kept,discarded,n_switch,pac_gap\n";
    for (const auto& row : rows)
        csv << row.machines << ',' << row.seed << ',' << row.rounds << ',' << row.kept
            << ',' << row.discarded << ',' << row.n_switch << ','
            << format_double(row.pac_gap) << "\n";
    return rows;
}

// `lowerbound` report with the two linear-regret-argument caps.
struct LowerBoundCliReport {
    LowerBoundReport stats;
    double three_quarters_cap = 0.0;  // 0.75 H + 0.05 H
    bool within_three_quarters = false;
    double switch_bound_cap = 0.0;  // H/A + mean N/(SA) + 3 SE
    bool within_switch_bound = false;
};

inline LowerBoundCliReport cli_lowerbound(const LowerBoundConfig& cfg,
                                          std::uint64_t seed) {
    LowerBoundCliReport report;
    report.stats = run_lower_bound_experiment(cfg, Rng{seed});
    const double h = static_cast<double>(cfg.horizon);
    report.three_quarters_cap = 0.75 * h + 0.05 * h;
    report.within_three_quarters = report.stats.mean_value <= report.three_quarters_cap;
    const double sa = static_cast<double>(cfg.num_states) * cfg.num_actions;
    report.switch_bound_cap = h / cfg.num_actions +
                              report.stats.mean_cum_switches / sa +
                              3.0 * report.stats.centered_se;
    report.within_switch_bound = report.stats.mean_value <= report.switch_bound_cap;
    return report;
}

struct LemmaSuiteReport {
    std::vector<PropertyCheck> checks;
    bool all_passed = true;
};

// `verify-lemmas`: the schedule module's numeric property checks.
inline LemmaSuiteReport cli_verify_lemmas(const std::vector<int>& horizons,
                                          std::int64_t t_max, std::int64_t i_max,
                                          const std::vector<int>& accumulation_horizons,
                                          std::int64_t accumulation_i_max) {
    LemmaSuiteReport report;
    for (const int h : horizons) {
        for (auto check : check_alpha_properties(h, t_max, i_max)) {
            check.name = "H=" + std::to_string(h) + ": " + check.name;
            report.all_passed &= check.passed;
            report.checks.push_back(std::move(check));
        }
        const TriggerSchedule schedule = TriggerSchedule::with_defaults(h);
        auto spacing = check_tau_spacing(schedule);
        spacing.name = "H=" + std::to_string(h) + ": " + spacing.name;
        report.all_passed &= spacing.passed;
        report.checks.push_back(std::move(spacing));
        auto last = check_tau_last_lower_bound(schedule, std::min<std::int64_t>(t_max, 100000));
        last.name = "H=" + std::to_string(h) + ": " + last.name;
        report.all_passed &= last.passed;
        report.checks.push_back(std::move(last));
    }
    for (const int h : accumulation_horizons) {
        const auto accum = check_error_accumulation(h, accumulation_i_max);
        PropertyCheck check;
        check.name = "H=" + std::to_string(h) + ": delayed-update error accumulation";
        check.passed = accum.passed;
        check.worst_margin = accum.bound + 1e-6 - accum.worst_value;
        check.detail = "worst S~_i = " + format_double(accum.worst_value) + " at i = " +
                       std::to_string(accum.worst_i) + ", bound " +
                       format_double(accum.bound);
        report.all_passed &= check.passed;
        report.checks.push_back(std::move(check));
    }
    return report;
}

}  // namespace lowswitch

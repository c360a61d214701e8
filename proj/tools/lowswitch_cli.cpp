// Command-line benchmark harness: reproducible seeded runs of the
// low-switching Q-learning agents, the UCB2 bandit, the concurrent
// simulator, the switch-budget lower-bound experiment, and the numeric
// lemma checks.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lowswitch/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string token = text.substr(pos, comma - pos);
        if (!token.empty()) seeds.push_back(std::stoull(token));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (seeds.empty()) throw lowswitch::ConfigError("empty seed list");
    return seeds;
}

template <typename T>
std::vector<T> parse_number_list(const std::string& text) {
    std::vector<T> values;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string token = text.substr(pos, comma - pos);
        if (!token.empty()) {
            if constexpr (std::is_floating_point_v<T>)
                values.push_back(static_cast<T>(std::stod(token)));
            else
                values.push_back(static_cast<T>(std::stoll(token)));
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return values;
}

struct CommonOverrides {
    std::string config_path;
    std::string seed_list;
    std::string output_dir;
    std::string prefix;
    std::int64_t episodes = -1;
};

void apply_overrides(lowswitch::ExperimentConfig& cfg, const CommonOverrides& ov) {
    if (!ov.seed_list.empty()) cfg.seeds = parse_seed_list(ov.seed_list);
    if (!ov.output_dir.empty()) cfg.output_dir = ov.output_dir;
    if (!ov.prefix.empty()) cfg.prefix = ov.prefix;
    if (ov.episodes >= 0) cfg.episodes = ov.episodes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular episodic-MDP benchmark harness for low-switching "
                 "Q-learning with UCB2 exploration"};
    app.require_subcommand(1);

    CommonOverrides run_ov, sweep_ov, conc_ov;
    std::string conc_machines;

    auto* run_cmd = app.add_subcommand("run", "Run the configured learner per seed");
    run_cmd->add_option("--config", run_ov.config_path, "JSON experiment config")->required();
    run_cmd->add_option("--seed", run_ov.seed_list, "comma list, overrides config seeds");
    run_cmd->add_option("--episodes", run_ov.episodes, "override episode count");
    run_cmd->add_option("--output-dir", run_ov.output_dir, "override output directory");
    run_cmd->add_option("--prefix", run_ov.prefix, "override output file prefix");

    auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid over sweep_episodes x seeds");
    sweep_cmd->add_option("--config", sweep_ov.config_path, "JSON experiment config")->required();
    sweep_cmd->add_option("--seed", sweep_ov.seed_list, "comma list, overrides config seeds");
    sweep_cmd->add_option("--output-dir", sweep_ov.output_dir, "override output directory");
    sweep_cmd->add_option("--prefix", sweep_ov.prefix, "override output file prefix");

    std::string bandit_arms = "0.9,0.5";
    std::int64_t bandit_pulls = 100000;
    double bandit_eta = 0.25;
    std::string bandit_seeds = "1";
    std::string bandit_dir = ".";
    std::string bandit_prefix = "bandit";
    auto* bandit_cmd = app.add_subcommand("bandit", "UCB2 vs UCB1 on Bernoulli arms");
    bandit_cmd->add_option("--arms", bandit_arms, "comma list of Bernoulli means");
    bandit_cmd->add_option("--pulls", bandit_pulls, "total pulls T");
    bandit_cmd->add_option("--eta", bandit_eta, "UCB2 epoch growth parameter");
    bandit_cmd->add_option("--seed", bandit_seeds, "comma list of seeds");
    bandit_cmd->add_option("--output-dir", bandit_dir, "output directory");
    bandit_cmd->add_option("--prefix", bandit_prefix, "output file prefix");

    auto* conc_cmd =
        app.add_subcommand("concurrent", "Concurrent Q-learning sweep over machine counts");
    conc_cmd->add_option("--config", conc_ov.config_path, "JSON experiment config")->required();
    conc_cmd->add_option("--seed", conc_ov.seed_list, "comma list, overrides config seeds");
    conc_cmd->add_option("--machines", conc_machines, "comma list, overrides config machines");
    conc_cmd->add_option("--episodes", conc_ov.episodes, "override kept-episode target");
    conc_cmd->add_option("--output-dir", conc_ov.output_dir, "override output directory");
    conc_cmd->add_option("--prefix", conc_ov.prefix, "override output file prefix");

    lowswitch::LowerBoundConfig lb_cfg;
    std::uint64_t lb_seed = 1;
    std::string lb_output;
    auto* lb_cmd = app.add_subcommand(
        "lowerbound", "Switch-budget-capped exploration on the hard instance family");
    lb_cmd->add_option("--horizon", lb_cfg.horizon, "H");
    lb_cmd->add_option("--states", lb_cfg.num_states, "S");
    lb_cmd->add_option("--actions", lb_cfg.num_actions, "A");
    lb_cmd->add_option("--budget", lb_cfg.switch_budget,
                       "local switch budget (default floor(HSA/2))");
    lb_cmd->add_option("--draws", lb_cfg.draws, "number of hidden action tables");
    lb_cmd->add_option("--episodes", lb_cfg.episodes, "episodes per draw");
    lb_cmd->add_option("--agent-c", lb_cfg.agent_c, "bonus constant of the explorer");
    lb_cmd->add_option("--seed", lb_seed, "master seed");
    lb_cmd->add_option("--output", lb_output, "optional JSON report path");

    std::string lemma_horizons = "1,2,3,5";
    std::int64_t lemma_t_max = 10000;
    std::int64_t lemma_i_max = 200;
    std::string accum_horizons = "2,3";
    std::int64_t accum_i_max = 500;
    auto* lemma_cmd = app.add_subcommand("verify-lemmas",
                                         "Numeric stepsize and error-accumulation checks");
    lemma_cmd->add_option("--horizons", lemma_horizons, "comma list of H values");
    lemma_cmd->add_option("--t-max", lemma_t_max, "weight sweep upper limit");
    lemma_cmd->add_option("--i-max", lemma_i_max, "tracked starting indices");
    lemma_cmd->add_option("--accum-horizons", accum_horizons,
                          "H values for the error-accumulation check");
    lemma_cmd->add_option("--accum-i-max", accum_i_max,
                          "starting indices for the error-accumulation check");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate-mdp", "Validate an MDP JSON file");
    validate_cmd->add_option("path", validate_path, "MDP file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run_cmd) {
            auto cfg = lowswitch::load_experiment_config(run_ov.config_path);
            apply_overrides(cfg, run_ov);
            const auto rows = lowswitch::cli_run(cfg);
            std::printf("wrote %zu run(s) to %s/%s_*.jsonl\n", rows.size(),
                        cfg.output_dir.c_str(), cfg.prefix.c_str());
        } else if (*sweep_cmd) {
            auto cfg = lowswitch::load_experiment_config(sweep_ov.config_path);
            apply_overrides(cfg, sweep_ov);
            const auto rows = lowswitch::cli_sweep(cfg);
            std::printf("wrote %zu summary row(s) to %s/%s_summary.csv\n", rows.size(),
                        cfg.output_dir.c_str(), cfg.prefix.c_str());
        } else if (*bandit_cmd) {
            const auto arms = parse_number_list<double>(bandit_arms);
            const auto seeds = parse_seed_list(bandit_seeds);
            const auto rows = lowswitch::cli_bandit(arms, bandit_pulls, bandit_eta, seeds,
                                                    bandit_dir, bandit_prefix);
            std::printf("wrote %zu bandit row(s) to %s/%s_bandit.csv\n", rows.size(),
                        bandit_dir.c_str(), bandit_prefix.c_str());
        } else if (*conc_cmd) {
            auto cfg = lowswitch::load_experiment_config(conc_ov.config_path);
            apply_overrides(cfg, conc_ov);
            if (!conc_machines.empty())
                cfg.machines = parse_number_list<int>(conc_machines);
            const auto rows = lowswitch::cli_concurrent(cfg);
            for (const auto& row : rows)
                std::printf("M=%d seed=%llu rounds=%lld kept=%lld discarded=%lld "
                            "n_switch=%lld pac_gap=%s\n",
                            row.machines, static_cast<unsigned long long>(row.seed),
                            static_cast<long long>(row.rounds),
                            static_cast<long long>(row.kept),
                            static_cast<long long>(row.discarded),
                            static_cast<long long>(row.n_switch),
                            lowswitch::format_double(row.pac_gap).c_str());
        } else if (*lb_cmd) {
            if (lb_cfg.num_actions < 4)
                std::fprintf(stderr,
                             "warning: the linear-regret argument needs A >= 4; "
                             "A = %d gives a weaker experiment\n",
                             lb_cfg.num_actions);
            const auto report = lowswitch::cli_lowerbound(lb_cfg, lb_seed);
            nlohmann::ordered_json j;
            j["H"] = lb_cfg.horizon;
            j["S"] = lb_cfg.num_states;
            j["A"] = lb_cfg.num_actions;
            j["budget"] = report.stats.budget;
            j["draws"] = report.stats.draws;
            j["episodes"] = report.stats.episodes;
            j["mean_value"] = report.stats.mean_value;
            j["mean_cum_switches"] = report.stats.mean_cum_switches;
            j["value_se"] = report.stats.value_se;
            j["three_quarters_cap"] = report.three_quarters_cap;
            j["within_three_quarters"] = report.within_three_quarters;
            j["switch_bound_cap"] = report.switch_bound_cap;
            j["within_switch_bound"] = report.within_switch_bound;
            const std::string text = j.dump(2);
            std::printf("%s\n", text.c_str());
            if (!lb_output.empty()) {
                std::ofstream out(lb_output, std::ios::binary);
                out << text << "\n";
            }
            if (!report.within_three_quarters || !report.within_switch_bound)
                return kExitInvariant;
        } else if (*lemma_cmd) {
            const auto horizons = parse_number_list<int>(lemma_horizons);
            const auto accum = parse_number_list<int>(accum_horizons);
            const auto report = lowswitch::cli_verify_lemmas(horizons, lemma_t_max,
                                                             lemma_i_max, accum,
                                                             accum_i_max);
            for (const auto& check : report.checks)
                std::printf("[%s] %s (worst margin %s)%s%s\n",
                            check.passed ? "PASS" : "FAIL", check.name.c_str(),
                            lowswitch::format_double(check.worst_margin).c_str(),
                            check.detail.empty() ? "" : "; ", check.detail.c_str());
            if (!report.all_passed) return kExitInvariant;
        } else if (*validate_cmd) {
            std::ifstream in(validate_path);
            if (!in) throw lowswitch::ConfigError("cannot open " + validate_path);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw lowswitch::ConfigError(std::string("not valid JSON: ") + e.what());
            }
            try {
                const auto mdp = lowswitch::mdp_from_json(j);
                std::printf("ok: H=%d S=%d A=%d\n", mdp.horizon, mdp.num_states,
                            mdp.num_actions);
            } catch (const std::invalid_argument& e) {
                std::printf("invalid: %s\n", e.what());
                return kExitConfig;
            }
        }
    } catch (const lowswitch::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const lowswitch::InvariantViolation& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitOk;
}

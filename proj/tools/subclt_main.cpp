#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "subclt/errors.hpp"
#include "subclt/experiment.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    std::optional<std::uint64_t> budget_configs_override;
    int threads = 1;
};

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw subclt::ConfigError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw subclt::ConfigError("failed while writing '" + path.string() + "'");
    std::cout << "wrote " << path.string() << "\n";
}

void write_report(const std::filesystem::path& path, const nlohmann::json& report) {
    write_text_file(path, report.dump(2) + "\n");
}

int outcome_exit(const subclt::RunOutcome& outcome) {
    if (!outcome.verify_ok) return 4;
    if (outcome.budget_gaps) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Normal-approximation laboratory for subgraph counts in G(n, p)"};
    app.require_subcommand(1);
    CliOptions options;

    const auto add_common = [&options](CLI::App* command) {
        command->add_option("--config", options.config_path, "JSON experiment config path")
            ->required();
        command->add_option("--seed", options.seed_override,
                            "override the config seed (64-bit)");
        command->add_option("--out", options.out_override, "override the output directory");
        command->add_option("--threads", options.threads, "sampling worker threads")
            ->check(CLI::PositiveNumber);
        command->add_option("--budget-configs", options.budget_configs_override,
                            "cap on exhaustive-sweep configurations");
    };

    CLI::App* catalog = app.add_subcommand("catalog", "pattern, psi, and degree statistics");
    CLI::App* chains = app.add_subcommand("chains", "exact dependency-chain sums");
    CLI::App* oracle = app.add_subcommand("oracle-verify",
                                          "exhaustive identity and bound verification");
    CLI::App* bounds = app.add_subcommand("bounds", "certified bound report per n");
    CLI::App* mc_run = app.add_subcommand("mc-run", "Monte Carlo distance experiment (CSV)");
    CLI::App* rate_fit = app.add_subcommand("rate-fit", "log-log rate fit of the experiment");
    for (CLI::App* command : {catalog, chains, oracle, bounds, mc_run, rate_fit}) {
        add_common(command);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 2;
    }

    try {
        subclt::ExperimentConfig config = subclt::load_experiment_config(options.config_path);
        if (options.seed_override) config.seed = *options.seed_override;
        if (options.budget_configs_override) {
            if (*options.budget_configs_override < 2) {
                throw subclt::ConfigError("--budget-configs must be at least 2");
            }
            config.budgets.budget_configs = *options.budget_configs_override;
        }
        if (options.out_override) config.out_dir = *options.out_override;
        const std::filesystem::path out_dir(config.out_dir);
        std::filesystem::create_directories(out_dir);
        std::cout << "config " << subclt::config_hash_hex(config) << " seed " << config.seed
                  << " pattern " << config.pattern.label() << "\n";

        if (*catalog) {
            const subclt::RunOutcome outcome = subclt::run_catalog(config);
            write_report(out_dir / "catalog.json", outcome.report);
            return outcome_exit(outcome);
        }
        if (*chains) {
            const subclt::RunOutcome outcome = subclt::run_chains(config);
            write_report(out_dir / "chains.json", outcome.report);
            for (const auto& gap : outcome.report.at("budget_gaps")) {
                std::cout << "gap: n=" << gap.at("n").get<int>() << " "
                          << gap.at("message").get<std::string>() << "\n";
            }
            return outcome_exit(outcome);
        }
        if (*oracle) {
            const subclt::RunOutcome outcome = subclt::run_oracle_verify(config);
            write_report(out_dir / "oracle_verify.json", outcome.report);
            for (const auto& point : outcome.report.at("points")) {
                std::cout << "n=" << point.at("n").get<int>();
                if (point.contains("identity_residual_max")) {
                    std::cout << " identity_residual_max="
                              << point.at("identity_residual_max").get<double>()
                              << " cubic_identity_residual="
                              << point.at("cubic_identity_residual").get<double>();
                }
                std::cout << (point.at("ok").get<bool>() ? " ok" : " FAILED") << "\n";
            }
            if (!outcome.verify_ok) {
                std::cerr << "oracle-verify: at least one identity or bound check failed\n";
            }
            return outcome_exit(outcome);
        }
        if (*bounds) {
            const subclt::RunOutcome outcome = subclt::run_bounds(config);
            write_report(out_dir / "bounds.json", outcome.report);
            return outcome_exit(outcome);
        }
        if (*mc_run) {
            const subclt::McRunResult result = subclt::run_mc(config, options.threads);
            write_text_file(out_dir / "mc_points.csv", result.csv);
            write_report(out_dir / "mc_run.json", result.report);
            subclt::RunOutcome outcome;
            outcome.budget_gaps = result.budget_gaps;
            return outcome_exit(outcome);
        }
        if (*rate_fit) {
            const subclt::RunOutcome outcome = subclt::run_rate_fit(config, options.threads);
            write_report(out_dir / "rate_fit.json", outcome.report);
            for (const char* key : {"fit_dense", "fit_sparse"}) {
                const auto& fit = outcome.report.at(key);
                if (fit.contains("slope")) {
                    std::cout << key << ": slope=" << fit.at("slope").get<double>()
                              << " r2=" << fit.at("r_squared").get<double>() << "\n";
                } else {
                    std::cout << key << ": " << fit.at("error").get<std::string>() << "\n";
                }
            }
            return outcome_exit(outcome);
        }
        return 0;
    } catch (const subclt::ConfigError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    } catch (const subclt::VerifyError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 4;
    } catch (const subclt::ConsistencyError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 4;
    } catch (const subclt::InsufficientDataError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 3;
    } catch (const subclt::BudgetError& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 3;
    } catch (const std::exception& error) {
        std::cerr << "unexpected error: " << error.what() << "\n";
        return 1;
    }
}

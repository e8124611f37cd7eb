#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "subclt/copies.hpp"
#include "subclt/mc.hpp"
#include "subclt/pattern.hpp"
#include "subclt/rate_bounds.hpp"

namespace subclt {

inline constexpr const char* kVersion = "subclt 0.1.0";
inline constexpr const char* kGeneratorName = "philox4x32-10";
inline constexpr int kConfigSchema = 1;

/** p(n) = theta * n^{-alpha}. */
struct PowerLawP {
    double theta = 0.0;
    double alpha = 0.0;
};

struct TGridSpec {
    double max = 4.0;
    int count = 17;
};

struct ExperimentBudgets {
    std::uint64_t max_copies = 10'000'000;
    std::uint64_t triple_ops = 100'000'000;
    std::uint64_t chain6_ops = 1'000'000'000;
    std::uint64_t max_pairs = 2'000'000;
    int ab_oracle_bits = 15;
    std::int64_t ab_mc_samples = 0;
    std::uint64_t budget_configs = 4'194'304;  // exhaustive-sweep cap (2^22 configurations)
};

/** A parsed, validated, defaults-applied experiment description. */
struct ExperimentConfig {
    explicit ExperimentConfig(PatternGraph pattern_graph) : pattern(std::move(pattern_graph)) {}

    PatternGraph pattern;
    std::optional<std::string> pattern_file;  // set when the pattern came from a file
    std::vector<int> n_grid;
    std::optional<double> p_fixed;
    std::optional<PowerLawP> p_power;
    std::int64_t m = 100;
    std::uint64_t seed = 0;
    double p0 = 0.5;
    std::optional<TGridSpec> t_grid;
    ExperimentBudgets budgets;
    std::string out_dir = ".";

    double p_at(int n) const;
    /// Symmetric grid (-max..max, `count` points); empty when unset.
    std::vector<double> t_grid_values() const;
};

/// Parse a JSON config document; `base_dir` resolves relative pattern files.
/// Violations throw ConfigError naming the offending key.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir = ".");
ExperimentConfig load_experiment_config(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);

/// The canonical (sorted-key, defaults-applied, content-addressed) form of the
/// config; its FNV-1a hash identifies the run in every report.
std::string canonical_config_json(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);
nlohmann::json report_envelope(const ExperimentConfig& config);

struct RunOutcome {
    nlohmann::json report;
    bool verify_ok = true;    // false => the oracle suite found a violation
    bool budget_gaps = false; // true => some requested quantity was skipped
};

RunOutcome run_catalog(const ExperimentConfig& config);
RunOutcome run_chains(const ExperimentConfig& config);
RunOutcome run_oracle_verify(const ExperimentConfig& config);
RunOutcome run_bounds(const ExperimentConfig& config);

struct McRunResult {
    std::vector<RatePoint> points;
    std::string csv;
    nlohmann::json report;
    bool budget_gaps = false;
};

McRunResult run_mc(const ExperimentConfig& config, int threads = 1);
RunOutcome run_rate_fit(const ExperimentConfig& config, int threads = 1);

/// The fixed-column CSV form of a rate experiment (floats at 17 significant
/// digits), envelope carried in '#' comment lines.
std::string rate_points_csv(const std::vector<RatePoint>& points,
                            const nlohmann::json& envelope);

}  // namespace subclt

#include "subclt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "subclt/bkr.hpp"
#include "subclt/errors.hpp"
#include "subclt/exhaustive.hpp"
#include "subclt/stein.hpp"

namespace subclt {

using nlohmann::json;

namespace {

constexpr double kIdentityTol = 1e-9;
constexpr double kCubicTol = 1e-10;
constexpr double kMomentTol = 1e-10;

[[noreturn]] void config_error(const std::string& key, const std::string& message) {
    throw ConfigError("config: " + key + ": " + message);
}

const json& require_key(const json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) config_error(key, "required key is missing");
    return *it;
}

std::int64_t integer_field(const json& j, const std::string& key) {
    if (!j.is_number_integer()) config_error(key, "must be an integer");
    return j.get<std::int64_t>();
}

double number_field(const json& j, const std::string& key) {
    if (!j.is_number()) config_error(key, "must be a number");
    return j.get<double>();
}

std::uint64_t unsigned_field(const json& j, const std::string& key) {
    if (!(j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0))) {
        config_error(key, "must be a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::vector<double> default_residual_grid() {
    return {-3.0, -1.0, -0.25, 0.25, 0.5, 1.0, 2.0, 4.0};
}

int allowed_edge_bits(std::uint64_t budget_configs) {
    int bits = 0;
    while (bits < 40 && (std::uint64_t{1} << (bits + 1)) <= budget_configs) ++bits;
    return bits;
}

json pattern_summary(const ExperimentConfig& config) {
    const PatternGraph stripped = config.pattern.without_isolated_vertices();
    const PairClassTable table = pair_class_table(stripped);
    json edges = json::array();
    for (const auto& [u, v] : config.pattern.edges()) edges.push_back(json::array({u, v}));
    json j;
    j["label"] = config.pattern.label();
    j["vertices"] = stripped.vertex_count();
    j["edges"] = stripped.edge_count();
    j["edge_list"] = std::move(edges);
    j["automorphisms"] = table.automorphisms;
    j["anchored_copies"] = table.anchored_copies;
    if (config.pattern_file) j["pattern_file"] = *config.pattern_file;
    return j;
}

json ab_to_json(const AbEstimate& estimate) {
    json j;
    j["a"] = estimate.a;
    j["b_grid_max"] = estimate.b_grid_max;
    j["b_majorant"] = estimate.b_majorant;
    j["majorant_is_heuristic"] = estimate.majorant_is_heuristic;
    j["epsilon"] = estimate.epsilon;
    j["method"] = estimate.method;
    if (estimate.a_se > 0.0 || estimate.b_se > 0.0 || estimate.epsilon_se > 0.0) {
        j["a_se"] = estimate.a_se;
        j["b_se"] = estimate.b_se;
        j["epsilon_se"] = estimate.epsilon_se;
    }
    return j;
}

}  // namespace

double ExperimentConfig::p_at(int n) const {
    if (p_fixed) return *p_fixed;
    return p_power->theta * std::pow(static_cast<double>(n), -p_power->alpha);
}

std::vector<double> ExperimentConfig::t_grid_values() const {
    if (!t_grid) return {};
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(t_grid->count));
    for (int k = 0; k < t_grid->count; ++k) {
        values.push_back(-t_grid->max +
                         2.0 * t_grid->max * k / static_cast<double>(t_grid->count - 1));
    }
    return values;
}

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& error) {
        throw ConfigError(std::string("config: ") + error.what());
    }
    if (!doc.is_object()) throw ConfigError("config: the document must be a JSON object");

    static const std::vector<std::string> known = {
        "schema", "pattern", "pattern_file", "n_grid", "p",     "m",
        "seed",   "p0",      "t_grid",       "budgets", "out_dir"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            config_error(key, "unknown key");
        }
    }

    if (integer_field(require_key(doc, "schema"), "schema") != kConfigSchema) {
        config_error("schema", "this build understands schema 1 only");
    }

    const bool has_preset = doc.contains("pattern");
    const bool has_file = doc.contains("pattern_file");
    if (has_preset == has_file) {
        throw ConfigError("config: exactly one of 'pattern' and 'pattern_file' is required");
    }
    std::optional<std::string> pattern_file;
    PatternGraph pattern = [&] {
        if (has_preset) {
            const json& field = doc.at("pattern");
            if (!field.is_string()) config_error("pattern", "must be a preset name string");
            try {
                return PatternGraph::preset(field.get<std::string>());
            } catch (const ConfigError& error) {
                config_error("pattern", error.what());
            }
        }
        const json& field = doc.at("pattern_file");
        if (!field.is_string()) config_error("pattern_file", "must be a path string");
        std::string path = field.get<std::string>();
        if (!path.empty() && path.front() != '/') path = base_dir + "/" + path;
        std::ifstream in(path);
        if (!in) config_error("pattern_file", "cannot read '" + path + "'");
        std::ostringstream text;
        text << in.rdbuf();
        pattern_file = path;
        try {
            return PatternGraph::from_edge_list(text.str());
        } catch (const ConfigError& error) {
            config_error("pattern_file", error.what());
        }
    }();
    ExperimentConfig config(std::move(pattern));
    config.pattern_file = std::move(pattern_file);

    const json& grid = require_key(doc, "n_grid");
    if (!grid.is_array() || grid.empty()) config_error("n_grid", "must be a nonempty array");
    for (const auto& entry : grid) {
        config.n_grid.push_back(static_cast<int>(integer_field(entry, "n_grid")));
    }
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
        if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1]) {
            config_error("n_grid", "entries must be strictly increasing");
        }
    }
    const int min_vertices = config.pattern.without_isolated_vertices().vertex_count();
    if (config.n_grid.front() < min_vertices) {
        config_error("n_grid", "the smallest n cannot hold a copy of the pattern");
    }

    const json& p_field = require_key(doc, "p");
    if (p_field.is_number()) {
        const double p = p_field.get<double>();
        if (!(p > 0.0) || !(p < 1.0)) config_error("p", "must lie strictly between 0 and 1");
        config.p_fixed = p;
    } else if (p_field.is_object()) {
        for (const auto& [key, value] : p_field.items()) {
            (void)value;
            if (key != "theta" && key != "alpha") config_error("p." + key, "unknown key");
        }
        PowerLawP power;
        power.theta = number_field(require_key(p_field, "theta"), "p.theta");
        power.alpha = number_field(require_key(p_field, "alpha"), "p.alpha");
        if (!(power.theta > 0.0)) config_error("p.theta", "must be positive");
        if (!(power.alpha >= 0.0) || !(power.alpha < 1.0)) {
            config_error("p.alpha", "must lie in [0, 1)");
        }
        config.p_power = power;
    } else {
        config_error("p", "must be a number or an object {theta, alpha}");
    }
    for (int n : config.n_grid) {
        const double p = config.p_at(n);
        if (!(p > 0.0) || !(p < 1.0)) {
            config_error("p", "evaluates to " + format_double(p) + " at n = " +
                                  std::to_string(n) + ", outside (0, 1)");
        }
    }

    config.m = integer_field(require_key(doc, "m"), "m");
    if (config.m < 100) config_error("m", "must be at least 100");
    config.seed = unsigned_field(require_key(doc, "seed"), "seed");

    if (doc.contains("p0")) {
        config.p0 = number_field(doc.at("p0"), "p0");
        if (!(config.p0 > 0.0) || !(config.p0 < 1.0)) {
            config_error("p0", "must lie strictly between 0 and 1");
        }
    }

    if (doc.contains("t_grid")) {
        const json& field = doc.at("t_grid");
        if (!field.is_object()) config_error("t_grid", "must be an object {max, count}");
        for (const auto& [key, value] : field.items()) {
            (void)value;
            if (key != "max" && key != "count") config_error("t_grid." + key, "unknown key");
        }
        TGridSpec spec;
        spec.max = number_field(require_key(field, "max"), "t_grid.max");
        spec.count = static_cast<int>(integer_field(require_key(field, "count"), "t_grid.count"));
        if (!(spec.max > 0.0)) config_error("t_grid.max", "must be positive");
        if (spec.count < 2) config_error("t_grid.count", "must be at least 2");
        config.t_grid = spec;
    }

    if (doc.contains("budgets")) {
        const json& field = doc.at("budgets");
        if (!field.is_object()) config_error("budgets", "must be an object");
        static const std::vector<std::string> budget_keys = {
            "max_copies", "triple_ops", "chain6_ops",    "max_pairs",
            "ab_oracle_bits", "ab_mc_samples", "budget_configs"};
        for (const auto& [key, value] : field.items()) {
            (void)value;
            if (std::find(budget_keys.begin(), budget_keys.end(), key) == budget_keys.end()) {
                config_error("budgets." + key, "unknown key");
            }
        }
        ExperimentBudgets& budgets = config.budgets;
        if (field.contains("max_copies")) {
            budgets.max_copies = unsigned_field(field.at("max_copies"), "budgets.max_copies");
            if (budgets.max_copies == 0) config_error("budgets.max_copies", "must be positive");
        }
        if (field.contains("triple_ops")) {
            budgets.triple_ops = unsigned_field(field.at("triple_ops"), "budgets.triple_ops");
            if (budgets.triple_ops == 0) config_error("budgets.triple_ops", "must be positive");
        }
        if (field.contains("chain6_ops")) {
            budgets.chain6_ops = unsigned_field(field.at("chain6_ops"), "budgets.chain6_ops");
            if (budgets.chain6_ops == 0) config_error("budgets.chain6_ops", "must be positive");
        }
        if (field.contains("max_pairs")) {
            budgets.max_pairs = unsigned_field(field.at("max_pairs"), "budgets.max_pairs");
            if (budgets.max_pairs == 0) config_error("budgets.max_pairs", "must be positive");
        }
        if (field.contains("ab_oracle_bits")) {
            const std::int64_t bits =
                integer_field(field.at("ab_oracle_bits"), "budgets.ab_oracle_bits");
            if (bits < 0 || bits > 22) config_error("budgets.ab_oracle_bits", "must lie in [0, 22]");
            budgets.ab_oracle_bits = static_cast<int>(bits);
        }
        if (field.contains("ab_mc_samples")) {
            budgets.ab_mc_samples =
                integer_field(field.at("ab_mc_samples"), "budgets.ab_mc_samples");
            if (budgets.ab_mc_samples < 0) {
                config_error("budgets.ab_mc_samples", "must be nonnegative");
            }
        }
        if (field.contains("budget_configs")) {
            budgets.budget_configs =
                unsigned_field(field.at("budget_configs"), "budgets.budget_configs");
            if (budgets.budget_configs < 2) config_error("budgets.budget_configs", "must be >= 2");
        }
    }

    if (doc.contains("out_dir")) {
        const json& field = doc.at("out_dir");
        if (!field.is_string()) config_error("out_dir", "must be a string");
        config.out_dir = field.get<std::string>();
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    std::string dir = ".";
    if (const auto slash = path.find_last_of('/'); slash != std::string::npos) {
        dir = path.substr(0, slash);
    }
    return parse_experiment_config(text.str(), dir);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string canonical_config_json(const ExperimentConfig& config) {
    json j;
    j["schema"] = kConfigSchema;
    j["pattern"] = config.pattern.label();
    json edges = json::array();
    for (const auto& [u, v] : config.pattern.edges()) edges.push_back(json::array({u, v}));
    j["pattern_edges"] = std::move(edges);
    j["n_grid"] = config.n_grid;
    if (config.p_fixed) {
        j["p"] = *config.p_fixed;
    } else {
        j["p"] = json{{"theta", config.p_power->theta}, {"alpha", config.p_power->alpha}};
    }
    j["m"] = config.m;
    j["seed"] = config.seed;
    j["p0"] = config.p0;
    if (config.t_grid) {
        j["t_grid"] = json{{"max", config.t_grid->max}, {"count", config.t_grid->count}};
    } else {
        j["t_grid"] = nullptr;
    }
    j["budgets"] = json{{"max_copies", config.budgets.max_copies},
                        {"triple_ops", config.budgets.triple_ops},
                        {"chain6_ops", config.budgets.chain6_ops},
                        {"max_pairs", config.budgets.max_pairs},
                        {"ab_oracle_bits", config.budgets.ab_oracle_bits},
                        {"ab_mc_samples", config.budgets.ab_mc_samples},
                        {"budget_configs", config.budgets.budget_configs}};
    return j.dump();
}

std::string config_hash_hex(const ExperimentConfig& config) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_config_json(config))));
    return buffer;
}

json report_envelope(const ExperimentConfig& config) {
    json j;
    j["schema"] = kConfigSchema;
    j["version"] = kVersion;
    j["generator"] = kGeneratorName;
    j["config_hash"] = config_hash_hex(config);
    j["seed"] = config.seed;
    return j;
}

RunOutcome run_catalog(const ExperimentConfig& config) {
    RunOutcome outcome;
    json report = report_envelope(config);
    report["pattern"] = pattern_summary(config);
    const auto catalog = subgraph_catalog(config.pattern);
    json classes = json::array();
    for (const SubgraphClass& entry : catalog) {
        classes.push_back(json{{"vertices", entry.vertex_count},
                               {"edges", entry.edge_count},
                               {"code", static_cast<std::uint64_t>(entry.code)},
                               {"subsets", entry.subset_count}});
    }
    report["catalog"] = std::move(classes);
    json points = json::array();
    for (int n : config.n_grid) {
        const double p = config.p_at(n);
        const ModelStats stats = model_stats(n, p, config.pattern);
        const RatePrediction prediction = predicted_rate(stats, config.p0);
        json point;
        point["n"] = n;
        point["p"] = p;
        point["copy_count"] = stats.copy_count;
        point["mean"] = stats.mean;
        point["variance"] = stats.variance;
        point["sigma"] = stats.sigma;
        point["degree_open"] = stats.degree_open;
        point["degree_closed"] = stats.degree_closed;
        point["psi"] = stats.psi_value;
        point["psi_argmin"] = stats.psi_all.argmin;
        point["psi_per_class"] = stats.psi_all.per_class;
        point["rate_dense"] = rate_dense(n, p);
        point["rate_sparse"] = rate_sparse(stats);
        point["regime"] = prediction.regime == RateRegime::kDense ? "dense" : "sparse";
        point["variance_shape_ratio"] = variance_shape_ratio(stats);
        points.push_back(std::move(point));
    }
    report["points"] = std::move(points);
    outcome.report = std::move(report);
    return outcome;
}

RunOutcome run_chains(const ExperimentConfig& config) {
    RunOutcome outcome;
    json report = report_envelope(config);
    report["pattern"] = pattern_summary(config);
    const CopyBudget copy_budget{config.budgets.max_copies};
    const ChainBudgets chain_budgets{config.budgets.triple_ops, config.budgets.chain6_ops};
    json points = json::array();
    json gaps = json::array();
    for (int n : config.n_grid) {
        const double p = config.p_at(n);
        try {
            const CopyIndex index = enumerate_copies(n, config.pattern, copy_budget);
            const ChainSums sums = chain_sums(index, p, chain_budgets);
            const ModelStats stats = model_stats(n, p, config.pattern);
            const PsiFormBounds shapes = psi_form_bounds(stats);
            json point;
            point["n"] = n;
            point["p"] = p;
            point["triple"] = sums.triple;
            point["chain6"] = sums.chain6;
            point["end2_shape"] = shapes.end2_shape;
            point["end3_shape"] = shapes.end3_shape;
            point["triple_over_shape"] = sums.triple / shapes.end2_shape;
            point["chain6_over_shape"] = sums.chain6 / shapes.end3_shape;
            points.push_back(std::move(point));
        } catch (const BudgetError& error) {
            gaps.push_back(json{{"n", n}, {"message", error.what()}});
            outcome.budget_gaps = true;
        } catch (const SizeError& error) {
            gaps.push_back(json{{"n", n}, {"message", error.what()}});
            outcome.budget_gaps = true;
        }
    }
    report["points"] = std::move(points);
    report["budget_gaps"] = std::move(gaps);
    outcome.report = std::move(report);
    return outcome;
}

RunOutcome run_oracle_verify(const ExperimentConfig& config) {
    RunOutcome outcome;
    json report = report_envelope(config);
    report["pattern"] = pattern_summary(config);
    std::vector<double> grid = config.t_grid_values();
    if (grid.empty()) grid = default_residual_grid();
    report["t_grid"] = grid;
    json points = json::array();
    json gaps = json::array();
    const int edge_bits_cap = allowed_edge_bits(config.budgets.budget_configs);
    for (int n : config.n_grid) {
        const double p = config.p_at(n);
        json point;
        point["n"] = n;
        point["p"] = p;
        try {
            const ExactModel model(n, p, config.pattern, edge_bits_cap);
            const ExactMoments moments = exact_moments(model);
            point["mean_residual"] = std::abs(moments.mean_enumeration - moments.mean_formula);
            point["variance_residual"] =
                std::abs(moments.variance_enumeration - moments.variance_formula);

            const ExactDistribution distribution = exact_distribution(model);
            point["w_mean_residual"] = std::abs(distribution.mean_w);
            point["w_variance_residual"] = std::abs(distribution.variance_w - 1.0);
            const double exact_distance = kolmogorov_exact(distribution);
            point["kolmogorov_exact"] = exact_distance;

            const Decomposition decomposition(model.index(), p,
                                              DecompositionBudget{config.budgets.max_pairs});
            double cubic_residual = 0.0;
            Decomposition::Realization realization;
            sweep_configurations(model, [&](const EdgeConfiguration& cfg, double, int) {
                decomposition.realize(cfg, realization);
                cubic_residual = std::max(cubic_residual, decomposition.w3_residual(realization));
            });
            point["cubic_identity_residual"] = cubic_residual;

            double identity_residual = 0.0;
            json per_t = json::array();
            for (double t : grid) {
                const HtMoments ht = ht_moments(model, decomposition, t);
                identity_residual = std::max(identity_residual, ht.identity_residual);
                per_t.push_back(json{{"t", t}, {"identity_residual", ht.identity_residual}});
            }
            point["identity_residual_max"] = identity_residual;
            point["identity_residuals"] = std::move(per_t);

            const AbEstimate ab = estimate_ab_oracle(model, decomposition);
            point["ab"] = ab_to_json(ab);
            const double st = st_bound(ab.a, ab.b_grid_max);
            point["st_bound"] = st;
            const SmoothingResult smoothing =
                smoothing_bound(exact_cf_difference(model), 1.0 / (2.0 * ab.a));
            point["smoothing_bound"] = smoothing.bound;

            const bool ok = point["mean_residual"].get<double>() <= kMomentTol &&
                            point["variance_residual"].get<double>() <= kMomentTol &&
                            point["w_mean_residual"].get<double>() <= kMomentTol &&
                            point["w_variance_residual"].get<double>() <= kMomentTol &&
                            cubic_residual <= kCubicTol &&
                            identity_residual <= kIdentityTol && ab.epsilon >= 0.0 &&
                            exact_distance <= st + 1e-12 &&
                            exact_distance <= smoothing.bound + 1e-12;
            point["ok"] = ok;
            if (!ok) outcome.verify_ok = false;
            points.push_back(std::move(point));
        } catch (const SizeError& error) {
            gaps.push_back(json{{"n", n}, {"message", error.what()}});
            outcome.budget_gaps = true;
        } catch (const BudgetError& error) {
            gaps.push_back(json{{"n", n}, {"message", error.what()}});
            outcome.budget_gaps = true;
        } catch (const ConsistencyError& error) {
            point["ok"] = false;
            point["message"] = error.what();
            points.push_back(std::move(point));
            outcome.verify_ok = false;
        }
    }
    report["points"] = std::move(points);
    report["budget_gaps"] = std::move(gaps);
    report["ok"] = outcome.verify_ok;
    outcome.report = std::move(report);
    return outcome;
}

RunOutcome run_bounds(const ExperimentConfig& config) {
    RunOutcome outcome;
    json report = report_envelope(config);
    report["pattern"] = pattern_summary(config);
    BoundReportOptions options;
    options.p0 = config.p0;
    options.chain_budgets = ChainBudgets{config.budgets.triple_ops, config.budgets.chain6_ops};
    options.copy_budget = CopyBudget{config.budgets.max_copies};
    options.ab_oracle_bits = config.budgets.ab_oracle_bits;
    options.ab_mc_samples = config.budgets.ab_mc_samples;
    options.seed = config.seed;
    json points = json::array();
    for (int n : config.n_grid) {
        const BoundReport bound = build_bound_report(n, config.p_at(n), config.pattern, options);
        if (!bound.budget_gaps.empty()) outcome.budget_gaps = true;
        points.push_back(json::parse(bound_report_to_json(bound)));
    }
    report["points"] = std::move(points);
    outcome.report = std::move(report);
    return outcome;
}

McRunResult run_mc(const ExperimentConfig& config, int threads) {
    McRunResult result;
    json report = report_envelope(config);
    report["pattern"] = pattern_summary(config);
    json rows = json::array();
    json gaps = json::array();
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
        const int n = config.n_grid[i];
        const double p = config.p_at(n);
        const std::uint64_t point_seed =
            config.seed ^ fnv1a64("point/" + std::to_string(i));
        try {
            const SampleBatch batch = sample_w(n, p, config.pattern, config.m, point_seed,
                                               threads);
            const KolmogorovEstimate estimate = kolmogorov_estimate(batch.values);
            const ModelStats stats = model_stats(n, p, config.pattern);
            RatePoint point;
            point.n = n;
            point.p = p;
            point.pattern = config.pattern.label();
            point.m = config.m;
            point.seed = point_seed;
            point.d_hat = estimate.d_hat;
            point.dkw_eps = estimate.dkw_eps;
            point.sigma = stats.sigma;
            point.psi = stats.psi_value;
            point.rate_dense = rate_dense(n, p);
            point.rate_sparse = rate_sparse(stats);
            result.points.push_back(point);
            json row;
            row["n"] = point.n;
            row["p"] = point.p;
            row["pattern"] = point.pattern;
            row["m"] = point.m;
            row["seed"] = point.seed;
            row["d_hat"] = point.d_hat;
            row["dkw_eps"] = point.dkw_eps;
            row["sigma"] = point.sigma;
            row["psi"] = point.psi;
            row["rate_dense"] = point.rate_dense;
            row["rate_sparse"] = point.rate_sparse;
            rows.push_back(std::move(row));
        } catch (const BudgetError& error) {
            gaps.push_back(json{{"n", n}, {"message", error.what()}});
            result.budget_gaps = true;
        }
    }
    report["points"] = std::move(rows);
    report["budget_gaps"] = std::move(gaps);
    result.report = std::move(report);
    result.csv = rate_points_csv(result.points, report_envelope(config));
    return result;
}

std::string rate_points_csv(const std::vector<RatePoint>& points, const json& envelope) {
    std::ostringstream csv;
    csv << "# schema " << kConfigSchema << "\n";
    csv << "# version " << kVersion << "\n";
    csv << "# generator " << kGeneratorName << "\n";
    if (envelope.contains("config_hash")) {
        csv << "# config_hash " << envelope.at("config_hash").get<std::string>() << "\n";
    }
    if (envelope.contains("seed")) {
        csv << "# seed " << envelope.at("seed").get<std::uint64_t>() << "\n";
    }
    csv << "n,p,pattern,m,seed,d_hat,dkw_eps,sigma,psi,rate_dense,rate_sparse\n";
    for (const RatePoint& point : points) {
        csv << point.n << ',' << format_double(point.p) << ',' << point.pattern << ','
            << point.m << ',' << point.seed << ',' << format_double(point.d_hat) << ','
            << format_double(point.dkw_eps) << ',' << format_double(point.sigma) << ','
            << format_double(point.psi) << ',' << format_double(point.rate_dense) << ','
            << format_double(point.rate_sparse) << '\n';
    }
    return csv.str();
}

RunOutcome run_rate_fit(const ExperimentConfig& config, int threads) {
    RunOutcome outcome;
    McRunResult mc = run_mc(config, threads);
    outcome.budget_gaps = mc.budget_gaps;
    json report = report_envelope(config);
    report["pattern"] = pattern_summary(config);
    report["points"] = mc.report.at("points");
    report["budget_gaps"] = mc.report.at("budget_gaps");
    const auto fit_to_json = [&](RatePredictor predictor) -> json {
        try {
            const RateFit fit = rate_fit(mc.points, predictor);
            json j;
            j["slope"] = fit.slope;
            j["intercept"] = fit.intercept;
            j["r_squared"] = fit.r_squared;
            j["slope_stderr"] = fit.slope_stderr;
            j["used_n"] = fit.used_n;
            j["dropped_n"] = fit.dropped_n;
            if (!fit.dropped_n.empty()) {
                j["warning"] = "points at or below the DKW noise floor were dropped";
            }
            return j;
        } catch (const InsufficientDataError& error) {
            outcome.budget_gaps = true;
            return json{{"error", error.what()}};
        } catch (const ConfigError& error) {
            outcome.budget_gaps = true;
            return json{{"error", error.what()}};
        }
    };
    report["fit_dense"] = fit_to_json(RatePredictor::kInvNSqrt1mp);
    report["fit_sparse"] = fit_to_json(RatePredictor::kInvSqrtPsi);
    outcome.report = std::move(report);
    return outcome;
}

}  // namespace subclt

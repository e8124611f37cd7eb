#include "subclt/rate_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <json.hpp>

#include "subclt/bkr.hpp"
#include "subclt/errors.hpp"
#include "subclt/exhaustive.hpp"
#include "subclt/summation.hpp"

namespace subclt {

namespace {

double closed_degree(const ModelStats& stats) { return stats.degree_closed; }

}  // namespace

double sum_abs_x(const ModelStats& stats) {
    const double q = std::pow(stats.p, stats.pattern.edge_count());
    return stats.copy_count * 2.0 * q * (1.0 - q) / stats.sigma;
}

double ht_mean_degree_bound(const ModelStats& stats) {
    const double d = closed_degree(stats);
    return 9.0 * d * d / (2.0 * stats.variance) * sum_abs_x(stats);
}

double ht_mean_chain_bound(const ModelStats& stats, double triple) {
    return 36.0 / (stats.variance * stats.sigma) * triple;
}

double covariance_degree_bound(const ModelStats& stats) {
    const double d = closed_degree(stats);
    return 20.0 * std::pow(d, 2.5) / std::pow(stats.sigma, 2.5) * std::sqrt(sum_abs_x(stats));
}

double covariance_chain_bound(const ModelStats& stats, double chain6) {
    return 113.0 / (stats.variance * stats.sigma) * std::sqrt(chain6);
}

PsiFormBounds psi_form_bounds(const ModelStats& stats) {
    PsiFormBounds bounds;
    const double n_pow_v = std::pow(static_cast<double>(stats.n), stats.pattern.vertex_count());
    const double psi_g = n_pow_v * std::pow(stats.p, stats.pattern.edge_count());
    bounds.end1 = 2.0 / stats.sigma * n_pow_v * stats.pattern.edge_count() * (1.0 - stats.p);
    KahanSum inverse;
    for (double psi_h : stats.psi_all.per_class) inverse.add(1.0 / psi_h);
    bounds.psi_inverse_sum = inverse.value();
    const double s2 = bounds.psi_inverse_sum * bounds.psi_inverse_sum;
    bounds.end2_shape = psi_g * psi_g * psi_g * s2;
    bounds.end3_shape = bounds.end2_shape * bounds.end2_shape * bounds.psi_inverse_sum;
    return bounds;
}

FittedChainConstants fit_chain_constants(const PatternGraph& pattern, double p,
                                         const std::vector<int>& n_grid,
                                         const ChainBudgets& budgets) {
    const PatternGraph stripped = pattern.without_isolated_vertices();
    std::vector<int> grid = n_grid;
    if (grid.empty()) {
        for (int n = stripped.vertex_count(); n < stripped.vertex_count() + 4; ++n) {
            grid.push_back(n);
        }
    }
    FittedChainConstants fitted;
    for (int n : grid) {
        try {
            CopyIndex index = enumerate_copies(n, stripped);
            ChainSums sums = chain_sums(index, p, budgets);
            ModelStats stats = model_stats(n, p, stripped);
            PsiFormBounds shapes = psi_form_bounds(stats);
            fitted.c_triple = std::max(fitted.c_triple, sums.triple / shapes.end2_shape);
            fitted.c_chain6 = std::max(fitted.c_chain6, sums.chain6 / shapes.end3_shape);
            fitted.n_grid.push_back(n);
        } catch (const BudgetError&) {
            continue;  // that n is too big to fit on; smaller ones may do
        } catch (const SizeError&) {
            continue;
        }
    }
    if (fitted.n_grid.empty()) {
        throw BudgetError("fit_chain_constants: no grid point fits within the chain budgets");
    }
    return fitted;
}

RatePrediction predicted_rate(const ModelStats& stats, double p0) {
    if (!(p0 > 0.0) || !(p0 < 1.0)) {
        throw ConfigError("predicted_rate: p0 must lie strictly between 0 and 1");
    }
    RatePrediction prediction;
    if (stats.p > p0) {
        prediction.regime = RateRegime::kDense;
        prediction.rate = rate_dense(stats.n, stats.p);
    } else {
        prediction.regime = RateRegime::kSparse;
        prediction.rate = rate_sparse(stats);
    }
    return prediction;
}

double rate_dense(int n, double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw DegenerateError("rate_dense: p must lie strictly between 0 and 1");
    }
    return 1.0 / (static_cast<double>(n) * std::sqrt(1.0 - p));
}

double rate_sparse(const ModelStats& stats) {
    return 1.0 / std::sqrt(stats.psi_value);
}

double variance_shape_ratio(const ModelStats& stats) {
    const double psi_g = std::pow(static_cast<double>(stats.n), stats.pattern.vertex_count()) *
                         std::pow(stats.p, stats.pattern.edge_count());
    return stats.variance * stats.psi_value / ((1.0 - stats.p) * psi_g * psi_g);
}

std::vector<double> variance_shape_ratios(const PatternGraph& pattern, const std::vector<int>& ns,
                                          double p) {
    std::vector<double> ratios;
    ratios.reserve(ns.size());
    for (int n : ns) ratios.push_back(variance_shape_ratio(model_stats(n, p, pattern)));
    return ratios;
}

namespace {

using nlohmann::json;

void put_optional(json& j, const char* key, const std::optional<double>& value) {
    if (value) {
        j[key] = *value;
    } else {
        j[key] = nullptr;
    }
}

std::optional<double> get_optional(const json& j, const char* key) {
    const auto& field = j.at(key);
    if (field.is_null()) return std::nullopt;
    return field.get<double>();
}

}  // namespace

std::string bound_report_to_json(const BoundReport& report) {
    json j;
    j["n"] = report.n;
    j["p"] = report.p;
    j["pattern"] = report.pattern;
    j["sigma"] = report.sigma;
    j["psi"] = report.psi;
    j["degree_open"] = report.degree_open;
    put_optional(j, "a", report.a);
    put_optional(j, "b_grid_max", report.b_grid_max);
    put_optional(j, "b_majorant", report.b_majorant);
    put_optional(j, "epsilon", report.epsilon);
    j["ab_method"] = report.ab_method;
    j["lemma_mean_degree"] = report.lemma_mean_degree;
    put_optional(j, "lemma_mean_chain", report.lemma_mean_chain);
    j["lemma_cov_degree"] = report.lemma_cov_degree;
    put_optional(j, "lemma_cov_chain", report.lemma_cov_chain);
    j["chain_fitted_fallback"] = report.chain_fitted_fallback;
    put_optional(j, "fitted_c_triple", report.fitted_c_triple);
    put_optional(j, "fitted_c_chain6", report.fitted_c_chain6);
    j["end1"] = report.end1;
    j["end2_shape"] = report.end2_shape;
    j["end3_shape"] = report.end3_shape;
    j["rate_dense"] = report.rate_dense;
    j["rate_sparse"] = report.rate_sparse;
    j["regime"] = report.regime;
    put_optional(j, "d_hat", report.d_hat);
    put_optional(j, "dkw_eps", report.dkw_eps);
    j["budget_gaps"] = report.budget_gaps;
    return j.dump();
}

BoundReport bound_report_from_json(const std::string& text) {
    json j = json::parse(text);
    BoundReport report;
    report.n = j.at("n").get<int>();
    report.p = j.at("p").get<double>();
    report.pattern = j.at("pattern").get<std::string>();
    report.sigma = j.at("sigma").get<double>();
    report.psi = j.at("psi").get<double>();
    report.degree_open = j.at("degree_open").get<int>();
    report.a = get_optional(j, "a");
    report.b_grid_max = get_optional(j, "b_grid_max");
    report.b_majorant = get_optional(j, "b_majorant");
    report.epsilon = get_optional(j, "epsilon");
    report.ab_method = j.at("ab_method").get<std::string>();
    report.lemma_mean_degree = j.at("lemma_mean_degree").get<double>();
    report.lemma_mean_chain = get_optional(j, "lemma_mean_chain");
    report.lemma_cov_degree = j.at("lemma_cov_degree").get<double>();
    report.lemma_cov_chain = get_optional(j, "lemma_cov_chain");
    report.chain_fitted_fallback = j.at("chain_fitted_fallback").get<bool>();
    report.fitted_c_triple = get_optional(j, "fitted_c_triple");
    report.fitted_c_chain6 = get_optional(j, "fitted_c_chain6");
    report.end1 = j.at("end1").get<double>();
    report.end2_shape = j.at("end2_shape").get<double>();
    report.end3_shape = j.at("end3_shape").get<double>();
    report.rate_dense = j.at("rate_dense").get<double>();
    report.rate_sparse = j.at("rate_sparse").get<double>();
    report.regime = j.at("regime").get<std::string>();
    report.d_hat = get_optional(j, "d_hat");
    report.dkw_eps = get_optional(j, "dkw_eps");
    report.budget_gaps = j.at("budget_gaps").get<std::vector<std::string>>();
    return report;
}

BoundReport build_bound_report(int n, double p, const PatternGraph& pattern,
                               const BoundReportOptions& options) {
    ModelStats stats = model_stats(n, p, pattern);
    BoundReport report;
    report.n = n;
    report.p = p;
    report.pattern = stats.pattern_label;
    report.sigma = stats.sigma;
    report.psi = stats.psi_value;
    report.degree_open = static_cast<int>(stats.degree_open);
    report.lemma_mean_degree = ht_mean_degree_bound(stats);
    report.lemma_cov_degree = covariance_degree_bound(stats);
    const PsiFormBounds shapes = psi_form_bounds(stats);
    report.end1 = shapes.end1;
    report.end2_shape = shapes.end2_shape;
    report.end3_shape = shapes.end3_shape;
    report.rate_dense = rate_dense(n, p);
    report.rate_sparse = rate_sparse(stats);
    report.regime =
        predicted_rate(stats, options.p0).regime == RateRegime::kDense ? "dense" : "sparse";

    // Chain routes: exact sums when they fit, fitted psi-shapes otherwise.
    std::optional<CopyIndex> index;
    try {
        index.emplace(enumerate_copies(n, stats.pattern, options.copy_budget));
    } catch (const BudgetError& error) {
        report.budget_gaps.push_back(std::string("copy-index: ") + error.what());
    }
    if (index) {
        try {
            report.lemma_mean_chain =
                ht_mean_chain_bound(stats, triple_sum(*index, p, options.chain_budgets));
        } catch (const BudgetError& error) {
            report.budget_gaps.push_back(std::string("triple-sum: ") + error.what());
        } catch (const SizeError& error) {
            report.budget_gaps.push_back(std::string("triple-sum: ") + error.what());
        }
        try {
            report.lemma_cov_chain =
                covariance_chain_bound(stats, chain6_sum(*index, p, options.chain_budgets));
        } catch (const BudgetError& error) {
            report.budget_gaps.push_back(std::string("chain6-sum: ") + error.what());
        } catch (const SizeError& error) {
            report.budget_gaps.push_back(std::string("chain6-sum: ") + error.what());
        }
    }
    if (!report.lemma_mean_chain || !report.lemma_cov_chain) {
        try {
            FittedChainConstants fitted =
                fit_chain_constants(stats.pattern, p, options.fit_n_grid, options.chain_budgets);
            report.chain_fitted_fallback = true;
            report.fitted_c_triple = fitted.c_triple;
            report.fitted_c_chain6 = fitted.c_chain6;
            if (!report.lemma_mean_chain) {
                report.lemma_mean_chain =
                    ht_mean_chain_bound(stats, fitted.c_triple * shapes.end2_shape);
            }
            if (!report.lemma_cov_chain) {
                report.lemma_cov_chain =
                    covariance_chain_bound(stats, fitted.c_chain6 * shapes.end3_shape);
            }
        } catch (const BudgetError& error) {
            report.budget_gaps.push_back(std::string("fitted-chain: ") + error.what());
        }
    }

    // A/B/epsilon: exact at oracle scale, Monte Carlo when configured.
    const int bits = n * (n - 1) / 2;
    if (bits <= options.ab_oracle_bits) {
        ExactModel model(n, p, stats.pattern);
        Decomposition decomposition(model.index(), p);
        AbEstimate estimate = estimate_ab_oracle(model, decomposition);
        report.a = estimate.a;
        report.b_grid_max = estimate.b_grid_max;
        report.b_majorant = estimate.b_majorant;
        report.epsilon = estimate.epsilon;
        report.ab_method = estimate.method;
    } else if (options.ab_mc_samples > 0 && index) {
        try {
            Decomposition decomposition(*index, p);
            AbEstimate estimate =
                estimate_ab_mc(decomposition, options.ab_mc_samples, options.seed);
            report.a = estimate.a;
            report.b_grid_max = estimate.b_grid_max;
            report.b_majorant = estimate.b_majorant;
            report.epsilon = estimate.epsilon;
            report.ab_method = estimate.method;
        } catch (const BudgetError& error) {
            report.budget_gaps.push_back(std::string("ab-mc: ") + error.what());
        }
    } else {
        report.budget_gaps.push_back(
            "ab: skipped (beyond exact-enumeration scale and no Monte Carlo sample "
            "count configured)");
    }
    return report;
}

}  // namespace subclt

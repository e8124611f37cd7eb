#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subclt/copies.hpp"

namespace subclt {

/// sum_j E[|X_j|] = |J| * 2 q (1 - q) / sigma with q = p^e: the exact mean
/// absolute deviation of a Bernoulli(q) indicator, summed and normalized.
double sum_abs_x(const ModelStats& stats);

/// Bounds on |E[H_t]|, uniform in t. D is the closed dependency degree (a
/// copy counts as its own neighbor, as in the dependency sums).
/// Degree route: 9 D^2 / (2 sigma^2) * sum_j E|X_j|.
double ht_mean_degree_bound(const ModelStats& stats);
/// Chain route: 36 / sigma^3 * triple_sum (pass the exact triple sum).
double ht_mean_chain_bound(const ModelStats& stats, double triple);

/// Bounds on |Cov(H_t, e^{-itW})|, uniform in t.
/// Degree route: 20 D^{5/2} / sigma^{5/2} * (sum_j E|X_j|)^{1/2}.
double covariance_degree_bound(const ModelStats& stats);
/// Chain route: 113 / sigma^3 * chain6_sum^{1/2}.
double covariance_chain_bound(const ModelStats& stats, double chain6);

/**
 * The closed-form end bounds:
 *   end1       >= sum_j E|X_j|   exactly: (2/sigma) n^v e (1 - p)
 *   end2_shape:  psi_G^3 (sum_h psi_h^{-1})^2, the triple-sum shape
 *   end3_shape:  psi_G^6 (sum_h psi_h^{-1})^5, the 6-chain shape
 * The shapes carry no leading constant: the true bounds are C * shape for a
 * pattern-dependent C the source results leave unspecified; companion fitted
 * constants come from fit_chain_constants and are never claimed as exact.
 * The sum over h runs over the isomorphism classes of edge subgraphs, each
 * class counted once.
 */
struct PsiFormBounds {
    double end1 = 0.0;
    double end2_shape = 0.0;
    double end3_shape = 0.0;
    double psi_inverse_sum = 0.0;  // sum_h psi_h^{-1}
};
PsiFormBounds psi_form_bounds(const ModelStats& stats);

/// Fitted leading constants: the max over an exact small-n sweep of
/// triple_sum / end2_shape and chain6_sum / end3_shape at the given p.
/// Reported as "fitted" diagnostics only.
struct FittedChainConstants {
    double c_triple = 0.0;
    double c_chain6 = 0.0;
    std::vector<int> n_grid;
};
FittedChainConstants fit_chain_constants(const PatternGraph& pattern, double p,
                                         const std::vector<int>& n_grid = {},
                                         const ChainBudgets& budgets = {});

/// The predicted Kolmogorov rate: 1/(n sqrt(1-p)) in the dense regime
/// (p > p0), psi^{-1/2} in the sparse one (p <= p0).
enum class RateRegime { kDense, kSparse };
struct RatePrediction {
    double rate = 0.0;
    RateRegime regime = RateRegime::kDense;
};
RatePrediction predicted_rate(const ModelStats& stats, double p0 = 0.5);

/// Both regime formulas regardless of p0, for reporting.
double rate_dense(int n, double p);
double rate_sparse(const ModelStats& stats);

/// sigma^2 * psi / ((1-p) * psi_G^2): the variance lower-bound shape. Staying
/// bounded away from 0 over n is what the variance bound asserts (up to the
/// unspecified constant).
double variance_shape_ratio(const ModelStats& stats);
std::vector<double> variance_shape_ratios(const PatternGraph& pattern, const std::vector<int>& ns,
                                          double p);

/**
 * Everything the `bounds` subcommand reports for one (n, p, pattern).
 * Optional fields are absent when the quantity was skipped (budget, or A/B
 * not requested at this scale); every skip is listed in budget_gaps.
 * degree_open is max_j |neighbors(j)| with the copy itself excluded; the
 * formulas above use degree_open + 1.
 */
struct BoundReport {
    int n = 0;
    double p = 0.0;
    std::string pattern;
    double sigma = 0.0;
    double psi = 0.0;
    int degree_open = 0;
    std::optional<double> a;
    std::optional<double> b_grid_max;
    std::optional<double> b_majorant;
    std::optional<double> epsilon;
    std::string ab_method;  // empty when A/B absent
    double lemma_mean_degree = 0.0;              // ht_mean_degree_bound
    std::optional<double> lemma_mean_chain;      // exact chain route
    double lemma_cov_degree = 0.0;               // covariance_degree_bound
    std::optional<double> lemma_cov_chain;       // exact chain route
    bool chain_fitted_fallback = false;          // chain routes via fitted shapes
    std::optional<double> fitted_c_triple;
    std::optional<double> fitted_c_chain6;
    double end1 = 0.0;
    double end2_shape = 0.0;
    double end3_shape = 0.0;
    double rate_dense = 0.0;
    double rate_sparse = 0.0;
    std::string regime;  // "dense" or "sparse"
    std::optional<double> d_hat;    // filled by the experiment layer when MC runs
    std::optional<double> dkw_eps;
    std::vector<std::string> budget_gaps;
};

/// JSON round-trip; serialization is byte-stable (sorted keys, shortest
/// exact double representation).
std::string bound_report_to_json(const BoundReport& report);
BoundReport bound_report_from_json(const std::string& text);

struct BoundReportOptions {
    double p0 = 0.5;
    ChainBudgets chain_budgets;
    CopyBudget copy_budget;
    /// A/B/epsilon policy: exact enumeration when C(n,2) <= ab_oracle_bits;
    /// otherwise Monte Carlo with ab_mc_samples draws if positive, else
    /// skipped (recorded as a gap).
    int ab_oracle_bits = 15;
    std::uint64_t ab_mc_samples = 0;
    std::uint64_t seed = 0;
    /// Small-n grid for the fitted fallback constants (empty = default).
    std::vector<int> fit_n_grid;
};

/// Assemble the full report. Budget overruns downgrade the affected fields
/// and are recorded, they never abort the report.
BoundReport build_bound_report(int n, double p, const PatternGraph& pattern,
                               const BoundReportOptions& options = {});

}  // namespace subclt

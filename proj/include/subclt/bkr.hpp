#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subclt/copies.hpp"
#include "subclt/exhaustive.hpp"

namespace subclt {

/// R_l(z) = sum_{m >= 0} (iz)^m / ((m+l)!) for l in {1, 2, 3}: the Taylor
/// remainder kernels of e^{iz}. Closed forms for |z| >= 0.5, truncated series
/// (remainder < 1e-15) below. ||R_l||_inf = R_l(0) = 1/l!.
std::complex<double> taylor_remainder(double z, int l);

struct DecompositionBudget {
    /// Cap on stored dependency pairs (sum over j of |N_j^+|).
    std::uint64_t max_pairs = 2'000'000;
};

/**
 * The dependency decomposition of W = sum_j X_j over one copy index at a
 * fixed p.
 *
 * A copy is dependent on itself, so all dependency sums here run over the
 * closed lists N_j^+ = neighbors(j) + {j}. Per pair (j, k in N_j^+) the
 * exact product moment E[X_j X_k] = sigma^{-2}(p^{|j u k|} - p^{2e}) and the
 * intersection N_j^+ n N_k^+ are precomputed, so realizing one configuration
 * and evaluating H_t needs only counts of realized copies:
 *
 *   Z_j        = sum_{k in N_j^+} X_k
 *   V_jk       = sum_{l in N_k^+ \ N_j^+} X_l
 *   Z_j + V_jk = sum_{l in N_j^+ u N_k^+} X_l
 *   W_j = W - Z_j,  W_jk = W_j - V_jk
 */
class Decomposition {
public:
    /// Keeps a reference to the index; the index must outlive this object.
    Decomposition(const CopyIndex& index, double p, const DecompositionBudget& budget = {});

    const CopyIndex& index() const { return *index_; }
    double p() const { return p_; }
    double q() const { return q_; }          // E Y_j = p^e
    double sigma() const { return sigma_; }  // exact, pair formula
    double mean() const { return mean_; }    // E S
    std::size_t copy_count() const { return closed_offsets_.size() - 1; }

    std::span<const std::int32_t> closed(std::size_t j) const {
        return {closed_items_.data() + closed_offsets_[j],
                closed_offsets_[j + 1] - closed_offsets_[j]};
    }

    struct Pair {
        std::int32_t j = 0;
        std::int32_t k = 0;
        double e_xjxk = 0.0;                // E[X_j X_k]
        std::uint32_t inter_offset = 0;     // into intersection items
        std::uint32_t inter_size = 0;       // |N_j^+ n N_k^+|
    };
    const std::vector<Pair>& pairs() const { return pairs_; }
    std::span<const std::int32_t> intersection(const Pair& pair) const {
        return {inter_items_.data() + pair.inter_offset, pair.inter_size};
    }

    /// All values of one realized configuration that the evaluators need.
    struct Realization {
        double w = 0.0;
        std::vector<std::uint8_t> active;  // Y_j
        std::vector<double> x;             // X_j
        std::vector<double> z;             // Z_j
        std::vector<std::int32_t> closed_active;  // sum of Y_k over N_j^+
    };
    void realize(const EdgeConfiguration& config, Realization& out) const;

    double z_plus_v(const Realization& r, const Pair& pair) const;
    double v_jk(const Realization& r, const Pair& pair) const {
        return z_plus_v(r, pair) - r.z[static_cast<std::size_t>(pair.j)];
    }

    /// H_t of the realized configuration:
    /// i sum_j X_j Z_j^2 R_2(-t Z_j)
    ///   - i sum_j sum_{k in N_j^+} (X_j X_k - E[X_j X_k]) (Z_j+V_jk) R_1(-t (Z_j+V_jk)).
    std::complex<double> h_t(const Realization& r, double t) const;

    /// Pointwise residual of the cubic identity
    /// 1/2 W^3 - W = i H_0 + 1/2 sum_j X_j W_j^2
    ///               + sum_j sum_{k in N_j^+} (X_j X_k - E[X_j X_k]) W_jk.
    double w3_residual(const Realization& r) const;

private:
    const CopyIndex* index_;
    double p_;
    double q_;
    double mean_;
    double sigma_ = 0.0;
    std::vector<std::size_t> closed_offsets_;
    std::vector<std::int32_t> closed_items_;
    std::vector<Pair> pairs_;
    std::vector<std::int32_t> inter_items_;
};

/// Exact E[H_t], Cov(H_t, e^{-itW}) and both sides of the characteristic
/// equation at one t, by exhaustive enumeration.
struct HtMoments {
    double t = 0.0;
    std::complex<double> mean_ht;
    std::complex<double> cov_ht;   // Cov(H_t, e^{-itW}) = E[H_t e^{itW}] - E[H_t] phi(t)
    std::complex<double> lhs;      // E[(iW + t) e^{itW}]
    std::complex<double> rhs;      // t^2 E[H_t e^{itW}]
    double identity_residual = 0.0;
};

/// The model and decomposition must be built over the same copy index.
HtMoments ht_moments(const ExactModel& model, const Decomposition& decomposition, double t);

/// |E[(iW+t) e^{itW}] - t^2 E[H_t e^{itW}]|; expected <= 1e-9.
double verify_ht_identity(const ExactModel& model, const Decomposition& decomposition, double t);

/**
 * The plug-in quantities:
 *   A     = 1/2 sum_j E[|X_j| Z_j^2]
 *           + sum_pairs ( E[|X_j X_k (Z_j+V_jk)|] + E[|X_j X_k|] E[|Z_j+V_jk|] )
 *   B(t)  = sqrt Var(sum_j X_j Z_j^2 R_2(-tZ_j))
 *           + sqrt Var(sum_pairs X_j X_k (Z_j+V_jk) R_1(-t(Z_j+V_jk)))
 *           + sqrt Var(sum_pairs E[X_j X_k] (Z_j+V_jk) R_1(-t(Z_j+V_jk)))
 * reported as the max over a symmetric t-grid, plus the t-free variant with
 * R_l replaced by its sup 1/l! (a heuristic majorant, not a proven variance
 * bound, and flagged as such), plus the classical
 *   epsilon = 1/2 sum_j E[|X_j| Z_j^2]
 *           + sum_pairs ( E[|X_j X_k V_jk|] + E[|X_j X_k|] E[|Z_j+V_jk|] ).
 * Variances of the complex sums are E|U|^2 - |EU|^2.
 */
struct AbEstimate {
    double a = 0.0;
    double b_grid_max = 0.0;
    double b_majorant = 0.0;
    double epsilon = 0.0;
    std::vector<double> t_grid;
    std::vector<double> b_at_t;
    std::string method;  // "exact-oracle" or "mc(m=...)"
    bool majorant_is_heuristic = true;
    // Monte Carlo standard errors (16 batch means); zero for the oracle path.
    double a_se = 0.0;
    double b_se = 0.0;
    double epsilon_se = 0.0;
};

/// Symmetric default grid {0, +-step, ..., +-1/(2A)}: step 0.25 widened so
/// the grid never exceeds 65 points; the validity edge 1/(2A) is always
/// included.
std::vector<double> default_t_grid(double a);

/// Exact A/B/epsilon over all configurations. Empty grid = default grid from
/// the exact A (computed in a first pass).
AbEstimate estimate_ab_oracle(const ExactModel& model, const Decomposition& decomposition,
                              const std::vector<double>& t_grid = {});

/// Monte Carlo A/B/epsilon: m sampled configurations on the (seed, replicate)
/// streams, 16 batch means for standard errors. Replays the same replicate
/// streams for the B pass, so the default grid can come from the
/// first-pass A.
AbEstimate estimate_ab_mc(const Decomposition& decomposition, std::uint64_t m, std::uint64_t seed,
                          const std::vector<double>& t_grid = {});

double epsilon_bkr_oracle(const ExactModel& model, const Decomposition& decomposition);
double epsilon_bkr_mc(const Decomposition& decomposition, std::uint64_t m, std::uint64_t seed);

}  // namespace subclt

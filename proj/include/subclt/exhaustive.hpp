#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include "subclt/copies.hpp"
#include "subclt/errors.hpp"
#include "subclt/stein.hpp"
#include "subclt/summation.hpp"

namespace subclt {

/**
 * A model small enough that all 2^{C(n,2)} edge configurations can be
 * enumerated, giving exact expectations of arbitrary functionals, the exact
 * law and characteristic function of W, and exact verification of every
 * identity the larger machinery relies on.
 *
 * Mean and variance of S come from the pair formula over the materialized
 * copy index (independent of both the enumeration and the gluing table, so
 * each can serve as the others' oracle). p = 0 and p = 1 are representable —
 * the model is then flagged degenerate and the W-level quantities refuse.
 */
class ExactModel {
public:
    static constexpr int kDefaultEdgeBits = 22;

    ExactModel(int n, double p, const PatternGraph& pattern, int max_edge_bits = kDefaultEdgeBits);

    int n() const { return n_; }
    double p() const { return p_; }
    const CopyIndex& index() const { return index_; }
    const EdgeUniverse& universe() const { return index_.universe(); }
    int edge_bits() const { return index_.universe().edge_count(); }

    double mean() const { return mean_; }          // E S
    double variance() const { return variance_; }  // Var S, pair formula
    double sigma() const { return sigma_; }
    bool degenerate() const { return !(variance_ > 0.0); }
    /// Throws a degenerate error unless sigma > 0.
    void require_nondegenerate() const;

    /// weight_table()[k] = p^k (1-p)^{E-k}, the probability of any fixed
    /// configuration with k present edges.
    const std::vector<double>& weight_table() const { return weights_; }

private:
    int n_;
    double p_;
    CopyIndex index_;
    double mean_ = 0.0;
    double variance_ = 0.0;
    double sigma_ = 0.0;
    std::vector<double> weights_;
};

/**
 * Visit every edge configuration exactly once, in Gray-code order, with its
 * probability weight and its realized copy count S. Per step exactly one edge
 * flips and only the copies through that edge are touched, so a full sweep
 * costs O(2^E * average copies per edge). The visitor must not retain the
 * configuration reference. Sequential and deterministic.
 *
 * Visitor signature: void(const EdgeConfiguration&, double weight, int copies_present)
 */
template <typename Visitor>
void sweep_configurations(const ExactModel& model, Visitor&& visit) {
    const CopyIndex& index = model.index();
    const int bits = model.edge_bits();
    const auto& weights = model.weight_table();
    EdgeConfiguration config(model.universe());
    std::vector<int> missing(index.copy_count(), index.edges_per_copy());
    int present = 0;
    int active = 0;
    visit(static_cast<const EdgeConfiguration&>(config), weights[0], active);
    const std::uint64_t total = std::uint64_t{1} << bits;
    for (std::uint64_t step = 1; step < total; ++step) {
        const int bit = std::countr_zero(step);
        if (config.test(bit)) {
            config.reset(bit);
            --present;
            for (std::int32_t j : index.edge_to_copies()[static_cast<std::size_t>(bit)]) {
                if (missing[static_cast<std::size_t>(j)]++ == 0) --active;
            }
        } else {
            config.set(bit);
            ++present;
            for (std::int32_t j : index.edge_to_copies()[static_cast<std::size_t>(bit)]) {
                if (--missing[static_cast<std::size_t>(j)] == 0) ++active;
            }
        }
        visit(static_cast<const EdgeConfiguration&>(config),
              weights[static_cast<std::size_t>(present)], active);
    }
}

/// E[f(configuration, S)] by exhaustive enumeration, compensated summation.
/// Requires p strictly inside (0,1).
template <typename F>
std::complex<double> exact_functional(const ExactModel& model, F&& f) {
    if (!(model.p() > 0.0) || !(model.p() < 1.0)) {
        throw DegenerateError("exact_functional: p must lie strictly between 0 and 1");
    }
    KahanComplexSum acc;
    sweep_configurations(model, [&](const EdgeConfiguration& config, double weight, int s) {
        acc.add(weight * std::complex<double>(f(config, s)));
    });
    return acc.value();
}

/// Mean and variance of S computed two independent ways.
struct ExactMoments {
    double mean_enumeration = 0.0;
    double variance_enumeration = 0.0;
    double mean_formula = 0.0;
    double variance_formula = 0.0;
    bool degenerate = false;
};

/// Both routes, asserted equal within 1e-10 (consistency error otherwise).
ExactMoments exact_moments(const ExactModel& model);

/// The exact discrete law of W = (S - E S)/sigma: atoms ascending with their
/// probabilities and the cumulative distribution, plus exact mean/variance
/// of W (0 and 1 up to roundoff).
struct ExactDistribution {
    std::vector<double> support;
    std::vector<double> probability;
    std::vector<double> cdf;
    double mean_w = 0.0;
    double variance_w = 0.0;
};

ExactDistribution exact_distribution(const ExactModel& model);

/// sup_x |F_W(x) - Phi(x)|, evaluated exactly: both one-sided gaps at every
/// atom, since F jumps there.
double kolmogorov_exact(const ExactDistribution& distribution);

/// E e^{itW} from the exact law.
std::complex<double> exact_cf(const ExactDistribution& distribution, double t);

/// The exact-oracle difference t -> phi_W(t) - e^{-t^2/2}.
CfDifference exact_cf_difference(const ExactModel& model);

}  // namespace subclt

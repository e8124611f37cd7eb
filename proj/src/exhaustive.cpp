#include "subclt/exhaustive.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace subclt {

namespace {

void validate_exact_inputs(int n, double p, int max_edge_bits) {
    if (p < 0.0 || p > 1.0) {
        throw ConfigError("ExactModel: p must lie in [0, 1]");
    }
    if (n >= 2 && n * (n - 1) / 2 > max_edge_bits) {
        throw SizeError("ExactModel: C(n,2) = " + std::to_string(n * (n - 1) / 2) +
                        " exceeds the exhaustive cap of " + std::to_string(max_edge_bits) +
                        " edge bits");
    }
}

}  // namespace

ExactModel::ExactModel(int n, double p, const PatternGraph& pattern, int max_edge_bits)
    : n_(n),
      p_(p),
      index_((validate_exact_inputs(n, p, max_edge_bits), enumerate_copies(n, pattern))) {
    const int bits = index_.universe().edge_count();
    const int e = index_.edges_per_copy();
    const double q = std::pow(p, e);
    mean_ = static_cast<double>(index_.copy_count()) * q;
    KahanSum variance;
    for (std::size_t j = 0; j < index_.copy_count(); ++j) {
        auto ej = index_.copy(j);
        for (std::int32_t k : index_.closed_neighbors(j)) {
            auto ek = index_.copy(static_cast<std::size_t>(k));
            // |edges(j) union edges(k)| via merge of the sorted id lists.
            std::size_t a = 0, b = 0, union_size = 0;
            while (a < ej.size() && b < ek.size()) {
                if (ej[a] < ek[b]) {
                    ++a;
                } else if (ej[a] > ek[b]) {
                    ++b;
                } else {
                    ++a;
                    ++b;
                }
                ++union_size;
            }
            union_size += (ej.size() - a) + (ek.size() - b);
            variance.add(std::pow(p, static_cast<double>(union_size)) - q * q);
        }
    }
    variance_ = variance.value();
    sigma_ = variance_ > 0.0 ? std::sqrt(variance_) : 0.0;

    weights_.resize(static_cast<std::size_t>(bits) + 1);
    for (int k = 0; k <= bits; ++k) {
        weights_[static_cast<std::size_t>(k)] = std::pow(p, k) * std::pow(1.0 - p, bits - k);
    }
}

void ExactModel::require_nondegenerate() const {
    if (degenerate()) {
        throw DegenerateError("model is degenerate (sigma = 0): p = " + std::to_string(p_));
    }
}

ExactMoments exact_moments(const ExactModel& model) {
    KahanSum first, second;
    sweep_configurations(model, [&](const EdgeConfiguration&, double weight, int s) {
        const double sd = static_cast<double>(s);
        first.add(weight * sd);
        second.add(weight * sd * sd);
    });
    ExactMoments result;
    result.mean_enumeration = first.value();
    result.variance_enumeration = second.value() - first.value() * first.value();
    result.mean_formula = model.mean();
    result.variance_formula = model.variance();
    result.degenerate = model.degenerate();
    if (std::abs(result.mean_enumeration - result.mean_formula) > 1e-10 ||
        std::abs(result.variance_enumeration - result.variance_formula) > 1e-10) {
        throw ConsistencyError(
            "exact_moments: enumeration and pair formula disagree: mean " +
            std::to_string(result.mean_enumeration) + " vs " + std::to_string(result.mean_formula) +
            ", variance " + std::to_string(result.variance_enumeration) + " vs " +
            std::to_string(result.variance_formula));
    }
    return result;
}

ExactDistribution exact_distribution(const ExactModel& model) {
    model.require_nondegenerate();
    std::vector<KahanSum> by_count(model.index().copy_count() + 1);
    sweep_configurations(model, [&](const EdgeConfiguration&, double weight, int s) {
        by_count[static_cast<std::size_t>(s)].add(weight);
    });

    ExactDistribution distribution;
    const double mean = model.mean();
    const double sigma = model.sigma();
    KahanSum cumulative, mean_w, second_w;
    for (std::size_t s = 0; s < by_count.size(); ++s) {
        const double probability = by_count[s].value();
        if (probability == 0.0) continue;
        const double atom = (static_cast<double>(s) - mean) / sigma;
        distribution.support.push_back(atom);
        distribution.probability.push_back(probability);
        cumulative.add(probability);
        distribution.cdf.push_back(cumulative.value());
        mean_w.add(probability * atom);
        second_w.add(probability * atom * atom);
    }
    distribution.mean_w = mean_w.value();
    distribution.variance_w = second_w.value() - distribution.mean_w * distribution.mean_w;
    return distribution;
}

double kolmogorov_exact(const ExactDistribution& distribution) {
    double sup = 0.0;
    double below = 0.0;  // F(w-)
    for (std::size_t i = 0; i < distribution.support.size(); ++i) {
        const double phi = std_normal(distribution.support[i]).cdf;
        sup = std::max(sup, std::abs(distribution.cdf[i] - phi));
        sup = std::max(sup, std::abs(below - phi));
        below = distribution.cdf[i];
    }
    return sup;
}

std::complex<double> exact_cf(const ExactDistribution& distribution, double t) {
    KahanComplexSum acc;
    for (std::size_t i = 0; i < distribution.support.size(); ++i) {
        const double phase = t * distribution.support[i];
        acc.add(distribution.probability[i] *
                std::complex<double>(std::cos(phase), std::sin(phase)));
    }
    return acc.value();
}

CfDifference exact_cf_difference(const ExactModel& model) {
    auto distribution = std::make_shared<ExactDistribution>(exact_distribution(model));
    CfDifference difference;
    difference.source = "exact-oracle";
    difference.eval = [distribution](double t) {
        return exact_cf(*distribution, t) - std::complex<double>(std::exp(-0.5 * t * t), 0.0);
    };
    return difference;
}

}  // namespace subclt

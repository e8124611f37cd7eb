#include "subclt/bkr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "subclt/sampling.hpp"
#include "subclt/summation.hpp"

namespace subclt {

namespace {

constexpr std::complex<double> kImaginary{0.0, 1.0};

std::complex<double> expi(double phase) { return {std::cos(phase), std::sin(phase)}; }

void check_same_index(const ExactModel& model, const Decomposition& decomposition) {
    if (&model.index() != &decomposition.index()) {
        throw ConfigError("the model and the decomposition must share one copy index");
    }
}

void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) {
        throw ConfigError("t grid must be nonempty");
    }
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (std::abs(sorted[i] + sorted[sorted.size() - 1 - i]) > 1e-12) {
            throw ConfigError("t grid must be symmetric about 0");
        }
    }
}

double sqrt_clamped(double variance) { return std::sqrt(std::max(variance, 0.0)); }

}  // namespace

std::complex<double> taylor_remainder(double z, int l) {
    if (l < 1 || l > 3) {
        throw ConfigError("taylor_remainder: l must be 1, 2 or 3");
    }
    if (!std::isfinite(z)) {
        throw ConfigError("taylor_remainder: z must be finite");
    }
    const double az = std::abs(z);
    if (az < 0.5) {
        // 20 series terms leave a remainder below 0.5^20/21! < 1e-15.
        std::complex<double> term{1.0, 0.0};
        double factorial = 1.0;
        for (int i = 1; i <= l; ++i) factorial *= i;
        term /= factorial;
        std::complex<double> sum = term;
        const std::complex<double> iz{0.0, z};
        for (int m = 1; m < 20; ++m) {
            term *= iz / static_cast<double>(m + l);
            sum += term;
        }
        return sum;
    }
    const std::complex<double> eiz = expi(z);
    const std::complex<double> iz{0.0, z};
    switch (l) {
        case 1:
            return (eiz - 1.0) / iz;
        case 2:
            return (1.0 + iz - eiz) / (z * z);
        default:
            return kImaginary * (eiz - 1.0 - iz + 0.5 * z * z) / (z * z * z);
    }
}

Decomposition::Decomposition(const CopyIndex& index, double p, const DecompositionBudget& budget)
    : index_(&index), p_(p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw DegenerateError("Decomposition: p must lie strictly between 0 and 1");
    }
    const std::size_t count = index.copy_count();
    const int e = index.edges_per_copy();
    q_ = std::pow(p, e);
    mean_ = static_cast<double>(count) * q_;

    std::uint64_t total = 0;
    std::vector<std::vector<std::int32_t>> closed(count);
    for (std::size_t j = 0; j < count; ++j) {
        closed[j] = index.closed_neighbors(j);
        total += closed[j].size();
        if (total > budget.max_pairs) {
            throw BudgetError("Decomposition: dependency pairs exceed the budget of " +
                              std::to_string(budget.max_pairs));
        }
    }
    closed_offsets_.assign(count + 1, 0);
    closed_items_.reserve(total);
    for (std::size_t j = 0; j < count; ++j) {
        closed_offsets_[j] = closed_items_.size();
        closed_items_.insert(closed_items_.end(), closed[j].begin(), closed[j].end());
    }
    closed_offsets_[count] = closed_items_.size();

    // First fill: E[Y_j Y_k] = p^{|j u k|} per pair, accumulating sigma^2.
    pairs_.reserve(total);
    KahanSum variance;
    for (std::size_t j = 0; j < count; ++j) {
        auto ej = index.copy(j);
        for (std::int32_t k : closed[j]) {
            auto ek = index.copy(static_cast<std::size_t>(k));
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
            const double joint = std::pow(p, static_cast<double>(union_size));
            variance.add(joint - q_ * q_);
            Pair pair;
            pair.j = static_cast<std::int32_t>(j);
            pair.k = k;
            pair.e_xjxk = joint;  // rescaled below once sigma is known
            pairs_.push_back(pair);
        }
    }
    if (!(variance.value() > 0.0)) {
        throw DegenerateError("Decomposition: variance of S is not positive");
    }
    sigma_ = std::sqrt(variance.value());
    for (Pair& pair : pairs_) {
        pair.e_xjxk = (pair.e_xjxk - q_ * q_) / variance.value();
    }

    // Intersections of the closed lists, for realizing V_jk.
    for (Pair& pair : pairs_) {
        const auto& cj = closed[static_cast<std::size_t>(pair.j)];
        const auto& ck = closed[static_cast<std::size_t>(pair.k)];
        pair.inter_offset = static_cast<std::uint32_t>(inter_items_.size());
        std::set_intersection(cj.begin(), cj.end(), ck.begin(), ck.end(),
                              std::back_inserter(inter_items_));
        pair.inter_size = static_cast<std::uint32_t>(inter_items_.size()) - pair.inter_offset;
    }
}

void Decomposition::realize(const EdgeConfiguration& config, Realization& out) const {
    const std::size_t count = copy_count();
    out.active.resize(count);
    out.x.resize(count);
    out.z.resize(count);
    out.closed_active.resize(count);
    const double x_absent = (0.0 - q_) / sigma_;
    const double x_present = (1.0 - q_) / sigma_;
    std::int64_t s = 0;
    for (std::size_t j = 0; j < count; ++j) {
        bool complete = true;
        for (std::int32_t edge : index_->copy(j)) {
            if (!config.test(edge)) {
                complete = false;
                break;
            }
        }
        out.active[j] = complete ? 1 : 0;
        out.x[j] = complete ? x_present : x_absent;
        s += complete ? 1 : 0;
    }
    for (std::size_t j = 0; j < count; ++j) {
        auto list = closed(j);
        std::int32_t c = 0;
        for (std::int32_t k : list) c += out.active[static_cast<std::size_t>(k)];
        out.closed_active[j] = c;
        out.z[j] = (static_cast<double>(c) - static_cast<double>(list.size()) * q_) / sigma_;
    }
    out.w = (static_cast<double>(s) - mean_) / sigma_;
}

double Decomposition::z_plus_v(const Realization& r, const Pair& pair) const {
    const auto sj = static_cast<std::size_t>(pair.j);
    const auto sk = static_cast<std::size_t>(pair.k);
    std::int32_t inter_active = 0;
    for (std::int32_t l : intersection(pair)) inter_active += r.active[static_cast<std::size_t>(l)];
    const double active_union =
        static_cast<double>(r.closed_active[sj] + r.closed_active[sk] - inter_active);
    const double union_size = static_cast<double>(closed(sj).size() + closed(sk).size()) -
                              static_cast<double>(pair.inter_size);
    return (active_union - union_size * q_) / sigma_;
}

std::complex<double> Decomposition::h_t(const Realization& r, double t) const {
    KahanComplexSum first, second;
    for (std::size_t j = 0; j < copy_count(); ++j) {
        const double z = r.z[j];
        first.add(r.x[j] * z * z * taylor_remainder(-t * z, 2));
    }
    for (const Pair& pair : pairs_) {
        const double zv = z_plus_v(r, pair);
        const double centered =
            r.x[static_cast<std::size_t>(pair.j)] * r.x[static_cast<std::size_t>(pair.k)] -
            pair.e_xjxk;
        second.add(centered * zv * taylor_remainder(-t * zv, 1));
    }
    return kImaginary * (first.value() - second.value());
}

double Decomposition::w3_residual(const Realization& r) const {
    // i H_0 = -1/2 sum_j X_j Z_j^2 + sum_pairs (X_j X_k - E[X_j X_k])(Z_j + V_jk),
    // which is real because R_2(0) = 1/2 and R_1(0) = 1.
    KahanSum i_h0, quadratic, pair_terms;
    for (std::size_t j = 0; j < copy_count(); ++j) {
        const double z = r.z[j];
        const double wj = r.w - z;
        i_h0.add(-0.5 * r.x[j] * z * z);
        quadratic.add(0.5 * r.x[j] * wj * wj);
    }
    for (const Pair& pair : pairs_) {
        const double zv = z_plus_v(r, pair);
        const double centered =
            r.x[static_cast<std::size_t>(pair.j)] * r.x[static_cast<std::size_t>(pair.k)] -
            pair.e_xjxk;
        i_h0.add(centered * zv);
        pair_terms.add(centered * (r.w - zv));
    }
    const double lhs = 0.5 * r.w * r.w * r.w - r.w;
    const double rhs = i_h0.value() + quadratic.value() + pair_terms.value();
    return std::abs(lhs - rhs);
}

HtMoments ht_moments(const ExactModel& model, const Decomposition& decomposition, double t) {
    check_same_index(model, decomposition);
    model.require_nondegenerate();
    KahanComplexSum mean_ht, ht_eitw, eitw, drift;
    Decomposition::Realization realization;
    sweep_configurations(model, [&](const EdgeConfiguration& config, double weight, int) {
        decomposition.realize(config, realization);
        const std::complex<double> ht = decomposition.h_t(realization, t);
        const std::complex<double> phase = expi(t * realization.w);
        mean_ht.add(weight * ht);
        ht_eitw.add(weight * ht * phase);
        eitw.add(weight * phase);
        drift.add(weight * (kImaginary * realization.w + t) * phase);
    });
    HtMoments result;
    result.t = t;
    result.mean_ht = mean_ht.value();
    result.cov_ht = ht_eitw.value() - mean_ht.value() * eitw.value();
    result.lhs = drift.value();
    result.rhs = t * t * ht_eitw.value();
    result.identity_residual = std::abs(result.lhs - result.rhs);
    return result;
}

double verify_ht_identity(const ExactModel& model, const Decomposition& decomposition, double t) {
    return ht_moments(model, decomposition, t).identity_residual;
}

std::vector<double> default_t_grid(double a) {
    if (!(a > 0.0)) {
        throw ConfigError("default_t_grid: A must be positive");
    }
    const double edge = 1.0 / (2.0 * a);
    double step = 0.25;
    if (edge / step > 32.0) step = edge / 32.0;
    std::vector<double> positive;
    for (int k = 1; static_cast<double>(k) * step < edge * (1.0 - 1e-12); ++k) {
        positive.push_back(static_cast<double>(k) * step);
    }
    positive.push_back(edge);
    std::vector<double> grid;
    grid.reserve(2 * positive.size() + 1);
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) grid.push_back(-*it);
    grid.push_back(0.0);
    grid.insert(grid.end(), positive.begin(), positive.end());
    return grid;
}

namespace {

/// Everything the A/epsilon pass accumulates, shared by the oracle and Monte
/// Carlo paths. Weighted terms enter with the configuration weight (oracle)
/// or weight 1 (each MC draw), normalized by the caller.
struct APass {
    KahanSum term1;        // sum_j |X_j| Z_j^2
    KahanSum term2a;       // sum_pairs |X_j X_k (Z_j+V_jk)|
    KahanSum term2a_eps;   // sum_pairs |X_j X_k V_jk|
    std::vector<KahanSum> pair_abs_xx;  // per pair, E|X_j X_k|
    std::vector<KahanSum> pair_abs_zv;  // per pair, E|Z_j+V_jk|
    // t-free majorant sums: R_2 -> 1/2, R_1 -> 1.
    KahanSum maj_mean[3];
    KahanSum maj_square[3];

    explicit APass(std::size_t pair_count) : pair_abs_xx(pair_count), pair_abs_zv(pair_count) {}

    void accumulate(const Decomposition& decomposition, const Decomposition::Realization& r,
                    double weight) {
        KahanSum local1;
        for (std::size_t j = 0; j < decomposition.copy_count(); ++j) {
            local1.add(std::abs(r.x[j]) * r.z[j] * r.z[j]);
        }
        term1.add(weight * local1.value());
        KahanSum local2a, local2a_eps, maj1, maj2, maj3;
        for (std::size_t j = 0; j < decomposition.copy_count(); ++j) {
            maj1.add(0.5 * r.x[j] * r.z[j] * r.z[j]);
        }
        const auto& pairs = decomposition.pairs();
        for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
            const auto& pair = pairs[pi];
            const double zv = decomposition.z_plus_v(r, pair);
            const double v = zv - r.z[static_cast<std::size_t>(pair.j)];
            const double xx = r.x[static_cast<std::size_t>(pair.j)] *
                              r.x[static_cast<std::size_t>(pair.k)];
            local2a.add(std::abs(xx * zv));
            local2a_eps.add(std::abs(xx * v));
            pair_abs_xx[pi].add(weight * std::abs(xx));
            pair_abs_zv[pi].add(weight * std::abs(zv));
            maj2.add(xx * zv);
            maj3.add(pair.e_xjxk * zv);
        }
        term2a.add(weight * local2a.value());
        term2a_eps.add(weight * local2a_eps.value());
        const double majorants[3] = {maj1.value(), maj2.value(), maj3.value()};
        for (int i = 0; i < 3; ++i) {
            maj_mean[i].add(weight * majorants[i]);
            maj_square[i].add(weight * majorants[i] * majorants[i]);
        }
    }

    /// A and epsilon from the accumulated sums (total weight already 1).
    std::pair<double, double> a_and_epsilon() const {
        KahanSum products;
        for (std::size_t pi = 0; pi < pair_abs_xx.size(); ++pi) {
            products.add(pair_abs_xx[pi].value() * pair_abs_zv[pi].value());
        }
        const double shared = products.value();
        const double a = 0.5 * term1.value() + term2a.value() + shared;
        const double epsilon = 0.5 * term1.value() + term2a_eps.value() + shared;
        return {a, epsilon};
    }

    double majorant_b() const {
        double total = 0.0;
        for (int i = 0; i < 3; ++i) {
            total += sqrt_clamped(maj_square[i].value() - maj_mean[i].value() * maj_mean[i].value());
        }
        return total;
    }
};

/// Per-t complex first and absolute-square moments of the three variance
/// arguments of B.
struct BPass {
    std::vector<KahanComplexSum> mean;  // [t * 3 + term]
    std::vector<KahanSum> square;

    explicit BPass(std::size_t grid_size) : mean(grid_size * 3), square(grid_size * 3) {}

    void accumulate(const Decomposition& decomposition, const Decomposition::Realization& r,
                    double weight, const std::vector<double>& grid) {
        for (std::size_t ti = 0; ti < grid.size(); ++ti) {
            const double t = grid[ti];
            KahanComplexSum u1, u2, u3;
            for (std::size_t j = 0; j < decomposition.copy_count(); ++j) {
                const double z = r.z[j];
                u1.add(r.x[j] * z * z * taylor_remainder(-t * z, 2));
            }
            for (const auto& pair : decomposition.pairs()) {
                const double zv = decomposition.z_plus_v(r, pair);
                const std::complex<double> kernel = zv * taylor_remainder(-t * zv, 1);
                const double xx = r.x[static_cast<std::size_t>(pair.j)] *
                                  r.x[static_cast<std::size_t>(pair.k)];
                u2.add(xx * kernel);
                u3.add(pair.e_xjxk * kernel);
            }
            const std::complex<double> values[3] = {u1.value(), u2.value(), u3.value()};
            for (int i = 0; i < 3; ++i) {
                mean[ti * 3 + static_cast<std::size_t>(i)].add(weight * values[i]);
                square[ti * 3 + static_cast<std::size_t>(i)].add(weight * std::norm(values[i]));
            }
        }
    }

    double b_at(std::size_t ti) const {
        double total = 0.0;
        for (int i = 0; i < 3; ++i) {
            const std::size_t slot = ti * 3 + static_cast<std::size_t>(i);
            total += sqrt_clamped(square[slot].value() - std::norm(mean[slot].value()));
        }
        return total;
    }
};

}  // namespace

AbEstimate estimate_ab_oracle(const ExactModel& model, const Decomposition& decomposition,
                              const std::vector<double>& t_grid) {
    check_same_index(model, decomposition);
    model.require_nondegenerate();

    APass a_pass(decomposition.pairs().size());
    Decomposition::Realization realization;
    sweep_configurations(model, [&](const EdgeConfiguration& config, double weight, int) {
        decomposition.realize(config, realization);
        a_pass.accumulate(decomposition, realization, weight);
    });
    AbEstimate estimate;
    estimate.method = "exact-oracle";
    auto [a, epsilon] = a_pass.a_and_epsilon();
    estimate.a = a;
    estimate.epsilon = epsilon;
    estimate.b_majorant = a_pass.majorant_b();

    estimate.t_grid = t_grid.empty() ? default_t_grid(estimate.a) : t_grid;
    check_grid(estimate.t_grid);

    BPass b_pass(estimate.t_grid.size());
    sweep_configurations(model, [&](const EdgeConfiguration& config, double weight, int) {
        decomposition.realize(config, realization);
        b_pass.accumulate(decomposition, realization, weight, estimate.t_grid);
    });
    estimate.b_at_t.resize(estimate.t_grid.size());
    for (std::size_t ti = 0; ti < estimate.t_grid.size(); ++ti) {
        estimate.b_at_t[ti] = b_pass.b_at(ti);
        estimate.b_grid_max = std::max(estimate.b_grid_max, estimate.b_at_t[ti]);
    }
    return estimate;
}

AbEstimate estimate_ab_mc(const Decomposition& decomposition, std::uint64_t m, std::uint64_t seed,
                          const std::vector<double>& t_grid) {
    constexpr std::uint64_t kBatches = 16;
    if (m < kBatches) {
        throw ConfigError("estimate_ab_mc: need at least 16 samples");
    }
    if (decomposition.pairs().size() > 100'000) {
        throw BudgetError("estimate_ab_mc: dependency-pair count " +
                          std::to_string(decomposition.pairs().size()) +
                          " exceeds the Monte Carlo A/B budget of 100000 pairs");
    }

    const std::uint64_t threshold = bernoulli_threshold(decomposition.p());
    EdgeConfiguration config(decomposition.index().universe());
    Decomposition::Realization realization;

    // Full-sample pass plus 16 interleaved batches (replicate r -> batch
    // r mod 16) for standard errors.
    APass full(decomposition.pairs().size());
    std::vector<APass> batches;
    batches.reserve(kBatches);
    for (std::uint64_t b = 0; b < kBatches; ++b) batches.emplace_back(decomposition.pairs().size());
    std::array<std::uint64_t, kBatches> batch_count{};
    for (std::uint64_t r = 0; r < m; ++r) {
        sample_configuration(config, seed, r, threshold);
        decomposition.realize(config, realization);
        full.accumulate(decomposition, realization, 1.0);
        batches[r % kBatches].accumulate(decomposition, realization, 1.0);
        ++batch_count[r % kBatches];
    }
    const double inv_m = 1.0 / static_cast<double>(m);
    auto normalize_a = [](APass& pass, double inverse) {
        pass.term1.sum *= inverse;
        pass.term1.carry *= inverse;
        pass.term2a.sum *= inverse;
        pass.term2a.carry *= inverse;
        pass.term2a_eps.sum *= inverse;
        pass.term2a_eps.carry *= inverse;
        for (auto& acc : pass.pair_abs_xx) {
            acc.sum *= inverse;
            acc.carry *= inverse;
        }
        for (auto& acc : pass.pair_abs_zv) {
            acc.sum *= inverse;
            acc.carry *= inverse;
        }
        for (int i = 0; i < 3; ++i) {
            pass.maj_mean[i].sum *= inverse;
            pass.maj_mean[i].carry *= inverse;
            pass.maj_square[i].sum *= inverse;
            pass.maj_square[i].carry *= inverse;
        }
    };
    normalize_a(full, inv_m);
    for (std::uint64_t b = 0; b < kBatches; ++b) {
        normalize_a(batches[b], 1.0 / static_cast<double>(batch_count[b]));
    }

    AbEstimate estimate;
    estimate.method = "mc(m=" + std::to_string(m) + ")";
    auto [a, epsilon] = full.a_and_epsilon();
    estimate.a = a;
    estimate.epsilon = epsilon;
    estimate.b_majorant = full.majorant_b();

    auto batch_se = [](const std::vector<double>& values) {
        const std::size_t count = values.size();
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(count);
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        return std::sqrt(ss / static_cast<double>(count * (count - 1)));
    };
    std::vector<double> batch_a(kBatches), batch_eps(kBatches);
    for (std::uint64_t b = 0; b < kBatches; ++b) {
        auto [ab, eb] = batches[b].a_and_epsilon();
        batch_a[b] = ab;
        batch_eps[b] = eb;
    }
    estimate.a_se = batch_se(batch_a);
    estimate.epsilon_se = batch_se(batch_eps);

    estimate.t_grid = t_grid.empty() ? default_t_grid(estimate.a) : t_grid;
    check_grid(estimate.t_grid);

    // Second pass replays the same replicate streams, so the grid can depend
    // on the first-pass A without breaking determinism.
    BPass b_full(estimate.t_grid.size());
    std::vector<BPass> b_batches;
    b_batches.reserve(kBatches);
    for (std::uint64_t b = 0; b < kBatches; ++b) b_batches.emplace_back(estimate.t_grid.size());
    for (std::uint64_t r = 0; r < m; ++r) {
        sample_configuration(config, seed, r, threshold);
        decomposition.realize(config, realization);
        b_full.accumulate(decomposition, realization, 1.0, estimate.t_grid);
        b_batches[r % kBatches].accumulate(decomposition, realization, 1.0, estimate.t_grid);
    }
    auto normalize_b = [](BPass& pass, double inverse) {
        for (auto& acc : pass.mean) {
            acc.re.sum *= inverse;
            acc.re.carry *= inverse;
            acc.im.sum *= inverse;
            acc.im.carry *= inverse;
        }
        for (auto& acc : pass.square) {
            acc.sum *= inverse;
            acc.carry *= inverse;
        }
    };
    normalize_b(b_full, inv_m);
    for (std::uint64_t b = 0; b < kBatches; ++b) {
        normalize_b(b_batches[b], 1.0 / static_cast<double>(batch_count[b]));
    }

    estimate.b_at_t.resize(estimate.t_grid.size());
    std::size_t argmax = 0;
    for (std::size_t ti = 0; ti < estimate.t_grid.size(); ++ti) {
        estimate.b_at_t[ti] = b_full.b_at(ti);
        if (estimate.b_at_t[ti] > estimate.b_grid_max) {
            estimate.b_grid_max = estimate.b_at_t[ti];
            argmax = ti;
        }
    }
    std::vector<double> batch_b(kBatches);
    for (std::uint64_t b = 0; b < kBatches; ++b) batch_b[b] = b_batches[b].b_at(argmax);
    estimate.b_se = batch_se(batch_b);
    return estimate;
}

double epsilon_bkr_oracle(const ExactModel& model, const Decomposition& decomposition) {
    check_same_index(model, decomposition);
    model.require_nondegenerate();
    APass pass(decomposition.pairs().size());
    Decomposition::Realization realization;
    sweep_configurations(model, [&](const EdgeConfiguration& config, double weight, int) {
        decomposition.realize(config, realization);
        pass.accumulate(decomposition, realization, weight);
    });
    return pass.a_and_epsilon().second;
}

double epsilon_bkr_mc(const Decomposition& decomposition, std::uint64_t m, std::uint64_t seed) {
    return estimate_ab_mc(decomposition, m, seed, {0.0}).epsilon;
}

}  // namespace subclt

#include "subclt/copies.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>

#include "subclt/errors.hpp"
#include "subclt/summation.hpp"

namespace subclt {

namespace {

// Exact for every value that fits a double: the running product after each
// division is itself a binomial coefficient, hence integral.
double binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    double result = 1.0;
    for (int i = 0; i < k; ++i) {
        result *= static_cast<double>(n - i);
        result /= static_cast<double>(i + 1);
    }
    return result;
}

inline int slot_of(int a, int b) { return b * (b - 1) / 2 + a; }  // a < b

// Distinct copies of the pattern on the fixed vertex set {0..v-1}, each as a
// lexicographically sorted list of vertex pairs. Their number is v!/|Aut|.
std::vector<std::vector<std::pair<int, int>>> anchored_copies(const PatternGraph& g) {
    const int v = g.vertex_count();
    std::vector<int> perm(static_cast<std::size_t>(v));
    std::iota(perm.begin(), perm.end(), 0);
    std::set<std::uint64_t> masks;
    do {
        std::uint64_t mask = 0;
        for (auto [a, b] : g.edges()) {
            int x = perm[static_cast<std::size_t>(a)];
            int y = perm[static_cast<std::size_t>(b)];
            if (x > y) std::swap(x, y);
            mask |= std::uint64_t{1} << slot_of(x, y);
        }
        masks.insert(mask);
    } while (std::next_permutation(perm.begin(), perm.end()));

    std::vector<std::vector<std::pair<int, int>>> copies;
    copies.reserve(masks.size());
    for (std::uint64_t mask : masks) {
        std::vector<std::pair<int, int>> pairs;
        for (int b = 1; b < v; ++b) {
            for (int a = 0; a < b; ++a) {
                if ((mask >> slot_of(a, b)) & 1u) pairs.emplace_back(a, b);
            }
        }
        std::sort(pairs.begin(), pairs.end());
        copies.push_back(std::move(pairs));
    }
    return copies;
}

std::vector<double> power_table(double p, int max_exponent) {
    std::vector<double> powers(static_cast<std::size_t>(max_exponent) + 1);
    for (int k = 0; k <= max_exponent; ++k) powers[static_cast<std::size_t>(k)] = std::pow(p, k);
    return powers;
}

struct Mask256 {
    std::array<std::uint64_t, 4> w{};

    void set(int bit) { w[static_cast<std::size_t>(bit) >> 6] |= std::uint64_t{1} << (bit & 63); }
    friend Mask256 operator|(const Mask256& a, const Mask256& b) {
        Mask256 r;
        for (int i = 0; i < 4; ++i) r.w[static_cast<std::size_t>(i)] =
            a.w[static_cast<std::size_t>(i)] | b.w[static_cast<std::size_t>(i)];
        return r;
    }
    int popcount() const {
        int total = 0;
        for (std::uint64_t word : w) total += std::popcount(word);
        return total;
    }
};

std::vector<Mask256> copy_edge_masks(const CopyIndex& index) {
    if (index.universe().edge_count() > 256) {
        throw SizeError("chain sums: edge universe exceeds 256 bits (n > 22)");
    }
    std::vector<Mask256> masks(index.copy_count());
    for (std::size_t j = 0; j < index.copy_count(); ++j) {
        for (std::int32_t e : index.copy(j)) masks[j].set(e);
    }
    return masks;
}

void validate_chain_p(double p) {
    if (!(p > 0.0) || p > 1.0) {
        throw ConfigError("chain sums: p must lie in (0, 1]");
    }
}

}  // namespace

EdgeUniverse::EdgeUniverse(int n) : n_(n) {
    if (n < 2) {
        throw ConfigError("EdgeUniverse: need at least 2 vertices");
    }
    pairs_.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    row_base_.assign(static_cast<std::size_t>(n), 0);
    for (int u = 0; u < n; ++u) {
        row_base_[static_cast<std::size_t>(u)] = static_cast<int>(pairs_.size());
        for (int v = u + 1; v < n; ++v) pairs_.emplace_back(u, v);
    }
}

int EdgeUniverse::index(int u, int v) const {
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= n_ || u == v) {
        throw ConfigError("EdgeUniverse: invalid vertex pair");
    }
    return row_base_[static_cast<std::size_t>(u)] + (v - u - 1);
}

EdgeConfiguration::EdgeConfiguration(const EdgeUniverse& universe)
    : edge_count_(universe.edge_count()),
      words_(static_cast<std::size_t>(edge_count_ + 63) / 64, 0) {}

void EdgeConfiguration::clear() { std::fill(words_.begin(), words_.end(), 0); }

int EdgeConfiguration::present_count() const {
    int total = 0;
    for (std::uint64_t word : words_) total += std::popcount(word);
    return total;
}

CopyIndex enumerate_copies(int n, const PatternGraph& raw_pattern, const CopyBudget& budget) {
    PatternGraph pattern = raw_pattern.without_isolated_vertices();
    const int v = pattern.vertex_count();
    const int e = pattern.edge_count();
    if (n < v) {
        throw ConfigError("enumerate_copies: n = " + std::to_string(n) +
                          " is smaller than the pattern on " + std::to_string(v) + " vertices");
    }
    auto anchored = anchored_copies(pattern);
    double predicted = binomial(n, v) * static_cast<double>(anchored.size());
    if (predicted > static_cast<double>(budget.max_copies)) {
        throw BudgetError("enumerate_copies: |J| would be " + std::to_string(predicted) +
                          ", budget is " + std::to_string(budget.max_copies));
    }

    CopyIndex index(EdgeUniverse(n), pattern);
    index.edges_per_copy_ = e;
    index.automorphisms_ = automorphism_count(pattern);
    const auto copies_total = static_cast<std::size_t>(predicted);
    index.copy_edges_.reserve(copies_total * static_cast<std::size_t>(e));
    index.edge_to_copies_.assign(static_cast<std::size_t>(index.universe_.edge_count()), {});

    // Every copy is (v-subset of [n]) x (anchored copy on the slots); the
    // subset is ascending, so slot pairs map to edge ids in sorted order.
    std::vector<int> subset(static_cast<std::size_t>(v));
    std::iota(subset.begin(), subset.end(), 0);
    std::int32_t copy_id = 0;
    while (true) {
        for (const auto& slots : anchored) {
            for (auto [a, b] : slots) {
                int edge = index.universe_.index(subset[static_cast<std::size_t>(a)],
                                                 subset[static_cast<std::size_t>(b)]);
                index.copy_edges_.push_back(edge);
                index.edge_to_copies_[static_cast<std::size_t>(edge)].push_back(copy_id);
            }
            ++copy_id;
        }
        int i = v - 1;
        while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - v + i) --i;
        if (i < 0) break;
        ++subset[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < v; ++j) {
            subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    index.copy_count_ = static_cast<std::size_t>(copy_id);
    index.embedding_count_ = index.copy_count_ * index.automorphisms_;

    // D by stamped counting of distinct sharing copies per j.
    std::vector<std::uint32_t> stamp(index.copy_count_, ~std::uint32_t{0});
    int max_degree = 0;
    for (std::size_t j = 0; j < index.copy_count_; ++j) {
        int degree = 0;
        for (std::int32_t edge : index.copy(j)) {
            for (std::int32_t k : index.edge_to_copies_[static_cast<std::size_t>(edge)]) {
                if (static_cast<std::size_t>(k) == j) continue;
                if (stamp[static_cast<std::size_t>(k)] != j) {
                    stamp[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(j);
                    ++degree;
                }
            }
        }
        max_degree = std::max(max_degree, degree);
    }
    index.max_degree_ = max_degree;
    return index;
}

std::vector<std::int32_t> CopyIndex::neighbors(std::size_t j) const {
    std::vector<std::int32_t> result;
    for (std::int32_t edge : copy(j)) {
        for (std::int32_t k : edge_to_copies_[static_cast<std::size_t>(edge)]) {
            if (static_cast<std::size_t>(k) != j) result.push_back(k);
        }
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

std::vector<std::int32_t> CopyIndex::closed_neighbors(std::size_t j) const {
    std::vector<std::int32_t> result = neighbors(j);
    result.insert(std::lower_bound(result.begin(), result.end(), static_cast<std::int32_t>(j)),
                  static_cast<std::int32_t>(j));
    return result;
}

double PairClassTable::copy_count(int n) const {
    return binomial(n, pattern_vertices) * static_cast<double>(anchored_copies);
}

double PairClassTable::mean(int n, double p) const {
    return copy_count(n) * std::pow(p, pattern_edges);
}

double PairClassTable::variance(int n, double p) const {
    KahanSum per_copy;
    for (std::size_t a = 0; a < count.size(); ++a) {
        double extensions = binomial(n - pattern_vertices, static_cast<int>(a));
        if (extensions == 0.0) continue;
        for (int c = 1; c <= pattern_edges; ++c) {
            double pairs = static_cast<double>(count[a][static_cast<std::size_t>(c)]);
            if (pairs == 0.0) continue;
            per_copy.add(pairs * extensions *
                         (std::pow(p, 2 * pattern_edges - c) - std::pow(p, 2 * pattern_edges)));
        }
    }
    return copy_count(n) * per_copy.value();
}

double PairClassTable::closed_degree(int n) const {
    double total = 0.0;
    for (std::size_t a = 0; a < count.size(); ++a) {
        double extensions = binomial(n - pattern_vertices, static_cast<int>(a));
        for (int c = 1; c <= pattern_edges; ++c) {
            total += static_cast<double>(count[a][static_cast<std::size_t>(c)]) * extensions;
        }
    }
    return total;
}

PairClassTable pair_class_table(const PatternGraph& raw_pattern, const CopyBudget& budget) {
    PatternGraph pattern = raw_pattern.without_isolated_vertices();
    const int v = pattern.vertex_count();
    const int e = pattern.edge_count();
    PairClassTable table;
    table.pattern_vertices = v;
    table.pattern_edges = e;
    table.automorphisms = automorphism_count(pattern);
    table.count.assign(static_cast<std::size_t>(std::max(v - 1, 1)),
                       std::vector<std::uint64_t>(static_cast<std::size_t>(e) + 1, 0));

    for (int a = 0; a <= v - 2; ++a) {
        CopyIndex index = enumerate_copies(v + a, pattern, budget);
        if (a == 0) table.anchored_copies = index.copy_count();
        std::vector<std::int32_t> base;
        base.reserve(static_cast<std::size_t>(e));
        for (auto [x, y] : pattern.edges()) base.push_back(index.universe().index(x, y));
        std::sort(base.begin(), base.end());

        for (std::size_t j = 0; j < index.copy_count(); ++j) {
            auto edges = index.copy(j);
            std::uint32_t vertex_mask = 0;
            for (std::int32_t edge : edges) {
                auto [x, y] = index.universe().endpoints(edge);
                vertex_mask |= (1u << x) | (1u << y);
            }
            int fresh = std::popcount(vertex_mask >> v);
            if (fresh != a) continue;  // counted at its own smaller extension size
            int shared = 0;
            std::size_t bi = 0;
            for (std::int32_t edge : edges) {
                while (bi < base.size() && base[bi] < edge) ++bi;
                if (bi < base.size() && base[bi] == edge) ++shared;
            }
            if (shared >= 1) ++table.count[static_cast<std::size_t>(a)][static_cast<std::size_t>(shared)];
        }
    }
    return table;
}

ModelStats model_stats(int n, double p, const PatternGraph& raw_pattern) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw DegenerateError("model_stats: p must lie strictly between 0 and 1 "
                              "(the count is deterministic otherwise)");
    }
    PatternGraph pattern = raw_pattern.without_isolated_vertices();
    if (n < pattern.vertex_count()) {
        throw ConfigError("model_stats: n = " + std::to_string(n) +
                          " is smaller than the pattern on " +
                          std::to_string(pattern.vertex_count()) + " vertices");
    }
    std::vector<SubgraphClass> catalog = subgraph_catalog(pattern);
    PairClassTable table = pair_class_table(pattern);
    double copies = table.copy_count(n);
    double mean = table.mean(n, p);
    double variance = table.variance(n, p);
    double closed = table.closed_degree(n);
    PsiResult psi_all = psi(catalog, n, p);
    double psi_value = psi_all.psi_min;
    std::string label = raw_pattern.label();
    return ModelStats{n,
                      p,
                      std::move(pattern),
                      std::move(label),
                      std::move(catalog),
                      std::move(table),
                      copies,
                      mean,
                      variance,
                      std::sqrt(variance),
                      closed - 1.0,
                      closed,
                      std::move(psi_all),
                      psi_value};
}

int count_copies_indexed(const EdgeConfiguration& config, const CopyIndex& index) {
    int total = 0;
    for (std::size_t j = 0; j < index.copy_count(); ++j) {
        bool complete = true;
        for (std::int32_t edge : index.copy(j)) {
            if (!config.test(edge)) {
                complete = false;
                break;
            }
        }
        total += complete ? 1 : 0;
    }
    return total;
}

namespace {

template <typename EdgeVisitor>
void for_each_present_edge(const EdgeConfiguration& config, EdgeVisitor&& visit) {
    auto words = config.words();
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
        std::uint64_t bits = words[wi];
        while (bits != 0) {
            int b = std::countr_zero(bits);
            bits &= bits - 1;
            visit(static_cast<int>(wi * 64) + b);
        }
    }
}

std::int64_t count_triangles_into(const EdgeUniverse& universe, const EdgeConfiguration& config,
                                  std::vector<std::uint64_t>& adjacency) {
    const int n = universe.n();
    const std::size_t words_per_row = static_cast<std::size_t>(n + 63) / 64;
    adjacency.assign(static_cast<std::size_t>(n) * words_per_row, 0);
    for_each_present_edge(config, [&](int edge) {
        auto [u, v] = universe.endpoints(edge);
        adjacency[static_cast<std::size_t>(u) * words_per_row + (static_cast<std::size_t>(v) >> 6)] |=
            std::uint64_t{1} << (v & 63);
        adjacency[static_cast<std::size_t>(v) * words_per_row + (static_cast<std::size_t>(u) >> 6)] |=
            std::uint64_t{1} << (u & 63);
    });
    std::int64_t three_times = 0;
    for_each_present_edge(config, [&](int edge) {
        auto [u, v] = universe.endpoints(edge);
        const std::uint64_t* row_u = adjacency.data() + static_cast<std::size_t>(u) * words_per_row;
        const std::uint64_t* row_v = adjacency.data() + static_cast<std::size_t>(v) * words_per_row;
        for (std::size_t w = 0; w < words_per_row; ++w) {
            three_times += std::popcount(row_u[w] & row_v[w]);
        }
    });
    return three_times / 3;  // each triangle is seen once per edge
}

}  // namespace

std::int64_t count_triangles(const EdgeUniverse& universe, const EdgeConfiguration& config) {
    std::vector<std::uint64_t> adjacency;
    return count_triangles_into(universe, config, adjacency);
}

std::int64_t count_single_edges(const EdgeConfiguration& config) {
    return config.present_count();
}

CopyCounter::CopyCounter(int n, const PatternGraph& raw_pattern, const CopyBudget& budget)
    : mode_(Mode::kIndexed), universe_(n) {
    PatternGraph pattern = raw_pattern.without_isolated_vertices();
    static const CanonicalCode kTriangleCode = canonicalize(PatternGraph::preset("triangle"));
    static const CanonicalCode kEdgeCode = canonicalize(PatternGraph::preset("edge"));
    CanonicalCode code = canonicalize(pattern);
    if (code == kEdgeCode) {
        mode_ = Mode::kEdge;
    } else if (code == kTriangleCode) {
        mode_ = Mode::kTriangle;
    } else {
        index_.emplace(enumerate_copies(n, pattern, budget));
    }
}

std::int64_t CopyCounter::count(const EdgeConfiguration& config) {
    switch (mode_) {
        case Mode::kEdge:
            return count_single_edges(config);
        case Mode::kTriangle:
            return count_triangles_into(universe_, config, adjacency_);
        case Mode::kIndexed:
            return count_copies_indexed(config, *index_);
    }
    return 0;
}

double triple_sum(const CopyIndex& index, double p, const ChainBudgets& budgets) {
    validate_chain_p(p);
    const long double closed = static_cast<long double>(index.max_degree()) + 1.0L;
    long double estimate = static_cast<long double>(index.copy_count()) * closed * closed;
    if (estimate > static_cast<long double>(budgets.triple_ops)) {
        throw BudgetError("triple_sum: ~" + std::to_string(static_cast<double>(estimate)) +
                          " operations exceed the budget of " + std::to_string(budgets.triple_ops));
    }
    std::vector<Mask256> masks = copy_edge_masks(index);
    std::vector<double> powers = power_table(p, 3 * index.edges_per_copy());
    KahanSum total;
    for (std::size_t j = 0; j < index.copy_count(); ++j) {
        std::vector<std::int32_t> dependent = index.closed_neighbors(j);
        for (std::int32_t k : dependent) {
            Mask256 jk = masks[j] | masks[static_cast<std::size_t>(k)];
            for (std::int32_t l : dependent) {
                total.add(powers[static_cast<std::size_t>(
                    (jk | masks[static_cast<std::size_t>(l)]).popcount())]);
            }
        }
    }
    return total.value();
}

double chain6_sum(const CopyIndex& index, double p, const ChainBudgets& budgets) {
    validate_chain_p(p);
    const long double closed = static_cast<long double>(index.max_degree()) + 1.0L;
    long double estimate = static_cast<long double>(index.copy_count());
    for (int i = 0; i < 5; ++i) estimate *= closed;
    if (estimate > static_cast<long double>(budgets.chain6_ops)) {
        throw BudgetError("chain6_sum: ~" + std::to_string(static_cast<double>(estimate)) +
                          " operations exceed the budget of " + std::to_string(budgets.chain6_ops));
    }
    std::vector<Mask256> masks = copy_edge_masks(index);
    std::vector<double> powers = power_table(p, 6 * index.edges_per_copy());
    std::vector<std::vector<std::int32_t>> dependent(index.copy_count());
    for (std::size_t j = 0; j < index.copy_count(); ++j) dependent[j] = index.closed_neighbors(j);

    // The reachable set only grows along a chain prefix, so it lives in one
    // vector with per-depth size snapshots and a membership mark array.
    std::vector<std::int32_t> allowed;
    allowed.reserve(index.copy_count());
    std::vector<std::uint8_t> marked(index.copy_count(), 0);
    auto extend = [&](std::int32_t j) {
        std::size_t before = allowed.size();
        for (std::int32_t k : dependent[static_cast<std::size_t>(j)]) {
            if (!marked[static_cast<std::size_t>(k)]) {
                marked[static_cast<std::size_t>(k)] = 1;
                allowed.push_back(k);
            }
        }
        return before;
    };
    auto retract = [&](std::size_t before) {
        while (allowed.size() > before) {
            marked[static_cast<std::size_t>(allowed.back())] = 0;
            allowed.pop_back();
        }
    };

    KahanSum total;
    auto recurse = [&](auto&& self, int depth, const Mask256& mask, std::size_t limit) -> void {
        for (std::size_t idx = 0; idx < limit; ++idx) {
            std::int32_t j = allowed[idx];
            Mask256 next = mask | masks[static_cast<std::size_t>(j)];
            if (depth == 6) {
                total.add(powers[static_cast<std::size_t>(next.popcount())]);
            } else {
                std::size_t before = extend(j);
                self(self, depth + 1, next, allowed.size());
                retract(before);
            }
        }
    };
    for (std::size_t j1 = 0; j1 < index.copy_count(); ++j1) {
        std::size_t before = extend(static_cast<std::int32_t>(j1));
        recurse(recurse, 2, masks[j1], allowed.size());
        retract(before);
    }
    return total.value();
}

ChainSums chain_sums(const CopyIndex& index, double p, const ChainBudgets& budgets) {
    return ChainSums{triple_sum(index, p, budgets), chain6_sum(index, p, budgets)};
}

}  // namespace subclt

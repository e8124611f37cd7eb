#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subclt/pattern.hpp"

namespace subclt {

/// All C(n,2) unordered vertex pairs of K_n under a fixed dense indexing:
/// (0,1), (0,2), ..., (0,n-1), (1,2), ... The map is a bijection and stable
/// across runs, so edge ids are meaningful in reports and RNG streams.
class EdgeUniverse {
public:
    explicit EdgeUniverse(int n);

    int n() const { return n_; }
    int edge_count() const { return static_cast<int>(pairs_.size()); }
    int index(int u, int v) const;
    std::pair<int, int> endpoints(int edge) const { return pairs_[static_cast<std::size_t>(edge)]; }

private:
    int n_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<int> row_base_;
};

/// One realization of the edge indicators of G(n,p): a bitmask over the
/// universe's edge indices.
class EdgeConfiguration {
public:
    explicit EdgeConfiguration(const EdgeUniverse& universe);

    int edge_count() const { return edge_count_; }
    bool test(int edge) const {
        return (words_[static_cast<std::size_t>(edge) >> 6] >> (edge & 63)) & 1u;
    }
    void set(int edge) { words_[static_cast<std::size_t>(edge) >> 6] |= std::uint64_t{1} << (edge & 63); }
    void reset(int edge) {
        words_[static_cast<std::size_t>(edge) >> 6] &= ~(std::uint64_t{1} << (edge & 63));
    }
    void clear();
    int present_count() const;
    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> words() { return words_; }

private:
    int edge_count_;
    std::vector<std::uint64_t> words_;
};

struct CopyBudget {
    std::uint64_t max_copies = 10'000'000;
};

/**
 * The set J of copies of a pattern inside K_n, stored as sorted edge-index
 * arrays with an inverted edge -> copies index.
 *
 * Dependency neighborhoods follow the convention that a copy is NOT its own
 * neighbor: neighbors(j) lists the copies sharing at least one edge with j,
 * excluding j, and max_degree() is the largest such count. The decomposition
 * machinery adds the copy itself back in (closed_neighbors) because the
 * summation identities it evaluates run over dependent indices including j.
 */
class CopyIndex {
public:
    int n() const { return universe_.n(); }
    const EdgeUniverse& universe() const { return universe_; }
    const PatternGraph& pattern() const { return pattern_; }

    std::size_t copy_count() const { return copy_count_; }
    std::span<const std::int32_t> copy(std::size_t j) const {
        return {copy_edges_.data() + j * static_cast<std::size_t>(edges_per_copy_),
                static_cast<std::size_t>(edges_per_copy_)};
    }
    int edges_per_copy() const { return edges_per_copy_; }
    const std::vector<std::vector<std::int32_t>>& edge_to_copies() const {
        return edge_to_copies_;
    }

    /// Copies sharing >= 1 edge with j, j itself excluded; sorted.
    std::vector<std::int32_t> neighbors(std::size_t j) const;
    /// Same but with j included; what the dependency sums iterate over.
    std::vector<std::int32_t> closed_neighbors(std::size_t j) const;

    /// D = max over j of |neighbors(j)|.
    int max_degree() const { return max_degree_; }
    std::uint64_t embedding_count() const { return embedding_count_; }
    std::uint64_t automorphisms() const { return automorphisms_; }

    friend CopyIndex enumerate_copies(int n, const PatternGraph& pattern,
                                      const CopyBudget& budget);

private:
    CopyIndex(EdgeUniverse universe, PatternGraph pattern)
        : universe_(std::move(universe)), pattern_(std::move(pattern)) {}

    EdgeUniverse universe_;
    PatternGraph pattern_;  // isolated vertices stripped
    std::size_t copy_count_ = 0;
    int edges_per_copy_ = 0;
    std::vector<std::int32_t> copy_edges_;  // flattened, each copy's ids sorted
    std::vector<std::vector<std::int32_t>> edge_to_copies_;
    int max_degree_ = 0;
    std::uint64_t embedding_count_ = 0;
    std::uint64_t automorphisms_ = 1;
};

/// Enumerate every copy of the pattern in K_n, duplicate-free. Refuses with a
/// budget error when the predicted |J| exceeds the budget (the prediction
/// n-choose-v times v!/|Aut| is exact, so nothing is half-built).
CopyIndex enumerate_copies(int n, const PatternGraph& pattern, const CopyBudget& budget = {});

/**
 * Per-pattern gluing table behind the closed-form second-moment quantities.
 *
 * Fix one base copy on vertices {0..v-1}. count[a][c] is the number of copies
 * in K_{v+a} that use all a extra vertices and share exactly c >= 1 edges
 * with the base copy. Summing count[a][c] * C(n-v, a) counts the dependent
 * copies of any fixed copy in K_n exactly, which yields |N_j|, sigma^2 and
 * E S at every n without materializing J.
 */
struct PairClassTable {
    int pattern_vertices = 0;
    int pattern_edges = 0;
    std::uint64_t automorphisms = 1;
    std::uint64_t anchored_copies = 1;  // distinct copies on one fixed v-set
    std::vector<std::vector<std::uint64_t>> count;  // [a][c], a in 0..v-2, c in 0..e

    double copy_count(int n) const;    // |J|
    double mean(int n, double p) const;  // E S = |J| p^e
    double variance(int n, double p) const;
    double closed_degree(int n) const;  // |N_j| + 1, identical for every j
};

PairClassTable pair_class_table(const PatternGraph& pattern, const CopyBudget& budget = {});

/// Everything about one (n, p, pattern) model that has a closed form:
/// exact mean/sigma of S via the pair-class table, the dependency degree,
/// the subgraph catalog and psi. Valid at every n, not just oracle scale.
struct ModelStats {
    int n = 0;
    double p = 0.0;
    PatternGraph pattern;  // isolated vertices stripped
    std::string pattern_label;
    std::vector<SubgraphClass> catalog;
    PairClassTable pairs;
    double copy_count = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double sigma = 0.0;
    double degree_open = 0.0;    // D
    double degree_closed = 0.0;  // D + 1
    PsiResult psi_all;
    double psi_value = 0.0;
};

ModelStats model_stats(int n, double p, const PatternGraph& pattern);

/// Backend (a): iterate J and test containment of each copy's edges.
int count_copies_indexed(const EdgeConfiguration& config, const CopyIndex& index);

/// Backend (b): pattern-specialized kernels that never materialize J.
/// Triangle kernel: per present edge, popcount of the common-neighborhood
/// intersection of the endpoint adjacency bitsets (each triangle is seen from
/// its three edges, so the total divides by 3 exactly).
std::int64_t count_triangles(const EdgeUniverse& universe, const EdgeConfiguration& config);
std::int64_t count_single_edges(const EdgeConfiguration& config);

/**
 * Copy counter bound to one (n, pattern), choosing the fastest exact backend:
 * the popcount kernel for "edge", the adjacency-bitset kernel for "triangle",
 * and J-iteration for everything else (which materializes the index, subject
 * to the copy budget). Holds scratch buffers, so use one instance per thread.
 */
class CopyCounter {
public:
    CopyCounter(int n, const PatternGraph& pattern, const CopyBudget& budget = {});

    std::int64_t count(const EdgeConfiguration& config);
    bool uses_index() const { return index_.has_value(); }
    const CopyIndex* index() const { return index_ ? &*index_ : nullptr; }
    const EdgeUniverse& universe() const { return universe_; }

private:
    enum class Mode { kEdge, kTriangle, kIndexed };
    Mode mode_;
    EdgeUniverse universe_;
    std::optional<CopyIndex> index_;
    std::vector<std::uint64_t> adjacency_;  // triangle kernel scratch
};

struct ChainBudgets {
    std::uint64_t triple_ops = 100'000'000;   // guard |J| * (D+1)^2
    std::uint64_t chain6_ops = 1'000'000'000;  // guard |J| * (D+1)^5
};

/// Sum over j and over k, l dependent on j (the copy itself included) of
/// E[Y_j Y_k Y_l] = p^{|edge union|}. Exact, by direct iteration.
double triple_sum(const CopyIndex& index, double p, const ChainBudgets& budgets = {});

/// Sum over 6-chains (j1..j6) of E[Y_{j1} ... Y_{j6}]. A chain requires each
/// j_i to be dependent on at least one earlier element (cumulative-union
/// membership, evaluated exactly as stated, without symmetrization); chains
/// are iterated, never materialized.
double chain6_sum(const CopyIndex& index, double p, const ChainBudgets& budgets = {});

struct ChainSums {
    double triple = 0.0;
    double chain6 = 0.0;
};
ChainSums chain_sums(const CopyIndex& index, double p, const ChainBudgets& budgets = {});

}  // namespace subclt

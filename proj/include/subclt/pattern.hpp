#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace subclt {

/**
 * An undirected pattern graph on labeled vertices {0..vertex_count-1}.
 *
 * This is the small fixed graph whose copies inside K_n are counted. Edges
 * are stored normalized (u < v, sorted, duplicate-free); self-loops and
 * duplicates are rejected, and at least one edge is required. Isolated
 * vertices are allowed on a user-supplied pattern but every computation
 * strips them first (the standardized count is unchanged by completion
 * vertices, so nothing downstream ever sees them).
 */
class PatternGraph {
public:
    static constexpr int kMaxVertices = 10;

    PatternGraph(int vertex_count, std::vector<std::pair<int, int>> edges,
                 int vertex_cap = kMaxVertices);

    /// Named presets: "triangle", "edge", "path2", "c4", "k4".
    static PatternGraph preset(const std::string& name);
    static const std::vector<std::string>& preset_names();

    /// Edge-list text, one "u v" pair per line, 0-based vertices. Blank lines
    /// and '#' comments are ignored. Vertex count is 1 + the largest label.
    static PatternGraph from_edge_list(const std::string& text,
                                       int vertex_cap = kMaxVertices);

    int vertex_count() const { return vertex_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    bool has_edge(int u, int v) const;
    /// Adjacency row as a bitmask over vertex ids.
    std::uint16_t adjacency_row(int v) const { return rows_[static_cast<std::size_t>(v)]; }
    int degree(int v) const;

    bool has_isolated_vertices() const;
    /// Copy with isolated vertices removed and labels compacted.
    PatternGraph without_isolated_vertices() const;

    /// Preset name when built from a preset, otherwise "custom-v<V>e<E>".
    const std::string& label() const { return label_; }

private:
    int vertex_count_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::uint16_t> rows_;
    std::string label_;
};

/// Canonical form packed into 64 bits: vertex count in the high byte, the
/// upper-triangle adjacency bits (column-major pair order, lexicographically
/// minimized over all vertex permutations) below. Equal codes iff isomorphic.
using CanonicalCode = std::uint64_t;

CanonicalCode canonicalize(const PatternGraph& g);
std::string canonical_code_hex(CanonicalCode code);
bool isomorphic(const PatternGraph& a, const PatternGraph& b);

/// |Aut(g)|: adjacency-preserving vertex permutations, by pruned search.
std::uint64_t automorphism_count(const PatternGraph& g);

/// One isomorphism class of edge-subsets of a pattern.
struct SubgraphClass {
    PatternGraph representative;  // isolated vertices stripped
    int vertex_count;
    int edge_count;
    CanonicalCode code;
    std::uint64_t subset_count;  // how many edge subsets of the pattern land here
};

/// All isomorphism classes of edge-subsets with >= 1 edge, the pattern itself
/// included, sorted by (vertex_count, edge_count, code). Every nonempty edge
/// subset of the pattern is isomorphic to exactly one entry.
std::vector<SubgraphClass> subgraph_catalog(const PatternGraph& pattern);

struct PsiResult {
    double psi_min = 0.0;
    std::size_t argmin = 0;          // index into the catalog ordering
    std::vector<double> per_class;   // n^{v_H} * p^{e_H} per class
};

/// psi = min over catalog classes of n^{v_H} p^{e_H}. Requires p in (0,1]
/// (p = 0 would send psi to 0 and break every downstream division) and
/// n >= the largest class vertex count. Ties resolve to the earliest class
/// in the catalog order, i.e. smallest (v_H, e_H).
PsiResult psi(const std::vector<SubgraphClass>& catalog, int n, double p);
double psi_min(const PatternGraph& pattern, int n, double p);

}  // namespace subclt

#include "subclt/pattern.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "subclt/errors.hpp"

namespace subclt {

namespace {

// Column-major upper-triangle bit position for the pair (a, b), a < b:
// (0,1), (0,2), (1,2), (0,3), ... Placing (0,1) at the most significant bit
// makes the numeric order of packed codes equal to the lexicographic order
// of the pair sequence, and it means that once vertices 0..i are placed all
// determined bits form a contiguous high prefix.
inline int pair_slot(int a, int b) { return b * (b - 1) / 2 + a; }

inline std::uint64_t pair_bit(int a, int b, int total_bits) {
    return std::uint64_t{1} << (total_bits - 1 - pair_slot(a, b));
}

}  // namespace

PatternGraph::PatternGraph(int vertex_count, std::vector<std::pair<int, int>> edges,
                           int vertex_cap)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
    if (vertex_cap < 2 || vertex_cap > kMaxVertices) {
        throw SizeError("PatternGraph: vertex cap must lie in [2, " +
                        std::to_string(kMaxVertices) + "]");
    }
    if (vertex_count_ < 1) {
        throw ConfigError("PatternGraph: vertex count must be positive");
    }
    if (vertex_count_ > vertex_cap) {
        throw SizeError("PatternGraph: " + std::to_string(vertex_count_) +
                        " vertices exceeds the cap of " + std::to_string(vertex_cap));
    }
    if (edges_.empty()) {
        throw ConfigError("PatternGraph: at least one edge is required");
    }
    for (auto& [u, v] : edges_) {
        if (u == v) {
            throw ConfigError("PatternGraph: self-loop at vertex " + std::to_string(u));
        }
        if (u > v) std::swap(u, v);
        if (u < 0 || v >= vertex_count_) {
            throw ConfigError("PatternGraph: edge (" + std::to_string(u) + "," +
                              std::to_string(v) + ") outside vertex range");
        }
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
        throw ConfigError("PatternGraph: duplicate edge");
    }
    rows_.assign(static_cast<std::size_t>(vertex_count_), 0);
    for (auto [u, v] : edges_) {
        rows_[static_cast<std::size_t>(u)] |= static_cast<std::uint16_t>(1u << v);
        rows_[static_cast<std::size_t>(v)] |= static_cast<std::uint16_t>(1u << u);
    }
    label_ = "custom-v" + std::to_string(vertex_count_) + "e" + std::to_string(edge_count());
}

PatternGraph PatternGraph::preset(const std::string& name) {
    PatternGraph g = [&]() -> PatternGraph {
        if (name == "triangle") return PatternGraph(3, {{0, 1}, {0, 2}, {1, 2}});
        if (name == "edge") return PatternGraph(2, {{0, 1}});
        if (name == "path2") return PatternGraph(3, {{0, 1}, {1, 2}});
        if (name == "c4") return PatternGraph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
        if (name == "k4") {
            return PatternGraph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
        }
        throw ConfigError("unknown pattern preset \"" + name +
                          "\" (known: triangle, edge, path2, c4, k4)");
    }();
    g.label_ = name;
    return g;
}

const std::vector<std::string>& PatternGraph::preset_names() {
    static const std::vector<std::string> names = {"triangle", "edge", "path2", "c4", "k4"};
    return names;
}

PatternGraph PatternGraph::from_edge_list(const std::string& text, int vertex_cap) {
    std::vector<std::pair<int, int>> edges;
    int max_vertex = -1;
    std::istringstream lines(text);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        long u, v;
        if (!(fields >> u)) {
            if (line.find_first_not_of(" \t\r\n") != std::string::npos) {
                throw ConfigError("edge list line " + std::to_string(line_no) +
                                  ": expected two vertex ids");
            }
            continue;  // blank or comment-only line
        }
        if (!(fields >> v)) {
            throw ConfigError("edge list line " + std::to_string(line_no) +
                              ": expected two vertex ids");
        }
        std::string extra;
        if (fields >> extra) {
            throw ConfigError("edge list line " + std::to_string(line_no) +
                              ": trailing token \"" + extra + "\"");
        }
        if (u < 0 || v < 0 || u > kMaxVertices || v > kMaxVertices) {
            throw ConfigError("edge list line " + std::to_string(line_no) +
                              ": vertex id out of range");
        }
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
        max_vertex = std::max({max_vertex, static_cast<int>(u), static_cast<int>(v)});
    }
    if (edges.empty()) {
        throw ConfigError("edge list: no edges found");
    }
    return PatternGraph(max_vertex + 1, std::move(edges), vertex_cap);
}

bool PatternGraph::has_edge(int u, int v) const {
    if (u < 0 || v < 0 || u >= vertex_count_ || v >= vertex_count_ || u == v) return false;
    return (rows_[static_cast<std::size_t>(u)] >> v) & 1u;
}

int PatternGraph::degree(int v) const {
    return std::popcount(static_cast<unsigned>(rows_[static_cast<std::size_t>(v)]));
}

bool PatternGraph::has_isolated_vertices() const {
    for (int v = 0; v < vertex_count_; ++v) {
        if (rows_[static_cast<std::size_t>(v)] == 0) return true;
    }
    return false;
}

PatternGraph PatternGraph::without_isolated_vertices() const {
    if (!has_isolated_vertices()) return *this;
    std::vector<int> relabel(static_cast<std::size_t>(vertex_count_), -1);
    int next = 0;
    for (int v = 0; v < vertex_count_; ++v) {
        if (rows_[static_cast<std::size_t>(v)] != 0) relabel[static_cast<std::size_t>(v)] = next++;
    }
    std::vector<std::pair<int, int>> mapped;
    mapped.reserve(edges_.size());
    for (auto [u, v] : edges_) {
        mapped.emplace_back(relabel[static_cast<std::size_t>(u)],
                            relabel[static_cast<std::size_t>(v)]);
    }
    PatternGraph g(next, std::move(mapped));
    g.label_ = label_;
    return g;
}

CanonicalCode canonicalize(const PatternGraph& g) {
    const int v = g.vertex_count();
    const int total_bits = v * (v - 1) / 2;
    std::uint64_t best = ~std::uint64_t{0};
    std::array<int, PatternGraph::kMaxVertices> perm{};
    std::array<bool, PatternGraph::kMaxVertices> used{};

    // Depth-first minimization: position i receives an original vertex; the
    // bits for pairs (0,i)..(i-1,i) become determined, forming a high prefix
    // of the packed code, so branches whose prefix already exceeds the best
    // known code can be cut.
    auto recurse = [&](auto&& self, int position, std::uint64_t bits) -> void {
        if (position == v) {
            best = std::min(best, bits);
            return;
        }
        int determined = (position + 1) * position / 2;
        std::uint64_t prefix_mask =
            determined == 0
                ? 0
                : (~std::uint64_t{0} << (total_bits - determined)) &
                      ((total_bits >= 64) ? ~std::uint64_t{0}
                                          : ((std::uint64_t{1} << total_bits) - 1));
        for (int candidate = 0; candidate < v; ++candidate) {
            if (used[static_cast<std::size_t>(candidate)]) continue;
            std::uint64_t next_bits = bits;
            for (int a = 0; a < position; ++a) {
                if (g.has_edge(perm[static_cast<std::size_t>(a)], candidate)) {
                    next_bits |= pair_bit(a, position, total_bits);
                }
            }
            if ((next_bits & prefix_mask) > (best & prefix_mask)) continue;
            perm[static_cast<std::size_t>(position)] = candidate;
            used[static_cast<std::size_t>(candidate)] = true;
            self(self, position + 1, next_bits);
            used[static_cast<std::size_t>(candidate)] = false;
        }
    };
    recurse(recurse, 0, 0);
    return (static_cast<std::uint64_t>(v) << 48) | best;
}

std::string canonical_code_hex(CanonicalCode code) {
    char buffer[19];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(code));
    return buffer;
}

bool isomorphic(const PatternGraph& a, const PatternGraph& b) {
    if (a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count()) return false;
    return canonicalize(a) == canonicalize(b);
}

std::uint64_t automorphism_count(const PatternGraph& g) {
    const int v = g.vertex_count();
    std::uint64_t count = 0;
    std::array<int, PatternGraph::kMaxVertices> image{};
    std::array<bool, PatternGraph::kMaxVertices> used{};
    auto recurse = [&](auto&& self, int vertex) -> void {
        if (vertex == v) {
            ++count;
            return;
        }
        for (int candidate = 0; candidate < v; ++candidate) {
            if (used[static_cast<std::size_t>(candidate)]) continue;
            if (g.degree(vertex) != g.degree(candidate)) continue;
            bool consistent = true;
            for (int a = 0; a < vertex; ++a) {
                if (g.has_edge(a, vertex) !=
                    g.has_edge(image[static_cast<std::size_t>(a)], candidate)) {
                    consistent = false;
                    break;
                }
            }
            if (!consistent) continue;
            image[static_cast<std::size_t>(vertex)] = candidate;
            used[static_cast<std::size_t>(candidate)] = true;
            self(self, vertex + 1);
            used[static_cast<std::size_t>(candidate)] = false;
        }
    };
    recurse(recurse, 0);
    return count;
}

std::vector<SubgraphClass> subgraph_catalog(const PatternGraph& pattern) {
    const PatternGraph base = pattern.without_isolated_vertices();
    const auto& edges = base.edges();
    const int e = base.edge_count();
    if (e > 24) {
        throw SizeError("subgraph_catalog: " + std::to_string(e) +
                        " edges means 2^" + std::to_string(e) +
                        " subsets; refusing beyond 24 edges");
    }
    std::map<CanonicalCode, SubgraphClass> classes;
    for (std::uint32_t subset = 1; subset < (1u << e); ++subset) {
        std::vector<std::pair<int, int>> chosen;
        for (int i = 0; i < e; ++i) {
            if ((subset >> i) & 1u) chosen.push_back(edges[static_cast<std::size_t>(i)]);
        }
        PatternGraph sub =
            PatternGraph(base.vertex_count(), std::move(chosen)).without_isolated_vertices();
        CanonicalCode code = canonicalize(sub);
        auto it = classes.find(code);
        if (it == classes.end()) {
            classes.emplace(code, SubgraphClass{sub, sub.vertex_count(), sub.edge_count(),
                                                code, 1});
        } else {
            ++it->second.subset_count;
        }
    }
    std::vector<SubgraphClass> result;
    result.reserve(classes.size());
    for (auto& [code, cls] : classes) result.push_back(std::move(cls));
    std::sort(result.begin(), result.end(), [](const SubgraphClass& a, const SubgraphClass& b) {
        return std::tuple(a.vertex_count, a.edge_count, a.code) <
               std::tuple(b.vertex_count, b.edge_count, b.code);
    });
    return result;
}

PsiResult psi(const std::vector<SubgraphClass>& catalog, int n, double p) {
    if (catalog.empty()) {
        throw ConfigError("psi: empty catalog");
    }
    if (p <= 0.0) {
        throw DegenerateError("psi: p = 0 sends psi to 0, which breaks downstream divisions");
    }
    if (p > 1.0) {
        throw ConfigError("psi: p must lie in (0, 1]");
    }
    int max_vertices = 0;
    for (const auto& cls : catalog) max_vertices = std::max(max_vertices, cls.vertex_count);
    if (n < max_vertices) {
        throw ConfigError("psi: n = " + std::to_string(n) +
                          " is smaller than the pattern on " + std::to_string(max_vertices) +
                          " vertices");
    }
    PsiResult result;
    result.per_class.reserve(catalog.size());
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        double value = std::pow(static_cast<double>(n), catalog[i].vertex_count) *
                       std::pow(p, catalog[i].edge_count);
        result.per_class.push_back(value);
        // Catalog order is (v_H, e_H, code), so keeping the first strict
        // minimum applies the lexicographic (v_H, e_H) tie-break.
        if (i == 0 || value < result.psi_min) {
            result.psi_min = value;
            result.argmin = i;
        }
    }
    return result;
}

double psi_min(const PatternGraph& pattern, int n, double p) {
    return psi(subgraph_catalog(pattern), n, p).psi_min;
}

}  // namespace subclt

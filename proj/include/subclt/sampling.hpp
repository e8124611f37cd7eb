#pragma once

#include <cstdint>

#include "subclt/copies.hpp"
#include "subclt/rng.hpp"

namespace subclt {

/// Stream domain for edge indicators. Every consumer of G(n,p) draws — the
/// Monte Carlo lab and the A/B estimators — goes through
/// sample_configuration, so replicate r of a given seed is the same graph
/// everywhere and batches can be replayed or partitioned freely.
inline constexpr std::uint32_t kDomainEdges = 0;

/// One G(n,p) draw into `config`: edge e present iff the e-th 64-bit word of
/// stream (seed, replicate, edge domain) falls below `threshold` (from
/// bernoulli_threshold). Exactly edge_count() words are consumed.
inline void sample_configuration(EdgeConfiguration& config, std::uint64_t seed,
                                 std::uint64_t replicate, std::uint64_t threshold) {
    RandomStream stream(seed, replicate, kDomainEdges);
    config.clear();
    const int edges = config.edge_count();
    for (int e = 0; e < edges; ++e) {
        if (stream.next_u64() < threshold) config.set(e);
    }
}

}  // namespace subclt

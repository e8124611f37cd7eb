#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "subclt/errors.hpp"

namespace subclt {

/**
 * Philox4x32-10 counter-based generator (Salmon/Moraes/Dror/Shaw constants).
 *
 * A pure function from (key, counter) to 128 random bits. Streams are laid
 * out as counter = (replicate lo, replicate hi, block, domain), so any block
 * of any replicate can be generated independently of every other one:
 * partitioned sampling is order-independent and bit-reproducible for a fixed
 * seed no matter how work is split across threads.
 */
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::array<std::uint32_t, 4> counter) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = std::uint64_t{0xD2511F53u} * counter[0];
        std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * counter[2];
        counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ k0,
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ k1,
                   static_cast<std::uint32_t>(p0)};
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return counter;
}

/// Sequential view of one (seed, replicate, domain) stream: 64-bit words in
/// block order. Distinct domains give independent streams for the same
/// replicate, which keeps e.g. edge sampling and any auxiliary draws apart.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t replicate, std::uint32_t domain)
        : seed_(seed), replicate_(replicate), domain_(domain) {}

    std::uint64_t next_u64() {
        if (available_ == 0) {
            buffer_ = philox4x32(seed_, {static_cast<std::uint32_t>(replicate_),
                                         static_cast<std::uint32_t>(replicate_ >> 32),
                                         block_, domain_});
            ++block_;
            available_ = 2;
        }
        int slot = 2 - available_;
        --available_;
        return (std::uint64_t{buffer_[2 * slot + 1]} << 32) | buffer_[2 * slot];
    }

    /// Uniform in [0,1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t seed_;
    std::uint64_t replicate_;
    std::uint32_t domain_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int available_ = 0;
};

/// Threshold such that (u64 word < threshold) happens with probability p up
/// to one part in 2^64. Quantization at that level is far below Monte Carlo
/// noise at any supported sample count.
inline std::uint64_t bernoulli_threshold(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw DegenerateError("bernoulli_threshold: p must lie strictly between 0 and 1");
    }
    long double scaled = static_cast<long double>(p) * 18446744073709551616.0L;
    if (scaled < 1.0L) return 1;
    if (scaled > 18446744073709551615.0L) return ~std::uint64_t{0};
    return static_cast<std::uint64_t>(scaled);
}

}  // namespace subclt

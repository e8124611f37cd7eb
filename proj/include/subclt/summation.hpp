#pragma once

#include <complex>

namespace subclt {

/// Kahan compensated accumulator. All exhaustive sweeps and Monte Carlo
/// reductions go through this so that results are deterministic to ~1e-12
/// regardless of how the term stream is partitioned.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

struct KahanComplexSum {
    KahanSum re, im;

    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

}  // namespace subclt

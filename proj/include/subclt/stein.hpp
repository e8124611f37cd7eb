#pragma once

#include <complex>
#include <functional>
#include <string>

namespace subclt {

/// Standard normal distribution function and density at one point.
struct NormalPoint {
    double cdf = 0.0;
    double density = 0.0;
};

/// Phi with absolute error ~1e-16 (complementary-error-function evaluation)
/// and the Gaussian density.
NormalPoint std_normal(double x);

/**
 * The difference t -> phi_W(t) - e^{-t^2/2} between a model characteristic
 * function and the standard normal one, plus provenance. The evaluator may be
 * exact (oracle models) or empirical (Monte Carlo), recorded in `source`; the
 * per-point statistical error of an empirical evaluator is in
 * `standard_error` (0 for exact sources).
 */
struct CfDifference {
    std::function<std::complex<double>(double)> eval;
    std::string source;
    double standard_error = 0.0;
};

/// Bound on |phi_W(t) - e^{-t^2/2}| from the comparison ODE:
/// (A/3)|t|^3 e^{-t^2/4} + 2B|t|. Only proven for |t| <= 1/(2A), which is
/// enforced: outside that range a range error is thrown.
double ode_bound(double a, double b, double t);

/// Kolmogorov-distance bound from (A, B):
/// (4/(3 sqrt(pi)) + 24 sqrt(2)/(pi sqrt(pi))) * A + (2/pi) * B/A.
/// May exceed 1 (then vacuous but still a valid upper bound). Requires A > 0.
double st_bound(double a, double b);

struct SmoothingResult {
    double bound = 0.0;          // integral_part + tail_part
    double integral_part = 0.0;  // (1/pi) * integral of |diff(t)/t| over [-T, T]
    double tail_part = 0.0;      // 24 b / (pi T)
    double t_limit = 0.0;        // the T used
    double density_bound = 0.0;  // the b used
    double quadrature_error = 0.0;
    double propagated_se = 0.0;  // statistical part, empirical sources only
};

/// Berry-Esseen smoothing bound: (1/pi) Int_{-T}^{T} |diff(t)/t| dt + 24b/(pi T),
/// with b a bound on the target density (default the normal maximum
/// (2 pi)^{-1/2}). The integrand is extended by continuity with value 0 at
/// t = 0. Adaptive Simpson quadrature, tolerance tuned for exact sources.
SmoothingResult smoothing_bound(const CfDifference& diff, double t_limit, double density_bound);
SmoothingResult smoothing_bound(const CfDifference& diff, double t_limit);

}  // namespace subclt

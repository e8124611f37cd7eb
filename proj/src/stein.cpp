#include "subclt/stein.hpp"

#include <cmath>
#include <numbers>

#include "subclt/errors.hpp"

namespace subclt {

namespace {

// All constants derive from pi / sqrt at runtime; no hard-coded decimals.
const double kPi = std::numbers::pi;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

struct SimpsonState {
    const std::function<double(double)>* f = nullptr;
    double tolerance = 0.0;
    double error_estimate = 0.0;
    int max_depth = 0;
};

double adaptive_simpson(SimpsonState& state, double a, double fa, double b, double fb, double m,
                        double fm, double whole, double tolerance, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = (*state.f)(lm);
    const double frm = (*state.f)(rm);
    const double h = b - a;
    const double left = (h / 12.0) * (fa + 4.0 * flm + fm);
    const double right = (h / 12.0) * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tolerance) {
        state.error_estimate += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    if (depth >= state.max_depth) {
        throw QuadratureError("smoothing_bound: adaptive quadrature did not converge "
                              "(depth limit reached)");
    }
    return adaptive_simpson(state, a, fa, m, fm, lm, flm, left, 0.5 * tolerance, depth + 1) +
           adaptive_simpson(state, m, fm, b, fb, rm, frm, right, 0.5 * tolerance, depth + 1);
}

double integrate(SimpsonState& state, double a, double b, double tolerance) {
    const double fa = (*state.f)(a);
    const double fb = (*state.f)(b);
    const double m = 0.5 * (a + b);
    const double fm = (*state.f)(m);
    const double whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
    return adaptive_simpson(state, a, fa, b, fb, m, fm, whole, tolerance, 0);
}

}  // namespace

NormalPoint std_normal(double x) {
    if (!std::isfinite(x)) {
        throw ConfigError("std_normal: x must be finite");
    }
    NormalPoint result;
    result.cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    result.density = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    return result;
}

double ode_bound(double a, double b, double t) {
    if (!(a > 0.0)) {
        throw ConfigError("ode_bound: A must be positive");
    }
    if (b < 0.0) {
        throw ConfigError("ode_bound: B must be nonnegative");
    }
    const double at = std::abs(t);
    if (at > 1.0 / (2.0 * a)) {
        throw RangeError("ode_bound: |t| exceeds the proven validity range 1/(2A)");
    }
    return (a / 3.0) * at * at * at * std::exp(-t * t / 4.0) + 2.0 * b * at;
}

double st_bound(double a, double b) {
    if (!(a > 0.0)) {
        throw ConfigError("st_bound: A must be positive");
    }
    if (b < 0.0) {
        throw ConfigError("st_bound: B must be nonnegative");
    }
    const double sqrt_pi = std::sqrt(kPi);
    const double constant = 4.0 / (3.0 * sqrt_pi) + 24.0 * std::numbers::sqrt2 / (kPi * sqrt_pi);
    return constant * a + (2.0 / kPi) * (b / a);
}

SmoothingResult smoothing_bound(const CfDifference& diff, double t_limit, double density_bound) {
    if (!(t_limit > 0.0)) {
        throw ConfigError("smoothing_bound: T must be positive");
    }
    if (!(density_bound > 0.0)) {
        throw ConfigError("smoothing_bound: the density bound b must be positive");
    }
    if (!diff.eval) {
        throw ConfigError("smoothing_bound: empty difference evaluator");
    }

    std::function<double(double)> integrand = [&diff](double t) {
        if (t == 0.0) return 0.0;  // diff vanishes at 0; extended by continuity
        return std::abs(diff.eval(t)) / std::abs(t);
    };
    SimpsonState state;
    state.f = &integrand;
    state.max_depth = 48;

    SmoothingResult result;
    result.t_limit = t_limit;
    result.density_bound = density_bound;
    // Split at 0 so the removable singularity sits on a panel edge.
    const double tolerance = 1e-10 * std::max(1.0, t_limit);
    double integral = integrate(state, -t_limit, 0.0, tolerance) +
                      integrate(state, 0.0, t_limit, tolerance);
    result.integral_part = integral / kPi;
    result.tail_part = 24.0 * density_bound / (kPi * t_limit);
    result.bound = result.integral_part + result.tail_part;
    result.quadrature_error = state.error_estimate / kPi;
    if (diff.standard_error > 0.0) {
        // Conservative propagation of the per-point statistical error s: the
        // integrand error is at most s/|t|, and near 0 (where that estimate
        // blows up while the true error stays bounded) at most 2, switching
        // at |t| = s/2.
        const double s = diff.standard_error;
        const double t0 = std::min(0.5 * s, t_limit);
        double propagated = 2.0 * (2.0 * t0);
        if (t_limit > t0) propagated += 2.0 * s * std::log(t_limit / t0);
        result.propagated_se = propagated / kPi;
    }
    return result;
}

SmoothingResult smoothing_bound(const CfDifference& diff, double t_limit) {
    return smoothing_bound(diff, t_limit, kInvSqrt2Pi);
}

}  // namespace subclt

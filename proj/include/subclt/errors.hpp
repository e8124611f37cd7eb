#pragma once

#include <stdexcept>
#include <string>

namespace subclt {

/// Invalid user input: malformed pattern, out-of-range parameter, bad config.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

/// Input exceeds a hard structural cap (pattern vertex cap, edge-universe cap).
class SizeError : public ConfigError {
public:
    explicit SizeError(const std::string& message) : ConfigError(message) {}
};

/// A probability parameter makes the model degenerate (p = 0 or p = 1 where
/// a nondegenerate W is required, or psi = 0 breaking downstream divisions).
class DegenerateError : public ConfigError {
public:
    explicit DegenerateError(const std::string& message) : ConfigError(message) {}
};

/// An argument lies outside the range on which a bound is proven valid.
class RangeError : public ConfigError {
public:
    explicit RangeError(const std::string& message) : ConfigError(message) {}
};

/// Refusal to start a computation whose upfront size estimate exceeds a
/// configured budget. Nothing is partially computed when this is thrown.
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& message) : std::runtime_error(message) {}
};

/// Two independent computations of the same quantity disagree beyond the
/// tolerance the code promises.
class ConsistencyError : public std::runtime_error {
public:
    explicit ConsistencyError(const std::string& message) : std::runtime_error(message) {}
};

/// A verification assertion (identity residual, inequality check) failed.
class VerifyError : public std::runtime_error {
public:
    explicit VerifyError(const std::string& message) : std::runtime_error(message) {}
};

/// Too few usable data points survive filtering to produce the requested fit.
class InsufficientDataError : public std::runtime_error {
public:
    explicit InsufficientDataError(const std::string& message) : std::runtime_error(message) {}
};

/// Adaptive quadrature failed to reach its tolerance within the depth limit.
class QuadratureError : public std::runtime_error {
public:
    explicit QuadratureError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace subclt

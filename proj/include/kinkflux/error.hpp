#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kinkflux {

/// Invalid argument to a library call (bad derivative order, non-finite input, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function (t <= 0, negative time, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inconsistent or unresolvable configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time-grid problems: duplicates, missing points, non-positive definite covariance.
class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integrator left the bounded regime. Carries the step index and physical time.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(std::size_t step, double time, double sup_norm)
        : std::runtime_error("profile sup-norm " + std::to_string(sup_norm) + " exceeded bound at step " +
                             std::to_string(step) + " (t = " + std::to_string(time) + ")"),
          step_(step), time_(time) {}
    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

/// Picard iteration stopped contracting.
class HorizonTooLargeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear fixed-point iteration did not converge.
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Center search found no sign change of the orthogonality residual.
class NotNearFrontError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Profile is farther than the tube radius from the front manifold.
class OutOfTubeError : public std::runtime_error {
public:
    OutOfTubeError(double distance, double radius)
        : std::runtime_error("distance to front manifold " + std::to_string(distance) + " exceeds tube radius " +
                             std::to_string(radius)),
          distance_(distance) {}
    double distance() const noexcept { return distance_; }

private:
    double distance_;
};

/// Quadrature could not reach its tolerance within budget; the estimate is still reported.
class PrecisionError : public std::runtime_error {
public:
    PrecisionError(const std::string& what, double estimate, double error)
        : std::runtime_error(what), estimate_(estimate), error_(error) {}
    double estimate() const noexcept { return estimate_; }
    double error() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

/// Experiment design cannot support the requested fit.
class DesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kinkflux

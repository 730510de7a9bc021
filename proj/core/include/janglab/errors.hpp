#pragma once

#include <stdexcept>
#include <string>

namespace janglab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of the operation (r <= 0, |k| > 1, n out of range, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A metric that should be Riemannian stopped being positive definite.
class DegenerateMetricError : public Error {
public:
    using Error::Error;
};

/// Refinement, quadrature or fit did not meet its accuracy target.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, std::string diagnostics = {})
        : Error(what), diagnostics_(std::move(diagnostics)) {}
    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

/// A barrier profile reached |k| = 1 away from the anchor.
class BarrierFailure : public Error {
public:
    BarrierFailure(const std::string& what, double radius) : Error(what), radius_(radius) {}
    double radius() const noexcept { return radius_; }

private:
    double radius_;
};

/// Newton iteration stagnated or hit its iteration cap.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, int iterations, double last_residual)
        : Error(what), iterations_(iterations), last_residual_(last_residual) {}
    int iterations() const noexcept { return iterations_; }
    double last_residual() const noexcept { return last_residual_; }

private:
    int iterations_;
    double last_residual_;
};

/// Configuration or input rejected before any numerics ran.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace janglab

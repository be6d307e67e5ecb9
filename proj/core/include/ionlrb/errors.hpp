// errors.hpp — error types thrown by the core modules

#pragma once

#include <stdexcept>
#include <string>

namespace ionlrb {

struct SizeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// zeta-estimate argument <= 1: the series does not converge
struct DivergentEstimateError : std::domain_error {
    using std::domain_error::domain_error;
};

struct ConvergenceError : std::runtime_error {
    double residual = 0.0;
    ConvergenceError(const std::string& msg, double res)
        : std::runtime_error(msg), residual(res) {}
};

struct SingularCouplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnstableCrystalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResonantDetuningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// time grid too coarse for the fastest frequency; carries the required step
struct ResolutionError : std::runtime_error {
    double required_dt = 0.0;
    ResolutionError(const std::string& msg, double dt)
        : std::runtime_error(msg), required_dt(dt) {}
};

struct QuadratureToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotApplicableError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace ionlrb

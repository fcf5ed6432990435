#pragma once

#include <stdexcept>
#include <string>

namespace tfw {

/// Invalid parameter or argument; the message names the violated constraint.
struct DomainError : std::invalid_argument {
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// No asymptotic law covers the requested (regime, end) pair.
struct UncoveredRegime : std::domain_error {
    explicit UncoveredRegime(const std::string& what) : std::domain_error(what) {}
};

/// The ODE integrator could not continue (step collapse or step budget).
struct IntegrationFailure : std::runtime_error {
    explicit IntegrationFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Query outside the computed range of a trajectory or profile.
struct RangeExceeded : std::out_of_range {
    explicit RangeExceeded(const std::string& what) : std::out_of_range(what) {}
};

/// The regularized bracket stopped shrinking before reaching its target gap.
struct BracketStall : std::runtime_error {
    BracketStall(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_gap(achieved) {}
    double achieved_gap;
};

/// Adaptive quadrature exhausted its refinement budget.
struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tfw

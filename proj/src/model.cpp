#include "tfw/model.hpp"

#include <cmath>
#include <sstream>

namespace tfw {

namespace {

constexpr double kCriticalBand = 1e-12;
constexpr double kUpsilonFloor = 1e-300;

// All closed-form constants are evaluated as exp of a log-combination so
// extreme exponents like 1/(mp-beta) cannot overflow intermediate powers.

std::string describe(const ModelParams& pr) {
    std::ostringstream os;
    os << "(m=" << pr.m << ", p=" << pr.p << ", beta=" << pr.beta
       << ", b=" << pr.b << ", k=" << pr.k << ")";
    return os.str();
}

AsymptoteSpec reaction_trajectory_law(const ModelParams& pr, End end) {
    const double ln_a = (pr.p / (1.0 + pr.p)) *
        std::log(pr.b * pr.m * (1.0 + pr.p) / (pr.p * (pr.m + pr.beta)));
    return {std::exp(ln_a), pr.p * (pr.m + pr.beta) / (1.0 + pr.p),
            end, Target::TrajectoryUpsilon, LawKind::ReactionBalance};
}

AsymptoteSpec wave_trajectory_law(const ModelParams& pr, End end) {
    return {pr.k, 1.0, end, Target::TrajectoryUpsilon, LawKind::Wave};
}

AsymptoteSpec critical_trajectory_law(const ModelParams& pr, End end) {
    const double ln_a = -pr.p * std::log(-pr.k / (pr.b * pr.m));
    return {std::exp(ln_a), pr.p * (pr.m + pr.beta - 1.0),
            end, Target::TrajectoryUpsilon, LawKind::CriticalCurve};
}

AsymptoteSpec reaction_profile_law(const ModelParams& pr, End end) {
    return {reaction_constant(pr), (1.0 + pr.p) / (pr.m * pr.p - pr.beta),
            end, Target::ProfilePhi, LawKind::ReactionBalance};
}

AsymptoteSpec wave_profile_law(const ModelParams& pr, End end) {
    const double mp1 = pr.m * pr.p - 1.0;
    const double ln_a = (pr.p / mp1) * std::log(mp1 / (pr.m * pr.p)) +
                        std::log(pr.k) / mp1;
    return {std::exp(ln_a), pr.p / mp1, end, Target::ProfilePhi, LawKind::Wave};
}

AsymptoteSpec critical_profile_law(const ModelParams& pr, End end) {
    const double ln_a = std::log((1.0 - pr.beta) * (-pr.b / pr.k)) / (1.0 - pr.beta);
    return {std::exp(ln_a), 1.0 / (1.0 - pr.beta),
            end, Target::ProfilePhi, LawKind::CriticalCurve};
}

// Selects the law kind covering (regime, end), or throws UncoveredRegime.
// The reaction-balance law holds at the origin in the Sub regime and at
// infinity in the Super regime, independent of the sign of k; the wave and
// critical-curve laws cover the opposite end for k > 0 and k < 0.
LawKind law_for(const ModelParams& pr, End end) {
    const bool sub = pr.balance_gap() < 0.0;
    const bool reaction_end = (sub && end == End::Origin) ||
                              (!sub && end == End::Infinity);
    if (reaction_end) return LawKind::ReactionBalance;
    if (pr.k > 0.0) return LawKind::Wave;
    if (pr.k < 0.0) return LawKind::CriticalCurve;
    throw UncoveredRegime("no asymptotic law for k = 0 at the " +
                          std::string(to_string(end)) +
                          " end in the " + (sub ? "sub" : "super") +
                          "-balance regime " + describe(pr));
}

} // namespace

double AsymptoteSpec::eval(double x) const {
    return std::exp(std::log(constant) + exponent * std::log(x));
}

double AsymptoteSpec::inverse(double y) const {
    return std::exp((std::log(y) - std::log(constant)) / exponent);
}

ModelParams validate_params(double m, double p, double beta, double b, double k) {
    const ModelParams pr{m, p, beta, b, k};
    auto fail = [&](const std::string& msg) {
        throw DomainError(msg + " " + describe(pr));
    };
    if (!(std::isfinite(m) && std::isfinite(p) && std::isfinite(beta) &&
          std::isfinite(b) && std::isfinite(k)))
        fail("parameters must be finite");
    if (!(m > 0.0)) fail("m must be positive");
    if (!(p > 0.0)) fail("p must be positive");
    if (!(b > 0.0)) fail("b must be positive");
    if (!(beta > 0.0 && beta < 1.0)) fail("beta must lie in (0,1) exclusive");
    if (!(m * p > 1.0)) fail("mp <= 1: slow diffusion requires mp > 1");
    if (std::fabs(pr.balance_gap()) <= kCriticalBand)
        fail("critical balance p*(m+beta) = 1+p is not supported");
    return pr;
}

Regime classify_regime(const ModelParams& params) {
    Regime r;
    r.balance = params.balance_gap() < 0.0 ? Balance::Sub : Balance::Super;
    r.speed_sign = params.k > 0.0   ? SpeedSign::Positive
                   : params.k < 0.0 ? SpeedSign::Negative
                                    : SpeedSign::Zero;
    return r;
}

double phase_rhs(const ModelParams& params, double theta, double upsilon) {
    if (!(theta > 0.0))
        throw DomainError("phase_rhs requires theta > 0");
    if (!(upsilon > 0.0))
        throw DomainError("phase_rhs requires upsilon > 0");
    const double u = std::max(upsilon, kUpsilonFloor);
    const double ln_term = std::log(params.b * params.m) +
                           (params.m + params.beta - 1.0) * std::log(theta) -
                           std::log(u) / params.p;
    return params.k + std::exp(ln_term);
}

double critical_curve(const ModelParams& params, double theta) {
    if (!(params.k < 0.0))
        throw DomainError("critical_curve requires k < 0");
    if (!(theta > 0.0))
        throw DomainError("critical_curve requires theta > 0");
    const double ln_u = -params.p *
        (std::log(-params.k / (params.b * params.m)) +
         (1.0 - params.m - params.beta) * std::log(theta));
    return std::exp(ln_u);
}

AsymptoteSpec trajectory_asymptote(const ModelParams& params, End end) {
    switch (law_for(params, end)) {
        case LawKind::ReactionBalance: return reaction_trajectory_law(params, end);
        case LawKind::Wave:            return wave_trajectory_law(params, end);
        case LawKind::CriticalCurve:   return critical_trajectory_law(params, end);
    }
    throw UncoveredRegime("unreachable");
}

AsymptoteSpec profile_asymptote(const ModelParams& params, End end) {
    switch (law_for(params, end)) {
        case LawKind::ReactionBalance: return reaction_profile_law(params, end);
        case LawKind::Wave:            return wave_profile_law(params, end);
        case LawKind::CriticalCurve:   return critical_profile_law(params, end);
    }
    throw UncoveredRegime("unreachable");
}

double reaction_constant(const ModelParams& pr) {
    const double mpb = pr.m * pr.p - pr.beta;
    const double ln_c = (std::log(pr.b) + (1.0 + pr.p) * std::log(mpb) -
                         pr.p * std::log(pr.m * (1.0 + pr.p)) -
                         std::log(pr.p * (pr.m + pr.beta))) / mpb;
    return std::exp(ln_c);
}

const char* to_string(SpeedSign s) {
    switch (s) {
        case SpeedSign::Negative: return "negative";
        case SpeedSign::Zero:     return "zero";
        case SpeedSign::Positive: return "positive";
    }
    return "?";
}

const char* to_string(Balance b) {
    return b == Balance::Sub ? "sub" : "super";
}

const char* to_string(End e) {
    return e == End::Origin ? "origin" : "infinity";
}

const char* to_string(Target t) {
    return t == Target::TrajectoryUpsilon ? "trajectory" : "profile";
}

const char* to_string(LawKind l) {
    switch (l) {
        case LawKind::ReactionBalance: return "reaction-balance";
        case LawKind::Wave:            return "wave";
        case LawKind::CriticalCurve:   return "critical-curve";
    }
    return "?";
}

} // namespace tfw

#pragma once

#include <string>

#include "tfw/errors.hpp"

namespace tfw {

/// Parameters of the traveling-wave problem for the doubly degenerate
/// filtration equation  u_t = (|(u^m)_x|^{p-1} (u^m)_x)_x - b u^beta,
/// with the wave ansatz u(x,t) = phi(k t - x).
///
/// Valid parameters satisfy m, p, b > 0, 0 < beta < 1, m*p > 1 (slow
/// diffusion, finite propagation speed) and p*(m+beta) != 1+p (the two
/// balance regimes exclude equality). Use validate_params() to construct.
struct ModelParams {
    double m;    ///< diffusion nonlinearity exponent
    double p;    ///< gradient nonlinearity exponent
    double beta; ///< absorption exponent, in (0,1)
    double b;    ///< absorption coefficient, > 0
    double k;    ///< wave speed (any sign)

    /// p*(m+beta) - (1+p); negative in the Sub regime, positive in Super.
    double balance_gap() const { return p * (m + beta) - (1.0 + p); }
};

enum class SpeedSign { Negative, Zero, Positive };

/// Balance between absorption and the two degeneracies:
/// Sub means p*(m+beta) < 1+p, Super means p*(m+beta) > 1+p.
enum class Balance { Sub, Super };

struct Regime {
    SpeedSign speed_sign;
    Balance balance;
};

enum class End { Origin, Infinity };
enum class Target { TrajectoryUpsilon, ProfilePhi };

/// Which closed-form law a power-law asymptote comes from.
enum class LawKind { ReactionBalance, Wave, CriticalCurve };

/// Power law A * X^q valid at one end of the trajectory Upsilon(Theta)
/// or of the profile phi(z).
struct AsymptoteSpec {
    double constant; ///< A (> 0 in every covered regime)
    double exponent; ///< q
    End end;
    Target target;
    LawKind law;

    /// Evaluates A * X^q in log space.
    double eval(double x) const;
    /// Inverse map: the X with A * X^q == y (requires q != 0).
    double inverse(double y) const;
};

/// Validates the raw tuple and returns it as ModelParams.
/// Throws DomainError naming the violated constraint. The balance
/// comparison rejects |p*(m+beta) - (1+p)| <= 1e-12 as critical.
ModelParams validate_params(double m, double p, double beta, double b, double k);

Regime classify_regime(const ModelParams& params);

/// Right side of the phase-plane equation
///   dUpsilon/dTheta = k + b*m*Theta^{m+beta-1} * Upsilon^{-1/p}.
/// Requires theta > 0 and upsilon > 0. Upsilon is floored at 1e-300
/// before taking the negative power.
double phase_rhs(const ModelParams& params, double theta, double upsilon);

/// The curve where phase_rhs vanishes, defined for k < 0:
///   Upsilon = (-k/(b*m) * Theta^{1-m-beta})^{-p}.
double critical_curve(const ModelParams& params, double theta);

/// The trajectory power law Upsilon ~ A*Theta^q covering the given end,
/// chosen by regime:
///   reaction balance  A = [b*m*(1+p)/(p*(m+beta))]^{p/(1+p)},
///                     q = p*(m+beta)/(1+p)
///   wave (k>0)        A = k, q = 1
///   critical (k<0)    A = (-k/(b*m))^{-p}, q = p*(m+beta-1)
/// Throws UncoveredRegime when no law covers the pair, e.g. k = 0 at
/// the end opposite the reaction-balance law.
AsymptoteSpec trajectory_asymptote(const ModelParams& params, End end);

/// The profile power law phi ~ A*z^q covering the given end:
///   reaction balance  A = C_* = [b*(mp-beta)^{1+p} /
///                     ((m*(1+p))^p * p*(m+beta))]^{1/(mp-beta)},
///                     q = (1+p)/(mp-beta)
///   wave (k>0)        A = ((mp-1)/(mp))^{p/(mp-1)} * k^{1/(mp-1)},
///                     q = p/(mp-1)
///   critical (k<0)    A = ((1-beta)*(-b/k))^{1/(1-beta)}, q = 1/(1-beta)
AsymptoteSpec profile_asymptote(const ModelParams& params, End end);

/// The reaction-balance constant C_* (defined for every valid parameter set).
double reaction_constant(const ModelParams& params);

const char* to_string(SpeedSign s);
const char* to_string(Balance b);
const char* to_string(End e);
const char* to_string(Target t);
const char* to_string(LawKind l);

} // namespace tfw

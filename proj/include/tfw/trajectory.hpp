#pragma once

#include <cstddef>
#include <vector>

#include "tfw/model.hpp"

namespace tfw {

enum class TrajectoryKind { Singular, RegularizedUpper, RegularizedLower };

/// Closed-form representation of a trajectory near its start, used below
/// the first grid point instead of stored samples:
///   value(theta) = c0 + c1*theta + c2*max(theta - offset, 0)^e2.
/// Singular trajectories carry the pure origin power law (c0 = c1 = 0,
/// offset = 0); the upper family carries eps + k*theta + c*theta^{m+beta};
/// the lower family carries the dominant-balance start in (theta - eps).
struct SeedLaw {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double e2 = 1.0;
    double offset = 0.0;

    double eval(double theta) const;
    bool pure_power() const { return c0 == 0.0 && c1 == 0.0 && offset == 0.0; }
};

/// Monotone sampled representation of the phase-plane trajectory
/// Upsilon(Theta). Grid values are strictly positive; the start value
/// (0 for singular/lower, eps for upper) lives in the analytic seed,
/// never in the grid. Evaluation between grid points is piecewise-linear
/// in log-log coordinates, which is exact on power-law stretches.
/// Immutable after construction.
struct Trajectory {
    ModelParams params{};
    TrajectoryKind kind = TrajectoryKind::Singular;
    double eps = 0.0; ///< regularization parameter (0 for singular)
    SeedLaw seed;
    double seed_end = 0.0; ///< == thetas.front(); analytic seed below this
    std::vector<double> thetas;
    std::vector<double> upsilons;
    std::vector<double> log_thetas;
    std::vector<double> log_upsilons;
    /// Set when continuation stopped before the requested Theta_max
    /// (k < 0, sub-balance: the post-crossing decay toward the critical
    /// curve eventually stalls an explicit integrator).
    bool truncated = false;

    double theta_max() const { return thetas.back(); }
    /// Smallest admissible query point (0 except for the lower family,
    /// whose solution starts at Theta = eps).
    double domain_lo() const {
        return kind == TrajectoryKind::RegularizedLower ? eps : 0.0;
    }
};

/// Evaluates the trajectory at theta. Exact at grid points; analytic seed
/// law below seed_end; log-log interpolation otherwise. Throws
/// RangeExceeded outside [domain_lo, theta_max] and DomainError for
/// negative theta.
double eval_trajectory(const Trajectory& traj, double theta);

struct SolveOptions {
    double max_rel_step = 1e-3;
    std::size_t max_steps = 6'000'000;
};

/// Solves the perturbed problem Upsilon(0) = eps up to theta_max.
/// Local error per unit step is kept below tol.
Trajectory solve_regularized_upper(const ModelParams& params, double eps,
                                   double theta_max, double tol,
                                   const SolveOptions& opt = {});

/// Solves the shifted problem Upsilon(eps) = 0 on [eps, theta_max].
/// The singular start is represented analytically by the dominant balance
/// Upsilon ~ [b*m*(1+p)/p * eps^{m+beta-1} * (theta-eps)]^{p/(1+p)}.
Trajectory solve_regularized_lower(const ModelParams& params, double eps,
                                   double theta_max, double tol,
                                   const SolveOptions& opt = {});

/// The singular trajectory through the origin. Integrates the
/// desingularized variable W = Upsilon^{(p+1)/p}, whose equation
///   dW/dTheta = ((1+p)/p) * (k * W^{1/(p+1)} + b*m*Theta^{m+beta-1})
/// has a continuous right side at W = 0, seeded on (0, Theta_0] by the
/// origin power law. For k = 0 the reaction-balance law is exact and is
/// used for seeding even though the asymptote selector reports it for
/// one end only.
Trajectory solve_trajectory(const ModelParams& params, double theta_max,
                            double tol, const SolveOptions& opt = {});

/// One epsilon level of the squeeze construction.
struct BracketPair {
    Trajectory lower;
    Trajectory upper;
    double eps; ///< the upper family's Upsilon offset at Theta = 0
};

struct BracketOptions {
    double eps0_factor = 1e-2; ///< first eps as a fraction of Upsilon(Theta_0)
    double ratio = 0.1;        ///< geometric refinement ratio
    std::size_t max_refinements = 12;
    double gap_target = 0.0;   ///< 0 = use the solve tolerance
    std::size_t grid_per_decade = 48;
};

struct BracketEvidence {
    std::vector<BracketPair> pairs;
    std::vector<double> gaps; ///< sup relative gap per refinement level
    double final_eps = 0.0;
    double final_gap = 0.0;
    /// Common comparison grid in Theta, spanning [Theta_0, theta_max].
    std::vector<double> grid;
};

/// Squeezes the singular trajectory between the lower and upper families
/// with eps decreasing geometrically until the sup relative gap over
/// [Theta_0, theta_max] falls below the target. The lower family's
/// Theta-offset at level j is placed where the origin law reaches the
/// level's Upsilon offset, so both families shrink together. Throws
/// BracketStall (carrying the achieved gap) if the gap stops shrinking
/// or the refinement cap is reached first.
BracketEvidence bracket_trajectory(const ModelParams& params, double theta_max,
                                   double tol, const BracketOptions& opt = {});

/// Relative mismatch between a centered finite difference of the stored
/// grid and phase_rhs, maximized over interior grid points. Used as an
/// internal consistency check on any computed trajectory.
double max_grid_residual(const Trajectory& traj);

/// The power law seeding the singular trajectory at the origin. Same as
/// trajectory_asymptote(params, Origin) except for k = 0, where the
/// reaction-balance law solves the equation exactly and seeds both
/// balance regimes.
AsymptoteSpec origin_seed_law(const ModelParams& params);

} // namespace tfw

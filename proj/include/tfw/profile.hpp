#pragma once

#include <span>
#include <vector>

#include "tfw/model.hpp"
#include "tfw/trajectory.hpp"

namespace tfw {

/// Monotone sampled traveling-wave profile phi(z). By convention
/// phi(z) = 0 for all z <= 0; only z >= 0 samples are stored.
struct Profile {
    ModelParams params{};
    std::vector<double> zs;   ///< strictly increasing, zs.front() >= 0
    std::vector<double> phis; ///< strictly increasing positive values
};

/// Maps between phi and the travel coordinate
///   z(phi) = m * integral_0^phi Theta^{m-1} Upsilon(Theta)^{-1/p} dTheta
/// over one trajectory. The singular head [0, Theta_0] is integrated in
/// closed form against the analytic seed law; the rest accumulates
/// per-segment Gauss-Kronrod integrals of the log-log interpolant, so a
/// single evaluation costs a binary search plus one partial segment.
class ProfileReconstructor {
  public:
    ProfileReconstructor(const ModelParams& params, const Trajectory& traj,
                         double qtol);

    /// z(phi). Requires 0 < phi <= theta_max of the trajectory.
    double travel_time(double phi) const;

    /// Inverse map by monotone bracketing with secant acceleration,
    /// to relative tolerance qtol. Returns 0 for z <= 0; throws
    /// RangeExceeded beyond the reachable range.
    double phi_at(double z) const;

    /// Largest reachable z (travel time of the last grid point).
    double z_max() const;

    Profile reconstruct(std::span<const double> z_grid) const;

    /// (phi^m)'(z) = Upsilon(phi(z))^{1/p}; 0 for z <= 0.
    double flux_at(double z) const;
    double flux_for_phi(double phi) const;

    const Trajectory& trajectory() const { return *traj_; }

  private:
    double segment_tail(std::size_t seg, double phi) const;

    const ModelParams params_;
    const Trajectory* traj_;
    double qtol_;
    double head_z_;                  ///< closed-form z of [0, seed_end]
    std::vector<double> cum_z_;      ///< z at each trajectory grid point
};

/// One-shot helpers matching the operation contracts; each builds a
/// reconstructor internally, so batch work should use the class.
double travel_time(const ModelParams& params, const Trajectory& traj,
                   double phi_target, double qtol);

Profile reconstruct_profile(const ModelParams& params, const Trajectory& traj,
                            std::span<const double> z_grid, double qtol);

double profile_flux(const ModelParams& params, const Trajectory& traj,
                    const Profile& profile, double z);

/// Geometric report grid spanning [z_lo, z_hi].
std::vector<double> geometric_grid(double lo, double hi, std::size_t n);

/// Origin exponent m - 1 - q/p of the travel-time integrand for the
/// trajectory's seed law; must exceed -1 for the quadrature to converge.
/// Throws DomainError otherwise (cannot happen for valid parameters).
double check_integrability(const ModelParams& params, const Trajectory& traj);

} // namespace tfw

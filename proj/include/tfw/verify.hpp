#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tfw/model.hpp"
#include "tfw/profile.hpp"
#include "tfw/trajectory.hpp"

namespace tfw {

struct ResidualStats {
    double max_rel = 0.0;
    double median_rel = 0.0;
    std::size_t points = 0;
};

/// Residual of the traveling-wave equation
///   (|(phi^m)'|^{p-1} (phi^m)')' - k phi' - b phi^beta = 0
/// evaluated on the reconstructed profile. F = flux^p is differentiated
/// together with phi by centered differences on the (non-uniform) z grid;
/// the defect is normalized by the absorption term b*phi^beta. fluxes must
/// be sampled at profile.zs. Points with phi = 0 contribute zero residual
/// (all three terms vanish there).
ResidualStats ode_residual(const ModelParams& params, const Profile& profile,
                           const std::vector<double>& fluxes);

/// Front energy Phi(z) = p/(p+1) |(phi^m)'|^{p+1} - b m/(m+beta) phi^{m+beta}.
/// Non-decreasing along the wave for k > 0; identically zero when k = 0.
double energy_phi(const ModelParams& params, double phi, double flux);

enum class FitStatus { Pass, Inconclusive, Fail };

struct FitResult {
    double measured_constant = 0.0; ///< geometric mean of Y / X^q
    double deviation = 0.0;         ///< max |Y/(A X^q) - 1| over the samples
    bool monotone_decreasing = false; ///< deviation shrinks toward the end
    std::vector<double> xs;
    std::vector<double> ratios;     ///< Y / (A X^q) per sample
};

/// Ratio test of samples (X, Y) against the power law A*X^q.
FitResult fit_asymptote(const std::vector<std::pair<double, double>>& samples,
                        const AsymptoteSpec& spec);

/// Fixed-step classical RK4 reference for the perturbed problem, integrated
/// in Upsilon directly (independent of the desingularized production path).
/// Starts from max(eps, origin seed law at theta_lo), or from
/// start_override when given. Deterministic.
Trajectory oracle_fixed_step(const ModelParams& params, double eps,
                             double theta_lo, double theta_hi, double h,
                             std::optional<double> start_override = {});

struct AsymptoteCheck {
    AsymptoteSpec spec;
    FitResult fit;
    FitStatus status = FitStatus::Fail;
};

struct VerifyOptions {
    double theta_max = 1e7;
    double tol = 1e-8;
    double qtol = 1e-9;
    std::size_t grid_points = 200;
    /// Residual z-grid spans the travel times of this Theta window.
    double residual_theta_lo = 1e-3;
    double residual_theta_hi = 10.0;
    double residual_band = 1e-3;
    double residual_refine_min = 3.0;
    /// Origin fit window [origin_fit_theta, 10*origin_fit_theta].
    double origin_fit_theta = 1e-8;
    std::size_t fit_samples = 8;
    double fit_band = 0.02;
    /// Deviations below this floor count as converged regardless of
    /// monotonicity (measurement noise dominates there).
    double fit_noise_floor = 1e-6;
    double bracket_eps0 = 1e-2;
    std::size_t bracket_levels = 3;
    double bracket_gap_target = 1e-4;
    double oracle_h = 1e-6;
    double oracle_theta_lo = 1e-3;
    double oracle_theta_hi = 1.0;
    double oracle_band = 1e-6;
};

struct VerificationReport {
    ModelParams params{};
    Regime regime{};
    bool zero_speed_exact = false; ///< k = 0: power laws hold exactly
    double c_star = 0.0;
    double seed_end = 0.0;
    double theta_max = 0.0;
    double z_max = 0.0;

    ResidualStats residual;
    double residual_refined_max = 0.0;
    double residual_refinement_ratio = 0.0;

    bool energy_checked = false;
    bool energy_monotone = true;
    double energy_worst_violation = 0.0;

    std::vector<AsymptoteCheck> asymptotes;

    double bracket_eps = 0.0;
    double bracket_gap = 0.0;
    bool bracket_monotone = false;
    bool bracket_ok = false;

    double oracle_deviation = 0.0;
    bool oracle_ok = false;

    bool profile_monotone = false;
    bool wave_lower_bound_ok = true; ///< k > 0: Upsilon >= k*Theta
    double flux_origin = 0.0;        ///< flux at the smallest profile z

    bool pass = false;
    std::vector<std::string> notes;
};

/// Runs the full pipeline (trajectory, bracketing, profile, residual,
/// energy, asymptote fits, oracle comparison) and assembles the report.
/// Check failures are reported, never thrown; only invalid inputs and
/// resource errors escape.
VerificationReport run_verification(const ModelParams& params,
                                    const VerifyOptions& opt = {});

/// Flat `key = value` rendering with stable field names.
std::string report_to_text(const VerificationReport& report);

const char* to_string(FitStatus s);

} // namespace tfw

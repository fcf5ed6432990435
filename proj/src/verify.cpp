#include "tfw/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tfw/rk.hpp"

namespace tfw {

namespace {

double centered_diff(const std::vector<double>& x, const std::vector<double>& f,
                     std::size_t i) {
    const double hl = x[i] - x[i - 1];
    const double hr = x[i + 1] - x[i];
    return f[i + 1] * hl / (hr * (hl + hr)) + f[i] * (hr - hl) / (hl * hr) -
           f[i - 1] * hr / (hl * (hl + hr));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

} // namespace

ResidualStats ode_residual(const ModelParams& params, const Profile& profile,
                           const std::vector<double>& fluxes) {
    const auto& zs = profile.zs;
    const auto& phis = profile.phis;
    if (zs.size() != phis.size() || zs.size() != fluxes.size())
        throw DomainError("ode_residual: mismatched sample arrays");
    if (zs.size() < 7)
        throw DomainError("ode_residual needs at least 5 interior points");
    for (std::size_t i = 1; i < zs.size(); ++i)
        if (!(zs[i] > zs[i - 1]) || phis[i] < phis[i - 1])
            throw DomainError("ode_residual: degenerate grid");

    // F = |(phi^m)'|^{p-1} (phi^m)' = flux^p (flux >= 0 on the wave).
    std::vector<double> F(fluxes.size());
    for (std::size_t i = 0; i < fluxes.size(); ++i)
        F[i] = std::pow(fluxes[i], params.p);

    std::vector<double> res;
    res.reserve(zs.size() - 2);
    for (std::size_t i = 1; i + 1 < zs.size(); ++i) {
        if (!(phis[i] > 0.0)) {
            res.push_back(0.0); // zero state: every term vanishes
            continue;
        }
        const double dF = centered_diff(zs, F, i);
        const double dphi = centered_diff(zs, phis, i);
        const double absorb = params.b * std::pow(phis[i], params.beta);
        res.push_back(std::fabs(dF - params.k * dphi - absorb) / absorb);
    }
    ResidualStats st;
    st.points = res.size();
    st.max_rel = *std::max_element(res.begin(), res.end());
    std::nth_element(res.begin(), res.begin() + res.size() / 2, res.end());
    st.median_rel = res[res.size() / 2];
    return st;
}

double energy_phi(const ModelParams& params, double phi, double flux) {
    const double kinetic = params.p / (params.p + 1.0) *
                           std::pow(std::fabs(flux), params.p + 1.0);
    const double potential = params.b * params.m / (params.m + params.beta) *
                             std::pow(phi, params.m + params.beta);
    return kinetic - potential;
}

FitResult fit_asymptote(const std::vector<std::pair<double, double>>& samples,
                        const AsymptoteSpec& spec) {
    if (samples.size() < 3)
        throw DomainError("fit_asymptote needs at least 3 samples");
    FitResult r;
    r.xs.reserve(samples.size());
    r.ratios.reserve(samples.size());
    double ln_sum = 0.0;
    for (const auto& [x, y] : samples) {
        if (!(x > 0.0) || !(y > 0.0))
            throw DomainError("fit_asymptote requires positive samples");
        const double law = spec.eval(x);
        r.xs.push_back(x);
        r.ratios.push_back(y / law);
        ln_sum += std::log(y) - spec.exponent * std::log(x);
    }
    r.measured_constant = std::exp(ln_sum / static_cast<double>(samples.size()));
    r.deviation = 0.0;
    r.monotone_decreasing = true;
    double prev = std::fabs(r.ratios.front() - 1.0);
    r.deviation = prev;
    for (std::size_t i = 1; i < r.ratios.size(); ++i) {
        const double d = std::fabs(r.ratios[i] - 1.0);
        r.deviation = std::max(r.deviation, d);
        // Samples arrive ordered toward the asymptotic end; allow a hair of
        // slack so noise at machine level does not flip the flag.
        if (d > prev + 1e-9) r.monotone_decreasing = false;
        prev = d;
    }
    return r;
}

Trajectory oracle_fixed_step(const ModelParams& params, double eps,
                             double theta_lo, double theta_hi, double h,
                             std::optional<double> start_override) {
    if (!(theta_lo > 0.0) || !(theta_hi > theta_lo))
        throw DomainError("oracle_fixed_step requires 0 < theta_lo < theta_hi");
    if (!(h > 0.0)) throw DomainError("oracle_fixed_step requires h > 0");

    const AsymptoteSpec law = origin_seed_law(params);
    const double start =
        start_override ? *start_override : std::max(eps, law.eval(theta_lo));
    if (!(start > 0.0))
        throw DomainError("oracle_fixed_step requires a positive start value");

    const auto n_total = static_cast<std::size_t>((theta_hi - theta_lo) / h) + 2;
    const std::size_t stride = std::max<std::size_t>(1, n_total / 400000);

    Trajectory traj;
    traj.params = params;
    traj.kind = TrajectoryKind::Singular;
    traj.eps = eps;
    traj.seed = SeedLaw{0.0, 0.0, law.constant, law.exponent, 0.0};
    traj.seed_end = theta_lo;

    auto rhs = [&params](double th, double u) {
        return phase_rhs(params, th, std::max(u, 1e-300));
    };
    std::size_t count = 0;
    double last_x = 0.0, last_y = 0.0;
    integrate_fixed_rk4(rhs, theta_lo, start, theta_hi, h,
                        [&](double x, double y) {
                            if (count++ % stride == 0) {
                                traj.thetas.push_back(x);
                                traj.upsilons.push_back(y);
                            }
                            last_x = x;
                            last_y = y;
                        });
    if (traj.thetas.back() != last_x) {
        traj.thetas.push_back(last_x);
        traj.upsilons.push_back(last_y);
    }
    traj.log_thetas.resize(traj.thetas.size());
    traj.log_upsilons.resize(traj.thetas.size());
    for (std::size_t i = 0; i < traj.thetas.size(); ++i) {
        traj.log_thetas[i] = std::log(traj.thetas[i]);
        traj.log_upsilons[i] = std::log(traj.upsilons[i]);
    }
    return traj;
}

namespace {

FitStatus fit_status(const FitResult& fit, const VerifyOptions& opt) {
    const bool within = fit.deviation <= opt.fit_band;
    if (within && (fit.monotone_decreasing || fit.deviation <= opt.fit_noise_floor))
        return FitStatus::Pass;
    if (fit.monotone_decreasing) return FitStatus::Inconclusive;
    return FitStatus::Fail;
}

// Samples ordered toward the asymptotic end (decreasing X for the origin,
// increasing X for infinity).
std::vector<double> fit_window(double a, double b, std::size_t n, End end) {
    auto g = geometric_grid(a, b, n);
    if (end == End::Origin) std::reverse(g.begin(), g.end());
    return g;
}

} // namespace

VerificationReport run_verification(const ModelParams& params,
                                    const VerifyOptions& opt) {
    VerificationReport rep;
    rep.params = params;
    rep.regime = classify_regime(params);
    rep.zero_speed_exact = params.k == 0.0;
    if (rep.zero_speed_exact)
        rep.notes.push_back("k = 0: power laws are exact; speed-dependent "
                            "asymptotes are not applicable");
    rep.c_star = reaction_constant(params);

    const Trajectory traj = solve_trajectory(params, opt.theta_max, opt.tol);
    rep.seed_end = traj.seed_end;
    rep.theta_max = traj.theta_max();
    if (traj.truncated)
        rep.notes.push_back("trajectory continuation truncated at theta = " +
                            fmt(traj.theta_max()));

    const ProfileReconstructor recon(params, traj, opt.qtol);
    rep.z_max = recon.z_max();

    // Residual of the traveling-wave equation on a geometric z grid.
    const double th_lo = std::max(opt.residual_theta_lo, 20.0 * traj.seed_end);
    const double th_hi = std::min(opt.residual_theta_hi, 0.5 * rep.theta_max);
    const double z_lo = recon.travel_time(th_lo);
    const double z_hi = recon.travel_time(th_hi);

    auto sample = [&](std::size_t n) {
        const auto grid = geometric_grid(z_lo, z_hi, n);
        Profile prof = recon.reconstruct(grid);
        std::vector<double> fluxes(prof.zs.size());
        for (std::size_t i = 0; i < prof.zs.size(); ++i)
            fluxes[i] = recon.flux_for_phi(prof.phis[i]);
        return std::pair{std::move(prof), std::move(fluxes)};
    };
    const auto [profile, fluxes] = sample(opt.grid_points);
    rep.residual = ode_residual(params, profile, fluxes);
    const auto [profile2, fluxes2] = sample(opt.grid_points * 2);
    rep.residual_refined_max = ode_residual(params, profile2, fluxes2).max_rel;
    rep.residual_refinement_ratio =
        rep.residual.max_rel / std::max(rep.residual_refined_max, 1e-300);

    // Structural invariants.
    rep.profile_monotone = true;
    for (std::size_t i = 1; i < profile.phis.size(); ++i)
        if (!(profile.phis[i] > profile.phis[i - 1])) rep.profile_monotone = false;
    rep.flux_origin = fluxes.front();

    rep.wave_lower_bound_ok = true;
    if (params.k > 0.0) {
        for (std::size_t i = 0; i < traj.thetas.size(); ++i) {
            if (traj.upsilons[i] < params.k * traj.thetas[i] * (1.0 - 1e-10)) {
                rep.wave_lower_bound_ok = false;
                break;
            }
        }
    }

    // Front energy, monotone for k > 0.
    rep.energy_checked = params.k > 0.0;
    if (rep.energy_checked) {
        double prev = energy_phi(params, profile.phis.front(), fluxes.front());
        for (std::size_t i = 1; i < profile.phis.size(); ++i) {
            const double cur = energy_phi(params, profile.phis[i], fluxes[i]);
            rep.energy_worst_violation =
                std::max(rep.energy_worst_violation, prev - cur);
            prev = cur;
        }
        rep.energy_monotone = rep.energy_worst_violation <= 1e-8;
    }

    // Asymptote ratio fits at every covered end.
    const double origin_a = std::max(opt.origin_fit_theta, 10.0 * traj.seed_end);
    for (const End end : {End::Origin, End::Infinity}) {
        // Trajectory law.
        try {
            const AsymptoteSpec spec = trajectory_asymptote(params, end);
            const auto xs = end == End::Origin
                                ? fit_window(origin_a, 10.0 * origin_a,
                                             opt.fit_samples, end)
                                : fit_window(rep.theta_max / 10.0,
                                             rep.theta_max * (1.0 - 1e-12),
                                             opt.fit_samples, end);
            std::vector<std::pair<double, double>> samples;
            for (double x : xs) samples.emplace_back(x, eval_trajectory(traj, x));
            AsymptoteCheck chk{spec, fit_asymptote(samples, spec), FitStatus::Fail};
            chk.status = fit_status(chk.fit, opt);
            rep.asymptotes.push_back(std::move(chk));
        } catch (const UncoveredRegime&) {
        }
        // Profile law.
        try {
            const AsymptoteSpec spec = profile_asymptote(params, end);
            double za, zb;
            if (end == End::Origin) {
                za = recon.travel_time(origin_a);
                zb = 10.0 * za;
            } else {
                zb = 0.995 * rep.z_max;
                za = zb / 10.0;
            }
            const auto xs = fit_window(za, zb, opt.fit_samples, end);
            std::vector<std::pair<double, double>> samples;
            for (double x : xs) samples.emplace_back(x, recon.phi_at(x));
            AsymptoteCheck chk{spec, fit_asymptote(samples, spec), FitStatus::Fail};
            chk.status = fit_status(chk.fit, opt);
            rep.asymptotes.push_back(std::move(chk));
        } catch (const UncoveredRegime&) {
        }
    }

    // Squeeze evidence between the regularized families.
    BracketOptions bopt;
    bopt.eps0_factor = opt.bracket_eps0;
    bopt.max_refinements = opt.bracket_levels;
    bopt.gap_target = opt.bracket_gap_target;
    try {
        const BracketEvidence ev =
            bracket_trajectory(params, rep.theta_max, opt.tol, bopt);
        rep.bracket_eps = ev.final_eps;
        rep.bracket_gap = ev.final_gap;
        const double slack = std::max(50.0 * opt.tol, 1e-9);
        bool monotone = true;
        bool contains = true;
        for (double th : ev.grid) {
            double prev_up = 0.0, prev_lo = 0.0;
            for (std::size_t j = 0; j < ev.pairs.size(); ++j) {
                if (th > ev.pairs[j].upper.theta_max() ||
                    th > ev.pairs[j].lower.theta_max())
                    continue;
                const double up = eval_trajectory(ev.pairs[j].upper, th);
                const double lo = eval_trajectory(ev.pairs[j].lower, th);
                if (j > 0) {
                    if (up > prev_up * (1.0 + slack)) monotone = false;
                    if (lo < prev_lo * (1.0 - slack)) monotone = false;
                }
                prev_up = up;
                prev_lo = lo;
            }
            if (th <= traj.theta_max()) {
                const double mid = eval_trajectory(traj, th);
                const auto& last = ev.pairs.back();
                if (th <= last.upper.theta_max() && th <= last.lower.theta_max()) {
                    const double up = eval_trajectory(last.upper, th);
                    const double lo = eval_trajectory(last.lower, th);
                    const double s10 = 10.0 * opt.tol;
                    if (mid > up * (1.0 + s10) || mid < lo * (1.0 - s10))
                        contains = false;
                }
            }
        }
        rep.bracket_monotone = monotone;
        rep.bracket_ok = monotone && contains &&
                         rep.bracket_gap <= opt.bracket_gap_target;
    } catch (const BracketStall& e) {
        rep.bracket_gap = e.achieved_gap;
        rep.bracket_ok = false;
        rep.notes.push_back(std::string("bracket stalled: ") + e.what());
    }

    // Independent fixed-step reference on the overlap window.
    try {
        const double olo = std::max(opt.oracle_theta_lo, 10.0 * traj.seed_end);
        const double ohi = std::min(opt.oracle_theta_hi, rep.theta_max);
        std::optional<double> start;
        if (params.k != 0.0) start = eval_trajectory(traj, olo);
        const Trajectory ref = oracle_fixed_step(params, 1e-300, olo, ohi,
                                                 opt.oracle_h, start);
        double dev = 0.0;
        for (std::size_t i = 0; i < ref.thetas.size(); ++i) {
            const double mine = eval_trajectory(traj, ref.thetas[i]);
            dev = std::max(dev, std::fabs(mine - ref.upsilons[i]) / ref.upsilons[i]);
        }
        rep.oracle_deviation = dev;
        rep.oracle_ok = dev <= opt.oracle_band;
    } catch (const IntegrationFailure& e) {
        rep.oracle_ok = false;
        rep.notes.push_back(std::string("oracle failed: ") + e.what());
    }

    bool fits_ok = true;
    for (const auto& a : rep.asymptotes)
        if (a.status != FitStatus::Pass) fits_ok = false;

    rep.pass = rep.residual.max_rel <= opt.residual_band &&
               rep.residual_refinement_ratio >= opt.residual_refine_min &&
               (!rep.energy_checked || rep.energy_monotone) &&
               rep.profile_monotone && rep.wave_lower_bound_ok && fits_ok &&
               rep.bracket_ok && rep.oracle_ok;
    return rep;
}

std::string report_to_text(const VerificationReport& rep) {
    std::ostringstream os;
    auto kv = [&os](const std::string& key, const std::string& val) {
        os << key << " = " << val << "\n";
    };
    auto kvb = [&kv](const std::string& key, bool v) { kv(key, v ? "1" : "0"); };

    kv("params.m", fmt(rep.params.m));
    kv("params.p", fmt(rep.params.p));
    kv("params.beta", fmt(rep.params.beta));
    kv("params.b", fmt(rep.params.b));
    kv("params.k", fmt(rep.params.k));
    kv("regime.balance", to_string(rep.regime.balance));
    kv("regime.speed", to_string(rep.regime.speed_sign));
    kvb("regime.zero_speed_exact", rep.zero_speed_exact);
    kv("cstar", fmt(rep.c_star));
    kv("solver.seed_end", fmt(rep.seed_end));
    kv("solver.theta_max", fmt(rep.theta_max));
    kv("profile.z_max", fmt(rep.z_max));
    kv("residual.max_rel", fmt(rep.residual.max_rel));
    kv("residual.median_rel", fmt(rep.residual.median_rel));
    kv("residual.refined_max_rel", fmt(rep.residual_refined_max));
    kv("residual.refinement_ratio", fmt(rep.residual_refinement_ratio));
    kvb("energy.checked", rep.energy_checked);
    kvb("energy.monotone", rep.energy_monotone);
    kv("energy.worst_violation", fmt(rep.energy_worst_violation));
    kv("asymptote.count", std::to_string(rep.asymptotes.size()));
    for (std::size_t i = 0; i < rep.asymptotes.size(); ++i) {
        const auto& a = rep.asymptotes[i];
        const std::string base = "asymptote[" + std::to_string(i) + "].";
        kv(base + "target", to_string(a.spec.target));
        kv(base + "end", to_string(a.spec.end));
        kv(base + "law", to_string(a.spec.law));
        kv(base + "constant", fmt(a.spec.constant));
        kv(base + "exponent", fmt(a.spec.exponent));
        kv(base + "measured", fmt(a.fit.measured_constant));
        kv(base + "deviation", fmt(a.fit.deviation));
        kv(base + "status", to_string(a.status));
    }
    kv("bracket.eps", fmt(rep.bracket_eps));
    kv("bracket.gap", fmt(rep.bracket_gap));
    kvb("bracket.monotone", rep.bracket_monotone);
    kvb("bracket.ok", rep.bracket_ok);
    kv("oracle.deviation", fmt(rep.oracle_deviation));
    kvb("oracle.ok", rep.oracle_ok);
    kvb("invariants.profile_monotone", rep.profile_monotone);
    kvb("invariants.wave_lower_bound", rep.wave_lower_bound_ok);
    kv("invariants.flux_origin", fmt(rep.flux_origin));
    for (std::size_t i = 0; i < rep.notes.size(); ++i)
        kv("note[" + std::to_string(i) + "]", rep.notes[i]);
    kvb("pass", rep.pass);
    return os.str();
}

const char* to_string(FitStatus s) {
    switch (s) {
        case FitStatus::Pass:         return "pass";
        case FitStatus::Inconclusive: return "inconclusive";
        case FitStatus::Fail:         return "fail";
    }
    return "?";
}

} // namespace tfw

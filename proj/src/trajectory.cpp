#include "tfw/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tfw/rk.hpp"

namespace tfw {

namespace {

constexpr double kLnFloor = -280.0 * 2.302585092994046; // ln(1e-280)

struct OriginRatio {
    // Relative size of the neglected term in the origin dominant balance:
    // r(theta) = c * theta^sigma. sigma > 0 in every covered regime.
    double c;
    double sigma;
};

OriginRatio origin_ratio(const ModelParams& pr, const AsymptoteSpec& law) {
    OriginRatio r{0.0, 1.0};
    switch (law.law) {
        case LawKind::ReactionBalance:
            // k-term over b-term on the law.
            r.sigma = -pr.balance_gap() / (1.0 + pr.p);
            r.c = std::fabs(pr.k) *
                  std::exp(std::log(law.constant) / pr.p) / (pr.b * pr.m);
            break;
        case LawKind::Wave:
            // b-term over k on the law.
            r.sigma = pr.balance_gap() / pr.p;
            r.c = pr.b * pr.m *
                  std::exp(-(1.0 + pr.p) / pr.p * std::log(pr.k));
            break;
        case LawKind::CriticalCurve:
            // First-order offset of the trajectory from the critical curve.
            r.sigma = law.exponent - 1.0;
            r.c = pr.p * law.constant * law.exponent / (-pr.k);
            break;
    }
    return r;
}

// Desingularized right side: W = Upsilon^{(1+p)/p},
// dW/dTheta = ((1+p)/p) (k W^{1/(1+p)} + b m Theta^{m+beta-1}).
auto w_rhs(const ModelParams& pr) {
    const double e_w = 1.0 / (1.0 + pr.p);
    const double fac = (1.0 + pr.p) / pr.p;
    const double e_th = pr.m + pr.beta - 1.0;
    return [pr, e_w, fac, e_th](double th, double w) {
        const double wpos = w > 0.0 ? w : 0.0;
        return fac * (pr.k * std::pow(wpos, e_w) +
                      pr.b * pr.m * std::pow(th, e_th));
    };
}

double upsilon_from_w(const ModelParams& pr, double w) {
    if (!(w > 0.0)) return 0.0;
    return std::exp(pr.p / (1.0 + pr.p) * std::log(w));
}

double w_from_upsilon(const ModelParams& pr, double u) {
    return std::exp((1.0 + pr.p) / pr.p * std::log(u));
}

IntegrateOptions integrator_options(double tol, const SolveOptions& opt) {
    IntegrateOptions io;
    io.rtol = std::clamp(tol * 1e-2, 1e-13, 1e-6);
    io.atol = 1e-300;
    io.max_rel_step = opt.max_rel_step;
    io.max_steps = opt.max_steps;
    return io;
}

// Collects integration output into a trajectory, converting W back to
// Upsilon. Stops at the first non-positive or non-finite value. Points
// below record_from are dropped: for the strongly contracting k < 0 start
// the first stretch is a decaying transient of the seeded initial value,
// resolved at the step scale, and does not belong in the sampled solution.
void fill_grid(Trajectory& traj, const ModelParams& pr,
               const std::vector<StepPoint>& pts, double record_from = 0.0) {
    traj.thetas.reserve(pts.size());
    traj.upsilons.reserve(pts.size());
    for (const auto& s : pts) {
        if (s.x < record_from && &s != &pts.back()) continue;
        const double u = upsilon_from_w(pr, s.y);
        if (!(u > 0.0) || !std::isfinite(u)) break;
        if (!traj.thetas.empty() && !(s.x > traj.thetas.back())) continue;
        traj.thetas.push_back(s.x);
        traj.upsilons.push_back(u);
    }
    if (traj.thetas.size() < 2)
        throw IntegrationFailure("trajectory grid collapsed at start");
    traj.log_thetas.resize(traj.thetas.size());
    traj.log_upsilons.resize(traj.thetas.size());
    for (std::size_t i = 0; i < traj.thetas.size(); ++i) {
        traj.log_thetas[i] = std::log(traj.thetas[i]);
        traj.log_upsilons[i] = std::log(traj.upsilons[i]);
    }
}

// The k < 0 sub-balance continuation legitimately stalls once the
// trajectory decays toward the critical curve past the crossing; the
// computed part is still valid and is returned truncated.
bool truncation_allowed(const ModelParams& pr, const Trajectory& traj) {
    if (!(pr.k < 0.0) || !(pr.balance_gap() < 0.0)) return false;
    const double th = traj.thetas.back();
    const double crit = critical_curve(pr, th);
    return traj.upsilons.back() >= 0.5 * crit;
}

void finish_solve(Trajectory& traj, const ModelParams& pr,
                  const IntegrateResult& run, double theta_max,
                  double record_from = 0.0) {
    fill_grid(traj, pr, run.points, record_from);
    if (!traj.thetas.empty()) traj.seed_end = traj.thetas.front();
    if (run.status != IntegrateStatus::Ok || traj.theta_max() < theta_max * (1.0 - 1e-9)) {
        if (truncation_allowed(pr, traj)) {
            traj.truncated = true;
            return;
        }
        std::ostringstream os;
        os << "integration stalled at theta = " << traj.theta_max()
           << " of " << theta_max
           << (run.status == IntegrateStatus::StepBudget ? " (step budget)"
                                                         : " (step collapse)");
        throw IntegrationFailure(os.str());
    }
}

} // namespace

AsymptoteSpec origin_seed_law(const ModelParams& params) {
    if (params.k == 0.0) {
        // The selector covers the reaction law at one end only; for k = 0
        // the law is exact, so query the covered end.
        return trajectory_asymptote(params, params.balance_gap() < 0.0
                                                ? End::Origin
                                                : End::Infinity);
    }
    return trajectory_asymptote(params, End::Origin);
}

double SeedLaw::eval(double theta) const {
    const double t = theta - offset;
    double power = 0.0;
    if (t > 0.0) {
        if (pure_power()) return std::exp(std::log(c2) + e2 * std::log(t));
        power = c2 * std::pow(t, e2);
    }
    return c0 + c1 * theta + power;
}

double eval_trajectory(const Trajectory& traj, double theta) {
    if (theta < 0.0) throw DomainError("eval_trajectory requires theta >= 0");
    if (theta < traj.domain_lo())
        throw RangeExceeded("theta below the trajectory domain start");
    if (theta > traj.theta_max() * (1.0 + 1e-12))
        throw RangeExceeded("theta beyond the computed trajectory range");
    if (theta < traj.seed_end) return traj.seed.eval(theta);

    const auto& lt = traj.log_thetas;
    const double lx = std::log(std::min(theta, traj.theta_max()));
    auto it = std::upper_bound(lt.begin(), lt.end(), lx);
    std::size_t hi = static_cast<std::size_t>(it - lt.begin());
    if (hi == 0) hi = 1;
    if (hi >= lt.size()) hi = lt.size() - 1;
    const std::size_t lo = hi - 1;
    if (lx <= lt[lo]) return traj.upsilons[lo];
    const double t = (lx - lt[lo]) / (lt[hi] - lt[lo]);
    return std::exp(traj.log_upsilons[lo] +
                    t * (traj.log_upsilons[hi] - traj.log_upsilons[lo]));
}

Trajectory solve_trajectory(const ModelParams& params, double theta_max,
                            double tol, const SolveOptions& opt) {
    if (!(theta_max > 0.0)) throw DomainError("theta_max must be positive");
    if (!(tol > 0.0)) throw DomainError("tol must be positive");

    const AsymptoteSpec law = origin_seed_law(params);
    const double ln_a = std::log(law.constant);
    const double q = law.exponent;

    // Seed radius: keep the neglected term of the dominant balance below
    // the target. The strongly contracting k < 0 super-balance start is
    // stability-limited, so there the target is relaxed to at most 1e-4;
    // forward contraction (the gap between nearby solutions shrinks like
    // exp(int df/dUpsilon) with df/dUpsilon ~ -Theta^{-q}) erases the
    // difference within a fraction of a decade.
    double ln_theta0 = std::log(1e-6 * theta_max);
    if (params.k != 0.0) {
        const OriginRatio r = origin_ratio(params, law);
        const bool stiff_origin = params.k < 0.0 && params.balance_gap() > 0.0;
        const double target = stiff_origin ? std::max(tol, 1e-4) : tol;
        ln_theta0 = std::min(ln_theta0,
                             (std::log(target) - std::log(r.c)) / r.sigma);
    }
    // Representability floors for Upsilon, W and the quadrature head
    // exponent m - q/p of the travel-time integral.
    ln_theta0 = std::max(ln_theta0, (kLnFloor - ln_a) / q);
    const double head_exp = std::max(params.m - q / params.p, 0.1);
    ln_theta0 = std::max(ln_theta0, kLnFloor / head_exp);
    ln_theta0 = std::max(ln_theta0, kLnFloor);
    const double theta0 = std::exp(ln_theta0);
    if (!(theta0 < theta_max))
        throw DomainError("theta_max too small for the required seed radius");

    Trajectory traj;
    traj.params = params;
    traj.kind = TrajectoryKind::Singular;
    traj.seed = SeedLaw{0.0, 0.0, law.constant, q, 0.0};
    traj.seed_end = theta0;

    const double u0 = traj.seed.eval(theta0);
    const auto run = integrate_adaptive(w_rhs(params), theta0,
                                        w_from_upsilon(params, u0), theta_max,
                                        integrator_options(tol, opt));
    // A 1% burn-in zone absorbs the contraction transient of the seeded
    // start; below it the analytic law is the representation anyway.
    finish_solve(traj, params, run, theta_max, theta0 * 1.01);
    return traj;
}

Trajectory solve_regularized_upper(const ModelParams& params, double eps,
                                   double theta_max, double tol,
                                   const SolveOptions& opt) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    if (!(theta_max > 0.0)) throw DomainError("theta_max must be positive");
    if (!(tol > 0.0)) throw DomainError("tol must be positive");

    const double mb = params.m + params.beta;
    const double c_int = params.b * params.m *
                         std::exp(-std::log(eps) / params.p) / mb;

    // First-order start law Upsilon = eps + k*Theta + c*Theta^{m+beta};
    // advance analytically until the second-order correction is below tol.
    const double eta = std::sqrt(0.1 * tol) * eps;
    double theta_s = std::min(1e-3 * theta_max, eps + 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double dev = std::fabs(params.k) * theta_s +
                           c_int * std::pow(theta_s, mb);
        if (dev <= eta || theta_s <= 1e-280) break;
        theta_s *= 0.5;
    }

    Trajectory traj;
    traj.params = params;
    traj.kind = TrajectoryKind::RegularizedUpper;
    traj.eps = eps;
    traj.seed = SeedLaw{eps, params.k, c_int, mb, 0.0};
    traj.seed_end = theta_s;

    const double u0 = traj.seed.eval(theta_s);
    if (!(u0 > 0.0))
        throw IntegrationFailure("regularized upper start collapsed to zero");
    const auto run = integrate_adaptive(w_rhs(params), theta_s,
                                        w_from_upsilon(params, u0), theta_max,
                                        integrator_options(tol, opt));
    finish_solve(traj, params, run, theta_max);
    return traj;
}

Trajectory solve_regularized_lower(const ModelParams& params, double eps,
                                   double theta_max, double tol,
                                   const SolveOptions& opt) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    if (!(theta_max > eps)) throw DomainError("theta_max must exceed eps");
    if (!(tol > 0.0)) throw DomainError("tol must be positive");

    const double mb1 = params.m + params.beta - 1.0;
    // W is linear near the start: W ~ C_w * (Theta - eps).
    const double ln_cw = std::log((1.0 + params.p) / params.p * params.b * params.m) +
                         mb1 * std::log(eps);
    const double c_w = std::exp(ln_cw);
    const double e_seed = params.p / (1.0 + params.p);
    const double a_seed = std::exp(e_seed * ln_cw);

    // Analytic first step: limited by the frozen-Theta error and by the
    // neglected k W^{1/(1+p)} contribution, both kept below 0.1*tol.
    double delta = 0.2 * tol * eps / std::max(std::fabs(mb1), 1e-6);
    if (params.k != 0.0) {
        const double pp = params.p;
        const double ln_db =
            (1.0 + pp) * std::log(0.1 * tol * pp * (2.0 + pp) /
                                  ((1.0 + pp) * (1.0 + pp) * std::fabs(params.k))) +
            pp * ln_cw;
        delta = std::min(delta, std::exp(ln_db));
    }
    delta = std::max(delta, eps * 1e-12);
    delta = std::min(delta, 0.1 * (theta_max - eps));

    Trajectory traj;
    traj.params = params;
    traj.kind = TrajectoryKind::RegularizedLower;
    traj.eps = eps;
    traj.seed = SeedLaw{0.0, 0.0, a_seed, e_seed, eps};
    traj.seed_end = eps + delta;

    const auto run = integrate_adaptive(w_rhs(params), eps + delta,
                                        c_w * delta, theta_max,
                                        integrator_options(tol, opt));
    finish_solve(traj, params, run, theta_max);
    return traj;
}

BracketEvidence bracket_trajectory(const ModelParams& params, double theta_max,
                                   double tol, const BracketOptions& opt) {
    const Trajectory singular = solve_trajectory(params, theta_max, tol);
    const double theta0 = singular.seed_end;
    const double u_scale = singular.upsilons.front();
    const double target = opt.gap_target > 0.0 ? opt.gap_target : tol;
    const std::size_t min_levels = std::min<std::size_t>(3, opt.max_refinements);

    BracketEvidence ev;
    const double lg_lo = std::log10(theta0);
    const double lg_hi = std::log10(theta_max * (1.0 - 1e-12));
    const auto n_grid = static_cast<std::size_t>(
        std::max(2.0, (lg_hi - lg_lo) * static_cast<double>(opt.grid_per_decade)));
    ev.grid.resize(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i)
        ev.grid[i] = std::pow(10.0, lg_lo + (lg_hi - lg_lo) *
                              static_cast<double>(i) / static_cast<double>(n_grid - 1));

    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < opt.max_refinements; ++j) {
        const double eps_u = opt.eps0_factor * u_scale * std::pow(opt.ratio, static_cast<double>(j));
        // Place the lower family's Theta offset where the origin law
        // reaches eps_u, so both families tighten together.
        double ln_th_low = (std::log(eps_u) - std::log(singular.seed.c2)) / singular.seed.e2;
        ln_th_low = std::max(ln_th_low, kLnFloor / std::max(1.0, params.m + params.beta));
        const double th_low = std::min(std::exp(ln_th_low), 0.5 * theta0);

        BracketPair pair;
        pair.eps = eps_u;
        pair.upper = solve_regularized_upper(params, eps_u, theta_max, tol);
        pair.lower = solve_regularized_lower(params, th_low, theta_max, tol);

        const double cover = std::min(pair.upper.theta_max(), pair.lower.theta_max());
        double gap = 0.0;
        for (double th : ev.grid) {
            if (th > cover) break;
            const double up = eval_trajectory(pair.upper, th);
            const double lo = eval_trajectory(pair.lower, th);
            gap = std::max(gap, (up - lo) / std::max(up, 1e-300));
        }
        ev.pairs.push_back(std::move(pair));
        ev.gaps.push_back(gap);
        ev.final_eps = eps_u;
        ev.final_gap = gap;
        best_gap = std::min(best_gap, gap);

        if (j + 1 >= min_levels) {
            if (gap <= target) return ev;
            if (j > 0 && gap > 0.995 * ev.gaps[j - 1])
                throw BracketStall("bracket gap stopped shrinking at " +
                                   std::to_string(best_gap), best_gap);
        }
    }
    if (best_gap <= target) return ev;
    throw BracketStall("bracket refinement cap reached with gap " +
                       std::to_string(best_gap), best_gap);
}

double max_grid_residual(const Trajectory& traj) {
    const auto& th = traj.thetas;
    const auto& up = traj.upsilons;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < th.size(); ++i) {
        const double hl = th[i] - th[i - 1];
        const double hr = th[i + 1] - th[i];
        const double fd = up[i + 1] * hl / (hr * (hl + hr)) +
                          up[i] * (hr - hl) / (hl * hr) -
                          up[i - 1] * hr / (hl * (hl + hr));
        const double rhs = phase_rhs(traj.params, th[i], up[i]);
        const double denom = std::max(std::fabs(rhs), 1e-3 * up[i] / th[i]);
        worst = std::max(worst, std::fabs(fd - rhs) / denom);
    }
    return worst;
}

} // namespace tfw

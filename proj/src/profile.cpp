#include "tfw/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tfw/quadrature.hpp"

namespace tfw {

namespace {

// Travel-time integrand m * Theta^{m-1} * Upsilon^{-1/p} with Upsilon taken
// as the log-log interpolant Upsilon_j * (Theta/Theta_j)^{slope} inside one
// grid segment.
struct SegmentIntegrand {
    double coeff;    // m * Upsilon_j^{-1/p} * Theta_j^{slope/p}
    double exponent; // m - 1 - slope/p

    double operator()(double th) const {
        return coeff * std::pow(th, exponent);
    }
};

SegmentIntegrand segment_integrand(const ModelParams& pr, const Trajectory& tr,
                                   std::size_t j) {
    const double slope = (tr.log_upsilons[j + 1] - tr.log_upsilons[j]) /
                         (tr.log_thetas[j + 1] - tr.log_thetas[j]);
    SegmentIntegrand s;
    s.exponent = pr.m - 1.0 - slope / pr.p;
    s.coeff = pr.m * std::exp(-tr.log_upsilons[j] / pr.p +
                              slope / pr.p * tr.log_thetas[j]);
    return s;
}

// One segment piece with bisection refinement; segments are a fraction of
// a decade wide, so a level or two reaches machine accuracy.
template <class F>
double integrate_piece(F&& f, double a, double b, double rel_tol, int depth = 0) {
    if (!(b > a)) return 0.0;
    const auto whole = detail::gk15_panel(f, a, b);
    if (whole.error <= rel_tol * std::fabs(whole.value) || depth >= 28)
        return whole.value;
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b)) return whole.value;
    return integrate_piece(f, a, mid, rel_tol, depth + 1) +
           integrate_piece(f, mid, b, rel_tol, depth + 1);
}

double seed_integral(const ModelParams& pr, const Trajectory& tr,
                     double up_to, double qtol) {
    const SeedLaw& seed = tr.seed;
    if (seed.pure_power()) {
        // Closed form of the head: m * A^{-1/p} * Theta^{m - q/p} / (m - q/p).
        const double g = pr.m - seed.e2 / pr.p;
        if (!(g > 1e-12))
            throw DomainError("travel-time integrand is not integrable at the origin");
        const double ln = std::log(pr.m) - std::log(seed.c2) / pr.p +
                          g * std::log(up_to) - std::log(g);
        return std::exp(ln);
    }
    // Regularized seeds: integrate the law numerically from the domain
    // start; the singularity (if any) sits at the left endpoint and the
    // Kronrod nodes are interior.
    const double lo = tr.domain_lo();
    if (!(up_to > lo)) return 0.0;
    auto f = [&](double th) {
        const double u = std::max(seed.eval(th), 1e-300);
        return pr.m * std::pow(th, pr.m - 1.0) * std::pow(u, -1.0 / pr.p);
    };
    return integrate_gk(f, lo, up_to, qtol * 0.1, 0.0, 8192).value;
}

} // namespace

ProfileReconstructor::ProfileReconstructor(const ModelParams& params,
                                           const Trajectory& traj, double qtol)
    : params_(params), traj_(&traj), qtol_(qtol) {
    if (!(qtol > 0.0)) throw DomainError("qtol must be positive");
    check_integrability(params, traj);
    head_z_ = seed_integral(params_, *traj_, traj.seed_end, qtol_);

    const std::size_t n = traj.thetas.size();
    cum_z_.resize(n);
    cum_z_[0] = head_z_;
    double carry = 0.0; // Neumaier compensation
    double sum = head_z_;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const auto f = segment_integrand(params_, *traj_, j);
        const double piece =
            integrate_piece(f, traj.thetas[j], traj.thetas[j + 1], qtol_ * 0.1);
        const double t = sum + piece;
        carry += std::fabs(sum) >= std::fabs(piece) ? (sum - t) + piece
                                                    : (piece - t) + sum;
        sum = t;
        cum_z_[j + 1] = sum + carry;
    }
}

double ProfileReconstructor::segment_tail(std::size_t seg, double phi) const {
    const auto f = segment_integrand(params_, *traj_, seg);
    return integrate_piece(f, traj_->thetas[seg], phi, qtol_ * 0.1);
}

double ProfileReconstructor::travel_time(double phi) const {
    if (!(phi > 0.0)) throw DomainError("travel_time requires phi > 0");
    const auto& th = traj_->thetas;
    if (phi > th.back() * (1.0 + 1e-12))
        throw RangeExceeded("phi exceeds the trajectory range");
    if (phi <= traj_->seed_end)
        return seed_integral(params_, *traj_, phi, qtol_);
    auto it = std::upper_bound(th.begin(), th.end(), phi);
    std::size_t seg = static_cast<std::size_t>(it - th.begin());
    if (seg == 0) seg = 1;
    seg -= 1;
    if (seg + 1 >= th.size()) return cum_z_.back();
    return cum_z_[seg] + segment_tail(seg, phi);
}

double ProfileReconstructor::z_max() const { return cum_z_.back(); }

double ProfileReconstructor::phi_at(double z) const {
    if (z <= 0.0) return 0.0;
    if (z > z_max() * (1.0 + 1e-12))
        throw RangeExceeded("z exceeds the reachable profile range");

    const auto& th = traj_->thetas;
    double lo, hi;
    if (z <= cum_z_.front()) {
        // Inside the analytic head.
        const SeedLaw& seed = traj_->seed;
        if (seed.pure_power()) {
            const double g = params_.m - seed.e2 / params_.p;
            // Invert the closed form directly.
            const double ln_phi =
                (std::log(z) - (std::log(params_.m) - std::log(seed.c2) / params_.p -
                                std::log(g))) / g;
            return std::exp(ln_phi);
        }
        lo = traj_->domain_lo();
        hi = traj_->seed_end;
    } else {
        auto it = std::upper_bound(cum_z_.begin(), cum_z_.end(), z);
        std::size_t seg = static_cast<std::size_t>(it - cum_z_.begin());
        if (seg == 0) seg = 1;
        seg -= 1;
        if (seg + 1 >= th.size()) return th.back();
        lo = th[seg];
        hi = th[seg + 1];
    }

    // Bisection with secant acceleration on the monotone map phi -> z(phi).
    auto tt = [&](double phi) {
        return phi > traj_->domain_lo() ? travel_time(phi) : 0.0;
    };
    double flo = tt(lo) - z;
    double fhi = tt(hi) - z;
    if (flo > 0.0) return lo;
    if (fhi < 0.0) return hi;
    double x = hi, fx = fhi;
    double x_prev = lo, f_prev = flo;
    for (int it2 = 0; it2 < 200; ++it2) {
        if ((hi - lo) <= qtol_ * hi) break;
        double cand = 0.0;
        bool use_secant = std::fabs(fx - f_prev) > 0.0;
        if (use_secant) {
            cand = x - fx * (x - x_prev) / (fx - f_prev);
            const double margin = 0.01 * (hi - lo);
            if (!(cand > lo + margin && cand < hi - margin)) use_secant = false;
        }
        if (!use_secant) cand = 0.5 * (lo + hi);
        const double fc = tt(cand) - z;
        x_prev = x;
        f_prev = fx;
        x = cand;
        fx = fc;
        if (fc < 0.0)
            lo = cand;
        else
            hi = cand;
    }
    return 0.5 * (lo + hi);
}

Profile ProfileReconstructor::reconstruct(std::span<const double> z_grid) const {
    Profile prof;
    prof.params = params_;
    prof.zs.reserve(z_grid.size());
    prof.phis.reserve(z_grid.size());
    double prev = 0.0;
    bool first = true;
    for (double z : z_grid) {
        if (!(z > 0.0))
            throw DomainError("reconstruct_profile requires a positive z grid");
        if (!first && !(z > prev))
            throw DomainError("reconstruct_profile requires an increasing z grid");
        prev = z;
        first = false;
        prof.zs.push_back(z);
        prof.phis.push_back(phi_at(z));
    }
    return prof;
}

double ProfileReconstructor::flux_for_phi(double phi) const {
    if (!(phi > 0.0)) return 0.0;
    const double u = eval_trajectory(*traj_, phi);
    return std::exp(std::log(u) / params_.p);
}

double ProfileReconstructor::flux_at(double z) const {
    if (z <= 0.0) return 0.0;
    return flux_for_phi(phi_at(z));
}

double travel_time(const ModelParams& params, const Trajectory& traj,
                   double phi_target, double qtol) {
    return ProfileReconstructor(params, traj, qtol).travel_time(phi_target);
}

Profile reconstruct_profile(const ModelParams& params, const Trajectory& traj,
                            std::span<const double> z_grid, double qtol) {
    return ProfileReconstructor(params, traj, qtol).reconstruct(z_grid);
}

double profile_flux(const ModelParams& params, const Trajectory& traj,
                    const Profile& profile, double z) {
    if (z <= 0.0) return 0.0;
    const auto& zs = profile.zs;
    if (zs.empty() || z > zs.back() * (1.0 + 1e-12))
        throw RangeExceeded("z outside the profile range");
    auto it = std::lower_bound(zs.begin(), zs.end(), z);
    double phi;
    if (it != zs.end() && *it == z) {
        phi = profile.phis[static_cast<std::size_t>(it - zs.begin())];
    } else if (it == zs.begin()) {
        // Below the first sample: extend with the power law through the
        // first two points (the profile is a power law at the origin).
        if (zs.size() >= 2) {
            const double s = (std::log(profile.phis[1]) - std::log(profile.phis[0])) /
                             (std::log(zs[1]) - std::log(zs[0]));
            phi = std::exp(std::log(profile.phis[0]) +
                           s * (std::log(z) - std::log(zs[0])));
        } else {
            phi = profile.phis.front() * z / zs.front();
        }
    } else {
        const std::size_t hi = static_cast<std::size_t>(it - zs.begin());
        const std::size_t lo = hi - 1;
        const double t = (std::log(z) - std::log(zs[lo])) /
                         (std::log(zs[hi]) - std::log(zs[lo]));
        phi = std::exp(std::log(profile.phis[lo]) +
                       t * (std::log(profile.phis[hi]) - std::log(profile.phis[lo])));
    }
    const double u = eval_trajectory(traj, phi);
    return std::exp(std::log(u) / params.p);
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo)) throw DomainError("bad geometric grid range");
    if (n == 0) throw DomainError("geometric grid needs at least one point");
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                        static_cast<double>(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

double check_integrability(const ModelParams& params, const Trajectory& traj) {
    double exponent;
    if (traj.seed.pure_power()) {
        exponent = params.m - 1.0 - traj.seed.e2 / params.p;
    } else if (traj.kind == TrajectoryKind::RegularizedLower) {
        // Integrand ~ (Theta - eps)^{-1/(1+p)} at the start.
        exponent = -1.0 / (1.0 + params.p);
    } else {
        exponent = params.m - 1.0; // upper family: Upsilon(0) = eps > 0
    }
    if (!(exponent > -1.0 + 1e-12))
        throw DomainError("travel-time integrand is not integrable at the start");
    return exponent;
}

} // namespace tfw

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "tfw/profile.hpp"
#include "tfw/quadrature.hpp"

using namespace tfw;
using test::rel_err;

namespace {

const ModelParams kZero = validate_params(2, 1, 0.5, 1, 0);
const double kCstar = std::pow(0.225, 2.0 / 3.0);

// Trajectory whose stored values follow an exact power law; log-log
// interpolation reproduces the law everywhere, so quadrature against it
// has a closed-form answer.
Trajectory make_law_trajectory(const ModelParams& pr, double a, double q,
                               double lo, double hi, std::size_t n) {
    Trajectory t;
    t.params = pr;
    t.kind = TrajectoryKind::Singular;
    t.seed = SeedLaw{0.0, 0.0, a, q, 0.0};
    t.seed_end = lo;
    t.thetas = geometric_grid(lo, hi, n);
    for (double th : t.thetas) t.upsilons.push_back(t.seed.eval(th));
    for (double th : t.thetas) t.log_thetas.push_back(std::log(th));
    for (double u : t.upsilons) t.log_upsilons.push_back(std::log(u));
    return t;
}

} // namespace

TEST_CASE("adaptive Gauss-Kronrod: exactness and endpoint singularities") {
    auto poly = [](double x) { return ((3 * x + 2) * x + 1) * x * x * x; };
    const auto r1 = integrate_gk(poly, 0.0, 2.0, 1e-14);
    // integral of 3x^5+2x^4+x^3 over [0,2] = 32 + 64/5 + 4
    CHECK(rel_err(r1.value, 32.0 + 64.0 / 5.0 + 4.0) < 1e-14);

    auto root = [](double x) { return 1.0 / std::sqrt(x); };
    const auto r2 = integrate_gk(root, 0.0, 1.0, 1e-10);
    CHECK(rel_err(r2.value, 2.0) < 1e-9);

    auto powlaw = [](double x) { return std::pow(x, -0.8); };
    const auto r3 = integrate_gk(powlaw, 0.0, 1.0, 1e-9, 0.0, 1 << 16);
    CHECK(rel_err(r3.value, 5.0) < 1e-8);

    CHECK_THROWS_AS(integrate_gk(powlaw, 0.0, 1.0, 1e-14, 0.0, 8), QuadratureFailure);
}

TEST_CASE("travel_time: k=0 closed form") {
    const auto traj = solve_trajectory(kZero, 10.0, 1e-10);
    const ProfileReconstructor recon(kZero, traj, 1e-10);
    CHECK(rel_err(recon.travel_time(1.0), 2.1081851067789192) < 1e-9);
    // z(phi) = (2/sqrt(1.6)) phi^{3/4} / 0.75 everywhere.
    for (double phi : {1e-3, 0.1, 2.0, 9.0}) {
        const double want = 2.0 / std::sqrt(1.6) / 0.75 * std::pow(phi, 0.75);
        CHECK(rel_err(recon.travel_time(phi), want) < 1e-9);
    }
}

TEST_CASE("travel_time: exact critical-curve law gives z = 2 sqrt(phi)") {
    const auto pr = validate_params(2, 1, 0.5, 1, -1);
    const auto traj = make_law_trajectory(pr, 2.0, 1.5, 1e-10, 10.0, 4000);
    const ProfileReconstructor recon(pr, traj, 1e-10);
    CHECK(rel_err(recon.travel_time(0.01), 0.2) < 1e-9);
    CHECK(rel_err(recon.travel_time(1.0), 2.0) < 1e-9);
    // Inverse: phi(z) = z^2/4, the worked profile constant for this regime.
    CHECK(rel_err(recon.phi_at(0.2), 0.01) < 1e-8);
    CHECK(rel_err(recon.phi_at(1.0), 0.25) < 1e-8);
}

TEST_CASE("travel_time: z -> 0 along the analytic seed") {
    const auto traj = solve_trajectory(kZero, 10.0, 1e-10);
    const ProfileReconstructor recon(kZero, traj, 1e-10);
    CHECK(recon.travel_time(1e-20) < 1e-14);
    CHECK(recon.travel_time(1e-20) > 0.0);
}

TEST_CASE("reconstruct_profile: k=0 worked values and boundary") {
    const auto traj = solve_trajectory(kZero, 10.0, 1e-10);
    const ProfileReconstructor recon(kZero, traj, 1e-9);
    CHECK(rel_err(recon.phi_at(2.1081851067789192), 1.0) < 1e-6);
    CHECK(rel_err(recon.phi_at(1.0), kCstar) < 1e-6);
    CHECK(recon.phi_at(0.0) == 0.0);
    CHECK(recon.phi_at(-3.0) == 0.0);

    // phi(z) = C_* z^{4/3} across the whole sampled range.
    const auto grid = geometric_grid(recon.travel_time(1e-3), recon.travel_time(9.9), 60);
    const auto prof = recon.reconstruct(grid);
    for (std::size_t i = 0; i < prof.zs.size(); ++i)
        CHECK(rel_err(prof.phis[i], kCstar * std::pow(prof.zs[i], 4.0 / 3.0)) < 1e-8);
}

TEST_CASE("round trip travel_time(phi_at(z)) = z within 10*qtol") {
    const double qtol = 1e-9;
    for (double k : {0.0, 1.0, -1.0}) {
        const auto pr = validate_params(2, 1, 0.5, 1, k);
        const auto traj = solve_trajectory(pr, 100.0, 1e-8);
        const ProfileReconstructor recon(pr, traj, qtol);
        const auto grid =
            geometric_grid(recon.travel_time(1e-2), 0.99 * recon.z_max(), 40);
        for (double z : grid)
            CHECK(rel_err(recon.travel_time(recon.phi_at(z)), z) < 10.0 * qtol);
    }
}

TEST_CASE("profile is strictly increasing and flux vanishes at the front") {
    const auto pr = validate_params(2, 1, 0.5, 1, 1);
    const auto traj = solve_trajectory(pr, 100.0, 1e-8);
    const ProfileReconstructor recon(pr, traj, 1e-9);
    const auto grid = geometric_grid(recon.travel_time(1e-4), 0.99 * recon.z_max(), 120);
    const auto prof = recon.reconstruct(grid);
    for (std::size_t i = 1; i < prof.phis.size(); ++i)
        CHECK(prof.phis[i] > prof.phis[i - 1]);

    CHECK(recon.flux_at(-1.0) == 0.0);
    CHECK(recon.flux_at(0.0) == 0.0);
    // flux -> 0 from above as z -> 0+.
    double prev = recon.flux_at(grid.front());
    CHECK(prev > 0.0);
    CHECK(prev < 1e-1 * recon.flux_at(grid.back()));
}

TEST_CASE("profile_flux: worked k=0 value and zero extension") {
    const auto traj = solve_trajectory(kZero, 10.0, 1e-10);
    const ProfileReconstructor recon(kZero, traj, 1e-9);
    const auto grid = geometric_grid(0.1, 2.2, 64);
    const auto prof = recon.reconstruct(grid);
    CHECK(profile_flux(kZero, traj, prof, -1.0) == 0.0);
    CHECK(profile_flux(kZero, traj, prof, 0.0) == 0.0);
    const double z1 = 2.1081851067789192;
    CHECK(rel_err(profile_flux(kZero, traj, prof, z1), 1.2649110640673518) < 1e-5);
    CHECK(rel_err(recon.flux_at(z1), 1.2649110640673518) < 1e-6);
}

TEST_CASE("wave-law profile ratio near the origin (k = +1)") {
    const auto pr = validate_params(2, 1, 0.5, 1, 1);
    const auto traj = solve_trajectory(pr, 10.0, 1e-8);
    const ProfileReconstructor recon(pr, traj, 1e-9);
    const auto spec = profile_asymptote(pr, End::Origin); // A = 0.5, q = 1
    for (double z : {1e-7, 1e-6}) {
        const double ratio = recon.phi_at(z) / spec.eval(z);
        CHECK(ratio > 0.98);
        CHECK(ratio < 1.02);
    }
}

TEST_CASE("quadrature integrability pre-check") {
    test::Rng rng(31);
    for (int i = 0; i < 60; ++i) {
        const auto pr = test::sample_params(rng);
        const auto law = origin_seed_law(pr);
        Trajectory t = make_law_trajectory(pr, law.constant, law.exponent, 1e-6, 1.0, 50);
        const double expo = check_integrability(pr, t);
        CHECK(expo > -1.0);
        CHECK(expo == doctest::Approx(pr.m - 1.0 - law.exponent / pr.p));
        // The three regime reductions: reaction mp > beta, wave mp > 1,
        // critical beta < 1; all hold for valid parameters.
        switch (law.law) {
            case LawKind::ReactionBalance:
                CHECK(pr.m * pr.p > pr.beta);
                break;
            case LawKind::Wave:
                CHECK(pr.m * pr.p > 1.0);
                break;
            case LawKind::CriticalCurve:
                CHECK(pr.beta < 1.0);
                break;
        }
    }
}

TEST_CASE("range errors") {
    const auto traj = solve_trajectory(kZero, 1.0, 1e-8);
    const ProfileReconstructor recon(kZero, traj, 1e-9);
    CHECK_THROWS_AS(recon.travel_time(2.0), RangeExceeded);
    CHECK_THROWS_AS(recon.phi_at(recon.z_max() * 1.5), RangeExceeded);
    const std::vector<double> bad{recon.z_max() * 2.0};
    CHECK_THROWS_AS(recon.reconstruct(bad), RangeExceeded);
    const std::vector<double> nonpos{-1.0, 0.5};
    CHECK_THROWS_AS(recon.reconstruct(nonpos), DomainError);
}

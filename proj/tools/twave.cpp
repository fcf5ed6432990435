// twave: traveling-wave solver for the doubly degenerate filtration
// equation with absorption. Subcommands solve the phase-plane trajectory,
// reconstruct wave profiles, run the verification pipeline, and sweep
// parameter grids to CSV.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tfw/model.hpp"
#include "tfw/profile.hpp"
#include "tfw/trajectory.hpp"
#include "tfw/verify.hpp"

namespace {

// Exit codes: 0 ok, 1 validation, 2 numeric, 3 io, 4 range, 5 verification.
enum ExitCode {
    kOk = 0,
    kValidation = 1,
    kNumeric = 2,
    kIo = 3,
    kRange = 4,
    kVerifyFail = 5,
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

void error_line(const char* category, const std::string& msg) {
    std::cerr << "error: [" << category << "] " << msg << "\n";
}

struct OutputTarget {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit OutputTarget(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path, std::ios::binary); // binary keeps LF line endings
        if (!file) throw std::ios_base::failure("cannot open output file: " + path);
        os = &file;
    }
    void finish() {
        os->flush();
        if (os->fail()) throw std::ios_base::failure("failed writing output");
    }
};

struct ParamFlags {
    double m = 0, p = 0, beta = 0, b = 0, k = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--m", m, "diffusion exponent m")->required();
        cmd->add_option("--p", p, "gradient exponent p")->required();
        cmd->add_option("--beta", beta, "absorption exponent beta")->required();
        cmd->add_option("--b", b, "absorption coefficient b")->required();
        cmd->add_option("--k", k, "wave speed k")->required();
    }
    tfw::ModelParams validate() const {
        return tfw::validate_params(m, p, beta, b, k);
    }
};

int cmd_trajectory(const ParamFlags& pf, double theta_max, double theta_min,
                   double tol, std::size_t grid_points, const std::string& out) {
    const auto params = pf.validate();
    const auto traj = tfw::solve_trajectory(params, theta_max, tol);
    const double lo = theta_min > 0.0 ? theta_min
                                      : std::max(traj.seed_end * 10.0, theta_max * 1e-4);
    const auto grid = tfw::geometric_grid(lo, traj.theta_max(), grid_points);

    OutputTarget target(out);
    *target.os << "theta,upsilon,rhs\n";
    for (double th : grid) {
        const double u = tfw::eval_trajectory(traj, th);
        *target.os << fmt(th) << ',' << fmt(u) << ','
                   << fmt(tfw::phase_rhs(params, th, u)) << '\n';
    }
    target.finish();
    return kOk;
}

int cmd_profile(const ParamFlags& pf, double theta_max, double z_min,
                double z_max, double tol, double qtol, std::size_t grid_points,
                bool zero_extend, std::optional<double> speed_frame,
                const std::string& out) {
    const auto params = pf.validate();
    const auto traj = tfw::solve_trajectory(params, theta_max, tol);
    const tfw::ProfileReconstructor recon(params, traj, qtol);

    const double reach = 0.99 * recon.z_max();
    const double hi = z_max > 0.0 ? z_max : reach;
    if (hi > recon.z_max())
        throw tfw::RangeExceeded("requested z range exceeds the reachable range " +
                                 fmt(recon.z_max()));
    const double lo = z_min > 0.0 ? z_min : recon.travel_time(traj.seed_end);
    const auto grid = hi > lo ? tfw::geometric_grid(lo, hi, grid_points)
                              : std::vector<double>{lo};
    const auto prof = recon.reconstruct(grid);

    OutputTarget target(out);
    const bool frame = speed_frame.has_value();
    *target.os << (frame ? "z,phi,flux,x,u\n" : "z,phi,flux\n");
    auto row = [&](double z, double phi, double flux) {
        *target.os << fmt(z) << ',' << fmt(phi) << ',' << fmt(flux);
        if (frame)
            *target.os << ',' << fmt(params.k * *speed_frame - z) << ',' << fmt(phi);
        *target.os << '\n';
    };
    if (zero_extend) {
        const std::size_t n = std::min<std::size_t>(10, grid.size());
        for (std::size_t i = n; i > 0; --i) row(-grid[i - 1], 0.0, 0.0);
        row(0.0, 0.0, 0.0);
    }
    for (std::size_t i = 0; i < prof.zs.size(); ++i)
        row(prof.zs[i], prof.phis[i], recon.flux_for_phi(prof.phis[i]));
    target.finish();
    return kOk;
}

int cmd_verify(const ParamFlags& pf, const tfw::VerifyOptions& vopt,
               const std::string& out, const std::string& plot_data) {
    const auto params = pf.validate();
    const auto rep = tfw::run_verification(params, vopt);

    OutputTarget target(out);
    *target.os << tfw::report_to_text(rep);
    target.finish();

    if (!plot_data.empty()) {
        OutputTarget plot(plot_data);
        *plot.os << "target,end,x,ratio\n";
        for (const auto& chk : rep.asymptotes)
            for (std::size_t i = 0; i < chk.fit.xs.size(); ++i)
                *plot.os << tfw::to_string(chk.spec.target) << ','
                         << tfw::to_string(chk.spec.end) << ','
                         << fmt(chk.fit.xs[i]) << ','
                         << fmt(chk.fit.ratios[i]) << '\n';
        plot.finish();
    }
    return rep.pass ? kOk : kVerifyFail;
}

struct SweepCell {
    double m, p, beta, b, k;
};

std::string sweep_row(const SweepCell& c, const tfw::VerifyOptions& vopt) {
    std::ostringstream os;
    os << fmt(c.m) << ',' << fmt(c.p) << ',' << fmt(c.beta) << ',' << fmt(c.b)
       << ',' << fmt(c.k) << ',';
    try {
        const auto params = tfw::validate_params(c.m, c.p, c.beta, c.b, c.k);
        const auto regime = tfw::classify_regime(params);
        os << tfw::to_string(regime.balance) << '-' << tfw::to_string(regime.speed_sign)
           << ',' << fmt(tfw::reaction_constant(params)) << ',';
        try {
            const auto rep = tfw::run_verification(params, vopt);
            if (rep.pass) {
                os << "pass";
            } else {
                bool only_inconclusive_fits = true;
                bool any_non_pass_fit = false;
                for (const auto& a : rep.asymptotes) {
                    if (a.status == tfw::FitStatus::Fail) only_inconclusive_fits = false;
                    if (a.status != tfw::FitStatus::Pass) any_non_pass_fit = true;
                }
                const bool rest_ok =
                    rep.residual.max_rel <= vopt.residual_band &&
                    rep.profile_monotone && rep.bracket_ok && rep.oracle_ok &&
                    (!rep.energy_checked || rep.energy_monotone);
                os << (rest_ok && any_non_pass_fit && only_inconclusive_fits
                           ? "inconclusive"
                           : "fail");
            }
        } catch (const std::exception&) {
            os << "fail";
        }
    } catch (const tfw::DomainError&) {
        os << ",,invalid";
    }
    os << '\n';
    return os.str();
}

int cmd_sweep(const std::vector<double>& ms, const std::vector<double>& ps,
              const std::vector<double>& betas, const std::vector<double>& bs,
              const std::vector<double>& ks, const tfw::VerifyOptions& vopt,
              std::size_t workers, const std::string& out) {
    std::vector<SweepCell> cells;
    for (double m : ms)
        for (double p : ps)
            for (double beta : betas)
                for (double b : bs)
                    for (double k : ks) cells.push_back({m, p, beta, b, k});

    std::vector<std::string> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            rows[i] = sweep_row(cells[i], vopt);
        }
    };
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<std::size_t>(workers, std::max<std::size_t>(1, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    OutputTarget target(out);
    *target.os << "m,p,beta,b,k,regime,c_star,status\n";
    for (const auto& r : rows) *target.os << r;
    target.finish();
    return kOk; // a sweep is a survey; failing cells do not fail the run
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"traveling-wave solver for the doubly degenerate filtration "
                 "equation with absorption"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file (flags override)");

    ParamFlags pf;
    double theta_max = 10.0, theta_min = 0.0;
    double z_min = 0.0, z_max = 0.0;
    double tol = 1e-8, qtol = 1e-9;
    std::size_t grid_points = 200;
    std::string out, plot_data;
    bool zero_extend = false;
    double speed_frame_t = 0.0;
    std::size_t workers = 0;

    auto* cmd_traj = app.add_subcommand("trajectory", "solve the phase-plane trajectory");
    pf.attach(cmd_traj);
    cmd_traj->add_option("--theta-max", theta_max, "largest phi value to reach");
    cmd_traj->add_option("--theta-min", theta_min, "first reported theta (0 = auto)");
    cmd_traj->add_option("--tol", tol, "solver tolerance");
    cmd_traj->add_option("--grid-points", grid_points, "rows in the report grid");
    cmd_traj->add_option("--out", out, "output CSV path (default stdout)");

    double prof_theta_max = 1e4;
    auto* cmd_prof = app.add_subcommand("profile", "reconstruct the wave profile");
    pf.attach(cmd_prof);
    cmd_prof->add_option("--theta-max", prof_theta_max, "largest phi value to reach");
    cmd_prof->add_option("--z-min", z_min, "first reported z (0 = auto)");
    cmd_prof->add_option("--z-max", z_max, "last reported z (0 = reachable range)");
    cmd_prof->add_option("--tol", tol, "solver tolerance");
    cmd_prof->add_option("--qtol", qtol, "quadrature/root tolerance");
    cmd_prof->add_option("--grid-points", grid_points, "rows in the report grid");
    cmd_prof->add_flag("--zero-extend", zero_extend, "emit phi = 0 rows for z <= 0");
    auto* sf = cmd_prof->add_option("--speed-frame", speed_frame_t,
                                    "also emit u(x,t) columns for this t");
    cmd_prof->add_option("--out", out, "output CSV path (default stdout)");

    tfw::VerifyOptions vopt;
    auto* cmd_ver = app.add_subcommand("verify", "run the verification pipeline");
    pf.attach(cmd_ver);
    cmd_ver->add_option("--theta-max", vopt.theta_max, "trajectory range");
    cmd_ver->add_option("--tol", vopt.tol, "solver tolerance");
    cmd_ver->add_option("--qtol", vopt.qtol, "quadrature/root tolerance");
    cmd_ver->add_option("--grid-points", vopt.grid_points, "residual grid size");
    cmd_ver->add_option("--out", out, "report path (default stdout)");
    cmd_ver->add_option("--plot-data", plot_data,
                        "also write asymptote ratio curves to this CSV");

    std::vector<double> ms, ps, betas, bs, ks;
    tfw::VerifyOptions sweep_opt;
    sweep_opt.theta_max = 1e5;
    sweep_opt.tol = 1e-7;
    sweep_opt.qtol = 1e-8;
    sweep_opt.grid_points = 100;
    sweep_opt.origin_fit_theta = 1e-7;
    auto* cmd_sw = app.add_subcommand("sweep", "survey a parameter grid");
    cmd_sw->add_option("--m", ms, "m values")->required()->delimiter(',');
    cmd_sw->add_option("--p", ps, "p values")->required()->delimiter(',');
    cmd_sw->add_option("--beta", betas, "beta values")->required()->delimiter(',');
    cmd_sw->add_option("--b", bs, "b values")->required()->delimiter(',');
    cmd_sw->add_option("--k", ks, "k values")->required()->delimiter(',');
    cmd_sw->add_option("--theta-max", sweep_opt.theta_max, "trajectory range per cell");
    cmd_sw->add_option("--tol", sweep_opt.tol, "solver tolerance");
    cmd_sw->add_option("--workers", workers, "concurrent cells (0 = hardware)");
    cmd_sw->add_option("--out", out, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            app.exit(e);
            return kOk;
        }
        std::cerr << app.help() << "\n";
        error_line("validation", e.what());
        return kValidation;
    }

    try {
        if (cmd_traj->parsed())
            return cmd_trajectory(pf, theta_max, theta_min, tol, grid_points, out);
        if (cmd_prof->parsed()) {
            std::optional<double> frame;
            if (sf->count() > 0) frame = speed_frame_t;
            return cmd_profile(pf, prof_theta_max, z_min, z_max, tol, qtol,
                               grid_points, zero_extend, frame, out);
        }
        if (cmd_ver->parsed()) return cmd_verify(pf, vopt, out, plot_data);
        if (cmd_sw->parsed())
            return cmd_sweep(ms, ps, betas, bs, ks, sweep_opt, workers, out);
    } catch (const tfw::DomainError& e) {
        error_line("validation", e.what());
        return kValidation;
    } catch (const tfw::RangeExceeded& e) {
        error_line("range", e.what());
        return kRange;
    } catch (const tfw::UncoveredRegime& e) {
        error_line("validation", e.what());
        return kValidation;
    } catch (const std::ios_base::failure& e) {
        error_line("io", e.what());
        return kIo;
    } catch (const std::exception& e) {
        error_line("numeric", e.what());
        return kNumeric;
    }
    return kValidation;
}

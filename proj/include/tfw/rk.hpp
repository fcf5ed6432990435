#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "tfw/errors.hpp"

namespace tfw {

struct StepPoint {
    double x;
    double y;
};

enum class IntegrateStatus { Ok, StepCollapse, StepBudget };

struct IntegrateOptions {
    double rtol = 1e-10;
    double atol = 1e-300;
    /// Step cap relative to |x|; keeps the output grid dense enough for
    /// log-log interpolation and second-order difference checks.
    double max_rel_step = 1e-3;
    double h0 = 0.0; ///< 0 = choose from max_rel_step
    std::size_t max_steps = 6'000'000;
};

struct IntegrateResult {
    std::vector<StepPoint> points; ///< accepted steps, includes both endpoints reached
    IntegrateStatus status = IntegrateStatus::Ok;
};

/// Adaptive Dormand-Prince 5(4) for a scalar ODE y' = f(x, y), x0 < x1.
/// Error control is relative per step; steps are additionally capped at
/// max_rel_step * x (the integrations here always run over x > 0).
/// On step collapse or budget exhaustion the partial result is returned
/// with the corresponding status; the caller decides whether that is fatal.
template <class F>
IntegrateResult integrate_adaptive(F&& f, double x0, double y0, double x1,
                                   const IntegrateOptions& opt = {}) {
    // Dormand-Prince RKF coefficients (FSAL).
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    // 4th-order embedded weights.
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695,
                            e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                            e6 = 187.0 / 2100, e7 = 1.0 / 40;

    IntegrateResult res;
    double x = x0, y = y0;
    res.points.push_back({x, y});

    double h = opt.h0 > 0.0 ? opt.h0 : 0.1 * opt.max_rel_step * std::fabs(x0);
    if (!(h > 0.0)) h = 1e-3 * (x1 - x0);
    double k1 = f(x, y);

    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        if (x >= x1) return res;
        const double hmax = opt.max_rel_step * std::max(std::fabs(x), std::fabs(x0));
        h = std::min(h, hmax);
        if (x + h > x1) h = x1 - x;
        if (!(h > std::fabs(x) * 1e-15) || !std::isfinite(h)) {
            res.status = IntegrateStatus::StepCollapse;
            return res;
        }

        const double k2 = f(x + c2 * h, y + h * a21 * k1);
        const double k3 = f(x + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const double k4 = f(x + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const double k5 = f(x + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const double k6 = f(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double k7 = f(x + h, y5);
        const double y4 = y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale = opt.atol + opt.rtol * std::max(std::fabs(y), std::fabs(y5));
        const double err = std::fabs(y5 - y4) / scale;

        if (err <= 1.0 && std::isfinite(y5)) {
            x += h;
            y = y5;
            k1 = k7; // FSAL
            res.points.push_back({x, y});
            const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::min(5.0, std::max(0.2, fac));
        } else {
            const double fac = std::isfinite(err) && err > 0.0
                                   ? 0.9 * std::pow(err, -0.2)
                                   : 0.1;
            h *= std::max(0.1, std::min(0.9, fac));
        }
    }
    res.status = IntegrateStatus::StepBudget;
    return res;
}

/// Classical fixed-step RK4 for y' = f(x, y) on [x0, x1] at step h.
/// Deterministic; every lattice value is reported through `observe`.
/// Throws IntegrationFailure if the solution or a stage value would
/// cross zero when require_positive is set.
template <class F, class Observer>
void integrate_fixed_rk4(F&& f, double x0, double y0, double x1, double h,
                         Observer&& observe, bool require_positive = true) {
    if (!(h > 0.0) || !(x1 > x0))
        throw DomainError("integrate_fixed_rk4 requires h > 0 and x1 > x0");
    const auto n = static_cast<std::size_t>(std::ceil((x1 - x0) / h - 1e-12));
    double y = y0;
    observe(x0, y);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = x0 + static_cast<double>(i) * h;
        const double hs = std::min(h, x1 - x);
        const double s1 = f(x, y);
        const double y2 = y + 0.5 * hs * s1;
        const double s2 = f(x + 0.5 * hs, y2);
        const double y3 = y + 0.5 * hs * s2;
        const double s3 = f(x + 0.5 * hs, y3);
        const double y4 = y + hs * s3;
        const double s4 = f(x + hs, y4);
        const double yn = y + hs / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
        if (require_positive && (y2 <= 0.0 || y3 <= 0.0 || y4 <= 0.0 || yn <= 0.0))
            throw IntegrationFailure("fixed-step solution crossed zero near x = " +
                                     std::to_string(x));
        y = yn;
        observe(x + hs, y);
    }
}

} // namespace tfw

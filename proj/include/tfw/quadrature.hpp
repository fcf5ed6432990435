#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace tfw {

namespace detail {

// 15-point Kronrod nodes on [-1,1] with the embedded 7-point Gauss rule.
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct PanelResult {
    double value;
    double error;
};

/// One (G7, K15) panel over [a, b]. The nodes are interior, so integrable
/// endpoint singularities are never evaluated. |K - G| overestimates the
/// Kronrod error; conservative is fine, splits are cheap.
template <class F>
PanelResult gk15_panel(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(center - half * kXgk[i]);
        fv[14 - i] = f(center + half * kXgk[i]);
    }
    fv[7] = f(center);
    double kron = kWgk[7] * fv[7];
    double gauss = kWg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        kron += kWgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) gauss += kWg[i / 2] * (fv[i] + fv[14 - i]);
    }
    return {kron * half, std::fabs(kron - gauss) * std::fabs(half)};
}

} // namespace detail

struct QuadratureResult {
    double value;
    double error_estimate;
    std::size_t evaluations;
};

/// Adaptive Gauss-Kronrod (G7, K15) integration of f over [a, b].
/// Bisects the subinterval with the worst error estimate until the summed
/// estimate drops below max(rel_tol*|I|, abs_tol). Throws
/// QuadratureFailure once max_intervals subintervals are in play.
QuadratureResult integrate_gk(const std::function<double(double)>& f,
                              double a, double b,
                              double rel_tol, double abs_tol = 0.0,
                              std::size_t max_intervals = 4096);

} // namespace tfw

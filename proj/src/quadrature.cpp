#include "tfw/quadrature.hpp"

#include <algorithm>
#include <queue>
#include <vector>

#include "tfw/errors.hpp"

namespace tfw {

namespace {

struct Panel {
    double a, b;
    double value;
    double error;
};

Panel make_panel(const std::function<double(double)>& f, double a, double b) {
    const auto r = detail::gk15_panel(f, a, b);
    return {a, b, r.value, r.error};
}

} // namespace

QuadratureResult integrate_gk(const std::function<double(double)>& f,
                              double a, double b,
                              double rel_tol, double abs_tol,
                              std::size_t max_intervals) {
    if (a == b) return {0.0, 0.0, 0};
    auto worse = [](const Panel& l, const Panel& r) { return l.error < r.error; };
    std::priority_queue<Panel, std::vector<Panel>, decltype(worse)> heap(worse);

    std::size_t evals = 15;
    heap.push(make_panel(f, a, b));
    double total = heap.top().value;
    double total_err = heap.top().error;

    while (true) {
        const double goal = std::max(rel_tol * std::fabs(total), abs_tol);
        if (total_err <= goal || total_err <= 1e-16 * std::fabs(total)) break;
        if (heap.size() >= max_intervals)
            throw QuadratureFailure("adaptive quadrature exceeded its interval budget");
        Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Unsplittable in double precision; accept its contribution.
            heap.pop();
            total_err -= worst.error;
            worst.error = 0.0;
            heap.push(worst);
            if (total_err < 0.0) total_err = 0.0;
            continue;
        }
        heap.pop();
        const Panel left = make_panel(f, worst.a, mid);
        const Panel right = make_panel(f, mid, worst.b);
        evals += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if (total_err < 0.0) total_err = 0.0;
    }
    return {total, total_err, evals};
}

} // namespace tfw

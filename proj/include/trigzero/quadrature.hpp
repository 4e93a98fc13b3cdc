#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace trigzero {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

struct SimpsonOptions {
    double abs_tol = 1e-10;
    std::size_t max_evaluations = std::size_t{1} << 20;
    // Uniform pre-split; oscillatory integrands need a few points per period
    // before the error estimate can be trusted.
    std::size_t initial_pieces = 1;
    int max_depth = 60;
    // A cell is also accepted once the refinement change is below this
    // fraction of its value (integrands computed with cancellation).
    double rel_floor = 0.0;
};

namespace detail {

struct SimpsonCell {
    double a, b;
    double fa, fm, fb;
    double whole;
    double tol;
    int depth;
};

}  // namespace detail

/// Adaptive Simpson with interval bisection (Richardson-corrected).
/// A cell is accepted when |S_left + S_right - S_whole| <= 15 tol_cell; the
/// tolerance is halved on each split. Non-convergence (evaluation budget or
/// depth exhausted) is reported through `converged`, never thrown.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, const SimpsonOptions& opt = {}) {
    QuadratureResult res;
    if (a == b) return res;
    const std::size_t pieces = std::max<std::size_t>(1, opt.initial_pieces);
    const double width = (b - a) / static_cast<double>(pieces);
    const double piece_tol = opt.abs_tol / static_cast<double>(pieces);

    std::vector<detail::SimpsonCell> stack;
    stack.reserve(128);
    double prev_b_value = f(a);
    res.evaluations = 1;
    for (std::size_t p = 0; p < pieces; ++p) {
        const double lo = a + width * static_cast<double>(p);
        const double hi = p + 1 == pieces ? b : a + width * static_cast<double>(p + 1);
        const double mid = 0.5 * (lo + hi);
        const double fa = prev_b_value;
        const double fm = f(mid);
        const double fb = f(hi);
        res.evaluations += 2;
        prev_b_value = fb;
        stack.push_back({lo, hi, fa, fm, fb, (hi - lo) / 6.0 * (fa + 4.0 * fm + fb), piece_tol, 0});

        while (!stack.empty()) {
            const detail::SimpsonCell c = stack.back();
            stack.pop_back();
            const double m = 0.5 * (c.a + c.b);
            const double lm = 0.5 * (c.a + m);
            const double rm = 0.5 * (m + c.b);
            const double flm = f(lm);
            const double frm = f(rm);
            res.evaluations += 2;
            const double left = (m - c.a) / 6.0 * (c.fa + 4.0 * flm + c.fm);
            const double right = (c.b - m) / 6.0 * (c.fm + 4.0 * frm + c.fb);
            const double delta = left + right - c.whole;
            const bool budget_left = res.evaluations < opt.max_evaluations;
            const bool settled =
                std::abs(delta) <= 15.0 * c.tol || std::abs(delta) <= opt.rel_floor * std::abs(left + right);
            if (settled || c.depth >= opt.max_depth || !budget_left) {
                if (!settled) res.converged = false;
                res.value += settled ? left + right + delta / 15.0 : left + right;
                res.error_estimate += std::abs(delta) / 15.0;
                continue;
            }
            stack.push_back({m, c.b, c.fm, frm, c.fb, right, 0.5 * c.tol, c.depth + 1});
            stack.push_back({c.a, m, c.fa, flm, c.fm, left, 0.5 * c.tol, c.depth + 1});
        }
    }
    return res;
}

/// Integrates over [a, b] splitting at the given breakpoints (kinks or peaks of
/// the integrand). Breakpoints outside (a, b) are ignored.
template <class F>
QuadratureResult integrate_with_breakpoints(F&& f, double a, double b, std::span<const double> breaks,
                                            const SimpsonOptions& opt = {}) {
    std::vector<double> nodes{a};
    for (double x : breaks) {
        if (x > a && x < b) nodes.push_back(x);
    }
    nodes.push_back(b);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double u, double v) { return std::abs(u - v) < 1e-14; }),
                nodes.end());

    QuadratureResult total;
    total.evaluations = 0;
    const double span = b - a;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        SimpsonOptions sub = opt;
        const double frac = (nodes[i + 1] - nodes[i]) / span;
        sub.abs_tol = opt.abs_tol * std::max(frac, 1e-6);
        sub.initial_pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(frac * static_cast<double>(opt.initial_pieces))));
        sub.max_evaluations = opt.max_evaluations > total.evaluations ? opt.max_evaluations - total.evaluations : 0;
        const auto part = adaptive_simpson(f, nodes[i], nodes[i + 1], sub);
        total.value += part.value;
        total.error_estimate += part.error_estimate;
        total.evaluations += part.evaluations;
        total.converged = total.converged && part.converged;
    }
    return total;
}

}  // namespace trigzero

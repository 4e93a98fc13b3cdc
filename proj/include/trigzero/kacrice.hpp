#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trigzero/errors.hpp"
#include "trigzero/kernels.hpp"
#include "trigzero/spectral.hpp"

namespace trigzero {

inline constexpr double degenerate_variance = 1e-14;

/// sqrt(I_n(x))/n from the three moments; nullopt when s0 is degenerate.
inline std::optional<double> integrand_from_moments(double s0, double s1, double s2, std::size_t n) {
    if (!(s0 >= degenerate_variance)) return std::nullopt;
    const double nn = static_cast<double>(n);
    const double q = s1 / (nn * s0);
    const double radicand = s2 / (nn * nn * s0) - q * q;
    return std::sqrt(std::max(0.0, radicand));
}

/// Normalized Kac-Rice integrand at a single point.
inline double integrand_at(const CorrelationSequence& rho, std::size_t n, double x) {
    const auto kc = KernelCoefficients::make(n);
    const auto pm = moments_at(rho, kc, x);
    auto v = integrand_from_moments(pm.s0, pm.s1, pm.s2, n);
    if (!v) throw NumericalFailure("integrand_at: degenerate variance at x = " + std::to_string(x));
    return *v;
}

struct KacRiceProfile {
    std::size_t n = 0;
    std::size_t m = 0;  // cells per full period on the final grid
    double a = 0.0;
    double b = two_pi;
    std::vector<double> grid;       // evaluation points (cell midpoints)
    std::vector<double> integrand;  // sqrt(I_n)/n at grid points; NaN where skipped
    double ratio = 0.0;             // E[N(f_n,[a,b])]/n
    double quadrature_error_estimate = 0.0;
    bool converged = false;
    std::size_t skipped_points = 0;
};

struct KacRiceOptions {
    double rel_tol = 1e-4;
    std::size_t start_grid = 0;  // 0: default_grid_size(n)
    std::size_t max_grid = std::size_t{1} << 22;
    bool keep_profile = false;
};

namespace detail {

/// Integrand averaged over sub-midpoints of a cell whose midpoint was degenerate.
inline std::optional<double> subdivided_cell(const CorrelationSequence& rho, const KernelCoefficients& kc, double lo,
                                             double hi) {
    constexpr int parts = 4;
    double acc = 0.0;
    int used = 0;
    for (int j = 0; j < parts; ++j) {
        const double x = lo + (hi - lo) * (j + 0.5) / parts;
        const auto pm = moments_at(rho, kc, x);
        if (auto v = integrand_from_moments(pm.s0, pm.s1, pm.s2, kc.n)) {
            acc += *v;
            ++used;
        }
    }
    if (used == 0) return std::nullopt;
    return acc / used;
}

struct MidpointPass {
    double integral = 0.0;
    std::size_t skipped = 0;
    std::size_t refined_runs = 0;
    bool refined_converged = true;
    std::vector<double> grid;
    std::vector<double> values;
};

/// Near a local minimum x0 of s0 the model s0 ~ eps + c (x - x0)^2 (fitted
/// from s0 and s1 = s0'/2 at two consecutive midpoints) gives a peak of the
/// integrand of width sqrt(eps/c) with a 1/|x - x0| shoulder reaching out to
/// the lobe scale 1/n. Peaks narrower than `peak_width_lobes` * pi/n are
/// integrated adaptively over x0 +- `peak_halo_lobes` * pi/n; both thresholds
/// depend on n only, so the refined set does not change when the grid doubles.
inline constexpr double peak_width_lobes = 0.25;
inline constexpr double peak_halo_lobes = 0.5;

/// Root of s1 = s0'/2 inside a bracket [lo, hi] with s1(lo) < 0 < s1(hi),
/// by regula falsi with the Illinois modification.
inline double locate_variance_minimum(const CorrelationSequence& rho, const KernelCoefficients& kc, double lo,
                                      double flo, double hi, double fhi) {
    int side = 0;
    double x = lo;
    for (int it = 0; it < 60 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        x = (lo * fhi - hi * flo) / (fhi - flo);
        if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
        const double fx = moments_at(rho, kc, x).s1;
        if (fx == 0.0) return x;
        if (fx < 0.0) {
            lo = x;
            flo = fx;
            if (side == -1) fhi *= 0.5;
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (side == 1) flo *= 0.5;
            side = 1;
        }
    }
    return x;
}

/// Adaptive integral of the integrand over [lo, hi], split at peak locations.
inline double refined_integral(const CorrelationSequence& rho, const KernelCoefficients& kc, double lo, double hi,
                               std::span<const double> peaks, bool& converged) {
    SimpsonOptions opt;
    opt.abs_tol = 1e-7 * (hi - lo);
    opt.max_evaluations = std::size_t{1} << 14;
    opt.initial_pieces = 4;
    opt.rel_floor = 1e-6;
    opt.max_depth = 40;
    auto res = integrate_with_breakpoints(
        [&](double x) {
            const auto pm = moments_at(rho, kc, x);
            return integrand_from_moments(pm.s0, pm.s1, pm.s2, kc.n).value_or(0.0);
        },
        lo, hi, peaks, opt);
    converged = converged && res.converged;
    return res.value;
}

/// Composite midpoint rule for int_a^b integrand over the partition made of
/// the global cells [2 pi i/M, 2 pi (i+1)/M] clipped to [a, b]. Interior cells
/// reuse one FFT profile evaluated at the global midpoints; cells holding an
/// unresolved peak are integrated adaptively instead.
inline MidpointPass midpoint_pass(const CorrelationSequence& rho, const KernelCoefficients& kc, std::size_t m,
                                  double a, double b, bool keep) {
    MidpointPass out;
    const double h = two_pi / static_cast<double>(m);
    const auto prof = convolution_profile(rho, kc.n, m, 0.5 * h);
    const auto first = static_cast<std::size_t>(std::floor(a / h));
    const auto last = std::min<std::size_t>(m, static_cast<std::size_t>(std::ceil(b / h)));
    const bool full_period = a == 0.0 && b == two_pi;

    // Peak detection on consecutive midpoint pairs (i, i+1 mod m).
    std::vector<double> peak_at(m, std::numeric_limits<double>::quiet_NaN());
    std::vector<char> refine(m, 0);
    const double lobe = pi / static_cast<double>(kc.n);
    const double width_limit = peak_width_lobes * lobe;
    const auto halo = static_cast<long long>(std::ceil(peak_halo_lobes * lobe / h));
    const auto mm = static_cast<long long>(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = (i + 1) % m;
        if (j == 0 && !full_period) continue;
        if (!(prof.s1[i] < 0.0 && prof.s1[j] > 0.0)) continue;
        const double c = (prof.s1[j] - prof.s1[i]) / h;
        const double eps = prof.s0[i] - prof.s1[i] * prof.s1[i] / c;
        if (eps > c * width_limit * width_limit) continue;
        const double x0 = locate_variance_minimum(rho, kc, prof.x(i), prof.s1[i], prof.x(i) + h, prof.s1[j]);
        const auto centre = static_cast<long long>(i);
        for (long long k = centre - halo; k <= centre + 1 + halo; ++k) {
            if (!full_period && (k < 0 || k >= mm)) continue;
            refine[static_cast<std::size_t>(((k % mm) + mm) % mm)] = 1;
        }
        const double x0_wrapped = x0 >= two_pi ? x0 - two_pi : x0;
        const auto cell = std::min<std::size_t>(m - 1, static_cast<std::size_t>(x0_wrapped / h));
        peak_at[cell] = x0_wrapped;
    }

    std::vector<double> run_peaks;
    double run_lo = 0.0, run_hi = 0.0;
    bool in_run = false;
    auto flush = [&] {
        if (!in_run) return;
        out.integral += refined_integral(rho, kc, run_lo, run_hi, run_peaks, out.refined_converged);
        ++out.refined_runs;
        run_peaks.clear();
        in_run = false;
    };

    for (std::size_t i = first; i < last; ++i) {
        const double lo = std::max(a, h * static_cast<double>(i));
        const double hi = std::min(b, h * static_cast<double>(i + 1));
        if (hi <= lo) continue;
        const bool interior = lo == h * static_cast<double>(i) && hi == h * static_cast<double>(i + 1);
        std::optional<double> v;
        double x;
        if (interior) {
            x = prof.x(i);
            v = integrand_from_moments(prof.s0[i], prof.s1[i], prof.s2[i], kc.n);
        } else {
            x = 0.5 * (lo + hi);
            const auto pm = moments_at(rho, kc, x);
            v = integrand_from_moments(pm.s0, pm.s1, pm.s2, kc.n);
        }
        if (keep) {
            out.grid.push_back(x);
            out.values.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
        }
        if (refine[i]) {
            if (!in_run) {
                in_run = true;
                run_lo = lo;
            }
            run_hi = hi;
            if (!std::isnan(peak_at[i]) && peak_at[i] > lo && peak_at[i] < hi) run_peaks.push_back(peak_at[i]);
            continue;
        }
        flush();
        if (!v) v = subdivided_cell(rho, kc, lo, hi);
        if (v) {
            out.integral += *v * (hi - lo);
        } else {
            ++out.skipped;
        }
    }
    flush();
    return out;
}

}  // namespace detail

/// E[N(f_n, [a, b])] / n = (1/(pi n)) int_a^b sqrt(I_n(x)) dx, by the
/// composite midpoint rule doubled until the relative change is below rel_tol
/// or the grid budget is spent (then `converged` is false).
inline KacRiceProfile expected_zero_ratio(const CorrelationSequence& rho, std::size_t n, double a = 0.0,
                                          double b = two_pi, const KacRiceOptions& opt = {}) {
    if (!(a >= 0.0 && a < b && b <= two_pi)) throw InvalidInput("expected_zero_ratio: requires 0 <= a < b <= 2 pi");
    const auto kc = KernelCoefficients::make(n);
    rho.require_lag(n, "expected_zero_ratio");
    std::size_t m = opt.start_grid ? opt.start_grid : default_grid_size(n);
    m = std::max(m, next_power_of_two(2 * n + 2));

    KacRiceProfile out;
    out.n = n;
    out.a = a;
    out.b = b;
    auto pass = detail::midpoint_pass(rho, kc, m, a, b, opt.keep_profile);
    double prev = pass.integral / pi;
    for (;;) {
        if (2 * m > opt.max_grid) {
            out.converged = false;
            out.quadrature_error_estimate = std::numeric_limits<double>::infinity();
            break;
        }
        m *= 2;
        auto next = detail::midpoint_pass(rho, kc, m, a, b, opt.keep_profile);
        const double cur = next.integral / pi;
        const double change = std::abs(cur - prev);
        pass = std::move(next);
        out.quadrature_error_estimate = change;
        prev = cur;
        if (change <= opt.rel_tol * std::abs(cur)) {
            out.converged = true;
            break;
        }
    }
    out.m = m;
    out.ratio = prev;
    out.skipped_points = pass.skipped;
    if (opt.keep_profile) {
        out.grid = std::move(pass.grid);
        out.integrand = std::move(pass.values);
    }
    return out;
}

/// Integrand sampled on the global midpoint grid of size m over [0, 2 pi).
inline KacRiceProfile integrand_profile(const CorrelationSequence& rho, std::size_t n, std::size_t m = 0) {
    const auto kc = KernelCoefficients::make(n);
    if (m == 0) m = default_grid_size(n);
    auto pass = detail::midpoint_pass(rho, kc, m, 0.0, two_pi, true);
    KacRiceProfile out;
    out.n = n;
    out.m = m;
    out.grid = std::move(pass.grid);
    out.integrand = std::move(pass.values);
    out.ratio = pass.integral / pi;
    out.skipped_points = pass.skipped;
    out.quadrature_error_estimate = std::numeric_limits<double>::quiet_NaN();
    return out;
}

enum class LimitRegime { non_universal, universal, atomic_nonconvergent };

inline std::string to_string(LimitRegime r) {
    switch (r) {
        case LimitRegime::non_universal: return "non_universal";
        case LimitRegime::universal: return "universal";
        case LimitRegime::atomic_nonconvergent: return "atomic_nonconvergent";
    }
    return "unknown";
}

struct LimitPrediction {
    double limit = 0.0;
    LimitRegime regime = LimitRegime::universal;
    double nodal_measure = 0.0;
    // Adherence interval for the atomic regime.
    double lower = 0.0;
    double upper = 0.0;
};

inline const double universal_limit = 2.0 / std::sqrt(3.0);

/// lambda/(pi sqrt 2) + (2 pi - lambda)/(pi sqrt 3) for nodal measure lambda.
inline double non_universal_limit(double lambda) {
    return lambda / (pi * std::sqrt(2.0)) + (two_pi - lambda) / (pi * std::sqrt(3.0));
}

inline LimitPrediction predict_from_nodal_measure(double lambda) {
    LimitPrediction p;
    p.nodal_measure = lambda;
    p.limit = non_universal_limit(lambda);
    p.regime = lambda > 0.0 ? LimitRegime::non_universal : LimitRegime::universal;
    p.lower = p.upper = p.limit;
    return p;
}

inline LimitPrediction predicted_limit(const DensitySpec& d) { return predict_from_nodal_measure(nodal_measure(d)); }

/// Purely atomic measures have no limit; the adherence interval [sqrt 2, 2] is attached.
inline LimitPrediction predicted_limit(const SpectralMeasure& m) {
    if (m.density()) return predicted_limit(*m.density());
    LimitPrediction p;
    p.regime = LimitRegime::atomic_nonconvergent;
    p.nodal_measure = two_pi;
    p.lower = std::sqrt(2.0);
    p.upper = 2.0;
    p.limit = std::numeric_limits<double>::quiet_NaN();
    return p;
}

struct L2LimitDiagnostic {
    std::vector<double> grid;
    std::vector<double> fejer_side;  // n (K_n * psi - psi)
    std::vector<double> ln_side;     // (2/(n alpha_n)) (L_n * psi - psi)
    double tail = 0.0;               // sum_{n<k<=4n} k^2 rho(k)^2
    bool reliable = true;
};

inline constexpr double l2_tail_tolerance = 1e-6;

/// Both pre-limits of the operator L[psi] = -sum |k| rho(k) e^{ikx}, with psi
/// taken against the normalized measure dx/2pi (so K_n * psi = s0 and
/// L_n * psi = alpha_n s2). Where psi vanishes both sides tend to the same
/// value, which is what produces the 1/sqrt(2) branch of the integrand.
inline L2LimitDiagnostic l2_limit_operator(const CorrelationSequence& rho, const DensitySpec& density, std::size_t n,
                                           std::span<const double> grid) {
    const auto kc = KernelCoefficients::make(n);
    L2LimitDiagnostic out;
    out.grid.assign(grid.begin(), grid.end());
    const std::size_t tail_end = std::min<std::size_t>(4 * n, rho.max_lag());
    for (std::size_t k = n + 1; k <= tail_end; ++k) {
        const double kk = static_cast<double>(k);
        out.tail += kk * kk * rho[static_cast<long long>(k)] * rho[static_cast<long long>(k)];
    }
    out.reliable = rho.max_lag() >= 4 * n && out.tail < l2_tail_tolerance;
    const double nn = static_cast<double>(n);
    for (double x : grid) {
        const auto pm = moments_at(rho, kc, x);
        const double psi_norm = two_pi * density(x);
        out.fejer_side.push_back(nn * (pm.s0 - psi_norm));
        out.ln_side.push_back(2.0 / (nn * kc.alpha) * (kc.alpha * pm.s2 - psi_norm));
    }
    return out;
}

}  // namespace trigzero

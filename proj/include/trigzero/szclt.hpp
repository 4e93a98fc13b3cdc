#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "trigzero/errors.hpp"
#include "trigzero/kernels.hpp"
#include "trigzero/quadrature.hpp"
#include "trigzero/spectral.hpp"
#include "trigzero/zeros.hpp"

namespace trigzero {

enum class CurveKind { empirical, conditional, limit };

inline std::string to_string(CurveKind k) {
    switch (k) {
        case CurveKind::empirical: return "empirical";
        case CurveKind::conditional: return "conditional";
        case CurveKind::limit: return "limit";
    }
    return "unknown";
}

struct CharFunctionCurve {
    std::vector<double> t;
    std::vector<cplx> values;
    CurveKind kind = CurveKind::empirical;
    std::size_t n = 0;  // 0 for the limit curve
};

/// 61 points on [-3, 3].
inline std::vector<double> default_t_grid(std::size_t points = 61, double t_max = 3.0) {
    std::vector<double> t(points);
    for (std::size_t i = 0; i < points; ++i) {
        t[i] = -t_max + 2.0 * t_max * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    if (points % 2 == 1) t[points / 2] = 0.0;
    return t;
}

/// E_X exp(i t f_n(X)) with X uniform, as the average over the M-point grid.
inline CharFunctionCurve empirical_cf(const CoefficientSample& s, const std::vector<double>& t_grid, std::size_t m = 0) {
    if (m == 0) m = std::max<std::size_t>(4096, next_power_of_two(32 * s.n));
    if (!is_power_of_two(m) || m < 32 * s.n) throw InvalidInput("empirical_cf: M must be a power of two >= 32 n");
    const auto f = evaluate_grid(s, m);
    CharFunctionCurve c;
    c.t = t_grid;
    c.kind = CurveKind::empirical;
    c.n = s.n;
    c.values.resize(t_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        const double t = t_grid[j];
        if (t == 0.0) {
            c.values[j] = 1.0;
            continue;
        }
        double re = 0.0, im = 0.0;
        for (double v : f) {
            re += std::cos(t * v);
            im += std::sin(t * v);
        }
        c.values[j] = cplx{re, im} / static_cast<double>(m);
    }
    return c;
}

/// E_X exp(-(t^2/2) s0(X)) with s0 = E f_n^2 on the M-point grid.
inline CharFunctionCurve conditional_cf(const CorrelationSequence& rho, std::size_t n,
                                        const std::vector<double>& t_grid, std::size_t m = 0) {
    if (m == 0) m = default_grid_size(n);
    rho.require_lag(n, "conditional_cf");
    const auto s0 = trig_sum_on_grid(
        [&](long long r) {
            const auto ar = static_cast<std::size_t>(r < 0 ? -r : r);
            return cplx{(1.0 - static_cast<double>(ar) / static_cast<double>(n)) * rho[r], 0.0};
        },
        n, m);
    CharFunctionCurve c;
    c.t = t_grid;
    c.kind = CurveKind::conditional;
    c.n = n;
    c.values.resize(t_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        const double t = t_grid[j];
        if (t == 0.0) {
            c.values[j] = 1.0;
            continue;
        }
        double acc = 0.0;
        for (double v : s0) acc += std::exp(-0.5 * t * t * std::max(v, 0.0));
        c.values[j] = acc / static_cast<double>(m);
    }
    return c;
}

inline constexpr double limit_cf_tolerance = 1e-8;

/// (1/2 pi) int_0^{2 pi} exp(-(t^2/2) 2 pi psi(x)) dx.
inline CharFunctionCurve limit_cf(const DensitySpec& d, const std::vector<double>& t_grid) {
    CharFunctionCurve c;
    c.t = t_grid;
    c.kind = CurveKind::limit;
    c.values.resize(t_grid.size());
    const auto bp = d.breakpoints();
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        const double t = t_grid[j];
        if (t == 0.0) {
            c.values[j] = 1.0;
            continue;
        }
        SimpsonOptions opt;
        opt.abs_tol = limit_cf_tolerance;
        opt.initial_pieces = 16;
        // Symmetric in x: (1/pi) int_0^pi.
        const auto res = integrate_with_breakpoints(
            [&](double x) { return std::exp(-0.5 * t * t * two_pi * d(x)); }, 0.0, pi, bp, opt);
        if (!res.converged) throw NumericalFailure("limit_cf: quadrature did not converge at t = " + std::to_string(t));
        c.values[j] = std::min(1.0, res.value / pi);
    }
    return c;
}

/// sup over the common grid of |c1 - c2|.
inline double cf_distance(const CharFunctionCurve& c1, const CharFunctionCurve& c2) {
    if (c1.t != c2.t || c1.values.size() != c1.t.size() || c2.values.size() != c2.t.size()) {
        throw InvalidInput("cf_distance: curves must share the same t grid");
    }
    double d = 0.0;
    for (std::size_t j = 0; j < c1.t.size(); ++j) d = std::max(d, std::abs(c1.values[j] - c2.values[j]));
    return d;
}

/// sin(t)/t, with 1 - t^2/6 for |t| < 1e-8.
inline double sinc(double t) {
    if (std::abs(t) < 1e-8) return 1.0 - t * t / 6.0;
    return std::sin(t) / t;
}

struct LocalizedCovarianceCheck {
    double x0 = 0.0;
    std::vector<double> t_points;
    std::vector<double> lambdas;
    double variance_n = 0.0;
    std::optional<double> variance_limit;  // empty when the measure has no density

    std::optional<double> relative_gap() const {
        if (!variance_limit || *variance_limit == 0.0) return std::nullopt;
        return std::abs(variance_n - *variance_limit) / *variance_limit;
    }
};

/// Var[sum_p lambda_p f_n(X0 + t_p/n)] against its limit
/// 2 pi psi(X0) sum_{p,q} lambda_p lambda_q sinc(t_p - t_q).
inline LocalizedCovarianceCheck localized_variance(const CorrelationSequence& rho, const SpectralMeasure& measure,
                                                   std::size_t n, double x0, const std::vector<double>& t_points,
                                                   const std::vector<double>& lambdas) {
    if (t_points.size() != lambdas.size() || t_points.empty()) {
        throw InvalidInput("localized_variance: t_points and lambdas must be nonempty and of equal length");
    }
    for (double t : t_points) {
        if (!(t >= 0.0 && t <= two_pi)) throw InvalidInput("localized_variance: t_points must lie in [0, 2 pi]");
    }
    rho.require_lag(n, "localized_variance");
    const double nn = static_cast<double>(n);
    LocalizedCovarianceCheck out;
    out.x0 = x0;
    out.t_points = t_points;
    out.lambdas = lambdas;
    double sinc_form = 0.0;
    for (std::size_t p = 0; p < t_points.size(); ++p) {
        for (std::size_t q = 0; q < t_points.size(); ++q) {
            const double w = lambdas[p] * lambdas[q];
            out.variance_n += w * two_point_cov(rho, n, x0 + t_points[p] / nn, x0 + t_points[q] / nn);
            sinc_form += w * sinc(t_points[p] - t_points[q]);
        }
    }
    if (measure.density()) out.variance_limit = two_pi * (*measure.density())(x0) * sinc_form;
    return out;
}

struct NormalizationSum {
    double sum = 0.0;
    double sinc_limit = 0.0;
};

/// sum_{p,q} lambda_p lambda_q (1/n) sum_{k=1}^n cos(k (t_p - t_q)/n) and its sinc limit.
inline NormalizationSum normalization_sum(std::size_t n, const std::vector<double>& t_points,
                                          const std::vector<double>& lambdas) {
    if (n < 1) throw InvalidInput("normalization_sum: n must be >= 1");
    if (t_points.size() != lambdas.size()) throw InvalidInput("normalization_sum: size mismatch");
    const double nn = static_cast<double>(n);
    NormalizationSum out;
    for (std::size_t p = 0; p < t_points.size(); ++p) {
        for (std::size_t q = 0; q < t_points.size(); ++q) {
            const double d = t_points[p] - t_points[q];
            double inner = 0.0;
            for (std::size_t k = 1; k <= n; ++k) inner += std::cos(static_cast<double>(k) * d / nn);
            out.sum += lambdas[p] * lambdas[q] * inner / nn;
            out.sinc_limit += lambdas[p] * lambdas[q] * sinc(d);
        }
    }
    return out;
}

/// Mean of |E f_n(x) f_n(y)| over the P x P grid of [0, 2 pi)^2, P a power of
/// two. The double sum (1/n) sum_{k,l} rho(k-l) e^{i(kx - ly)} is folded to
/// frequencies mod P and evaluated by a two-dimensional transform.
inline double mean_abs_two_point_cov(const CorrelationSequence& rho, std::size_t n, std::size_t points = 256) {
    if (!is_power_of_two(points)) throw InvalidInput("mean_abs_two_point_cov: grid size must be a power of two");
    rho.require_lag(n, "mean_abs_two_point_cov");
    const std::size_t p = points;
    std::vector<cplx> folded(p * p, cplx{0.0, 0.0});
    for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t l = 1; l <= n; ++l) {
            folded[(k % p) * p + (l % p)] += rho[static_cast<long long>(k) - static_cast<long long>(l)];
        }
    }
    // Rows carry e^{+i k x}, columns e^{-i l y}.
    std::vector<cplx> line(p);
    for (std::size_t q = 0; q < p; ++q) {
        for (std::size_t r = 0; r < p; ++r) line[r] = folded[r * p + q];
        fft_inplace(line, FftDirection::inverse);
        for (std::size_t r = 0; r < p; ++r) folded[r * p + q] = line[r];
    }
    for (std::size_t r = 0; r < p; ++r) {
        fft_inplace(std::span<cplx>(folded.data() + r * p, p), FftDirection::forward);
    }
    double total = 0.0;
    for (const auto& v : folded) total += std::abs(v.real());
    return total / (static_cast<double>(n) * static_cast<double>(p * p));
}

}  // namespace trigzero

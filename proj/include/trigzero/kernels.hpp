#pragma once

// Fejer kernel K_n, its derivative K_n', the derivative-weighted kernel L_n
// and the polarized (bivariate) Fejer kernel, plus the three moment profiles
//   s0 = E[f_n^2],  s1 = E[f_n f_n'],  s2 = E[f_n'^2]
// computed as finite Fourier sums in rho.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "trigzero/errors.hpp"
#include "trigzero/fft.hpp"
#include "trigzero/quadrature.hpp"
#include "trigzero/spectral.hpp"

namespace trigzero {

inline constexpr double kernel_singularity_guard = 1e-8;

/// alpha_n = 6 / ((n+1)(2n+1)), the inverse of sum_{k<=n} k^2 / n.
inline double alpha_n(std::size_t n) {
    const double nn = static_cast<double>(n);
    return 6.0 / ((nn + 1.0) * (2.0 * nn + 1.0));
}

struct KernelCoefficients {
    std::size_t n = 0;
    std::vector<double> fejer;        // r = 0..n : 1 - r/n
    std::vector<double> ln_scaled;    // r = 0..n-1 : (1/n) sum_{k=1}^{n-r} k(r+k)
    std::vector<double> fejer_prime;  // r = 0..n : r(1 - r/n), entry 0 unused (= 0)
    double alpha = 0.0;

    static KernelCoefficients make(std::size_t n) {
        if (n < 1) throw InvalidInput("kernels: degree n must be >= 1");
        KernelCoefficients c;
        c.n = n;
        c.alpha = alpha_n(n);
        const double nn = static_cast<double>(n);
        c.fejer.resize(n + 1);
        c.fejer_prime.resize(n + 1);
        c.ln_scaled.resize(n);
        for (std::size_t r = 0; r <= n; ++r) {
            const double rr = static_cast<double>(r);
            c.fejer[r] = 1.0 - rr / nn;
            c.fejer_prime[r] = rr * (1.0 - rr / nn);
        }
        for (std::size_t r = 0; r < n; ++r) {
            // sum_{k=1}^{m} k(r+k) = r m(m+1)/2 + m(m+1)(2m+1)/6 with m = n - r
            const double rr = static_cast<double>(r);
            const double m = nn - rr;
            c.ln_scaled[r] = (rr * m * (m + 1.0) / 2.0 + m * (m + 1.0) * (2.0 * m + 1.0) / 6.0) / nn;
        }
        return c;
    }

    /// Coefficient of e^{irx} in the expansion of s2 / rho(r).
    double ln_coefficient(long long r) const {
        const auto a = static_cast<std::size_t>(r < 0 ? -r : r);
        return a < n ? ln_scaled[a] : 0.0;
    }
};

/// K_n(x) = (1/n) (sin(nx/2)/sin(x/2))^2 = sum_{|r|<=n} (1-|r|/n) e^{irx}.
inline double fejer_eval(std::size_t n, double x) {
    if (n < 1) throw InvalidInput("fejer_eval: n must be >= 1");
    const double nn = static_cast<double>(n);
    const double s = std::sin(0.5 * x);
    if (std::abs(s) < kernel_singularity_guard) {
        double acc = 1.0;
        for (std::size_t r = 1; r < n; ++r) {
            acc += 2.0 * (1.0 - static_cast<double>(r) / nn) * std::cos(static_cast<double>(r) * x);
        }
        return acc;
    }
    const double q = std::sin(0.5 * nn * x) / s;
    return q * q / nn;
}

/// L_n(x) = (alpha_n/n) |sum_{k=0}^n k e^{ikx}|^2.
inline double ln_eval(std::size_t n, double x) {
    if (n < 1) throw InvalidInput("ln_eval: n must be >= 1");
    const double nn = static_cast<double>(n);
    const double al = alpha_n(n);
    if (std::abs(std::sin(0.5 * x)) < kernel_singularity_guard) {
        return al * nn * (nn + 1.0) * (nn + 1.0) / 4.0;
    }
    cplx acc{0.0, 0.0};
    for (std::size_t k = 1; k <= n; ++k) acc += static_cast<double>(k) * std::polar(1.0, static_cast<double>(k) * x);
    return al / nn * std::norm(acc);
}

/// K_n'(x) = -2 sum_{r=1}^n r(1-r/n) sin(rx).
inline double fejer_prime_eval(std::size_t n, double x) {
    if (n < 1) throw InvalidInput("fejer_prime_eval: n must be >= 1");
    const double nn = static_cast<double>(n);
    const double s = std::sin(0.5 * x);
    if (std::abs(s) < kernel_singularity_guard) {
        double acc = 0.0;
        for (std::size_t r = 1; r <= n; ++r) {
            const double rr = static_cast<double>(r);
            acc -= 2.0 * rr * (1.0 - rr / nn) * std::sin(rr * x);
        }
        return acc;
    }
    const double sn = std::sin(0.5 * nn * x);
    const double cn = std::cos(0.5 * nn * x);
    return (2.0 / nn) * (sn / s) * (nn * cn / (2.0 * s) - sn * std::cos(0.5 * x) / (2.0 * s * s));
}

/// Dirichlet-type ratio sin(n z/2) / sin(z/2). The argument is reduced to
/// [-pi, pi] first (D_n(z + 2 pi) = (-1)^(n+1) D_n(z)); the removable
/// singularity at 0 is replaced by the equivalent cosine sum.
inline double dirichlet_ratio(std::size_t n, double z) {
    const double r = std::remainder(z, two_pi);
    const double turns = std::round((z - r) / two_pi);
    const double sign = (n % 2 == 0 && std::fmod(std::abs(turns), 2.0) == 1.0) ? -1.0 : 1.0;
    const double s = std::sin(0.5 * r);
    if (std::abs(s) < kernel_singularity_guard) {
        const double c = 0.5 * (static_cast<double>(n) - 1.0);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += std::cos((static_cast<double>(k) - c) * r);
        return sign * acc;
    }
    return sign * std::sin(0.5 * static_cast<double>(n) * r) / s;
}

/// Polarized Fejer kernel K_n(x, y) = (1/n) D_n(x) D_n(y).
inline double polarized_fejer(std::size_t n, double x, double y) {
    return dirichlet_ratio(n, x) * dirichlet_ratio(n, y) / static_cast<double>(n);
}

struct ConvolutionProfile {
    std::size_t n = 0;
    std::size_t m = 0;
    double offset = 0.0;  // grid is x_i = offset + 2 pi i / m
    std::vector<double> s0;
    std::vector<double> s1;
    std::vector<double> s2;

    double x(std::size_t i) const { return offset + two_pi * static_cast<double>(i) / static_cast<double>(m); }
};

/// Default grid: max(4096, next power of two >= 32 n).
inline std::size_t default_grid_size(std::size_t n) { return std::max<std::size_t>(4096, next_power_of_two(32 * n)); }

/// s0, s1, s2 at the M points offset + 2 pi i / M by three inverse DFTs of
/// the coefficient-weighted correlation sequence.
inline ConvolutionProfile convolution_profile(const CorrelationSequence& rho, std::size_t n, std::size_t m,
                                              double offset = 0.0) {
    if (n < 1) throw InvalidInput("convolution_profile: n must be >= 1");
    if (!is_power_of_two(m) || m < 2 * n + 2) {
        throw InvalidInput("convolution_profile: M must be a power of two >= 2n+2");
    }
    rho.require_lag(n, "convolution_profile");
    const auto kc = KernelCoefficients::make(n);
    ConvolutionProfile p;
    p.n = n;
    p.m = m;
    p.offset = offset;
    p.s0 = trig_sum_on_grid(
        [&](long long r) {
            const auto a = static_cast<std::size_t>(r < 0 ? -r : r);
            return cplx{kc.fejer[a] * rho[r], 0.0};
        },
        n, m, offset);
    // -sum_{r>=1} A_r sin(rx) has coefficients +i A_r/2 at r and -i A_r/2 at -r.
    p.s1 = trig_sum_on_grid(
        [&](long long r) {
            const auto a = static_cast<std::size_t>(r < 0 ? -r : r);
            const double half = 0.5 * kc.fejer_prime[a] * rho[r];
            return cplx{0.0, r >= 0 ? half : -half};
        },
        n, m, offset);
    p.s2 = trig_sum_on_grid([&](long long r) { return cplx{kc.ln_coefficient(r) * rho[r], 0.0}; }, n, m, offset);
    return p;
}

struct PointMoments {
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
};

/// s0, s1, s2 at a single point by direct O(n) summation.
inline PointMoments moments_at(const CorrelationSequence& rho, const KernelCoefficients& kc, double x) {
    rho.require_lag(kc.n, "moments_at");
    // s0 and s2 are even, s1 odd: evaluate at the representative in [0, pi]
    // so the phase error of the rotation stays small.
    double t = std::remainder(x, two_pi);
    const double sign = t < 0.0 ? -1.0 : 1.0;
    t = std::abs(t);
    PointMoments pm;
    pm.s0 = 1.0;
    pm.s2 = kc.ln_scaled[0];
    // cos(rt), sin(rt) by rotation with periodic re-anchoring.
    const cplx step = std::polar(1.0, t);
    cplx e{1.0, 0.0};
    for (std::size_t r = 1; r <= kc.n; ++r) {
        e = (r % 64 == 0) ? std::polar(1.0, static_cast<double>(r) * t) : e * step;
        const double rr = rho[static_cast<long long>(r)];
        pm.s0 += 2.0 * kc.fejer[r] * rr * e.real();
        pm.s1 -= kc.fejer_prime[r] * rr * e.imag();
        if (r < kc.n) pm.s2 += 2.0 * kc.ln_scaled[r] * rr * e.real();
    }
    pm.s1 *= sign;
    return pm;
}

/// E[f_n(x) f_n(y)] as the double sum (1/n) sum_{k,l=1}^n rho(k-l) cos(kx - ly).
inline double two_point_cov_bruteforce(const CorrelationSequence& rho, std::size_t n, double x, double y) {
    rho.require_lag(n, "two_point_cov");
    double acc = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        for (std::size_t l = 1; l <= n; ++l) {
            acc += rho[static_cast<long long>(k) - static_cast<long long>(l)] *
                   std::cos(static_cast<double>(k) * x - static_cast<double>(l) * y);
        }
    }
    return acc / static_cast<double>(n);
}

/// Same quantity in O(n): the sum over l at fixed lag r = k - l is geometric,
/// sum_{l} e^{il(x-y)} over l in [max(1, 1-r), min(n, n-r)].
inline double two_point_cov_lagsum(const CorrelationSequence& rho, std::size_t n, double x, double y) {
    rho.require_lag(n, "two_point_cov");
    const auto nn = static_cast<long long>(n);
    const double d = x - y;
    const double sd = std::sin(0.5 * d);
    const bool flat = std::abs(sd) < kernel_singularity_guard;
    cplx acc{0.0, 0.0};
    for (long long r = -(nn - 1); r <= nn - 1; ++r) {
        const long long lo = std::max(1LL, 1 - r);
        const long long hi = std::min(nn, nn - r);
        const double count = static_cast<double>(hi - lo + 1);
        cplx g;
        if (flat) {
            g = count * std::polar(1.0, 0.5 * static_cast<double>(lo + hi) * d);
        } else {
            // sum_{l=lo}^{hi} e^{ild} = e^{i(lo+hi)d/2} sin(count d/2)/sin(d/2)
            g = std::polar(std::sin(0.5 * count * d) / sd, 0.5 * static_cast<double>(lo + hi) * d);
        }
        acc += rho[r] * std::polar(1.0, static_cast<double>(r) * x) * g;
    }
    return acc.real() / static_cast<double>(n);
}

inline constexpr std::size_t two_point_bruteforce_max_n = 128;

/// E[f_n(x) f_n(y)]: double sum for n <= 128, O(n) lag sum above.
inline double two_point_cov(const CorrelationSequence& rho, std::size_t n, double x, double y) {
    if (n < 1) throw InvalidInput("two_point_cov: n must be >= 1");
    return n <= two_point_bruteforce_max_n ? two_point_cov_bruteforce(rho, n, x, y)
                                           : two_point_cov_lagsum(rho, n, x, y);
}

/// Measure-side route: cos((n+1)(x-y)/2) int K_n(x-u, y-u) mu(du), atoms
/// exact and the density part by adaptive quadrature.
inline double two_point_cov_polarized(const SpectralMeasure& mu, std::size_t n, double x, double y,
                                      double abs_tol = 1e-12) {
    if (n < 1) throw InvalidInput("two_point_cov: n must be >= 1");
    double integral = 0.0;
    for (const auto& at : mu.atoms()) {
        if (at.alpha == 0.0) {
            integral += at.weight * polarized_fejer(n, x, y);
        } else {
            integral += 0.5 * at.weight *
                        (polarized_fejer(n, x - at.alpha, y - at.alpha) + polarized_fejer(n, x + at.alpha, y + at.alpha));
        }
    }
    if (const auto& d = mu.density()) {
        std::vector<double> breaks;
        for (double b : d->breakpoints()) {
            breaks.push_back(b);
            breaks.push_back(-b);
        }
        breaks.push_back(std::remainder(x, two_pi));
        breaks.push_back(std::remainder(y, two_pi));
        SimpsonOptions opt;
        opt.abs_tol = abs_tol;
        opt.initial_pieces = 16 + 4 * n;
        opt.max_evaluations = std::size_t{1} << 22;
        auto res = integrate_with_breakpoints([&](double u) { return polarized_fejer(n, x - u, y - u) * (*d)(u); },
                                              -pi, pi, breaks, opt);
        if (!res.converged) throw NumericalFailure("two_point_cov_polarized: density quadrature did not converge");
        integral += res.value;
    }
    return std::cos(0.5 * (static_cast<double>(n) + 1.0) * (x - y)) * integral;
}

}  // namespace trigzero

#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trigzero/errors.hpp"
#include "trigzero/fft.hpp"
#include "trigzero/parallel.hpp"
#include "trigzero/sampler.hpp"
#include "trigzero/spectral.hpp"

namespace trigzero {

enum class CountMethod { grid_bisection, companion };

inline std::string to_string(CountMethod m) {
    return m == CountMethod::grid_bisection ? "grid_bisection" : "companion";
}

struct ZeroCount {
    std::size_t count = 0;
    std::vector<double> roots;
    std::size_t suspicious_cells = 0;
    CountMethod method = CountMethod::grid_bisection;
};

inline void require_valid(const CoefficientSample& s, const char* who) {
    if (s.n < 1 || s.a.size() != s.n || s.b.size() != s.n) {
        throw InvalidInput(std::string(who) + ": sample arrays must have length n >= 1");
    }
    for (std::size_t k = 0; k < s.n; ++k) {
        if (!std::isfinite(s.a[k]) || !std::isfinite(s.b[k])) {
            throw InvalidInput(std::string(who) + ": sample holds a non-finite coefficient");
        }
    }
}

inline std::size_t zero_grid_size(std::size_t n) { return std::max<std::size_t>(4096, next_power_of_two(32 * n)); }

namespace detail {

/// Grid values of sum_k c_k e^{ikx} + conj, c_k = w_k (a_k - i b_k) / (2 sqrt n).
template <class Weight>
std::vector<double> spectral_grid(const CoefficientSample& s, std::size_t m, Weight&& weight) {
    if (!is_power_of_two(m) || m < 2 * s.n + 2) {
        throw InvalidInput("evaluate_grid: M must be a power of two >= 2n + 2");
    }
    const double scale = 0.5 / std::sqrt(static_cast<double>(s.n));
    std::vector<cplx> spec(m, cplx{0.0, 0.0});
    for (std::size_t k = 1; k <= s.n; ++k) {
        const cplx c = weight(k) * scale * cplx{s.a[k - 1], -s.b[k - 1]};
        spec[k] += c;
        spec[m - k] += std::conj(c);
    }
    fft_inplace(spec, FftDirection::inverse);
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = spec[i].real();
    return out;
}

}  // namespace detail

/// f_n at x_m = 2 pi m / M, m = 0..M-1, by one inverse transform.
inline std::vector<double> evaluate_grid(const CoefficientSample& s, std::size_t m) {
    return detail::spectral_grid(s, m, [](std::size_t) { return cplx{1.0, 0.0}; });
}

/// f_n' on the same grid.
inline std::vector<double> evaluate_derivative_grid(const CoefficientSample& s, std::size_t m) {
    return detail::spectral_grid(s, m, [](std::size_t k) { return cplx{0.0, static_cast<double>(k)}; });
}

struct PointValue {
    double f = 0.0;
    double df = 0.0;
};

/// f_n(x) and f_n'(x) by direct O(n) summation.
inline PointValue evaluate_at(const CoefficientSample& s, double x) {
    const double t = std::remainder(x, two_pi);
    const cplx step = std::polar(1.0, t);
    cplx e{1.0, 0.0};
    PointValue pv;
    for (std::size_t k = 1; k <= s.n; ++k) {
        e = (k % 64 == 0) ? std::polar(1.0, static_cast<double>(k) * t) : e * step;
        const double a = s.a[k - 1];
        const double b = s.b[k - 1];
        pv.f += a * e.real() + b * e.imag();
        pv.df += static_cast<double>(k) * (b * e.real() - a * e.imag());
    }
    const double norm = 1.0 / std::sqrt(static_cast<double>(s.n));
    pv.f *= norm;
    pv.df *= norm;
    return pv;
}

inline double evaluate_direct(const CoefficientSample& s, double x) { return evaluate_at(s, x).f; }

struct CountOptions {
    // Root retention; defaults to n <= 1024.
    std::optional<bool> retain_roots;
    std::size_t grid = 0;  // 0: max(4096, 32 n)
};

inline constexpr int bisection_steps = 60;
inline constexpr int subdivision_factor = 16;
inline constexpr int subdivision_depth = 3;
inline constexpr double root_merge_distance = 1e-10;

namespace detail {

struct Node {
    double x;
    double f;
    double df;
};

inline double bisect_root(const CoefficientSample& s, double lo, double flo, double hi) {
    for (int it = 0; it < bisection_steps; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = evaluate_direct(s, mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

class CellCounter {
public:
    CellCounter(const CoefficientSample& s, double scale, bool retain, ZeroCount& out)
        : s_(s), curvature_(static_cast<double>(s.n) * static_cast<double>(s.n) * scale), retain_(retain), out_(out) {}

    /// Examines the open cell (l.x, r.x) given nodes l, r (root at l handled by the caller).
    void cell(const Node& l, const Node& r, int depth) {
        if (l.f == 0.0 || r.f == 0.0) return;  // node roots are counted by the caller
        if ((l.f < 0.0) != (r.f < 0.0)) {
            add_root(l, r);
            return;
        }
        if (!might_hide_roots(l, r)) return;
        if (depth >= subdivision_depth) {
            ++out_.suspicious_cells;
            return;
        }
        const double w = (r.x - l.x) / subdivision_factor;
        Node prev = l;
        for (int j = 1; j <= subdivision_factor; ++j) {
            Node next = r;
            if (j < subdivision_factor) {
                const double x = l.x + w * j;
                const auto pv = evaluate_at(s_, x);
                next = {x, pv.f, pv.df};
                if (next.f == 0.0) push_root(x);
            }
            cell(prev, next, depth + 1);
            prev = next;
        }
    }

    void push_root(double x) {
        ++out_.count;
        if (retain_) out_.roots.push_back(x);
    }

private:
    /// Same-signed endpoints can enclose roots only if the derivative changes
    /// sign and |f| at an endpoint is within the Bernstein curvature bound
    /// n^2 max|f| h^2 / 8.
    bool might_hide_roots(const Node& l, const Node& r) const {
        if ((l.df < 0.0) == (r.df < 0.0)) return false;
        const double h = r.x - l.x;
        const double bound = curvature_ * h * h / 8.0;
        return std::min(std::abs(l.f), std::abs(r.f)) <= bound;
    }

    void add_root(const Node& l, const Node& r) {
        ++out_.count;
        if (retain_) out_.roots.push_back(bisect_root(s_, l.x, l.f, r.x));
    }

    const CoefficientSample& s_;
    double curvature_;
    bool retain_;
    ZeroCount& out_;
};

}  // namespace detail

/// Real zeros of f_n in [a, b), b - a <= 2 pi, from sign changes on the
/// periodic grid of M = max(4096, 32 n) points. Same-signed cells that may
/// hide a pair of roots are subdivided x16 up to depth 3; whatever is left
/// unresolved is reported in suspicious_cells.
inline ZeroCount count_zeros(const CoefficientSample& s, double a = 0.0, double b = two_pi,
                             const CountOptions& opt = {}) {
    require_valid(s, "count_zeros");
    if (!(b > a) || b - a > two_pi * (1.0 + 1e-15)) throw InvalidInput("count_zeros: need a < b <= a + 2 pi");
    const std::size_t m = opt.grid ? opt.grid : zero_grid_size(s.n);
    const auto f = evaluate_grid(s, m);
    const auto df = evaluate_derivative_grid(s, m);
    double scale = 0.0;
    for (double v : f) scale = std::max(scale, std::abs(v));
    const bool retain = opt.retain_roots.value_or(s.n <= 1024);
    const double h = two_pi / static_cast<double>(m);
    const bool full = b - a >= two_pi;

    std::vector<detail::Node> nodes;
    auto grid_node = [&](long long j) {
        const auto mm = static_cast<long long>(m);
        const auto idx = static_cast<std::size_t>(((j % mm) + mm) % mm);
        return detail::Node{h * static_cast<double>(j), f[idx], df[idx]};
    };
    const auto j_lo = static_cast<long long>(std::ceil(a / h));
    if (h * static_cast<double>(j_lo) != a) {
        const auto pv = evaluate_at(s, a);
        nodes.push_back({a, pv.f, pv.df});
    }
    for (long long j = j_lo; h * static_cast<double>(j) < b; ++j) nodes.push_back(grid_node(j));
    if (full) {
        auto closing = nodes.front();
        closing.x = b;
        nodes.push_back(closing);
    } else {
        const auto pv = evaluate_at(s, b);
        nodes.push_back({b, pv.f, pv.df});
    }

    ZeroCount out;
    out.method = CountMethod::grid_bisection;
    detail::CellCounter counter(s, scale, retain, out);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (nodes[i].f == 0.0) counter.push_root(nodes[i].x);
        counter.cell(nodes[i], nodes[i + 1], 0);
    }
    if (retain) {
        for (auto& r : out.roots) {
            r = std::fmod(r, two_pi);
            if (r < 0.0) r += two_pi;
        }
        std::sort(out.roots.begin(), out.roots.end());
        const std::size_t before = out.roots.size();
        out.roots.erase(std::unique(out.roots.begin(), out.roots.end(),
                                    [](double u, double v) { return v - u < root_merge_distance; }),
                        out.roots.end());
        out.count -= before - out.roots.size();
    }
    return out;
}

inline constexpr std::size_t companion_max_n = 128;
inline constexpr double unit_circle_tolerance = 1e-6;
inline constexpr double companion_identity_tolerance = 1e-9;

/// Coefficients of Q_n(z) = z^n sum_k (a_k/2)(z^k + z^-k) + (b_k/2i)(z^k - z^-k),
/// lowest degree first: [z^{n+k}] = (a_k - i b_k)/2, [z^{n-k}] = (a_k + i b_k)/2.
inline std::vector<cplx> algebraic_coefficients(const CoefficientSample& s) {
    std::vector<cplx> c(2 * s.n + 1, cplx{0.0, 0.0});
    for (std::size_t k = 1; k <= s.n; ++k) {
        c[s.n + k] = 0.5 * cplx{s.a[k - 1], -s.b[k - 1]};
        c[s.n - k] = 0.5 * cplx{s.a[k - 1], s.b[k - 1]};
    }
    return c;
}

inline cplx evaluate_polynomial(const std::vector<cplx>& c, cplx z) {
    cplx acc{0.0, 0.0};
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

/// Largest |Q_n(e^{i theta}) - e^{i n theta} sqrt(n) f_n(theta)| over 4n+8 angles.
inline double algebraic_identity_error(const CoefficientSample& s) {
    const auto c = algebraic_coefficients(s);
    const std::size_t points = 4 * s.n + 8;
    double worst = 0.0;
    for (std::size_t j = 0; j < points; ++j) {
        const double th = two_pi * (static_cast<double>(j) + 0.3) / static_cast<double>(points);
        const cplx q = evaluate_polynomial(c, std::polar(1.0, th));
        const cplx g = std::polar(1.0, static_cast<double>(s.n) * th) * std::sqrt(static_cast<double>(s.n)) *
                       evaluate_direct(s, th);
        worst = std::max(worst, std::abs(q - g));
    }
    return worst;
}

/// Zeros of f_n as the unit-circle eigenvalues of the companion matrix of Q_n.
inline ZeroCount companion_oracle(const CoefficientSample& s) {
    require_valid(s, "companion_oracle");
    if (s.n > companion_max_n) throw InvalidInput("companion_oracle: n must be <= 128");
    const auto c = algebraic_coefficients(s);
    const std::size_t deg = 2 * s.n;
    if (std::abs(c[deg]) < 1e-13) throw NumericalFailure("companion_oracle: degenerate leading coefficient");
    if (const double err = algebraic_identity_error(s); !(err < companion_identity_tolerance)) {
        throw NumericalFailure("companion_oracle: Q_n(e^{it}) differs from e^{int} sqrt(n) f_n(t) by " +
                               std::to_string(err));
    }
    const auto d = static_cast<Eigen::Index>(deg);
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) comp(i, d - 1) = -c[static_cast<std::size_t>(i)] / c[deg];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
    if (solver.info() != Eigen::Success) throw NumericalFailure("companion_oracle: eigenvalue solver failed");
    ZeroCount out;
    out.method = CountMethod::companion;
    for (Eigen::Index i = 0; i < d; ++i) {
        const cplx z = solver.eigenvalues()(i);
        if (std::abs(std::abs(z) - 1.0) < unit_circle_tolerance) {
            double th = std::arg(z);
            if (th < 0.0) th += two_pi;
            if (th >= two_pi) th -= two_pi;
            out.roots.push_back(th);
        }
    }
    std::sort(out.roots.begin(), out.roots.end());
    out.count = out.roots.size();
    return out;
}

struct ZeroReplicate {
    std::size_t replicate = 0;
    std::uint64_t seed = 0;  // seed of the a-substream
    std::size_t count = 0;
    double ratio = 0.0;
    std::size_t suspicious = 0;
};

struct ZeroStatistics {
    std::size_t n = 0;
    std::size_t replicates = 0;
    double mean_ratio = 0.0;
    double variance = 0.0;
    double se = 0.0;
    std::vector<ZeroReplicate> rows;
};

inline ZeroStatistics summarize_replicates(std::size_t n, std::vector<ZeroReplicate> rows) {
    ZeroStatistics st;
    st.n = n;
    st.replicates = rows.size();
    const auto r = static_cast<double>(rows.size());
    for (const auto& row : rows) st.mean_ratio += row.ratio;
    st.mean_ratio /= r;
    double ss = 0.0;
    for (const auto& row : rows) ss += (row.ratio - st.mean_ratio) * (row.ratio - st.mean_ratio);
    st.variance = rows.size() > 1 ? ss / (r - 1.0) : 0.0;
    st.se = std::sqrt(st.variance / r);
    st.rows = std::move(rows);
    return st;
}

/// N/n over stream_ids 0..replicates-1, computed in parallel and merged in index order.
inline ZeroStatistics zero_statistics(const CoefficientSampler& sampler, std::size_t replicates,
                                      std::uint64_t master_seed) {
    if (replicates < 2) throw InvalidInput("zero_statistics: replicates must be >= 2");
    const std::size_t n = sampler.n();
    std::vector<ZeroReplicate> rows(replicates);
    parallel_for(replicates, [&](std::size_t i) {
        try {
            const auto s = sampler.sample(master_seed, i);
            CountOptions opt;
            opt.retain_roots = false;
            const auto zc = count_zeros(s, 0.0, two_pi, opt);
            rows[i] = {i, a_stream_seed(master_seed, i), zc.count,
                       static_cast<double>(zc.count) / static_cast<double>(n), zc.suspicious_cells};
        } catch (const std::exception& e) {
            throw NumericalFailure("zero_statistics: replicate " + std::to_string(i) + ": " + e.what());
        }
    });
    return summarize_replicates(n, std::move(rows));
}

inline ZeroStatistics zero_statistics(const SpectralMeasure& measure, std::size_t n, std::size_t replicates,
                                      std::uint64_t master_seed) {
    return zero_statistics(CoefficientSampler(measure, n), replicates, master_seed);
}

}  // namespace trigzero

#pragma once

// Spectral measures on [-pi, pi], their correlation sequences
// rho(k) = int e^{-ikx} mu(dx), and checks of the integrability/regularity
// conditions on the spectral density that decide which limit law applies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trigzero/errors.hpp"
#include "trigzero/fft.hpp"
#include "trigzero/quadrature.hpp"

namespace trigzero {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Folds an angle to |x| with x reduced to [-pi, pi].
inline double fold_angle(double x) {
    double y = std::remainder(x, two_pi);
    return std::abs(y);
}

enum class DensityKind { uniform, box, annulus, poisson, constant_corr, raised_cosine_squared, tabulated };

inline std::string to_string(DensityKind k) {
    switch (k) {
        case DensityKind::uniform: return "uniform";
        case DensityKind::box: return "box";
        case DensityKind::annulus: return "annulus";
        case DensityKind::poisson: return "poisson";
        case DensityKind::constant_corr: return "constant_corr";
        case DensityKind::raised_cosine_squared: return "raised_cosine_squared";
        case DensityKind::tabulated: return "tabulated";
    }
    return "unknown";
}

/// Absolutely continuous part psi of a spectral measure. Every kind except
/// constant_corr carries unit mass; constant_corr(r) is the flat density of
/// mass 1 - r that accompanies an atom of weight r at the origin.
class DensitySpec {
public:
    static DensitySpec uniform() { return DensitySpec(DensityKind::uniform); }

    static DensitySpec box(double a) {
        if (!(a > 0.0 && a < pi)) throw InvalidInput("density.box: requires 0 < a < pi");
        DensitySpec d(DensityKind::box);
        d.a_ = a;
        return d;
    }

    static DensitySpec annulus(double b, double a) {
        if (!(b >= 0.0 && b < a && a <= pi)) throw InvalidInput("density.annulus: requires 0 <= b < a <= pi");
        DensitySpec d(DensityKind::annulus);
        d.a_ = a;
        d.b_ = b;
        return d;
    }

    static DensitySpec poisson(double r) {
        if (!(std::abs(r) < 1.0)) throw InvalidInput("density.poisson: requires |r| < 1");
        DensitySpec d(DensityKind::poisson);
        d.r_ = r;
        return d;
    }

    static DensitySpec constant_corr(double r) {
        if (!(r >= 0.0 && r < 1.0)) throw InvalidInput("density.constant_corr: requires 0 <= r < 1");
        DensitySpec d(DensityKind::constant_corr);
        d.r_ = r;
        return d;
    }

    static DensitySpec raised_cosine_squared() { return DensitySpec(DensityKind::raised_cosine_squared); }

    /// Piecewise-linear psi through (grid[i], values[i]); grid must run from 0
    /// to pi strictly increasing. The table is used as given (no rescaling).
    static DensitySpec tabulated(std::vector<double> grid, std::vector<double> values) {
        if (grid.size() < 2 || grid.size() != values.size()) {
            throw InvalidInput("density.tabulated: grid and values must have equal length >= 2");
        }
        if (std::abs(grid.front()) > 1e-12 || std::abs(grid.back() - pi) > 1e-9) {
            throw InvalidInput("density.tabulated: grid must span [0, pi]");
        }
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (!(grid[i] > grid[i - 1])) throw InvalidInput("density.tabulated: grid must be strictly increasing");
        }
        for (double v : values) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("density.tabulated: values must be finite and >= 0");
        }
        grid.front() = 0.0;
        grid.back() = pi;
        DensitySpec d(DensityKind::tabulated);
        d.grid_ = std::move(grid);
        d.values_ = std::move(values);
        return d;
    }

    DensityKind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double r() const { return r_; }
    std::span<const double> table_grid() const { return grid_; }
    std::span<const double> table_values() const { return values_; }

    /// Total mass int_{-pi}^{pi} psi.
    double mass() const {
        switch (kind_) {
            case DensityKind::constant_corr: return 1.0 - r_;
            case DensityKind::tabulated: {
                double s = 0.0;
                for (std::size_t i = 1; i < grid_.size(); ++i) {
                    s += 0.5 * (values_[i] + values_[i - 1]) * (grid_[i] - grid_[i - 1]);
                }
                return 2.0 * s;
            }
            default: return 1.0;
        }
    }

    /// psi(x); evaluated at the folded |x| so symmetry holds exactly.
    double operator()(double x) const {
        const double u = fold_angle(x);
        switch (kind_) {
            case DensityKind::uniform: return 1.0 / two_pi;
            case DensityKind::box: return u <= a_ ? 1.0 / (2.0 * a_) : 0.0;
            case DensityKind::annulus: return (u >= b_ && u <= a_) ? 1.0 / (2.0 * (a_ - b_)) : 0.0;
            case DensityKind::poisson: return (1.0 - r_ * r_) / (two_pi * (1.0 - 2.0 * r_ * std::cos(u) + r_ * r_));
            case DensityKind::constant_corr: return (1.0 - r_) / two_pi;
            case DensityKind::raised_cosine_squared: {
                // 1 + cos u = 2 cos^2(u/2), written without cancellation near pi.
                const double c = std::cos(0.5 * u);
                const double s = 2.0 * c * c;
                return s * s / (3.0 * pi);
            }
            case DensityKind::tabulated: {
                auto it = std::upper_bound(grid_.begin(), grid_.end(), u);
                if (it == grid_.end()) return values_.back();
                if (it == grid_.begin()) return values_.front();
                const std::size_t i = static_cast<std::size_t>(it - grid_.begin());
                const double t = (u - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
                return (1.0 - t) * values_[i - 1] + t * values_[i];
            }
        }
        return 0.0;
    }

    bool has_closed_form_correlation() const { return kind_ != DensityKind::tabulated; }

    /// int cos(kx) psi(x) dx over [-pi, pi] in closed form, when one exists.
    std::optional<double> closed_form_correlation(long long k) const {
        const double kk = static_cast<double>(k < 0 ? -k : k);
        const bool zero = k == 0;
        switch (kind_) {
            case DensityKind::uniform: return zero ? 1.0 : 0.0;
            case DensityKind::box: return zero ? 1.0 : std::sin(kk * a_) / (kk * a_);
            case DensityKind::annulus:
                return zero ? 1.0 : (std::sin(kk * a_) - std::sin(kk * b_)) / (kk * (a_ - b_));
            case DensityKind::poisson: return std::pow(r_, kk);
            case DensityKind::constant_corr: return zero ? 1.0 - r_ : 0.0;
            case DensityKind::raised_cosine_squared: {
                if (zero) return 1.0;
                if (kk == 1.0) return 2.0 / 3.0;
                if (kk == 2.0) return 1.0 / 6.0;
                return 0.0;
            }
            case DensityKind::tabulated: return std::nullopt;
        }
        return std::nullopt;
    }

    /// Points of [0, pi] where psi is not smooth.
    std::vector<double> breakpoints() const {
        switch (kind_) {
            case DensityKind::box: return {a_};
            case DensityKind::annulus: return {b_, a_};
            case DensityKind::tabulated: return grid_;
            default: return {};
        }
    }

    std::string describe() const {
        std::ostringstream os;
        os << to_string(kind_);
        switch (kind_) {
            case DensityKind::box: os << "(a=" << a_ << ")"; break;
            case DensityKind::annulus: os << "(b=" << b_ << ",a=" << a_ << ")"; break;
            case DensityKind::poisson:
            case DensityKind::constant_corr: os << "(r=" << r_ << ")"; break;
            case DensityKind::tabulated: os << "(" << grid_.size() << " nodes)"; break;
            default: break;
        }
        return os.str();
    }

private:
    explicit DensitySpec(DensityKind k) : kind_(k) {}

    DensityKind kind_;
    double a_ = 0.0;
    double b_ = 0.0;
    double r_ = 0.0;
    std::vector<double> grid_;
    std::vector<double> values_;
};

/// Symmetric atom pair (delta_alpha + delta_{-alpha})/2 of total weight w;
/// alpha = 0 is a single atom of weight w.
struct Atom {
    double alpha = 0.0;
    double weight = 0.0;
};

class SpectralMeasure {
public:
    SpectralMeasure(std::vector<Atom> atoms, std::optional<DensitySpec> density)
        : atoms_(std::move(atoms)), density_(std::move(density)) {
        double total = density_ ? density_->mass() : 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            const auto& at = atoms_[i];
            if (!(at.alpha >= 0.0 && at.alpha <= pi)) {
                throw InvalidInput("measure.atoms[" + std::to_string(i) + "].alpha: must lie in [0, pi]");
            }
            if (!(at.weight > 0.0)) {
                throw InvalidInput("measure.atoms[" + std::to_string(i) + "].weight: must be > 0");
            }
            total += at.weight;
        }
        if (std::abs(total - 1.0) > 1e-10) {
            std::ostringstream os;
            os.precision(17);
            os << "measure: total mass must be 1 (atoms + density), got " << total;
            throw InvalidInput(os.str());
        }
    }

    static SpectralMeasure from_density(DensitySpec d) {
        if (d.kind() == DensityKind::constant_corr) return constant_corr(d.r());
        return SpectralMeasure({}, std::move(d));
    }

    /// rho(k) = cos(k alpha).
    static SpectralMeasure atomic(double alpha) { return SpectralMeasure({{alpha, 1.0}}, std::nullopt); }

    /// rho(0) = 1, rho(k) = r for k >= 1: atom r at 0 plus flat density of mass 1 - r.
    static SpectralMeasure constant_corr(double r) {
        auto d = DensitySpec::constant_corr(r);
        if (r == 0.0) return SpectralMeasure({}, d);
        return SpectralMeasure({{0.0, r}}, d);
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::optional<DensitySpec>& density() const { return density_; }
    bool purely_atomic() const { return !density_.has_value(); }

    std::string describe() const {
        std::ostringstream os;
        os << (density_ ? density_->describe() : std::string("none"));
        for (const auto& at : atoms_) os << "+atom(" << at.alpha << "," << at.weight << ")";
        return os.str();
    }

private:
    std::vector<Atom> atoms_;
    std::optional<DensitySpec> density_;
};

/// rho(0..R) of a symmetric probability measure.
class CorrelationSequence {
public:
    explicit CorrelationSequence(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 2) throw InvalidInput("correlation: need at least lags 0 and 1");
        if (std::abs(values_[0] - 1.0) > 1e-9) throw InvalidInput("correlation: rho(0) must equal 1");
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!std::isfinite(values_[k]) || std::abs(values_[k]) > 1.0 + 1e-9) {
                throw InvalidInput("correlation: |rho(" + std::to_string(k) + ")| must be <= 1");
            }
        }
    }

    /// rho(|k|); the caller must stay within max_lag().
    double operator[](long long k) const { return values_[static_cast<std::size_t>(k < 0 ? -k : k)]; }
    std::size_t max_lag() const { return values_.size() - 1; }
    std::span<const double> values() const { return values_; }

    void require_lag(std::size_t lag, const char* who) const {
        if (lag > max_lag()) {
            throw InvalidInput(std::string(who) + ": correlation sequence must cover lag " + std::to_string(lag) +
                               " (has " + std::to_string(max_lag()) + ")");
        }
    }

    /// rho(k) = delta_0(k).
    static CorrelationSequence independent(std::size_t max_lag) {
        std::vector<double> v(max_lag + 1, 0.0);
        v[0] = 1.0;
        return CorrelationSequence(std::move(v));
    }

private:
    std::vector<double> values_;
};

/// int_{-pi}^{pi} cos(kx) psi(x) dx by adaptive Simpson, split at the kinks
/// of psi. Throws NumericalFailure naming the lag if the budget is exhausted.
inline QuadratureResult correlation_by_quadrature(const DensitySpec& d, long long k, double abs_tol = 1e-10,
                                                  std::size_t budget = std::size_t{1} << 20) {
    const double kk = static_cast<double>(k < 0 ? -k : k);
    SimpsonOptions opt;
    opt.abs_tol = 0.5 * abs_tol;
    opt.max_evaluations = budget;
    opt.initial_pieces = 8 + 4 * static_cast<std::size_t>(kk);
    const auto bp = d.breakpoints();
    auto res = integrate_with_breakpoints([&](double x) { return std::cos(kk * x) * d(x); }, 0.0, pi, bp, opt);
    res.value *= 2.0;
    res.error_estimate *= 2.0;
    if (!res.converged) {
        throw NumericalFailure("correlation_of: quadrature did not converge at lag " + std::to_string(k));
    }
    return res;
}

/// Correlations of the density part alone (mass included), lags 0..max_lag.
inline std::vector<double> density_correlation(const DensitySpec& d, std::size_t max_lag) {
    std::vector<double> out(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        const auto kk = static_cast<long long>(k);
        if (auto c = d.closed_form_correlation(kk)) {
            out[k] = *c;
        } else {
            out[k] = correlation_by_quadrature(d, kk).value;
        }
    }
    return out;
}

inline CorrelationSequence correlation_of(const SpectralMeasure& m, std::size_t max_lag) {
    if (max_lag < 1) throw InvalidInput("correlation_of: max_lag must be >= 1");
    std::vector<double> rho(max_lag + 1, 0.0);
    if (m.density()) rho = density_correlation(*m.density(), max_lag);
    for (const auto& at : m.atoms()) {
        for (std::size_t k = 0; k <= max_lag; ++k) rho[k] += at.weight * std::cos(static_cast<double>(k) * at.alpha);
    }
    rho[0] = 1.0;
    for (auto& v : rho) v = std::clamp(v, -1.0, 1.0);
    return CorrelationSequence(std::move(rho));
}

struct PsdReport {
    double fejer_min = 0.0;
    double toeplitz_min_eigenvalue = 0.0;
    std::size_t toeplitz_order = 0;
    std::vector<std::size_t> fejer_degrees;
    bool passed = false;
};

/// Fejer-sum minimum sum_{|r|<=n}(1-|r|/n) rho(r) e^{irx} over a >= 4n-point
/// grid for n in {R/4, R/2, R}, and the smallest eigenvalue of the Toeplitz
/// matrix [rho(i-j)] of order min(R+1, 64).
inline PsdReport validate_psd(const CorrelationSequence& rho, double tol = 1e-8) {
    PsdReport rep;
    const std::size_t big_r = rho.max_lag();
    std::set<std::size_t> degrees;
    for (std::size_t n : {big_r / 4, big_r / 2, big_r}) {
        if (n >= 1) degrees.insert(n);
    }
    rep.fejer_min = std::numeric_limits<double>::infinity();
    for (std::size_t n : degrees) {
        const std::size_t m = next_power_of_two(std::max<std::size_t>(4 * n, 8));
        const double nn = static_cast<double>(n);
        auto sums = trig_sum_on_grid(
            [&](long long r) {
                const double ar = static_cast<double>(r < 0 ? -r : r);
                return cplx{(1.0 - ar / nn) * rho[r], 0.0};
            },
            n, m);
        for (double v : sums) rep.fejer_min = std::min(rep.fejer_min, v);
        rep.fejer_degrees.push_back(n);
    }

    const std::size_t order = std::min<std::size_t>(big_r + 1, 64);
    Eigen::MatrixXd t(order, order);
    for (std::size_t i = 0; i < order; ++i) {
        for (std::size_t j = 0; j < order; ++j) {
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rho[static_cast<long long>(i) - static_cast<long long>(j)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    rep.toeplitz_order = order;
    rep.toeplitz_min_eigenvalue = es.eigenvalues().minCoeff();
    rep.passed = rep.fejer_min >= -tol && rep.toeplitz_min_eigenvalue >= -tol;
    return rep;
}

inline constexpr double nodal_zero_threshold = 1e-12;
inline constexpr std::size_t hypothesis_grid_points = std::size_t{1} << 16;

/// Lebesgue measure of {psi = 0} within [-pi, pi].
inline double nodal_measure(const DensitySpec& d) {
    switch (d.kind()) {
        case DensityKind::box: return two_pi - 2.0 * d.a();
        case DensityKind::annulus: return two_pi - 2.0 * (d.a() - d.b());
        case DensityKind::tabulated: {
            const std::size_t n = hypothesis_grid_points;
            const double h = two_pi / static_cast<double>(n);
            std::size_t zeros = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d(-pi + (static_cast<double>(i) + 0.5) * h) < nodal_zero_threshold) ++zeros;
            }
            return static_cast<double>(zeros) * h;
        }
        default: return 0.0;
    }
}

enum class LimitLaw { non_universal, mean_universal, as_universal };

inline std::string to_string(LimitLaw t) {
    switch (t) {
        case LimitLaw::non_universal: return "non_universal";
        case LimitLaw::mean_universal: return "mean_universal";
        case LimitLaw::as_universal: return "as_universal";
    }
    return "unknown";
}

struct HypothesisReport {
    double nodal_measure = 0.0;
    double log_norm = 0.0;    // int |log psi|^{1+eta}, +inf when divergent
    double neg_moment = 0.0;  // int psi^{-gamma}, +inf when divergent
    double besov_exponent_estimate = 0.0;
    std::vector<double> besov_deltas;
    std::vector<double> besov_moduli;
    std::set<LimitLaw> applicable_laws;

    bool applies(LimitLaw t) const { return applicable_laws.count(t) != 0; }
};

namespace detail {

inline constexpr double infinite_integral_cap = 1e12;

/// Midpoint sum of g(psi(x)) on `points` cells of [-pi, pi]; +inf as soon as
/// a term is non-finite or the running sum passes the cap.
template <class G>
double capped_midpoint(const DensitySpec& d, G&& g, std::size_t points) {
    const double h = two_pi / static_cast<double>(points);
    double sum = 0.0;
    // Symmetric: integrate [0, pi] and double.
    for (std::size_t i = 0; i < points / 2; ++i) {
        const double v = g(d((static_cast<double>(i) + 0.5) * h));
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        sum += 2.0 * v * h;
        if (sum > infinite_integral_cap) return std::numeric_limits<double>::infinity();
    }
    return sum;
}

/// Capped midpoint rule plus a refinement test: a sum that keeps growing by
/// non-shrinking increments across N/4, N/2, N points is a non-integrable
/// singularity sampled at finite resolution, and is reported as +inf.
template <class G>
double improper_integral(const DensitySpec& d, G&& g) {
    const std::size_t n = hypothesis_grid_points;
    const double s4 = capped_midpoint(d, g, n / 4);
    const double s2 = capped_midpoint(d, g, n / 2);
    const double s1 = capped_midpoint(d, g, n);
    if (!std::isfinite(s1) || !std::isfinite(s2) || !std::isfinite(s4)) return std::numeric_limits<double>::infinity();
    const double d1 = s2 - s4;
    const double d2 = s1 - s2;
    if (d1 > 0.0 && d2 > 1e-6 * std::abs(s1) && d2 >= 0.9 * d1) return std::numeric_limits<double>::infinity();
    return s1;
}

}  // namespace detail

/// Second-difference L1 modulus sup_{|h|<=delta} ||psi(.+h)+psi(.-h)-2psi||_1.
inline double besov_modulus(const DensitySpec& d, double delta, std::size_t grid_points = hypothesis_grid_points,
                            std::size_t h_values = 32) {
    const double dx = two_pi / static_cast<double>(grid_points);
    std::vector<double> base(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) base[i] = d(-pi + (static_cast<double>(i) + 0.5) * dx);
    double sup = 0.0;
    for (std::size_t j = 1; j <= h_values; ++j) {
        const double h = delta * static_cast<double>(j) / static_cast<double>(h_values);
        double norm = 0.0;
        for (std::size_t i = 0; i < grid_points; ++i) {
            const double x = -pi + (static_cast<double>(i) + 0.5) * dx;
            norm += std::abs(d(x + h) + d(x - h) - 2.0 * base[i]);
        }
        sup = std::max(sup, norm * dx);
    }
    return sup;
}

/// Besov orders are measured through second differences, which saturate at 2.
inline constexpr double besov_saturation_order = 2.0;
/// Fitted slope needed to declare "some alpha > 0".
inline constexpr double besov_min_order = 0.1;

inline HypothesisReport hypothesis_report(const DensitySpec& d, double eta, double gamma) {
    if (!(eta > 0.0)) throw InvalidInput("hypothesis_report: eta must be > 0");
    if (!(gamma > 0.0)) throw InvalidInput("hypothesis_report: gamma must be > 0");
    HypothesisReport rep;
    rep.nodal_measure = std::clamp(nodal_measure(d), 0.0, two_pi);

    rep.log_norm = detail::improper_integral(d, [eta](double psi) {
        if (psi <= 0.0) return std::numeric_limits<double>::infinity();
        return std::pow(std::abs(std::log(psi)), 1.0 + eta);
    });
    rep.neg_moment = detail::improper_integral(d, [gamma](double psi) {
        if (psi <= 0.0) return std::numeric_limits<double>::infinity();
        return std::pow(psi, -gamma);
    });
    if (rep.nodal_measure > 0.0) {
        rep.log_norm = std::numeric_limits<double>::infinity();
        rep.neg_moment = std::numeric_limits<double>::infinity();
    }

    std::vector<double> lx, ly;
    double max_modulus = 0.0;
    for (int j = 3; j <= 10; ++j) {
        const double delta = std::ldexp(1.0, -j);
        const double w = besov_modulus(d, delta);
        rep.besov_deltas.push_back(delta);
        rep.besov_moduli.push_back(w);
        max_modulus = std::max(max_modulus, w);
        if (w > 0.0) {
            lx.push_back(std::log(delta));
            ly.push_back(std::log(w));
        }
    }
    if (max_modulus < 1e-13 || lx.size() < 2) {
        rep.besov_exponent_estimate = besov_saturation_order;
    } else {
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        rep.besov_exponent_estimate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }

    if (rep.nodal_measure > 0.0) rep.applicable_laws.insert(LimitLaw::non_universal);
    if (std::isfinite(rep.log_norm)) rep.applicable_laws.insert(LimitLaw::mean_universal);
    if (std::isfinite(rep.neg_moment) && rep.besov_exponent_estimate > besov_min_order) {
        rep.applicable_laws.insert(LimitLaw::as_universal);
    }
    return rep;
}

/// Measure-level report: the a.s. law additionally needs a purely
/// absolutely continuous measure. Purely atomic measures satisfy none.
inline HypothesisReport hypothesis_report(const SpectralMeasure& m, double eta, double gamma) {
    if (!m.density()) {
        HypothesisReport rep;
        rep.nodal_measure = two_pi;
        rep.log_norm = std::numeric_limits<double>::infinity();
        rep.neg_moment = std::numeric_limits<double>::infinity();
        return rep;
    }
    auto rep = hypothesis_report(*m.density(), eta, gamma);
    if (!m.atoms().empty()) rep.applicable_laws.erase(LimitLaw::as_universal);
    return rep;
}

}  // namespace trigzero

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trigzero/errors.hpp"
#include "trigzero/fft.hpp"
#include "trigzero/parallel.hpp"
#include "trigzero/rng.hpp"
#include "trigzero/spectral.hpp"

namespace trigzero {

struct SeedLineage {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
};

/// One realization of (a_1..a_n), (b_1..b_n); index 0 of each array holds k = 1.
struct CoefficientSample {
    std::size_t n = 0;
    std::vector<double> a;
    std::vector<double> b;
    SeedLineage lineage;
};

inline std::uint64_t a_stream_seed(std::uint64_t master, std::uint64_t stream) { return derive_seed(master, 2 * stream); }
inline std::uint64_t b_stream_seed(std::uint64_t master, std::uint64_t stream) {
    return derive_seed(master, 2 * stream + 1);
}

struct EmbeddingPlan {
    std::size_t target_n = 0;
    std::size_t embedding_size = 0;  // 2M
    std::vector<double> eigenvalues;
    double clip_magnitude = 0.0;
    double max_eigenvalue = 0.0;
};

inline constexpr double embedding_clip_tolerance = 1e-8;
inline constexpr std::size_t embedding_size_cap = std::size_t{1} << 24;
inline constexpr std::size_t cholesky_max_n = 4096;

struct EmbeddingAttempt {
    std::optional<EmbeddingPlan> plan;
    double min_relative_eigenvalue = 0.0;  // most negative eigenvalue / max, last size tried
    std::size_t last_size = 0;
    bool stalled = false;
};

/// Circulant eigenvalues for first row [c(0)..c(M), c(M-1)..c(1)].
inline std::vector<double> circulant_eigenvalues(const std::function<double(std::size_t)>& lag, std::size_t half) {
    const std::size_t size = 2 * half;
    std::vector<cplx> row(size);
    for (std::size_t k = 0; k <= half; ++k) row[k] = lag(k);
    for (std::size_t k = 1; k < half; ++k) row[size - k] = row[k];
    fft_inplace(row, FftDirection::forward);
    std::vector<double> eig(size);
    for (std::size_t j = 0; j < size; ++j) eig[j] = row[j].real();
    return eig;
}

/// Doubles M from the next power of two >= 2n while the most negative
/// eigenvalue is below -1e-8 * max. Stops early when two consecutive doublings
/// fail to shrink the relative deficit by half: jump discontinuities in the
/// spectral density keep a Gibbs undershoot that no embedding size removes.
inline EmbeddingAttempt try_build_embedding(const std::function<double(std::size_t)>& lag, std::size_t n,
                                            std::size_t cap = embedding_size_cap) {
    if (n < 1) throw InvalidInput("build_embedding: n must be >= 1");
    EmbeddingAttempt out;
    std::size_t half = next_power_of_two(2 * n);
    double prev = 0.0;
    int flat_steps = 0;
    for (; 2 * half <= cap; half *= 2) {
        auto eig = circulant_eigenvalues(lag, half);
        const double top = *std::max_element(eig.begin(), eig.end());
        const double low = *std::min_element(eig.begin(), eig.end());
        out.last_size = 2 * half;
        if (!(top > 0.0)) {
            out.min_relative_eigenvalue = -std::numeric_limits<double>::infinity();
            return out;
        }
        out.min_relative_eigenvalue = low / top;
        if (low >= -embedding_clip_tolerance * top) {
            EmbeddingPlan plan;
            plan.target_n = n;
            plan.embedding_size = 2 * half;
            plan.max_eigenvalue = top;
            plan.clip_magnitude = std::max(0.0, -low);
            for (auto& v : eig) v = std::max(v, 0.0);
            plan.eigenvalues = std::move(eig);
            out.plan = std::move(plan);
            return out;
        }
        const double deficit = -out.min_relative_eigenvalue;
        if (prev > 0.0 && deficit > 0.5 * prev) {
            if (++flat_steps >= 2) {
                out.stalled = true;
                return out;
            }
        } else {
            flat_steps = 0;
        }
        prev = deficit;
    }
    return out;
}

/// Embedding plan for the stationary covariance rho; lags beyond rho.max_lag()
/// are taken as zero.
inline EmbeddingPlan build_embedding(const CorrelationSequence& rho, std::size_t n) {
    rho.require_lag(n, "build_embedding");
    auto lag = [&rho](std::size_t k) { return k <= rho.max_lag() ? rho[static_cast<long long>(k)] : 0.0; };
    auto att = try_build_embedding(lag, n);
    if (!att.plan) {
        std::ostringstream os;
        os.precision(6);
        os << "build_embedding: no nonnegative circulant up to size " << att.last_size
           << (att.stalled ? " (deficit stalled)" : "") << "; min eigenvalue / max = " << att.min_relative_eigenvalue;
        throw NumericalFailure(os.str());
    }
    return std::move(*att.plan);
}

/// Lag function of the density part (mass included). Closed forms cover every
/// lag; a tabulated density is integrated up to lag n and zero beyond.
inline std::function<double(std::size_t)> density_lag_function(const DensitySpec& d, std::size_t n) {
    if (d.has_closed_form_correlation()) {
        return [d](std::size_t k) { return *d.closed_form_correlation(static_cast<long long>(k)); };
    }
    auto table = std::make_shared<std::vector<double>>(density_correlation(d, n));
    return [table](std::size_t k) { return k < table->size() ? (*table)[k] : 0.0; };
}

/// Reusable sampler for one (measure, n): the embedding plan or the Cholesky
/// factor is built once and shared by all replicates.
class CoefficientSampler {
public:
    enum class Method { none, white, circulant, cholesky };

    CoefficientSampler(SpectralMeasure measure, std::size_t n) : measure_(std::move(measure)), n_(n) {
        if (n < 1) throw InvalidInput("sample_coefficients: n must be >= 1");
        if (!measure_.density()) return;
        const auto& d = *measure_.density();
        if (d.kind() == DensityKind::uniform || d.kind() == DensityKind::constant_corr) {
            method_ = Method::white;
            white_scale_ = std::sqrt(d.mass());
            return;
        }
        const auto lag = density_lag_function(d, n);
        auto att = try_build_embedding(lag, n);
        if (att.plan) {
            method_ = Method::circulant;
            plan_ = std::move(*att.plan);
            scaled_root_.resize(plan_.eigenvalues.size());
            const double size = static_cast<double>(plan_.embedding_size);
            for (std::size_t j = 0; j < scaled_root_.size(); ++j) {
                scaled_root_[j] = std::sqrt(plan_.eigenvalues[j] / size);
            }
            return;
        }
        embedding_deficit_ = att.min_relative_eigenvalue;
        if (n > cholesky_max_n) {
            std::ostringstream os;
            os.precision(6);
            os << "sample_coefficients: circulant embedding failed (min eigenvalue / max = "
               << att.min_relative_eigenvalue << " at size " << att.last_size << ") and n = " << n
               << " exceeds the Cholesky limit " << cholesky_max_n;
            throw NumericalFailure(os.str());
        }
        build_cholesky(lag);
    }

    std::size_t n() const { return n_; }
    Method method() const { return method_; }
    const EmbeddingPlan& plan() const { return plan_; }
    double cholesky_jitter() const { return jitter_; }
    double embedding_deficit() const { return embedding_deficit_; }

    CoefficientSample sample(std::uint64_t master_seed, std::uint64_t stream_id) const {
        CoefficientSample s;
        s.n = n_;
        s.lineage = {master_seed, stream_id};
        s.a = draw(a_stream_seed(master_seed, stream_id));
        s.b = draw(b_stream_seed(master_seed, stream_id));
        return s;
    }

private:
    void build_cholesky(const std::function<double(std::size_t)>& lag) {
        const auto nn = static_cast<Eigen::Index>(n_);
        Eigen::MatrixXd t(nn, nn);
        for (Eigen::Index i = 0; i < nn; ++i) {
            for (Eigen::Index j = 0; j < nn; ++j) t(i, j) = lag(static_cast<std::size_t>(std::abs(i - j)));
        }
        // Toeplitz matrices of densities with a nodal set are singular to
        // working precision; a diagonal jitter far below Monte Carlo noise
        // restores positive definiteness.
        for (double jitter : {0.0, 1e-12, 1e-10, 1e-8, 1e-6}) {
            Eigen::MatrixXd m = t;
            m.diagonal().array() += jitter;
            Eigen::LLT<Eigen::MatrixXd> llt(m);
            if (llt.info() == Eigen::Success) {
                factor_ = llt.matrixL();
                jitter_ = jitter;
                method_ = Method::cholesky;
                return;
            }
        }
        throw NumericalFailure("sample_coefficients: Cholesky fallback failed even with jitter 1e-6");
    }

    std::vector<double> draw(std::uint64_t seed) const {
        NormalStream z(seed);
        std::vector<double> x(n_, 0.0);
        switch (method_) {
            case Method::none: break;
            case Method::white:
                for (auto& v : x) v = white_scale_ * z();
                break;
            case Method::circulant: {
                std::vector<cplx> w(scaled_root_.size());
                for (std::size_t j = 0; j < w.size(); ++j) {
                    const double re = z();
                    const double im = z();
                    w[j] = scaled_root_[j] * cplx{re, im};
                }
                fft_inplace(w, FftDirection::forward);
                for (std::size_t k = 0; k < n_; ++k) x[k] = w[k].real();
                break;
            }
            case Method::cholesky: {
                Eigen::VectorXd g(static_cast<Eigen::Index>(n_));
                for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = z();
                const Eigen::VectorXd y = factor_.triangularView<Eigen::Lower>() * g;
                for (std::size_t k = 0; k < n_; ++k) x[k] = y(static_cast<Eigen::Index>(k));
                break;
            }
        }
        for (const auto& at : measure_.atoms()) {
            const double xi = z();
            const double eta = z();
            const double sw = std::sqrt(at.weight);
            for (std::size_t k = 0; k < n_; ++k) {
                const double kk = static_cast<double>(k + 1);
                x[k] += sw * (xi * std::cos(kk * at.alpha) + eta * std::sin(kk * at.alpha));
            }
        }
        return x;
    }

    SpectralMeasure measure_;
    std::size_t n_;
    Method method_ = Method::none;
    double white_scale_ = 0.0;
    EmbeddingPlan plan_;
    std::vector<double> scaled_root_;
    Eigen::MatrixXd factor_;
    double jitter_ = 0.0;
    double embedding_deficit_ = 0.0;
};

inline std::string to_string(CoefficientSampler::Method m) {
    switch (m) {
        case CoefficientSampler::Method::none: return "none";
        case CoefficientSampler::Method::white: return "white";
        case CoefficientSampler::Method::circulant: return "circulant";
        case CoefficientSampler::Method::cholesky: return "cholesky";
    }
    return "unknown";
}

inline CoefficientSample sample_coefficients(const SpectralMeasure& measure, std::size_t n, std::uint64_t master_seed,
                                             std::uint64_t stream_id) {
    return CoefficientSampler(measure, n).sample(master_seed, stream_id);
}

/// Replicates stream_id = first..first+count-1, in index order.
inline std::vector<CoefficientSample> sample_replicates(const CoefficientSampler& sampler, std::uint64_t master_seed,
                                                        std::size_t count, std::uint64_t first = 0) {
    std::vector<CoefficientSample> out(count);
    parallel_for(count, [&](std::size_t i) { out[i] = sampler.sample(master_seed, first + i); });
    return out;
}

struct CovarianceCheck {
    std::vector<double> reference;
    std::vector<double> estimate;
    std::vector<double> standard_error;
    std::vector<bool> lag_pass;
    bool pass = true;
    std::optional<std::size_t> first_failing_lag;
};

inline constexpr double covariance_check_sigmas = 4.0;
inline constexpr std::size_t covariance_check_min_samples = 50;

namespace detail {

inline double lag_product_mean(const std::vector<double>& x, const std::vector<double>& y, std::size_t k) {
    const std::size_t count = x.size() - k;
    double s = 0.0;
    for (std::size_t j = 0; j < count; ++j) s += x[j] * y[j + k];
    return s / static_cast<double>(count);
}

/// Pooled mean and standard error over per-series estimates.
inline std::pair<double, double> pooled(const std::vector<double>& per_series) {
    const auto m = static_cast<double>(per_series.size());
    double mean = 0.0;
    for (double v : per_series) mean += v;
    mean /= m;
    double ss = 0.0;
    for (double v : per_series) ss += (v - mean) * (v - mean);
    const double var = per_series.size() > 1 ? ss / (m - 1.0) : 0.0;
    return {mean, std::sqrt(var / m)};
}

inline CovarianceCheck finish_check(std::vector<double> reference, std::vector<std::vector<double>> per_lag) {
    CovarianceCheck rep;
    rep.reference = std::move(reference);
    for (std::size_t k = 0; k < per_lag.size(); ++k) {
        const auto [mean, se] = pooled(per_lag[k]);
        rep.estimate.push_back(mean);
        rep.standard_error.push_back(se);
        const bool ok = std::abs(mean - rep.reference[k]) < covariance_check_sigmas * se;
        rep.lag_pass.push_back(ok);
        if (!ok && !rep.first_failing_lag) rep.first_failing_lag = k;
        rep.pass = rep.pass && ok;
    }
    return rep;
}

}  // namespace detail

/// Pooled empirical rho(k), k <= max_lag, over both a and b of every sample.
/// Lag k passes when |estimate - rho(k)| < 4 SE(k).
inline CovarianceCheck covariance_check(const std::vector<CoefficientSample>& samples, const CorrelationSequence& rho,
                                        std::size_t max_lag) {
    if (samples.size() < covariance_check_min_samples) {
        throw InvalidInput("covariance_check: needs at least 50 samples");
    }
    rho.require_lag(max_lag, "covariance_check");
    std::vector<std::vector<double>> per_lag(max_lag + 1);
    std::vector<double> reference(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        reference[k] = rho[static_cast<long long>(k)];
        for (const auto& s : samples) {
            if (k >= s.n) throw InvalidInput("covariance_check: max_lag must be below n");
            per_lag[k].push_back(detail::lag_product_mean(s.a, s.a, k));
            per_lag[k].push_back(detail::lag_product_mean(s.b, s.b, k));
        }
    }
    return detail::finish_check(std::move(reference), std::move(per_lag));
}

/// Pooled cross-covariance E[a_j b_{j+k}] (and b_j a_{j+k}) against 0.
inline CovarianceCheck cross_covariance_check(const std::vector<CoefficientSample>& samples, std::size_t max_lag) {
    std::vector<std::vector<double>> per_lag(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        for (const auto& s : samples) {
            per_lag[k].push_back(detail::lag_product_mean(s.a, s.b, k));
            per_lag[k].push_back(detail::lag_product_mean(s.b, s.a, k));
        }
    }
    return detail::finish_check(std::vector<double>(max_lag + 1, 0.0), std::move(per_lag));
}

/// (1/2n) sum_k (a_k^2 + b_k^2).
inline double birkhoff_average(const CoefficientSample& s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.n; ++k) acc += s.a[k] * s.a[k] + s.b[k] * s.b[k];
    return acc / (2.0 * static_cast<double>(s.n));
}

}  // namespace trigzero

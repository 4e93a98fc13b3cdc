#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "trigzero/sampler.hpp"

using namespace trigzero;

namespace {

SpectralMeasure density_measure(const DensitySpec& d) { return SpectralMeasure::from_density(d); }

}  // namespace

TEST(Seeds, DisjointSubstreams) {
    EXPECT_NE(a_stream_seed(1, 0), b_stream_seed(1, 0));
    EXPECT_NE(a_stream_seed(1, 1), b_stream_seed(1, 0));
    EXPECT_EQ(a_stream_seed(5, 3), derive_seed(5, 6));
    EXPECT_EQ(b_stream_seed(5, 3), derive_seed(5, 7));
}

TEST(Sampler, UniformIsWhite) {
    const std::size_t n = 100000;
    const auto s = sample_coefficients(density_measure(DensitySpec::uniform()), n, 42, 0);
    double c1 = 0.0, c0 = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) c1 += s.a[k] * s.a[k + 1];
    for (double v : s.a) c0 += v * v;
    EXPECT_LT(std::abs(c1 / c0), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Sampler, PureAtomRecurrence) {
    const double alpha = std::sqrt(2.0);
    const auto s = sample_coefficients(SpectralMeasure::atomic(alpha), 500, 9, 4);
    for (std::size_t k = 1; k + 1 < s.n; ++k) {
        EXPECT_NEAR(s.a[k + 1] + s.a[k - 1], 2 * std::cos(alpha) * s.a[k], 1e-12);
        EXPECT_NEAR(s.b[k + 1] + s.b[k - 1], 2 * std::cos(alpha) * s.b[k], 1e-12);
    }
}

TEST(Sampler, Deterministic) {
    for (const auto& mu : {density_measure(DensitySpec::poisson(0.5)), density_measure(DensitySpec::box(pi / 2)),
                           SpectralMeasure::constant_corr(0.3), SpectralMeasure::atomic(1.0)}) {
        const auto s1 = sample_coefficients(mu, 300, 77, 5);
        const auto s2 = sample_coefficients(mu, 300, 77, 5);
        const auto s3 = sample_coefficients(mu, 300, 77, 6);
        EXPECT_EQ(s1.a, s2.a);
        EXPECT_EQ(s1.b, s2.b);
        EXPECT_NE(s1.a, s3.a);
        EXPECT_EQ(s1.lineage.master_seed, 77u);
        EXPECT_EQ(s1.lineage.stream_id, 5u);
        for (double v : s1.a) ASSERT_TRUE(std::isfinite(v));
    }
}

TEST(Sampler, ReplicatesAreOrderIndependent) {
    const CoefficientSampler sampler(density_measure(DensitySpec::poisson(0.5)), 128);
    const auto batch = sample_replicates(sampler, 3, 10, 5);
    for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(batch[i].a, sampler.sample(3, 5 + i).a);
}

TEST(Sampler, MethodSelection) {
    EXPECT_EQ(CoefficientSampler(density_measure(DensitySpec::uniform()), 64).method(),
              CoefficientSampler::Method::white);
    EXPECT_EQ(CoefficientSampler(density_measure(DensitySpec::poisson(0.5)), 64).method(),
              CoefficientSampler::Method::circulant);
    EXPECT_EQ(CoefficientSampler(SpectralMeasure::atomic(1.0), 64).method(), CoefficientSampler::Method::none);
    const CoefficientSampler box(density_measure(DensitySpec::box(pi / 2)), 256);
    EXPECT_EQ(box.method(), CoefficientSampler::Method::cholesky);
    EXPECT_LT(box.embedding_deficit(), -1e-8);
    EXPECT_LE(box.cholesky_jitter(), 1e-6);
}

TEST(Sampler, RejectsUnreachableSizes) {
    EXPECT_THROW(CoefficientSampler(density_measure(DensitySpec::uniform()), 0), InvalidInput);
    EXPECT_THROW(CoefficientSampler(density_measure(DensitySpec::box(pi / 2)), cholesky_max_n + 1), NumericalFailure);
}

TEST(Embedding, IndependentAllOnes) {
    const auto plan = build_embedding(CorrelationSequence::independent(100), 100);
    EXPECT_EQ(plan.embedding_size, 2 * next_power_of_two(200));
    for (double v : plan.eigenvalues) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Embedding, PoissonFirstSize) {
    const std::size_t n = 1024;
    const auto rho = correlation_of(density_measure(DensitySpec::poisson(0.5)), n);
    const auto plan = build_embedding(rho, n);
    EXPECT_EQ(plan.embedding_size, 2 * next_power_of_two(2 * n));
    EXPECT_GT(*std::min_element(plan.eigenvalues.begin(), plan.eigenvalues.end()), 0.0);
    EXPECT_EQ(plan.clip_magnitude, 0.0);
}

TEST(Embedding, ReconstructsCovariance) {
    const std::size_t n = 1024;
    const auto d = DensitySpec::poisson(0.5);
    const auto plan = EmbeddingPlan(*try_build_embedding(density_lag_function(d, n), n).plan);
    // inverse transform of the eigenvalues recovers the circulant first row
    std::vector<cplx> row(plan.eigenvalues.begin(), plan.eigenvalues.end());
    fft_inplace(row, FftDirection::inverse);
    const double size = static_cast<double>(plan.embedding_size);
    for (std::size_t k = 0; k <= n; ++k) EXPECT_NEAR(row[k].real() / size, std::pow(0.5, k), 1e-8) << k;
}

TEST(Embedding, BoxStallsOnGibbsUndershoot) {
    const std::size_t n = 1024;
    const auto rho = correlation_of(density_measure(DensitySpec::box(pi / 2)), 4 * n);
    const auto att = try_build_embedding(density_lag_function(DensitySpec::box(pi / 2), n), n);
    EXPECT_FALSE(att.plan.has_value());
    EXPECT_TRUE(att.stalled);
    EXPECT_LT(att.min_relative_eigenvalue, -1e-8);
    EXPECT_THROW(build_embedding(rho, n), NumericalFailure);
}

TEST(Embedding, ClipStaysWithinTolerance) {
    for (const auto& d : {DensitySpec::poisson(0.9), DensitySpec::raised_cosine_squared()}) {
        const auto att = try_build_embedding(density_lag_function(d, 512), 512);
        ASSERT_TRUE(att.plan.has_value()) << d.describe();
        EXPECT_LE(att.plan->clip_magnitude, embedding_clip_tolerance * att.plan->max_eigenvalue);
        for (double v : att.plan->eigenvalues) EXPECT_GE(v, 0.0);
    }
}

TEST(CovarianceCheck, IndependentPasses) {
    const std::size_t n = 4096;
    const CoefficientSampler sampler(density_measure(DensitySpec::uniform()), n);
    const auto samples = sample_replicates(sampler, 100, 200);
    const auto rep = covariance_check(samples, CorrelationSequence::independent(n), 8);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.estimate[1], 0.0, 4 * rep.standard_error[1]);
    EXPECT_NEAR(rep.estimate[0], 1.0, 4 * rep.standard_error[0]);
}

TEST(CovarianceCheck, PoissonLagOneWithinThreeSE) {
    const std::size_t n = 4096;
    const auto mu = density_measure(DensitySpec::poisson(0.5));
    const auto samples = sample_replicates(CoefficientSampler(mu, n), 101, 200);
    const auto rep = covariance_check(samples, correlation_of(mu, n), 8);
    EXPECT_TRUE(rep.pass);
    EXPECT_LT(std::abs(rep.estimate[1] - 0.5), 3 * rep.standard_error[1]);
}

TEST(CovarianceCheck, MismatchedReferenceFailsAtLagOne) {
    const std::size_t n = 1024;
    const auto samples = sample_replicates(CoefficientSampler(density_measure(DensitySpec::poisson(0.5)), n), 102, 60);
    const auto wrong = correlation_of(density_measure(DensitySpec::poisson(0.8)), n);
    const auto rep = covariance_check(samples, wrong, 4);
    EXPECT_FALSE(rep.pass);
    ASSERT_TRUE(rep.first_failing_lag.has_value());
    EXPECT_EQ(*rep.first_failing_lag, 1u);
}

TEST(CovarianceCheck, NeedsFiftySamples) {
    const auto samples = sample_replicates(CoefficientSampler(density_measure(DensitySpec::uniform()), 64), 1, 10);
    EXPECT_THROW(covariance_check(samples, CorrelationSequence::independent(64), 2), InvalidInput);
}

TEST(CovarianceCheck, EveryMethodReproducesItsCorrelation) {
    const std::size_t n = 512;
    for (const auto& mu : {density_measure(DensitySpec::box(pi / 2)), density_measure(DensitySpec::annulus(0.5, 1.5)),
                           density_measure(DensitySpec::raised_cosine_squared()), SpectralMeasure::constant_corr(0.3),
                           SpectralMeasure::atomic(std::sqrt(2.0))}) {
        const auto samples = sample_replicates(CoefficientSampler(mu, n), 103, 200);
        const auto rep = covariance_check(samples, correlation_of(mu, n), 8);
        EXPECT_TRUE(rep.pass) << mu.describe();
        EXPECT_TRUE(cross_covariance_check(samples, 8).pass) << mu.describe();
    }
}

TEST(Birkhoff, AtomlessAveragesConcentrate) {
    const std::size_t n = std::size_t{1} << 16;
    for (const auto& d : {DensitySpec::uniform(), DensitySpec::poisson(0.5), DensitySpec::raised_cosine_squared()}) {
        const CoefficientSampler sampler(density_measure(d), n);
        std::vector<double> avg(100);
        parallel_for(avg.size(), [&](std::size_t i) { avg[i] = birkhoff_average(sampler.sample(2024, i)); });
        const auto inside = std::count_if(avg.begin(), avg.end(), [](double v) { return v >= 0.9 && v <= 1.1; });
        EXPECT_GE(inside, 95) << d.describe();
    }
}

TEST(Birkhoff, AtomAverageIsFinite) {
    const auto s = sample_coefficients(SpectralMeasure::atomic(std::sqrt(2.0)), std::size_t{1} << 16, 2024, 0);
    EXPECT_TRUE(std::isfinite(birkhoff_average(s)));
}

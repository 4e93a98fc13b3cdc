#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "trigzero/kacrice.hpp"
#include "trigzero/zeros.hpp"

using namespace trigzero;

namespace {

CoefficientSample make_sample(std::vector<double> a, std::vector<double> b) {
    CoefficientSample s;
    s.n = a.size();
    s.a = std::move(a);
    s.b = std::move(b);
    return s;
}

SpectralMeasure density_measure(const DensitySpec& d) { return SpectralMeasure::from_density(d); }

}  // namespace

TEST(EvaluateGrid, Cosine) {
    const auto s = make_sample({1.0}, {0.0});
    const auto f = evaluate_grid(s, 64);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i], std::cos(two_pi * i / 64.0), 1e-12);
}

TEST(EvaluateGrid, SineFromSecondSlot) {
    const auto s = make_sample({0.0, 0.0}, {std::sqrt(2.0), 0.0});
    const auto f = evaluate_grid(s, 64);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i], std::sin(two_pi * i / 64.0), 1e-12);
}

TEST(EvaluateGrid, MatchesDirectSummation) {
    const auto s = sample_coefficients(density_measure(DensitySpec::uniform()), 64, 1, 0);
    const std::size_t m = 4096;
    const auto f = evaluate_grid(s, m);
    const auto df = evaluate_derivative_grid(s, m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = two_pi * static_cast<double>(i) / static_cast<double>(m);
        double direct = 0.0, ddirect = 0.0;
        for (std::size_t k = 1; k <= s.n; ++k) {
            direct += s.a[k - 1] * std::cos(k * x) + s.b[k - 1] * std::sin(k * x);
            ddirect += k * (-s.a[k - 1] * std::sin(k * x) + s.b[k - 1] * std::cos(k * x));
        }
        ASSERT_NEAR(f[i], direct / 8.0, 1e-10);
        ASSERT_NEAR(df[i], ddirect / 8.0, 1e-9);
        ASSERT_NEAR(evaluate_direct(s, x), f[i], 1e-10);
    }
}

TEST(EvaluateGrid, RejectsSmallOrOddGrids) {
    const auto s = make_sample({1.0, 1.0, 1.0}, {0.0, 0.0, 0.0});
    EXPECT_THROW(evaluate_grid(s, 4), InvalidInput);
    EXPECT_THROW(evaluate_grid(s, 100), InvalidInput);
}

TEST(CountZeros, Cosine) {
    const auto zc = count_zeros(make_sample({1.0}, {0.0}));
    EXPECT_EQ(zc.count, 2u);
    ASSERT_EQ(zc.roots.size(), 2u);
    EXPECT_NEAR(zc.roots[0], pi / 2, 1e-12);
    EXPECT_NEAR(zc.roots[1], 3 * pi / 2, 1e-12);
    EXPECT_EQ(zc.suspicious_cells, 0u);
}

TEST(CountZeros, RootOnGridNodeCountedOnce) {
    // sin x vanishes exactly at the nodes 0 and pi
    const auto zc = count_zeros(make_sample({0.0}, {1.0}));
    EXPECT_EQ(zc.count, 2u);
    EXPECT_NEAR(zc.roots[0], 0.0, 1e-12);
    EXPECT_NEAR(zc.roots[1], pi, 1e-12);
}

TEST(CountZeros, SubIntervals) {
    const auto s = make_sample({1.0}, {0.0});
    EXPECT_EQ(count_zeros(s, 0.0, 2.0).count, 1u);
    EXPECT_EQ(count_zeros(s, 2.0, 4.0).count, 0u);
    EXPECT_EQ(count_zeros(s, 1.0, 5.0).count, 2u);
    EXPECT_THROW(count_zeros(s, 1.0, 1.0 + 7.0), InvalidInput);
}

TEST(CountZeros, RootsAreZerosAndBounded) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = sample_coefficients(density_measure(DensitySpec::poisson(0.5)), 200, seed, 0);
        const auto zc = count_zeros(s);
        EXPECT_LE(zc.count, 2 * s.n);
        EXPECT_EQ(zc.roots.size(), zc.count);
        double scale = 0.0;
        for (double v : evaluate_grid(s, zero_grid_size(s.n))) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < zc.roots.size(); ++i) {
            EXPECT_LT(std::abs(evaluate_direct(s, zc.roots[i])), 1e-9 * (1 + scale));
            if (i) EXPECT_GT(zc.roots[i], zc.roots[i - 1]);
        }
    }
}

TEST(CountZeros, ShiftInvariance) {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = sample_coefficients(density_measure(DensitySpec::box(pi / 2)), 48, seed, 0);
        const double c = u(gen);
        EXPECT_EQ(count_zeros(s).count, count_zeros(s, c, c + two_pi).count) << seed;
    }
}

TEST(CountZeros, NearTangencyIsResolved) {
    // g(x) = cos 2(x - x0) - (1 - eps) cos(x - x0) has a local maximum eps at
    // x0, so two roots about 1.6e-4 apart sit inside one grid cell of width
    // 2 pi / 4096, plus the pair where cos(x - x0) is near -1/2.
    const double eps = 1e-8;
    const double x0 = pi / 4096.0;
    const double a1 = -(1 - eps), a2 = 1.0;
    const double r2 = std::sqrt(2.0);
    const auto s = make_sample({r2 * a1 * std::cos(x0), r2 * a2 * std::cos(2 * x0)},
                               {r2 * a1 * std::sin(x0), r2 * a2 * std::sin(2 * x0)});
    const auto zc = count_zeros(s);
    EXPECT_EQ(zc.count, 4u);
    EXPECT_EQ(zc.count, companion_oracle(s).count);
    EXPECT_EQ(zc.suspicious_cells, 0u);
    ASSERT_EQ(zc.roots.size(), 4u);
    EXPECT_NEAR(zc.roots[0], x0 - std::sqrt(2 * eps / 3), 1e-6);
    EXPECT_NEAR(zc.roots[1], x0 + std::sqrt(2 * eps / 3), 1e-6);
}

TEST(Companion, Cosine) {
    const auto zc = companion_oracle(make_sample({1.0}, {0.0}));
    ASSERT_EQ(zc.count, 2u);
    EXPECT_NEAR(zc.roots[0], pi / 2, 1e-9);
    EXPECT_NEAR(zc.roots[1], 3 * pi / 2, 1e-9);
    EXPECT_EQ(zc.method, CountMethod::companion);
}

TEST(Companion, Sine) {
    const auto zc = companion_oracle(make_sample({0.0}, {1.0}));
    ASSERT_EQ(zc.count, 2u);
    EXPECT_NEAR(zc.roots[0], 0.0, 1e-9);
    EXPECT_NEAR(zc.roots[1], pi, 1e-9);
}

TEST(Companion, AlgebraicIdentity) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = sample_coefficients(density_measure(DensitySpec::poisson(0.5)), 32, seed, 1);
        EXPECT_LT(algebraic_identity_error(s), 1e-9);
    }
}

TEST(Companion, DegenerateLeadingCoefficient) {
    EXPECT_THROW(companion_oracle(make_sample({1.0, 0.0}, {0.0, 0.0})), NumericalFailure);
    const auto big = sample_coefficients(density_measure(DensitySpec::uniform()), 129, 1, 0);
    EXPECT_THROW(companion_oracle(big), InvalidInput);
}

TEST(Companion, MatchesGridCounterAtDegreeSixteen) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = sample_coefficients(density_measure(DensitySpec::uniform()), 16, seed, 0);
        const auto grid = count_zeros(s);
        const auto comp = companion_oracle(s);
        ASSERT_EQ(grid.count, comp.count) << seed;
        for (std::size_t i = 0; i < grid.count; ++i) EXPECT_NEAR(grid.roots[i], comp.roots[i], 1e-6);
    }
}

TEST(Companion, EquivalenceAcrossScenarios) {
    const std::vector<SpectralMeasure> measures{density_measure(DensitySpec::uniform()),
                                                density_measure(DensitySpec::box(pi / 2)),
                                                density_measure(DensitySpec::poisson(0.5))};
    for (const auto& mu : measures) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const std::size_t n = 1 + seed % 32;
            const auto s = sample_coefficients(mu, n, 5000 + seed, 0);
            ASSERT_EQ(count_zeros(s).count, companion_oracle(s).count) << mu.describe() << " seed " << seed;
        }
    }
}

TEST(ZeroStatistics, Summary) {
    std::vector<ZeroReplicate> rows{{0, 1, 10, 1.0, 0}, {1, 2, 12, 1.2, 0}, {2, 3, 14, 1.4, 0}};
    const auto st = summarize_replicates(10, rows);
    EXPECT_NEAR(st.mean_ratio, 1.2, 1e-15);
    EXPECT_NEAR(st.variance, 0.04, 1e-15);
    EXPECT_NEAR(st.se, std::sqrt(0.04 / 3), 1e-15);
}

TEST(ZeroStatistics, RequiresTwoReplicates) {
    EXPECT_THROW(zero_statistics(density_measure(DensitySpec::uniform()), 8, 1, 0), InvalidInput);
}

TEST(ZeroStatistics, Reproducible) {
    const auto mu = density_measure(DensitySpec::poisson(0.5));
    const auto s1 = zero_statistics(mu, 64, 20, 3);
    const auto s2 = zero_statistics(mu, 64, 20, 3);
    for (std::size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(s1.rows[i].count, s2.rows[i].count);
        EXPECT_EQ(s1.rows[i].seed, a_stream_seed(3, i));
    }
    EXPECT_EQ(s1.mean_ratio, s2.mean_ratio);
}

TEST(ZeroStatistics, IndependentMatchesKacRice) {
    const std::size_t n = 512;
    const auto st = zero_statistics(density_measure(DensitySpec::uniform()), n, 200, 20240601);
    const double target = 2.0 / n * std::sqrt((n + 1.0) * (2.0 * n + 1.0) / 6.0);
    EXPECT_NEAR(target, 1.156392, 1e-6);
    EXPECT_LE(std::abs(st.mean_ratio - target), 3 * st.se);
    for (const auto& r : st.rows) EXPECT_EQ(r.suspicious, 0u);
}

TEST(ZeroStatistics, PoissonMatchesUniversalLimit) {
    const std::size_t n = 4096;
    const auto st = zero_statistics(density_measure(DensitySpec::poisson(0.5)), n, 100, 20240602);
    EXPECT_LE(std::abs(st.mean_ratio - 2.0 / std::sqrt(3.0)), 3 * st.se);
}

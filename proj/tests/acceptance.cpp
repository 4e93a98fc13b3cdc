// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "trigzero/kacrice.hpp"
#include "trigzero/kernels.hpp"
#include "trigzero/sampler.hpp"
#include "trigzero/spectral.hpp"
#include "trigzero/szclt.hpp"
#include "trigzero/zeros.hpp"

using namespace trigzero;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

SpectralMeasure density_measure(const DensitySpec& d) { return SpectralMeasure::from_density(d); }

double ratio_at(const SpectralMeasure& mu, std::size_t n) {
    return expected_zero_ratio(correlation_of(mu, n), n).ratio;
}

double closed_form_ratio(std::size_t n) {
    const double nn = static_cast<double>(n);
    return 2.0 / nn * std::sqrt((nn + 1) * (2 * nn + 1) / 6.0);
}

double percentile95(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double pos = 0.95 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    return lo + 1 < v.size() ? v[lo] * (1 - frac) + v[lo + 1] * frac : v[lo];
}

void independent_exactness(Outcome& o) {
    double worst = 0.0;
    for (std::size_t n : {1u, 10u, 100u, 1000u}) {
        const double r = expected_zero_ratio(CorrelationSequence::independent(n), n).ratio;
        worst = std::max(worst, std::abs(r - closed_form_ratio(n)));
    }
    o.detail << "max |ratio - closed form| = " << worst;
    o.require(worst < 1e-6, "tolerance 1e-6");
}

void non_universal_limit_check(Outcome& o) {
    const std::vector<std::pair<double, double>> cases{{pi / 4, 1.349335}, {pi / 2, 1.284457}, {3 * pi / 4, 1.219578}};
    for (const auto& [a, stated] : cases) {
        const auto mu = density_measure(DensitySpec::box(a));
        const double limit = predicted_limit(*mu.density()).limit;
        const double r256 = ratio_at(mu, 256), r4096 = ratio_at(mu, 4096);
        o.detail << " a=" << a << ": limit " << limit << " ratio(256) " << r256 << " ratio(4096) " << r4096 << ";";
        o.require(std::abs(limit - stated) < 1e-6, "limit formula vs stated value");
        o.require(std::abs(r4096 - stated) < 0.03, "|ratio(4096) - limit| < 0.03");
        o.require(std::abs(r4096 - limit) < std::abs(r256 - limit), "gap shrinks 256 -> 4096");
    }
}

void universal_limit_check(Outcome& o) {
    for (const auto& mu : {density_measure(DensitySpec::poisson(0.5)), SpectralMeasure::constant_corr(0.3)}) {
        const double r = ratio_at(mu, 4096);
        o.detail << " " << mu.describe() << ": ratio(4096) " << r << ";";
        o.require(std::abs(r - 1.154701) < 0.02, "|ratio(4096) - 1.154701| < 0.02");
    }
}

void atomic_nonconvergence(Outcome& o) {
    const auto mu = SpectralMeasure::atomic(std::sqrt(2.0));
    double lo = 1e9, hi = -1e9;
    o.detail << "ratios";
    for (std::size_t n = 128; n <= 4096; n *= 2) {
        const double r = ratio_at(mu, n);
        o.detail << " " << r;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    o.detail << "; spread " << hi - lo;
    o.require(lo >= 1.35 && hi <= 2.05, "all ratios in [1.35, 2.05]");
    o.require(hi - lo >= 0.1, "spread >= 0.1");
}

void monte_carlo_agreement(Outcome& o) {
    const std::vector<std::pair<SpectralMeasure, std::size_t>> cases{{density_measure(DensitySpec::uniform()), 512},
                                                                     {density_measure(DensitySpec::box(pi / 2)), 1024}};
    std::uint64_t seed = 20240501;
    for (const auto& [mu, n] : cases) {
        const double kr = ratio_at(mu, n);
        const auto st = zero_statistics(mu, n, 200, seed++);
        o.detail << " " << mu.describe() << " n=" << n << ": mean " << st.mean_ratio << " se " << st.se << " kac-rice "
                 << kr << ";";
        o.require(std::abs(st.mean_ratio - kr) <= 3 * st.se, "within 3 SE");
    }
}

void oracle_equivalence(Outcome& o) {
    const std::vector<SpectralMeasure> measures{density_measure(DensitySpec::uniform()),
                                                density_measure(DensitySpec::box(pi / 2)),
                                                density_measure(DensitySpec::poisson(0.5))};
    std::size_t mismatches = 0, trials = 0;
    double identity = 0.0;
    for (const auto& mu : measures) {
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const std::size_t n = 1 + seed % 32;
            const auto s = sample_coefficients(mu, n, 900000 + seed, 0);
            ++trials;
            if (count_zeros(s).count != companion_oracle(s).count) ++mismatches;
            identity = std::max(identity, algebraic_identity_error(s));
        }
    }
    o.detail << trials << " polynomials, " << mismatches << " count mismatches, max identity error " << identity;
    o.require(mismatches == 0, "counts agree exactly");
    o.require(identity < 1e-9, "identity to 1e-9");
}

// Random finite mixtures of atoms plus the built-in measures.
SpectralMeasure random_measure(std::mt19937_64& gen, int trial) {
    switch (trial % 5) {
        case 0: return density_measure(DensitySpec::uniform());
        case 1: return SpectralMeasure::constant_corr(0.3);
        case 2: return density_measure(DensitySpec::poisson(0.5));
        default: break;
    }
    std::uniform_real_distribution<double> angle(0.0, pi), weight(0.1, 1.0);
    std::vector<Atom> atoms(4);
    double total = 0.0;
    for (auto& a : atoms) {
        a.alpha = angle(gen);
        a.weight = weight(gen);
        total += a.weight;
    }
    for (auto& a : atoms) a.weight /= total;
    atoms.back().weight = 1.0;
    for (std::size_t i = 0; i + 1 < atoms.size(); ++i) atoms.back().weight -= atoms[i].weight;
    return SpectralMeasure(std::move(atoms), std::nullopt);
}

void two_point_identity(Outcome& o) {
    std::mt19937_64 gen(777);
    std::uniform_real_distribution<double> u(0.0, two_pi);
    double worst_polarized = 0.0, worst_lagsum = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto mu = random_measure(gen, trial);
        const std::size_t n = 1 + static_cast<std::size_t>(gen() % 64);
        const double x = u(gen), y = u(gen);
        const auto rho = correlation_of(mu, n);
        const double brute = two_point_cov_bruteforce(rho, n, x, y);
        worst_polarized = std::max(worst_polarized, std::abs(two_point_cov_polarized(mu, n, x, y, 1e-13) - brute));
        worst_lagsum = std::max(worst_lagsum, std::abs(two_point_cov_lagsum(rho, n, x, y) - brute));
    }
    o.detail << "1000 triples, max |polarized - double sum| " << worst_polarized << ", max |lag sum - double sum| "
             << worst_lagsum;
    o.require(worst_polarized < 1e-10, "polarized kernel form");
    o.require(worst_lagsum < 1e-10, "lag sum form");
}

void kernel_invariants(Outcome& o) {
    double worst_bound = 0.0;
    std::size_t violations = 0;
    for (std::size_t n : {8u, 64u, 512u}) {
        const auto kc = KernelCoefficients::make(n);
        o.require(kc.fejer[0] == 1.0, "Fejer mass");
        o.require(std::abs(kc.alpha * kc.ln_scaled[0] - 1.0) < 1e-15, "normalized L mass");
        const double nn = static_cast<double>(n);
        for (int i = 0; i < 4096; ++i) {
            const double x = -pi + two_pi * (i + 0.5) / 4096.0;
            const double k = fejer_eval(n, x);
            const double l = ln_eval(n, x);
            if (k < 0.0 || l < 0.0) ++violations;
            if (std::abs(k - fejer_eval(n, -x)) > 1e-9 || std::abs(l - ln_eval(n, -x)) > 1e-9) ++violations;
            if (k > nn * (1 + 1e-12) || l > nn * (1 + 1e-12)) ++violations;
            if (k > pi * pi / (nn * x * x) * (1 + 1e-12)) ++violations;
            worst_bound = std::max(worst_bound, k * nn * x * x);
        }
    }
    std::size_t lower_violations = 0;
    const std::vector<SpectralMeasure> measures{density_measure(DensitySpec::box(pi / 2)),
                                                density_measure(DensitySpec::poisson(0.9)),
                                                SpectralMeasure::atomic(std::sqrt(2.0)),
                                                SpectralMeasure::constant_corr(0.3)};
    for (const auto& mu : measures) {
        for (std::size_t n : {8u, 64u, 512u}) {
            const auto rho = correlation_of(mu, n);
            const auto p = convolution_profile(rho, n, default_grid_size(n));
            const double rn = rho[static_cast<long long>(n)];
            for (std::size_t i = 0; i < p.m; ++i) {
                const double bound = (1.0 - rn * std::cos(static_cast<double>(n) * p.x(i))) / (2.0 * n);
                if (p.s0[i] < bound - 1e-9) ++lower_violations;
            }
        }
    }
    o.detail << "bound violations " << violations << ", max n x^2 K_n(x) " << worst_bound
             << " (C = pi^2), s0 lower-bound violations " << lower_violations;
    o.require(violations == 0, "pointwise kernel bounds");
    o.require(lower_violations == 0, "s0 lower bound");
}

void integrand_limits(Outcome& o) {
    const std::size_t n = 4096;
    const auto rho = correlation_of(density_measure(DensitySpec::box(pi / 2)), n);
    const double at_pi = integrand_at(rho, n, pi), at_half = integrand_at(rho, n, 0.5);
    o.detail << "integrand(pi) " << at_pi << " integrand(0.5) " << at_half;
    o.require(std::abs(at_pi - 1 / std::sqrt(2.0)) < 0.02, "outside support -> 1/sqrt2");
    o.require(std::abs(at_half - 1 / std::sqrt(3.0)) < 0.02, "inside support -> 1/sqrt3");
}

void cf_convergence(Outcome& o) {
    const auto t = default_t_grid();
    const auto box = DensitySpec::box(pi / 2);
    const auto mu = density_measure(box);
    const auto lim = limit_cf(box, t);
    const double d256 = cf_distance(empirical_cf(sample_coefficients(mu, 256, 4242, 0), t), lim);
    const double d4096 = cf_distance(empirical_cf(sample_coefficients(mu, 4096, 4242, 0), t), lim);
    o.detail << "box D(256) " << d256 << " D(4096) " << d4096 << ";";
    o.require(d4096 < d256, "empirical D(4096) < D(256)");
    const std::vector<SpectralMeasure> measures{
        density_measure(DensitySpec::uniform()),       density_measure(DensitySpec::box(pi / 4)),
        density_measure(DensitySpec::box(pi / 2)),     density_measure(DensitySpec::box(3 * pi / 4)),
        density_measure(DensitySpec::annulus(0.5, 1.5)), density_measure(DensitySpec::poisson(0.5)),
        density_measure(DensitySpec::poisson(0.9)),    SpectralMeasure::constant_corr(0.3),
        density_measure(DensitySpec::raised_cosine_squared())};
    for (const auto& m : measures) {
        const auto l = limit_cf(*m.density(), t);
        const double c256 = cf_distance(conditional_cf(correlation_of(m, 256), 256, t), l);
        const double c4096 = cf_distance(conditional_cf(correlation_of(m, 4096), 4096, t), l);
        o.detail << " " << m.describe() << " " << c256 << " -> " << c4096 << ";";
        // the independent case is exact at every n, up to the quadrature tolerance of the limit curve
        const bool exact = c256 < 10 * limit_cf_tolerance && c4096 < 10 * limit_cf_tolerance;
        o.require(exact || c4096 < c256, "conditional distance decreases for " + m.describe());
    }
}

void localized_covariance(Outcome& o) {
    const auto mu = density_measure(DensitySpec::poisson(0.5));
    const auto rho256 = correlation_of(mu, 256), rho4096 = correlation_of(mu, 4096);
    const std::vector<std::pair<std::vector<double>, std::vector<double>>> configs{
        {{0.0, 1.0}, {1.0, -1.0}}, {{0.0, 2.0, 4.0}, {1.0, 1.0, 1.0}}, {{0.5, 3.0}, {2.0, 1.0}}};
    for (const auto& [tp, lam] : configs) {
        const double g256 = *localized_variance(rho256, mu, 256, 1.0, tp, lam).relative_gap();
        const double g4096 = *localized_variance(rho4096, mu, 4096, 1.0, tp, lam).relative_gap();
        o.detail << " gap " << g256 << " -> " << g4096 << ";";
        o.require(g4096 < 0.05, "relative gap < 0.05 at 4096");
        o.require(g4096 < g256, "gap shrinks");
    }
}

void almost_sure_surrogate(Outcome& o) {
    const auto mu = density_measure(DensitySpec::poisson(0.5));
    const double target = 2.0 / std::sqrt(3.0);
    std::vector<double> p95;
    for (std::size_t n : {256u, 4096u}) {
        const auto st = zero_statistics(mu, n, 100, 31337);
        std::vector<double> dev;
        for (const auto& r : st.rows) dev.push_back(std::abs(r.ratio - target));
        p95.push_back(percentile95(dev));
    }
    o.detail << "95th percentile |N/n - 2/sqrt3|: " << p95[0] << " (256) -> " << p95[1] << " (4096);";
    o.require(p95[1] < p95[0], "spread shrinks");
    const bool poisson_ok = hypothesis_report(DensitySpec::poisson(0.5), 0.5, 0.5).applies(LimitLaw::as_universal);
    const bool box_denied = !hypothesis_report(DensitySpec::box(pi / 2), 0.5, 0.5).applies(LimitLaw::as_universal);
    o.detail << " hypothesis check poisson " << (poisson_ok ? "applies" : "denied") << ", box "
             << (box_denied ? "denied" : "applies");
    o.require(poisson_ok, "poisson satisfies the regularity hypotheses");
    o.require(box_denied, "box fails the regularity hypotheses");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"independent-case exactness", independent_exactness},
        {"non-universal limit, box densities", non_universal_limit_check},
        {"universal limit, positive density", universal_limit_check},
        {"atomic non-convergence", atomic_nonconvergence},
        {"Monte Carlo agreement", monte_carlo_agreement},
        {"companion oracle equivalence", oracle_equivalence},
        {"two-point identity", two_point_identity},
        {"kernel invariants", kernel_invariants},
        {"integrand pointwise limits", integrand_limits},
        {"characteristic function convergence", cf_convergence},
        {"localized sinc covariance", localized_covariance},
        {"finite-n spread surrogate", almost_sure_surrogate},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::printf("%s criterion %zu: %s (%.1fs) %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    secs, o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

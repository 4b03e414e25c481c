#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pspin/rng.hpp"
#include "pspin/spectra.hpp"

using namespace pspin;

TEST_CASE("goe_sample is exactly symmetric with the stated entry variances") {
    const Eigen::MatrixXd m = goe_sample(40, 123);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);

    // moment check at n = 4 over many draws
    const int n = 4, draws = 100000;
    double diag_sq = 0.0, off_sq = 0.0;
    for (int d = 0; d < draws; ++d) {
        const Eigen::MatrixXd g = goe_sample(n, derive_seed(99, "goe-var", d));
        for (int i = 0; i < n; ++i) diag_sq += g(i, i) * g(i, i);
        off_sq += g(0, 1) * g(0, 1);
    }
    diag_sq /= draws * n;
    off_sq /= draws;
    CHECK(diag_sq == doctest::Approx(2.0 / n).epsilon(0.03));
    CHECK(off_sq == doctest::Approx(1.0 / n).epsilon(0.05));
}

TEST_CASE("large GOE spectrum is W1-close to the standard semicircle") {
    const SpectralMeasure spec = spectrum_of(goe_sample(1000, 2024));
    CHECK(w1_distance(spec, standard_semicircle()) <= 0.05);
}

TEST_CASE("average smallest GOE eigenvalue sits at the left edge") {
    double acc = 0.0;
    const int draws = 20;
    for (int d = 0; d < draws; ++d)
        acc += spectrum_of(goe_sample(500, derive_seed(7, "lmin", d))).min();
    CHECK(std::abs(acc / draws + 2.0) <= 0.15);
}

TEST_CASE("semicircle cdf: symmetry, support, quadrature cross-check") {
    const SemicircleParams p{1.3, 2.7};
    CHECK(semicircle_cdf(p, p.center) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(semicircle_cdf(p, p.center - p.radius) == 0.0);
    CHECK(semicircle_cdf(p, p.center + p.radius) == 1.0);
    const double x = p.center + 0.5 * p.radius;
    const double quad = oracles::adaptive_simpson(
        [&](double t) { return semicircle_density(p, t); }, p.center - p.radius, x, 1e-13);
    CHECK(semicircle_cdf(p, x) == doctest::Approx(quad).epsilon(1e-10));
}

TEST_CASE("semicircle cdf antiderivative and partial mean match quadrature") {
    const SemicircleParams p{-0.4, 1.9};
    const double b = p.center + 0.7 * p.radius;
    const double anti = oracles::adaptive_simpson(
        [&](double t) { return semicircle_cdf(p, t); }, p.center - p.radius, b, 1e-13);
    CHECK(semicircle_cdf_integral(p, b) == doctest::Approx(anti).epsilon(1e-10));
    const double mean = oracles::adaptive_simpson(
        [&](double t) { return t * semicircle_density(p, t); }, p.center - 0.8 * p.radius,
        p.center + 0.3 * p.radius, 1e-13);
    CHECK(semicircle_partial_mean(p, p.center - 0.8 * p.radius, p.center + 0.3 * p.radius) ==
          doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("w1 basics: identity and translated atoms") {
    const SpectralMeasure mu = SpectralMeasure::from_unsorted({0.3, -1.0, 2.0});
    CHECK(w1_distance(mu, mu) == 0.0);
    const SpectralMeasure a0 = SpectralMeasure::from_unsorted({0.0});
    const SpectralMeasure a3 = SpectralMeasure::from_unsorted({3.0});
    CHECK(w1_distance(a0, a3) == doctest::Approx(3.0).epsilon(1e-15));
    const SpectralMeasure am = SpectralMeasure::from_unsorted({-2.5});
    CHECK(w1_distance(a0, am) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("w1 between unequal-size measures matches a fine CDF Riemann oracle") {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> xs(100), ys(150);
    for (auto& v : xs) v = dist(gen);
    for (auto& v : ys) v = 0.3 + 1.2 * dist(gen);
    const SpectralMeasure a = SpectralMeasure::from_unsorted(xs);
    const SpectralMeasure b = SpectralMeasure::from_unsorted(ys);

    const auto cdf = [](const SpectralMeasure& m, double t) {
        std::size_t k = 0;
        while (k < m.eigs.size() && m.eigs[k] <= t) ++k;
        return static_cast<double>(k) / m.eigs.size();
    };
    const double lo = std::min(a.min(), b.min()) - 0.1;
    const double hi = std::max(a.max(), b.max()) + 0.1;
    double riemann = 0.0;
    const int steps = 400000;
    for (int i = 0; i < steps; ++i) {
        const double t = lo + (hi - lo) * (i + 0.5) / steps;
        riemann += std::abs(cdf(a, t) - cdf(b, t));
    }
    riemann *= (hi - lo) / steps;
    CHECK(w1_distance(a, b) == doctest::Approx(riemann).epsilon(1e-3));
}

TEST_CASE("w1 against a semicircle via its quantile discretization") {
    const SemicircleParams p{0.0, 2.0};
    const int m = 10000;
    std::vector<double> atoms(m);
    for (int i = 0; i < m; ++i) atoms[i] = semicircle_quantile(p, (i + 0.5) / m);
    const SpectralMeasure mu = SpectralMeasure::from_unsorted(atoms);
    double max_gap = std::max(atoms.front() - (p.center - p.radius),
                              (p.center + p.radius) - atoms.back());
    for (int i = 0; i + 1 < m; ++i) max_gap = std::max(max_gap, atoms[i + 1] - atoms[i]);
    CHECK(w1_distance(mu, p) <= 2.0 * max_gap);

    // equal-size sorted-assignment oracle on 100 atoms
    std::vector<double> q1(100), q2(100);
    std::mt19937_64 gen(17);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        q1[i] = dist(gen);
        q2[i] = dist(gen) * 0.7 - 0.2;
    }
    std::sort(q1.begin(), q1.end());
    std::sort(q2.begin(), q2.end());
    double transport = 0.0;
    for (int i = 0; i < 100; ++i) transport += std::abs(q1[i] - q2[i]);
    transport /= 100.0;
    CHECK(w1_distance(SpectralMeasure{q1}, SpectralMeasure{q2}) ==
          doctest::Approx(transport).epsilon(1e-12));
}

TEST_CASE("bl lower bound: identity, sandwich, separated atoms") {
    const std::vector<double> grid = [] {
        std::vector<double> g;
        for (double t = -6.0; t <= 6.0; t += 0.1) g.push_back(t);
        return g;
    }();

    const SpectralMeasure mu = SpectralMeasure::from_unsorted({-1.0, 0.5, 2.0});
    CHECK(bl_lower_bound(mu, mu, grid) == 0.0);

    std::mt19937_64 gen(23);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> xs(20), ys(30);
        for (auto& v : xs) v = dist(gen);
        for (auto& v : ys) v = 0.4 * dist(gen) + 0.2 * rep / 50.0;
        const SpectralMeasure a = SpectralMeasure::from_unsorted(xs);
        const SpectralMeasure b = SpectralMeasure::from_unsorted(ys);
        CHECK(bl_lower_bound(a, b, grid) <= w1_distance(a, b) + 1e-12);
    }
    // semicircle comparators obey the same ordering
    const SemicircleParams sc{0.3, 1.7};
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> xs(25);
        for (auto& v : xs) v = sc.center + 0.8 * dist(gen);
        const SpectralMeasure a = SpectralMeasure::from_unsorted(xs);
        CHECK(bl_lower_bound(a, sc, grid) <= w1_distance(a, sc) + 1e-12);
    }

    const SpectralMeasure a0 = SpectralMeasure::from_unsorted({0.0});
    const SpectralMeasure a3 = SpectralMeasure::from_unsorted({3.0});
    CHECK(bl_lower_bound(a0, a3, grid) >= 1.0 - 0.1);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "pspin/errors.hpp"
#include "pspin/hamiltonian.hpp"
#include "pspin/rng.hpp"

using namespace pspin;

namespace {

// Direct nested-loop evaluation of the large-sphere Hamiltonian at an
// arbitrary ambient point; the oracle path for the rescaling identity.
double big_sphere_hamiltonian(const CouplingTensor& t, const Eigen::VectorXd& x) {
    const int n = t.n;
    double total = 0.0;
    for (const auto& [p, data] : t.degrees) {
        double contraction = 0.0;
        std::vector<int> idx(p, 0);
        const auto advance = [&] {
            for (int k = p - 1; k >= 0; --k) {
                if (++idx[k] < n) return true;
                idx[k] = 0;
            }
            return false;
        };
        std::size_t flat = 0;
        do {
            double prod = data(flat);
            for (int k = 0; k < p; ++k) prod *= x(idx[k]);
            contraction += prod;
            ++flat;
        } while (advance());
        total += std::sqrt(t.spec.gamma_sq_at(p)) * std::pow(n, -(p - 1.0) / 2.0) * contraction;
    }
    return total;
}

}  // namespace

TEST_CASE("sampling is deterministic in (spec, n, seed)") {
    const MixtureSpec spec = MixtureSpec::pure(3);
    const CouplingTensor a = sample_couplings(spec, 64, 7);
    const CouplingTensor b = sample_couplings(spec, 64, 7);
    CHECK(a.entries(3) == b.entries(3));
    const CouplingTensor c = sample_couplings(spec, 64, 8);
    CHECK(a.entries(3) != c.entries(3));
}

TEST_CASE("entry sample mean over 1e6 draws is near zero") {
    const CouplingTensor t = sample_couplings(MixtureSpec::pure(3), 100, 42);
    REQUIRE(t.entries(3).size() == 1000000);
    CHECK(std::abs(t.entries(3).mean()) <= 0.005);
    // unit variance as a sanity companion
    CHECK(t.entries(3).squaredNorm() / t.entries(3).size() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("memory cap rejects oversized tensors with the offending degree") {
    CHECK_THROWS_WITH_AS(sample_couplings(MixtureSpec::pure(3), 2000, 1),
                         doctest::Contains("degree 3"), MemoryCapExceeded);
    CHECK_NOTHROW(sample_couplings(MixtureSpec::pure(3), 64, 1));
}

TEST_CASE("h_eval on a diagonal degree-2 array contracts to gamma_2") {
    const int n = 12;
    const MixtureSpec spec = MixtureSpec::from_pairs({{2, 0.49}});
    CouplingTensor t;
    t.spec = spec;
    t.n = n;
    t.seed = 0;
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n * n);
    for (int i = 0; i < n; ++i) diag(i * n + i) = 1.0;
    t.degrees.emplace_back(2, diag);

    const SpherePoint s = SpherePoint::random(n, 3);
    // <J, sigma x sigma> = |sigma|^2 = 1, so h = gamma_2 = 0.7; the two-step
    // route H(sqrt(n) sigma)/sqrt(n) gives the same number
    CHECK(h_eval(t, s) == doctest::Approx(0.7).epsilon(1e-12));
    const double two_step =
        big_sphere_hamiltonian(t, std::sqrt(static_cast<double>(n)) * s.coords) / std::sqrt(n);
    CHECK(h_eval(t, s) == doctest::Approx(two_step).epsilon(1e-12));
}

TEST_CASE("h_eval agrees with the two-step definition on random tensors") {
    for (const auto& spec : {MixtureSpec::pure(2), MixtureSpec::pure(3),
                             MixtureSpec::parse("2:0.3,3:0.2,4:0.5")}) {
        const int n = 9;
        const CouplingTensor t = sample_couplings(spec, n, 55);
        for (int rep = 0; rep < 5; ++rep) {
            const SpherePoint s = SpherePoint::random(n, 100 + rep);
            const double direct = h_eval(t, s);
            const double two_step =
                big_sphere_hamiltonian(t, std::sqrt(static_cast<double>(n)) * s.coords) /
                std::sqrt(n);
            CHECK(direct == doctest::Approx(two_step).epsilon(1e-10));
        }
    }
}

TEST_CASE("field covariance at fixed overlap matches xi") {
    const int n = 32, draws = 2000;
    const MixtureSpec spec = MixtureSpec::pure(3);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n), v = Eigen::VectorXd::Zero(n);
    u(0) = 1.0;
    v(0) = 0.3;
    v(1) = std::sqrt(1.0 - 0.09);
    const SpherePoint su{u}, sv{v};
    double sum_uv = 0.0, sum_u = 0.0, sum_v = 0.0;
    for (int d = 0; d < draws; ++d) {
        const CouplingTensor t = sample_couplings(spec, n, derive_seed(12, "cov", d));
        const double hu = h_eval(t, su), hv = h_eval(t, sv);
        sum_uv += hu * hv;
        sum_u += hu;
        sum_v += hv;
    }
    const double cov = sum_uv / draws - (sum_u / draws) * (sum_v / draws);
    CHECK(std::abs(cov - xi_eval(spec, 0.3)) <= 0.1);
}

TEST_CASE("field law at a fixed point is standard normal (KS sanity)") {
    const int n = 16, draws = 2000;
    const MixtureSpec spec = MixtureSpec::parse("2:0.4,3:0.6");
    const SpherePoint s = SpherePoint::random(n, 77);
    std::vector<double> values(draws);
    for (int d = 0; d < draws; ++d) {
        const CouplingTensor t = sample_couplings(spec, n, derive_seed(21, "ks", d));
        values[d] = h_eval(t, s);  // variance xi(1) = 1
    }
    const double ks = oracles::ks_statistic(values, oracles::normal_cdf);
    CHECK(ks < 1.358 / std::sqrt(static_cast<double>(draws)));  // 5% level
}

TEST_CASE("radial identity is exact for pure models") {
    for (int p : {3, 4}) {
        const int n = p == 3 ? 40 : 20;
        const CouplingTensor t = sample_couplings(MixtureSpec::pure(p), n, 5);
        for (int rep = 0; rep < 10; ++rep) {
            const SpherePoint s = SpherePoint::random(n, 900 + rep);
            const GradientBundle g = gradient_bundle(t, s);
            CHECK(std::abs(g.radial - p * g.value) <= 1e-10 * (1.0 + std::abs(g.value)));
        }
    }
}

TEST_CASE("mixture radial derivative decomposes degree by degree") {
    // per-degree streams depend only on (seed, p), so a pure spec with the
    // same master seed reproduces that degree's array
    const MixtureSpec mixed = MixtureSpec::parse("2:0.25,3:0.5,4:0.25");
    const int n = 14;
    const std::uint64_t seed = 1234;
    const CouplingTensor t = sample_couplings(mixed, n, seed);
    const SpherePoint s = SpherePoint::random(n, 4);
    const GradientBundle g = gradient_bundle(t, s);
    double expected = 0.0;
    for (const auto& [p, gsq] : mixed.gamma_sq) {
        const CouplingTensor tp = sample_couplings(MixtureSpec::pure(p), n, seed);
        REQUIRE(tp.entries(p) == t.entries(p));
        expected += p * std::sqrt(gsq) * h_eval(tp, s);
    }
    CHECK(g.radial == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("derivative bundle invariants and finite differences") {
    const MixtureSpec spec = MixtureSpec::parse("2:0.3,3:0.7");
    const int n = 18;
    const CouplingTensor t = sample_couplings(spec, n, 9);
    const SpherePoint s = SpherePoint::random(n, 44);
    const DerivativeBundle b = derivatives(t, s);

    CHECK(std::abs(b.tangent_grad.dot(s.coords)) <= 1e-10);
    CHECK((b.tangent_hessian - b.tangent_hessian.transpose()).cwiseAbs().maxCoeff() <= 1e-10);

    // tangent gradient vs central differences along random tangent directions
    std::mt19937_64 gen(3);
    std::normal_distribution<double> dist(0.0, 1.0);
    const double h = 1e-5;
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd dir(n);
        for (int i = 0; i < n; ++i) dir(i) = dist(gen);
        dir -= dir.dot(s.coords) * s.coords;
        dir.normalize();
        const SpherePoint plus = SpherePoint::from(s.coords + h * dir);
        const SpherePoint minus = SpherePoint::from(s.coords - h * dir);
        const double fd = (h_eval(t, plus) - h_eval(t, minus)) / (2.0 * h);
        CHECK(b.tangent_grad.dot(dir) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("gradient matches ambient finite differences at off-sphere scaling") {
    // euclidean_grad is the gradient of the multilinear extension
    const MixtureSpec spec = MixtureSpec::pure(3);
    const int n = 10;
    const CouplingTensor t = sample_couplings(spec, n, 31);
    const SpherePoint s = SpherePoint::random(n, 6);
    const GradientBundle g = gradient_bundle(t, s);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd xp = s.coords, xm = s.coords;
        xp(i) += h;
        xm(i) -= h;
        const double fd =
            (big_sphere_hamiltonian(t, std::sqrt(static_cast<double>(n)) * xp) -
             big_sphere_hamiltonian(t, std::sqrt(static_cast<double>(n)) * xm)) /
            (2.0 * h * std::sqrt(static_cast<double>(n)));
        CHECK(g.euclidean_grad(i) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("conditioned Hessian entries carry the GOE variances") {
    const MixtureSpec spec = MixtureSpec::pure(3);
    const DerivedMoments m = derive_moments(spec);
    const int n = 24, draws = 500;
    const SpherePoint s = SpherePoint::random(n, 51);
    const Eigen::MatrixXd q = tangent_basis(s);
    double diag_sq = 0.0, off_sq = 0.0;
    int off_count = 0;
    for (int d = 0; d < draws; ++d) {
        const CouplingTensor t = sample_couplings(spec, n, derive_seed(88, "goesrc", d));
        const Eigen::MatrixXd th = tangent_hessian_in_basis(t, s, q);
        const GradientBundle g = gradient_bundle(t, s);
        const Eigen::MatrixXd shifted =
            th + g.radial * Eigen::MatrixXd::Identity(n - 1, n - 1);
        for (int i = 0; i < n - 1; ++i) {
            diag_sq += shifted(i, i) * shifted(i, i);
            for (int j = i + 1; j < n - 1; ++j) {
                off_sq += shifted(i, j) * shifted(i, j);
                ++off_count;
            }
        }
    }
    diag_sq /= draws * (n - 1);
    off_sq /= off_count;
    // entries of the unnormalized conditioned Hessian have variance
    // xi''(1) * (1 + delta_ij)
    CHECK(diag_sq == doctest::Approx(2.0 * m.xipp).epsilon(0.15));
    CHECK(off_sq == doctest::Approx(m.xipp).epsilon(0.15));
}

TEST_CASE("normalized Hessian spread stays near the semicircle edge") {
    const MixtureSpec spec = MixtureSpec::pure(3);
    const DerivedMoments m = derive_moments(spec);
    const int n = 200;
    double acc = 0.0;
    for (int d = 0; d < 10; ++d) {
        const CouplingTensor t = sample_couplings(spec, n, derive_seed(3, "spread", d));
        const SpherePoint s = SpherePoint::random(n, 1000 + d);
        const DerivativeBundle b = derivatives(t, s);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
            b.tangent_hessian + b.radial * Eigen::MatrixXd::Identity(n - 1, n - 1),
            Eigen::EigenvaluesOnly);
        const double extreme = std::max(std::abs(solver.eigenvalues()(0)),
                                        std::abs(solver.eigenvalues()(n - 2)));
        acc += extreme / std::sqrt((n - 1.0) * m.xipp);
    }
    acc /= 10.0;
    CHECK(acc >= 1.8);
    CHECK(acc <= 2.3);
}

TEST_CASE("tangent_basis is a deterministic orthonormal complement") {
    const int n = 25;
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
    e1(0) = 1.0;
    const Eigen::MatrixXd q1 = tangent_basis(SpherePoint{e1});
    for (int j = 0; j < n - 1; ++j)
        for (int i = 0; i < n; ++i) CHECK(q1(i, j) == (i == j + 1 ? 1.0 : 0.0));

    const SpherePoint s = SpherePoint::random(n, 12);
    const Eigen::MatrixXd q = tangent_basis(s);
    CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff() <=
          1e-12);
    CHECK((q.transpose() * s.coords).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("tangent Hessian eigenvalues do not depend on the frame") {
    const MixtureSpec spec = MixtureSpec::parse("3:0.5,4:0.5");
    const int n = 12;
    const CouplingTensor t = sample_couplings(spec, n, 71);
    const SpherePoint s = SpherePoint::random(n, 8);

    const Eigen::MatrixXd q1 = tangent_basis(s);
    // randomized orthogonal completion via QR of [sigma | G]
    std::mt19937_64 gen(19);
    std::normal_distribution<double> dist(0.0, 1.0);
    Eigen::MatrixXd g(n, n);
    g.col(0) = s.coords;
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = dist(gen);
    const Eigen::MatrixXd qfull = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    const Eigen::MatrixXd q2 = qfull.rightCols(n - 1);
    REQUIRE((q2.transpose() * s.coords).cwiseAbs().maxCoeff() <= 1e-12);

    const auto eigs = [&](const Eigen::MatrixXd& q) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(tangent_hessian_in_basis(t, s, q),
                                                              Eigen::EigenvaluesOnly);
        return solver.eigenvalues();
    };
    const Eigen::VectorXd l1 = eigs(q1), l2 = eigs(q2);
    for (int i = 0; i < n - 1; ++i) CHECK(l1(i) == doctest::Approx(l2(i)).epsilon(1e-8));
}

TEST_CASE("dimension mismatches are rejected") {
    const CouplingTensor t = sample_couplings(MixtureSpec::pure(3), 10, 1);
    const SpherePoint s = SpherePoint::random(11, 1);
    CHECK_THROWS_AS(h_eval(t, s), DimensionMismatch);
    CHECK_THROWS_AS(gradient_bundle(t, s), DimensionMismatch);
    CHECK_THROWS_AS(derivatives(t, s), DimensionMismatch);
}

TEST_CASE("binary dump/load round trip is bit exact") {
    const MixtureSpec spec = MixtureSpec::parse("2:0.5,3:0.5");
    const CouplingTensor t = sample_couplings(spec, 11, 99);
    const auto path = std::filesystem::temp_directory_path() / "pspin_tensor_test.bin";
    save_tensor(t, path.string());
    const CouplingTensor back = load_tensor(path.string());
    CHECK(back.n == t.n);
    CHECK(back.seed == t.seed);
    CHECK(back.spec.gamma_sq == t.spec.gamma_sq);
    for (const auto& [p, data] : t.degrees) CHECK(back.entries(p) == data);
    std::filesystem::remove(path);

    CHECK_THROWS(load_tensor("/nonexistent/tensor.bin"));
}

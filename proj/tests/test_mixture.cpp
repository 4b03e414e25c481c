#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pspin/errors.hpp"
#include "pspin/mixture.hpp"

using namespace pspin;

TEST_CASE("xi_eval matches the finite sum") {
    const MixtureSpec half = MixtureSpec::from_pairs({{2, 0.5}, {3, 0.5}});
    CHECK(xi_eval(half, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(xi_eval(MixtureSpec::pure(3), 0.5) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(xi_eval(half, -1.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("xi_eval is monotone on [0,1] and has exact parity") {
    const MixtureSpec spec = MixtureSpec::from_pairs({{2, 0.3}, {3, 0.5}, {5, 0.2}});
    double prev = xi_eval(spec, 0.0);
    for (int i = 1; i <= 100; ++i) {
        const double cur = xi_eval(spec, i / 100.0);
        CHECK(cur >= prev);
        prev = cur;
    }
    for (double x : {0.1, 0.33, 0.77, 0.95}) {
        double expected = 0.0;
        for (const auto& [p, gsq] : spec.gamma_sq) expected += gsq * std::pow(-x, p);
        CHECK(xi_eval(spec, -x) == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("derive_moments on the pure p=3 model") {
    const DerivedMoments m = derive_moments(MixtureSpec::pure(3));
    CHECK(m.xi1 == 1.0);
    CHECK(m.xip == 3.0);
    CHECK(m.xipp == 6.0);
    CHECK(m.g_value == doctest::Approx(std::log(2.0) - 2.0 / 3.0).epsilon(1e-14));
    CHECK(m.klass == MixtureClass::PureLike);
    CHECK(m.is_pure);
}

TEST_CASE("derive_moments on the pure p=2 model is critical") {
    const DerivedMoments m = derive_moments(MixtureSpec::pure(2));
    CHECK(m.xip == 2.0);
    CHECK(m.xipp == 2.0);
    CHECK(m.g_value == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(m.klass == MixtureClass::Critical);
}

TEST_CASE("derive_moments classifies a 2+4 mixture as full") {
    // long-double evaluation of the classification functional as the oracle
    const long double xip = 2.0L * 0.95L + 4.0L * 0.05L;
    const long double xipp = 2.0L * 0.95L + 12.0L * 0.05L;
    const long double g_oracle =
        std::log(xipp / xip) - (xipp - xip) * (xipp - xip + xip * xip) / (xipp * xip * xip);

    const DerivedMoments m = derive_moments(MixtureSpec::from_pairs({{2, 0.95}, {4, 0.05}}));
    CHECK(m.xip == doctest::Approx(2.1).epsilon(1e-15));
    CHECK(m.xipp == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(m.g_value == doctest::Approx(static_cast<double>(g_oracle)).epsilon(1e-12));
    CHECK(m.g_value < 0.0);
    CHECK(m.klass == MixtureClass::Full);
}

TEST_CASE("pure-model moments and classification for p = 2..20") {
    for (int p = 2; p <= 20; ++p) {
        const DerivedMoments m = derive_moments(MixtureSpec::pure(p));
        CHECK(m.xip == doctest::Approx(static_cast<double>(p)).epsilon(1e-15));
        CHECK(m.xipp == doctest::Approx(p * (p - 1.0)).epsilon(1e-15));
        const double g_closed = std::log(p - 1.0) - 2.0 * (p - 2.0) / p;
        CHECK(m.g_value == doctest::Approx(g_closed).epsilon(1e-12));
        if (p >= 3) CHECK(m.klass == MixtureClass::PureLike);
    }
}

TEST_CASE("e_inf thresholds") {
    const EInfThresholds t3 = e_inf_thresholds(MixtureSpec::pure(3));
    REQUIRE(t3.pure.has_value());
    CHECK(*t3.pure == doctest::Approx(2.0 * std::sqrt(2.0 / 3.0)).epsilon(1e-15));
    CHECK(t3.primed == doctest::Approx(2.0 * std::sqrt(6.0) / 3.0).epsilon(1e-15));

    const EInfThresholds tm = e_inf_thresholds(MixtureSpec::from_pairs({{3, 0.5}, {4, 0.5}}));
    CHECK_FALSE(tm.pure.has_value());
    CHECK(tm.mixed == doctest::Approx(17.75 / 10.5).epsilon(1e-15));
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(MixtureSpec::from_pairs({{1, 1.0}}), SpecInvalid);
    CHECK_THROWS_AS(MixtureSpec::from_pairs({{3, -0.5}}), SpecInvalid);
    CHECK_THROWS_AS(MixtureSpec::from_pairs({}), SpecInvalid);
    CHECK_THROWS_AS(MixtureSpec::from_pairs({{3, 0.0}}), SpecInvalid);
    CHECK_THROWS_AS(MixtureSpec::from_pairs({{3, 0.5}, {3, 0.5}}), SpecInvalid);
    CHECK_THROWS_AS(MixtureSpec::from_pairs({{40, 1.0}}), SpecInvalid);
    CHECK_NOTHROW(MixtureSpec::from_pairs({{40, 1.0}}, 64));

    const MixtureSpec spec = MixtureSpec::from_pairs({{2, 0.5}, {3, 0.5}});
    CHECK(spec.normalized);
    CHECK_FALSE(MixtureSpec::from_pairs({{2, 0.5}}).normalized);
}

TEST_CASE("CLI string and JSON round trips") {
    const MixtureSpec spec = MixtureSpec::parse("3:0.5,4:0.5");
    CHECK(spec.gamma_sq_at(3) == 0.5);
    CHECK(spec.gamma_sq_at(4) == 0.5);
    CHECK(spec.normalized);

    const MixtureSpec back = MixtureSpec::from_json_text(spec.to_json_text());
    CHECK(back.gamma_sq == spec.gamma_sq);

    CHECK_THROWS_AS(MixtureSpec::parse("3=0.5"), SpecInvalid);
    CHECK_THROWS_AS(MixtureSpec::from_json_text("{\"beta3\":1.0}"), SpecInvalid);
}

TEST_CASE("second moment dominates the first for every valid spec") {
    // p(p-1) >= p for p >= 2, with equality only at p = 2
    for (const auto& spec :
         {MixtureSpec::pure(2), MixtureSpec::pure(7), MixtureSpec::parse("2:0.2,3:0.3,6:0.5"),
          MixtureSpec::parse("2:0.9999,12:0.0001")}) {
        const DerivedMoments m = derive_moments(spec);
        CHECK(m.xipp >= m.xip);
    }
}

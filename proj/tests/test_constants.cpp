#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fde/constants.hpp"
#include "fde/error.hpp"

using namespace fde;
using doctest::Approx;

TEST_CASE("classify covers the three regimes") {
    CHECK(classify(3, 0.1) == Regime::FastSubcritical);
    CHECK(classify(3, 0.2) == Regime::YamabeCritical);
    CHECK(classify(3, 0.5) == Regime::Invalid);
    CHECK(classify(5, 0.5) == Regime::FastSubcritical);
    CHECK(classify(2, 0.1) == Regime::Invalid);
    CHECK(classify(3, 0.0) == Regime::Invalid);
    CHECK(classify(3, 1.0 / 3.0) == Regime::Invalid);
    CHECK(classify(3, std::nan("")) == Regime::Invalid);
}

TEST_CASE("classify is stable inside the Yamabe window") {
    for (int n : {3, 4, 5, 6, 10}) {
        const double my = yamabe_exponent(n);
        CHECK(classify(n, my + 0.4 * kYamabeTolerance) == Regime::YamabeCritical);
        CHECK(classify(n, my - 0.4 * kYamabeTolerance) == Regime::YamabeCritical);
        CHECK(classify(n, my + 1e-6) == Regime::FastSubcritical);
    }
}

TEST_CASE("validate rejects bad parameters with InvalidRegime") {
    auto code_of = [](const ProblemParams& p) {
        try {
            p.validate();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoError;  // sentinel: no throw
    };
    CHECK(code_of({3, 0.5, 1.0, 1.0}) == ErrorCode::InvalidRegime);
    CHECK(code_of({3, 0.1, -1.0, 1.0}) == ErrorCode::InvalidRegime);
    CHECK(code_of({3, 0.1, 1.0, 0.0}) == ErrorCode::InvalidRegime);
    CHECK_NOTHROW(ProblemParams({3, 0.2, 1.0, 1.0}).validate());
}

TEST_CASE("closed-form constants at n = 3, m = 0.1") {
    const auto c = derive_constants({3, 0.1, 1.0, 1.0});
    CHECK(c.c1 == Approx(2.8 / 0.9).epsilon(1e-14));
    CHECK(c.c1 == Approx(3.1111111).epsilon(1e-7));
    CHECK(c.kappa == Approx(0.5 / 1.4).epsilon(1e-14));
    CHECK(c.kappa == Approx(0.3571429).epsilon(1e-7));
    CHECK(c.kappa_sq == Approx(0.25 / 1.96).epsilon(1e-14));
    CHECK(c.b0 == Approx(1.4 / 0.81).epsilon(1e-14));
    CHECK(c.b0 == Approx(1.7283951).epsilon(1e-7));
    CHECK(c.a2 == Approx(1.1111111).epsilon(1e-7));
    CHECK(c.a3 == Approx(0.6172840).epsilon(1e-6));
    CHECK_FALSE(c.K.has_value());
    CHECK_FALSE(c.K0.has_value());
    CHECK_FALSE(c.a1.has_value());
    CHECK_FALSE(c.a0.has_value());
}

TEST_CASE("closed-form constants at n = 5, m = 0.5 change sign with the Yamabe gap") {
    const auto c = derive_constants({5, 0.5, 1.0, 1.0});
    CHECK(c.c1 == Approx(8.0).epsilon(1e-14));
    CHECK(c.kappa == Approx(-0.5).epsilon(1e-14));
    CHECK(c.a2 < 0.0);
}

TEST_CASE("Yamabe exponent: b0, a2, a3 and kappa vanish") {
    for (int n : {3, 5, 6}) {
        const auto c = derive_constants({n, yamabe_exponent(n), 2.0, 1.0});
        CHECK(c.kappa == 0.0);
        CHECK(c.b0 == 0.0);
        CHECK(c.a2 == 0.0);
        CHECK(c.a3 == 0.0);
        CHECK(c.c1 > 0.0);
    }
}

TEST_CASE("beta scaling of the constants") {
    const auto c1 = derive_constants({4, 0.2, 1.0, 1.0});
    const auto c3 = derive_constants({4, 0.2, 3.0, 1.0});
    CHECK(c3.c1 == c1.c1);  // c1 carries no beta; the limit is c1/beta
    CHECK(c3.a2 == Approx(c1.a2 / 3.0).epsilon(1e-14));
    CHECK(c3.b0 == Approx(c1.b0 / 3.0).epsilon(1e-14));
    CHECK(c3.a3 == Approx(c1.a3 / 3.0).epsilon(1e-14));
}

TEST_CASE("a1_of values and affinity in K") {
    CHECK(a1_of(0.0, {3, 0.1, 1.0, 1.0}) == Approx(2.24 / 0.81 + 0.5 / 0.81).epsilon(1e-14));
    CHECK(a1_of(0.0, {3, 0.1, 1.0, 1.0}) == Approx(3.3827160).epsilon(1e-7));
    CHECK(a1_of(0.0, {5, 0.5, 1.0, 1.0}) == Approx(4.0).epsilon(1e-14));
    const ProblemParams p{4, 0.3, 2.5, 1.0};
    const double slope = p.yamabe_gap() / (1.0 - p.m) * p.beta;
    for (double K : {-3.0, 0.7, 11.0})
        CHECK(a1_of(K, p) - a1_of(0.0, p) == Approx(slope * K).epsilon(1e-12));
}

TEST_CASE("a0_of") {
    CHECK(a0_of(0.0, 3, 0.1) == Approx(0.25 / 1.96).epsilon(1e-14));
    CHECK(a0_of(0.0, 3, 0.1) == Approx(0.1275510).epsilon(1e-6));
    // Second term alone at the Yamabe exponent.
    const double m = yamabe_exponent(3);
    const double d = 3 - 2 - 3 * m;
    CHECK(a0_of(1.0, 3, m) == Approx(-(1 - m) * (1 - m) / (4 * 2 * d * d)).epsilon(1e-14));
}

TEST_CASE("K_closed_form and its inverse") {
    CHECK(K_closed_form(1.0, std::exp(2.0), 0.0, 3, 0.1) == Approx(2.8 / (0.9 * std::exp(2.0))).epsilon(1e-14));
    CHECK(K_closed_form(1.0, std::exp(2.0), 0.0, 3, 0.1) == Approx(0.4211).epsilon(1e-4));
    // (1,1): K = 2(n-1)(n-2-nm) K0 / (1-m).
    CHECK(K_closed_form(1.0, 1.0, 0.3, 3, 0.1) == Approx(2 * 2 * 0.7 * 0.3 / 0.9).epsilon(1e-14));
    for (double lambda : {0.5, 1.0, 3.0})
        for (double beta : {0.25, 1.0, 4.0}) {
            const double K = K_closed_form(lambda, beta, -0.4, 5, 0.5);
            CHECK(K0_from_K(K, lambda, beta, 5, 0.5) == Approx(-0.4).epsilon(1e-13));
        }
    // Affine in log lambda with slope (c1/beta)(1-m)/2.
    const double beta = 2.0;
    const double c1 = derive_constants({3, 0.1, beta, 1.0}).c1;
    CHECK(K_closed_form(5.0, beta, 0.2, 3, 0.1) - K_closed_form(1.0, beta, 0.2, 3, 0.1) ==
          Approx(c1 / beta * 0.45 * std::log(5.0)).epsilon(1e-13));
}

TEST_CASE("lambda1_of and the matching identity") {
    CHECK(lambda1_of(0.3, 0.3, 1.0, 0.1) == Approx(1.0).epsilon(1e-15));
    CHECK(lambda1_of(0.45, 0.0, 1.0, 0.1) == Approx(std::numbers::e).epsilon(1e-14));
    CHECK(lambda1_of(1.2, 0.75, 1.0, 0.1) == Approx(std::numbers::e).epsilon(1e-14));
    for (double K1 : {-1.0, 0.2, 2.0})
        for (double K0 : {-0.5, 0.7})
            for (double beta : {0.5, 3.0})
                for (double m : {0.05, 0.4}) {
                    const double l1 = lambda1_of(K1, K0, beta, m);
                    CHECK(0.5 * (1 - m) * std::log(l1) + 0.5 * std::log(beta) + K0 == Approx(K1).epsilon(1e-13));
                }
}

TEST_CASE("lambda1_alternative differs from the adopted amplitude") {
    const double K0 = 0.7152443;
    CHECK(lambda1_alternative(K0, K0, 1.0, 0.1) == Approx(std::exp(2.0 / 0.9)).epsilon(1e-14));
    CHECK(lambda1_of(K0, K0, 1.0, 0.1) == Approx(1.0));
}

TEST_CASE("resolve_constants fills the K-dependent fields") {
    const ProblemParams p{3, 0.1, 2.0, 1.5};
    auto c = derive_constants(p);
    const double K0 = 0.7;
    const double K = K_closed_form(p.lambda, p.beta, K0, p.n, p.m);
    resolve_constants(c, p, K, K0);
    REQUIRE(c.K.has_value());
    CHECK(*c.K == K);
    CHECK(*c.K0 == K0);
    CHECK(*c.a1 == Approx(a1_of(K, p)));
    const ProblemParams p11{3, 0.1, 1.0, 1.0};
    CHECK(*c.a0 == Approx(a0_of(a1_of(K_closed_form(1, 1, K0, 3, 0.1), p11), 3, 0.1)));
}

TEST_CASE("unit sphere area") {
    CHECK(unit_sphere_area(3) == Approx(4 * std::numbers::pi).epsilon(1e-14));
    CHECK(unit_sphere_area(4) == Approx(2 * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
    CHECK(unit_sphere_area(5) == Approx(8 * std::numbers::pi * std::numbers::pi / 3).epsilon(1e-14));
}

TEST_CASE("derive_constants rejects the invalid regime") {
    CHECK_THROWS_AS(derive_constants({3, 0.5, 1.0, 1.0}), Error);
}

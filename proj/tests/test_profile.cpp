#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fde/checks.hpp"
#include "fde/constants.hpp"
#include "fde/error.hpp"
#include "fde/profile.hpp"

using namespace fde;
using doctest::Approx;

namespace {

ProfileOptions opts(double s_end, double tol = 1e-10) {
    ProfileOptions o;
    o.s_end = s_end;
    o.tol = tol;
    return o;
}

// Residual of (n-1)/m Lap(v^m) + 2 beta/(1-m) v + beta r v_r = 0, by central
// differences of v_at, relative to the sum of the term magnitudes.
double radial_residual(const Profile& prof, double r) {
    const auto& p = prof.params();
    const double h = 1e-3 * r;
    auto vm = [&](double x) { return std::pow(prof.v_at(x), p.m); };
    const double f0 = vm(r), fp = vm(r + h), fm = vm(r - h);
    const double f_rr = (fp - 2 * f0 + fm) / (h * h);
    const double f_r = (fp - fm) / (2 * h);
    const double v = prof.v_at(r);
    const double v_r = (prof.v_at(r + h) - prof.v_at(r - h)) / (2 * h);
    const double lap = (p.n - 1.0) / p.m * (f_rr + (p.n - 1.0) / r * f_r);
    const double src = 2 * p.beta / (1 - p.m) * v;
    const double adv = p.beta * r * v_r;
    return std::abs(lap + src + adv) / (std::abs(lap) + std::abs(src) + std::abs(adv));
}

}  // namespace

TEST_CASE("origin series coefficient") {
    const auto s = OriginSeries::of({3, 0.1, 1.0, 1.0});
    CHECK(s.c2 == Approx(-1.0 / (3 * 2 * 0.9)).epsilon(1e-14));
    CHECK(s.c2 == Approx(-0.1851852).epsilon(1e-6));
    // Homogeneity c2(lambda, beta) = beta lambda^(2-m) c2(1,1).
    const auto t = OriginSeries::of({3, 0.1, 2.5, 1.7});
    CHECK(t.c2 == Approx(2.5 * std::pow(1.7, 1.9) * s.c2).epsilon(1e-13));
    const auto v0 = series_origin({3, 0.1, 1.0, 2.0}, 0.0);
    CHECK(v0.v == 2.0);
    CHECK(v0.v_r == 0.0);
}

TEST_CASE("origin series satisfies the radial equation to O(r0^2)") {
    const ProblemParams p{3, 0.1, 1.0, 1.0};
    const auto s = OriginSeries::of(p);
    // v = lambda + c2 r^2 exactly: the residual of the radial equation is
    // then a polynomial in r^2 whose constant term must vanish.
    auto residual = [&](double r) {
        const double v = s.lambda + s.c2 * r * r;
        const double v_r = 2 * s.c2 * r, v_rr = 2 * s.c2;
        const double m = p.m;
        const double f_r = m * std::pow(v, m - 1) * v_r;
        const double f_rr = m * (m - 1) * std::pow(v, m - 2) * v_r * v_r + m * std::pow(v, m - 1) * v_rr;
        return (p.n - 1) / m * (f_rr + (p.n - 1) / r * f_r) + 2 * p.beta / (1 - m) * v + p.beta * r * v_r;
    };
    const double r1 = residual(1e-4), r2 = residual(2e-4);
    CHECK(std::abs(r1) < 1e-6);
    CHECK(r2 / r1 == Approx(4.0).epsilon(1e-3));
}

TEST_CASE("series window is enforced") {
    CHECK_THROWS_AS(series_origin({3, 0.1, 1.0, 1.0}, 0.1), Error);
    CHECK_NOTHROW(series_origin({3, 0.1, 1.0, 1.0}, 1e-4));
}

TEST_CASE("left boundary matches the series through the change of variables") {
    const ProblemParams p{3, 0.1, 2.0, 1.5};
    const auto prof = integrate_profile(p, opts(10.0));
    const double s0 = prof.s_min();
    const double r0 = std::exp(s0);
    const auto ser = series_origin(p, r0);
    const double w0 = std::exp(2 * s0) * std::pow(ser.v, 1 - p.m);
    CHECK(prof.w()[0] == Approx(w0).epsilon(1e-14));
    CHECK(prof.ws()[0] == Approx(w0 * (2 + (1 - p.m) * r0 * ser.v_r / ser.v)).epsilon(1e-14));
}

TEST_CASE("profile at n = 3, m = 0.1 reaches the far-field slope") {
    const ProblemParams p{3, 0.1, 1.0, 1.0};
    const auto prof = integrate_profile(p, opts(1000.0));
    const double target = derive_constants(p).c1 / p.beta;
    CHECK(std::abs(prof.ws().back() - target) / target <= 1e-2);
    CHECK(prof.s_max() == 1000.0);
    for (double w : prof.w()) REQUIRE(w > 0.0);

    // |w/s - c1/beta| decreases along the tail.
    double prev = INFINITY;
    for (double s : {30.0, 100.0, 300.0, 1000.0}) {
        const double d = std::abs(prof.w_at(s).w / s - target);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("profile satisfies the radial equation (independent difference oracle)") {
    for (auto [n, m] : {std::pair{3, 0.1}, std::pair{5, 0.5}, std::pair{3, 0.2}}) {
        const auto prof = integrate_profile({n, m, 1.3, 0.8}, opts(20.0));
        double worst = 0.0;
        for (double r : {0.05, 0.3, 1.0, 3.0, 10.0, 100.0, 1e4}) worst = std::max(worst, radial_residual(prof, r));
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("profile residual on the stored grid is below 1e-8") {
    SuiteOptions o;
    for (auto [n, m] : {std::pair{3, 0.1}, std::pair{5, 0.5}}) {
        for (const auto& e : check_profile_invariants(n, m, o)) {
            INFO(e.name << ": " << e.detail);
            CHECK(e.pass);
        }
    }
}

TEST_CASE("node queries are exact") {
    const auto prof = integrate_profile({3, 0.1, 1.0, 1.0}, opts(50.0));
    for (std::size_t i : {std::size_t{0}, std::size_t{7}, prof.size() / 2, prof.size() - 1}) {
        const auto pt = prof.w_at(prof.grid()[i]);
        CHECK(pt.w == prof.w()[i]);
        CHECK(pt.ws == prof.ws()[i]);
    }
    CHECK(prof.v_at(0.0) == 1.0);
    const std::size_t i = prof.size() / 3;
    const double s = prof.grid()[i];
    const double v = std::pow(prof.w()[i] * std::exp(-2 * s), 1 / 0.9);
    CHECK(prof.v_at(std::exp(s)) == Approx(v).epsilon(1e-13));
}

TEST_CASE("interpolation agrees with a refined integration") {
    const ProblemParams p{3, 0.1, 1.0, 1.0};
    const auto coarse = integrate_profile(p, opts(60.0));
    auto fine_opts = opts(60.0, 1e-12);
    fine_opts.max_step = 0.002;
    fine_opts.max_step_rel = 0.002;
    const auto fine = integrate_profile(p, fine_opts);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(coarse.s_min() + 0.5, 59.5);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const double s = dist(rng);
        const double a = coarse.w_at(s).w, b = fine.w_at(s).w;
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
    CHECK(worst <= 1e-8);
}

TEST_CASE("scaled_eval") {
    const auto base = integrate_profile({3, 0.1, 1.0, 1.0}, opts(30.0));
    for (double r : {0.0, 0.01, 1.0, 100.0}) CHECK(scaled_eval(base, 1.0, 1.0, r) == base.v_at(r));
    CHECK(scaled_eval(base, 2.0, 3.0, 0.0) == 2.0);
    CHECK_THROWS_AS(scaled_eval(base, 1.0, 1.0, std::exp(40.0)), Error);
    const auto other = integrate_profile({3, 0.1, 2.0, 1.0}, opts(10.0));
    CHECK_THROWS_AS(scaled_eval(other, 1.0, 1.0, 1.0), Error);
}

TEST_CASE("scaling identity at (lambda, beta) = (2, 3)") {
    SuiteOptions o;
    const auto e = check_scaling_identity(3, 0.1, 2.0, 3.0, o);
    INFO(e.detail);
    CHECK(e.pass);
    CHECK(e.value <= 1e-6);
}

TEST_CASE("integrate_profile errors") {
    CHECK_THROWS_AS(integrate_profile({3, 0.5, 1.0, 1.0}, opts(10.0)), Error);
    CHECK_THROWS_AS(integrate_profile({3, 0.1, 1.0, 1.0}, opts(10.0, -1.0)), Error);
    auto o = opts(-30.0);
    CHECK_THROWS_AS(integrate_profile({3, 0.1, 1.0, 1.0}, o), Error);
    const auto prof = integrate_profile({3, 0.1, 1.0, 1.0}, opts(10.0));
    CHECK_THROWS_AS(prof.w_at(11.0), Error);
    CHECK_THROWS_AS(prof.v_at(-1.0), Error);
}

TEST_CASE("Yamabe profile integrates to s = 1000") {
    const ProblemParams p{3, 0.2, 1.0, 1.0};
    const auto prof = integrate_profile(p, opts(1000.0));
    CHECK(prof.ws().back() == Approx(derive_constants(p).c1).epsilon(1e-2));
}

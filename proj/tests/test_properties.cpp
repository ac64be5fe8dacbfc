#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fde/checks.hpp"
#include "fde/constants.hpp"
#include "fde/pde.hpp"
#include "fde/report_io.hpp"

using namespace fde;
using doctest::Approx;

// Randomised checks of identities that hold for every admissible input.
// Seeds are fixed so failures reproduce.

namespace {

ProblemParams random_subcritical(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> nd(3, 9);
    std::uniform_real_distribution<double> u(0.02, 0.98), pos(0.5, 4.0);
    const int n = nd(rng);
    double m = u(rng) * (n - 2.0) / n;
    while (classify(n, m) != Regime::FastSubcritical) m *= 0.5;
    return {n, m, pos(rng), pos(rng)};
}

StepControl coarse_steps() {
    StepControl c;
    c.dt_max = 1e-2;
    return c;
}

}  // namespace

TEST_CASE("scaling identity at random (lambda, beta)") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pos(0.5, 4.0);
    SuiteOptions o;
    for (int k = 0; k < 6; ++k) {
        const double lambda = pos(rng), beta = pos(rng);
        const auto e = check_scaling_identity(k % 2 ? 5 : 3, k % 2 ? 0.5 : 0.1, lambda, beta, o);
        INFO("lambda = " << lambda << ", beta = " << beta << ": " << e.detail);
        CHECK(e.pass);
        CHECK(e.value <= 1e-6);
    }
}

TEST_CASE("closed-form constants satisfy their cross identities") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> k(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_subcritical(rng);
        const auto c = derive_constants(p);
        const double gap = p.yamabe_gap();
        const double d = p.n - 2 - p.n * p.m;
        // c1 depends only on (n, m); the lower-order coefficients scale as 1/beta.
        CHECK(c.c1 == Approx(2.0 * (p.n - 1) * d / (1 - p.m)).epsilon(1e-13));
        CHECK(c.kappa_sq == Approx(c.kappa * c.kappa).epsilon(1e-13));
        const auto c_unit = derive_constants({p.n, p.m, 1.0, p.lambda});
        CHECK(c.a2 * p.beta == Approx(c_unit.a2).epsilon(1e-12));
        CHECK(c.b0 * p.beta == Approx(c_unit.b0).epsilon(1e-12));
        // Sign of kappa and a2 follows the Yamabe gap.
        CHECK((c.kappa > 0) == (gap > 0));

        const double K0 = k(rng), K1 = k(rng);
        const double K = K_closed_form(p.lambda, p.beta, K0, p.n, p.m);
        CHECK(K0_from_K(K, p.lambda, p.beta, p.n, p.m) == Approx(K0).epsilon(1e-11).scale(1.0));
        const double a = a1_of(K, p);
        CHECK(a - a1_of(0.0, p) == Approx(gap / (1 - p.m) * p.beta * K).epsilon(1e-11).scale(1.0));

        // lambda1 solves the matching identity, and feeding it back into the
        // closed form returns (c1/beta) K1.
        const double l1 = lambda1_of(K1, K0, p.beta, p.m);
        CHECK(0.5 * (1 - p.m) * std::log(l1) + 0.5 * std::log(p.beta) + K0 == Approx(K1).epsilon(1e-12).scale(1.0));
        CHECK(K_closed_form(l1, p.beta, K0, p.n, p.m) ==
              Approx(c.c1 / p.beta * K1).epsilon(1e-11).scale(1.0));
    }
}

TEST_CASE("comparison and positivity for random ordered data") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> amp(0.05, 2.0), rad(0.3, 5.0), k1(0.0, 2.0);
    const auto grid = make_radial_grid({1e3, 20, 20});
    for (int trial = 0; trial < 4; ++trial) {
        InitialData data;
        data.K1 = k1(rng);
        data.psi = Bump{amp(rng), rad(rng)};
        const auto lo = build_initial(3, 0.1, 1.0, data, grid);
        data.psi->amplitude += amp(rng);
        const auto hi = build_initial(3, 0.1, 1.0, data, grid);
        RadialSolver a(lo, coarse_steps()), b(hi, coarse_steps());
        long double prev = cv_l1_distance(a, b);
        for (double t : {0.25, 0.5, 1.0}) {
            a.advance(t);
            b.advance(t);
            for (std::size_t j = 0; j < grid.size(); ++j) {
                REQUIRE(a.field().u[j] > 0.0);
                REQUIRE(b.field().u[j] >= a.field().u[j]);
            }
            const long double now = cv_l1_distance(a, b);
            CHECK(static_cast<double>(now) <= static_cast<double>(prev) * (1 + kContractionSlack));
            prev = now;
        }
    }
}

TEST_CASE("rescale is the self-similar change of frame at every node") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> tt(0.0, 3.0), bb(0.5, 3.0), uu(0.1, 10.0);
    const auto grid = make_radial_grid({1e3, 20, 20});
    for (int trial = 0; trial < 20; ++trial) {
        const double t = tt(rng), beta = bb(rng), m = 0.25;
        auto f = sample_field(grid, [&](double) { return uu(rng); }, 5, m, beta, t);
        const auto g = rescale(f, beta);
        const double amp = std::exp(2 * beta * t / (1 - m));
        REQUIRE(g.r.size() == f.r.size());
        for (std::size_t j = 0; j < f.r.size(); ++j) {
            REQUIRE(g.r[j] == Approx(f.r[j] * std::exp(-beta * t)).epsilon(1e-14));
            REQUIRE(g.u[j] == Approx(amp * f.u[j]).epsilon(1e-14));
        }
    }
}

TEST_CASE("report JSON round trip with random content") {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300), coin(0, 1), len(0, 12);
    auto number = [&] { return std::ldexp(mant(rng), expo(rng)) * (coin(rng) ? 1e-5 : 1e5); };
    auto word = [&] {
        std::string s;
        const int k = len(rng);
        for (int i = 0; i < k; ++i) s += " aZ_\"\\/\n\t0"[std::uniform_int_distribution<int>(0, 9)(rng)];
        return s;
    };
    for (int trial = 0; trial < 50; ++trial) {
        VerificationReport r;
        if (coin(rng)) r.params = ProblemParams{3 + trial % 5, 0.1, 1.0 + trial, 2.0};
        if (coin(rng)) {
            auto c = derive_constants({3, 0.1, 1.0, 1.0});
            if (coin(rng)) resolve_constants(c, {3, 0.1, 1.0, 1.0}, number(), number());
            r.constants = c;
        }
        for (int i = len(rng); i > 0; --i)
            r.limits.push_back(make_limit_entry(word(), number(), number(), number(), 1e-2, 1e-6, 1000));
        if (coin(rng)) r.extraction = ExtractionBlock{number(), number(), number(), number(), number(), len(rng)};
        for (int i = len(rng); i > 0; --i)
            r.checks.push_back({word(), word(), coin(rng) == 1, coin(rng) == 1, number(), number(), word()});
        if (coin(rng)) r.K2 = K2Block{number(), number(), number()};
        r.provenance.tolerances[word()] = number();
        r.provenance.grid[word()] = number();
        if (coin(rng)) r.provenance.timestamp = "2026-01-01T00:00:00Z";
        const auto text = serialize_report(r);
        const auto back = parse_report(text);
        CHECK(back == r);
        CHECK(serialize_report(back) == text);
    }
}

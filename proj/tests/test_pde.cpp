#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fde/asymptotics.hpp"
#include "fde/error.hpp"
#include "fde/pde.hpp"

using namespace fde;
using doctest::Approx;

namespace {

const Profile& base_3_01() {
    static const Profile p = integrate_profile({3, 0.1, 1.0, 1.0}, ProfileOptions{});
    return p;
}

std::vector<double> coarse_grid(double R_max = 1e3, int ppd = 20) { return make_radial_grid({R_max, 20, ppd}); }

StepControl coarse_steps() {
    StepControl c;
    c.dt_max = 1e-2;
    return c;
}

SimulationConfig coarse_config() {
    SimulationConfig c;
    c.R_max = 1e3;
    c.n_uniform = 20;
    c.points_per_decade = 20;
    c.dt_max = 1e-2;
    c.samples = 10;
    return c;
}

double ball_volume(int n, double R) { return unit_sphere_area(n) * std::pow(R, n) / n; }

}  // namespace

TEST_CASE("radial grid layout") {
    const auto r = make_radial_grid({1e4, 50, 80});
    CHECK(r.front() == 0.0);
    CHECK(r[50] == 1.0);
    CHECK(r[25] == Approx(0.5));
    CHECK(r.back() == 1e4);
    CHECK(r.size() == 51 + 320);
    for (std::size_t j = 1; j < r.size(); ++j) REQUIRE(r[j] > r[j - 1]);
    // Constant ratio on the logarithmic part.
    CHECK(r[52] / r[51] == Approx(r[200] / r[199]).epsilon(1e-12));
    CHECK_THROWS_AS(make_radial_grid({0.5, 50, 80}), Error);
    CHECK_THROWS_AS(make_radial_grid({10.0, 1, 80}), Error);
}

TEST_CASE("initial data: tail formula, continuation and bump") {
    const double e10 = std::exp(10.0);
    const std::vector<double> grid = {0.0, 0.5, 1.0, std::exp(2.0), 20.0, e10, 2 * e10};
    InitialData data;
    const auto u0 = build_initial(3, 0.1, 1.0, data, grid);
    const double expect = 2.8 / 0.9 / std::exp(20.0) * (10.0 - 0.5 / 1.4 * std::log(10.0));
    CHECK(std::pow(u0.u[5], 0.9) == Approx(expect).epsilon(1e-13));
    CHECK(expect * std::exp(20.0) == Approx(3.1111111 * 9.1777).epsilon(1e-4));
    CHECK(u0.u[0] == u0.u[3]);
    CHECK(u0.u[2] == u0.u[3]);
    CHECK(u0.t == 0.0);
    CHECK(tail_monotone(u0, data.r_a));

    data.psi = Bump{0.25, 1.0};
    const auto u1 = build_initial(3, 0.1, 1.0, data, grid);
    CHECK(u1.u[0] - u0.u[0] == Approx(0.25));
    CHECK(u1.u[1] - u0.u[1] == Approx(0.25 * 0.75 * 0.75));
    CHECK(u1.u[2] == u0.u[2]);
    CHECK(u1.u[4] == u0.u[4]);

    CHECK(Bump{1.0, 2.0}(2.5) == 0.0);
    CHECK(Bump{1.0, 2.0}(0.0) == 1.0);
}

TEST_CASE("initial data errors") {
    const auto grid = coarse_grid();
    InitialData data;
    data.r_a = 5.0;
    CHECK_THROWS_AS(build_initial(3, 0.1, 1.0, data, grid), Error);
    data.r_a = std::exp(2.0);
    data.K1 = -10.0;
    try {
        build_initial(3, 0.1, 1.0, data, grid);
        FAIL("expected NonpositiveBracket");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonpositiveBracket);
    }
    data.K1 = 0.0;
    CHECK_THROWS_AS(build_initial(3, 0.5, 1.0, data, grid), Error);
}

TEST_CASE("corrected tail adds only the o(1) terms") {
    InitialData bare, corr;
    corr.tail = TailMode::Corrected;
    corr.a0 = -0.8;
    const double r = 1e3;
    const double L = std::log(r);
    const double kappa = 0.5 / 1.4;
    CHECK(initial_bracket(r, 3, 0.1, corr) - initial_bracket(r, 3, 0.1, bare) ==
          Approx(-0.8 / L + kappa * kappa * std::log(L) / L).epsilon(1e-12));
    CHECK(to_string(TailMode::Corrected) == "corrected");
    CHECK(tail_mode_from_string("bare") == TailMode::Bare);
    CHECK_THROWS_AS(tail_mode_from_string("other"), Error);
}

TEST_CASE("rescale") {
    const auto grid = coarse_grid();
    InitialData data;
    auto u0 = build_initial(3, 0.1, 1.0, data, grid);
    const auto same = rescale(u0, 1.0);
    CHECK(same.r == u0.r);
    CHECK(same.u == u0.u);

    // Amplitude factor at t = 1, beta = 1, m = 0.1.
    auto f = sample_field(grid, [](double) { return 1.0; }, 3, 0.1, 1.0, 1.0);
    const auto g = rescale(f, 1.0);
    CHECK(g.u[0] == Approx(std::exp(2.0 / 0.9)).epsilon(1e-14));
    CHECK(g.u[0] == Approx(9.2278).epsilon(1e-4));
    CHECK(g.R() == Approx(1e3 / std::numbers::e));

    // Exact inverse of the self-similar ansatz.
    const auto& v = base_3_01();
    const double beta = 2.0, t = 0.7, m = 0.1;
    auto ansatz = sample_field(
        grid, [&](double x) { return std::exp(-2 * beta * t / (1 - m)) * scaled_eval(v, 1.0, beta, std::exp(-beta * t) * x); },
        3, m, beta, t);
    const auto back = rescale(ansatz, beta);
    for (std::size_t j = 0; j < back.r.size(); j += 7)
        CHECK(back.u[j] == Approx(scaled_eval(v, 1.0, beta, back.r[j])).epsilon(1e-12));
    CHECK_THROWS_AS(back.value_at(back.R() * 1.01), Error);
}

TEST_CASE("l1 and sup distances") {
    const auto grid = coarse_grid();
    auto f = sample_field(grid, [](double r) { return 1.0 / (1.0 + r * r); }, 3, 0.1, 1.0);
    CHECK(l1_distance(f, f, 10.0) == 0.0);
    CHECK(sup_distance(f, f, 10.0) == 0.0);
    auto g = f;
    for (auto& x : g.u) x += 0.3;
    for (double R : {0.37, 1.0, 5.5, 100.0})
        CHECK(l1_distance(f, g, R) == Approx(0.3 * ball_volume(3, R)).epsilon(1e-12));
    CHECK(sup_distance(f, g, 10.0) == Approx(0.3).epsilon(1e-14));
    CHECK_THROWS_AS(l1_distance(f, g, 2e3), Error);

    double total = 0.0;
    for (double v : control_volumes(grid, 3)) total += v;
    CHECK(total == Approx(ball_volume(3, 1e3)).epsilon(1e-12));
}

TEST_CASE("l1 distance of random piecewise-linear pairs vs a refined quadrature") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> ra = {0.0}, rb = {0.0};
        std::uniform_real_distribution<double> step(0.01, 0.3);
        while (ra.back() < 3.0) ra.push_back(ra.back() + step(rng));
        while (rb.back() < 3.0) rb.push_back(rb.back() + step(rng));
        RadialField a, b;
        a.r = ra;
        b.r = rb;
        a.n = b.n = 4;
        for (std::size_t j = 0; j < ra.size(); ++j) a.u.push_back(val(rng));
        for (std::size_t j = 0; j < rb.size(); ++j) b.u.push_back(val(rng));
        const double R = 2.5;
        // Midpoint rule on 2e6 cells.
        const int N = 2000000;
        double oracle = 0.0;
        for (int k = 0; k < N; ++k) {
            const double r = (k + 0.5) * R / N;
            oracle += std::abs(a.value_at(r) - b.value_at(r)) * std::pow(r, 3);
        }
        oracle *= unit_sphere_area(4) * R / N;
        CHECK(l1_distance(a, b, R) == Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("comparison principle and positivity") {
    const auto grid = coarse_grid();
    InitialData data;
    data.K1 = 0.7;
    const auto lo = build_initial(3, 0.1, 1.0, data, grid);
    data.psi = Bump{0.5, 2.0};
    const auto hi = build_initial(3, 0.1, 1.0, data, grid);
    RadialSolver a(lo, coarse_steps()), b(hi, coarse_steps());
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
        a.advance(t);
        b.advance(t);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            REQUIRE(a.field().u[j] > 0.0);
            REQUIRE(b.field().u[j] >= a.field().u[j]);
        }
    }
    CHECK(a.stats().steps > 0);
    CHECK(a.field().t == 2.0);
    CHECK_THROWS_AS(a.advance(1.0), Error);
}

TEST_CASE("zero-flux walls conserve the discrete mass") {
    const auto grid = coarse_grid(100.0);
    auto u0 = sample_field(grid, [](double r) { return 1.0 + 4.0 * std::exp(-r * r); }, 3, 0.1, 1.0);
    RadialSolver s(u0, coarse_steps());
    s.use_zero_flux_outer();
    const auto V = control_volumes(grid, 3);
    auto mass = [&](const std::vector<double>& u) {
        double sum = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) sum += V[j] * u[j];
        return sum;
    };
    const double m0 = mass(u0.u);
    s.advance(2.0);
    CHECK(mass(s.field().u) == Approx(m0).epsilon(1e-11));
    // The bump has spread out.
    CHECK(s.field().u[0] < u0.u[0]);
}

TEST_CASE("self-similar solution stays fixed in the rescaled frame") {
    const auto& v = base_3_01();
    const double beta = 1.0, m = 0.1;
    const auto grid = make_radial_grid({1e3, 40, 40});
    const auto u0 = sample_field(grid, [&](double r) { return v.v_at(r); }, 3, m, beta);
    const double R = grid.back();
    StepControl ctl;
    ctl.dt_max = 1e-3;
    RadialSolver s(u0, ctl, [&](double t) { return std::exp(-2 * beta * t / (1 - m)) * v.v_at(std::exp(-beta * t) * R); });
    s.advance(1.0);
    const auto tilde = rescale(s.field(), beta);
    double drift = 0.0;
    for (std::size_t j = 0; j < tilde.r.size() && tilde.r[j] <= 10.0; ++j)
        drift = std::max(drift, std::abs(tilde.u[j] / v.v_at(tilde.r[j]) - 1.0));
    CHECK(drift < 5e-3);
}

TEST_CASE("contraction of ordered runs") {
    const auto grid = coarse_grid();
    InitialData data;
    data.K1 = 0.7;
    const auto a = build_initial(3, 0.1, 1.0, data, grid);
    const auto same = contraction_check(a, a, 1.0, 4, coarse_steps());
    for (double d : same.plain) CHECK(d == 0.0);
    CHECK(same.decay_rate == Approx(0.7 / 0.9).epsilon(1e-14));
    CHECK(same.decay_rate == Approx(0.7778).epsilon(1e-4));

    data.psi = Bump{1e-2, 1.0};
    const auto b = build_initial(3, 0.1, 1.0, data, grid);
    const auto rep = contraction_check(a, b, 3.0, 12, coarse_steps());
    CHECK(rep.plain_nonincreasing);
    CHECK(rep.rescaled_within_factor);
    CHECK(rep.plain.front() == Approx(cv_l1_distance(a, b)).epsilon(1e-12));
    for (std::size_t k = 1; k < rep.plain.size(); ++k)
        CHECK(rep.plain[k] <= rep.plain[k - 1] * (1 + kContractionSlack));
}

TEST_CASE("convergence run bookkeeping") {
    auto cfg = coarse_config();
    cfg.horizon = 2.0;
    cfg.tail = TailMode::Corrected;
    const auto rep = convergence_run(cfg, base_3_01());
    CHECK(rep.lambda1 == Approx(1.0).epsilon(1e-14));
    CHECK(rep.K1 == rep.K0);
    CHECK(rep.times.size() == 11);
    CHECK(rep.times.back() == 2.0);
    for (double d : rep.l1_dist) CHECK(d >= 0.0);
    // Center value trends toward lambda1.
    CHECK(std::abs(rep.center_vals.back() - 1.0) < std::abs(rep.center_vals.front() - 1.0));

    // l1_dist at t = 0 is the distance of u0 to the limit profile on B_R_obs.
    InitialData data;
    data.K1 = rep.K1;
    data.tail = TailMode::Corrected;
    data.a0 = a0_of(a1_of(K_closed_form(1, 1, rep.K0, 3, 0.1), {3, 0.1, 1, 1}), 3, 0.1);
    const auto u0 = build_initial(3, 0.1, 1.0, data, make_radial_grid(cfg.grid()));
    std::vector<double> obs;
    for (double r : u0.r)
        if (r <= 1.0) obs.push_back(r);
    const auto v = sample_field(obs, [&](double r) { return base_3_01().v_at(r); }, 3, 0.1, 1.0);
    CHECK(rep.l1_dist.front() == Approx(l1_distance(u0, v, 1.0)).epsilon(1e-12));

    // t = 0 decay sample is the constant of the bare bracket times c1 / beta
    // (plus the o(1) terms of the corrected tail).
    REQUIRE(rep.K2_diag.has_value());
    CHECK(rep.K2_diag->reference_slope == Approx(-2.8 / 0.9));
    CHECK(rep.K2_diag->samples.front().bound == rep.K2_diag->samples.front().value);
}

TEST_CASE("decay diagnostic baseline and linear bound") {
    const auto grid = coarse_grid();
    InitialData data;
    data.K1 = 0.4;
    const auto u0 = build_initial(3, 0.1, 1.0, data, grid);
    const auto diag = decay_bound_diag({u0}, 1.0);
    CHECK(diag.samples.front().value == Approx(0.4 * 2.8 / 0.9).epsilon(1e-9));
    auto u1 = u0;
    u1.t = 1.0;
    const auto d2 = decay_bound_diag({u0, u1}, 0.0);
    CHECK(d2.samples[1].bound == Approx(-3.1111111).epsilon(1e-7));
    CHECK(d2.fitted_slope == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("coverage and regime errors of the convergence run") {
    auto cfg = coarse_config();
    cfg.horizon = 8.0;  // e^8 > 1e3
    try {
        convergence_run(cfg, base_3_01());
        FAIL("expected CoverageExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CoverageExceeded);
    }
    cfg.horizon.reset();
    cfg.m = 0.2;
    CHECK_THROWS_AS(convergence_run(cfg, base_3_01()), Error);
}

TEST_CASE("the simulated amplitude follows the adopted lambda1 formula") {
    auto cfg = coarse_config();
    cfg.K1_offset = 0.45;
    cfg.tail = TailMode::Corrected;
    const auto rep = convergence_run(cfg, base_3_01());
    CHECK(rep.lambda1 == Approx(std::numbers::e).epsilon(1e-12));
    const double c = rep.center_vals.back();
    CHECK(std::abs(c - rep.lambda1) < std::abs(c - rep.lambda1_alternative));
}

TEST_CASE("grid and step refinement changes the distances by less than the tolerance") {
    auto cfg = coarse_config();
    cfg.points_per_decade = 40;
    cfg.horizon = 3.0;
    cfg.tail = TailMode::Corrected;
    auto fine = cfg;
    fine.n_uniform *= 2;
    fine.points_per_decade *= 2;
    fine.dt_max /= 2;
    const auto a = convergence_run(cfg, base_3_01());
    const auto b = convergence_run(fine, base_3_01());
    CHECK(std::abs(a.center_vals.back() / b.center_vals.back() - 1) < kCenterTolerance);
    CHECK(std::abs(a.l1_dist.back() / b.l1_dist.back() - 1) < kCenterTolerance);
    CHECK(std::abs(a.sup_dist.back() / b.sup_dist.back() - 1) < kCenterTolerance);
}

TEST_CASE("simulation config defaults") {
    SimulationConfig c;
    CHECK(c.resolved_horizon() == 5.0);
    c.beta = 2.0;
    CHECK(c.resolved_horizon() == 2.5);
    CHECK(c.grid().R_max == 1e4);
    CHECK(c.step_control().newton_tol == 1e-12);
    CHECK(c.tail == TailMode::Bare);
}

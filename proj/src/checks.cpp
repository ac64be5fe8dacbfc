#include "fde/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numbers>

#include "fde/error.hpp"

namespace fde {

namespace {

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

std::string tag(int n, double m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "n%d_m%g", n, m);
    return buf;
}

CheckEntry entry(std::string suite, std::string name, bool pass, double value, double reference,
                 std::string detail, bool informational = false) {
    return CheckEntry{std::move(suite), std::move(name), pass, informational, value, reference, std::move(detail)};
}

ProfileOptions profile_options(const SuiteOptions& o, double s_end) {
    ProfileOptions opt;
    opt.s_end = s_end;
    opt.tol = o.tol;
    return opt;
}

// Finite-difference weights for the first derivative at x0 (Fornberg's
// recursion, derivative order 1 only).
std::vector<double> first_derivative_weights(double x0, const std::vector<double>& x) {
    const std::size_t N = x.size();
    std::vector<std::vector<double>> c(N, std::vector<double>(2, 0.0));
    c[0][0] = 1.0;
    double c1 = 1.0;
    double c4 = x[0] - x0;
    for (std::size_t i = 1; i < N; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(N);
    for (std::size_t i = 0; i < N; ++i) w[i] = c[i][1];
    return w;
}

}  // namespace

void SuiteOptions::select(int n, double m, double beta) {
    switch (classify(n, m)) {
    case Regime::FastSubcritical:
        subcritical = {{n, m}};
        yamabe.clear();
        return;
    case Regime::YamabeCritical:
        subcritical.clear();
        yamabe = {{n, beta}};
        return;
    case Regime::Invalid:
        break;
    }
    ProblemParams{n, m, beta, 1.0}.validate();
}

std::vector<std::string> suite_names() { return {"constants", "profile", "asymptotics", "pde"}; }

// ---------------------------------------------------------------------------
// constants

std::vector<CheckEntry> check_constant_identities() {
    std::vector<CheckEntry> out;
    double worst = 0.0;
    for (int n : {3, 4, 5, 7, 10}) {
        for (double frac : {0.1, 0.37, 0.8}) {
            const double m = frac * (n - 2.0) / n;
            for (double beta : {0.5, 1.0, 3.0}) {
                const ProblemParams p{n, m, beta, 1.0};
                const auto c = derive_constants(p);
                const double e = p.yamabe_gap();
                auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
                worst = std::max(worst, rel(c.b0 * (1.0 - m) * beta, c.c1 * e));
                worst = std::max(worst, rel(c.a3, c.a2 * e / (1.0 - m)));
                // lambda1 inverts the constant-matching identity.
                const double K0 = 0.3 * n - 1.0, K1 = K0 + 0.45 * frac;
                const double l1 = lambda1_of(K1, K0, beta, m);
                worst = std::max(worst, rel(0.5 * (1.0 - m) * std::log(l1) + 0.5 * std::log(beta) + K0, K1));
            }
        }
    }
    out.push_back(entry("constants", "cross_identities", worst <= 1e-12, worst, 1e-12,
                        fmt("max relative defect %.3e over 45 parameter sets", worst)));

    const auto c = derive_constants({3, 0.1, 1.0, 1.0});
    const double c1_ref = 2.0 * 2.0 * 0.7 / 0.9;
    out.push_back(entry("constants", "c1_n3_m0.1", std::abs(c.c1 - c1_ref) <= 1e-14 * c1_ref, c.c1, c1_ref,
                        "c1 = 2(n-1)(n-2-nm)/(1-m)"));
    const auto y = derive_constants({3, 0.2, 1.0, 1.0});
    out.push_back(entry("constants", "yamabe_n3_kappa", classify(3, 0.2) == Regime::YamabeCritical && y.kappa == 0.0,
                        y.kappa, 0.0, "kappa vanishes at m = (n-2)/(n+2)"));
    return out;
}

// ---------------------------------------------------------------------------
// profile

CheckEntry check_scaling_identity(int n, double m, double lambda, double beta, const SuiteOptions& o) {
    const double r_max = std::exp(10.0);
    const auto base = integrate_profile({n, m, 1.0, 1.0}, profile_options(o, 12.0 + std::log(4.0 * 4.0)));
    const ProblemParams p{n, m, beta, lambda};
    const auto direct = integrate_profile(p, profile_options(o, 10.5));
    double worst = 0.0, at = 0.0;
    const int N = 400;
    for (int k = 0; k <= N; ++k) {
        // r = 0 plus log-spaced radii in [e^-12, e^10].
        const double r = k == 0 ? 0.0 : std::exp(-12.0 + 22.0 * (k - 1) / (N - 1));
        const double rr = std::min(r, r_max);
        const double a = direct.v_at(rr);
        const double b = scaled_eval(base, lambda, beta, rr);
        const double err = std::abs(a - b) / std::abs(a);
        if (err > worst) {
            worst = err;
            at = rr;
        }
    }
    char name[96];
    std::snprintf(name, sizeof name, "scaling_identity_%s_lambda%g_beta%g", tag(n, m).c_str(), lambda, beta);
    return entry("profile", name, worst <= 1e-6, worst, 1e-6, fmt("max relative error %.3e at r = %.4g", worst, at));
}

std::vector<CheckEntry> check_profile_invariants(int n, double m, const SuiteOptions& o) {
    std::vector<CheckEntry> out;
    const ProblemParams p{n, m, 1.0, 1.0};
    const auto prof = integrate_profile(p, profile_options(o, o.s_end));
    const std::string t = tag(n, m);

    const auto w = prof.w();
    const bool positive = std::all_of(w.begin(), w.end(), [](double x) { return x > 0.0; });
    out.push_back(entry("profile", "positivity_" + t, positive, *std::min_element(w.begin(), w.end()), 0.0,
                        "min w over the grid"));

    const double s0 = prof.s_min();
    const double lead = w[0] / std::exp(2.0 * s0);
    const double dev = std::abs(lead / std::pow(p.lambda, 1.0 - m) - 1.0);
    out.push_back(entry("profile", "origin_limit_" + t, dev <= 10.0 * prof.tol(), dev, 10.0 * prof.tol(),
                        "relative deviation of w e^{-2s} from lambda^{1-m} at the first node"));

    // Residual with w_ss from a 7-point stencil on stored w_s.
    const auto s = prof.grid();
    const auto ws = prof.ws();
    double worst = 0.0, at = 0.0;
    for (std::size_t j = 3; j + 3 < prof.size(); ++j) {
        std::vector<double> xs(s.begin() + static_cast<long>(j) - 3, s.begin() + static_cast<long>(j) + 4);
        const auto wt = first_derivative_weights(s[j], xs);
        double wss = 0.0;
        for (std::size_t k = 0; k < 7; ++k) wss += wt[k] * ws[j - 3 + k];
        const auto terms = w_equation_terms(p, w[j], ws[j]);
        const double res = std::abs(wss - w_equation_rhs(p, w[j], ws[j])) / (std::abs(wss) + terms.magnitude());
        if (res > worst) {
            worst = res;
            at = s[j];
        }
    }
    out.push_back(entry("profile", "residual_" + t, worst <= 1e-8, worst, 1e-8,
                        fmt("max relative residual %.3e at s = %.4g", worst, at)));

    const auto c = derive_constants(p);
    const double tail = std::abs(ws.back() - c.c1 / p.beta) / (c.c1 / p.beta);
    out.push_back(entry("profile", "far_field_ws_" + t, tail <= 1e-2, tail, 1e-2,
                        fmt("|w_s - c1/beta| / (c1/beta) at s = %.4g", prof.s_max())));
    return out;
}

// ---------------------------------------------------------------------------
// asymptotics

CheckEntry check_w_limits(const Profile& prof) {
    const auto& p = prof.params();
    const double target = derive_constants(p).c1 / p.beta;
    const double S = prof.s_max();
    const double ws = prof.ws().back();
    const double wos = prof.w().back() / S;
    const double e_ws = std::abs(ws - target) / target;
    const double e_wos = std::abs(wos - target) / target;
    const double mutual = std::abs(ws - wos) / target;
    const bool pass = e_ws <= 1e-2 && e_wos <= 1e-2 && mutual <= 1e-2;
    return entry("asymptotics", "w_limits_" + tag(p.n, p.m), pass, e_ws, 1e-2,
                 fmt("w_s err %.3e, w/s err %.3e, |w_s - w/s|/target %.3e", e_ws, e_wos, mutual));
}

AsymptoticsRun run_asymptotics(int n, double m, const SuiteOptions& o) {
    const ProblemParams p{n, m, 1.0, 1.0};
    const auto prof = integrate_profile(p, profile_options(o, o.s_end));
    auto diag = build_diagnostics(prof);
    AsymptoticsRun run;
    run.extraction = extract_K(prof, diag);
    run.limits = limit_suite(prof, diag);
    run.sign = sign_check(diag, p);
    run.K0 = K0_from_K(run.extraction.K, 1.0, 1.0, n, m);
    run.a0 = a0_of(run.extraction.a1, n, m);
    return run;
}

std::vector<CheckEntry> check_K0_universality(int n, double m, const SuiteOptions& o) {
    const std::vector<std::pair<double, double>> pairs = {{1.0, 1.0}, {2.0, 1.0}, {1.0, 3.0}, {0.5, 2.0}};
    std::vector<std::future<std::pair<double, double>>> jobs;
    for (const auto& [lambda, beta] : pairs) {
        jobs.push_back(std::async(std::launch::async, [=, &o] {
            const ProblemParams p{n, m, beta, lambda};
            const auto prof = integrate_profile(p, profile_options(o, o.s_end));
            auto diag = build_diagnostics(prof);
            const double K = extract_K(prof, diag).K;
            return std::pair{K, K0_from_K(K, lambda, beta, n, m)};
        }));
    }
    std::vector<double> K, K0;
    for (auto& j : jobs) {
        const auto [k, k0] = j.get();
        K.push_back(k);
        K0.push_back(k0);
    }
    const double lo = *std::min_element(K0.begin(), K0.end());
    const double hi = *std::max_element(K0.begin(), K0.end());
    double mean = 0.0;
    for (double x : K0) mean += x / static_cast<double>(K0.size());
    const double spread = (hi - lo) / std::abs(mean);

    double worst = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double pred = K_closed_form(pairs[i].first, pairs[i].second, K0[0], n, m);
        worst = std::max(worst, std::abs(pred - K[i]) / std::abs(K[i]));
    }
    const std::string t = tag(n, m);
    return {entry("asymptotics", "K0_spread_" + t, spread <= 1e-2, spread, 1e-2,
                  fmt("K0 in [%.10f, %.10f] over 4 (lambda, beta) pairs", lo, hi)),
            entry("asymptotics", "K_closed_form_" + t, worst <= 1e-2, worst, 1e-2,
                  fmt("max relative error of K(lambda, beta) from K0(1,1): %.3e", worst))};
}

std::vector<CheckEntry> check_expansion_residual(int n, double m, const SuiteOptions& o) {
    // K0 and a1(1,1) come from a (2,3) run so that the (1,1) comparison does
    // not reuse the tail value the extraction was fitted to.
    const ProblemParams p23{n, m, 3.0, 2.0};
    const auto prof23 = integrate_profile(p23, profile_options(o, o.s_end));
    auto d23 = build_diagnostics(prof23);
    const double K0 = K0_from_K(extract_K(prof23, d23).K, 2.0, 3.0, n, m);
    const ProblemParams p11{n, m, 1.0, 1.0};
    const double a0 = a0_of(a1_of(K_closed_form(1.0, 1.0, K0, n, m), p11), n, m);
    const auto prof11 = integrate_profile(p11, profile_options(o, o.s_end));

    auto residual = [&](const Profile& prof, double a0_used, double s) {
        return s * std::abs(brace_numeric(prof, s) - expansion_brace(s, prof.params(), K0, a0_used));
    };
    std::vector<CheckEntry> out;
    const std::string t = tag(n, m);
    auto add = [&](std::string name, const Profile& prof, double a0_used, bool informational, const char* what) {
        const double r100 = residual(prof, a0_used, 100.0);
        const double r1000 = residual(prof, a0_used, 1000.0);
        char detail[256];
        std::snprintf(detail, sizeof detail, "s|B_num - B_pred|: %.4e at s = 100, %.4e at s = 1000 (%s)", r100,
                      r1000, what);
        out.push_back(entry("asymptotics", std::move(name), r1000 < 0.5 * r100, r1000, 0.5 * r100, detail,
                            informational));
    };
    add("expansion_residual_" + t, prof11, a0, false, "lambda = beta = 1, K0 from the (2,3) run");
    add("expansion_residual_fixed_a0_lambda2_beta3_" + t, prof23, a0, true, "a0 unchanged");
    add("expansion_residual_scaled_a0_lambda2_beta3_" + t, prof23, scaled_a0(a0, p23), true,
        "a0 - kappa log(lambda^((1-m)/2) sqrt(beta))");
    return out;
}

CheckEntry check_synthetic_extraction(int n, double m, double beta, double K_planted) {
    const ProblemParams p{n, m, beta, 1.0};
    const auto c = derive_constants(p);
    const double D = (1.0 - m) * a1_of(K_planted, p) / (2.0 * p.gap() * beta);
    // h1 = K + A (1 + log s)/s - D/s, i.e. h2 = -D/s exactly.
    std::vector<double> s, w, ws;
    for (double x = 1.0; x <= 1000.0 * (1 + 1e-12); x *= 1.02) s.push_back(x);
    s.back() = 1000.0;
    for (double x : s) {
        const double L = std::log(x);
        const double h1 = K_planted + c.h1_coeff * (1.0 + L) / x - D / x;
        const double h1s = -c.h1_coeff * L / (x * x) + D / (x * x);
        w.push_back(h1 - c.a2 * L + c.c1 / beta * x);
        ws.push_back(h1s - c.a2 / x + c.c1 / beta);
    }
    auto diag = WDiagnostics::from_samples(p, s, w, ws);
    const auto ex = extract_K(diag);
    const double err = std::abs(ex.K - K_planted);
    return entry("asymptotics", "synthetic_extraction_" + tag(n, m), err <= 1e-10, err, 1e-10,
                 fmt("planted K = %.6f, recovered %.15f in %g iterations", K_planted, ex.K, ex.iterations));
}

// ---------------------------------------------------------------------------
// pde

CheckEntry check_contraction(const SimulationConfig& config, ContractionReport* out) {
    const auto grid = make_radial_grid(config.grid());
    const double K0 = config.K0 ? *config.K0 : extract_K0(integrate_profile({config.n, config.m, 1.0, 1.0}, {}));
    InitialData data;
    data.K1 = config.K1 ? *config.K1 : K0 + config.K1_offset;
    data.r_a = config.r_a;
    const auto a = build_initial(config.n, config.m, config.beta, data, grid);
    data.psi = Bump{1e-2, 1.0};
    const auto b = build_initial(config.n, config.m, config.beta, data, grid);
    const auto rep = contraction_check(a, b, 3.0 / config.beta, 12, config.step_control());
    if (out) *out = rep;
    double worst = 0.0;
    for (std::size_t k = 0; k < rep.rescaled.size(); ++k)
        worst = std::max(worst, std::abs(std::log(rep.rescaled[k] / rep.bound[k])));
    return entry("pde", "l1_contraction", rep.plain_nonincreasing && rep.rescaled_within_factor,
                 rep.plain.back() / rep.plain.front(), 1.0,
                 fmt("plain distance %.10e -> %.10e; max |log(rescaled/bound)| %.3e", rep.plain.front(),
                     rep.plain.back(), worst));
}

// ---------------------------------------------------------------------------

void run_suite(const std::string& suite, const SuiteOptions& o, VerificationReport& report) {
    auto append = [&](const std::vector<CheckEntry>& v) { report.checks.insert(report.checks.end(), v.begin(), v.end()); };
    const auto& subcritical = o.subcritical;

    if (suite == "all") {
        for (const auto& name : suite_names())
            if (name != "pde" || o.slow) run_suite(name, o, report);
        return;
    }
    if (suite == "constants") {
        append(check_constant_identities());
        return;
    }
    if (suite == "profile") {
        for (const auto& [n, m] : subcritical) {
            append(check_profile_invariants(n, m, o));
            for (const auto& [lambda, beta] : std::vector<std::pair<double, double>>{{2, 1}, {1, 3}, {2, 3}})
                report.checks.push_back(check_scaling_identity(n, m, lambda, beta, o));
        }
        return;
    }
    if (suite == "asymptotics") {
        for (const auto& [n, m] : subcritical) {
            const auto run = run_asymptotics(n, m, o);
            for (auto e : run.limits.entries) {
                e.name = tag(n, m) + "/" + e.name;
                report.limits.push_back(e);
            }
            const auto prof = integrate_profile({n, m, 1.0, 1.0}, profile_options(o, o.s_end));
            report.checks.push_back(check_w_limits(prof));
            report.checks.push_back(entry("asymptotics", "sign_" + tag(n, m), run.sign.matches, run.sign.eventual_sign,
                                          run.sign.expected_sign,
                                          fmt("h_s single-signed after s = %.4g", run.sign.stabilizes_after)));
            append(check_K0_universality(n, m, o));
            append(check_expansion_residual(n, m, o));
            report.checks.push_back(check_synthetic_extraction(n, m, 1.0, n == 3 ? 2.0 : -2.0));
            if (!report.extraction) {
                report.extraction = ExtractionBlock{run.extraction.K, run.K0, run.extraction.a1, run.a0,
                                                    run.extraction.S, run.extraction.iterations};
            }
        }
        for (const auto& [n, beta] : o.yamabe) {
            const auto prof = integrate_profile({n, yamabe_exponent(n), beta, 1.0}, profile_options(o, o.s_end));
            auto e = yamabe_limit_check(prof);
            e.name = tag(n, yamabe_exponent(n)) + "/" + e.name;
            report.limits.push_back(e);
        }
        return;
    }
    if (suite == "pde") {
        const auto& cfg = o.sim;
        report.checks.push_back(check_contraction(cfg));

        ProblemParams p11{cfg.n, cfg.m, 1.0, 1.0};
        ProfileOptions popt;
        popt.s_end = cfg.profile_s_end;
        popt.tol = cfg.profile_tol;
        const auto base = integrate_profile(p11, popt);

        SimulationConfig corrected = cfg;
        corrected.tail = TailMode::Corrected;
        const auto dbl = doubling_check(corrected, base);
        const auto& run = dbl.base;
        report.checks.push_back(entry("pde", "convergence_corrected_tail", run.pass(), run.center_rel_error(),
                                      kCenterTolerance,
                                      fmt("u~(0,T) = %.6f vs lambda1 = %.6f; l1 %.3e at T", run.center_vals.back(),
                                          run.lambda1, run.l1_dist.back())));
        report.checks.push_back(entry("pde", "R_max_doubling", dbl.pass, dbl.center_change, dbl.margin,
                                      fmt("center change %.3e, field change %.3e, margin %.3e", dbl.center_change,
                                          dbl.field_change, dbl.margin)));
        const double c = run.center_vals.back();
        const double d_adopted = std::abs(c - run.lambda1), d_alt = std::abs(c - run.lambda1_alternative);
        report.checks.push_back(entry("pde", "lambda1_discrimination", d_adopted < d_alt, d_adopted, d_alt,
                                      fmt("|u~(0,T) - lambda1| = %.4f (adopted lambda1) vs %.4f (alternative)",
                                          d_adopted, d_alt)));

        SimulationConfig bare = cfg;
        bare.tail = TailMode::Bare;
        const auto b = convergence_run(bare, base);
        report.checks.push_back(entry("pde", "convergence_bare_tail", b.pass(), b.center_rel_error(), kCenterTolerance,
                                      fmt("bare tail: u~(0,T) = %.6f vs lambda1 = %.6f", b.center_vals.back(),
                                          b.lambda1),
                                      true));
        if (run.K2_diag) {
            report.K2 = K2Block{run.K2_diag->samples.front().value, run.K2_diag->fitted_slope,
                                run.K2_diag->reference_slope};
            report.checks.push_back(entry("pde", "K2_decay_slope", true, run.K2_diag->fitted_slope,
                                          run.K2_diag->reference_slope,
                                          "outer-annulus proxy with a frozen boundary", true));
        }
        return;
    }
    throw Error(ErrorCode::DomainError, "unknown suite '" + suite + "'");
}

}  // namespace fde

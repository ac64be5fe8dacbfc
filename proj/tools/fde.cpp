// fde: command-line front end of the verification library.
//
// Exit status: 0 success, 1 verification failure, 2 usage error,
// 3 runtime error. FDE_LOG=error|warn|info|debug sets stderr verbosity.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fde/asymptotics.hpp"
#include "fde/checks.hpp"
#include "fde/constants.hpp"
#include "fde/error.hpp"
#include "fde/pde.hpp"
#include "fde/profile.hpp"
#include "fde/report_io.hpp"

namespace {

using fde::ErrorCode;

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level g_level = Level::Warn;

void log(Level level, const std::string& msg) {
    if (level > g_level) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    std::fprintf(stderr, "[fde %s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

void init_logging() {
    const char* env = std::getenv("FDE_LOG");
    if (!env || !*env) return;
    const std::string v = env;
    const std::map<std::string, Level> table = {
        {"error", Level::Error}, {"warn", Level::Warn}, {"info", Level::Info}, {"debug", Level::Debug},
        {"0", Level::Error},     {"1", Level::Warn},    {"2", Level::Info},    {"3", Level::Debug}};
    if (auto it = table.find(v); it != table.end())
        g_level = it->second;
    else
        log(Level::Warn, "ignoring FDE_LOG='" + v + "' (expected error, warn, info or debug)");
}

std::string fmt(const char* format, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

// Input problems the user can fix by changing flags or the config file.
bool is_usage_error(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidRegime:
    case ErrorCode::DomainError:
    case ErrorCode::UnknownKey:
    case ErrorCode::TypeError:
    case ErrorCode::ParseError:
    case ErrorCode::CoverageExceeded:
    case ErrorCode::NonpositiveBracket:
        return true;
    default:
        return false;
    }
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fde::Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw fde::Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

struct ParamFlags {
    int n = 3;
    double m = 0.1;
    double beta = 1.0;
    double lambda = 1.0;

    void add_to(CLI::App* app, bool required = true) {
        auto* on = app->add_option("--n", n, "Dimension (n >= 3)");
        auto* om = app->add_option("--m", m, "Exponent, 0 < m < (n-2)/n");
        if (required) {
            on->required();
            om->required();
        }
        app->add_option("--beta", beta, "Self-similar rate beta > 0")->capture_default_str();
        app->add_option("--lambda", lambda, "Profile value at the origin")->capture_default_str();
    }

    fde::ProblemParams params() const {
        fde::ProblemParams p{n, m, beta, lambda};
        p.validate();
        return p;
    }
};

fde::ProfileOptions profile_options(double s_end, double tol) {
    fde::ProfileOptions o;
    o.s_end = s_end;
    o.tol = tol;
    return o;
}

// K0 from a (1,1) profile, and a0 evaluated at (1,1).
std::pair<double, double> universal_constants(int n, double m, double s_end, double tol) {
    const fde::ProblemParams p11{n, m, 1.0, 1.0};
    if (p11.regime() != fde::Regime::FastSubcritical)
        throw fde::Error(ErrorCode::DomainError, "K0 can only be extracted for m below the Yamabe exponent");
    log(Level::Info, "integrating the (1,1) profile to s = " + fmt("%g", s_end));
    const double K0 = fde::extract_K0(fde::integrate_profile(p11, profile_options(s_end, tol)));
    const double a0 = fde::a0_of(fde::a1_of(fde::K_closed_form(1.0, 1.0, K0, n, m), p11), n, m);
    return {K0, a0};
}

void print_constants(const fde::ProblemParams& p, const fde::DerivedConstants& c) {
    std::printf("regime    %s\n", std::string(fde::to_string(p.regime())).c_str());
    std::printf("n         %d\nm         %.10g\nbeta      %.10g\nlambda    %.10g\n", p.n, p.m, p.beta, p.lambda);
    auto row = [](const char* name, double v) { std::printf("%-9s %.10g\n", name, v); };
    row("c1", c.c1);
    row("kappa", c.kappa);
    row("kappa_sq", c.kappa_sq);
    row("b0", c.b0);
    row("a2", c.a2);
    row("a3", c.a3);
    row("h1_coeff", c.h1_coeff);
    if (c.K) row("K", *c.K);
    if (c.K0) row("K0", *c.K0);
    if (c.a1) row("a1", *c.a1);
    if (c.a0) row("a0", *c.a0);
}

// ---------------------------------------------------------------------------
// Subcommands

struct ConstantsCmd {
    ParamFlags p;
    bool json = false;
    bool resolve = false;
    double s_end = 1000.0;
    double tol = 1e-10;
    std::string out;

    void setup(CLI::App* app) {
        p.add_to(app);
        app->add_flag("--json", json, "Print JSON instead of a table");
        app->add_flag("--resolve", resolve, "Integrate the (1,1) profile to fill K, K0, a1, a0");
        app->add_option("--s-end", s_end, "Integration end in s = log r (with --resolve)")->capture_default_str();
        app->add_option("--tol", tol, "Integrator tolerance (with --resolve)")->capture_default_str();
        app->add_option("--out", out, "Also write the JSON document to this file");
    }

    int run() const {
        const auto params = p.params();
        auto c = fde::derive_constants(params);
        if (resolve) {
            const double K0 = universal_constants(params.n, params.m, s_end, tol).first;
            fde::resolve_constants(c, params, fde::K_closed_form(params.lambda, params.beta, K0, params.n, params.m),
                                   K0);
        }
        nlohmann::ordered_json j;
        j["params"] = fde::to_json(params);
        j["constants"] = fde::to_json(c);
        const std::string text = fde::dump_json(j);
        if (json)
            std::fputs(text.c_str(), stdout);
        else
            print_constants(params, c);
        if (!out.empty()) write_text(out, text);
        return kExitOk;
    }
};

struct ProfileCmd {
    ParamFlags p;
    double s_end = 1000.0;
    double tol = 1e-10;
    std::string out;

    void setup(CLI::App* app) {
        p.add_to(app);
        app->add_option("--s-end", s_end, "Integration end in s = log r")->capture_default_str();
        app->add_option("--tol", tol, "Relative integrator tolerance")->capture_default_str();
        app->add_option("--out", out, "CSV table s,w,w_s");
    }

    int run() const {
        const auto params = p.params();
        const auto prof = fde::integrate_profile(params, profile_options(s_end, tol));
        const double target = fde::derive_constants(params).c1 / params.beta;
        std::printf("nodes %zu, s in [%.6g, %.6g], w_s(S) = %.10g (c1/beta = %.10g)\n", prof.size(), prof.s_min(),
                    prof.s_max(), prof.ws().back(), target);
        if (!out.empty()) {
            fde::write_profile_csv(prof, out);
            log(Level::Info, "wrote " + out);
        }
        return kExitOk;
    }
};

struct ExtractCmd {
    ParamFlags p;
    std::string profile;
    double tol = 1e-10;
    std::string out;
    std::string diagnostics;
    bool no_timestamp = false;

    void setup(CLI::App* app) {
        app->add_option("--profile", profile, "CSV table written by 'fde profile'")->required();
        p.add_to(app);
        app->add_option("--tol", tol, "Tolerance the table was computed with")->capture_default_str();
        app->add_option("--out", out, "Verification report (JSON)");
        app->add_option("--diagnostics", diagnostics, "CSV of the h, h1, h2 chain");
        app->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp from the report");
    }

    int run() const {
        const auto params = p.params();
        const auto prof = fde::read_profile_csv(profile, params, tol);
        auto diag = fde::build_diagnostics(prof);
        fde::VerificationReport report;
        report.params = params;
        auto c = fde::derive_constants(params);
        if (params.regime() == fde::Regime::FastSubcritical) {
            const auto ex = fde::extract_K(prof, diag);
            const double K0 = fde::K0_from_K(ex.K, params.lambda, params.beta, params.n, params.m);
            fde::resolve_constants(c, params, ex.K, K0);
            report.extraction = fde::ExtractionBlock{ex.K, K0, ex.a1, c.a0.value_or(0.0), ex.S, ex.iterations};
            const auto sign = fde::sign_check(diag, params);
            report.checks.push_back({"asymptotics", "sign", sign.matches, false, static_cast<double>(sign.eventual_sign),
                                     static_cast<double>(sign.expected_sign),
                                     "h_s single-signed after s = " + fmt("%.4g", sign.stabilizes_after)});
        }
        report.constants = c;
        report.limits = fde::limit_suite(prof, diag).entries;
        report.checks.push_back(fde::check_w_limits(prof));
        report.provenance.tolerances = {{"profile_tol", tol},
                                        {"limit_tolerance", fde::kLimitTolerance},
                                        {"limit_tolerance_no_correction", fde::kLimitToleranceNoCorrection},
                                        {"limit_abs_floor", fde::kLimitAbsFloor}};
        report.provenance.grid = {{"s_end", prof.s_max()}, {"nodes", static_cast<double>(prof.size())}};
        if (!no_timestamp) report.provenance.timestamp = utc_timestamp();

        for (const auto& e : report.limits)
            std::printf("%s %-28s estimate %.8g target %.8g rel_err %.3e\n", e.pass ? "PASS" : "FAIL", e.name.c_str(),
                        e.extrapolated, e.target, e.rel_error);
        if (report.extraction)
            std::printf("K = %.12g, K0 = %.12g, a1 = %.12g, a0 = %.12g\n", report.extraction->K,
                        report.extraction->K0, report.extraction->a1, report.extraction->a0);
        if (!diagnostics.empty()) fde::write_diagnostics_csv(diag, diagnostics);
        if (!out.empty()) fde::write_report(report, out);
        return report.all_pass() ? kExitOk : kExitVerification;
    }
};

struct ExpandCmd {
    ParamFlags p;
    std::optional<double> K0;
    std::optional<double> a0;
    std::string a0_convention = "scaled";
    std::vector<double> log_r = {5, 10, 20, 50, 100, 200, 500, 1000};
    bool compare = false;
    double s_end = 1000.0;
    double tol = 1e-10;
    std::string out;

    void setup(CLI::App* app) {
        p.add_to(app);
        app->add_option("--K0", K0, "Universal constant (computed from the (1,1) profile if absent)");
        app->add_option("--a0", a0, "Coefficient of 1/log r at (1,1) (computed with K0 if absent)");
        app->add_option("--a0-convention", a0_convention,
                        "'scaled' re-expands the (1,1) terms at (lambda, beta); 'fixed' uses a0 unchanged")
            ->check(CLI::IsMember({"scaled", "fixed"}))
            ->capture_default_str();
        app->add_option("--log-r", log_r, "Evaluation points in log r (> 1)");
        app->add_option("--s-end", s_end, "Profile end in s = log r")->capture_default_str();
        app->add_option("--tol", tol, "Profile tolerance")->capture_default_str();
        app->add_flag("--compare", compare, "Integrate the profile and add the numeric brace");
        app->add_option("--out", out, "CSV output (stdout if absent)");
    }

    int run() const {
        const auto params = p.params();
        double k0 = 0.0, a0_11 = 0.0;
        if (K0 && a0) {
            k0 = *K0;
            a0_11 = *a0;
        } else if (K0) {
            k0 = *K0;
            const fde::ProblemParams p11{params.n, params.m, 1.0, 1.0};
            a0_11 = fde::a0_of(fde::a1_of(fde::K_closed_form(1.0, 1.0, k0, params.n, params.m), p11), params.n,
                               params.m);
        } else {
            std::tie(k0, a0_11) = universal_constants(params.n, params.m, s_end, tol);
            if (a0) a0_11 = *a0;
        }
        const double a0_used = a0_convention == "scaled" ? fde::scaled_a0(a0_11, params) : a0_11;
        std::optional<fde::Profile> prof;
        if (compare) prof = fde::integrate_profile(params, profile_options(s_end, tol));

        std::string text = compare ? "log_r,brace_pred,brace_num,log_r_times_diff\n" : "log_r,brace_pred\n";
        char buf[160];
        for (double L : log_r) {
            const double pred = fde::expansion_brace(L, params, k0, a0_used);
            if (prof && L <= prof->s_max()) {
                const double num = fde::brace_numeric(*prof, L);
                std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e,%.16e\n", L, pred, num, L * (num - pred));
            } else if (compare) {
                std::snprintf(buf, sizeof buf, "%.16e,%.16e,nan,nan\n", L, pred);
            } else {
                std::snprintf(buf, sizeof buf, "%.16e,%.16e\n", L, pred);
            }
            text += buf;
        }
        log(Level::Info, "K0 = " + fmt("%.12g", k0) + ", a0 used = " + fmt("%.12g", a0_used));
        if (out.empty())
            std::fputs(text.c_str(), stdout);
        else
            write_text(out, text);
        return kExitOk;
    }
};

struct SimulateCmd {
    std::string config;
    std::string out_dir;
    std::map<std::string, std::string> overrides;

    void setup(CLI::App* app) {
        app->add_option("--config", config, "key = value run configuration");
        app->add_option("--out-dir", out_dir, "Directory for timeseries.csv and convergence.json")->required();
        for (const auto& key : fde::config_keys()) {
            app->add_option_function<std::string>(
                "--" + key, [this, key](const std::string& v) { overrides[key] = v; },
                "Overrides the '" + key + "' configuration key");
        }
    }

    int run() const {
        fde::SimulationConfig cfg;
        if (!config.empty()) {
            auto parsed = fde::parse_config(config);
            for (const auto& w : parsed.warnings) log(Level::Warn, w);
            cfg = parsed.config;
        }
        for (const auto& [key, value] : overrides) fde::apply_config_value(cfg, key, value);
        fde::ProblemParams{cfg.n, cfg.m, cfg.beta, 1.0}.validate();

        const std::filesystem::path dir = out_dir;
        std::filesystem::create_directories(dir);
        log(Level::Info, "integrating the (1,1) profile");
        const auto base = fde::integrate_profile({cfg.n, cfg.m, 1.0, 1.0},
                                                 profile_options(cfg.profile_s_end, cfg.profile_tol));

        nlohmann::ordered_json j;
        j["config"] = fde::to_json(cfg);
        bool pass = false;
        if (cfg.doubling_check) {
            log(Level::Info, "running R_max and 2 R_max");
            const auto d = fde::doubling_check(cfg, base);
            fde::write_timeseries_csv(d.base, dir / "timeseries.csv");
            fde::write_timeseries_csv(d.doubled, dir / "timeseries_doubled.csv");
            j["convergence"] = fde::to_json(d.base);
            j["doubling"] = {{"R_max_doubled", d.doubled.R_max},
                             {"center_change", d.center_change},
                             {"l1_change", d.l1_change},
                             {"sup_change", d.sup_change},
                             {"field_change", d.field_change},
                             {"margin", d.margin},
                             {"pass", d.pass}};
            pass = d.base.pass() && d.pass;
            std::printf("u~(0,T) = %.8f, lambda1 = %.8f, doubling %s\n", d.base.center_vals.back(), d.base.lambda1,
                        d.pass ? "pass" : "fail");
        } else {
            const auto r = fde::convergence_run(cfg, base);
            fde::write_timeseries_csv(r, dir / "timeseries.csv");
            j["convergence"] = fde::to_json(r);
            pass = r.pass();
            std::printf("u~(0,T) = %.8f, lambda1 = %.8f\n", r.center_vals.back(), r.lambda1);
        }
        write_text(dir / "convergence.json", fde::dump_json(j));
        std::printf("%s\n", pass ? "PASS" : "FAIL");
        return pass ? kExitOk : kExitVerification;
    }
};

struct CheckCmd {
    std::string suite = "all";
    bool slow = false;
    bool no_timestamp = false;
    std::string out;
    std::optional<int> n;
    std::optional<double> m;
    double beta = 1.0;
    double s_end = 1000.0;
    double tol = 1e-10;
    std::string config;

    void setup(CLI::App* app) {
        std::vector<std::string> names = fde::suite_names();
        names.push_back("all");
        app->add_option("--suite", suite, "Suite to run")->check(CLI::IsMember(names))->capture_default_str();
        app->add_flag("--slow", slow, "Include the PDE suite in 'all'");
        app->add_flag("--no-timestamp", no_timestamp, "Omit the timestamp from the report");
        app->add_option("--out", out, "Consolidated verification report (JSON)");
        auto* on = app->add_option("--n", n, "Restrict the profile and asymptotics suites to this n");
        auto* om = app->add_option("--m", m, "Exponent paired with --n");
        on->needs(om);
        om->needs(on);
        app->add_option("--beta", beta, "beta of a Yamabe-critical --n/--m selection")->capture_default_str();
        app->add_option("--s-end", s_end, "Profile integration end")->capture_default_str();
        app->add_option("--tol", tol, "Profile tolerance")->capture_default_str();
        app->add_option("--config", config, "Run configuration of the PDE suite");
    }

    int run() const {
        fde::SuiteOptions o;
        o.s_end = s_end;
        o.tol = tol;
        o.slow = slow;
        if (n) o.select(*n, *m, beta);
        if (!config.empty()) {
            auto parsed = fde::parse_config(config);
            for (const auto& w : parsed.warnings) log(Level::Warn, w);
            o.sim = parsed.config;
        }

        fde::VerificationReport report;
        report.provenance.tolerances = {{"profile_tol", tol},
                                        {"limit_tolerance", fde::kLimitTolerance},
                                        {"limit_tolerance_no_correction", fde::kLimitToleranceNoCorrection},
                                        {"limit_abs_floor", fde::kLimitAbsFloor}};
        report.provenance.grid = {{"s_end", s_end}};
        if (!no_timestamp) report.provenance.timestamp = utc_timestamp();

        std::vector<std::string> suites;
        if (suite == "all") {
            for (const auto& s : fde::suite_names())
                if (s != "pde" || slow) suites.push_back(s);
        } else {
            suites.push_back(suite);
        }
        for (const auto& s : suites) {
            if (s == "pde") {
                report.provenance.tolerances["center_tolerance"] = fde::kCenterTolerance;
                report.provenance.tolerances["contraction_slack"] = fde::kContractionSlack;
                report.provenance.grid["R_max"] = o.sim.R_max;
                report.provenance.grid["n_uniform"] = o.sim.n_uniform;
                report.provenance.grid["points_per_decade"] = o.sim.points_per_decade;
            }
            log(Level::Info, "suite " + s);
            try {
                fde::run_suite(s, o, report);
            } catch (...) {
                // Keep whatever finished before the failure.
                if (!out.empty()) {
                    fde::write_report(report, out);
                    log(Level::Error, "partial report written to " + out);
                }
                throw;
            }
        }

        for (const auto& e : report.limits)
            std::printf("%s limit %-40s %.8g vs %.8g\n", e.pass ? "PASS" : "FAIL", e.name.c_str(), e.extrapolated,
                        e.target);
        for (const auto& c : report.checks)
            std::printf("%s %s/%s: %s\n", c.informational ? "INFO" : c.pass ? "PASS" : "FAIL", c.suite.c_str(),
                        c.name.c_str(), c.detail.c_str());
        if (!out.empty()) fde::write_report(report, out);
        const bool ok = report.all_pass();
        std::printf("%s\n", ok ? "all checks passed" : "verification failed");
        return ok ? kExitOk : kExitVerification;
    }
};

}  // namespace

int main(int argc, char** argv) {
    init_logging();
    CLI::App app{"Self-similar fast-diffusion profiles: constants, profiles, asymptotics and PDE checks"};
    app.set_version_flag("--version", fde::kToolVersion);
    app.require_subcommand(1);

    ConstantsCmd constants;
    ProfileCmd profile;
    ExtractCmd extract;
    ExpandCmd expand;
    SimulateCmd simulate;
    CheckCmd check;
    auto* c_constants = app.add_subcommand("constants", "Closed-form constants and regime of (n, m, beta, lambda)");
    auto* c_profile = app.add_subcommand("profile", "Integrate a self-similar profile and write it as CSV");
    auto* c_extract = app.add_subcommand("extract", "Extract K, K0, a1, a0 and the limit report from a profile CSV");
    auto* c_expand = app.add_subcommand("expand", "Evaluate the large-r expansion brace");
    auto* c_simulate = app.add_subcommand("simulate", "Run the rescaled-convergence simulation");
    auto* c_check = app.add_subcommand("check", "Run verification suites and write a consolidated report");
    constants.setup(c_constants);
    profile.setup(c_profile);
    extract.setup(c_extract);
    expand.setup(c_expand);
    simulate.setup(c_simulate);
    check.setup(c_check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_constants->parsed()) return constants.run();
        if (c_profile->parsed()) return profile.run();
        if (c_extract->parsed()) return extract.run();
        if (c_expand->parsed()) return expand.run();
        if (c_simulate->parsed()) return simulate.run();
        if (c_check->parsed()) return check.run();
    } catch (const fde::Error& e) {
        std::fflush(stdout);
        const bool usage = is_usage_error(e.code());
        log(Level::Error, e.what());
        return usage ? kExitUsage : kExitRuntime;
    } catch (const std::exception& e) {
        std::fflush(stdout);
        log(Level::Error, e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}

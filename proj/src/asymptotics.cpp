#include "fde/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fde/error.hpp"
#include "fde/tail_fit.hpp"

namespace fde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int sign_of(double x) { return (x > 0) - (x < 0); }

// Tail window for the extrapolating fits: the last decade of the grid.
double window_start(double S) { return S / 10.0; }

}  // namespace

WDiagnostics WDiagnostics::from_samples(const ProblemParams& params, std::vector<double> s,
                                        const std::vector<double>& w, const std::vector<double>& ws) {
    const auto c = derive_constants(params);
    WDiagnostics d;
    d.params = params;
    d.c1_beta = c.c1 / params.beta;
    d.a2 = c.a2;
    d.A = c.h1_coeff;
    d.s = std::move(s);
    const std::size_t N = d.s.size();
    d.h.resize(N);
    d.h1.resize(N);
    d.hs.resize(N);
    d.h1s.resize(N);
    d.h2.assign(N, kNaN);
    d.h2s.assign(N, kNaN);
    for (std::size_t i = 0; i < N; ++i) {
        const double si = d.s[i];
        d.h[i] = w[i] - d.c1_beta * si;
        d.hs[i] = ws[i] - d.c1_beta;
        d.h1[i] = d.h[i] + d.a2 * std::log(si);
        d.h1s[i] = d.hs[i] + d.a2 / si;
    }
    return d;
}

void WDiagnostics::set_K(double K) {
    K_est = K;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double si = s[i];
        const double ls = std::log(si);
        h2[i] = h1[i] - K - A * (1.0 + ls) / si;
        // d/ds [(1 + log s)/s] = -log s / s^2
        h2s[i] = h1s[i] + A * ls / (si * si);
    }
}

WDiagnostics build_diagnostics(const Profile& profile) {
    std::vector<double> s, w, ws;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (profile.grid()[i] < 1.0) continue;
        s.push_back(profile.grid()[i]);
        w.push_back(profile.w()[i]);
        ws.push_back(profile.ws()[i]);
    }
    if (s.size() < 2) throw Error(ErrorCode::OutOfCoverage, "profile does not cover s >= 1");
    return WDiagnostics::from_samples(profile.params(), std::move(s), w, ws);
}

KExtraction extract_K(WDiagnostics& d) {
    const auto& p = d.params;
    if (p.regime() != Regime::FastSubcritical)
        throw Error(ErrorCode::DomainError, "K extraction needs m != (n-2)/(n+2)");
    if (d.s.empty() || d.s_end() < 100.0)
        throw Error(ErrorCode::DomainError, "K extraction needs the diagnostics to reach s >= 100");

    const double S = d.s_end();
    const double base = d.h1.back() - d.A * (1.0 + std::log(S)) / S;
    const double slope = (1.0 - p.m) / (2.0 * p.gap() * p.beta * S);

    KExtraction out;
    out.S = S;
    double K = d.h1.back();
    for (int it = 1; it <= 100; ++it) {
        const double next = base + slope * a1_of(K, p);
        const double delta = std::abs(next - K);
        K = next;
        if (delta <= 1e-12 * std::max(1.0, std::abs(K))) {
            out.iterations = it;
            out.K = K;
            out.a1 = a1_of(K, p);
            d.set_K(K);
            return out;
        }
    }
    throw Error(ErrorCode::NoConvergence, "K fixed point did not converge in 100 iterations at S = " +
                                              std::to_string(S));
}

KExtraction extract_K(const Profile& profile, WDiagnostics& diagnostics) {
    if (!(profile.params() == diagnostics.params))
        throw Error(ErrorCode::DomainError, "diagnostics were built for different parameters");
    return extract_K(diagnostics);
}

double extract_K0(const Profile& profile11) {
    const auto& p = profile11.params();
    if (p.lambda != 1.0 || p.beta != 1.0)
        throw Error(ErrorCode::DomainError, "K0 is defined from the (lambda, beta) = (1, 1) profile");
    auto diagnostics = build_diagnostics(profile11);
    const auto K = extract_K(diagnostics);
    return K0_from_K(K.K, 1.0, 1.0, p.n, p.m);
}

double expansion_brace(double log_r, const ProblemParams& params, double K0, double a0) {
    if (!(log_r > 1.0)) {
        std::ostringstream msg;
        msg << "expansion needs log r > 1, got " << log_r;
        throw Error(ErrorCode::DomainError, msg.str());
    }
    const auto c = derive_constants(params);
    const double llr = std::log(log_r);
    return log_r - c.kappa * llr + 0.5 * (1.0 - params.m) * std::log(params.lambda) +
           0.5 * std::log(params.beta) + K0 + a0 / log_r + c.kappa_sq * llr / log_r;
}

double scaled_a0(double a0, const ProblemParams& params) {
    const auto c = derive_constants(params);
    return a0 - c.kappa * (0.5 * (1.0 - params.m) * std::log(params.lambda) + 0.5 * std::log(params.beta));
}

double expansion_eval(double r, const ProblemParams& params, double K0, double a0) {
    if (!(r > std::exp(1.0))) throw Error(ErrorCode::DomainError, "expansion needs r > e");
    const auto c = derive_constants(params);
    return c.c1 / (params.beta * r * r) * expansion_brace(std::log(r), params, K0, a0);
}

double brace_numeric(const Profile& profile, double s) {
    const auto c = derive_constants(profile.params());
    return profile.params().beta * profile.w_at(s).w / c.c1;
}

LimitEntry make_limit_entry(std::string name, double target, double estimate, double extrapolated,
                            double tolerance, double abs_floor, double S) {
    LimitEntry e;
    e.name = std::move(name);
    e.target = target;
    e.estimate = estimate;
    e.extrapolated = extrapolated;
    e.tolerance = tolerance;
    e.abs_floor = abs_floor;
    e.S = S;
    const double err = std::abs(extrapolated - target);
    e.rel_error = target != 0.0 ? err / std::abs(target) : err;
    e.pass = err <= std::max(tolerance * std::abs(target), abs_floor);
    return e;
}

bool LimitReport::all_pass() const {
    for (const auto& e : entries)
        if (!e.pass) return false;
    return !entries.empty();
}

const LimitEntry* LimitReport::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

LimitReport limit_suite(const Profile& profile, const WDiagnostics& d) {
    const auto& p = d.params;
    const std::size_t last = d.size() - 1;
    const double S = d.s_end();
    const double lo = window_start(S);

    std::vector<double> seq(d.size());
    auto fill = [&](auto&& f) {
        for (std::size_t i = 0; i < d.size(); ++i) seq[i] = f(i);
    };

    LimitReport report;

    // w/s = c1/beta - a2 log s / s + h1/s
    fill([&](std::size_t i) { return (d.h[i] + d.c1_beta * d.s[i]) / d.s[i]; });
    auto fit = fit_tail(d.s, seq, {basis::log_s_over_s(), basis::inv_s()}, lo, S);
    report.entries.push_back(
        make_limit_entry("w_over_s", d.c1_beta, seq[last], fit.limit, kLimitTolerance, kLimitAbsFloor, S));

    // w_s = c1/beta - a2/s + O(log s / s^2)
    fill([&](std::size_t i) { return d.hs[i] + d.c1_beta; });
    fit = fit_tail(d.s, seq, {basis::inv_s(), basis::log_s_over_s2(), basis::inv_s2()}, lo, S);
    report.entries.push_back(
        make_limit_entry("w_s", d.c1_beta, seq[last], fit.limit, kLimitTolerance, kLimitAbsFloor, S));

    if (p.regime() == Regime::YamabeCritical) {
        report.entries.push_back(yamabe_limit_check(profile));
        return report;
    }

    // h/log s = -a2 + K/log s + O(1/s)
    fill([&](std::size_t i) { return d.h[i] / std::log(d.s[i]); });
    fit = fit_tail(d.s, seq, {basis::inv_log_s(), basis::inv_s(), basis::inv_s_log_s()}, lo, S);
    report.entries.push_back(
        make_limit_entry("h_over_log_s", -d.a2, seq[last], fit.limit, kLimitTolerance, kLimitAbsFloor, S));

    // s h_s = -a2 + O(log s / s)
    fill([&](std::size_t i) { return d.s_hs(i); });
    fit = fit_tail(d.s, seq, {basis::log_s_over_s(), basis::inv_s()}, lo, S);
    report.entries.push_back(
        make_limit_entry("s_hs", -d.a2, seq[last], fit.limit, kLimitTolerance, kLimitAbsFloor, S));

    // s^2 h1_s = -A log s + D + O(log s / s) with D the s^2 h2_s limit, so
    // the scaled sequence carries a D / log s correction.
    fill([&](std::size_t i) { return d.s2_h1s_over_log_s(i); });
    fit = fit_tail(d.s, seq, {basis::inv_log_s(), basis::inv_s(), basis::inv_s_log_s()}, lo, S);
    report.entries.push_back(make_limit_entry("s2_h1s_over_log_s", -d.A, seq[last], fit.limit, kLimitTolerance,
                                              kLimitAbsFloor, S));

    if (d.K_est) {
        const double a1 = a1_of(*d.K_est, p);
        const double target = (1.0 - p.m) * a1 / (2.0 * p.gap() * p.beta);
        const double plain = d.s2_h2s(last);
        report.entries.push_back(
            make_limit_entry("s2_h2s", target, plain, plain, kLimitToleranceNoCorrection, kLimitAbsFloor, S));
    }
    return report;
}

int eventual_sign(const std::vector<double>& s, const std::vector<double>& values) {
    if (values.empty()) return 0;
    const int final_sign = sign_of(values.back());
    for (std::size_t i = values.size(); i-- > 0;) {
        if (sign_of(values[i]) != final_sign) return s[i] > 0.5 * s.back() ? 0 : final_sign;
    }
    return final_sign;
}

SignVerdict sign_check(const WDiagnostics& d, const ProblemParams& params) {
    if (params.regime() != Regime::FastSubcritical)
        throw Error(ErrorCode::DomainError, "the eventual-sign check excludes m = (n-2)/(n+2)");
    SignVerdict v;
    v.eventual_sign = sign_of(d.hs.back());
    v.expected_sign = params.m < yamabe_exponent(params.n) ? -1 : 1;
    v.stabilizes_after = d.s.front();
    for (std::size_t i = d.size(); i-- > 0;) {
        if (sign_of(d.hs[i]) != v.eventual_sign) {
            v.stabilizes_after = d.s[i];
            break;
        }
    }
    if (v.eventual_sign == 0 || v.stabilizes_after > 0.5 * d.s_end()) {
        std::ostringstream msg;
        msg << "h_s changes sign at s = " << v.stabilizes_after << " of a tail ending at " << d.s_end();
        throw Error(ErrorCode::NoStabilization, msg.str());
    }
    v.matches = v.eventual_sign == v.expected_sign;
    return v;
}

LimitEntry yamabe_limit_check(const Profile& profile) {
    const auto& p = profile.params();
    if (p.regime() != Regime::YamabeCritical)
        throw Error(ErrorCode::DomainError, "the s^2 h_s limit applies at m = (n-2)/(n+2) only");
    const auto d = build_diagnostics(profile);
    const double target = (6.0 - p.n) * (p.n - 1.0) / (4.0 * p.beta);
    const double plain = d.s2_hs(d.size() - 1);
    return make_limit_entry("yamabe_s2_hs", target, plain, plain, kLimitTolerance, kLimitAbsFloor, d.s_end());
}

}  // namespace fde

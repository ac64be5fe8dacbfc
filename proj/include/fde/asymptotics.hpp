#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fde/constants.hpp"
#include "fde/profile.hpp"

namespace fde {

/// The h -> h1 -> h2 chain on the part of a profile grid with s >= 1.
///
///   h  = w - (c1/beta) s
///   h1 = h + a2 log s
///   h2 = h1 - K - A (1 + log s) / s
///
/// h2 and its derivative stay NaN until K has been extracted.
struct WDiagnostics {
    ProblemParams params;
    std::vector<double> s;
    std::vector<double> h, h1, h2;
    std::vector<double> hs, h1s, h2s;
    std::optional<double> K_est;

    double c1_beta = 0;
    double a2 = 0;
    double A = 0;

    std::size_t size() const { return s.size(); }
    double s_end() const { return s.back(); }

    /// Fills h2 and h2s for the given K.
    void set_K(double K);

    double s_hs(std::size_t i) const { return s[i] * hs[i]; }
    double s2_h1s_over_log_s(std::size_t i) const { return s[i] * s[i] * h1s[i] / std::log(s[i]); }
    double s2_h2s(std::size_t i) const { return s[i] * s[i] * h2s[i]; }
    double s2_hs(std::size_t i) const { return s[i] * s[i] * hs[i]; }

    /// Builds the chain from sampled (s, w, w_s); used by build_diagnostics
    /// and by synthetic-data tests.
    static WDiagnostics from_samples(const ProblemParams& params, std::vector<double> s,
                                     const std::vector<double>& w, const std::vector<double>& ws);
};

/// Diagnostics on the profile nodes with s >= 1.
WDiagnostics build_diagnostics(const Profile& profile);

struct KExtraction {
    double K = 0;
    double a1 = 0;
    double S = 0;
    int iterations = 0;
};

/// Fixed point of
///   K = h1(S) - A (1 + log S)/S + (1-m) a1(K) / (2 (n-2-nm) beta S)
/// at the last diagnostic node S. Stores K in the diagnostics (filling h2).
/// Throws NoConvergence after 100 iterations, DomainError if S < 100 or the
/// regime is Yamabe-critical.
KExtraction extract_K(WDiagnostics& diagnostics);
KExtraction extract_K(const Profile& profile, WDiagnostics& diagnostics);

/// K0 = (1-m) K(1,1) / (2 (n-1)(n-2-nm)) from the (lambda, beta) = (1, 1) profile.
double extract_K0(const Profile& profile11);

/// Brace of the large-r expansion of v^(1-m):
///   B = log r - kappa log log r + (1-m)/2 log lambda + 1/2 log beta + K0
///       + a0 / log r + kappa^2 log log r / log r.
/// Takes log r so that radii beyond double range can be evaluated.
/// Throws DomainError unless log r > 1.
double expansion_brace(double log_r, const ProblemParams& params, double K0, double a0);

/// Coefficient of 1/log r once the log log and 1/log terms of the (1,1)
/// expansion are re-expanded in log r after scaling:
///   a0 - kappa ((1-m)/2 log lambda + 1/2 log beta).
/// Equal to a0 when lambda^(1-m) beta = 1.
double scaled_a0(double a0, const ProblemParams& params);

/// Predicted v^(1-m) = c1 / (beta r^2) * B(r). Throws DomainError if r <= e.
double expansion_eval(double r, const ProblemParams& params, double K0, double a0);

/// Brace value implied by the profile: beta w(s) / c1.
double brace_numeric(const Profile& profile, double s);

struct LimitEntry {
    std::string name;
    double target = 0;
    double estimate = 0;      ///< scaled sequence at the largest s
    double extrapolated = 0;  ///< tail-fit limit, or the plain estimate
    double rel_error = 0;
    double tolerance = 0;     ///< relative
    double abs_floor = 0;     ///< absolute tolerance used when |target| is small
    double S = 0;
    bool pass = false;

    bool operator==(const LimitEntry&) const = default;
};

/// Decides pass: |extrapolated - target| <= max(tolerance |target|, abs_floor).
LimitEntry make_limit_entry(std::string name, double target, double estimate, double extrapolated,
                            double tolerance, double abs_floor, double S);

struct LimitReport {
    std::vector<LimitEntry> entries;
    bool all_pass() const;
    const LimitEntry* find(const std::string& name) const;
};

inline constexpr double kLimitTolerance = 1e-2;
inline constexpr double kLimitToleranceNoCorrection = 5e-2;
inline constexpr double kLimitAbsFloor = 1e-6;

/// Evaluates each limit of the far-field analysis at the tail. Requires
/// K to have been extracted for the s^2 h2_s entry (skipped otherwise).
/// Yamabe-critical profiles get the w/s, w_s and s^2 h_s entries.
LimitReport limit_suite(const Profile& profile, const WDiagnostics& diagnostics);

struct SignVerdict {
    double stabilizes_after = 0;  ///< last grid point at which h_s had the other sign (or first node)
    int eventual_sign = 0;
    int expected_sign = 0;
    bool matches = false;
};

/// Eventual sign of h_s vs the sign predicted from the position of m
/// relative to the Yamabe exponent. Throws DomainError for Yamabe input and
/// NoStabilization when the sign still changes in the last half of the tail.
SignVerdict sign_check(const WDiagnostics& diagnostics, const ProblemParams& params);

/// Eventual sign of h1_s over the tail (0 if it still changes sign in the
/// last half).
int eventual_sign(const std::vector<double>& s, const std::vector<double>& values);

/// s^2 h_s at the tail vs (6-n)(n-1)/(4 beta) for a Yamabe-critical profile.
LimitEntry yamabe_limit_check(const Profile& profile);

}  // namespace fde

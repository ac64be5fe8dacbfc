#include "fde/constants.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fde/error.hpp"

namespace fde {

namespace {

using ld = long double;

// The two gaps are computed once in extended precision and reused; every
// constant is a product of these and simple factors.
struct Gaps {
    ld n;
    ld m;
    ld d;  // n - 2 - n m
    ld e;  // n - 2 - (n+2) m
};

Gaps gaps(int n, double m) {
    const ld nn = n;
    const ld mm = m;
    return {nn, mm, nn - 2 - nn * mm, nn - 2 - (nn + 2) * mm};
}

}  // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidRegime: return "InvalidRegime";
        case ErrorCode::SeriesWindowExceeded: return "SeriesWindowExceeded";
        case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
        case ErrorCode::PositivityLoss: return "PositivityLoss";
        case ErrorCode::OutOfCoverage: return "OutOfCoverage";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NoStabilization: return "NoStabilization";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::NonpositiveBracket: return "NonpositiveBracket";
        case ErrorCode::NonlinearSolveFailure: return "NonlinearSolveFailure";
        case ErrorCode::CoverageExceeded: return "CoverageExceeded";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::UnknownKey: return "UnknownKey";
        case ErrorCode::TypeError: return "TypeError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::FastSubcritical: return "FastSubcritical";
        case Regime::YamabeCritical: return "YamabeCritical";
        case Regime::Invalid: return "Invalid";
    }
    return "Invalid";
}

double yamabe_exponent(int n) { return static_cast<double>(n - 2) / static_cast<double>(n + 2); }

Regime classify(int n, double m) {
    if (n < 3 || !(m > 0.0) || !(m < static_cast<double>(n - 2) / n)) return Regime::Invalid;
    if (std::abs(m - yamabe_exponent(n)) <= kYamabeTolerance) return Regime::YamabeCritical;
    return Regime::FastSubcritical;
}

double ProblemParams::gap() const { return static_cast<double>(gaps(n, m).d); }

double ProblemParams::yamabe_gap() const {
    // Snap to exact zero inside the critical window so downstream constants
    // (kappa, a2, b0, a3) vanish identically instead of carrying 1e-13 noise.
    if (regime() == Regime::YamabeCritical) return 0.0;
    return static_cast<double>(gaps(n, m).e);
}

void ProblemParams::validate() const {
    std::ostringstream msg;
    if (regime() == Regime::Invalid) {
        msg << "n = " << n << ", m = " << m << " outside n >= 3, 0 < m < (n-2)/n";
        if (n >= 3) msg << " = " << static_cast<double>(n - 2) / n;
        throw Error(ErrorCode::InvalidRegime, msg.str());
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        msg << "beta must be positive, got " << beta;
        throw Error(ErrorCode::InvalidRegime, msg.str());
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        msg << "lambda must be positive, got " << lambda;
        throw Error(ErrorCode::InvalidRegime, msg.str());
    }
}

DerivedConstants derive_constants(const ProblemParams& params) {
    params.validate();
    auto g = gaps(params.n, params.m);
    if (params.regime() == Regime::YamabeCritical) g.e = 0;
    const ld one_m = 1 - g.m;
    const ld beta = params.beta;

    DerivedConstants c;
    c.c1 = static_cast<double>(2 * (g.n - 1) * g.d / one_m);
    c.kappa = static_cast<double>(g.e / (2 * g.d));
    c.kappa_sq = static_cast<double>((g.e * g.e) / (4 * g.d * g.d));
    c.b0 = static_cast<double>(2 * (g.n - 1) * g.d * g.e / (one_m * one_m * beta));
    c.a2 = static_cast<double>((g.n - 1) * g.e / (one_m * beta));
    c.a3 = static_cast<double>((g.n - 1) * g.e * g.e / (one_m * one_m * beta));
    c.h1_coeff = static_cast<double>((g.n - 1) * g.e * g.e / (2 * g.d * one_m * beta));
    return c;
}

double a1_of(double K, const ProblemParams& params) {
    auto g = gaps(params.n, params.m);
    if (params.regime() == Regime::YamabeCritical) g.e = 0;
    const ld one_m = 1 - g.m;
    const ld first = 2 * (1 - 2 * g.m) * (g.n - 1) * g.d / (one_m * one_m);
    const ld second = (g.n - 1) * g.e * g.e / (one_m * one_m);
    const ld third = g.e / one_m * static_cast<ld>(K) * static_cast<ld>(params.beta);
    return static_cast<double>(first + second + third);
}

double a0_of(double a1_11, int n, double m) {
    const auto g = gaps(n, m);
    const ld one_m = 1 - g.m;
    const ld e = classify(n, m) == Regime::YamabeCritical ? 0 : g.e;
    const ld kappa_sq = e * e / (4 * g.d * g.d);
    return static_cast<double>(kappa_sq -
                               one_m * one_m * static_cast<ld>(a1_11) / (4 * (g.n - 1) * g.d * g.d));
}

double K_closed_form(double lambda, double beta, double K0, int n, double m) {
    const auto g = gaps(n, m);
    const ld one_m = 1 - g.m;
    const ld brace = one_m / 2 * std::log(static_cast<ld>(lambda)) +
                     std::log(static_cast<ld>(beta)) / 2 + static_cast<ld>(K0);
    return static_cast<double>(2 * (g.n - 1) * g.d / (one_m * beta) * brace);
}

double K0_from_K(double K, double lambda, double beta, int n, double m) {
    const auto g = gaps(n, m);
    const ld one_m = 1 - g.m;
    return static_cast<double>(one_m * static_cast<ld>(beta) * static_cast<ld>(K) / (2 * (g.n - 1) * g.d) -
                               one_m / 2 * std::log(static_cast<ld>(lambda)) -
                               std::log(static_cast<ld>(beta)) / 2);
}

void resolve_constants(DerivedConstants& constants, const ProblemParams& params, double K, double K0) {
    constants.K = K;
    constants.K0 = K0;
    constants.a1 = a1_of(K, params);
    const ProblemParams unit{params.n, params.m, 1.0, 1.0};
    const double K11 = K_closed_form(1.0, 1.0, K0, params.n, params.m);
    constants.a0 = a0_of(a1_of(K11, unit), params.n, params.m);
}

double lambda1_of(double K1, double K0, double beta, double m) {
    const ld one_m = 1 - static_cast<ld>(m);
    const ld log_lambda = (2 * (static_cast<ld>(K1) - static_cast<ld>(K0)) - std::log(static_cast<ld>(beta))) / one_m;
    return static_cast<double>(std::exp(log_lambda));
}

double lambda1_alternative(double K1, double K0, double beta, double m) {
    const ld one_m = 1 - static_cast<ld>(m);
    const ld log_lambda = (2 * static_cast<ld>(K1) / static_cast<ld>(K0) - std::log(static_cast<ld>(beta))) / one_m;
    return static_cast<double>(std::exp(log_lambda));
}

double unit_sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace fde

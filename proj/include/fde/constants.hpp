#pragma once

#include <optional>
#include <string_view>

namespace fde {

enum class Regime { FastSubcritical, YamabeCritical, Invalid };

std::string_view to_string(Regime regime);

/// Half-width of the window around m = (n-2)/(n+2) that is treated as the
/// Yamabe-critical exponent.
inline constexpr double kYamabeTolerance = 1e-12;

/// Total classification of an (n, m) pair. Valid pairs satisfy n >= 3 and
/// 0 < m < (n-2)/n.
Regime classify(int n, double m);

/// The quadruple (n, m, beta, lambda) that selects one self-similar profile.
struct ProblemParams {
    int n = 3;
    double m = 0.1;
    double beta = 1.0;
    double lambda = 1.0;

    Regime regime() const { return classify(n, m); }

    /// n - 2 - n m  (positive on the valid range).
    double gap() const;
    /// n - 2 - (n+2) m  (zero at the Yamabe exponent).
    double yamabe_gap() const;

    /// Throws Error(InvalidRegime) unless the regime is valid and
    /// beta, lambda are positive.
    void validate() const;

    bool operator==(const ProblemParams&) const = default;
};

/// Exponent m = (n-2)/(n+2).
double yamabe_exponent(int n);

/// Closed-form constants of the profile expansion. The K-dependent fields
/// stay empty until a K value has been extracted from a computed profile.
struct DerivedConstants {
    double c1 = 0;         ///< 2(n-1)(n-2-nm)/(1-m); w_s -> c1/beta
    double kappa = 0;      ///< (n-2-(n+2)m) / (2(n-2-nm)); log-log coefficient
    double kappa_sq = 0;   ///< kappa^2, coefficient of log log r / log r
    double b0 = 0;         ///< source constant of the h equation
    double a2 = 0;         ///< (n-1)(n-2-(n+2)m)/((1-m)beta); h1 = h + a2 log s
    double a3 = 0;         ///< (n-1)(n-2-(n+2)m)^2/((1-m)^2 beta)
    double h1_coeff = 0;   ///< A in h1 = K + A(1+log s)/s + ...
    std::optional<double> K;   ///< K(lambda, beta)
    std::optional<double> K0;  ///< universal constant term
    std::optional<double> a1;  ///< a1(lambda, beta)
    std::optional<double> a0;  ///< expansion coefficient of 1/log r

    bool operator==(const DerivedConstants&) const = default;
};

/// Evaluates every closed-form constant; valid in both regimes (b0, a2, a3
/// and kappa vanish at the Yamabe exponent). Throws Error(InvalidRegime).
DerivedConstants derive_constants(const ProblemParams& params);

/// Fills the K-dependent fields given K(lambda,beta) of `params` and K0.
void resolve_constants(DerivedConstants& constants, const ProblemParams& params,
                       double K, double K0);

/// a1(lambda, beta) as an affine function of K.
double a1_of(double K, const ProblemParams& params);

/// a0 from a1 evaluated at (lambda, beta) = (1, 1).
double a0_of(double a1_11, int n, double m);

/// K(lambda, beta) predicted from the universal constant K0.
double K_closed_form(double lambda, double beta, double K0, int n, double m);

/// Inverse of K_closed_form: K0 implied by a K extracted at (lambda, beta).
double K0_from_K(double K, double lambda, double beta, int n, double m);

/// Amplitude of the limit profile selected by a far-field constant K1:
/// (exp(2(K1 - K0)) / beta)^(1/(1-m)).
double lambda1_of(double K1, double K0, double beta, double m);

/// The variant (exp(2 K1 / K0) / beta)^(1/(1-m)). Kept only so the simulator
/// can show which of the two amplitudes the flow actually selects.
double lambda1_alternative(double K1, double K0, double beta, double m);

/// Surface area of the unit sphere in R^n.
double unit_sphere_area(int n);

}  // namespace fde

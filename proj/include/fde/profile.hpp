#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fde/constants.hpp"

namespace fde {

/// Quadratic expansion v(r) = lambda + c2 r^2 + O(r^4) of the profile at the
/// origin.
struct OriginSeries {
    double lambda = 1;
    double beta = 1;
    int n = 3;
    double m = 0.1;
    double c2 = 0;

    static OriginSeries of(const ProblemParams& params);

    /// |c2| r^2 / lambda, the relative size of the quadratic correction.
    double relative_correction(double r) const;
};

/// Largest relative correction |c2| r0^2 / lambda for which the truncated
/// series is accepted.
inline constexpr double kSeriesWindow = 1e-6;

struct SeriesValue {
    double v;
    double v_r;
};

/// Series value and slope at r0. Throws SeriesWindowExceeded outside the
/// validity window.
SeriesValue series_origin(const ProblemParams& params, double r0);

/// Start radius with |c2| r0^2 / lambda = min(1e-8, tol).
double default_start_radius(const ProblemParams& params, double tol);

/// Right-hand side of the log-radius profile equation
///   w_ss = (1-2m)/(1-m) w_s^2/w - (n-2-(n+2)m)/(1-m) w_s
///          + beta/(n-1) (c1/beta - w_s) w.
double w_equation_rhs(const ProblemParams& params, double w, double w_s);

/// The three terms of the right-hand side with the last product split in
/// two, used to normalise residual checks.
struct WEquationTerms {
    double quadratic;
    double damping;
    double source;
    double coupling;
    double sum() const { return quadratic + damping + source + coupling; }
    double magnitude() const;
};
WEquationTerms w_equation_terms(const ProblemParams& params, double w, double w_s);

/// A profile v_{lambda,beta} sampled in the variables s = log r,
/// w(s) = r^2 v(r)^(1-m). Immutable once constructed.
class Profile {
public:
    Profile(ProblemParams params, std::vector<double> s, std::vector<double> w,
            std::vector<double> ws, double tol);

    const ProblemParams& params() const { return params_; }
    std::span<const double> grid() const { return s_; }
    std::span<const double> w() const { return w_; }
    std::span<const double> ws() const { return ws_; }
    double tol() const { return tol_; }
    std::size_t size() const { return s_.size(); }
    double s_min() const { return s_.front(); }
    double s_max() const { return s_.back(); }

    struct WPoint {
        double w;
        double ws;
    };

    /// (w, w_s) at s, by quintic Hermite interpolation on the bracketing
    /// interval (w_ss at nodes comes from the equation itself). Exact at
    /// nodes. Throws OutOfCoverage.
    WPoint w_at(double s) const;

    /// v(r). Points left of the first node use the origin series; r is
    /// converted to s only when the result is representable (s <= 700).
    double v_at(double r) const;

    /// Index of the last node with grid()[i] <= s.
    std::size_t locate(double s) const;

    bool operator==(const Profile& other) const;

private:
    ProblemParams params_;
    std::vector<double> s_;
    std::vector<double> w_;
    std::vector<double> ws_;
    double tol_;
};

struct ProfileOptions {
    double s_end = 1000.0;
    double tol = 1e-10;
    /// Defaults to log(default_start_radius(params, tol)).
    double s_start = 0.0;
    bool explicit_start = false;
    /// Largest step accepted in s; keeps the stored grid fine enough for
    /// finite-difference residual checks on the exponential branch.
    double max_step = 0.02;
    /// Relative cap applied for s > 1: step <= max_step_rel * s.
    double max_step_rel = 0.02;
    /// Nodes the integrator must land on (only those inside the range).
    std::vector<double> forced_nodes = default_forced_nodes();

    static std::vector<double> default_forced_nodes();
};

/// Integrates the profile equation from the origin series at s_start to
/// s_end. Throws StepSizeUnderflow or PositivityLoss.
Profile integrate_profile(const ProblemParams& params, double s_start, double s_end, double tol);
Profile integrate_profile(const ProblemParams& params, const ProfileOptions& options);

/// v_{lambda,beta}(r) from the (1,1) profile by the scaling identity
///   v_{lambda,beta}(r) = lambda v_{1,1}(lambda^((1-m)/2) sqrt(beta) r).
double scaled_eval(const Profile& base, double lambda, double beta, double r);

/// Largest radius at which v can be queried.
double max_radius(const Profile& profile);

}  // namespace fde

#include "fde/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include "fde/error.hpp"

namespace fde {

OriginSeries OriginSeries::of(const ProblemParams& params) {
    params.validate();
    OriginSeries series;
    series.lambda = params.lambda;
    series.beta = params.beta;
    series.n = params.n;
    series.m = params.m;
    // Matching the r^0 terms of the radial equation for v = lambda + c2 r^2:
    //   2n(n-1) lambda^(m-1) c2 + 2 beta lambda / (1-m) = 0.
    series.c2 = -params.beta * std::pow(params.lambda, 2.0 - params.m) /
                (params.n * (params.n - 1) * (1.0 - params.m));
    return series;
}

double OriginSeries::relative_correction(double r) const { return std::abs(c2) * r * r / lambda; }

SeriesValue series_origin(const ProblemParams& params, double r0) {
    const auto series = OriginSeries::of(params);
    if (!(r0 >= 0.0) || series.relative_correction(r0) > kSeriesWindow) {
        std::ostringstream msg;
        msg << "r0 = " << r0 << " gives |c2| r0^2 / lambda = " << series.relative_correction(r0)
            << " > " << kSeriesWindow;
        throw Error(ErrorCode::SeriesWindowExceeded, msg.str());
    }
    return {series.lambda + series.c2 * r0 * r0, 2.0 * series.c2 * r0};
}

double default_start_radius(const ProblemParams& params, double tol) {
    const auto series = OriginSeries::of(params);
    const double window = std::min(1e-8, tol);
    return std::sqrt(window * series.lambda / std::abs(series.c2));
}

WEquationTerms w_equation_terms(const ProblemParams& params, double w, double w_s) {
    const double m = params.m;
    const double n1 = params.n - 1.0;
    const double c1 = 2.0 * n1 * params.gap() / (1.0 - m);
    WEquationTerms t{};
    t.quadratic = (1.0 - 2.0 * m) / (1.0 - m) * w_s * w_s / w;
    t.damping = -params.yamabe_gap() / (1.0 - m) * w_s;
    t.source = c1 / n1 * w;
    t.coupling = -params.beta / n1 * w_s * w;
    return t;
}

double WEquationTerms::magnitude() const {
    return std::abs(quadratic) + std::abs(damping) + std::abs(source) + std::abs(coupling);
}

double w_equation_rhs(const ProblemParams& params, double w, double w_s) {
    const double m = params.m;
    const double n1 = params.n - 1.0;
    const double c1_beta = 2.0 * n1 * params.gap() / ((1.0 - m) * params.beta);
    // Written with (c1/beta - w_s) factored so the near-cancellation on the
    // far tail happens in one subtraction.
    return (1.0 - 2.0 * m) / (1.0 - m) * w_s * w_s / w - params.yamabe_gap() / (1.0 - m) * w_s +
           params.beta / n1 * (c1_beta - w_s) * w;
}

// ---------------------------------------------------------------------------
// Profile

Profile::Profile(ProblemParams params, std::vector<double> s, std::vector<double> w,
                 std::vector<double> ws, double tol)
    : params_(params), s_(std::move(s)), w_(std::move(w)), ws_(std::move(ws)), tol_(tol) {
    params_.validate();
    if (s_.size() < 2 || w_.size() != s_.size() || ws_.size() != s_.size())
        throw Error(ErrorCode::SchemaMismatch, "profile needs at least two nodes and equal column lengths");
    for (std::size_t i = 0; i < s_.size(); ++i) {
        if (!std::isfinite(s_[i]) || !std::isfinite(w_[i]) || !std::isfinite(ws_[i]))
            throw Error(ErrorCode::NonFiniteValue, "profile node " + std::to_string(i));
        if (!(w_[i] > 0.0)) throw Error(ErrorCode::PositivityLoss, "w <= 0 at node " + std::to_string(i));
        if (i > 0 && !(s_[i] > s_[i - 1]))
            throw Error(ErrorCode::SchemaMismatch, "grid not strictly increasing at node " + std::to_string(i));
    }
}

bool Profile::operator==(const Profile& other) const {
    return params_ == other.params_ && s_ == other.s_ && w_ == other.w_ && ws_ == other.ws_ && tol_ == other.tol_;
}

std::size_t Profile::locate(double s) const {
    if (s < s_.front() || s > s_.back()) {
        std::ostringstream msg;
        msg << "s = " << s << " outside [" << s_.front() << ", " << s_.back() << "]";
        throw Error(ErrorCode::OutOfCoverage, msg.str());
    }
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    return static_cast<std::size_t>(std::distance(s_.begin(), it)) - 1;
}

Profile::WPoint Profile::w_at(double s) const {
    const std::size_t i = locate(s);
    if (s == s_[i] || i + 1 == s_.size()) return {w_[i], ws_[i]};

    const double h = s_[i + 1] - s_[i];
    const double t = (s - s_[i]) / h;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double wss0 = w_equation_rhs(params_, w_[i], ws_[i]);
    const double wss1 = w_equation_rhs(params_, w_[i + 1], ws_[i + 1]);

    const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double H2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
    const double H3 = 10 * t3 - 15 * t4 + 6 * t5;
    const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
    const double H5 = 0.5 * (t3 - 2 * t4 + t5);

    const double D0 = -30 * t2 + 60 * t3 - 30 * t4;
    const double D1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    const double D2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
    const double D3 = -D0;
    const double D4 = -12 * t2 + 28 * t3 - 15 * t4;
    const double D5 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);

    const double w = w_[i] * H0 + h * ws_[i] * H1 + h * h * wss0 * H2 + w_[i + 1] * H3 + h * ws_[i + 1] * H4 +
                     h * h * wss1 * H5;
    const double dw = (w_[i] * D0 + w_[i + 1] * D3) / h + ws_[i] * D1 + ws_[i + 1] * D4 +
                      h * (wss0 * D2 + wss1 * D5);
    return {w, dw};
}

double Profile::v_at(double r) const {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::OutOfCoverage, "radius must be finite and >= 0");
    if (r == 0.0) return params_.lambda;
    const double s = std::log(r);
    if (s < s_.front()) {
        const auto series = OriginSeries::of(params_);
        return series.lambda + series.c2 * r * r;
    }
    const double w = w_at(s).w;
    // v^(1-m) = w e^{-2s}; combine in log space so v stays representable
    // after w e^{-2s} itself would underflow.
    return std::exp((std::log(w) - 2.0 * s) / (1.0 - params_.m));
}

double max_radius(const Profile& profile) { return std::exp(std::min(profile.s_max(), 700.0)); }

// ---------------------------------------------------------------------------
// Integration

namespace {

// The second state component is w_s while w_s is small (near the origin its
// relative precision matters) and g = w_s - c1/beta afterwards: g decays like
// 1/s on the far tail, so a relative tolerance on g resolves the quantities
// the asymptotic analysis needs.
struct WSystem {
    double c1_beta;
    double q;  // (1-2m)/(1-m)
    double p;  // (n-2-(n+2)m)/(1-m)
    double k;  // beta/(n-1)
    bool deviation = false;

    explicit WSystem(const ProblemParams& prm)
        : c1_beta(2.0 * (prm.n - 1.0) * prm.gap() / ((1.0 - prm.m) * prm.beta)),
          q((1.0 - 2.0 * prm.m) / (1.0 - prm.m)),
          p(prm.yamabe_gap() / (1.0 - prm.m)),
          k(prm.beta / (prm.n - 1.0)) {}

    double slope(const double x[]) const { return deviation ? x[1] + c1_beta : x[1]; }
    double gap(const double x[]) const { return deviation ? -x[1] : c1_beta - x[1]; }

    static int rhs(double /*s*/, const double x[], double dxdt[], void* self) {
        const auto& sys = *static_cast<const WSystem*>(self);
        const double w = x[0];
        const double ws = sys.slope(x);
        dxdt[0] = ws;
        dxdt[1] = sys.q * ws * ws / w - sys.p * ws + sys.k * sys.gap(x) * w;
        return GSL_SUCCESS;
    }

    static int jacobian(double /*s*/, const double x[], double* dfdx, double dfdt[], void* self) {
        const auto& sys = *static_cast<const WSystem*>(self);
        const double w = x[0];
        const double ws = sys.slope(x);
        dfdx[0] = 0.0;
        dfdx[1] = 1.0;
        dfdx[2] = -sys.q * ws * ws / (w * w) + sys.k * sys.gap(x);
        dfdx[3] = 2.0 * sys.q * ws / w - sys.p - sys.k * w;
        dfdt[0] = 0.0;
        dfdt[1] = 0.0;
        return GSL_SUCCESS;
    }
};

template <auto Free>
struct GslDeleter {
    template <class T>
    void operator()(T* ptr) const { Free(ptr); }
};

using StepPtr = std::unique_ptr<gsl_odeiv2_step, GslDeleter<gsl_odeiv2_step_free>>;
using ControlPtr = std::unique_ptr<gsl_odeiv2_control, GslDeleter<gsl_odeiv2_control_free>>;
using EvolvePtr = std::unique_ptr<gsl_odeiv2_evolve, GslDeleter<gsl_odeiv2_evolve_free>>;

}  // namespace

std::vector<double> ProfileOptions::default_forced_nodes() {
    std::vector<double> nodes;
    for (double decade = 1.0; decade <= 1e6; decade *= 10.0)
        for (double mult : {1.0, 2.0, 5.0}) nodes.push_back(mult * decade);
    return nodes;
}

Profile integrate_profile(const ProblemParams& params, double s_start, double s_end, double tol) {
    ProfileOptions options;
    options.s_start = s_start;
    options.explicit_start = true;
    options.s_end = s_end;
    options.tol = tol;
    return integrate_profile(params, options);
}

Profile integrate_profile(const ProblemParams& params, const ProfileOptions& options) {
    params.validate();
    if (!(options.tol > 0.0)) throw Error(ErrorCode::DomainError, "tol must be positive");
    const double s_start =
        options.explicit_start ? options.s_start : std::log(default_start_radius(params, options.tol));
    if (!(options.s_end >= s_start)) throw Error(ErrorCode::DomainError, "s_end must be >= s_start");

    const double r0 = std::exp(s_start);
    const SeriesValue start = series_origin(params, r0);

    WSystem sys(params);
    gsl_odeiv2_system system{&WSystem::rhs, &WSystem::jacobian, 2, &sys};

    // w = r^2 v^(1-m) and w_s = w (2 + (1-m) r v_r / v).
    double x[2];
    x[0] = r0 * r0 * std::pow(start.v, 1.0 - params.m);
    x[1] = x[0] * (2.0 + (1.0 - params.m) * r0 * start.v_r / start.v);

    std::vector<double> s_nodes{s_start};
    std::vector<double> w_nodes{x[0]};
    std::vector<double> ws_nodes{x[1]};

    std::vector<double> forced;
    for (double f : options.forced_nodes)
        if (f > s_start && f < options.s_end) forced.push_back(f);
    forced.push_back(options.s_end);
    std::sort(forced.begin(), forced.end());
    forced.erase(std::unique(forced.begin(), forced.end()), forced.end());

    // Mostly relative control; the absolute floor only matters if g passes
    // through zero.
    StepPtr step(gsl_odeiv2_step_alloc(gsl_odeiv2_step_bsimp, 2));
    ControlPtr control(gsl_odeiv2_control_y_new(options.tol * 1e-6, options.tol));
    EvolvePtr evolve(gsl_odeiv2_evolve_alloc(2));

    double s = s_start;
    double ds = std::min(options.max_step, 1e-3);
    const double min_step = 1e-13;

    for (double target : forced) {
        while (s < target) {
            const double cap = s > 1.0 ? std::max(options.max_step, options.max_step_rel * s) : options.max_step;
            ds = std::min(ds, cap);
            const int status = gsl_odeiv2_evolve_apply(evolve.get(), control.get(), step.get(), &system, &s,
                                                       target, &ds, x);
            if (status != GSL_SUCCESS || ds < min_step * std::max(1.0, std::abs(s))) {
                std::ostringstream msg;
                msg << "step " << ds << " at s = " << s << " (status " << status << ")";
                throw Error(ErrorCode::StepSizeUnderflow, msg.str());
            }
            if (!(x[0] > 0.0) || !std::isfinite(x[0]) || !std::isfinite(x[1])) {
                std::ostringstream msg;
                msg << "w = " << x[0] << " at s = " << s;
                throw Error(ErrorCode::PositivityLoss, msg.str());
            }
            s_nodes.push_back(s);
            w_nodes.push_back(x[0]);
            ws_nodes.push_back(sys.slope(x));
            if (!sys.deviation && x[1] >= 0.5 * sys.c1_beta) {
                sys.deviation = true;
                x[1] -= sys.c1_beta;
                gsl_odeiv2_step_reset(step.get());
                gsl_odeiv2_evolve_reset(evolve.get());
            }
        }
    }

    return Profile(params, std::move(s_nodes), std::move(w_nodes), std::move(ws_nodes), options.tol);
}

double scaled_eval(const Profile& base, double lambda, double beta, double r) {
    const auto& p = base.params();
    if (p.lambda != 1.0 || p.beta != 1.0)
        throw Error(ErrorCode::DomainError, "scaled_eval needs the (lambda, beta) = (1, 1) profile");
    if (!(lambda > 0.0) || !(beta > 0.0)) throw Error(ErrorCode::DomainError, "lambda and beta must be positive");
    const double stretch = std::pow(lambda, 0.5 * (1.0 - p.m)) * std::sqrt(beta);
    const double rho = stretch * r;
    if (rho > max_radius(base)) {
        std::ostringstream msg;
        msg << "scaled radius " << rho << " beyond profile coverage " << max_radius(base);
        throw Error(ErrorCode::OutOfCoverage, msg.str());
    }
    return lambda * base.v_at(rho);
}

}  // namespace fde

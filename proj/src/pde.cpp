#include "fde/pde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "fde/asymptotics.hpp"
#include "fde/error.hpp"

namespace fde {

namespace {

constexpr double kE2 = 7.38905609893065;

// 8-point Gauss-Legendre on [-1, 1]; exact for polynomials of degree <= 15,
// i.e. |linear| * r^(n-1) for n <= 15.
constexpr std::array<double, 4> kGaussX = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                           0.9602898564975363};
constexpr std::array<double, 4> kGaussW = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                           0.1012285362903763};

// Integral of p(r) r^(n-1) over [a, b] for p linear with p(a) = pa, p(b) = pb.
double weighted_linear(double a, double b, double pa, double pb, int n) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0;
    for (std::size_t k = 0; k < kGaussX.size(); ++k) {
        for (double sgn : {-1.0, 1.0}) {
            const double x = sgn * kGaussX[k];
            const double r = mid + half * x;
            const double p = pa + (pb - pa) * 0.5 * (1.0 + x);
            sum += kGaussW[k] * p * std::pow(r, n - 1);
        }
    }
    return half * sum;
}

// Integral of |p| r^(n-1), splitting at the sign change of p.
double weighted_abs_linear(double a, double b, double pa, double pb, int n) {
    if ((pa >= 0 && pb >= 0) || (pa <= 0 && pb <= 0)) return std::abs(weighted_linear(a, b, pa, pb, n));
    const double c = a + (b - a) * pa / (pa - pb);
    return std::abs(weighted_linear(a, c, pa, 0.0, n)) + std::abs(weighted_linear(c, b, 0.0, pb, n));
}

std::vector<double> union_nodes(const RadialField& f, const RadialField& g, double R) {
    std::vector<double> nodes;
    nodes.reserve(f.r.size() + g.r.size() + 1);
    for (double x : f.r)
        if (x < R) nodes.push_back(x);
    for (double x : g.r)
        if (x < R) nodes.push_back(x);
    nodes.push_back(R);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

void check_radius(const RadialField& f, const RadialField& g, double R) {
    if (!(R > 0.0)) throw Error(ErrorCode::DomainError, "distance radius must be positive");
    const double cover = std::min(f.R(), g.R());
    if (R > cover * (1.0 + 1e-14)) {
        std::ostringstream msg;
        msg << "radius " << R << " beyond field coverage " << cover;
        throw Error(ErrorCode::OutOfCoverage, msg.str());
    }
    if (f.r.front() != 0.0 || g.r.front() != 0.0)
        throw Error(ErrorCode::DomainError, "distance needs fields starting at r = 0");
}

void validate_field(const RadialField& f) {
    if (f.r.size() < 3 || f.r.size() != f.u.size())
        throw Error(ErrorCode::DomainError, "field needs matching grid and values with at least 3 nodes");
    for (std::size_t j = 1; j < f.r.size(); ++j)
        if (!(f.r[j] > f.r[j - 1])) throw Error(ErrorCode::DomainError, "field grid must be strictly increasing");
    for (double v : f.u) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "field holds a non-finite value");
        if (!(v > 0.0)) throw Error(ErrorCode::PositivityLoss, "field must be positive");
    }
}

// Tridiagonal solve (Thomas); sub[0] and sup[N-1] are ignored.
template <class Real>
void thomas(std::vector<Real>& sub, std::vector<Real>& diag, std::vector<Real>& sup, std::vector<Real>& rhs) {
    const std::size_t N = diag.size();
    for (std::size_t i = 1; i < N; ++i) {
        const Real w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[N - 1] /= diag[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

bool nonincreasing(const std::vector<double>& values, std::size_t from, double slack) {
    for (std::size_t k = from + 1; k < values.size(); ++k)
        if (values[k] > values[k - 1] * (1.0 + slack)) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> make_radial_grid(const GridSpec& spec) {
    if (!(spec.R_max > 1.0)) throw Error(ErrorCode::DomainError, "R_max must exceed 1");
    if (spec.n_uniform < 2 || spec.points_per_decade < 1)
        throw Error(ErrorCode::DomainError, "grid needs n_uniform >= 2 and points_per_decade >= 1");
    std::vector<double> r;
    for (int j = 0; j <= spec.n_uniform; ++j) r.push_back(static_cast<double>(j) / spec.n_uniform);
    const double decades = std::log10(spec.R_max);
    const int count = std::max(1, static_cast<int>(std::ceil(spec.points_per_decade * decades)));
    for (int k = 1; k < count; ++k) r.push_back(std::pow(10.0, decades * k / count));
    r.push_back(spec.R_max);
    return r;
}

double RadialField::value_at(double radius) const {
    if (radius < 0.0 || radius > R()) {
        std::ostringstream msg;
        msg << "radius " << radius << " outside field coverage [0, " << R() << "]";
        throw Error(ErrorCode::OutOfCoverage, msg.str());
    }
    auto it = std::upper_bound(r.begin(), r.end(), radius);
    if (it == r.end()) return u.back();
    const auto j = static_cast<std::size_t>(it - r.begin());
    const double theta = (radius - r[j - 1]) / (r[j] - r[j - 1]);
    return u[j - 1] + theta * (u[j] - u[j - 1]);
}

RadialField sample_field(const std::vector<double>& grid, const std::function<double(double)>& f, int n,
                         double m, double beta, double t) {
    RadialField out;
    out.r = grid;
    out.u.reserve(grid.size());
    for (double x : grid) out.u.push_back(f(x));
    out.t = t;
    out.n = n;
    out.m = m;
    out.beta = beta;
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(TailMode mode) { return mode == TailMode::Bare ? "bare" : "corrected"; }

TailMode tail_mode_from_string(std::string_view text) {
    if (text == "bare") return TailMode::Bare;
    if (text == "corrected") return TailMode::Corrected;
    throw Error(ErrorCode::TypeError, "tail mode must be 'bare' or 'corrected', got '" + std::string(text) + "'");
}

double Bump::operator()(double r) const {
    if (r >= radius) return 0.0;
    const double x = r / radius;
    const double q = 1.0 - x * x;
    return amplitude * q * q;
}

double initial_bracket(double r, int n, double m, const InitialData& data) {
    const auto c = derive_constants({n, m, 1.0, 1.0});
    const double L = std::log(r);
    const double LL = std::log(L);
    double b = L - c.kappa * LL + data.K1;
    if (data.tail == TailMode::Corrected) b += data.a0 / L + c.kappa_sq * LL / L;
    return b;
}

RadialField build_initial(int n, double m, double beta, const InitialData& data, const std::vector<double>& grid) {
    ProblemParams p{n, m, beta, 1.0};
    p.validate();
    if (!(data.r_a >= kE2 * (1.0 - 1e-15)))
        throw Error(ErrorCode::DomainError, "initial data needs r_a >= e^2");
    const auto c = derive_constants(p);
    auto tail = [&](double r) {
        const double b = initial_bracket(r, n, m, data);
        if (!(b > 0.0)) {
            std::ostringstream msg;
            msg << "tail bracket " << b << " <= 0 at r = " << r;
            throw Error(ErrorCode::NonpositiveBracket, msg.str());
        }
        return std::pow(c.c1 / (beta * r * r) * b, 1.0 / (1.0 - m));
    };
    const double cap = tail(data.r_a);
    auto f = [&](double r) {
        double u = r >= data.r_a ? tail(r) : cap;
        if (data.psi) u += (*data.psi)(r);
        return u;
    };
    auto field = sample_field(grid, f, n, m, beta, 0.0);
    validate_field(field);
    return field;
}

bool tail_monotone(const RadialField& field, double r_from) {
    for (std::size_t j = 1; j < field.r.size(); ++j)
        if (field.r[j - 1] >= r_from && field.u[j] > field.u[j - 1]) return false;
    return true;
}

// ---------------------------------------------------------------------------

std::vector<double> control_volumes(const std::vector<double>& r, int n) {
    const std::size_t N = r.size();
    std::vector<double> V(N);
    const double omega = unit_sphere_area(n);
    double left = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        const double right = j + 1 < N ? 0.5 * (r[j] + r[j + 1]) : r[j];
        V[j] = omega * (std::pow(right, n) - std::pow(left, n)) / n;
        left = right;
    }
    return V;
}

RadialSolver::RadialSolver(RadialField initial, StepControl control, OuterBoundary boundary)
    : field_(std::move(initial)), control_(control), boundary_(std::move(boundary)) {
    validate_field(field_);
    if (!(control_.dt_initial > 0.0) || !(control_.dt_max >= control_.dt_initial) || !(control_.dt_min > 0.0))
        throw Error(ErrorCode::DomainError, "step control needs 0 < dt_initial <= dt_max and dt_min > 0");
    u_boundary0_ = field_.u.back();
    dt_ = control_.dt_initial;

    const auto& r = field_.r;
    const std::size_t N = r.size();
    const double omega = unit_sphere_area(field_.n);
    for (double v : control_volumes(r, field_.n)) volume_.push_back(v / omega);
    face_.resize(N - 1);
    for (std::size_t j = 0; j + 1 < N; ++j) {
        const long double rf = 0.5L * (static_cast<long double>(r[j]) + r[j + 1]);
        face_[j] = (field_.n - 1.0L) / field_.m * std::pow(rf, field_.n - 1) / (r[j + 1] - r[j]);
    }
    state_.assign(field_.u.begin(), field_.u.end());
}

double RadialSolver::boundary_value(double t) const { return boundary_ ? boundary_(t) : u_boundary0_; }

bool RadialSolver::try_step(double dt) {
    using real = long double;
    const real m = field_.m;
    const real inv_m = 1.0L / m;
    const std::size_t J = state_.size() - 1;  // Dirichlet node
    const auto& u_old = state_;

    const double ub = zero_flux_outer_ ? 1.0 : boundary_value(field_.t + dt);
    if (!(ub > 0.0) || !std::isfinite(ub)) throw Error(ErrorCode::DomainError, "outer boundary value must be positive");
    const real phi_b = std::pow(static_cast<real>(ub), m);
    const std::size_t U = zero_flux_outer_ ? J + 1 : J;  // unknowns

    std::vector<real> phi(U);
    for (std::size_t j = 0; j < U; ++j) phi[j] = std::pow(u_old[j], m);

    std::vector<real> sub(U), diag(U), sup(U), rhs(U);
    bool polished = false;
    for (int it = 1; it <= control_.max_newton; ++it) {
        ++stats_.newton_iterations;
        for (std::size_t j = 0; j < U; ++j) {
            const real right = j + 1 < U ? phi[j + 1] : phi_b;
            const real flux_r = j < J ? face_[j] * (right - phi[j]) : 0.0L;
            const real flux_l = j > 0 ? face_[j - 1] * (phi[j] - phi[j - 1]) : 0.0L;
            const real u = std::pow(phi[j], inv_m);
            const real mass = volume_[j] / dt;
            rhs[j] = -(mass * (u - u_old[j]) - (flux_r - flux_l));
            diag[j] = mass * inv_m * u / phi[j] + (j < J ? face_[j] : 0.0L) + (j > 0 ? face_[j - 1] : 0.0L);
            sub[j] = j > 0 ? -face_[j - 1] : 0.0L;
            sup[j] = j + 1 < U ? -face_[j] : 0.0L;
        }
        thomas(sub, diag, sup, rhs);

        // Damped update keeping phi positive.
        real damp = 1.0L;
        for (std::size_t j = 0; j < U; ++j)
            if (phi[j] + rhs[j] < 0.5L * phi[j]) damp = std::min(damp, -0.5L * phi[j] / rhs[j]);
        real change = 0.0L;
        for (std::size_t j = 0; j < U; ++j) {
            change = std::max(change, std::abs(rhs[j]) / phi[j]);
            phi[j] += damp * rhs[j];
        }
        if (!std::isfinite(change)) return false;
        if (polished) {
            for (std::size_t j = 0; j < U; ++j) state_[j] = std::pow(phi[j], inv_m);
            if (!zero_flux_outer_) state_[J] = ub;
            for (std::size_t j = 0; j <= J; ++j) field_.u[j] = static_cast<double>(state_[j]);
            field_.t += dt;
            ++stats_.steps;
            return true;
        }
        // One extra iteration after convergence brings the solve down to
        // round-off, so the discrete contraction holds to that level.
        if (damp == 1.0L && change <= control_.newton_tol) polished = true;
    }
    return false;
}

void RadialSolver::advance(double T) {
    if (T < field_.t) throw Error(ErrorCode::DomainError, "cannot advance backwards in time");
    while (field_.t < T) {
        const double remaining = T - field_.t;
        const bool last = dt_ >= remaining * (1.0 - 1e-12);
        const double dt = last ? remaining : dt_;
        const double t_before = field_.t;
        if (try_step(dt)) {
            if (last) field_.t = T;
            dt_ = std::min(control_.dt_max, dt_ * 1.5);
        } else {
            field_.t = t_before;
            ++stats_.rejected;
            dt_ = 0.5 * std::min(dt_, dt);
            if (dt_ < control_.dt_min) {
                std::ostringstream msg;
                msg << "Newton failed with dt below " << control_.dt_min << " at t = " << field_.t;
                throw Error(ErrorCode::NonlinearSolveFailure, msg.str());
            }
        }
    }
}

RadialField advance(const RadialField& field, double T, const StepControl& control) {
    RadialSolver solver(field, control);
    solver.advance(T);
    return solver.field();
}

RadialField rescale(const RadialField& field, double beta) {
    RadialField out = field;
    const double shrink = std::exp(-beta * field.t);
    const double amp = std::exp(2.0 * beta * field.t / (1.0 - field.m));
    for (auto& x : out.r) x *= shrink;
    for (auto& v : out.u) v *= amp;
    return out;
}

// ---------------------------------------------------------------------------

double l1_distance(const RadialField& f, const RadialField& g, double R) {
    check_radius(f, g, R);
    R = std::min({R, f.R(), g.R()});
    const auto nodes = union_nodes(f, g, R);
    double sum = 0.0;
    double da = f.value_at(nodes[0]) - g.value_at(nodes[0]);
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        const double db = f.value_at(nodes[k]) - g.value_at(nodes[k]);
        sum += weighted_abs_linear(nodes[k - 1], nodes[k], da, db, f.n);
        da = db;
    }
    return unit_sphere_area(f.n) * sum;
}

double sup_distance(const RadialField& f, const RadialField& g, double R) {
    check_radius(f, g, R);
    R = std::min({R, f.R(), g.R()});
    double best = 0.0;
    for (double x : union_nodes(f, g, R)) best = std::max(best, std::abs(f.value_at(x) - g.value_at(x)));
    return best;
}

double cv_l1_distance(const RadialField& f, const RadialField& g) {
    if (f.r != g.r) throw Error(ErrorCode::DomainError, "control-volume distance needs a common grid");
    const auto V = control_volumes(f.r, f.n);
    double sum = 0.0;
    for (std::size_t j = 0; j < V.size(); ++j) sum += V[j] * std::abs(f.u[j] - g.u[j]);
    return sum;
}

long double cv_l1_distance(const RadialSolver& a, const RadialSolver& b) {
    if (a.field().r != b.field().r) throw Error(ErrorCode::DomainError, "control-volume distance needs a common grid");
    const auto V = control_volumes(a.field().r, a.field().n);
    long double sum = 0.0L;
    for (std::size_t j = 0; j < V.size(); ++j) sum += V[j] * std::abs(a.state()[j] - b.state()[j]);
    return sum;
}

// ---------------------------------------------------------------------------

ContractionReport contraction_check(const RadialField& u0_a, const RadialField& u0_b, double T, int samples,
                                    const StepControl& control) {
    if (samples < 1 || !(T > 0.0)) throw Error(ErrorCode::DomainError, "contraction check needs T > 0 and samples >= 1");
    if (u0_a.r != u0_b.r) throw Error(ErrorCode::DomainError, "contraction check needs a common grid");
    const double beta = u0_a.beta;
    ContractionReport rep;
    rep.decay_rate = (u0_a.n - 2.0 - u0_a.n * u0_a.m) * beta / (1.0 - u0_a.m);

    RadialSolver a(u0_a, control), b(u0_b, control);
    for (int k = 0; k <= samples; ++k) {
        const double t = T * k / samples;
        a.advance(t);
        b.advance(t);
        rep.times.push_back(t);
        rep.plain.push_back(static_cast<double>(cv_l1_distance(a, b)));
        rep.rescaled.push_back(cv_l1_distance(rescale(a.field(), beta), rescale(b.field(), beta)));
        rep.bound.push_back(rep.rescaled.front() * std::exp(-rep.decay_rate * t));
    }
    rep.plain_nonincreasing = nonincreasing(rep.plain, 0, kContractionSlack);
    rep.rescaled_within_factor = true;
    for (std::size_t k = 0; k < rep.rescaled.size(); ++k) {
        const double ratio = rep.rescaled[k] / rep.bound[k];
        if (!(ratio >= 0.5 && ratio <= 2.0)) rep.rescaled_within_factor = false;
    }
    return rep;
}

DecayDiagnostic decay_bound_diag(const std::vector<RadialField>& series, double K2_init) {
    DecayDiagnostic diag;
    if (series.empty()) return diag;
    const auto& f0 = series.front();
    const auto c = derive_constants({f0.n, f0.m, f0.beta, 1.0});
    diag.reference_slope = -c.c1;
    for (const auto& f : series) {
        double best = -std::numeric_limits<double>::infinity();
        // Outer 10% annulus, or the last interior node when the grid is too
        // coarse to place one there.
        const double lo = std::min(0.9 * f.R(), f.r[f.r.size() - 2]);
        for (std::size_t j = 0; j < f.r.size(); ++j) {
            const double r = f.r[j];
            if (r < lo || r >= f.R() || r <= std::exp(1.0)) continue;
            const double val =
                r * r * std::pow(f.u[j], 1.0 - f.m) - c.c1 / f.beta * (std::log(r) - c.kappa * std::log(std::log(r)));
            best = std::max(best, val);
        }
        diag.samples.push_back({f.t, best, K2_init - c.c1 * f.t});
    }
    // Least-squares slope of value against t.
    double st = 0, sv = 0, stt = 0, stv = 0;
    const double N = static_cast<double>(diag.samples.size());
    for (const auto& s : diag.samples) {
        st += s.t;
        sv += s.value;
        stt += s.t * s.t;
        stv += s.t * s.value;
    }
    const double den = N * stt - st * st;
    diag.fitted_slope = den != 0.0 ? (N * stv - st * sv) / den : 0.0;
    return diag;
}

ConvergenceReport convergence_run(const SimulationConfig& config) {
    ProblemParams p11{config.n, config.m, 1.0, 1.0};
    p11.validate();
    ProfileOptions opt;
    opt.s_end = config.profile_s_end;
    opt.tol = config.profile_tol;
    const auto base11 = integrate_profile(p11, opt);
    return convergence_run(config, base11);
}

ConvergenceReport convergence_run(const SimulationConfig& config, const Profile& base11) {
    const ProblemParams params{config.n, config.m, config.beta, 1.0};
    params.validate();
    if (params.regime() != Regime::FastSubcritical)
        throw Error(ErrorCode::DomainError, "the convergence harness needs m != (n-2)/(n+2)");
    if (base11.params().n != config.n || base11.params().m != config.m)
        throw Error(ErrorCode::DomainError, "reference profile was built for a different (n, m)");

    const double T = config.resolved_horizon();
    if (!(T > 0.0) || config.samples < 2 || !(config.R_obs > 0.0))
        throw Error(ErrorCode::DomainError, "convergence run needs horizon > 0, samples >= 2 and R_obs > 0");
    if (config.beta * T > std::log(config.R_max / config.R_obs)) {
        std::ostringstream msg;
        msg << "beta * horizon = " << config.beta * T << " exceeds log(R_max / R_obs) = "
            << std::log(config.R_max / config.R_obs);
        throw Error(ErrorCode::CoverageExceeded, msg.str());
    }

    ConvergenceReport rep;
    rep.K0 = config.K0 ? *config.K0 : extract_K0(base11);
    const double K11 = K_closed_form(1.0, 1.0, rep.K0, config.n, config.m);
    const double a0 = a0_of(a1_of(K11, {config.n, config.m, 1.0, 1.0}), config.n, config.m);
    rep.K1 = config.K1 ? *config.K1 : rep.K0 + config.K1_offset;
    rep.lambda1 = lambda1_of(rep.K1, rep.K0, config.beta, config.m);
    rep.lambda1_alternative = lambda1_alternative(rep.K1, rep.K0, config.beta, config.m);
    rep.R_obs = config.R_obs;
    rep.R_max = config.R_max;

    InitialData data;
    data.K1 = rep.K1;
    data.r_a = config.r_a;
    data.tail = config.tail;
    data.a0 = a0;
    if (config.psi_amplitude != 0.0) data.psi = Bump{config.psi_amplitude, config.psi_radius};
    const auto grid = make_radial_grid(config.grid());
    const auto u0 = build_initial(config.n, config.m, config.beta, data, grid);

    auto limit = [&](double r) { return scaled_eval(base11, rep.lambda1, config.beta, r); };

    RadialSolver solver(u0, config.step_control());
    std::vector<RadialField> series;
    for (int k = 0; k <= config.samples; ++k) {
        const double t = T * k / config.samples;
        solver.advance(t);
        series.push_back(solver.field());
        const auto tilde = rescale(solver.field(), config.beta);
        std::vector<double> obs_grid;
        for (double x : tilde.r)
            if (x <= config.R_obs) obs_grid.push_back(x);
        if (obs_grid.back() < config.R_obs) obs_grid.push_back(config.R_obs);
        const auto v = sample_field(obs_grid, limit, config.n, config.m, config.beta, t);
        rep.times.push_back(t);
        rep.l1_dist.push_back(l1_distance(tilde, v, config.R_obs));
        rep.sup_dist.push_back(sup_distance(tilde, v, config.R_obs));
        rep.center_vals.push_back(tilde.u.front());
    }

    std::size_t half = 0;
    while (half < rep.times.size() && rep.times[half] < 0.5 * T) ++half;
    rep.l1_decreasing = nonincreasing(rep.l1_dist, half, 0.0);
    rep.sup_decreasing = nonincreasing(rep.sup_dist, half, 0.0);
    rep.center_within = rep.center_rel_error() <= kCenterTolerance;

    rep.final_rescaled = rescale(solver.field(), config.beta);
    const auto K2 = decay_bound_diag({series.front()}, 0.0);
    rep.K2_diag = decay_bound_diag(series, K2.samples.front().value);
    return rep;
}

DoublingReport doubling_check(const SimulationConfig& config, const Profile& base11) {
    SimulationConfig doubled = config;
    doubled.R_max = 2.0 * config.R_max;
    auto fa = std::async(std::launch::async, [&] { return convergence_run(config, base11); });
    auto fb = std::async(std::launch::async, [&] { return convergence_run(doubled, base11); });
    DoublingReport rep;
    rep.base = fa.get();
    rep.doubled = fb.get();
    auto rel = [](double a, double b) { return std::abs(b - a) / std::abs(a); };
    rep.center_change = rel(rep.base.center_vals.back(), rep.doubled.center_vals.back());
    rep.l1_change = rel(rep.base.l1_dist.back(), rep.doubled.l1_dist.back());
    rep.sup_change = rel(rep.base.sup_dist.back(), rep.doubled.sup_dist.back());
    rep.field_change =
        sup_distance(rep.base.final_rescaled, rep.doubled.final_rescaled, config.R_obs) / rep.base.lambda1;
    rep.margin = kCenterTolerance - rep.base.center_rel_error();
    rep.pass = rep.center_change < rep.margin && rep.field_change < rep.margin &&
               rep.l1_change < kCenterTolerance && rep.sup_change < kCenterTolerance;
    return rep;
}

}  // namespace fde

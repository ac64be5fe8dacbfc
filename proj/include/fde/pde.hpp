#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fde/constants.hpp"
#include "fde/profile.hpp"

namespace fde {

// ---------------------------------------------------------------------------
// Grid and field

struct GridSpec {
    double R_max = 1e4;
    int n_uniform = 50;          ///< cells on [0, 1]
    int points_per_decade = 80;  ///< logarithmic spacing on [1, R_max]
};

/// Nodes 0 = r_0 < ... < r_J = R_max: uniform on [0, 1], log-spaced beyond.
std::vector<double> make_radial_grid(const GridSpec& spec);

/// Radial state u(r) at time t on a fixed grid.
struct RadialField {
    std::vector<double> r;
    std::vector<double> u;
    double t = 0;
    int n = 3;
    double m = 0.1;
    double beta = 1;

    double R() const { return r.back(); }
    /// Piecewise-linear value; throws OutOfCoverage beyond R().
    double value_at(double radius) const;
};

/// Samples f at the nodes of grid.
RadialField sample_field(const std::vector<double>& grid, const std::function<double(double)>& f, int n,
                         double m, double beta, double t = 0);

// ---------------------------------------------------------------------------
// Initial data

enum class TailMode {
    Bare,       ///< (c1/(beta r^2)) (log r - kappa log log r + K1)
    Corrected,  ///< adds a0/log r + kappa^2 log log r / log r (both o(1))
};

std::string_view to_string(TailMode mode);
TailMode tail_mode_from_string(std::string_view text);

/// Compactly supported perturbation amplitude (1 - (r/radius)^2)^2 on B_radius.
struct Bump {
    double amplitude = 0;
    double radius = 1;
    double operator()(double r) const;
};

struct InitialData {
    double K1 = 0;
    double r_a = 7.38905609893065;  ///< e^2
    TailMode tail = TailMode::Bare;
    double a0 = 0;  ///< only used by TailMode::Corrected
    std::optional<Bump> psi;
};

/// Value of the tail bracket at r (log r - kappa log log r + K1 [+ o(1) terms]).
double initial_bracket(double r, int n, double m, const InitialData& data);

/// u0 on the grid: the tail formula for r >= r_a, the constant u0(r_a) below,
/// plus psi. Throws DomainError if r_a < e^2 and NonpositiveBracket if the
/// bracket is not positive at r_a.
RadialField build_initial(int n, double m, double beta, const InitialData& data, const std::vector<double>& grid);

/// True if the field is non-increasing at the nodes with r >= r_from.
bool tail_monotone(const RadialField& field, double r_from);

// ---------------------------------------------------------------------------
// Time stepping

struct StepControl {
    double dt_initial = 1e-4;
    double dt_max = 1e-3;
    double dt_min = 1e-10;
    double newton_tol = 1e-12;
    int max_newton = 40;
};

/// Dirichlet value at r = R_max as a function of time. Empty = frozen at
/// the initial value.
using OuterBoundary = std::function<double(double t)>;

struct SolverStats {
    long steps = 0;
    long rejected = 0;
    long newton_iterations = 0;
};

/// Backward-Euler finite-volume integrator for
///   u_t = (n-1)/m r^{1-n} (r^{n-1} (u^m)_r)_r
/// with zero flux at r = 0 and a Dirichlet value at r = R_max. Each step
/// solves the nonlinear system by Newton's method in phi = u^m.
class RadialSolver {
public:
    RadialSolver(RadialField initial, StepControl control, OuterBoundary boundary = {});

    const RadialField& field() const { return field_; }
    const SolverStats& stats() const { return stats_; }
    /// Nodal values in the working precision of the solver.
    const std::vector<long double>& state() const { return state_; }

    /// Advances to time T > field().t. Throws NonlinearSolveFailure when the
    /// step size falls below dt_min.
    void advance(double T);

    /// Replaces the Dirichlet node by a zero-flux wall at R_max, making the
    /// discrete mass sum_j V_j u_j an invariant of the scheme.
    void use_zero_flux_outer() { zero_flux_outer_ = true; }

private:
    bool try_step(double dt);
    double boundary_value(double t) const;

    RadialField field_;
    StepControl control_;
    OuterBoundary boundary_;
    double u_boundary0_;
    double dt_;
    bool zero_flux_outer_ = false;
    // Extended precision keeps accumulated round-off well below the
    // distances the contraction check resolves.
    std::vector<long double> state_;
    std::vector<long double> volume_;  // control volumes / omega
    std::vector<long double> face_;    // (n-1)/m r_{j+1/2}^{n-1} / (r_{j+1} - r_j)
    SolverStats stats_;
};

/// Convenience wrapper with a frozen outer boundary.
RadialField advance(const RadialField& field, double T, const StepControl& control);

/// Rescaled frame: e^{2 beta t/(1-m)} u(e^{beta t} r, t), on the grid r e^{-beta t}.
RadialField rescale(const RadialField& field, double beta);

// ---------------------------------------------------------------------------
// Norms

/// Integral over B_R of |f - g| with measure omega r^{n-1} dr. Both fields
/// are taken piecewise linear on their own grids; the integral is exact for
/// such pairs (sign changes inside a cell are split). R beyond either grid
/// throws OutOfCoverage.
double l1_distance(const RadialField& f, const RadialField& g, double R);

/// max |f - g| over the union of nodes in [0, R].
double sup_distance(const RadialField& f, const RadialField& g, double R);

/// Control-volume L1 distance sum_j omega V_j |f_j - g_j| over the whole
/// common grid: the norm in which the implicit scheme is a contraction.
double cv_l1_distance(const RadialField& f, const RadialField& g);

/// cv_l1_distance evaluated on the extended-precision solver states.
long double cv_l1_distance(const RadialSolver& a, const RadialSolver& b);

/// omega V_j for the nodes of a grid.
std::vector<double> control_volumes(const std::vector<double>& r, int n);

// ---------------------------------------------------------------------------
// Verification runs

struct ContractionReport {
    std::vector<double> times;
    std::vector<double> plain;      ///< control-volume L1 distance (solver precision)
    std::vector<double> rescaled;   ///< same, in the rescaled frame
    std::vector<double> bound;      ///< e^{-(n-2-nm) beta t/(1-m)} * rescaled(0)
    double decay_rate = 0;          ///< (n-2-nm) beta / (1-m)
    bool plain_nonincreasing = false;
    bool rescaled_within_factor = false;  ///< rescaled / bound in [1/2, 2]
};

inline constexpr double kContractionSlack = 1e-10;

ContractionReport contraction_check(const RadialField& u0_a, const RadialField& u0_b, double T, int samples,
                                    const StepControl& control);

/// Run configuration of the convergence harness; see docs/formats.md for
/// the key = value file that fills it.
struct SimulationConfig {
    int n = 3;
    double m = 0.1;
    double beta = 1.0;
    std::optional<double> K1;      ///< absolute far-field constant
    double K1_offset = 0.0;        ///< used when K1 is absent: K1 = K0 + K1_offset
    std::optional<double> K0;      ///< computed from the (1,1) profile when absent
    double r_a = 7.38905609893065;
    double R_max = 1e4;
    std::optional<double> horizon;  ///< defaults to 5/beta
    double R_obs = 1.0;
    int n_uniform = 50;
    int points_per_decade = 80;
    int samples = 20;
    double dt_initial = 1e-4;
    double dt_max = 1e-3;
    double dt_min = 1e-10;
    double newton_tol = 1e-12;
    double profile_tol = 1e-10;
    double profile_s_end = 1000.0;
    TailMode tail = TailMode::Bare;
    double psi_amplitude = 0.0;
    double psi_radius = 1.0;
    bool doubling_check = false;

    double resolved_horizon() const { return horizon.value_or(5.0 / beta); }
    GridSpec grid() const { return {R_max, n_uniform, points_per_decade}; }
    StepControl step_control() const { return {dt_initial, dt_max, dt_min, newton_tol, 40}; }

    bool operator==(const SimulationConfig&) const = default;
};

struct DecaySample {
    double t;
    double value;  ///< sup over the outer annulus of r^2 u^{1-m} - (c1/beta)(log r - kappa log log r)
    double bound;  ///< K2 - c1 t
};

struct DecayDiagnostic {
    std::vector<DecaySample> samples;
    double fitted_slope = 0;
    double reference_slope = 0;  ///< -c1
};

struct ConvergenceReport {
    std::vector<double> times;
    std::vector<double> l1_dist;
    std::vector<double> sup_dist;
    std::vector<double> center_vals;
    double lambda1 = 0;
    double lambda1_alternative = 0;
    double K0 = 0;
    double K1 = 0;
    double R_obs = 0;
    double R_max = 0;
    bool l1_decreasing = false;   ///< non-increasing over the final half
    bool sup_decreasing = false;
    bool center_within = false;   ///< |u~(0,T)/lambda1 - 1| <= 0.1
    std::optional<DecayDiagnostic> K2_diag;
    RadialField final_rescaled;  ///< u~(., T) on the rescaled grid

    double center_rel_error() const { return std::abs(center_vals.back() / lambda1 - 1.0); }
    bool pass() const { return l1_decreasing && sup_decreasing && center_within; }
};

inline constexpr double kCenterTolerance = 0.1;

/// Rescaled-frame convergence towards v_{lambda1, beta}. Throws
/// CoverageExceeded unless beta * horizon <= log(R_max / R_obs).
ConvergenceReport convergence_run(const SimulationConfig& config);

/// Same, reusing an existing (1,1) profile for K0 and the limit profile.
ConvergenceReport convergence_run(const SimulationConfig& config, const Profile& base11);

struct DoublingReport {
    ConvergenceReport base;
    ConvergenceReport doubled;
    double center_change = 0;  ///< relative change of u~(0,T)
    double l1_change = 0;      ///< relative change of the final l1 distance
    double sup_change = 0;     ///< relative change of the final sup distance
    double field_change = 0;   ///< sup over B_{R_obs} of |u~_R - u~_2R| / lambda1 at T
    double margin = 0;         ///< 0.1 - |u~(0,T)/lambda1 - 1| of the base run
    /// center_change and field_change below margin, distance changes below
    /// the 10% acceptance tolerance.
    bool pass = false;
};

/// Runs R_max and 2 R_max concurrently.
DoublingReport doubling_check(const SimulationConfig& config, const Profile& base11);

/// Samples of the outer-annulus bracket (r in [0.9 R, R)) along a series of fields.
DecayDiagnostic decay_bound_diag(const std::vector<RadialField>& series, double K2_init);

}  // namespace fde

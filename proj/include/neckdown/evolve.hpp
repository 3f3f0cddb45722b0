#ifndef NECKDOWN_EVOLVE_HPP
#define NECKDOWN_EVOLVE_HPP

#include <neckdown/functionals.hpp>
#include <neckdown/grid.hpp>
#include <neckdown/linear_step.hpp>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace neckdown
{

/// All parameters of one run of the regularized evolution.
struct SolverConfig
{
  double         pressure    = 1.0;
  std::size_t    n           = 201;
  double         dt          = 1e-5;
  double         t_final     = 1.0;
  double         epsilon     = 0.0; // 0: bare mobility h, stop at the pinch floor
  double         picard_tol  = 1e-10;
  int            picard_max  = 20;
  double         pinch_floor = 1e-3;
  std::size_t    output_every = 1000;
  bool           flux_diagnostics = false;
  TimeScheme     scheme     = TimeScheme::backward_euler;
  QuadratureRule quadrature = QuadratureRule::trapezoid;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  /// round(t_final / dt)
  std::size_t total_steps() const;
};

/// Grid-relative pinch floor 10 dx^2, selected by `--pinch-floor grid`.
double grid_pinch_floor(std::size_t n);

/// Mobility used by the Picard iteration: sqrt(h^2 + eps^2), or max(h, floor/10) when eps = 0.
std::vector<double> mobility(std::span<const double> h, const SolverConfig &cfg);

class PicardFailure : public std::runtime_error
{
public:
  PicardFailure(int iterations, double last_update);
  int    iterations() const { return iterations_; }
  double last_update() const { return last_update_; }

private:
  int    iterations_;
  double last_update_;
};

struct NonlinearStep
{
  StepResult          step;
  int                 iterations = 0;
  std::vector<double> mobility; // coefficient of the final linear solve
};

/**
 * One backward-Euler step of the regularized equation solved by
 * coefficient-lagged fixed point iteration: starting from h^(0) = h_old,
 * h^(k+1) solves the linear step with g = mobility(h^(k)) until the H1
 * change falls below picard_tol * ||h_old||_{H1}.
 */
NonlinearStep step_nonlinear(const Profile &h_old, const SolverConfig &cfg);


enum class Termination
{
  reached_t_final,
  pinch_detected,
  picard_failure,
  solver_failure
};

std::string to_string(Termination t);

struct MinSample
{
  double t = 0.0;
  double x = 0.0;
  double h = 0.0;
};

struct Trajectory
{
  SolverConfig                config;
  std::vector<double>         times;
  std::vector<Profile>        snapshots;
  std::vector<std::size_t>    snapshot_steps;
  std::vector<EnergyLedger>   ledger;
  std::vector<MinSample>      min_series;
  std::vector<FluxEnergyRow>  flux_rows;
  Termination                 termination = Termination::reached_t_final;
  std::string                 failure_message;
  std::size_t                 first_step = 0;
  std::size_t                 last_step  = 0;
  double                      condition_estimate = 0.0;

  const Profile &final_profile() const { return snapshots.back(); }
};

/// State needed to resume a run exactly.
struct RunState
{
  Profile     profile;
  std::size_t step                   = 0;
  double      cumulative_dissipation = 0.0;
};

/**
 * Adds the quartic of least L2 norm that makes `raw` satisfy the four
 * discrete boundary rows: h(+-1) = 1 and the one-sided h''(+-1) = P.
 */
Profile project_initial_data(const Profile &raw);

/// Throws std::invalid_argument when h0 violates the discrete boundary rows or positivity.
void check_initial_data(const Profile &h0, const SolverConfig &cfg);

Trajectory run(const SolverConfig &cfg, const Profile &h0);
Trajectory run(const SolverConfig &cfg, const RunState &start);

/// State at the end of a trajectory, for checkpointing.
RunState final_state(const Trajectory &traj);


struct CauchyRow
{
  double              eps_coarse = 0.0;
  double              eps_fine   = 0.0;
  std::vector<double> times;
  std::vector<double> sup_differences;
  double              max_difference = 0.0;
};

struct ContinuationResult
{
  std::vector<double>                     schedule;
  std::vector<std::optional<Trajectory>>  runs;   // empty where the run threw
  std::vector<std::string>                errors;
  std::vector<CauchyRow>                  table;
  bool                                    cauchy = true;

  /// Sup-norm difference between runs i and i+1 at the snapshot nearest t.
  double sup_difference_at(std::size_t i, double t) const;
};

/// Runs every epsilon of a strictly decreasing positive schedule in parallel.
ContinuationResult epsilon_continuation(const SolverConfig        &cfg,
                                        const Profile             &h0,
                                        const std::vector<double> &eps_schedule);


struct PinchReport
{
  bool                                   pinched = false;
  std::optional<double>                  t_pinch;
  std::optional<double>                  x_pinch;
  std::vector<std::pair<double, double>> h_min_series_tail; // last 50 (t, h_m)
  double                                 log_slope = 0.0;    // d ln h_m / dt over the tail
};

PinchReport detect_pinch(const Trajectory &traj);


struct LogMinResidual
{
  double t_mid      = 0.0;
  double log_rate   = 0.0; // (ln h_m(t1) - ln h_m(t0)) / (t1 - t0)
  double fourth_derivative = 0.0; // mean of h''''(x_m) at t0 and t1
  double residual   = 0.0;
  double relative   = 0.0; // residual / |fourth_derivative|
};

/// Checks d/dt ln h_m = -h''''(x_m) between consecutive snapshots.
std::vector<LogMinResidual> log_min_derivative_check(const Trajectory &traj);


/// Raised when a diagnostic fit is not meaningful for the given data.
class DiagnosticError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

struct DecayFit
{
  double      rate      = 0.0; // c
  double      prefactor = 0.0; // C
  double      r_squared = 0.0;
  std::size_t samples   = 0;
};

/**
 * Least-squares fit of ln ||h(t) - h_P||_{H1} = ln(C ||h0 - h_P||_{H1}) - c t
 * over the last half of the snapshots (at least 20 points).
 */
DecayFit decay_rate(const Trajectory &traj);


struct RelaxReport
{
  double h1_distance       = 0.0;
  double h3_local_distance = 0.0;
  double h3_distance       = 0.0;
  double dissipation_end   = 0.0;
  double delta_loc         = 0.0;
};

/// Default inner-region threshold: 0.1 * max h_P.
double default_delta_loc(double P);

RelaxReport relaxation_check(const Trajectory &traj, double delta_loc);

} // namespace neckdown

#endif

#ifndef NECKDOWN_LINEAR_STEP_HPP
#define NECKDOWN_LINEAR_STEP_HPP

#include <neckdown/banded.hpp>
#include <neckdown/grid.hpp>

#include <algorithm>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace neckdown
{

enum class TimeScheme
{
  backward_euler,
  crank_nicolson
};

/// Condition estimates above this are reported as a warning.
inline constexpr double condition_warning_threshold = 1e12;

/// Raised when the banded solve fails or its backward error is too large.
class SolverError : public std::runtime_error
{
public:
  SolverError(const std::string &what, double condition_estimate);
  double condition_estimate() const { return condition_; }

private:
  double condition_;
};


/**
 * One time step of dh/dt + d/dx(g d^3h/dx^3) = 0 written as a banded system.
 *
 * Rows 0 and n-1 pin h(+-1) = 1. Rows 1 and n-2 carry the second-derivative
 * condition h''(+-1) = P with the one-sided stencil (2, -5, 4, -1), scaled by
 * dx^2. Interior rows 2..n-3 hold I + theta*dt*L where
 *
 *   (L h)_i = (F_{i+1/2} - F_{i-1/2}) / dx,
 *   F_{i+1/2} = g_{i+1/2} (h_{i+2} - 3h_{i+1} + 3h_i - h_{i-1}) / dx^3,
 *
 * with g_{i+1/2} the mean of the two neighbouring nodal values.
 */
struct BandedSystem
{
  BandedMatrix        matrix;
  std::vector<double> rhs;

  std::size_t bandwidth() const { return std::max(matrix.lower(), matrix.upper()); }
};

/// Number of boundary rows in every assembled system.
inline constexpr std::size_t boundary_row_count = 4;

/// Mobility at the cell faces, g_{i+1/2} = (g_i + g_{i+1}) / 2, for i = 0..n-2.
std::vector<double> face_mobility(std::span<const double> g);

/// Applies the conservative fourth-order operator L (interior rows only; others are zero).
std::vector<double> apply_flux_operator(std::span<const double> h,
                                        std::span<const double> g,
                                        const Grid             &grid);

BandedSystem assemble_operator(std::span<const double> g,
                               const Grid             &grid,
                               double                  dt,
                               double                  P,
                               std::span<const double> h_old,
                               TimeScheme              scheme = TimeScheme::backward_euler);

struct StepResult
{
  Profile             profile;
  double              solver_residual = 0.0; // normwise backward error of the banded solve
  std::vector<double> flux_field;
  double              condition_estimate = std::numeric_limits<double>::quiet_NaN();
};

/// Throws std::invalid_argument if g <= 0 somewhere or dt <= 0; SolverError on a failed solve.
StepResult step_linear(const Profile          &h_old,
                       std::span<const double> g,
                       double                  dt,
                       TimeScheme              scheme             = TimeScheme::backward_euler,
                       bool                    estimate_condition = false);


struct FluxEnergyRow
{
  double weighted_flux_norm = 0.0;   // ||w / sqrt(g)||_{L2} at the new time level
  double flux_curvature_norm = 0.0;  // discrete ||d^2 w / dx^2||_{L2} at the new time level
  double identity_residual = 0.0;    // one-step defect of the w^2/g balance
};

/**
 * Monitors the balance
 *   d/dt int w^2/g = int (dg/dt) w^2 / g^2 - 2 int |w''|^2,   w = g h''',
 * over one accepted step, with trapezoid weights in time. The integrals use the
 * face fluxes of the scheme, and int |w''|^2 is the pairing int w w'''' with
 * w'''' built from the scheme's own h_t = -w' and boundary rows, so the
 * semi-discrete balance is exact and the residual measures time stepping only.
 */
FluxEnergyRow flux_energy_report(const Profile          &h,
                                 std::span<const double> g,
                                 const Profile          &h_prev,
                                 std::span<const double> g_prev,
                                 double                  dt);

} // namespace neckdown

#endif

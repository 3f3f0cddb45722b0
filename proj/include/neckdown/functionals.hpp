#ifndef NECKDOWN_FUNCTIONALS_HPP
#define NECKDOWN_FUNCTIONALS_HPP

#include <neckdown/grid.hpp>

#include <span>
#include <vector>

namespace neckdown
{

struct Trajectory;

/// One row of the per-step energy bookkeeping.
struct EnergyLedger
{
  double      time                   = 0.0;
  double      energy                 = 0.0;
  double      dissipation            = 0.0;
  double      cumulative_dissipation = 0.0;
  double      h_min                  = 0.0;
  double      x_min                  = 0.0;
  int         picard_iters           = 0;
};

/// E(h) = 1/2 int |h'|^2 + P int h.
double energy(const Profile &p, double P, QuadratureRule rule = QuadratureRule::trapezoid);

/**
 * D(h) = int h |h'''|^2. Negative nodal heights are clipped to zero in the
 * integrand unless `signed_heights` is set.
 */
double dissipation(const Profile &p,
                   QuadratureRule rule           = QuadratureRule::trapezoid,
                   bool           signed_heights = false);

/// w = g h'''. Throws on length mismatch or non-positive g.
std::vector<double> flux(const Profile &p, std::span<const double> g);

/**
 * Max over nodes at distance >= 4 from either end of
 *   | D1(h D3 h) - D2(h D2 h - (D1 h)^2 / 2) |,
 * i.e. the discrete defect of the conservative rewriting of (h h''')'.
 */
double flux_identity_residual(const Profile &p);


/**
 * Space-time test function A * psi((x - xc)/rx) * psi((t - tc)/rt) with the
 * standard mollifier psi(s) = exp(-1/(1 - s^2)) on |s| < 1.
 */
struct BumpTestFunction
{
  double x_center  = 0.0;
  double x_radius  = 0.5;
  double t_center  = 0.5;
  double t_radius  = 0.25;
  double amplitude = 1.0;

  double value(double x, double t) const;
  double dt(double x, double t) const;
  double dxx(double x, double t) const;
};

/// Mollifier psi and its first two derivatives (zero outside |s| < 1).
double mollifier(double s);
double mollifier_d1(double s);
double mollifier_d2(double s);

/**
 * Space-time quadrature of
 *   int int h dphi/dt - int int (h h'' - |h'|^2 / 2) d^2phi/dx^2
 * over the snapshots of a trajectory (trapezoid in time over the snapshot
 * times). Needs at least 3 snapshots and a test function supported inside
 * (-1, 1) x (t_first, t_last).
 */
double weak_residual(const Trajectory &traj, const BumpTestFunction &phi);
double weak_residual(std::span<const double>  times,
                     std::span<const Profile> snapshots,
                     const BumpTestFunction  &phi);


/// f_eps(s) = -int_s^A dr / sqrt(r^2 + eps^2) = asinh(s/eps) - asinh(A/eps).
double entropy_density_derivative(double s, double A, double eps);

/// F_eps(s) = -int_s^A f_eps(r) dr = s f_eps(s) + sqrt(A^2 + eps^2) - sqrt(s^2 + eps^2).
double entropy_density(double s, double A, double eps);

/// int_I F_eps(h) dx. Throws if A < max h or eps <= 0.
double entropy(const Profile &p, double A, double eps);

} // namespace neckdown

#endif

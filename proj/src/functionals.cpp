#include <neckdown/evolve.hpp>
#include <neckdown/functionals.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace neckdown
{

double energy(const Profile &p, double P, QuadratureRule rule)
{
  const auto          d1 = diff(p, 1);
  std::vector<double> grad2(d1.size());
  for (std::size_t i = 0; i < d1.size(); ++i)
    grad2[i] = d1[i] * d1[i];
  return 0.5 * quadrature(grad2, p.grid, rule) + P * quadrature(p.values, p.grid, rule);
}

double dissipation(const Profile &p, QuadratureRule rule, bool signed_heights)
{
  const auto          d3 = diff(p, 3);
  std::vector<double> f(d3.size());
  for (std::size_t i = 0; i < d3.size(); ++i)
    {
      const double h = signed_heights ? p.values[i] : std::max(p.values[i], 0.0);
      f[i]           = h * d3[i] * d3[i];
    }
  return quadrature(f, p.grid, rule);
}

std::vector<double> flux(const Profile &p, std::span<const double> g)
{
  if (g.size() != p.size())
    throw std::invalid_argument("mobility field length does not match the profile");
  for (double v : g)
    if (!(v > 0.0))
      throw std::invalid_argument("mobility must be positive at every node");
  auto w = diff(p, 3);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] *= g[i];
  return w;
}

double flux_identity_residual(const Profile &p)
{
  const Grid       &grid = p.grid;
  const std::size_t n    = grid.size();
  const auto        d1   = diff(p, 1);
  const auto        d2   = diff(p, 2);
  const auto        d3   = diff(p, 3);

  std::vector<double> lhs_inner(n), rhs_inner(n);
  for (std::size_t i = 0; i < n; ++i)
    {
      const double h = p.values[i];
      lhs_inner[i]   = h * d3[i];
      rhs_inner[i]   = h * d2[i] - 0.5 * d1[i] * d1[i];
    }
  const auto lhs = diff(lhs_inner, grid, 1);
  const auto rhs = diff(rhs_inner, grid, 2);

  double worst = 0.0;
  for (std::size_t i = 4; i + 4 < n; ++i)
    worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
  return worst;
}


double mollifier(double s)
{
  if (std::abs(s) >= 1.0)
    return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

double mollifier_d1(double s)
{
  if (std::abs(s) >= 1.0)
    return 0.0;
  const double q = 1.0 - s * s;
  return mollifier(s) * (-2.0 * s / (q * q));
}

double mollifier_d2(double s)
{
  if (std::abs(s) >= 1.0)
    return 0.0;
  const double q  = 1.0 - s * s;
  const double u1 = -2.0 * s / (q * q);
  const double u2 = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
  return mollifier(s) * (u1 * u1 + u2);
}

double BumpTestFunction::value(double x, double t) const
{
  return amplitude * mollifier((x - x_center) / x_radius) * mollifier((t - t_center) / t_radius);
}

double BumpTestFunction::dt(double x, double t) const
{
  return amplitude * mollifier((x - x_center) / x_radius) * mollifier_d1((t - t_center) / t_radius) /
         t_radius;
}

double BumpTestFunction::dxx(double x, double t) const
{
  return amplitude * mollifier_d2((x - x_center) / x_radius) * mollifier((t - t_center) / t_radius) /
         (x_radius * x_radius);
}


double weak_residual(std::span<const double>  times,
                     std::span<const Profile> snapshots,
                     const BumpTestFunction  &phi)
{
  if (times.size() != snapshots.size())
    throw std::invalid_argument("snapshot and time lists differ in length");
  if (times.size() < 3)
    throw std::invalid_argument("weak residual needs at least 3 snapshots");
  if (!(phi.x_radius > 0.0) || !(phi.t_radius > 0.0))
    throw std::invalid_argument("test function radii must be positive");
  if (phi.x_center - phi.x_radius < -1.0 || phi.x_center + phi.x_radius > 1.0)
    throw std::invalid_argument("test function support leaves the spatial domain");
  if (phi.t_center - phi.t_radius < times.front() || phi.t_center + phi.t_radius > times.back())
    throw std::invalid_argument("test function support leaves the time window");

  std::vector<double> slice(times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    {
      const Profile &p = snapshots[k];
      const double   t = times[k];
      const auto     d1 = diff(p, 1);
      const auto     d2 = diff(p, 2);
      std::vector<double> f(p.size());
      for (std::size_t i = 0; i < p.size(); ++i)
        {
          const double x = p.grid.node(i);
          const double h = p.values[i];
          const double q = h * d2[i] - 0.5 * d1[i] * d1[i];
          f[i]           = h * phi.dt(x, t) - q * phi.dxx(x, t);
        }
      slice[k] = quadrature(f, p.grid);
    }

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k)
    total += 0.5 * (times[k + 1] - times[k]) * (slice[k] + slice[k + 1]);
  return total;
}

double weak_residual(const Trajectory &traj, const BumpTestFunction &phi)
{
  return weak_residual(traj.times, traj.snapshots, phi);
}


double entropy_density_derivative(double s, double A, double eps)
{
  return std::asinh(s / eps) - std::asinh(A / eps);
}

double entropy_density(double s, double A, double eps)
{
  const double F = s * entropy_density_derivative(s, A, eps) + std::hypot(A, eps) - std::hypot(s, eps);
  // F is nonnegative for s <= A; only round-off can push it below zero near s = A.
  return std::max(F, 0.0);
}

double entropy(const Profile &p, double A, double eps)
{
  if (!(eps > 0.0))
    throw std::invalid_argument("entropy regularization must be positive");
  const double hmax = *std::max_element(p.values.begin(), p.values.end());
  if (A < hmax)
    throw std::invalid_argument("entropy level A must bound the profile from above");
  std::vector<double> F(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    F[i] = entropy_density(p.values[i], A, eps);
  return quadrature(F, p.grid);
}

} // namespace neckdown

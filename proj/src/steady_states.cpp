#include <neckdown/steady_states.hpp>

#include <cmath>
#include <stdexcept>

namespace neckdown
{

namespace
{
  void require_positive_pressure(double P)
  {
    if (!(P > 0.0))
      throw std::invalid_argument("pressure must satisfy P > 0");
  }
} // namespace

double contact_point(double P)
{
  require_positive_pressure(P);
  return P > 2.0 ? 1.0 - std::sqrt(2.0 / P) : 0.0;
}

double steady_value(double P, double x)
{
  require_positive_pressure(P);
  if (P <= 2.0)
    return 0.5 * P * (x * x - 1.0) + 1.0;
  const double xp = contact_point(P);
  const double ax = std::abs(x);
  if (ax < xp)
    return 0.0;
  return 0.5 * P * (ax - xp) * (ax - xp);
}

SteadyState steady_profile(double P, const Grid &grid)
{
  require_positive_pressure(P);
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    v[i] = steady_value(P, grid.node(i));
  // the closed form reproduces h(+-1) = 1 only up to rounding for P > 2
  v.front() = 1.0;
  v.back()  = 1.0;
  return SteadyState{P, contact_point(P), make_profile(grid, std::move(v), P)};
}

double steady_energy(double P)
{
  require_positive_pressure(P);
  if (P <= 2.0)
    return 2.0 * P - P * P / 3.0;
  return 4.0 * std::sqrt(2.0) / 3.0 * std::sqrt(P);
}

} // namespace neckdown

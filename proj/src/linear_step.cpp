#include <neckdown/linear_step.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

namespace neckdown
{

SolverError::SolverError(const std::string &what, double condition_estimate)
  : std::runtime_error(what + " (condition estimate " + std::to_string(condition_estimate) + ")")
  , condition_(condition_estimate)
{}

namespace
{
  void check_mobility(std::span<const double> g, std::size_t n)
  {
    if (g.size() != n)
      throw std::invalid_argument("mobility field length does not match the grid");
    for (double v : g)
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("mobility must be positive and finite at every node");
  }

  double max_abs(std::span<const double> v)
  {
    double m = 0.0;
    for (double x : v)
      m = std::max(m, std::abs(x));
    return m;
  }
} // namespace


std::vector<double> face_mobility(std::span<const double> g)
{
  std::vector<double> gf(g.size() - 1);
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    gf[i] = 0.5 * (g[i] + g[i + 1]);
  return gf;
}

std::vector<double> apply_flux_operator(std::span<const double> h,
                                        std::span<const double> g,
                                        const Grid             &grid)
{
  const std::size_t n = grid.size();
  check_mobility(g, n);
  if (h.size() != n)
    throw std::invalid_argument("profile length does not match the grid");
  const auto   gf  = face_mobility(g);
  const double dx4 = std::pow(grid.spacing(), 4);

  std::vector<double> out(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i)
    {
      const double right = gf[i] * (h[i + 2] - 3.0 * h[i + 1] + 3.0 * h[i] - h[i - 1]);
      const double left  = gf[i - 1] * (h[i + 1] - 3.0 * h[i] + 3.0 * h[i - 1] - h[i - 2]);
      out[i]             = (right - left) / dx4;
    }
  return out;
}


BandedSystem assemble_operator(std::span<const double> g,
                               const Grid             &grid,
                               double                  dt,
                               double                  P,
                               std::span<const double> h_old,
                               TimeScheme              scheme)
{
  const std::size_t n = grid.size();
  check_mobility(g, n);
  if (!(dt > 0.0))
    throw std::invalid_argument("time step must be positive");
  if (h_old.size() != n)
    throw std::invalid_argument("profile length does not match the grid");

  const double theta = scheme == TimeScheme::crank_nicolson ? 0.5 : 1.0;
  const double dx    = grid.spacing();
  const double dx4   = std::pow(dx, 4);
  const auto   gf    = face_mobility(g);

  BandedSystem sys{BandedMatrix(n, 2, 2), std::vector<double>(n, 0.0)};
  auto        &A = sys.matrix;

  A(0, 0)     = 1.0;
  sys.rhs[0]  = 1.0;
  A(n - 1, n - 1) = 1.0;
  sys.rhs[n - 1]  = 1.0;

  A(1, 0) = 2.0;
  A(1, 1) = -5.0;
  A(1, 2) = 4.0;
  A(1, 3) = -1.0;
  sys.rhs[1] = P * dx * dx;

  A(n - 2, n - 1) = 2.0;
  A(n - 2, n - 2) = -5.0;
  A(n - 2, n - 3) = 4.0;
  A(n - 2, n - 4) = -1.0;
  sys.rhs[n - 2]  = P * dx * dx;

  std::vector<double> explicit_part;
  if (theta < 1.0)
    explicit_part = apply_flux_operator(h_old, g, grid);

  for (std::size_t i = 2; i + 2 < n; ++i)
    {
      const double a = theta * dt * gf[i] / dx4;
      const double b = theta * dt * gf[i - 1] / dx4;
      A(i, i + 2) = a;
      A(i, i + 1) = -3.0 * a - b;
      A(i, i)     = 1.0 + 3.0 * a + 3.0 * b;
      A(i, i - 1) = -a - 3.0 * b;
      A(i, i - 2) = b;

      sys.rhs[i] = h_old[i];
      if (theta < 1.0)
        sys.rhs[i] -= (1.0 - theta) * dt * explicit_part[i];
    }
  return sys;
}


StepResult step_linear(const Profile          &h_old,
                       std::span<const double> g,
                       double                  dt,
                       TimeScheme              scheme,
                       bool                    estimate_condition)
{
  const Grid &grid = h_old.grid;
  const auto  sys  = assemble_operator(g, grid, dt, h_old.pressure, h_old.values, scheme);

  std::optional<BandedLU> lu;
  try
    {
      lu.emplace(sys.matrix);
    }
  catch (const SingularMatrix &e)
    {
      throw SolverError(e.what(), std::numeric_limits<double>::infinity());
    }

  // Solve for the increment: the rhs is then the residual of h_old, and solver
  // round-off scales with the update instead of with h.
  const std::size_t   n     = grid.size();
  const auto          A_old = sys.matrix.multiply(h_old.values);
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i)
    rhs[i] = sys.rhs[i] - A_old[i];
  const auto flux_old = apply_flux_operator(h_old.values, g, grid);
  for (std::size_t i = 2; i + 2 < n; ++i)
    rhs[i] = -dt * flux_old[i];

  auto delta = lu->solve(rhs);

  auto residual = [&](std::vector<double> &res) {
    const auto Ad = sys.matrix.multiply(delta);
    double     r  = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      {
        res[i] = rhs[i] - Ad[i];
        r      = std::max(r, std::abs(res[i]));
      }
    return r;
  };

  // normwise backward error |b - A x| / (|A| |x| + |b|), infinity norms
  const double rhs_norm = max_abs(rhs);
  const double a_norm   = sys.matrix.norm_inf();
  auto backward_error   = [&](double r) {
    const double denom = a_norm * max_abs(delta) + rhs_norm;
    return denom > 0.0 ? r / denom : 0.0;
  };

  std::vector<double> res(n);
  double              eta = backward_error(residual(res));
  if (eta > 1e-14)
    {
      // one pass of iterative refinement
      const auto dd = lu->solve(res);
      for (std::size_t i = 0; i < n; ++i)
        delta[i] += dd[i];
      eta = backward_error(residual(res));
    }

  StepResult out;
  out.solver_residual = eta;
  if (estimate_condition)
    out.condition_estimate = lu->condition_estimate();

  if (!(eta <= 1e-9))
    {
      std::ostringstream msg;
      msg << "banded solve backward error " << eta << " exceeds 1e-9";
      throw SolverError(msg.str(), lu->condition_estimate());
    }

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = h_old.values[i] + delta[i];

  // The Dirichlet rows are identity rows; remove pivoting round-off.
  x.front() = 1.0;
  x.back()  = 1.0;

  out.profile = Profile{grid, std::move(x), h_old.pressure};

  const auto d3 = diff(out.profile, 3);
  out.flux_field.resize(d3.size());
  for (std::size_t i = 0; i < d3.size(); ++i)
    out.flux_field[i] = g[i] * d3[i];
  return out;
}


FluxEnergyRow flux_energy_report(const Profile          &h,
                                 std::span<const double> g,
                                 const Profile          &h_prev,
                                 std::span<const double> g_prev,
                                 double                  dt)
{
  const Grid       &grid = h.grid;
  const std::size_t n    = grid.size();
  check_mobility(g, n);
  check_mobility(g_prev, n);
  if (!(dt > 0.0))
    throw std::invalid_argument("time step must be positive");

  const double dx = grid.spacing();

  // face f sits between nodes f and f + 1; the interior rows use faces 1 .. n-3
  auto third_differences = [&](std::span<const double> h) {
    std::vector<double> t(n - 1, 0.0);
    for (std::size_t f = 1; f + 2 < n; ++f)
      t[f] = (h[f + 2] - 3.0 * h[f + 1] + 3.0 * h[f] - h[f - 1]) / (dx * dx * dx);
    return t;
  };

  // h_t of the scheme for face fluxes w, including the two curvature rows
  auto rate = [&](const std::vector<double> &w) {
    std::vector<double> ht(n, 0.0);
    for (std::size_t i = 2; i + 2 < n; ++i)
      ht[i] = -(w[i] - w[i - 1]) / dx;
    ht[1]     = (4.0 * ht[2] - ht[3]) / 5.0;
    ht[n - 2] = (4.0 * ht[n - 3] - ht[n - 4]) / 5.0;
    return ht;
  };

  struct Level
  {
    double weighted = 0.0; // sum w^2/g dx
    double source   = 0.0; // sum (dg/dt) w^2/g^2 dx
    double curv     = 0.0; // -sum w T(h_t) dx, the discrete int |w''|^2
  };

  const auto gf_now  = face_mobility(g);
  const auto gf_prev = face_mobility(g_prev);

  auto level = [&](const Profile &p, const std::vector<double> &gf) {
    const auto          t = third_differences(p.values);
    std::vector<double> w(n - 1, 0.0);
    for (std::size_t f = 1; f + 2 < n; ++f)
      w[f] = gf[f] * t[f];
    const auto tt = third_differences(rate(w));

    Level lv;
    for (std::size_t f = 1; f + 2 < n; ++f)
      {
        const double gt = (gf_now[f] - gf_prev[f]) / dt;
        lv.weighted += w[f] * w[f] / gf[f] * dx;
        lv.source += gt * w[f] * w[f] / (gf[f] * gf[f]) * dx;
        lv.curv -= w[f] * tt[f] * dx;
      }
    return lv;
  };

  const Level now  = level(h, gf_now);
  const Level prev = level(h_prev, gf_prev);

  FluxEnergyRow row;
  row.weighted_flux_norm  = std::sqrt(now.weighted);
  row.flux_curvature_norm = std::sqrt(std::max(now.curv, 0.0));
  row.identity_residual   = (now.weighted - prev.weighted) - 0.5 * dt * (now.source + prev.source) +
                          dt * (now.curv + prev.curv);
  return row;
}

} // namespace neckdown

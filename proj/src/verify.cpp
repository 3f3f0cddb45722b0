#include <neckdown/evolve.hpp>
#include <neckdown/io.hpp>
#include <neckdown/steady_states.hpp>
#include <neckdown/verify.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace neckdown
{

double measure_mode_decay_rate(std::size_t n, int k, double dt, std::size_t steps, double mobility_value)
{
  const Grid   grid = make_grid(n);
  const double P    = 1.0;
  const auto   hp   = steady_profile(P, grid);

  std::vector<double> mode(n), v(n);
  for (std::size_t i = 0; i < n; ++i)
    {
      mode[i] = std::sin(k * std::numbers::pi * (grid.node(i) + 1.0) / 2.0);
      v[i]    = hp.profile.values[i] + 0.01 * mode[i];
    }

  std::vector<double> mm(n);
  for (std::size_t i = 0; i < n; ++i)
    mm[i] = mode[i] * mode[i];
  const double norm = quadrature(mm, grid);

  auto amplitude = [&](const Profile &p) {
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i)
      f[i] = (p.values[i] - hp.profile.values[i]) * mode[i];
    return quadrature(f, grid) / norm;
  };

  // Start from one step in so the boundary rows hold exactly.
  const std::vector<double> g(n, mobility_value);
  Profile                   h  = step_linear(make_profile(grid, v, P), g, dt).profile;
  const double              a0 = amplitude(h);
  for (std::size_t s = 0; s < steps; ++s)
    h = step_linear(h, g, dt).profile;
  const double a1 = amplitude(h);
  return -std::log(a1 / a0) / (static_cast<double>(steps) * dt);
}

double flux_identity_ratio(std::size_t n)
{
  auto residual = [](std::size_t m) {
    const Grid          grid = make_grid(m);
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i)
      v[i] = 1.0 + 0.2 * std::sin(std::numbers::pi * grid.node(i));
    return flux_identity_residual(make_profile(grid, v, 1.0));
  };
  return residual(n) / residual(2 * n - 1);
}


namespace
{
  std::string fmt(double v)
  {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  }

  CheckResult check_flux_identity(bool quick)
  {
    const double r1 = flux_identity_ratio(201);
    bool         ok = r1 >= 3.5 && r1 <= 4.5;
    std::string  detail = "ratio 201->401: " + fmt(r1);
    if (!quick)
      {
        const double r2 = flux_identity_ratio(401);
        ok              = ok && r2 >= 3.5 && r2 <= 4.5;
        detail += ", 401->801: " + fmt(r2);
      }
    return {"flux identity refinement", ok, detail};
  }

  CheckResult check_energy_monotonicity(bool quick)
  {
    SolverConfig cfg;
    cfg.pressure     = 1.0;
    cfg.n            = quick ? 101 : 201;
    cfg.dt           = quick ? 1e-4 : 1e-5;
    cfg.t_final      = quick ? 0.1 : 0.2;
    cfg.output_every = 100;
    const auto h0 = make_initial_profile(InitialCondition{"steady-perturbed-poly", 0.05, {}}, cfg, 0);
    const auto tr = run(cfg, h0);

    double violation = 0.0;
    for (std::size_t k = 1; k < tr.ledger.size(); ++k)
      violation += std::max(0.0, tr.ledger[k].energy - tr.ledger[k - 1].energy);
    const double drop = tr.ledger.front().energy - tr.ledger.back().energy;
    const bool   ok   = tr.termination == Termination::reached_t_final && drop > 0.0 && violation <= 0.01 * drop;
    return {"energy monotonicity", ok, "drop " + fmt(drop) + ", violation " + fmt(violation)};
  }

  CheckResult check_eigenmodes(bool quick)
  {
    const std::size_t n     = quick ? 201 : 401;
    const int         kmax  = quick ? 1 : 3;
    bool              ok    = true;
    std::string       detail;
    for (int k = 1; k <= kmax; ++k)
      {
        const double lambda = std::pow(k * std::numbers::pi / 2.0, 4);
        const double rate   = measure_mode_decay_rate(n, k, 1e-5, 200);
        const double rel    = std::abs(rate - lambda) / lambda;
        ok                  = ok && rel <= 0.02;
        detail += (k > 1 ? ", " : "") + std::string("k=") + std::to_string(k) + " rate " + fmt(rate) +
                  " (rel err " + fmt(rel) + ")";
      }
    return {"eigenmode decay", ok, detail};
  }

  CheckResult check_steady_states()
  {
    const Grid grid = make_grid(2001);
    bool       ok   = true;
    std::string detail;
    for (double P : {1.0, 2.0, 8.0})
      {
        const double e_formula = steady_energy(P);
        const double e_quad    = energy(steady_profile(P, grid).profile, P);
        ok = ok && std::abs(e_formula - e_quad) <= 1e-5;
        detail += "P=" + fmt(P) + ": " + fmt(e_formula) + " vs " + fmt(e_quad) + "; ";
      }
    return {"steady-state energies", ok, detail};
  }
} // namespace

std::vector<CheckResult> run_verification(bool quick)
{
  std::vector<CheckResult> out;
  out.push_back(check_flux_identity(quick));
  out.push_back(check_energy_monotonicity(quick));
  out.push_back(check_eigenmodes(quick));
  if (!quick)
    out.push_back(check_steady_states());
  return out;
}

} // namespace neckdown

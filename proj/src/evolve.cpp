#include <neckdown/evolve.hpp>
#include <neckdown/steady_states.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <iostream>
#include <sstream>

namespace neckdown
{

void SolverConfig::validate() const
{
  if (!(pressure > 0.0))
    throw std::invalid_argument("pressure must satisfy P > 0");
  make_grid(n);
  if (!(dt > 0.0))
    throw std::invalid_argument("time step must be positive");
  if (!(t_final >= 0.0))
    throw std::invalid_argument("final time must be nonnegative");
  if (!(epsilon >= 0.0))
    throw std::invalid_argument("regularization epsilon must be nonnegative");
  if (!(picard_tol > 0.0 && picard_tol <= 1e-2))
    throw std::invalid_argument("Picard tolerance must lie in (0, 1e-2]");
  if (picard_max < 2)
    throw std::invalid_argument("Picard iteration limit must be at least 2");
  if (!(pinch_floor >= 0.0))
    throw std::invalid_argument("pinch floor must be nonnegative");
  if (epsilon == 0.0 && !(pinch_floor > 0.0))
    throw std::invalid_argument("an unregularized run (epsilon = 0) needs a positive pinch floor");
  if (output_every == 0)
    throw std::invalid_argument("output interval must be at least one step");
}

std::size_t SolverConfig::total_steps() const
{
  return static_cast<std::size_t>(std::llround(t_final / dt));
}


double grid_pinch_floor(std::size_t n)
{
  const double dx = 2.0 / static_cast<double>(n - 1);
  return 10.0 * dx * dx;
}

std::vector<double> mobility(std::span<const double> h, const SolverConfig &cfg)
{
  std::vector<double> g(h.size());
  if (cfg.epsilon > 0.0)
    {
      const double e2 = cfg.epsilon * cfg.epsilon;
      for (std::size_t i = 0; i < h.size(); ++i)
        g[i] = std::sqrt(h[i] * h[i] + e2);
    }
  else
    {
      const double floor_g = cfg.pinch_floor / 10.0;
      for (std::size_t i = 0; i < h.size(); ++i)
        g[i] = std::max(h[i], floor_g);
    }
  return g;
}


PicardFailure::PicardFailure(int iterations, double last_update)
  : std::runtime_error([&] {
    std::ostringstream os;
    os << "Picard iteration did not converge in " << iterations << " iterations (relative H1 update "
       << last_update << ")";
    return os.str();
  }())
  , iterations_(iterations)
  , last_update_(last_update)
{}

NonlinearStep step_nonlinear(const Profile &h_old, const SolverConfig &cfg)
{
  const double scale = sobolev_norm(h_old, 1);
  std::vector<double> iterate = h_old.values;
  std::vector<double> delta(iterate.size());
  double              update = std::numeric_limits<double>::infinity();

  for (int k = 1; k <= cfg.picard_max; ++k)
    {
      auto g   = mobility(iterate, cfg);
      auto res = step_linear(h_old, g, cfg.dt, cfg.scheme);

      bool finite = true;
      for (std::size_t i = 0; i < iterate.size(); ++i)
        {
          delta[i] = res.profile.values[i] - iterate[i];
          finite   = finite && std::isfinite(res.profile.values[i]);
        }
      if (!finite)
        throw PicardFailure(k, std::numeric_limits<double>::infinity());
      update = sobolev_norm(delta, h_old.grid, 1);
      if (update <= cfg.picard_tol * scale)
        return NonlinearStep{std::move(res), k, std::move(g)};
      iterate = res.profile.values;
    }
  throw PicardFailure(cfg.picard_max, update / scale);
}


std::string to_string(Termination t)
{
  switch (t)
    {
      case Termination::reached_t_final:
        return "ReachedTFinal";
      case Termination::pinch_detected:
        return "PinchDetected";
      case Termination::picard_failure:
        return "PicardFailure";
      case Termination::solver_failure:
        return "SolverFailure";
    }
  return "Unknown";
}


namespace
{
  double boundary_second_difference(std::span<const double> h, bool left, double dx)
  {
    const std::size_t n = h.size();
    if (left)
      return (2.0 * h[0] - 5.0 * h[1] + 4.0 * h[2] - h[3]) / (dx * dx);
    return (2.0 * h[n - 1] - 5.0 * h[n - 2] + 4.0 * h[n - 3] - h[n - 4]) / (dx * dx);
  }
} // namespace

Profile project_initial_data(const Profile &raw)
{
  const Grid       &grid = raw.grid;
  const std::size_t n    = grid.size();
  const double      dx   = grid.spacing();
  const double      P    = raw.pressure;

  // Constraint rows act on the sampled monomials 1, x, ..., x^4.
  Eigen::Matrix<double, 4, 5> C;
  Eigen::Vector4d             d;
  auto monomial = [&](std::size_t i, int a) { return std::pow(grid.node(i), a); };
  for (int a = 0; a < 5; ++a)
    {
      C(0, a) = monomial(0, a);
      C(1, a) = monomial(n - 1, a);
      C(2, a) = (2.0 * monomial(0, a) - 5.0 * monomial(1, a) + 4.0 * monomial(2, a) - monomial(3, a)) /
                (dx * dx);
      C(3, a) = (2.0 * monomial(n - 1, a) - 5.0 * monomial(n - 2, a) + 4.0 * monomial(n - 3, a) -
                 monomial(n - 4, a)) /
                (dx * dx);
    }
  d << 1.0 - raw.values[0], 1.0 - raw.values[n - 1],
    P - boundary_second_difference(raw.values, true, dx),
    P - boundary_second_difference(raw.values, false, dx);

  // Gram matrix of the monomials in L2(-1, 1)
  Eigen::Matrix<double, 5, 5> G;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      G(a, b) = (a + b) % 2 == 0 ? 2.0 / (a + b + 1) : 0.0;

  Eigen::Matrix<double, 9, 9> K = Eigen::Matrix<double, 9, 9>::Zero();
  K.topLeftCorner<5, 5>()       = 2.0 * G;
  K.topRightCorner<5, 4>()      = C.transpose();
  K.bottomLeftCorner<4, 5>()    = C;
  Eigen::Matrix<double, 9, 1> rhs = Eigen::Matrix<double, 9, 1>::Zero();
  rhs.tail<4>()                   = d;
  const Eigen::Matrix<double, 9, 1> sol = K.fullPivLu().solve(rhs);

  std::vector<double> v = raw.values;
  for (std::size_t i = 0; i < n; ++i)
    {
      double q = 0.0;
      for (int a = 4; a >= 0; --a)
        q = q * grid.node(i) + sol(a);
      v[i] += q;
    }
  v.front() = 1.0;
  v.back()  = 1.0;
  return make_profile(grid, std::move(v), P);
}

void check_initial_data(const Profile &h0, const SolverConfig &cfg)
{
  if (h0.size() != cfg.n)
    throw std::invalid_argument("initial profile has " + std::to_string(h0.size()) +
                                " nodes but the configuration asks for " + std::to_string(cfg.n));
  if (h0.pressure != cfg.pressure)
    throw std::invalid_argument("initial profile carries a different pressure than the configuration");
  for (double v : h0.values)
    if (!std::isfinite(v))
      throw std::invalid_argument("initial profile contains non-finite values");
  if (h0.values.front() != 1.0 || h0.values.back() != 1.0)
    throw std::invalid_argument("initial profile must satisfy h(+-1) = 1");
  const double dx  = h0.grid.spacing();
  const double tol = 1e-8 * (1.0 + cfg.pressure);
  if (std::abs(boundary_second_difference(h0.values, true, dx) - cfg.pressure) > tol ||
      std::abs(boundary_second_difference(h0.values, false, dx) - cfg.pressure) > tol)
    throw std::invalid_argument("initial profile must satisfy the discrete condition h''(+-1) = P");
  const double hmin = min_value(h0).h;
  if (cfg.epsilon == 0.0 && !(hmin > cfg.pinch_floor))
    throw std::invalid_argument("an unregularized run needs min h0 above the pinch floor");
  if (cfg.epsilon > 0.0 && hmin < 0.0)
    throw std::invalid_argument("initial profile must be nonnegative");
}


namespace
{
  std::vector<double> midpoint(std::span<const double> a, std::span<const double> b)
  {
    std::vector<double> m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      m[i] = 0.5 * (a[i] + b[i]);
    return m;
  }
} // namespace

Trajectory run(const SolverConfig &cfg, const RunState &start)
{
  cfg.validate();
  check_initial_data(start.profile, cfg);

  Trajectory traj;
  traj.config     = cfg;
  traj.first_step = start.step;
  traj.last_step  = start.step;

  const auto   rule  = cfg.quadrature;
  const double P     = cfg.pressure;
  const auto   total = cfg.total_steps();

  Profile current = start.profile;
  double  cum     = start.cumulative_dissipation;
  double  t       = static_cast<double>(start.step) * cfg.dt;

  auto record = [&](const Profile &p, double time, int iters) {
    const auto m = min_value(p);
    traj.ledger.push_back(EnergyLedger{time, energy(p, P, rule), dissipation(p, rule), cum, m.h, m.x, iters});
    traj.min_series.push_back(MinSample{time, m.x, m.h});
  };
  auto snapshot = [&](const Profile &p, double time, std::size_t step) {
    traj.times.push_back(time);
    traj.snapshots.push_back(p);
    traj.snapshot_steps.push_back(step);
  };

  record(current, t, 0);
  snapshot(current, t, start.step);

  std::vector<double> g_current = mobility(current.values, cfg);
  bool                estimated = false;

  for (std::size_t step = start.step + 1; step <= total; ++step)
    {
      NonlinearStep next;
      try
        {
          next = step_nonlinear(current, cfg);
        }
      catch (const PicardFailure &e)
        {
          traj.termination     = Termination::picard_failure;
          traj.failure_message = e.what();
          break;
        }
      catch (const SolverError &e)
        {
          traj.termination     = Termination::solver_failure;
          traj.failure_message = e.what();
          break;
        }

      if (!estimated)
        {
          const auto probe        = step_linear(current, next.mobility, cfg.dt, cfg.scheme, true);
          traj.condition_estimate = probe.condition_estimate;
          if (traj.condition_estimate > condition_warning_threshold)
            std::clog << "warning: linear step condition estimate " << traj.condition_estimate
                      << " exceeds " << condition_warning_threshold << '\n';
          estimated = true;
        }

      Profile &next_profile = next.step.profile;
      const Profile mid{current.grid, midpoint(current.values, next_profile.values), P};
      cum += cfg.dt * dissipation(mid, rule);
      t = static_cast<double>(step) * cfg.dt;

      if (cfg.flux_diagnostics)
        {
          auto g_next = mobility(next_profile.values, cfg);
          traj.flux_rows.push_back(flux_energy_report(next_profile, g_next, current, g_current, cfg.dt));
          g_current = std::move(g_next);
        }

      current        = std::move(next_profile);
      traj.last_step = step;
      record(current, t, next.iterations);

      const bool pinched = cfg.pinch_floor > 0.0 && traj.min_series.back().h <= cfg.pinch_floor;
      if (step % cfg.output_every == 0 || step == total || pinched)
        snapshot(current, t, step);
      if (pinched)
        {
          traj.termination = Termination::pinch_detected;
          break;
        }
    }

  if (traj.snapshot_steps.back() != traj.last_step)
    snapshot(current, static_cast<double>(traj.last_step) * cfg.dt, traj.last_step);
  return traj;
}

Trajectory run(const SolverConfig &cfg, const Profile &h0)
{
  return run(cfg, RunState{h0, 0, 0.0});
}

RunState final_state(const Trajectory &traj)
{
  return RunState{traj.final_profile(), traj.last_step, traj.ledger.back().cumulative_dissipation};
}


double ContinuationResult::sup_difference_at(std::size_t i, double t) const
{
  if (i + 1 >= runs.size() || !runs[i] || !runs[i + 1])
    throw std::out_of_range("no pair of completed runs at this schedule index");
  auto nearest = [t](const Trajectory &tr) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < tr.times.size(); ++k)
      if (std::abs(tr.times[k] - t) < std::abs(tr.times[best] - t))
        best = k;
    return best;
  };
  const auto &a = *runs[i];
  const auto &b = *runs[i + 1];
  const auto &pa = a.snapshots[nearest(a)].values;
  const auto &pb = b.snapshots[nearest(b)].values;
  double      d  = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k)
    d = std::max(d, std::abs(pa[k] - pb[k]));
  return d;
}

ContinuationResult epsilon_continuation(const SolverConfig        &cfg,
                                        const Profile             &h0,
                                        const std::vector<double> &eps_schedule)
{
  if (eps_schedule.empty())
    throw std::invalid_argument("epsilon schedule is empty");
  for (std::size_t i = 0; i < eps_schedule.size(); ++i)
    {
      if (!(eps_schedule[i] > 0.0))
        throw std::invalid_argument("epsilon schedule entries must be positive");
      if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
        throw std::invalid_argument("epsilon schedule must be strictly decreasing");
    }

  ContinuationResult out;
  out.schedule = eps_schedule;

  std::vector<std::future<Trajectory>> tasks;
  for (double eps : eps_schedule)
    {
      SolverConfig c = cfg;
      c.epsilon      = eps;
      tasks.push_back(std::async(std::launch::async, [c, &h0] { return run(c, h0); }));
    }
  for (auto &task : tasks)
    {
      try
        {
          out.runs.emplace_back(task.get());
          out.errors.emplace_back();
        }
      catch (const std::exception &e)
        {
          out.runs.emplace_back(std::nullopt);
          out.errors.emplace_back(e.what());
        }
    }

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < out.runs.size(); ++i)
    {
      CauchyRow row{eps_schedule[i], eps_schedule[i + 1], {}, {}, 0.0};
      if (out.runs[i] && out.runs[i + 1])
        {
          const auto &a = *out.runs[i];
          const auto &b = *out.runs[i + 1];
          std::size_t kb = 0;
          for (std::size_t ka = 0; ka < a.snapshots.size(); ++ka)
            {
              while (kb < b.snapshot_steps.size() && b.snapshot_steps[kb] < a.snapshot_steps[ka])
                ++kb;
              if (kb == b.snapshot_steps.size())
                break;
              if (b.snapshot_steps[kb] != a.snapshot_steps[ka])
                continue;
              double d = 0.0;
              for (std::size_t j = 0; j < a.snapshots[ka].size(); ++j)
                d = std::max(d, std::abs(a.snapshots[ka].values[j] - b.snapshots[kb].values[j]));
              row.times.push_back(a.times[ka]);
              row.sup_differences.push_back(d);
              row.max_difference = std::max(row.max_difference, d);
            }
        }
      else
        out.cauchy = false;

      if (i > 0 && !(row.max_difference < previous) && previous > 0.0)
        out.cauchy = false;
      previous = row.max_difference;
      out.table.push_back(std::move(row));
    }
  return out;
}

} // namespace neckdown

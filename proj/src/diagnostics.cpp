#include <neckdown/evolve.hpp>
#include <neckdown/steady_states.hpp>

#include <algorithm>
#include <cmath>

namespace neckdown
{

namespace
{
  struct LineFit
  {
    double slope     = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
  };

  LineFit fit_line(std::span<const double> x, std::span<const double> y)
  {
    const double n  = static_cast<double>(x.size());
    double       mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      {
        mx += x[i];
        my += y[i];
      }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
      }
    LineFit f;
    f.slope     = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r_squared = (sxx > 0.0 && syy > 0.0) ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 0.0;
    return f;
  }

  std::vector<double> difference(const Profile &a, const Profile &b)
  {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = a.values[i] - b.values[i];
    return d;
  }
} // namespace


PinchReport detect_pinch(const Trajectory &traj)
{
  PinchReport rep;
  const double floor = traj.config.pinch_floor;
  for (const auto &s : traj.min_series)
    if (floor > 0.0 && s.h <= floor)
      {
        rep.pinched = true;
        rep.t_pinch = s.t;
        rep.x_pinch = s.x;
        break;
      }

  const std::size_t m     = traj.min_series.size();
  const std::size_t first = m > 50 ? m - 50 : 0;
  std::vector<double> ts, logs;
  for (std::size_t k = first; k < m; ++k)
    {
      const auto &s = traj.min_series[k];
      rep.h_min_series_tail.emplace_back(s.t, s.h);
      if (s.h > 0.0)
        {
          ts.push_back(s.t);
          logs.push_back(std::log(s.h));
        }
    }
  if (ts.size() >= 2)
    rep.log_slope = fit_line(ts, logs).slope;
  return rep;
}


std::vector<LogMinResidual> log_min_derivative_check(const Trajectory &traj)
{
  std::vector<LogMinResidual> out;
  if (traj.snapshots.size() < 2)
    return out;

  auto sample = [](const Profile &p) {
    const auto m  = min_value(p);
    const auto d4 = diff(p, 4);
    return std::pair<double, double>{m.h, d4[m.index]};
  };

  auto prev = sample(traj.snapshots.front());
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k)
    {
      const auto   cur = sample(traj.snapshots[k]);
      const double dt  = traj.times[k] - traj.times[k - 1];
      if (dt > 0.0 && prev.first > 0.0 && cur.first > 0.0)
        {
          LogMinResidual r;
          r.t_mid             = 0.5 * (traj.times[k] + traj.times[k - 1]);
          r.log_rate          = (std::log(cur.first) - std::log(prev.first)) / dt;
          r.fourth_derivative = 0.5 * (cur.second + prev.second);
          r.residual          = std::abs(r.log_rate + r.fourth_derivative);
          r.relative          = r.fourth_derivative != 0.0 ? r.residual / std::abs(r.fourth_derivative) : 0.0;
          out.push_back(r);
        }
      prev = cur;
    }
  return out;
}


DecayFit decay_rate(const Trajectory &traj)
{
  const std::size_t count = traj.snapshots.size();
  if (count < 20)
    throw DiagnosticError("decay fit needs at least 20 snapshots, trajectory has " + std::to_string(count));

  const double P      = traj.config.pressure;
  const auto   steady = steady_profile(P, traj.snapshots.front().grid);
  const double scale  = sobolev_norm(steady.profile, 1);

  std::size_t first = count / 2;
  if (count - first < 20)
    first = count - 20;

  std::vector<double> ts, logs;
  for (std::size_t k = first; k < count; ++k)
    {
      const auto   d    = difference(traj.snapshots[k], steady.profile);
      const double dist = sobolev_norm(d, steady.profile.grid, 1);
      if (!(dist > 1e-12 * scale))
        throw DiagnosticError("distance to the steady state is at round-off; decay fit is meaningless");
      ts.push_back(traj.times[k]);
      logs.push_back(std::log(dist));
    }

  const auto   d0    = difference(traj.snapshots.front(), steady.profile);
  const double dist0 = sobolev_norm(d0, steady.profile.grid, 1);
  const auto   f     = fit_line(ts, logs);

  DecayFit fit;
  fit.rate      = -f.slope;
  fit.prefactor = dist0 > 0.0 ? std::exp(f.intercept) / dist0 : 0.0;
  fit.r_squared = f.r_squared;
  fit.samples   = ts.size();
  return fit;
}


double default_delta_loc(double P)
{
  // max h_P is attained at x = +-1 where h_P = 1
  (void)P;
  return 0.1;
}

RelaxReport relaxation_check(const Trajectory &traj, double delta_loc)
{
  if (!(delta_loc > 0.0))
    throw std::invalid_argument("delta_loc must be positive");

  const Profile &end    = traj.final_profile();
  const double   P      = traj.config.pressure;
  const auto     steady = steady_profile(P, end.grid);
  const Grid    &grid   = end.grid;

  const auto d = difference(end, steady.profile);

  RelaxReport rep;
  rep.delta_loc       = delta_loc;
  rep.h1_distance     = sobolev_norm(d, grid, 1);
  rep.h3_distance     = sobolev_norm(d, grid, 3);
  rep.dissipation_end = dissipation(end);

  std::vector<bool> mask(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    mask[i] = steady.profile.values[i] > delta_loc;

  double              total = 0.0;
  std::vector<double> sq(grid.size());
  for (int j = 0; j <= 3; ++j)
    {
      const auto dj = j == 0 ? d : diff(d, grid, j);
      for (std::size_t i = 0; i < sq.size(); ++i)
        sq[i] = dj[i] * dj[i];
      total += masked_quadrature(sq, grid, mask);
    }
  rep.h3_local_distance = std::sqrt(total);
  return rep;
}

} // namespace neckdown

#include <neckdown/evolve.hpp>
#include <neckdown/functionals.hpp>
#include <neckdown/steady_states.hpp>

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

using namespace neckdown;
using std::numbers::pi;

namespace
{
  Profile poly_perturbed(std::size_t n, double P, double a)
  {
    const Grid          g = make_grid(n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = steady_value(P, g.node(i)) + a * std::pow(1.0 - g.node(i) * g.node(i), 2);
    return project_initial_data(make_profile(g, v, P));
  }

  Profile bump(std::size_t n, double P, double a)
  {
    const Grid          g = make_grid(n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
      {
        const double x = g.node(i);
        v[i]           = P / 2.0 * (x * x - 1.0) + 1.0 + a * std::pow(1.0 - x * x, 2);
      }
    return project_initial_data(make_profile(g, v, P));
  }

  double h1_distance(const Profile &a, const Profile &b)
  {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = a.values[i] - b.values[i];
    return sobolev_norm(d, a.grid, 1);
  }

  double grad_distance(const Profile &a, const Profile &b)
  {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = a.values[i] - b.values[i];
    const auto          d1 = diff(d, a.grid, 1);
    std::vector<double> sq(d1.size());
    for (std::size_t i = 0; i < d1.size(); ++i)
      sq[i] = d1[i] * d1[i];
    return std::sqrt(quadrature(sq, a.grid));
  }

  SolverConfig quick_config(double P)
  {
    SolverConfig c;
    c.pressure     = P;
    c.n            = 101;
    c.dt           = 1e-4;
    c.t_final      = 0.05;
    c.output_every = 10;
    return c;
  }
} // namespace

TEST_CASE("config validation")
{
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.total_steps() == 100000);

  auto bad = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  bad([](SolverConfig &c) { c.pressure = 0.0; });
  bad([](SolverConfig &c) { c.pressure = -1.0; });
  bad([](SolverConfig &c) { c.dt = 0.0; });
  bad([](SolverConfig &c) { c.n = 8; });
  bad([](SolverConfig &c) { c.epsilon = -1e-3; });
  bad([](SolverConfig &c) { c.picard_tol = 0.0; });
  bad([](SolverConfig &c) { c.picard_tol = 0.1; });
  bad([](SolverConfig &c) { c.picard_max = 1; });
  bad([](SolverConfig &c) { c.pinch_floor = 0.0; });
  bad([](SolverConfig &c) { c.output_every = 0; });

  SolverConfig eps;
  eps.epsilon     = 1e-2;
  eps.pinch_floor = 0.0;
  CHECK_NOTHROW(eps.validate());
}

TEST_CASE("mobility")
{
  SolverConfig c;
  const std::vector<double> h{1.0, 0.5, 0.0, -0.2, 1e-5};
  const auto bare = mobility(h, c);
  CHECK(bare[0] == 1.0);
  CHECK(bare[1] == 0.5);
  CHECK(bare[2] == 1e-4);
  CHECK(bare[3] == 1e-4);
  CHECK(bare[4] == 1e-4);
  c.epsilon      = 0.1;
  const auto reg = mobility(h, c);
  CHECK(reg[2] == doctest::Approx(0.1));
  CHECK(reg[3] == doctest::Approx(std::hypot(0.2, 0.1)));
}

TEST_CASE("Picard step")
{
  SolverConfig c;
  c.pressure = 1.0;
  c.n        = 201;

  SUBCASE("steady state is reached in one iteration")
  {
    c.epsilon    = 0.01;
    const auto hp = steady_profile(1.0, make_grid(201)).profile;
    const auto r  = step_nonlinear(hp, c);
    CHECK(r.iterations == 1);
    for (std::size_t i = 0; i < 201; ++i)
      CHECK(r.step.profile.values[i] == doctest::Approx(hp.values[i]).epsilon(1e-12).scale(1.0));
  }

  SUBCASE("small perturbation contracts toward h_P")
  {
    c.dt          = 1e-4;
    c.epsilon     = 1e-3;
    const auto hp = steady_profile(1.0, make_grid(201)).profile;
    const auto h0 = poly_perturbed(201, 1.0, 1e-3);
    const auto r  = step_nonlinear(h0, c);
    CHECK(r.iterations <= 5);
    CHECK(h1_distance(r.step.profile, hp) < h1_distance(h0, hp));

    // one large step lands near a hundred small ones; the gap is the first order time error
    SolverConfig fine = c;
    fine.dt           = 1e-6;
    Profile h         = h0;
    for (int s = 0; s < 100; ++s)
      h = step_nonlinear(h, fine).step.profile;
    CHECK(h1_distance(h, r.step.profile) <= 0.25 * h1_distance(h0, h));
  }

  SUBCASE("huge time step fails to converge")
  {
    c.pressure = 3.0;
    c.n        = 101;
    c.dt       = 10.0;
    const Grid          g = make_grid(101);
    std::vector<double> v(101);
    for (std::size_t i = 0; i < 101; ++i)
      {
        const double x = g.node(i);
        v[i] = 1.5 * (x * x - 1.0) + 1.0 + (1.2 + 0.1 * std::cos(8.0 * pi * x)) * std::pow(1.0 - x * x, 2);
      }
    const auto h0 = project_initial_data(make_profile(g, v, 3.0));
    CHECK(min_value(h0).h > c.pinch_floor);
    CHECK_THROWS_AS(step_nonlinear(h0, c), PicardFailure);
  }
}

TEST_CASE("initial data checks")
{
  SolverConfig c = quick_config(1.0);
  const Grid   g = make_grid(101);
  std::vector<double> v(101);
  for (std::size_t i = 0; i < 101; ++i)
    v[i] = steady_value(1.0, g.node(i)) + 0.05 * std::pow(1.0 - g.node(i) * g.node(i), 2);
  // (1 - x^2)^2 has curvature 8 at the ends, so raw data violate the second-derivative condition
  CHECK_THROWS_AS(check_initial_data(make_profile(g, v, 1.0), c), std::invalid_argument);
  const auto projected = project_initial_data(make_profile(g, v, 1.0));
  CHECK_NOTHROW(check_initial_data(projected, c));
  CHECK(projected.values.front() == 1.0);
  CHECK(projected.values.back() == 1.0);

  // projection leaves admissible data alone
  const auto hp = steady_profile(1.0, g).profile;
  const auto p2 = project_initial_data(hp);
  for (std::size_t i = 0; i < 101; ++i)
    CHECK(p2.values[i] == doctest::Approx(hp.values[i]).epsilon(1e-12).scale(1.0));

  // the correction is the quartic of least L2 norm: it is orthogonal to every quartic
  // vanishing on the four boundary rows, tested here against (1 - x^2)^2 x^k shapes
  // through the symmetric part: an even correction for even data
  for (std::size_t i = 0; i < 101; ++i)
    CHECK(projected.values[i] == doctest::Approx(projected.values[100 - i]).epsilon(1e-13));

  auto low = projected;
  low.values[50] = 1e-4;
  CHECK_THROWS_AS(run(c, low), std::invalid_argument);
  CHECK_THROWS_AS(run(c, make_profile(g, v, 2.0)), std::invalid_argument);
}

TEST_CASE("steady run stays put")
{
  for (double eps : {0.0, 1e-2})
    {
      SolverConfig c = quick_config(1.0);
      c.epsilon      = eps;
      const auto hp  = steady_profile(1.0, make_grid(c.n)).profile;
      const auto tr  = run(c, hp);
      CHECK(tr.termination == Termination::reached_t_final);
      CHECK(tr.ledger.size() == c.total_steps() + 1);
      for (const auto &row : tr.ledger)
        {
          CHECK(row.energy == doctest::Approx(tr.ledger.front().energy).epsilon(1e-13));
          CHECK(row.dissipation <= 1e-12);
        }
      for (const auto &s : tr.snapshots)
        for (std::size_t i = 0; i < s.size(); ++i)
          CHECK(s.values[i] == doctest::Approx(hp.values[i]).epsilon(1e-12).scale(1.0));
      CHECK_FALSE(detect_pinch(tr).pinched);
      CHECK_THROWS_AS(decay_rate(tr), DiagnosticError);
      const auto rel = relaxation_check(tr, 0.1);
      CHECK(rel.h1_distance <= 1e-10);
      CHECK(rel.h3_local_distance <= 1e-8);
      for (const auto &r : log_min_derivative_check(tr))
        CHECK(std::abs(r.residual) <= 1e-8);
    }
}

TEST_CASE("trajectory bookkeeping")
{
  SolverConfig c = quick_config(1.0);
  c.output_every = 7;
  const auto tr  = run(c, poly_perturbed(c.n, 1.0, 0.05));
  CHECK(tr.termination == Termination::reached_t_final);
  CHECK(tr.times.size() == tr.snapshots.size());
  CHECK(tr.times.size() == tr.snapshot_steps.size());
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == doctest::Approx(c.t_final));
  CHECK(tr.snapshot_steps.back() == c.total_steps());
  for (std::size_t k = 1; k < tr.times.size(); ++k)
    CHECK(tr.times[k] > tr.times[k - 1]);
  CHECK(tr.min_series.size() == tr.ledger.size());
  for (std::size_t k = 1; k < tr.ledger.size(); ++k)
    {
      CHECK(tr.ledger[k].cumulative_dissipation >= tr.ledger[k - 1].cumulative_dissipation);
      CHECK(tr.ledger[k].picard_iters >= 1);
    }
}

TEST_CASE("energy decreases and dissipation balances it")
{
  for (double P : {0.5, 1.0, 3.0})
    {
      SolverConfig c = quick_config(P);
      c.dt           = 1e-5;
      c.t_final      = 0.02;
      const auto h0  = P < 2.0 ? poly_perturbed(c.n, P, 0.05) : bump(c.n, P, 1.2);
      const auto tr  = run(c, h0);
      REQUIRE(tr.termination == Termination::reached_t_final);

      double violation = 0.0;
      for (std::size_t k = 1; k < tr.ledger.size(); ++k)
        violation += std::max(0.0, tr.ledger[k].energy - tr.ledger[k - 1].energy);
      const double drop = tr.ledger.front().energy - tr.ledger.back().energy;
      CHECK(drop > 0.0);
      CHECK(violation <= 0.01 * drop);
      CHECK(std::abs(drop - tr.ledger.back().cumulative_dissipation) <= 0.01 * drop);
      CHECK(tr.ledger.back().cumulative_dissipation <= 2.0 * (tr.ledger.front().energy - steady_energy(P)));
      for (const auto &row : tr.ledger)
        CHECK(row.dissipation >= 0.0);
    }
}

TEST_CASE("gradient distance to h_P is nonincreasing for small perturbations")
{
  SolverConfig c = quick_config(1.0);
  c.output_every = 1;
  c.t_final      = 0.02;
  const auto hp  = steady_profile(1.0, make_grid(c.n)).profile;
  const auto tr  = run(c, poly_perturbed(c.n, 1.0, 0.01));
  for (std::size_t k = 1; k < tr.snapshots.size(); ++k)
    CHECK(grad_distance(tr.snapshots[k], hp) <= grad_distance(tr.snapshots[k - 1], hp) + 1e-12);
}

TEST_CASE("mass changes by the boundary flux")
{
  std::vector<double> mismatch;
  for (std::size_t n : {101u, 201u, 401u})
    {
      SolverConfig c;
      c.pressure    = 1.0;
      c.n           = n;
      c.dt          = 1e-5;
      const auto h0 = poly_perturbed(n, 1.0, 0.05);
      const auto r  = step_nonlinear(h0, c);
      const double rate = (quadrature(r.step.profile.values, h0.grid) - quadrature(h0.values, h0.grid)) / c.dt;
      const auto  &w    = r.step.flux_field;
      const double boundary = -(w.back() - w.front());
      mismatch.push_back(std::abs(rate - boundary) / std::abs(boundary));
    }
  MESSAGE("relative mismatch " << mismatch[0] << " " << mismatch[1] << " " << mismatch[2]);
  CHECK(mismatch[0] <= 0.05);
  CHECK(mismatch[0] / mismatch[1] >= 3.0);
  CHECK(mismatch[1] / mismatch[2] >= 3.0);
}

TEST_CASE("even data stay even")
{
  for (double eps : {0.0, 1e-2})
    {
      SolverConfig c = quick_config(4.0);
      c.epsilon      = eps;
      c.t_final      = 0.03;
      const auto tr  = run(c, bump(c.n, 4.0, 1.2));
      for (const auto &s : tr.snapshots)
        for (std::size_t i = 0; i < s.size(); ++i)
          CHECK(std::abs(s.values[i] - s.values[s.size() - 1 - i]) <= 1e-9);
    }
}

TEST_CASE("pinch is detected for P > 2")
{
  SolverConfig c = quick_config(4.0);
  c.t_final      = 1.0;
  c.output_every = 20;
  const auto tr  = run(c, bump(c.n, 4.0, 1.2));
  REQUIRE(tr.termination == Termination::pinch_detected);
  CHECK(min_value(tr.final_profile()).h <= c.pinch_floor);
  CHECK(tr.times.back() < c.t_final);

  const auto rep = detect_pinch(tr);
  CHECK(rep.pinched);
  REQUIRE(rep.t_pinch.has_value());
  REQUIRE(rep.x_pinch.has_value());
  CHECK(*rep.t_pinch == doctest::Approx(tr.times.back()));
  CHECK(rep.h_min_series_tail.size() == 50);
  CHECK(rep.log_slope < 0.0);
  const double xp = contact_point(4.0);
  CHECK((std::abs(std::abs(*rep.x_pinch) - xp) <= 0.15 || std::abs(*rep.x_pinch) <= 0.15));

  CHECK_THROWS_AS(relaxation_check(tr, 0.0), std::invalid_argument);
}

TEST_CASE("relaxation and decay for P = 1")
{
  SolverConfig c = quick_config(1.0);
  c.t_final      = 1.0;
  c.output_every = 100;
  const auto tr  = run(c, poly_perturbed(c.n, 1.0, 0.05));
  const auto fit = decay_rate(tr);
  CHECK(fit.rate > 0.0);
  CHECK(fit.r_squared >= 0.99);
  CHECK(fit.r_squared <= 1.0);
  CHECK(fit.samples >= 20);
  const auto rel = relaxation_check(tr, default_delta_loc(1.0));
  CHECK(rel.h1_distance <= 1e-2);
  CHECK(rel.h3_local_distance <= rel.h3_distance + 1e-15);
  CHECK(rel.dissipation_end >= 0.0);

  SolverConfig sparse = c;
  sparse.output_every = 1000;
  CHECK_THROWS_AS(decay_rate(run(sparse, poly_perturbed(c.n, 1.0, 0.05))), DiagnosticError);
}

TEST_CASE("restart continues a run exactly")
{
  SolverConfig c = quick_config(1.0);
  const auto   h0   = poly_perturbed(c.n, 1.0, 0.05);
  const auto   full = run(c, h0);

  SolverConfig half = c;
  half.t_final      = 0.02;
  const auto first  = run(half, h0);
  const auto second = run(c, final_state(first));
  CHECK(second.first_step == 200);
  for (std::size_t i = 0; i < c.n; ++i)
    CHECK(second.final_profile().values[i] == full.final_profile().values[i]);
  CHECK(second.ledger.back().cumulative_dissipation == full.ledger.back().cumulative_dissipation);
}

TEST_CASE("epsilon continuation")
{
  SolverConfig c = quick_config(1.0);
  c.t_final      = 0.02;
  const auto hp  = steady_profile(1.0, make_grid(c.n)).profile;

  CHECK_THROWS_AS(epsilon_continuation(c, hp, {}), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_continuation(c, hp, {1e-2, 1e-1}), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_continuation(c, hp, {1e-1, 0.0}), std::invalid_argument);

  const auto steady = epsilon_continuation(c, hp, {1e-1, 1e-2, 1e-3});
  REQUIRE(steady.table.size() == 2);
  for (const auto &row : steady.table)
    CHECK(row.max_difference <= 1e-12);

  const auto res = epsilon_continuation(c, poly_perturbed(c.n, 1.0, 0.05), {1e-1, 1e-2, 1e-3, 1e-4});
  REQUIRE(res.table.size() == 3);
  for (const auto &r : res.runs)
    CHECK(r.has_value());
  CHECK(res.cauchy);
  for (std::size_t i = 1; i < res.table.size(); ++i)
    CHECK(res.table[i].max_difference < res.table[i - 1].max_difference);
  CHECK(res.table.back().max_difference <= 10.0 * res.table.front().max_difference * 0.1);
  CHECK(res.sup_difference_at(0, 0.02) > 0.0);
}

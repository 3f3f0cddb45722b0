#include <neckdown/io.hpp>
#include <neckdown/steady_states.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace neckdown
{

using nlohmann::json;

InitialCondition parse_initial_condition(const std::string &spec)
{
  InitialCondition ic;
  const auto       colon = spec.find(':');
  ic.family              = spec.substr(0, colon);
  const std::string arg  = colon == std::string::npos ? std::string{} : spec.substr(colon + 1);

  if (ic.family == "steady")
    {
      if (!arg.empty())
        throw std::invalid_argument("initial condition 'steady' takes no argument");
      ic.amplitude = 0.0;
      return ic;
    }
  if (ic.family == "file")
    {
      if (arg.empty())
        throw std::invalid_argument("initial condition 'file' needs a path, e.g. file:h0.json");
      ic.path      = arg;
      ic.amplitude = 0.0;
      return ic;
    }
  if (ic.family == "steady-perturbed-poly" || ic.family == "steady-perturbed-random" ||
      ic.family == "parabola-bump")
    {
      if (arg.empty())
        throw std::invalid_argument("initial condition '" + ic.family + "' needs an amplitude");
      std::size_t used = 0;
      try
        {
          ic.amplitude = std::stod(arg, &used);
        }
      catch (const std::exception &)
        {
          used = 0;
        }
      if (used != arg.size() || !std::isfinite(ic.amplitude))
        throw std::invalid_argument("invalid amplitude '" + arg + "' for initial condition " + ic.family);
      return ic;
    }
  throw std::invalid_argument("unknown initial condition family '" + ic.family +
                              "' (expected steady, steady-perturbed-poly, steady-perturbed-random, "
                              "parabola-bump or file)");
}

std::string format_initial_condition(const InitialCondition &ic)
{
  if (ic.family == "steady")
    return ic.family;
  if (ic.family == "file")
    return "file:" + ic.path.string();
  // shortest representation that reads back to the same double
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, ic.amplitude);
  return ic.family + ':' + std::string(buf, end);
}

Profile make_initial_profile(const InitialCondition &ic, const SolverConfig &cfg, std::uint64_t seed)
{
  const Grid   grid = make_grid(cfg.n);
  const double P    = cfg.pressure;
  const auto   hp   = steady_profile(P, grid);

  std::vector<double> v(grid.size());
  if (ic.family == "steady")
    v = hp.profile.values;
  else if (ic.family == "steady-perturbed-poly" || ic.family == "parabola-bump")
    {
      for (std::size_t i = 0; i < v.size(); ++i)
        {
          const double x    = grid.node(i);
          const double bump = ic.amplitude * (1.0 - x * x) * (1.0 - x * x);
          const double base = ic.family == "parabola-bump" ? 0.5 * P * (x * x - 1.0) + 1.0 : hp.profile.values[i];
          v[i]              = base + bump;
        }
    }
  else if (ic.family == "steady-perturbed-random")
    {
      std::mt19937_64                        rng(seed);
      std::uniform_int_distribution<int>     modes(1, 5);
      std::uniform_real_distribution<double> coef(-1.0, 1.0);
      const int                              count = modes(rng);
      std::vector<double>                    a(count);
      for (auto &c : a)
        c = coef(rng);
      for (std::size_t i = 0; i < v.size(); ++i)
        {
          const double x = grid.node(i);
          double       s = 0.0;
          for (int k = 1; k <= count; ++k)
            s += a[k - 1] * std::sin(k * std::numbers::pi * (x + 1.0) / 2.0) / k;
          v[i] = hp.profile.values[i] + ic.amplitude * s;
        }
    }
  else if (ic.family == "file")
    {
      std::ifstream in(ic.path);
      if (!in)
        throw std::runtime_error("cannot open initial condition file " + ic.path.string());
      const json j = json::parse(in);
      v            = j.at("values").get<std::vector<double>>();
      if (v.size() != grid.size())
        throw std::invalid_argument("initial condition file has " + std::to_string(v.size()) +
                                    " values but the grid has " + std::to_string(grid.size()) + " nodes");
    }
  else
    throw std::invalid_argument("unknown initial condition family '" + ic.family + "'");

  return project_initial_data(make_profile(grid, std::move(v), P));
}


namespace
{
  std::string scheme_name(TimeScheme s) { return s == TimeScheme::crank_nicolson ? "crank-nicolson" : "backward-euler"; }
  std::string rule_name(QuadratureRule r) { return r == QuadratureRule::simpson ? "simpson" : "trapezoid"; }
} // namespace

json to_json(const SolverConfig &cfg)
{
  return json{{"pressure", cfg.pressure},
              {"n", cfg.n},
              {"dt", cfg.dt},
              {"t_final", cfg.t_final},
              {"epsilon", cfg.epsilon},
              {"picard_tol", cfg.picard_tol},
              {"picard_max", cfg.picard_max},
              {"pinch_floor", cfg.pinch_floor},
              {"output_every", cfg.output_every},
              {"flux_diagnostics", cfg.flux_diagnostics},
              {"time_scheme", scheme_name(cfg.scheme)},
              {"quadrature", rule_name(cfg.quadrature)}};
}

void apply_json(SolverConfig &cfg, const json &j)
{
  if (!j.is_object())
    throw std::invalid_argument("configuration must be a JSON object");
  for (const auto &[key, value] : j.items())
    {
      if (key == "pressure")
        cfg.pressure = value.get<double>();
      else if (key == "n")
        cfg.n = value.get<std::size_t>();
      else if (key == "dt")
        cfg.dt = value.get<double>();
      else if (key == "t_final")
        cfg.t_final = value.get<double>();
      else if (key == "epsilon")
        cfg.epsilon = value.get<double>();
      else if (key == "picard_tol")
        cfg.picard_tol = value.get<double>();
      else if (key == "picard_max")
        cfg.picard_max = value.get<int>();
      else if (key == "pinch_floor")
        cfg.pinch_floor = value.get<double>();
      else if (key == "output_every")
        cfg.output_every = value.get<std::size_t>();
      else if (key == "flux_diagnostics")
        cfg.flux_diagnostics = value.get<bool>();
      else if (key == "time_scheme")
        {
          const auto s = value.get<std::string>();
          if (s == "backward-euler")
            cfg.scheme = TimeScheme::backward_euler;
          else if (s == "crank-nicolson")
            cfg.scheme = TimeScheme::crank_nicolson;
          else
            throw std::invalid_argument("unknown time scheme '" + s + "'");
        }
      else if (key == "quadrature")
        {
          const auto s = value.get<std::string>();
          if (s == "trapezoid")
            cfg.quadrature = QuadratureRule::trapezoid;
          else if (s == "simpson")
            cfg.quadrature = QuadratureRule::simpson;
          else
            throw std::invalid_argument("unknown quadrature rule '" + s + "'");
        }
      else
        throw std::invalid_argument("unknown configuration key '" + key + "'");
    }
}

json to_json(const RunManifest &m)
{
  json j{{"config", to_json(m.config)},
         {"initial_condition", format_initial_condition(m.initial_condition)},
         {"out_dir", m.out_dir.string()},
         {"seed", m.seed},
         {"outputs",
          {{"ledger", m.ledger_path().string()},
           {"snapshots", m.snapshots_path().string()},
           {"report", m.report_path().string()}}}};
  j["checkpoint"] = m.checkpoint ? json(m.checkpoint->string()) : json(nullptr);
  j["restore"]    = m.restore ? json(m.restore->string()) : json(nullptr);
  return j;
}


void write_ledger_csv(std::ostream &os, const Trajectory &traj)
{
  os << "t,energy,dissipation,cum_dissipation,h_min,x_min,picard_iters\n";
  os << std::setprecision(17);
  for (const auto &r : traj.ledger)
    os << r.time << ',' << r.energy << ',' << r.dissipation << ',' << r.cumulative_dissipation << ','
       << r.h_min << ',' << r.x_min << ',' << r.picard_iters << '\n';
}

void write_flux_csv(std::ostream &os, const Trajectory &traj)
{
  os << "t,weighted_flux_norm,flux_curvature_norm,identity_residual\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < traj.flux_rows.size(); ++k)
    {
      const auto &r = traj.flux_rows[k];
      os << traj.ledger[k + 1].time << ',' << r.weighted_flux_norm << ',' << r.flux_curvature_norm << ','
         << r.identity_residual << '\n';
    }
}

void write_snapshots_jsonl(std::ostream &os, const Trajectory &traj)
{
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
    os << json{{"t", traj.times[k]}, {"values", traj.snapshots[k].values}}.dump() << '\n';
}

json make_report(const Trajectory &traj)
{
  json rep;
  rep["termination"] = to_string(traj.termination);
  if (!traj.failure_message.empty())
    rep["failure"] = traj.failure_message;
  rep["steps"]              = traj.last_step;
  rep["t_end"]              = static_cast<double>(traj.last_step) * traj.config.dt;
  rep["condition_estimate"] = traj.condition_estimate;

  const auto pinch = detect_pinch(traj);
  json       jp{{"pinched", pinch.pinched}, {"log_slope", pinch.log_slope}};
  jp["t_pinch"] = pinch.t_pinch ? json(*pinch.t_pinch) : json(nullptr);
  jp["x_pinch"] = pinch.x_pinch ? json(*pinch.x_pinch) : json(nullptr);
  json tail     = json::array();
  for (const auto &[t, h] : pinch.h_min_series_tail)
    tail.push_back({t, h});
  jp["h_min_series_tail"] = tail;
  rep["pinch"]            = jp;

  try
    {
      const auto fit = decay_rate(traj);
      rep["decay"] = {{"rate", fit.rate}, {"prefactor", fit.prefactor}, {"r_squared", fit.r_squared},
                      {"samples", fit.samples}};
    }
  catch (const DiagnosticError &e)
    {
      rep["decay"] = {{"error", e.what()}};
    }

  const auto relax = relaxation_check(traj, default_delta_loc(traj.config.pressure));
  rep["relaxation"] = {{"h1_distance", relax.h1_distance},
                       {"h3_local_distance", relax.h3_local_distance},
                       {"h3_distance", relax.h3_distance},
                       {"dissipation_end", relax.dissipation_end},
                       {"delta_loc", relax.delta_loc}};
  return rep;
}


void save_checkpoint(const std::filesystem::path &path, const Trajectory &traj)
{
  const RunState st = final_state(traj);
  json           j{{"format", "neckdown-checkpoint"},
                   {"version", 1},
                   {"config", to_json(traj.config)},
                   {"step", st.step},
                   {"time", static_cast<double>(st.step) * traj.config.dt},
                   {"cumulative_dissipation", st.cumulative_dissipation},
                   {"pressure", st.profile.pressure},
                   {"values", st.profile.values}};
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump(1) << '\n';
}

RunState load_checkpoint(const std::filesystem::path &path, SolverConfig *stored_config)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open checkpoint " + path.string());
  const json j = json::parse(in);
  if (j.value("format", std::string{}) != "neckdown-checkpoint")
    throw std::invalid_argument(path.string() + " is not a checkpoint file");

  SolverConfig cfg;
  apply_json(cfg, j.at("config"));
  if (stored_config)
    *stored_config = cfg;

  auto       values = j.at("values").get<std::vector<double>>();
  const Grid grid   = make_grid(values.size());
  return RunState{make_profile(grid, std::move(values), j.at("pressure").get<double>()),
                  j.at("step").get<std::size_t>(), j.at("cumulative_dissipation").get<double>()};
}


int exit_code(Termination t)
{
  switch (t)
    {
      case Termination::reached_t_final:
      case Termination::pinch_detected:
        return 0;
      case Termination::picard_failure:
        return 3;
      case Termination::solver_failure:
        return 4;
    }
  return 1;
}

int run_command(const RunManifest &m, std::ostream &log)
{
  m.config.validate();
  std::filesystem::create_directories(m.out_dir);

  Trajectory traj;
  if (m.restore)
    {
      RunState st = load_checkpoint(*m.restore);
      if (st.profile.size() != m.config.n || st.profile.pressure != m.config.pressure)
        throw std::invalid_argument("checkpoint grid or pressure does not match the configuration");
      traj = run(m.config, st);
    }
  else
    traj = run(m.config, make_initial_profile(m.initial_condition, m.config, m.seed));

  auto open = [](const std::filesystem::path &p) {
    std::ofstream out(p);
    if (!out)
      throw std::runtime_error("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(m.ledger_path());
    write_ledger_csv(out, traj);
  }
  {
    auto out = open(m.snapshots_path());
    write_snapshots_jsonl(out, traj);
  }
  if (m.config.flux_diagnostics)
    {
      auto out = open(m.flux_path());
      write_flux_csv(out, traj);
    }
  const json report = make_report(traj);
  {
    auto out = open(m.report_path());
    out << report.dump(2) << '\n';
  }
  if (m.checkpoint)
    save_checkpoint(*m.checkpoint, traj);

  log << "termination: " << to_string(traj.termination) << " after " << traj.last_step << " steps\n";
  if (!traj.failure_message.empty())
    log << "failure: " << traj.failure_message << '\n';
  return exit_code(traj.termination);
}

} // namespace neckdown

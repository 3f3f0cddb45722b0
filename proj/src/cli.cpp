#include <neckdown/cli.hpp>
#include <neckdown/steady_states.hpp>
#include <neckdown/verify.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace neckdown
{

using nlohmann::json;

namespace
{
  struct RunOptions
  {
    SolverConfig  flags; // values written by CLI11; only those with count() > 0 are applied
    std::string   ic;
    std::string   pinch_floor; // a number or "grid"
    std::string   out_dir;
    std::string   checkpoint;
    std::string   restore;
    std::string   config_file;
    std::uint64_t seed = 0;
    bool          flux = false;
    bool          cn   = false;
    bool          simpson = false;

    std::vector<std::pair<std::string, CLI::Option *>> opts;

    CLI::Option *opt(const std::string &name) const
    {
      for (const auto &[n, o] : opts)
        if (n == name)
          return o;
      return nullptr;
    }
    bool given(const std::string &name) const
    {
      const auto *o = opt(name);
      return o && o->count() > 0;
    }
  };

  void add_run_options(CLI::App &app, RunOptions &o)
  {
    auto add = [&](const std::string &name, auto &target, const std::string &help) {
      o.opts.emplace_back(name, app.add_option(name, target, help));
    };
    add("--pressure", o.flags.pressure, "boundary pressure P > 0");
    add("--epsilon", o.flags.epsilon, "mobility regularization (0 = bare equation)");
    add("--n", o.flags.n, "grid nodes (odd, >= 9)");
    add("--dt", o.flags.dt, "time step");
    add("--t-final", o.flags.t_final, "final time");
    add("--picard-tol", o.flags.picard_tol, "Picard tolerance, relative H1");
    add("--picard-max", o.flags.picard_max, "maximum Picard iterations per step");
    add("--pinch-floor", o.pinch_floor, "stop when min h falls to this value, or \"grid\" for 10 dx^2");
    add("--output-every", o.flags.output_every, "snapshot interval in steps");
    add("--ic", o.ic, "initial condition family[:argument]");
    add("--out-dir", o.out_dir, "output directory");
    add("--checkpoint", o.checkpoint, "write a checkpoint of the final state here");
    add("--restore", o.restore, "resume from this checkpoint");
    add("--config", o.config_file, "JSON configuration file");
    add("--seed", o.seed, "seed of the random initial condition family");
    o.opts.emplace_back("--flux-diagnostics", app.add_flag("--flux-diagnostics", o.flux, "write flux energy diagnostics"));
    o.opts.emplace_back("--cn", app.add_flag("--cn", o.cn, "Crank-Nicolson time stepping"));
    o.opts.emplace_back("--simpson", app.add_flag("--simpson", o.simpson, "Simpson quadrature"));
  }

  RunManifest resolve(const RunOptions &o)
  {
    RunManifest m;
    json        file_cfg;
    if (o.given("--config"))
      {
        std::ifstream in(o.config_file);
        if (!in)
          throw std::invalid_argument("cannot open configuration file " + o.config_file);
        file_cfg = json::parse(in);
        if (!file_cfg.is_object())
          throw std::invalid_argument("configuration file must hold a JSON object");
      }

    // Manifest-level keys may sit next to the solver keys in the file.
    json        solver_keys = json::object();
    std::string floor_text;
    for (const auto &[key, value] : file_cfg.items())
      {
        if (key == "pinch_floor" && value.is_string())
          floor_text = value.get<std::string>();
        else if (key == "ic")
          m.initial_condition = parse_initial_condition(value.get<std::string>());
        else if (key == "out_dir")
          m.out_dir = value.get<std::string>();
        else if (key == "seed")
          m.seed = value.get<std::uint64_t>();
        else if (key == "checkpoint")
          m.checkpoint = value.get<std::string>();
        else if (key == "restore")
          m.restore = value.get<std::string>();
        else
          solver_keys[key] = value;
      }
    apply_json(m.config, solver_keys);

    auto &c = m.config;
    if (o.given("--pressure"))
      c.pressure = o.flags.pressure;
    if (o.given("--epsilon"))
      c.epsilon = o.flags.epsilon;
    if (o.given("--n"))
      c.n = o.flags.n;
    if (o.given("--dt"))
      c.dt = o.flags.dt;
    if (o.given("--t-final"))
      c.t_final = o.flags.t_final;
    if (o.given("--picard-tol"))
      c.picard_tol = o.flags.picard_tol;
    if (o.given("--picard-max"))
      c.picard_max = o.flags.picard_max;
    if (o.given("--pinch-floor"))
      floor_text = o.pinch_floor;
    if (o.given("--output-every"))
      c.output_every = o.flags.output_every;
    if (o.given("--flux-diagnostics"))
      c.flux_diagnostics = true;
    if (o.given("--cn"))
      c.scheme = TimeScheme::crank_nicolson;
    if (o.given("--simpson"))
      c.quadrature = QuadratureRule::simpson;

    if (o.given("--ic"))
      m.initial_condition = parse_initial_condition(o.ic);
    if (o.given("--seed"))
      m.seed = o.seed;
    if (o.given("--checkpoint"))
      m.checkpoint = o.checkpoint;
    if (o.given("--restore"))
      m.restore = o.restore;
    if (o.given("--out-dir"))
      m.out_dir = o.out_dir;
    // resolved last: the grid option depends on n
    if (floor_text == "grid")
      c.pinch_floor = grid_pinch_floor(c.n);
    else if (!floor_text.empty())
      {
        std::size_t used = 0;
        try
          {
            c.pinch_floor = std::stod(floor_text, &used);
          }
        catch (const std::exception &)
          {
            used = 0;
          }
        if (used == 0 || used != floor_text.size())
          throw std::invalid_argument("pinch floor must be a number or \"grid\", got \"" + floor_text + "\"");
      }
    if (m.out_dir.empty())
      {
        const char *env = std::getenv("NECKDOWN_OUT_DIR");
        m.out_dir       = env && *env ? env : "neckdown_out";
      }

    c.validate();
    return m;
  }

  void parse_into(CLI::App &app, const std::vector<std::string> &args)
  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  }

  std::string pressure_tag(double P)
  {
    std::ostringstream os;
    os << "P_" << P;
    return os.str();
  }

  int do_steady(double P, std::size_t n, const std::string &out_path, std::ostream &out)
  {
    const Grid grid = make_grid(n);
    const auto st   = steady_profile(P, grid);
    json       j{{"pressure", P},
                 {"contact_point", st.contact_point},
                 {"energy", steady_energy(P)},
                 {"energy_quadrature", energy(st.profile, P)},
                 {"x", std::vector<double>(grid.nodes().begin(), grid.nodes().end())},
                 {"h", st.profile.values}};
    if (out_path.empty())
      out << j.dump(2) << '\n';
    else
      {
        std::ofstream f(out_path);
        if (!f)
          throw std::runtime_error("cannot write " + out_path);
        f << j.dump(2) << '\n';
        out << "x_P = " << std::setprecision(17) << st.contact_point << ", E(h_P) = " << steady_energy(P) << '\n';
      }
    return 0;
  }

  int do_sweep(const RunManifest &base, const std::vector<double> &pressures, std::ostream &out, std::ostream &err)
  {
    struct Outcome
    {
      double      P = 0.0;
      int         code = 0;
      json        report;
      std::string error;
    };
    std::vector<Outcome>     outcomes(pressures.size());
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < pressures.size(); ++i)
      workers.emplace_back([&, i] {
        Outcome &o = outcomes[i];
        o.P        = pressures[i];
        try
          {
            RunManifest m     = base;
            m.config.pressure = pressures[i];
            m.out_dir         = base.out_dir / pressure_tag(pressures[i]);
            m.checkpoint.reset();
            m.restore.reset();
            std::ostringstream log;
            o.code = run_command(m, log);
            std::ifstream in(m.report_path());
            o.report = json::parse(in);
          }
        catch (const std::exception &e)
          {
            o.code  = 2;
            o.error = e.what();
          }
      });
    for (auto &w : workers)
      w.join();

    std::filesystem::create_directories(base.out_dir);
    std::ofstream summary(base.out_dir / "summary.csv");
    summary << "pressure,termination,t_end,pinched,t_pinch,decay_rate,h1_distance\n";
    summary << std::setprecision(17);
    out << std::left << std::setw(10) << "P" << std::setw(16) << "termination" << std::setw(14) << "t_end"
        << std::setw(10) << "pinched" << std::setw(14) << "decay_rate" << "h1_distance\n";
    int status = 0;
    for (const auto &o : outcomes)
      {
        if (!o.error.empty())
          {
            err << "P = " << o.P << ": " << o.error << '\n';
            summary << o.P << ",error,,,,,\n";
            status = std::max(status, o.code);
            continue;
          }
        status = std::max(status, o.code);
        const auto &r      = o.report;
        const auto  rate   = r["decay"].contains("rate") ? r["decay"]["rate"].get<double>() : std::nan("");
        const auto  tpinch = r["pinch"]["t_pinch"].is_null() ? std::nan("") : r["pinch"]["t_pinch"].get<double>();
        summary << o.P << ',' << r["termination"].get<std::string>() << ',' << r["t_end"].get<double>() << ','
                << r["pinch"]["pinched"].get<bool>() << ',' << tpinch << ',' << rate << ','
                << r["relaxation"]["h1_distance"].get<double>() << '\n';
        out << std::left << std::setw(10) << o.P << std::setw(16) << r["termination"].get<std::string>()
            << std::setw(14) << r["t_end"].get<double>() << std::setw(10)
            << (r["pinch"]["pinched"].get<bool>() ? "yes" : "no") << std::setw(14) << rate
            << r["relaxation"]["h1_distance"].get<double>() << '\n';
      }
    return status;
  }

  int do_continuation(const RunManifest &m, const std::vector<double> &schedule, std::ostream &out)
  {
    const Profile h0  = make_initial_profile(m.initial_condition, m.config, m.seed);
    const auto    res = epsilon_continuation(m.config, h0, schedule);

    json table = json::array();
    out << std::left << std::setw(14) << "eps" << std::setw(14) << "eps_next" << "max sup difference\n";
    for (const auto &row : res.table)
      {
        table.push_back({{"eps_coarse", row.eps_coarse},
                         {"eps_fine", row.eps_fine},
                         {"times", row.times},
                         {"sup_differences", row.sup_differences},
                         {"max_difference", row.max_difference}});
        out << std::setw(14) << row.eps_coarse << std::setw(14) << row.eps_fine << row.max_difference << '\n';
      }
    json runs = json::array();
    for (std::size_t i = 0; i < res.runs.size(); ++i)
      {
        json r{{"epsilon", res.schedule[i]}};
        if (res.runs[i])
          r["termination"] = to_string(res.runs[i]->termination);
        else
          r["error"] = res.errors[i];
        runs.push_back(r);
      }
    std::filesystem::create_directories(m.out_dir);
    std::ofstream f(m.out_dir / "continuation.json");
    f << json{{"cauchy", res.cauchy}, {"runs", runs}, {"table", table}}.dump(2) << '\n';
    out << (res.cauchy ? "consecutive differences decrease" : "WARNING: differences are not decreasing") << '\n';
    return 0;
  }

  int do_verify(bool quick, std::ostream &out)
  {
    const auto results = run_verification(quick);
    bool       all     = true;
    for (const auto &r : results)
      {
        out << (r.passed ? "[PASS] " : "[FAIL] ") << std::left << std::setw(28) << r.name << r.detail << '\n';
        all = all && r.passed;
      }
    return all ? 0 : 1;
  }
} // namespace


RunManifest parse_run_manifest(const std::vector<std::string> &args)
{
  CLI::App   app{"run"};
  RunOptions o;
  add_run_options(app, o);
  parse_into(app, args);
  return resolve(o);
}

int cli_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Lubrication model of Hele-Shaw neck pinch-off: simulation and diagnostics", "neckdown"};
  app.require_subcommand(1);

  RunOptions run_opts, sweep_opts, cont_opts;

  auto *run_cmd = app.add_subcommand("run", "evolve one configuration and write ledger, snapshots and report");
  add_run_options(*run_cmd, run_opts);

  auto               *sweep_cmd = app.add_subcommand("sweep", "run several pressures in parallel");
  std::vector<double> pressures{0.5, 1.0, 1.5, 3.0, 4.0};
  add_run_options(*sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--pressures", pressures, "comma separated pressures")->delimiter(',');

  auto       *steady_cmd = app.add_subcommand("steady", "dump the steady profile h_P, x_P and E(h_P)");
  double      steady_P   = 1.0;
  std::size_t steady_n   = 201;
  std::string steady_out;
  steady_cmd->add_option("--pressure", steady_P, "boundary pressure P > 0")->required();
  steady_cmd->add_option("--n", steady_n, "grid nodes");
  steady_cmd->add_option("--out", steady_out, "write the JSON here instead of stdout");

  auto               *cont_cmd = app.add_subcommand("continuation", "run an epsilon schedule and tabulate differences");
  std::vector<double> schedule{1e-1, 1e-2, 1e-3, 1e-4};
  add_run_options(*cont_cmd, cont_opts);
  cont_cmd->add_option("--eps-schedule", schedule, "strictly decreasing epsilons")->delimiter(',');

  auto *verify_cmd = app.add_subcommand("verify", "run the invariant checks and print a pass/fail table");
  bool  quick      = false;
  verify_cmd->add_flag("--quick", quick, "short version");

  try
    {
      parse_into(app, args);
    }
  catch (const CLI::ParseError &e)
    {
      return app.exit(e, out, err);
    }

  try
    {
      if (run_cmd->parsed())
        {
          const auto m = resolve(run_opts);
          out << to_json(m).dump(2) << '\n';
          return run_command(m, out);
        }
      if (sweep_cmd->parsed())
        {
          const auto m = resolve(sweep_opts);
          out << to_json(m).dump(2) << '\n';
          return do_sweep(m, pressures, out, err);
        }
      if (steady_cmd->parsed())
        {
          contact_point(steady_P);
          return do_steady(steady_P, steady_n, steady_out, out);
        }
      if (cont_cmd->parsed())
        {
          auto m = resolve(cont_opts);
          if (m.config.epsilon == 0.0 && !cont_opts.given("--epsilon"))
            m.config.epsilon = schedule.empty() ? 0.0 : schedule.front();
          out << to_json(m).dump(2) << '\n';
          return do_continuation(m, schedule, out);
        }
      if (verify_cmd->parsed())
        return do_verify(quick, out);
    }
  catch (const std::exception &e)
    {
      err << "error: " << e.what() << '\n';
      return 2;
    }
  return 1;
}

} // namespace neckdown

#ifndef NECKDOWN_IO_HPP
#define NECKDOWN_IO_HPP

#include <neckdown/evolve.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace neckdown
{

/// Registered initial-condition families.
struct InitialCondition
{
  std::string           family = "steady-perturbed-poly";
  double                amplitude = 0.05;
  std::filesystem::path path; // only for family "file"
};

/**
 * Parses "family[:argument]". Families: steady, steady-perturbed-poly:A,
 * steady-perturbed-random:A, parabola-bump:A, file:PATH.
 */
InitialCondition parse_initial_condition(const std::string &spec);
std::string      format_initial_condition(const InitialCondition &ic);

/**
 * Samples the initial condition on the configuration's grid and projects it
 * onto the discrete boundary rows.
 *
 *   steady                   h_P
 *   steady-perturbed-poly:A  h_P + A (1 - x^2)^2
 *   steady-perturbed-random:A h_P + A sum_k a_k sin(k pi (x+1)/2), k <= 5, seeded
 *   parabola-bump:A          (P/2)(x^2 - 1) + 1 + A (1 - x^2)^2
 *   file:PATH                JSON object with a "values" array
 */
Profile make_initial_profile(const InitialCondition &ic, const SolverConfig &cfg, std::uint64_t seed);


struct RunManifest
{
  SolverConfig                         config;
  InitialCondition                     initial_condition;
  std::filesystem::path                out_dir;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> restore;
  std::uint64_t                        seed = 0;

  std::filesystem::path ledger_path() const { return out_dir / "ledger.csv"; }
  std::filesystem::path snapshots_path() const { return out_dir / "snapshots.jsonl"; }
  std::filesystem::path report_path() const { return out_dir / "report.json"; }
  std::filesystem::path flux_path() const { return out_dir / "flux_diagnostics.csv"; }
};

nlohmann::json to_json(const SolverConfig &cfg);
/// Overrides the fields present in `j`; unknown keys are rejected.
void apply_json(SolverConfig &cfg, const nlohmann::json &j);

nlohmann::json to_json(const RunManifest &m);


/// Header `t,energy,dissipation,cum_dissipation,h_min,x_min,picard_iters`, 17 significant digits.
void write_ledger_csv(std::ostream &os, const Trajectory &traj);
void write_flux_csv(std::ostream &os, const Trajectory &traj);
/// One `{"t": ..., "values": [...]}` object per line.
void write_snapshots_jsonl(std::ostream &os, const Trajectory &traj);

/// {"termination", "pinch", "decay", "relaxation"}; decay holds an "error" field when the fit is not meaningful.
nlohmann::json make_report(const Trajectory &traj);


void     save_checkpoint(const std::filesystem::path &path, const Trajectory &traj);
RunState load_checkpoint(const std::filesystem::path &path, SolverConfig *stored_config = nullptr);


/// Exit status of a run: 0 for ReachedTFinal or PinchDetected, nonzero otherwise.
int exit_code(Termination t);

/// Runs the manifest and writes ledger, snapshots, report (and checkpoint if requested).
int run_command(const RunManifest &manifest, std::ostream &log);

} // namespace neckdown

#endif

#ifndef NECKDOWN_VERIFY_HPP
#define NECKDOWN_VERIFY_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace neckdown
{

/**
 * Decay rate of the k-th eigenmode sin(k pi (x+1)/2) of the constant
 * mobility linear step, measured as -ln(a_N / a_0) / (N dt) from the
 * projection of h - h_P onto the mode after `steps` steps (P = 1).
 */
double measure_mode_decay_rate(std::size_t n, int k, double dt, std::size_t steps, double mobility_value = 1.0);

/// Ratio of flux identity residuals for 1 + 0.2 sin(pi x) between n and 2n - 1 nodes.
double flux_identity_ratio(std::size_t n);

struct CheckResult
{
  std::string name;
  bool        passed = false;
  std::string detail;
};

/// Invariant checks behind the `verify` subcommand; `quick` keeps them to a few seconds.
std::vector<CheckResult> run_verification(bool quick);

} // namespace neckdown

#endif

#ifndef NECKDOWN_CLI_HPP
#define NECKDOWN_CLI_HPP

#include <neckdown/io.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace neckdown
{

/**
 * Resolves the flags of the `run` subcommand (without the subcommand name)
 * into a manifest. Precedence: built-in defaults, then the JSON file given
 * by --config, then explicit flags. The output directory defaults to
 * $NECKDOWN_OUT_DIR, else "neckdown_out".
 */
RunManifest parse_run_manifest(const std::vector<std::string> &args);

/// Entry point of the command line tool; returns the process exit status.
int cli_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace neckdown

#endif

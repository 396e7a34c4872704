#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "glmeissner/config.hpp"

namespace glmeissner {

enum ExitCode { kExitOk = 0, kExitValidation = 2, kExitSolver = 3 };

const std::vector<std::string>& subcommand_names();

// Runs one subcommand, writes manifest.json, results.json and the
// subcommand's CSV/VTK files into cfg.output_dir, and returns the one-line
// summary. Throws Error on failure.
nlohmann::ordered_json run_subcommand(const std::string& name, const RunConfig& cfg);

// Full command line: glmeissner <subcommand> --config <path> [--output <dir>]
// [--threads N]. Prints the summary (or an error object) as one JSON line on
// `out`, diagnostics on `err`, and returns the exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Analytic test configuration for the splitting check, scaled to the shape.
Complex splitcheck_u(const Shape& shape, const Vec3& p);
Vec3 splitcheck_A(const Shape& shape, const Vec3& p);

}  // namespace glmeissner

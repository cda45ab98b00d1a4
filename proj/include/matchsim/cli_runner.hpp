#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "matchsim/core_model.hpp"

namespace matchsim {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitTestFailed = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::optional<ModelParams> params;
  std::size_t agents = 1000;
  std::size_t periods = 10;
  std::uint64_t seed = 0;
  std::size_t replications = 1;
  std::optional<std::string> output_path;

  // Subcommand options ("options" object in the config file).
  std::size_t max_n = 8;            // verify-oracle
  std::optional<std::string> golden_dir;
  std::size_t pairs = 50;           // test-independence, test-markov-ci
  double alpha = 0.01;
  bool planted = false;             // test-independence power check
  std::size_t subset_pairs = 5;     // test-cross-section
  double tol = 1e-12;               // steady-state
  std::size_t max_iter = 1'000'000;
  std::optional<TypeDistribution> start;
  std::optional<std::string> trace_path;  // simulate: per-agent traces
};

// Command-line values; each one set overrides the config file.
struct CliOverrides {
  std::optional<std::size_t> agents;
  std::optional<std::size_t> periods;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::optional<std::string> output_path;
  std::optional<std::size_t> max_n;
  std::optional<std::string> golden_dir;
  std::optional<std::size_t> pairs;
  std::optional<double> alpha;
  std::optional<bool> planted;
  std::optional<std::size_t> subset_pairs;
  std::optional<std::string> trace_path;
};

// Parses the JSON config text. Throws Error(kParseError) with the field or
// line/column at fault, or ValidationError from validate_params.
RunConfig parse_config_text(std::string_view text);

// Reads `path` (when given), applies the overrides and checks the result.
RunConfig parse_config(const std::optional<std::string>& path, const CliOverrides& flags);

inline constexpr std::string_view kSubcommands[] = {
    "simulate", "evolve", "steady-state", "verify-oracle", "test-independence",
    "test-markov-ci", "test-cross-section", "demo-hw"};

// Runs one subcommand. Primary output goes to config.output_path or `out`;
// diagnostics to `err`. Returns one of the exit codes above.
int run_subcommand(std::string_view name, const RunConfig& config, std::ostream& out,
                   std::ostream& err);

// Full command-line entry point.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace matchsim

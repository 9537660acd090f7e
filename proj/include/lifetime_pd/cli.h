#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lifetime_pd {

inline constexpr const char* kToolVersion = "1.0.0";

enum class Subcommand { kRun, kScenarios, kRiccati, kDemoInstability, kCheckBounds };

struct CliInvocation {
  Subcommand subcommand = Subcommand::kRun;
  std::filesystem::path config_path;
  std::filesystem::path output_dir = "lpd_out";
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::string method = "all";
  std::string scenario = "all";
  unsigned threads = 0;  // 0: hardware concurrency
  bool emit_traces = false;
  bool help_requested = false;
  std::string help_text;
};

/// Parses argv (without the program name). Throws UsageError for malformed
/// or unknown arguments and ConfigError when the config file is missing.
CliInvocation parse_and_validate(const std::vector<std::string>& args);

/// Executes a parsed invocation, writing files under its output directory
/// and a readable report to `out`. Returns the exit status; module errors
/// propagate as exceptions.
int execute(const CliInvocation& invocation, std::ostream& out);

/// Full front end: parse, execute and map errors to exit codes
/// (0 success, 1 runtime failure, 2 usage, 3 config).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lifetime_pd

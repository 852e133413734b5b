#ifndef ADAPTIVE_OPE_CONFIG_HPP
#define ADAPTIVE_OPE_CONFIG_HPP

#include "adaptive_ope/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aope {

/// Resolved run configuration: every scenario x T combination to execute.
struct RunConfig {
  std::vector<Scenario> scenarios;
  std::filesystem::path out = "results";
  unsigned jobs = 1;
  bool dry_run = false;
  // The merged JSON document the scenarios were built from (echoed into meta.json).
  std::string resolved;
};

/// Command-line values; unset members leave the file/preset value alone.
struct CliOverrides {
  std::optional<std::string> scenario;
  std::optional<std::string> periods;     // comma separated
  std::optional<std::size_t> trials;
  std::optional<std::string> estimators;  // comma separated
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> config;      // path to a JSON document
  std::optional<std::string> preset;      // name under the presets directory, or a path
  std::optional<unsigned> jobs;
  bool dry_run = false;
};

/// Directory holding the checked-in preset documents.
std::filesystem::path presets_directory();

/// Preset document, then config file, then flags; unknown keys throw ConfigurationError naming
/// the key. ADAPTIVE_OPE_JOBS is consulted when no --jobs flag is given.
RunConfig parse_config(const CliOverrides& overrides);

/// Builds scenarios from an already merged JSON document (serialized).
RunConfig config_from_json(const std::string& document);

/// Full command-line entry point. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Fixed-width table of metric rows.
void print_metrics(const std::vector<MetricsRow>& rows, std::ostream& out);

}  // namespace aope

#endif  // ADAPTIVE_OPE_CONFIG_HPP

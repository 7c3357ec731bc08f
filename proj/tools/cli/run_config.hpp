#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <mvfbm/fbm.hpp>
#include <mvfbm/model.hpp>

namespace mvfbm::cli {

enum class Command { Simulate, Convergence, Chaos, FbmCheck, Moments };

std::string_view to_string(Command command) noexcept;

struct RunConfig {
  Command command = Command::Convergence;
  std::string profile = "desk";
  std::string model = "example41";
  PresetParameters preset{};
  double hurst = 0.7;
  double horizon = 1.0;
  std::size_t steps = 256;
  std::vector<double> deltas{1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  double reference_delta = 1.0 / 1024;
  std::size_t particles = 200;
  std::size_t replications = 50;
  double theta = 2.0;
  std::uint64_t seed = 1;
  SamplerKind sampler = SamplerKind::Circulant;
  std::filesystem::path output_dir = "runs";
  bool emit_plot = false;
  std::size_t workers = 0;
  std::vector<std::size_t> particle_counts{50, 100, 200, 400};
  double q = 4.0;
  std::size_t paths = 10000;
  bool full_trajectory = false;
};

/// Every key accepted in a config file or as a `--key` flag.
const std::vector<std::string>& known_keys();

/// Flat `key = value` document; `#` starts a comment. Unknown keys are errors.
std::map<std::string, std::string> parse_config_text(std::istream& in, const std::string& origin);

/// Resolve raw key/value pairs into a validated config. The profile is
/// applied first, then every explicit key. Throws ConfigError naming the key.
RunConfig resolve_config(const std::map<std::string, std::string>& values);

/// The fully resolved config in config-file syntax.
std::string echo_config(const RunConfig& config);

/// Parsing stopped without a config: usage text or an error, with an exit status.
struct ParseExit {
  int status = 2;
  std::string message;
};

/// Command-line flags (`--key value`) override values from `--config FILE`.
std::variant<RunConfig, ParseExit> parse_config(const std::vector<std::string>& args);

struct DispatchResult {
  int status = 0;                   // 0 success, 1 numerical failure, 2 configuration failure
  std::filesystem::path directory;  // empty if nothing was written
};

/// Runs the configured command and writes report.csv, report.json,
/// config.echo (and plot.svg when requested) under
/// `<output_dir>/<command>-<timestamp>/`. Prints a one-line summary to `out`.
DispatchResult dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace mvfbm::cli

#include "cli/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <mvfbm/error.hpp>

namespace mvfbm::cli {

std::string_view to_string(Command command) noexcept {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Convergence: return "convergence";
    case Command::Chaos: return "chaos";
    case Command::FbmCheck: return "fbm-check";
    case Command::Moments: return "moments";
  }
  return "unknown";
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "command", "profile",   "model",     "x0",      "xi",   "drift-rate", "hurst",  "horizon",
      "steps",   "deltas",    "reference-delta", "particles", "replications", "theta", "seed",  "sampler",
      "out",     "plot",      "workers",   "ns",      "q",    "paths",      "full-trajectory"};
  return keys;
}

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

bool is_known(const std::string& key) {
  const auto& keys = known_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw ConfigError(fmt::format("{}: {}", key, message));
}

/// Plain decimal, or a power of two written as `2^-5`.
double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    if (t.rfind("2^", 0) == 0) {
      const double exponent = std::stod(t.substr(2), &used);
      if (used != t.size() - 2) fail(key, fmt::format("'{}' is not a number", text));
      return std::exp2(exponent);
    }
    const double v = std::stod(t, &used);
    if (used != t.size()) fail(key, fmt::format("'{}' is not a number", text));
    return v;
  } catch (const std::invalid_argument&) {
    fail(key, fmt::format("'{}' is not a number", text));
  } catch (const std::out_of_range&) {
    fail(key, fmt::format("'{}' is out of range", text));
  }
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); })) {
    fail(key, fmt::format("'{}' is not a non-negative integer", text));
  }
  try {
    return std::stoull(t);
  } catch (const std::out_of_range&) {
    fail(key, fmt::format("'{}' is out of range", text));
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  fail(key, fmt::format("'{}' is not a boolean", text));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

Command parse_command(const std::string& text) {
  for (auto c : {Command::Simulate, Command::Convergence, Command::Chaos, Command::FbmCheck, Command::Moments}) {
    if (text == to_string(c)) return c;
  }
  fail("command", fmt::format("unknown command '{}' (expected simulate, convergence, chaos, fbm-check or moments)",
                              text));
}

void apply_profile(RunConfig& config, const std::string& profile) {
  config.profile = profile;
  if (profile == "desk") {
    config.particles = 200;
    config.replications = 50;
    config.deltas = {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
    config.reference_delta = 1.0 / 1024;
  } else if (profile == "paper-fig1") {
    config.model = "example41";
    config.preset.x0 = 1.0;
    config.horizon = 1.0;
    config.particles = 1000;
    config.replications = 100;
    config.deltas = {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
    config.reference_delta = 1.0 / 4096;
  } else {
    fail("profile", fmt::format("unknown profile '{}' (expected desk or paper-fig1)", profile));
  }
}

void apply_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "command") c.command = parse_command(trim(value));
  else if (key == "profile") {}  // applied first
  else if (key == "model") c.model = trim(value);
  else if (key == "x0") c.preset.x0 = parse_real(key, value);
  else if (key == "xi") c.preset.xi = parse_real(key, value);
  else if (key == "drift-rate") c.preset.drift_rate = parse_real(key, value);
  else if (key == "hurst") c.hurst = parse_real(key, value);
  else if (key == "horizon") c.horizon = parse_real(key, value);
  else if (key == "steps") c.steps = parse_unsigned(key, value);
  else if (key == "deltas") {
    c.deltas.clear();
    for (const auto& item : split_list(value)) c.deltas.push_back(parse_real(key, item));
  } else if (key == "reference-delta") c.reference_delta = parse_real(key, value);
  else if (key == "particles") c.particles = parse_unsigned(key, value);
  else if (key == "replications") c.replications = parse_unsigned(key, value);
  else if (key == "theta") c.theta = parse_real(key, value);
  else if (key == "seed") c.seed = parse_unsigned(key, value);
  else if (key == "sampler") {
    try {
      c.sampler = parse_sampler_kind(trim(value));
    } catch (const ConfigError& e) {
      fail(key, e.what());
    }
  } else if (key == "out") c.output_dir = trim(value);
  else if (key == "plot") c.emit_plot = parse_bool(key, value);
  else if (key == "workers") c.workers = parse_unsigned(key, value);
  else if (key == "ns") {
    c.particle_counts.clear();
    for (const auto& item : split_list(value)) c.particle_counts.push_back(parse_unsigned(key, item));
  } else if (key == "q") c.q = parse_real(key, value);
  else if (key == "paths") c.paths = parse_unsigned(key, value);
  else if (key == "full-trajectory") c.full_trajectory = parse_bool(key, value);
  else fail(key, "unknown key");
}

void validate_config(const RunConfig& c) {
  if (!(c.hurst > 0.0 && c.hurst < 1.0)) fail("hurst", fmt::format("must lie in (0, 1), got {}", c.hurst));
  if (!(c.horizon > 0.0) || !std::isfinite(c.horizon)) fail("horizon", "must be positive");
  if (c.particles < 1) fail("particles", "must be at least 1");
  if (c.theta < 2.0) fail("theta", fmt::format("must be >= 2, got {}", c.theta));
  if (c.q < 2.0) fail("q", fmt::format("must be >= 2, got {}", c.q));
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), c.model) == names.end()) {
    fail("model", fmt::format("unknown preset '{}'", c.model));
  }
  switch (c.command) {
    case Command::Convergence:
      if (c.replications < 2) fail("replications", "must be at least 2");
      if (c.deltas.empty()) fail("deltas", "at least one step size is required");
      for (double d : c.deltas) {
        if (!(d > 0.0)) fail("deltas", "step sizes must be positive");
      }
      if (!(c.reference_delta > 0.0)) fail("reference-delta", "must be positive");
      break;
    case Command::Moments:
      if (c.deltas.empty()) fail("deltas", "at least one step size is required");
      for (double d : c.deltas) {
        if (!(d > 0.0)) fail("deltas", "step sizes must be positive");
      }
      if (c.replications < 1) fail("replications", "must be at least 1");
      break;
    case Command::Chaos:
      if (c.particle_counts.empty()) fail("ns", "at least one particle count is required");
      if (!std::is_sorted(c.particle_counts.begin(), c.particle_counts.end())) fail("ns", "must be increasing");
      if (c.particle_counts.front() == 0) fail("ns", "particle counts must be positive");
      if (c.replications < 1) fail("replications", "must be at least 1");
      if (c.steps < 1) fail("steps", "must be at least 1");
      break;
    case Command::FbmCheck:
      if (c.steps < 1) fail("steps", "must be at least 1");
      if (c.paths < 2) fail("paths", "must be at least 2");
      break;
    case Command::Simulate:
      break;
  }
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::istream& in, const std::string& origin) {
  std::map<std::string, std::string> values;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, number));
    }
    const std::string key = trim(line.substr(0, eq));
    if (!is_known(key)) throw ConfigError(fmt::format("{}: unknown key ({}:{})", key, origin, number));
    values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

RunConfig resolve_config(const std::map<std::string, std::string>& values) {
  if (!values.contains("command")) fail("command", "missing required field");
  RunConfig config;
  if (const auto it = values.find("profile"); it != values.end()) apply_profile(config, trim(it->second));
  for (const auto& [key, value] : values) apply_key(config, key, value);
  validate_config(config);
  return config;
}

std::string echo_config(const RunConfig& c) {
  auto join = [](const auto& items) {
    std::string out;
    for (const auto& v : items) out += (out.empty() ? "" : ",") + fmt::format("{}", static_cast<double>(v));
    return out;
  };
  std::string s;
  s += fmt::format("command = {}\n", to_string(c.command));
  s += fmt::format("profile = {}\n", c.profile);
  s += fmt::format("model = {}\n", c.model);
  s += fmt::format("x0 = {}\nxi = {}\ndrift-rate = {}\n", c.preset.x0, c.preset.xi, c.preset.drift_rate);
  s += fmt::format("hurst = {}\nhorizon = {}\nsteps = {}\n", c.hurst, c.horizon, c.steps);
  s += fmt::format("deltas = {}\nreference-delta = {}\n", join(c.deltas), c.reference_delta);
  s += fmt::format("particles = {}\nreplications = {}\ntheta = {}\nseed = {}\n", c.particles, c.replications,
                   c.theta, c.seed);
  s += fmt::format("sampler = {}\nout = {}\nplot = {}\nworkers = {}\n", to_string(c.sampler), c.output_dir.string(),
                   c.emit_plot ? "true" : "false", c.workers);
  s += fmt::format("ns = {}\nq = {}\npaths = {}\nfull-trajectory = {}\n", join(c.particle_counts), c.q, c.paths,
                   c.full_trajectory ? "true" : "false");
  return s;
}

std::variant<RunConfig, ParseExit> parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Interacting-particle Euler-Maruyama for McKean-Vlasov SDEs driven by fractional Brownian motion",
               "mvfbm"};
  std::map<std::string, std::string> flags;
  std::string config_file;
  app.add_option("--config", config_file, "Flat key = value config file; flags override it");
  static const std::map<std::string, std::string> help{
      {"command", "simulate | convergence | chaos | fbm-check | moments (required)"},
      {"profile", "desk (default) | paper-fig1"},
      {"model", "example41 | constant-diffusion | explosive"},
      {"x0", "initial value X_0"},
      {"xi", "constant diffusion xi (constant-diffusion preset)"},
      {"drift-rate", "mean-reversion rate a (constant-diffusion preset)"},
      {"hurst", "Hurst parameter in (0, 1)"},
      {"horizon", "time horizon T"},
      {"steps", "mesh steps (simulate, chaos, fbm-check)"},
      {"deltas", "comma-separated step sizes, e.g. 2^-5,2^-6"},
      {"reference-delta", "reference step size for convergence"},
      {"particles", "particle count N"},
      {"replications", "Monte Carlo replications M"},
      {"theta", "Wasserstein order (>= 2)"},
      {"seed", "master seed"},
      {"sampler", "circulant | cholesky"},
      {"out", "output directory"},
      {"plot", "write plot.svg (convergence)"},
      {"workers", "worker threads, 0 = all cores"},
      {"ns", "comma-separated particle counts (chaos)"},
      {"q", "moment order (moments)"},
      {"paths", "fBm paths (fbm-check)"},
      {"full-trajectory", "export every mesh node (simulate)"},
  };
  for (const auto& key : known_keys()) {
    if (key == "plot" || key == "full-trajectory") {
      app.add_flag_callback("--" + key, [&flags, key] { flags[key] = "true"; }, help.at(key));
    } else {
      app.add_option_function<std::string>(
          "--" + key, [&flags, key](const std::string& v) { flags[key] = v; }, help.at(key));
    }
  }
  app.footer("Commands: simulate, convergence, chaos, fbm-check, moments. Presets: example41, "
             "constant-diffusion, explosive. Profiles: desk (default), paper-fig1.");

  if (args.empty()) return ParseExit{2, app.help()};
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return ParseExit{0, app.help()};
  } catch (const CLI::ParseError& e) {
    return ParseExit{2, fmt::format("error: {}\n{}", e.what(), app.help())};
  }

  try {
    std::map<std::string, std::string> values;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", config_file));
      values = parse_config_text(in, config_file);
    }
    for (const auto& [key, value] : flags) values[key] = value;
    return resolve_config(values);
  } catch (const ConfigError& e) {
    return ParseExit{2, fmt::format("error: {}", e.what())};
  }
}

}  // namespace mvfbm::cli

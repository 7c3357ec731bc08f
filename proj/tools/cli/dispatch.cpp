#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include <mvfbm/error.hpp>
#include <mvfbm/report.hpp>
#include <mvfbm/simulator.hpp>
#include <mvfbm/study.hpp>

#include "cli/run_config.hpp"

namespace mvfbm::cli {

namespace {

namespace fs = std::filesystem;

fs::path make_run_directory(const RunConfig& config) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &utc);
  const std::string base = fmt::format("{}-{}", to_string(config.command), stamp);
  fs::path dir = config.output_dir / base;
  for (int suffix = 1; fs::exists(dir); ++suffix) dir = config.output_dir / fmt::format("{}-{}", base, suffix);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("out: cannot write '{}'", path.string()));
  out << content;
}

template <typename Report>
void write_reports(const fs::path& dir, const Report& report) {
  std::ostringstream csv;
  write_csv(report, csv);
  write_file(dir / "report.csv", csv.str());
  write_file(dir / "report.json", to_json(report) + "\n");
}

ModelSpec model_of(const RunConfig& c) { return preset_by_name(c.model, c.preset); }

std::string run_simulate(const RunConfig& c, const fs::path& dir) {
  SimulationConfig sim{model_of(c), HurstParameter(c.hurst), UniformMesh(c.horizon, c.steps), c.particles, c.seed,
                       c.sampler, 0, c.workers,
                       c.full_trajectory ? SnapshotPolicy::all() : SnapshotPolicy::terminal_only()};
  const TrajectoryRecord record = run(sim);
  std::ostringstream csv;
  csv << "# schema_version=" << kCsvSchemaVersion << '\n';
  csv << "# kind=trajectory\n";
  csv << "# model=" << c.model << '\n';
  csv << fmt::format("# hurst={}\n# horizon={}\n# steps={}\n# particles={}\n# seed={}\n# sampler={}\n",
                     c.hurst, c.horizon, c.steps, c.particles, c.seed, to_string(c.sampler));
  write_trajectory_csv(record, csv, !c.full_trajectory);
  write_file(dir / "report.csv", csv.str());

  const ParticleEnsemble& terminal = record.terminal();
  const EmpiricalMeasure mu = terminal.measure();
  const double second = moment_distance_to_dirac0(mu, WassersteinOrder(2.0));
  write_file(dir / "report.json",
             fmt::format("{{\n  \"model\": \"{}\",\n  \"hurst\": {},\n  \"steps\": {},\n  \"particles\": {},\n"
                         "  \"terminal_mean\": {},\n  \"terminal_rms\": {}\n}}\n",
                         c.model, c.hurst, c.steps, c.particles, mu.mean()[0], second));
  return fmt::format("terminal mean {:.6g}, terminal RMS {:.6g}", mu.mean()[0], second);
}

std::string run_convergence(const RunConfig& c, const fs::path& dir) {
  StrongErrorOptions o;
  o.deltas = c.deltas;
  o.reference_delta = c.reference_delta;
  o.horizon = c.horizon;
  o.particles = c.particles;
  o.replications = c.replications;
  o.seed = c.seed;
  o.sampler = c.sampler;
  o.workers = c.workers;
  const ConvergenceReport report = strong_error_study(model_of(c), HurstParameter(c.hurst), o);
  write_reports(dir, report);
  if (c.emit_plot) {
    std::ostringstream svg;
    write_svg(report, svg);
    write_file(dir / "plot.svg", svg.str());
  }
  if (report.exact) return "scheme exact; slope undefined";
  if (!report.fit) return "slope undefined (zero error at some step size)";
  return fmt::format("slope {:.4f} +/- {:.4f} (target H = {})", report.fit->slope, report.fit->standard_error,
                     c.hurst);
}

std::string run_chaos(const RunConfig& c, const fs::path& dir) {
  ChaosOptions o;
  o.particle_counts = c.particle_counts;
  o.replications = c.replications;
  o.theta = WassersteinOrder(c.theta);
  o.seed = c.seed;
  o.sampler = c.sampler;
  o.workers = c.workers;
  const ModelSpec model = model_of(c);
  o.estimator = model.dimension == 1 ? ChaosEstimator::OneDimExact : ChaosEstimator::CouplingBound;
  const ChaosReport report = chaos_study(model, HurstParameter(c.hurst), UniformMesh(c.horizon, c.steps), o);
  write_reports(dir, report);
  return fmt::format("distance at N={} is {:.4g}, trend {}", report.points.back().particles,
                     report.points.back().distance, report.non_increasing ? "non-increasing" : "NOT non-increasing");
}

std::string run_fbm_check(const RunConfig& c, const fs::path& dir) {
  const HurstParameter hurst(c.hurst);
  const UniformMesh mesh(c.horizon, c.steps);
  const FbmCheckReport report = fbm_covariance_check(hurst, mesh, c.paths, c.sampler, c.seed, c.workers);
  write_reports(dir, report);
  std::ostringstream path_csv;
  path_csv << "# schema_version=" << kCsvSchemaVersion << "\n# kind=fbm-path\n";
  write_path_csv(make_sampler(c.sampler, hurst, mesh)->sample(1, StreamKey{c.seed, 0, 0, 0, StreamPurpose::Driver}),
                 path_csv);
  write_file(dir / "path.csv", path_csv.str());
  return fmt::format("max covariance deviation {:.3f} standard errors over {} paths", report.max_abs_z, c.paths);
}

std::string run_moments(const RunConfig& c, const fs::path& dir) {
  MomentOptions o;
  o.deltas = c.deltas;
  o.horizon = c.horizon;
  o.particles = c.particles;
  o.replications = c.replications;
  o.q = c.q;
  o.seed = c.seed;
  o.sampler = c.sampler;
  o.workers = c.workers;
  const MomentReport report = moment_bound_check(model_of(c), HurstParameter(c.hurst), o);
  write_reports(dir, report);
  double worst = 1.0;
  for (const auto& p : report.points) {
    if (p.ratio && std::abs(std::log(*p.ratio)) > std::abs(std::log(worst))) worst = *p.ratio;
  }
  return fmt::format("moment ratios {} (worst {:.4f})", report.pass ? "within bounds" : "OUT OF BOUNDS", worst);
}

}  // namespace

DispatchResult dispatch(const RunConfig& config, std::ostream& out, std::ostream& err) {
  DispatchResult result;
  try {
    result.directory = make_run_directory(config);
    write_file(result.directory / "config.echo", echo_config(config));
    std::string headline;
    switch (config.command) {
      case Command::Simulate: headline = run_simulate(config, result.directory); break;
      case Command::Convergence: headline = run_convergence(config, result.directory); break;
      case Command::Chaos: headline = run_chaos(config, result.directory); break;
      case Command::FbmCheck: headline = run_fbm_check(config, result.directory); break;
      case Command::Moments: headline = run_moments(config, result.directory); break;
    }
    out << fmt::format("{} model={} H={} N={} M={} seed={}: {} -> {}\n", to_string(config.command), config.model,
                       config.hurst, config.particles, config.replications, config.seed, headline,
                       result.directory.string());
    result.status = 0;
  } catch (const NumericalBlowup& e) {
    err << fmt::format("numerical failure at step {}: {}\n", e.step(), e.what());
    result.status = 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    result.status = 1;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    result.status = 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "configuration error: out: " << e.what() << '\n';
    result.status = 2;
  }
  return result;
}

}  // namespace mvfbm::cli

#include "mvfbm/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "mvfbm/error.hpp"
#include "mvfbm/parallel.hpp"
#include "mvfbm/simulator.hpp"

namespace mvfbm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Integer n with n * unit == value up to a relative 1e-9.
std::size_t integer_ratio(double value, double unit, const char* what) {
  if (!(value > 0.0) || !(unit > 0.0)) throw ConfigError(fmt::format("{} must be positive", what));
  const double ratio = value / unit;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw ConfigError(fmt::format("{} {} is not an integer multiple of {}", what, value, unit));
  }
  return static_cast<std::size_t>(rounded);
}

std::vector<double> sorted_decreasing(std::vector<double> deltas, const char* what) {
  if (deltas.empty()) throw ConfigError(fmt::format("{}: at least one step size is required", what));
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  for (std::size_t i = 1; i < deltas.size(); ++i) {
    if (deltas[i] == deltas[i - 1]) throw ConfigError(fmt::format("{}: duplicate step size {}", what, deltas[i]));
  }
  return deltas;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
  return acc;
}

double squared_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

double mean_and_stderr(std::span<const double> samples, double& standard_error) {
  const double n = static_cast<double>(samples.size());
  const double mean = pairwise_sum(samples) / n;
  if (samples.size() < 2) {
    standard_error = 0.0;
    return mean;
  }
  std::vector<double> sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = (samples[i] - mean) * (samples[i] - mean);
  standard_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  return mean;
}

}  // namespace

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw ConfigError("slope fit needs at least two points");
  std::vector<double> xs, ys;
  for (const auto& [delta, error] : points) {
    if (!(delta > 0.0) || !(error > 0.0)) {
      throw ConfigError(fmt::format("slope fit needs positive values, got ({}, {})", delta, error));
    }
    xs.push_back(std::log2(delta));
    ys.push_back(std::log2(error));
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("slope fit needs at least two distinct step sizes");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  if (xs.size() > 2) {
    const double intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (intercept + fit.slope * xs[i]);
      ssr += r * r;
    }
    fit.standard_error = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

// ------------------------------------------------------------ strong error

ConvergenceReport strong_error_study(const ModelSpec& model, HurstParameter hurst, const StrongErrorOptions& options) {
  const auto start_time = Clock::now();
  validate(model, hurst);
  if (options.replications < 2) throw ConfigError("strong error study needs at least 2 replications");
  if (options.particles == 0) throw ConfigError("strong error study needs at least 1 particle");
  const std::vector<double> deltas = sorted_decreasing(options.deltas, "strong error study");
  const std::size_t fine_steps = integer_ratio(options.horizon, options.reference_delta, "horizon");
  std::vector<std::size_t> factors;
  for (double delta : deltas) {
    const std::size_t f = integer_ratio(delta, options.reference_delta, "step size");
    if (f <= 1) throw ConfigError(fmt::format("step size {} must be coarser than the reference", delta));
    if (fine_steps % f != 0) {
      throw ConfigError(fmt::format("step size {} does not divide the horizon {}", delta, options.horizon));
    }
    factors.push_back(f);
  }

  const UniformMesh mesh(options.horizon, fine_steps);
  const auto sampler = make_sampler(options.sampler, hurst, mesh);
  const std::size_t m = options.replications;
  const std::size_t n = options.particles;
  const std::size_t nf = factors.size();

  // Per replication: squared errors per coarse mesh, then squared reference norms.
  std::vector<std::vector<double>> slots(m, std::vector<double>(nf + 1, 0.0));
  parallel_for(m, options.workers, [&](std::size_t r) {
    SimulationConfig config{model, hurst, mesh, n, options.seed, options.sampler, r, 1,
                            SnapshotPolicy::terminal_only()};
    const auto runs = run_coupled_meshes(config, factors, sampler.get());
    const ParticleEnsemble& reference = runs.front().record.terminal();
    std::vector<double> per_particle(n);
    for (std::size_t f = 0; f < nf; ++f) {
      const ParticleEnsemble& coarse = runs[f + 1].record.terminal();
      for (std::size_t i = 0; i < n; ++i) per_particle[i] = squared_distance(coarse.particle(i), reference.particle(i));
      slots[r][f] = pairwise_sum(per_particle);
    }
    for (std::size_t i = 0; i < n; ++i) per_particle[i] = squared_norm(reference.particle(i));
    slots[r][nf] = pairwise_sum(per_particle);
  });

  const double samples = static_cast<double>(m * n);
  auto reduce = [&](std::size_t column) {
    std::vector<double> column_values(m);
    for (std::size_t r = 0; r < m; ++r) column_values[r] = slots[r][column];
    return pairwise_sum(column_values);
  };

  ConvergenceReport report;
  report.model_name = model.name;
  report.hurst = hurst.value();
  report.horizon = options.horizon;
  report.particles = n;
  report.replications = m;
  report.reference_delta = options.reference_delta;
  report.seed = options.seed;
  report.sampler = std::string(to_string(options.sampler));
  report.reference_rms = std::sqrt(reduce(nf) / samples);
  for (std::size_t f = 0; f < nf; ++f) {
    report.points.push_back({deltas[f], std::sqrt(reduce(f) / samples)});
  }

  const double threshold = kExactErrorTolerance * (1.0 + report.reference_rms);
  report.exact = std::all_of(report.points.begin(), report.points.end(),
                             [&](const ErrorPoint& p) { return p.rms_error <= threshold; });
  const bool fittable = std::all_of(report.points.begin(), report.points.end(),
                                    [](const ErrorPoint& p) { return p.rms_error > 0.0; });
  if (!report.exact && fittable && report.points.size() >= 2) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : report.points) pts.emplace_back(p.delta, p.rms_error);
    report.fit = fit_loglog_slope(pts);
  }
  report.wall_seconds = seconds_since(start_time);
  return report;
}

// ------------------------------------------------------------ chaos

std::string_view to_string(ChaosEstimator estimator) noexcept {
  return estimator == ChaosEstimator::OneDimExact ? "1d-exact" : "coupling-bound";
}

ChaosReport chaos_study(const ModelSpec& model, HurstParameter hurst, const UniformMesh& mesh,
                        const ChaosOptions& options) {
  const auto start_time = Clock::now();
  validate(model, hurst);
  const auto& counts = options.particle_counts;
  if (counts.empty()) throw ConfigError("chaos study needs at least one particle count");
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] == 0) throw ConfigError("chaos study particle counts must be positive");
    if (a > 0 && counts[a] < counts[a - 1]) throw ConfigError("chaos study particle counts must be increasing");
  }
  if (options.replications == 0) throw ConfigError("chaos study needs at least one replication");
  if (options.estimator == ChaosEstimator::OneDimExact && model.dimension != 1) {
    throw ConfigError(fmt::format("the 1d-exact chaos estimator needs d = 1 (model '{}' has d = {}); "
                                  "use the coupling-bound estimator",
                                  model.name, model.dimension));
  }
  if (options.reference_multiplier == 0) throw ConfigError("reference multiplier must be positive");

  const std::size_t reference_n = options.reference_multiplier * counts.back();
  const std::size_t m = options.replications;
  const std::size_t na = counts.size();
  const auto sampler = make_sampler(options.sampler, hurst, mesh);
  const std::uint64_t reference_seed = derive_seed(options.seed, 0);

  std::vector<std::vector<double>> distances(na, std::vector<double>(m));
  parallel_for(m, options.workers, [&](std::size_t r) {
    SimulationConfig ref_config{model, hurst, mesh, reference_n, reference_seed, options.sampler, r, 1,
                                SnapshotPolicy::terminal_only()};
    const ParticleEnsemble reference = run(ref_config, sampler.get()).terminal();
    const std::size_t d = reference.dimension;
    for (std::size_t a = 0; a < na; ++a) {
      const std::size_t n = counts[a];
      SimulationConfig config{model, hurst, mesh, n, derive_seed(options.seed, a + 1), options.sampler, r, 1,
                              SnapshotPolicy::terminal_only()};
      const ParticleEnsemble system = run(config, sampler.get()).terminal();

      // n reference atoms without replacement (partial Fisher-Yates).
      std::vector<std::size_t> index(reference_n);
      std::iota(index.begin(), index.end(), 0);
      RandomStream stream(StreamKey{options.seed, r, a, 0, StreamPurpose::Subsample});
      std::vector<double> atoms(n * d);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pick = i + stream.below(reference_n - i);
        std::swap(index[i], index[pick]);
        const auto src = reference.particle(index[i]);
        std::copy(src.begin(), src.end(), atoms.begin() + i * d);
      }
      const EmpiricalMeasure sub(d, std::move(atoms));
      const EmpiricalMeasure mu = system.measure();
      distances[a][r] = options.estimator == ChaosEstimator::OneDimExact
                            ? wasserstein_1d_exact(mu, sub, options.theta)
                            : coupled_upper_bound(mu, sub, options.theta);
    }
  });

  ChaosReport report;
  report.model_name = model.name;
  report.hurst = hurst.value();
  report.theta = options.theta.value();
  report.steps = mesh.steps();
  report.horizon = mesh.horizon();
  report.replications = m;
  report.reference_particles = reference_n;
  report.seed = options.seed;
  report.estimator = std::string(to_string(options.estimator));
  for (std::size_t a = 0; a < na; ++a) {
    ChaosPoint p;
    p.particles = counts[a];
    p.distance = mean_and_stderr(distances[a], p.standard_error);
    report.points.push_back(p);
  }
  report.non_increasing = true;
  for (std::size_t a = 1; a < na; ++a) {
    const auto& prev = report.points[a - 1];
    const auto& cur = report.points[a];
    const double tolerance = std::hypot(prev.standard_error, cur.standard_error);
    if (cur.distance > prev.distance + tolerance) report.non_increasing = false;
  }
  report.wall_seconds = seconds_since(start_time);
  return report;
}

// ------------------------------------------------------------ moments

MomentReport moment_bound_check(const ModelSpec& model, HurstParameter hurst, const MomentOptions& options) {
  const auto start_time = Clock::now();
  validate(model, hurst);
  if (!(options.q >= 2.0)) throw ConfigError(fmt::format("moment order q must be >= 2, got {}", options.q));
  if (options.particles == 0 || options.replications == 0) {
    throw ConfigError("moment check needs at least one particle and one replication");
  }
  const std::vector<double> deltas = sorted_decreasing(options.deltas, "moment check");
  const double finest = deltas.back();
  const std::size_t fine_steps = integer_ratio(options.horizon, finest, "horizon");
  std::vector<std::size_t> factors;
  for (double delta : deltas) {
    const std::size_t f = integer_ratio(delta, finest, "step size");
    if (fine_steps % f != 0) {
      throw ConfigError(fmt::format("step size {} does not divide the horizon {}", delta, options.horizon));
    }
    factors.push_back(f);
  }

  const UniformMesh mesh(options.horizon, fine_steps);
  const auto sampler = make_sampler(options.sampler, hurst, mesh);
  const std::size_t m = options.replications;
  const std::size_t n = options.particles;
  const std::size_t nd = deltas.size();
  const double q = options.q;

  auto moment_of = [q](std::span<const double> x) {
    const double norm = euclidean_norm(x);
    return q == 2.0 ? norm * norm : std::pow(norm, q);
  };

  // sums[r][mesh][node]: sum over particles of |Y|^q; terminal samples kept per particle.
  std::vector<std::vector<std::vector<double>>> sums(m, std::vector<std::vector<double>>(nd));
  std::vector<std::vector<std::vector<double>>> terminal(m, std::vector<std::vector<double>>(nd));
  parallel_for(m, options.workers, [&](std::size_t r) {
    SimulationConfig config{model, hurst, mesh, n, options.seed, options.sampler, r, 1, SnapshotPolicy::all()};
    const auto runs = run_coupled_meshes(config, factors, sampler.get());
    std::vector<double> values(n);
    for (std::size_t i = 0; i < nd; ++i) {
      const auto it = std::find_if(runs.begin(), runs.end(), [&](const CoupledRun& c) { return c.factor == factors[i]; });
      const TrajectoryRecord& record = it->record;
      for (const auto& snap : record.snapshots) {
        for (std::size_t p = 0; p < n; ++p) values[p] = moment_of(snap.ensemble.particle(p));
        sums[r][i].push_back(pairwise_sum(values));
      }
      terminal[r][i] = values;
    }
  });

  MomentReport report;
  report.model_name = model.name;
  report.hurst = hurst.value();
  report.q = q;
  report.particles = n;
  report.replications = m;
  report.seed = options.seed;
  report.pass = true;
  const double samples = static_cast<double>(m * n);
  for (std::size_t i = 0; i < nd; ++i) {
    MomentPoint point;
    point.delta = deltas[i];
    const std::size_t nodes = sums[0][i].size();
    std::vector<double> column(m);
    for (std::size_t k = 0; k < nodes; ++k) {
      for (std::size_t r = 0; r < m; ++r) column[r] = sums[r][i][k];
      point.max_moment = std::max(point.max_moment, pairwise_sum(column) / samples);
    }
    std::vector<double> all_terminal;
    all_terminal.reserve(m * n);
    for (std::size_t r = 0; r < m; ++r) all_terminal.insert(all_terminal.end(), terminal[r][i].begin(), terminal[r][i].end());
    point.terminal_moment = mean_and_stderr(all_terminal, point.terminal_standard_error);
    if (i > 0) {
      const double previous = report.points.back().max_moment;
      point.ratio = previous > 0.0 ? point.max_moment / previous : (point.max_moment == 0.0 ? 1.0 : INFINITY);
      if (!(*point.ratio >= options.ratio_low && *point.ratio <= options.ratio_high)) report.pass = false;
    }
    report.points.push_back(point);
  }
  report.wall_seconds = seconds_since(start_time);
  return report;
}

// ------------------------------------------------------------ fBm checks

namespace {

/// Per-path increments for `paths` independent 1-d paths, path p in row p.
std::vector<double> sample_increments(HurstParameter hurst, const UniformMesh& mesh, std::size_t paths,
                                      SamplerKind kind, std::uint64_t seed, std::size_t workers) {
  const auto sampler = make_sampler(kind, hurst, mesh);
  const std::size_t n = mesh.steps();
  std::vector<double> data(paths * n);
  parallel_for(paths, workers, [&](std::size_t p) {
    const FbmPath path = sampler->sample(1, StreamKey{seed, p, 0, 0, StreamPurpose::Driver});
    std::copy(path.increments().begin(), path.increments().end(), data.begin() + p * n);
  });
  return data;
}

}  // namespace

FbmCheckReport fbm_covariance_check(HurstParameter hurst, const UniformMesh& mesh, std::size_t paths,
                                    SamplerKind sampler, std::uint64_t seed, std::size_t workers) {
  const auto start_time = Clock::now();
  if (paths < 2) throw ConfigError("covariance check needs at least 2 paths");
  const std::size_t n = mesh.steps();
  if (n == 0) throw ConfigError("covariance check needs at least one step");
  const auto data = sample_increments(hurst, mesh, paths, sampler, seed, workers);
  const CovarianceMatrix exact = increment_covariance_matrix(hurst, mesh);

  FbmCheckReport report;
  report.hurst = hurst.value();
  report.steps = n;
  report.horizon = mesh.horizon();
  report.paths = paths;
  report.sampler = std::string(to_string(sampler));
  report.seed = seed;
  std::vector<double> products(paths);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      for (std::size_t p = 0; p < paths; ++p) products[p] = data[p * n + j] * data[p * n + k];
      CovarianceEntry e;
      e.row = j;
      e.col = k;
      e.empirical = mean_and_stderr(products, e.standard_error);
      e.theoretical = exact(j, k);
      e.z = e.standard_error > 0.0 ? (e.empirical - e.theoretical) / e.standard_error : 0.0;
      report.max_abs_z = std::max(report.max_abs_z, std::abs(e.z));
      report.entries.push_back(e);
    }
  }
  report.wall_seconds = seconds_since(start_time);
  return report;
}

std::vector<IncrementMomentEntry> fbm_increment_moment_check(
    HurstParameter hurst, const UniformMesh& mesh, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    std::size_t paths, SamplerKind sampler, std::uint64_t seed, std::size_t workers) {
  if (paths < 2) throw ConfigError("increment moment check needs at least 2 paths");
  const std::size_t n = mesh.steps();
  for (const auto& [s, t] : pairs) {
    if (s > n || t > n) throw ConfigError(fmt::format("node pair ({}, {}) outside the {}-step mesh", s, t, n));
  }
  const auto data = sample_increments(hurst, mesh, paths, sampler, seed, workers);
  std::vector<IncrementMomentEntry> out;
  std::vector<double> squares(paths);
  for (const auto& [s, t] : pairs) {
    const std::size_t lo = std::min(s, t);
    const std::size_t hi = std::max(s, t);
    for (std::size_t p = 0; p < paths; ++p) {
      double acc = 0.0;
      for (std::size_t k = lo; k < hi; ++k) acc += data[p * n + k];
      squares[p] = acc * acc;
    }
    IncrementMomentEntry e;
    e.from = s;
    e.to = t;
    e.empirical = mean_and_stderr(squares, e.standard_error);
    e.theoretical = std::pow(std::abs(mesh.node(t) - mesh.node(s)), 2.0 * hurst.value());
    e.z = e.standard_error > 0.0 ? (e.empirical - e.theoretical) / e.standard_error : 0.0;
    out.push_back(e);
  }
  return out;
}

}  // namespace mvfbm

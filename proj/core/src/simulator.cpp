#include "mvfbm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "mvfbm/error.hpp"
#include "mvfbm/parallel.hpp"

namespace mvfbm {

ParticleEnsemble initial_ensemble(const ModelSpec& model, std::size_t particles, std::uint64_t seed,
                                  std::uint64_t replication) {
  if (particles == 0) throw ConfigError("particle count must be at least 1");
  const std::size_t d = model.dimension;
  ParticleEnsemble ensemble{particles, d, std::vector<double>(particles * d), 0};
  if (const auto* constant = std::get_if<ConstantInitial>(&model.initial)) {
    for (std::size_t i = 0; i < particles; ++i) {
      std::copy(constant->value.begin(), constant->value.end(), ensemble.states.begin() + i * d);
    }
  } else {
    const auto& sampled = std::get<SampledInitial>(model.initial);
    for (std::size_t i = 0; i < particles; ++i) {
      RandomStream stream(StreamKey{seed, replication, i, 0, StreamPurpose::InitialState});
      sampled.sampler(stream, std::span<double>(ensemble.states).subspan(i * d, d));
    }
  }
  return ensemble;
}

ParticleEnsemble em_step(const ParticleEnsemble& ensemble, const ModelSpec& model, double delta,
                         std::span<const double> increments) {
  const std::size_t n = ensemble.particles;
  const std::size_t d = ensemble.dimension;
  if (increments.size() != n * d) {
    throw ConfigError(fmt::format("em_step expects {} increments, got {}", n * d, increments.size()));
  }
  const EmpiricalMeasure mu = ensemble.measure();

  std::vector<double> sigma(d * d);
  const auto* measure_diffusion = std::get_if<MeasureDiffusion>(&model.diffusion);
  const auto* state_diffusion = std::get_if<StateMeasureDiffusion>(&model.diffusion);
  if (const auto* constant = std::get_if<ConstantDiffusion>(&model.diffusion)) {
    sigma = constant->matrix;
  } else if (measure_diffusion != nullptr) {
    measure_diffusion->fn(mu, sigma);
  }

  ParticleEnsemble next{n, d, std::vector<double>(n * d), ensemble.step + 1};
  std::vector<double> drift(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = ensemble.particle(i);
    const auto dB = increments.subspan(i * d, d);
    model.drift(x, mu, drift);
    if (state_diffusion != nullptr) state_diffusion->fn(x, mu, sigma);
    for (std::size_t r = 0; r < d; ++r) {
      double noise = 0.0;
      for (std::size_t c = 0; c < d; ++c) noise += sigma[r * d + c] * dB[c];
      const double value = x[r] + drift[r] * delta + noise;
      if (!std::isfinite(value)) {
        throw NumericalBlowup(ensemble.step, i,
                              fmt::format("non-finite state at EM step {} (t = {}), particle {}, component {}",
                                          ensemble.step, static_cast<double>(ensemble.step) * delta, i, r));
      }
      next.states[i * d + r] = value;
    }
  }
  return next;
}

bool SnapshotPolicy::keeps(std::size_t k, std::size_t steps) const noexcept {
  if (k == steps) return true;
  switch (mode) {
    case Mode::All: return true;
    case Mode::TerminalOnly: return false;
    case Mode::Thinned: {
      const std::size_t cap = max_snapshots == 0 ? 1 : max_snapshots;
      const std::size_t stride = std::max<std::size_t>(1, (steps + cap - 1) / cap);
      return k % stride == 0;
    }
  }
  return false;
}

std::vector<FbmPath> generate_drivers(const PathSampler& sampler, std::size_t particles, std::size_t dimension,
                                      std::uint64_t seed, std::uint64_t replication, std::size_t workers) {
  std::vector<std::optional<FbmPath>> slots(particles);
  parallel_for(particles, workers, [&](std::size_t i) {
    slots[i].emplace(sampler.sample(dimension, StreamKey{seed, replication, i, 0, StreamPurpose::Driver}));
  });
  std::vector<FbmPath> drivers;
  drivers.reserve(particles);
  for (auto& s : slots) drivers.push_back(std::move(*s));
  return drivers;
}

TrajectoryRecord simulate_with_drivers(const ModelSpec& model, const ParticleEnsemble& start,
                                       std::span<const FbmPath> drivers, const SnapshotPolicy& snapshots) {
  if (drivers.size() != start.particles) {
    throw ConfigError(fmt::format("{} drivers given for {} particles", drivers.size(), start.particles));
  }
  if (drivers.empty()) throw ConfigError("simulation needs at least one particle");
  const UniformMesh mesh = drivers.front().mesh();
  const std::size_t n = mesh.steps();
  const std::size_t d = start.dimension;
  for (const auto& path : drivers) {
    if (path.steps() != n || path.dimension() != d) {
      throw ConfigError("all drivers must share the mesh and the model dimension");
    }
  }

  TrajectoryRecord record{mesh, {}};
  ParticleEnsemble current = start;
  current.step = 0;
  if (snapshots.keeps(0, n)) record.snapshots.push_back({0, current});
  std::vector<double> increments(start.particles * d);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < start.particles; ++i) {
      const auto row = drivers[i].step(k);
      std::copy(row.begin(), row.end(), increments.begin() + i * d);
    }
    current = em_step(current, model, mesh.delta(), increments);
    if (snapshots.keeps(k + 1, n)) record.snapshots.push_back({k + 1, current});
  }
  return record;
}

namespace {

std::unique_ptr<PathSampler> sampler_for(const SimulationConfig& config, const PathSampler* given) {
  if (given != nullptr) {
    if (given->mesh().steps() != config.mesh.steps() || given->hurst().value() != config.hurst.value()) {
      throw ConfigError("supplied fBm sampler does not match the simulation mesh or Hurst parameter");
    }
    return nullptr;
  }
  return make_sampler(config.sampler, config.hurst, config.mesh);
}

}  // namespace

TrajectoryRecord run(const SimulationConfig& config, const PathSampler* sampler) {
  validate(config.model, config.hurst);
  const ParticleEnsemble start =
      initial_ensemble(config.model, config.particles, config.seed, config.replication);
  if (config.mesh.steps() == 0) {
    return TrajectoryRecord{config.mesh, {{0, start}}};
  }
  const auto owned = sampler_for(config, sampler);
  const PathSampler& active = owned ? *owned : *sampler;
  const auto drivers = generate_drivers(active, config.particles, config.model.dimension, config.seed,
                                        config.replication, config.workers);
  return simulate_with_drivers(config.model, start, drivers, config.snapshots);
}

std::vector<CoupledRun> run_coupled_meshes(const SimulationConfig& config, std::span<const std::size_t> factors,
                                           const PathSampler* sampler) {
  validate(config.model, config.hurst);
  std::vector<std::size_t> unique{1};
  for (std::size_t f : factors) {
    if (f == 0 || config.mesh.steps() % f != 0) {
      throw ConfigError(fmt::format("mesh factor {} does not divide the {} fine steps", f, config.mesh.steps()));
    }
    if (std::find(unique.begin(), unique.end(), f) == unique.end()) unique.push_back(f);
  }

  const ParticleEnsemble start =
      initial_ensemble(config.model, config.particles, config.seed, config.replication);
  const auto owned = sampler_for(config, sampler);
  const PathSampler& active = owned ? *owned : *sampler;
  const auto fine = generate_drivers(active, config.particles, config.model.dimension, config.seed,
                                     config.replication, config.workers);

  std::vector<CoupledRun> runs;
  runs.reserve(unique.size());
  for (std::size_t f : unique) {
    if (f == 1) {
      runs.push_back({1, simulate_with_drivers(config.model, start, fine, config.snapshots)});
      continue;
    }
    std::vector<FbmPath> coarse;
    coarse.reserve(fine.size());
    for (const auto& path : fine) coarse.push_back(restrict_to_coarse(path, f));
    runs.push_back({f, simulate_with_drivers(config.model, start, coarse, config.snapshots)});
  }
  return runs;
}

const ParticleEnsemble& piecewise_constant_lookup(const TrajectoryRecord& record, double t) {
  const double horizon = record.mesh.horizon();
  if (!(t >= 0.0 && t <= horizon)) {
    throw ConfigError(fmt::format("lookup time {} outside [0, {}]", t, horizon));
  }
  if (!record.complete()) {
    throw ConfigError("piecewise-constant lookup needs a record with every mesh node retained");
  }
  const std::size_t n = record.mesh.steps();
  if (n == 0) return record.terminal();
  auto k = static_cast<std::size_t>(std::floor(t / record.mesh.delta()));
  k = std::min(k, n);
  while (k < n && record.mesh.node(k + 1) <= t) ++k;
  while (k > 0 && record.mesh.node(k) > t) --k;
  return record.snapshots[k].ensemble;
}

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out, bool terminal_only) {
  const std::size_t d = record.terminal().dimension;
  out << "k,t,particle";
  for (std::size_t j = 0; j < d; ++j) out << ",component_" << (j + 1);
  out << '\n';
  auto emit = [&](const Snapshot& snap) {
    const double t = record.mesh.node(snap.step);
    for (std::size_t i = 0; i < snap.ensemble.particles; ++i) {
      out << fmt::format("{},{},{}", snap.step, t, i);
      for (double v : snap.ensemble.particle(i)) out << fmt::format(",{}", v);
      out << '\n';
    }
  };
  if (terminal_only) {
    emit(record.snapshots.back());
  } else {
    for (const auto& snap : record.snapshots) emit(snap);
  }
}

}  // namespace mvfbm

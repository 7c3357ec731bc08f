#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mvfbm/fbm.hpp"
#include "mvfbm/measure.hpp"
#include "mvfbm/model.hpp"

namespace mvfbm {

/// N particles in R^d at mesh node `step`, row-major N x d.
struct ParticleEnsemble {
  std::size_t particles = 0;
  std::size_t dimension = 1;
  std::vector<double> states;
  std::size_t step = 0;

  std::span<const double> particle(std::size_t i) const {
    return std::span<const double>(states).subspan(i * dimension, dimension);
  }
  EmpiricalMeasure measure() const { return EmpiricalMeasure(dimension, states); }
};

/// Initial states for a run. Sampled initial laws draw particle i from the
/// stream (seed, replication, i, purpose = InitialState).
ParticleEnsemble initial_ensemble(const ModelSpec& model, std::size_t particles, std::uint64_t seed,
                                  std::uint64_t replication);

/// One synchronous Euler-Maruyama step:
///   Y_i <- Y_i + b(Y_i, mu) delta + sigma(mu) dB_i,
/// with mu the empirical measure of the ensemble before any particle moves.
/// `increments` row i is particle i's driver increment. Throws NumericalBlowup
/// naming the step and particle if a state becomes non-finite.
ParticleEnsemble em_step(const ParticleEnsemble& ensemble, const ModelSpec& model, double delta,
                         std::span<const double> increments);

struct SnapshotPolicy {
  enum class Mode { TerminalOnly, Thinned, All };
  Mode mode = Mode::Thinned;
  std::size_t max_snapshots = 64;  // Thinned keeps every ceil(n / max_snapshots)-th node

  static SnapshotPolicy all() { return {Mode::All, 0}; }
  static SnapshotPolicy terminal_only() { return {Mode::TerminalOnly, 0}; }

  bool keeps(std::size_t k, std::size_t steps) const noexcept;
};

struct SimulationConfig {
  ModelSpec model;
  HurstParameter hurst;
  UniformMesh mesh;
  std::size_t particles = 1;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::Circulant;
  std::uint64_t replication = 0;  // selects an independent replication under one master seed
  std::size_t workers = 1;        // 0 = hardware concurrency; never affects results
  SnapshotPolicy snapshots{};
};

struct Snapshot {
  std::size_t step = 0;
  ParticleEnsemble ensemble;
};

/// Ensemble snapshots at mesh nodes, ordered by step. The terminal node is always present.
struct TrajectoryRecord {
  UniformMesh mesh;
  std::vector<Snapshot> snapshots;

  const ParticleEnsemble& terminal() const { return snapshots.back().ensemble; }
  const ParticleEnsemble& initial() const { return snapshots.front().ensemble; }
  bool complete() const noexcept { return snapshots.size() == mesh.steps() + 1; }
};

/// Independent fBm drivers, one path per particle, generated in parallel.
/// Particle i uses stream (seed, replication, i, component j).
std::vector<FbmPath> generate_drivers(const PathSampler& sampler, std::size_t particles, std::size_t dimension,
                                      std::uint64_t seed, std::uint64_t replication, std::size_t workers);

/// EM over the whole mesh of `drivers` (which must share one mesh).
TrajectoryRecord simulate_with_drivers(const ModelSpec& model, const ParticleEnsemble& start,
                                       std::span<const FbmPath> drivers, const SnapshotPolicy& snapshots);

/// Validates the config, draws drivers and initial states, and runs EM.
/// Deterministic in (config minus workers). `sampler`, when given, must match
/// config.hurst and config.mesh and is reused instead of building a new one.
TrajectoryRecord run(const SimulationConfig& config, const PathSampler* sampler = nullptr);

struct CoupledRun {
  std::size_t factor = 1;
  TrajectoryRecord record;
};

/// Runs EM on the fine mesh and on every coarsening by `factors`, all driven
/// by the same fine fBm paths restricted to each coarse mesh. The fine run
/// (factor 1) is always first; duplicate factors are dropped.
std::vector<CoupledRun> run_coupled_meshes(const SimulationConfig& config, std::span<const std::size_t> factors,
                                           const PathSampler* sampler = nullptr);

/// Piecewise-constant extension: the snapshot at the largest node <= t.
/// Needs a complete record; throws ConfigError for t outside [0, T].
const ParticleEnsemble& piecewise_constant_lookup(const TrajectoryRecord& record, double t);

/// CSV with header `k,t,particle,component_1..d`, one row per particle per snapshot.
void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out, bool terminal_only = true);

}  // namespace mvfbm

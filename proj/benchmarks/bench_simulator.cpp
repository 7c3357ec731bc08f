#include <benchmark/benchmark.h>

#include <vector>

#include <mvfbm/simulator.hpp>

using namespace mvfbm;

namespace {

void BM_EmStep(benchmark::State& state) {
  const auto particles = static_cast<std::size_t>(state.range(0));
  const ModelSpec model = preset_example41();
  auto ensemble = initial_ensemble(preset_constant_diffusion(1.0, 0.0), particles, 1, 0);
  for (std::size_t i = 0; i < particles; ++i) ensemble.states[i] += 1e-3 * static_cast<double>(i);
  const std::vector<double> increments(particles, 0.01);
  for (auto _ : state) {
    auto next = em_step(ensemble, model, 1.0 / 256, increments);
    benchmark::DoNotOptimize(next);
  }
  state.SetComplexityN(state.range(0));
}

void BM_Run(benchmark::State& state) {
  SimulationConfig config{preset_constant_diffusion(1.0, 1.0),
                          HurstParameter(0.7),
                          UniformMesh(1.0, 256),
                          static_cast<std::size_t>(state.range(0)),
                          1,
                          SamplerKind::Circulant,
                          0,
                          static_cast<std::size_t>(state.range(1)),
                          SnapshotPolicy::terminal_only()};
  for (auto _ : state) {
    auto record = run(config);
    benchmark::DoNotOptimize(record);
  }
}

}  // namespace

BENCHMARK(BM_EmStep)->RangeMultiplier(4)->Range(64, 16384)->Complexity();
BENCHMARK(BM_Run)->ArgsProduct({{200, 1000}, {1, 4}})->Unit(benchmark::kMillisecond);

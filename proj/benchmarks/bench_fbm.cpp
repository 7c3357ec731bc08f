#include <benchmark/benchmark.h>

#include <mvfbm/fbm.hpp>

using namespace mvfbm;

namespace {

void sample_paths(benchmark::State& state, SamplerKind kind) {
  const UniformMesh mesh(1.0, static_cast<std::size_t>(state.range(0)));
  const auto sampler = make_sampler(kind, HurstParameter(0.7), mesh);
  std::uint64_t particle = 0;
  for (auto _ : state) {
    auto path = sampler->sample(1, StreamKey{1, 0, particle++, 0, StreamPurpose::Driver});
    benchmark::DoNotOptimize(path);
  }
  state.SetComplexityN(state.range(0));
}

void BM_Cholesky(benchmark::State& state) { sample_paths(state, SamplerKind::Cholesky); }
void BM_Circulant(benchmark::State& state) { sample_paths(state, SamplerKind::Circulant); }

void BM_CirculantSetup(benchmark::State& state) {
  const UniformMesh mesh(1.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    CirculantSampler sampler(HurstParameter(0.7), mesh);
    benchmark::DoNotOptimize(sampler);
  }
}

}  // namespace

BENCHMARK(BM_Cholesky)->RangeMultiplier(4)->Range(64, 1024)->Complexity();
BENCHMARK(BM_Circulant)->RangeMultiplier(4)->Range(64, 4096)->Complexity();
BENCHMARK(BM_CirculantSetup)->RangeMultiplier(4)->Range(64, 4096);

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <mvfbm/error.hpp>
#include <mvfbm/simulator.hpp>
#include <mvfbm/study.hpp>

#include "support/stats.hpp"

using namespace mvfbm;

namespace {

ParticleEnsemble ensemble_of(std::vector<double> states) {
  const std::size_t n = states.size();
  return ParticleEnsemble{n, 1, std::move(states), 0};
}

SimulationConfig config_for(ModelSpec model, double hurst, std::size_t steps, std::size_t particles,
                            std::uint64_t seed = 7) {
  return SimulationConfig{std::move(model), HurstParameter(hurst), UniformMesh(1.0, steps), particles, seed,
                          SamplerKind::Circulant, 0, 1, SnapshotPolicy{}};
}

bool same_states(const ParticleEnsemble& a, const ParticleEnsemble& b) { return a.states == b.states; }

/// Random initial law so the example41 particles actually interact.
ModelSpec spread_example41() {
  ModelSpec m = preset_example41();
  m.initial = SampledInitial{[](RandomStream& s, std::span<double> out) { out[0] = 1.0 + 0.5 * s.normal(); }};
  return m;
}

}  // namespace

TEST_CASE("em_step with zero coefficients is the identity") {
  const ModelSpec m = preset_constant_diffusion(0.0, 0.0);
  const auto start = ensemble_of({1.0, -2.0, 3.5});
  const auto next = em_step(start, m, 0.25, std::vector<double>{0.3, 0.1, -0.7});
  CHECK(next.states == start.states);
  CHECK(next.step == 1);
}

TEST_CASE("em_step pure noise step adds the increment") {
  const auto next = em_step(ensemble_of({1.0}), preset_constant_diffusion(1.0, 0.0), 0.1, std::vector<double>{0.37});
  CHECK(next.states[0] == 1.37);
}

TEST_CASE("em_step example41 single-step oracle") {
  // mean 1; drifts -1 and 3; diffusions -1 and 1
  const auto next = em_step(ensemble_of({0.0, 2.0}), preset_example41(), 0.5, std::vector<double>{0.1, -0.1});
  CHECK(next.states[0] == doctest::Approx(-0.6).epsilon(1e-15));
  CHECK(next.states[1] == doctest::Approx(3.4).epsilon(1e-15));
}

TEST_CASE("em_step uses the measure frozen before the step") {
  // All particles must see mean 1, not a partially updated mean.
  const ModelSpec m = preset_constant_diffusion(0.0, 1.0);
  const auto next = em_step(ensemble_of({0.0, 2.0}), m, 0.5, std::vector<double>{0.0, 0.0});
  CHECK(next.states[0] == 0.5);
  CHECK(next.states[1] == 1.5);
}

TEST_CASE("em_step reports blow-up with step and particle") {
  const ModelSpec m = preset_constant_diffusion(1.0, 0.0);
  auto start = ensemble_of({0.0, 1.0, 2.0});
  start.step = 12;
  try {
    em_step(start, m, 0.1, std::vector<double>{0.0, INFINITY, 0.0});
    FAIL("expected NumericalBlowup");
  } catch (const NumericalBlowup& e) {
    CHECK(e.step() == 12);
    CHECK(e.particle() == 1);
  }
  CHECK_THROWS_AS(em_step(start, m, 0.1, std::vector<double>{0.0}), ConfigError);
}

TEST_CASE("property: relabeling particles commutes with em_step") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 9;
    std::vector<double> states(n), increments(n);
    for (auto& s : states) s = normal(rng);
    for (auto& w : increments) w = 0.1 * normal(rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> ps(n), pw(n);
    for (std::size_t i = 0; i < n; ++i) {
      ps[i] = states[perm[i]];
      pw[i] = increments[perm[i]];
    }
    for (const ModelSpec& model : {preset_example41(), preset_constant_diffusion(0.8, 1.3)}) {
      const auto a = em_step(ensemble_of(states), model, 0.05, increments);
      const auto b = em_step(ensemble_of(ps), model, 0.05, pw);
      for (std::size_t i = 0; i < n; ++i) CHECK(b.states[i] == doctest::Approx(a.states[perm[i]]).epsilon(1e-12));
    }
  }
}

TEST_CASE("run with zero steps returns the initial ensemble") {
  const auto record = run(config_for(preset_example41(2.5), 0.7, 0, 4));
  REQUIRE(record.snapshots.size() == 1);
  CHECK(record.terminal().states == std::vector<double>(4, 2.5));
}

TEST_CASE("drift-free constant diffusion: terminal state is X0 + xi B_T") {
  const double xi = 1.7;
  auto config = config_for(preset_constant_diffusion(xi, 0.0, 0.5), 0.65, 128, 5);
  const auto record = run(config);
  const CirculantSampler sampler(config.hurst, config.mesh);
  const auto drivers = generate_drivers(sampler, 5, 1, config.seed, 0, 1);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(record.terminal().states[i] == doctest::Approx(0.5 + xi * drivers[i].cumulative(0).back()).epsilon(1e-12));
  }
}

TEST_CASE("run is deterministic in the seed and independent of worker count") {
  auto config = config_for(spread_example41(), 0.7, 64, 40, 3);
  const auto a = run(config);
  const auto b = run(config);
  config.workers = 4;
  const auto c = run(config);
  CHECK(same_states(a.terminal(), b.terminal()));
  CHECK(same_states(a.terminal(), c.terminal()));
  config.seed = 4;
  CHECK_FALSE(same_states(a.terminal(), run(config).terminal()));
}

TEST_CASE("cholesky and circulant runs agree in distribution, not in values") {
  auto config = config_for(preset_constant_diffusion(1.0, 0.0), 0.7, 16, 3);
  const auto circ = run(config);
  config.sampler = SamplerKind::Cholesky;
  const auto chol = run(config);
  CHECK_FALSE(same_states(circ.terminal(), chol.terminal()));
}

TEST_CASE("state-and-measure diffusion that ignores the state reproduces sigma(mu)") {
  ModelSpec measure_form = spread_example41();
  measure_form.diffusion =
      MeasureDiffusion{[](const EmpiricalMeasure& mu, std::span<double> out) { out[0] = 0.3 * mu.mean()[0]; }};
  ModelSpec state_form = measure_form;
  state_form.diffusion = StateMeasureDiffusion{
      [](std::span<const double>, const EmpiricalMeasure& mu, std::span<double> out) { out[0] = 0.3 * mu.mean()[0]; }};
  const auto a = run(config_for(measure_form, 0.7, 32, 10));
  const auto b = run(config_for(state_form, 0.7, 32, 10));
  CHECK(same_states(a.terminal(), b.terminal()));
}

TEST_CASE("snapshot policies") {
  auto config = config_for(preset_constant_diffusion(1.0, 1.0), 0.7, 256, 2);
  const auto thinned = run(config);
  CHECK(thinned.snapshots.size() == 65);
  CHECK(thinned.snapshots[1].step == 4);
  CHECK(thinned.snapshots.back().step == 256);
  config.snapshots = SnapshotPolicy::terminal_only();
  const auto terminal = run(config);
  REQUIRE(terminal.snapshots.size() == 1);
  CHECK(same_states(terminal.terminal(), thinned.terminal()));
  config.snapshots = SnapshotPolicy::all();
  CHECK(run(config).complete());
}

TEST_CASE("coupled meshes") {
  auto config = config_for(spread_example41(), 0.7, 64, 20);
  config.snapshots = SnapshotPolicy::terminal_only();

  SUBCASE("factor 1 alone equals run") {
    const std::vector<std::size_t> one{1};
    const auto runs = run_coupled_meshes(config, one);
    REQUIRE(runs.size() == 1);
    CHECK(same_states(runs[0].record.terminal(), run(config).terminal()));
  }
  SUBCASE("drift-free runs agree on every mesh") {
    config.model = preset_constant_diffusion(0.9, 0.0);
    const std::vector<std::size_t> factors{2, 8, 64};
    const auto runs = run_coupled_meshes(config, factors);
    REQUIRE(runs.size() == 4);
    for (const auto& r : runs) {
      for (std::size_t i = 0; i < 20; ++i) {
        CHECK(r.record.terminal().states[i] == doctest::Approx(runs[0].record.terminal().states[i]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("coarse error is positive and shrinks with refinement") {
    auto rms = [&](std::size_t steps) {
      config.mesh = UniformMesh(1.0, steps);
      const std::vector<std::size_t> factors{2};
      const auto runs = run_coupled_meshes(config, factors);
      double acc = 0.0;
      for (std::size_t i = 0; i < 20; ++i) {
        const double d = runs[1].record.terminal().states[i] - runs[0].record.terminal().states[i];
        acc += d * d;
      }
      return std::sqrt(acc / 20.0);
    };
    const double coarse = rms(32);
    const double fine = rms(64);
    CHECK(coarse > 0.0);
    CHECK(fine > 0.0);
    CHECK(fine < coarse);
  }
  SUBCASE("factors must divide the mesh") {
    const std::vector<std::size_t> bad{3};
    CHECK_THROWS_AS(run_coupled_meshes(config, bad), ConfigError);
  }
}

TEST_CASE("piecewise-constant lookup") {
  auto config = config_for(preset_constant_diffusion(1.0, 1.0), 0.6, 8, 3);
  config.snapshots = SnapshotPolicy::all();
  const auto record = run(config);
  CHECK(&piecewise_constant_lookup(record, 0.25) == &record.snapshots[2].ensemble);
  CHECK(&piecewise_constant_lookup(record, 0.3) == &record.snapshots[2].ensemble);
  CHECK(&piecewise_constant_lookup(record, 0.0) == &record.snapshots[0].ensemble);
  CHECK(&piecewise_constant_lookup(record, 1.0) == &record.snapshots[8].ensemble);
  for (std::size_t k = 0; k <= 8; ++k) {
    CHECK(piecewise_constant_lookup(record, record.mesh.node(k)).step == k);
  }
  CHECK_THROWS_AS(piecewise_constant_lookup(record, -0.1), ConfigError);
  CHECK_THROWS_AS(piecewise_constant_lookup(record, 1.01), ConfigError);
  config.snapshots = SnapshotPolicy::terminal_only();
  CHECK_THROWS_AS(piecewise_constant_lookup(run(config), 0.5), ConfigError);
}

TEST_CASE("regime violations stop a run before stepping") {
  CHECK_THROWS_AS(run(config_for(preset_example41(), 0.3, 8, 2)), RegimeViolation);
}

TEST_CASE("sampled initial laws are reproducible and per-particle") {
  const auto a = initial_ensemble(spread_example41(), 5, 1, 0);
  const auto b = initial_ensemble(spread_example41(), 5, 1, 0);
  const auto c = initial_ensemble(spread_example41(), 5, 1, 1);
  CHECK(a.states == b.states);
  CHECK(a.states != c.states);
  CHECK(a.states[0] != a.states[1]);
}

TEST_CASE("exchangeability: particle marginals do not depend on the label") {
  const ModelSpec model = preset_constant_diffusion(1.0, 1.0);
  constexpr std::size_t kReplications = 400;
  std::vector<double> first(kReplications), last(kReplications), first_sq(kReplications), last_sq(kReplications);
  auto config = config_for(model, 0.7, 16, 6, 17);
  config.snapshots = SnapshotPolicy::terminal_only();
  for (std::size_t r = 0; r < kReplications; ++r) {
    config.replication = r;
    const auto terminal = run(config).terminal();
    first[r] = terminal.states.front();
    last[r] = terminal.states.back();
    first_sq[r] = first[r] * first[r];
    last_sq[r] = last[r] * last[r];
  }
  auto two_sample = [](const std::vector<double>& a, const std::vector<double>& b) {
    const auto ea = test::estimate(a);
    const auto eb = test::estimate(b);
    return std::abs(ea.mean - eb.mean) <= 5.0 * std::hypot(ea.standard_error, eb.standard_error);
  };
  CHECK(two_sample(first, last));
  CHECK(two_sample(first_sq, last_sq));
}

TEST_CASE("within-step displacement scales like delta^H") {
  for (double h : {0.3, 0.7}) {
    std::vector<std::pair<double, double>> points;
    for (std::size_t steps : {32, 64, 128, 256}) {
      auto config = config_for(preset_constant_diffusion(1.0, 1.0), h, steps, 50, 5);
      config.snapshots = SnapshotPolicy::all();
      const auto record = run(config);
      double acc = 0.0;
      for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t i = 0; i < 50; ++i) {
          const double d = record.snapshots[k + 1].ensemble.states[i] - record.snapshots[k].ensemble.states[i];
          acc += d * d;
        }
      }
      points.emplace_back(1.0 / static_cast<double>(steps), std::sqrt(acc / (50.0 * static_cast<double>(steps))));
    }
    CAPTURE(h);
    CHECK(std::abs(fit_loglog_slope(points).slope - h) <= 0.2);
  }
}

TEST_CASE("trajectory CSV") {
  auto config = config_for(preset_constant_diffusion(0.0, 0.0, 2.0), 0.6, 2, 2);
  config.snapshots = SnapshotPolicy::all();
  const auto record = run(config);
  std::ostringstream terminal;
  write_trajectory_csv(record, terminal);
  CHECK(terminal.str() == "k,t,particle,component_1\n2,1,0,2\n2,1,1,2\n");
  std::ostringstream full;
  write_trajectory_csv(record, full, false);
  CHECK(full.str() == "k,t,particle,component_1\n0,0,0,2\n0,0,1,2\n1,0.5,0,2\n1,0.5,1,2\n2,1,0,2\n2,1,1,2\n");
}

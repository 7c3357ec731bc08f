#include "mvfbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mvfbm/error.hpp"

namespace mvfbm {

DiffusionKind diffusion_kind(const ModelSpec& model) noexcept {
  switch (model.diffusion.index()) {
    case 0: return DiffusionKind::Constant;
    case 1: return DiffusionKind::MeasureDependent;
    default: return DiffusionKind::StateAndMeasure;
  }
}

std::string_view to_string(RegimeTag tag) noexcept {
  switch (tag) {
    case RegimeTag::RoughConstantDiffusion: return "rough-constant-diffusion";
    case RegimeTag::SmoothMeasureDiffusion: return "smooth-measure-diffusion";
    case RegimeTag::StandardBrownian: return "standard-brownian";
  }
  return "unknown";
}

RegimeTag validate(const ModelSpec& model, HurstParameter hurst) {
  const std::size_t d = model.dimension;
  if (d == 0) throw ConfigError(fmt::format("model '{}': dimension must be at least 1", model.name));
  if (!(model.lipschitz_constant > 0.0)) {
    throw ConfigError(fmt::format("model '{}': Lipschitz constant must be positive", model.name));
  }
  if (!model.drift) throw ConfigError(fmt::format("model '{}': drift is not set", model.name));
  if (const auto* c = std::get_if<ConstantDiffusion>(&model.diffusion); c != nullptr && c->matrix.size() != d * d) {
    throw ConfigError(fmt::format("model '{}': constant diffusion must be {}x{}", model.name, d, d));
  }
  if (const auto* m = std::get_if<MeasureDiffusion>(&model.diffusion); m != nullptr && !m->fn) {
    throw ConfigError(fmt::format("model '{}': diffusion function is not set", model.name));
  }
  if (const auto* s = std::get_if<StateMeasureDiffusion>(&model.diffusion); s != nullptr && !s->fn) {
    throw ConfigError(fmt::format("model '{}': diffusion function is not set", model.name));
  }
  if (const auto* x0 = std::get_if<ConstantInitial>(&model.initial); x0 != nullptr && x0->value.size() != d) {
    throw ConfigError(fmt::format("model '{}': initial value must have {} components", model.name, d));
  }
  if (const auto* s = std::get_if<SampledInitial>(&model.initial); s != nullptr && !s->sampler) {
    throw ConfigError(fmt::format("model '{}': initial sampler is not set", model.name));
  }

  switch (hurst.regime()) {
    case Regime::Standard:
      return RegimeTag::StandardBrownian;
    case Regime::Smooth:
      return RegimeTag::SmoothMeasureDiffusion;
    case Regime::Rough:
      if (diffusion_kind(model) != DiffusionKind::Constant) {
        throw RegimeViolation(fmt::format(
            "model '{}' with H = {}: for H < 1/2 the diffusion coefficient must be a constant "
            "independent of the distribution; existence and uniqueness are only established in that case",
            model.name, hurst.value()));
      }
      return RegimeTag::RoughConstantDiffusion;
  }
  return RegimeTag::StandardBrownian;
}

bool within_theorem_hypotheses(const ModelSpec& model) noexcept {
  return diffusion_kind(model) != DiffusionKind::StateAndMeasure;
}

double LipschitzReport::max_ratio() const noexcept {
  return std::max({drift_lipschitz, diffusion_lipschitz, drift_growth, diffusion_growth});
}

namespace {

void evaluate_diffusion(const ModelSpec& model, std::span<const double> x, const EmpiricalMeasure& mu,
                        std::span<double> out) {
  std::visit(
      [&](const auto& diffusion) {
        using T = std::decay_t<decltype(diffusion)>;
        if constexpr (std::is_same_v<T, ConstantDiffusion>) {
          std::copy(diffusion.matrix.begin(), diffusion.matrix.end(), out.begin());
        } else if constexpr (std::is_same_v<T, MeasureDiffusion>) {
          diffusion.fn(mu, out);
        } else {
          diffusion.fn(x, mu, out);
        }
      },
      model.diffusion);
}

std::vector<double> uniform_vector(RandomStream& stream, std::size_t count, double range) {
  std::vector<double> v(count);
  for (auto& x : v) x = stream.uniform(-range, range);
  return v;
}

double ratio(double numerator, double denominator) {
  if (denominator <= 0.0) return numerator > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return numerator / denominator;
}

}  // namespace

LipschitzReport lipschitz_probe(const ModelSpec& model, std::size_t samples, std::uint64_t seed,
                                const ProbeOptions& options) {
  if (samples < 2) throw ConfigError("lipschitz_probe needs at least 2 samples");
  const std::size_t d = model.dimension;
  const bool state_diffusion = diffusion_kind(model) == DiffusionKind::StateAndMeasure;
  LipschitzReport report;
  report.samples = samples;
  report.declared = model.lipschitz_constant;

  RandomStream stream(StreamKey{seed, 0, 0, 0, StreamPurpose::Probe});
  std::vector<double> bx(d), by(d), sx(d * d), sy(d * d), diff(d * d);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto x = uniform_vector(stream, d, options.range);
    const auto y = uniform_vector(stream, d, options.range);
    const EmpiricalMeasure mu(d, uniform_vector(stream, d * options.atoms, options.range));
    const EmpiricalMeasure nu(d, uniform_vector(stream, d * options.atoms, options.range));

    model.drift(x, mu, bx);
    model.drift(y, nu, by);
    evaluate_diffusion(model, x, mu, sx);
    evaluate_diffusion(model, y, nu, sy);

    const double w = coupled_upper_bound(mu, nu, model.theta);
    const double state_gap = euclidean_distance(x, y);
    report.drift_lipschitz = std::max(report.drift_lipschitz, ratio(euclidean_distance(bx, by), state_gap + w));
    const double sigma_gap = euclidean_distance(sx, sy);
    report.diffusion_lipschitz = std::max(
        report.diffusion_lipschitz, ratio(sigma_gap, (state_diffusion ? state_gap : 0.0) + w));

    const double w0 = moment_distance_to_dirac0(mu, model.theta);
    const double x_norm = euclidean_norm(x);
    report.drift_growth = std::max(report.drift_growth, ratio(euclidean_norm(bx), 1.0 + x_norm + w0));
    report.diffusion_growth = std::max(
        report.diffusion_growth, ratio(euclidean_norm(sx), 1.0 + (state_diffusion ? x_norm : 0.0) + w0));
  }
  report.flagged = report.max_ratio() > model.lipschitz_constant * (1.0 + options.flag_margin);
  return report;
}

ModelSpec preset_example41(double x0) {
  ModelSpec m;
  m.name = "example41";
  m.dimension = 1;
  m.drift = [](std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out) {
    out[0] = x[0] + (x[0] - mu.mean()[0]);
  };
  m.diffusion = StateMeasureDiffusion{
      [](std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out) {
        out[0] = x[0] - mu.mean()[0];
      }};
  m.initial = ConstantInitial{{x0}};
  m.lipschitz_constant = 2.0;
  m.theta = WassersteinOrder(2.0);
  return m;
}

ModelSpec preset_constant_diffusion(double xi, double a, double x0) {
  ModelSpec m;
  m.name = "constant-diffusion";
  m.dimension = 1;
  m.drift = [a](std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out) {
    out[0] = a * (mu.mean()[0] - x[0]);
  };
  m.diffusion = ConstantDiffusion{{xi}};
  m.initial = ConstantInitial{{x0}};
  const double bound = std::max(std::abs(a), std::abs(xi));
  m.lipschitz_constant = bound > 0.0 ? bound : 1.0;
  m.theta = WassersteinOrder(2.0);
  return m;
}

ModelSpec preset_explosive(double rate, double x0) {
  ModelSpec m;
  m.name = "explosive";
  m.dimension = 1;
  m.drift = [rate](std::span<const double> x, const EmpiricalMeasure&, std::span<double> out) {
    out[0] = rate * x[0] * x[0] * x[0];
  };
  m.diffusion = ConstantDiffusion{{1.0}};
  m.initial = ConstantInitial{{x0}};
  m.lipschitz_constant = 1.0;
  return m;
}

ModelSpec preset_by_name(std::string_view name, const PresetParameters& params) {
  if (name == "example41") return preset_example41(params.x0);
  if (name == "constant-diffusion") return preset_constant_diffusion(params.xi, params.drift_rate, params.x0);
  if (name == "explosive") return preset_explosive(10.0, params.x0);
  throw ConfigError(fmt::format("unknown model preset '{}' (expected one of example41, constant-diffusion, explosive)",
                                name));
}

std::vector<std::string> preset_names() { return {"example41", "constant-diffusion", "explosive"}; }

}  // namespace mvfbm

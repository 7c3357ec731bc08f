#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mvfbm/fbm.hpp"
#include "mvfbm/measure.hpp"
#include "mvfbm/random.hpp"

namespace mvfbm {

/// b(x, mu) written into `out` (length d).
using DriftFn = std::function<void(std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out)>;

/// Constant diffusion matrix xi, row-major d x d.
struct ConstantDiffusion {
  std::vector<double> matrix;
};

/// sigma(mu), row-major d x d. Evaluated once per step for the whole ensemble.
struct MeasureDiffusion {
  std::function<void(const EmpiricalMeasure& mu, std::span<double> out)> fn;
};

/// sigma(x, mu). Not covered by the well-posedness theory; needed by the
/// example41 preset whose noise coefficient is x - mean(mu).
struct StateMeasureDiffusion {
  std::function<void(std::span<const double> x, const EmpiricalMeasure& mu, std::span<double> out)> fn;
};

using Diffusion = std::variant<ConstantDiffusion, MeasureDiffusion, StateMeasureDiffusion>;

enum class DiffusionKind { Constant, MeasureDependent, StateAndMeasure };

struct ConstantInitial {
  std::vector<double> value;
};

/// Draws an initial state (length d) from a stream.
struct SampledInitial {
  std::function<void(RandomStream& stream, std::span<double> out)> sampler;
};

using InitialCondition = std::variant<ConstantInitial, SampledInitial>;

/// A McKean-Vlasov SDE dX = b(X, L(X)) dt + sigma(L(X)) dB^H. Coefficient
/// functions must be pure and reentrant; the simulator calls them from
/// several threads.
struct ModelSpec {
  std::string name;
  std::size_t dimension = 1;
  DriftFn drift;
  Diffusion diffusion;
  InitialCondition initial;
  double lipschitz_constant = 1.0;
  WassersteinOrder theta{2.0};
};

DiffusionKind diffusion_kind(const ModelSpec& model) noexcept;

enum class RegimeTag { RoughConstantDiffusion, SmoothMeasureDiffusion, StandardBrownian };

std::string_view to_string(RegimeTag tag) noexcept;

/// Checks the model's shape and the regime rule: H < 1/2 requires a constant
/// diffusion. Throws RegimeViolation on regime failures, ConfigError on shape errors.
RegimeTag validate(const ModelSpec& model, HurstParameter hurst);

/// False for state-dependent diffusions, which fall outside the strict theorem hypotheses.
bool within_theorem_hypotheses(const ModelSpec& model) noexcept;

struct ProbeOptions {
  double range = 10.0;         // states and atoms drawn from [-range, range]^d
  std::size_t atoms = 8;       // atoms per probe measure
  double flag_margin = 0.05;   // flag when an observed ratio exceeds L by this fraction
};

struct LipschitzReport {
  std::size_t samples = 0;
  double declared = 0.0;
  double drift_lipschitz = 0.0;      // max |b(x,mu) - b(y,nu)| / (|x-y| + W(mu,nu))
  double diffusion_lipschitz = 0.0;  // same for sigma, Frobenius norm
  double drift_growth = 0.0;         // max |b(x,mu)| / (1 + |x| + W(mu, delta_0))
  double diffusion_growth = 0.0;     // max |sigma| / (1 + W(mu, delta_0)), plus |x| for state diffusions
  bool flagged = false;

  double max_ratio() const noexcept;
};

/// Monte Carlo probe of the Lipschitz and linear-growth bounds. A diagnostic:
/// it can expose a violated bound but cannot prove one holds. W is the coupling bound.
LipschitzReport lipschitz_probe(const ModelSpec& model, std::size_t samples, std::uint64_t seed,
                                const ProbeOptions& options = {});

/// dX = (X + int (X - y) mu(dy)) dt + (int (X - y) mu(dy)) dB^H, X_0 = x0.
ModelSpec preset_example41(double x0 = 1.0);

/// dX = a (mean(mu) - X) dt + xi dB^H, X_0 = x0.
ModelSpec preset_constant_diffusion(double xi, double a, double x0 = 1.0);

/// dX = rate X^3 dt + dB^H. Explodes in finite time under EM; used to exercise failure paths.
ModelSpec preset_explosive(double rate = 10.0, double x0 = 1.0);

struct PresetParameters {
  double x0 = 1.0;
  double xi = 1.0;
  double drift_rate = 1.0;
};

/// Presets by name: "example41", "constant-diffusion", "explosive".
ModelSpec preset_by_name(std::string_view name, const PresetParameters& params = {});

std::vector<std::string> preset_names();

}  // namespace mvfbm

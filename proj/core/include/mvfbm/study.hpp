#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mvfbm/fbm.hpp"
#include "mvfbm/measure.hpp"
#include "mvfbm/model.hpp"

namespace mvfbm {

struct SlopeFit {
  double slope = 0.0;
  double standard_error = 0.0;
};

/// Least squares of log2(error) on log2(delta). Needs >= 2 points, all positive.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

// ------------------------------------------------------------ strong error

struct StrongErrorOptions {
  std::vector<double> deltas;      // coarse step sizes; each a multiple of reference_delta
  double reference_delta = 0.0;
  double horizon = 1.0;
  std::size_t particles = 200;
  std::size_t replications = 50;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::Circulant;
  std::size_t workers = 1;
};

struct ErrorPoint {
  double delta = 0.0;
  double rms_error = 0.0;
};

struct ConvergenceReport {
  std::string model_name;
  double hurst = 0.0;
  double horizon = 1.0;
  std::size_t particles = 0;
  std::size_t replications = 0;
  double reference_delta = 0.0;
  std::uint64_t seed = 0;
  std::string sampler;
  std::vector<ErrorPoint> points;  // deltas strictly decreasing
  double reference_rms = 0.0;      // RMS of the reference terminal states
  bool exact = false;              // every error at round-off level; slope not fitted
  std::optional<SlopeFit> fit;
  double wall_seconds = 0.0;
};

/// Errors below this multiple of (1 + reference_rms) count as round-off.
inline constexpr double kExactErrorTolerance = 1e-11;

/// RMS over particles and replications of |Y_T(delta) - Y_T(reference)|,
/// every mesh driven by the same fine fBm paths, and the fitted log-log slope.
ConvergenceReport strong_error_study(const ModelSpec& model, HurstParameter hurst, const StrongErrorOptions& options);

// ------------------------------------------------------------ chaos

enum class ChaosEstimator { OneDimExact, CouplingBound };

std::string_view to_string(ChaosEstimator estimator) noexcept;

struct ChaosOptions {
  std::vector<std::size_t> particle_counts;  // non-decreasing
  std::size_t replications = 30;
  WassersteinOrder theta{2.0};
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::Circulant;
  std::size_t workers = 1;
  ChaosEstimator estimator = ChaosEstimator::OneDimExact;
  std::size_t reference_multiplier = 4;
};

struct ChaosPoint {
  std::size_t particles = 0;
  double distance = 0.0;
  double standard_error = 0.0;
};

struct ChaosReport {
  std::string model_name;
  double hurst = 0.0;
  double theta = 2.0;
  std::size_t steps = 0;
  double horizon = 1.0;
  std::size_t replications = 0;
  std::size_t reference_particles = 0;
  std::uint64_t seed = 0;
  std::string estimator;
  std::vector<ChaosPoint> points;
  bool non_increasing = false;
  double wall_seconds = 0.0;
};

/// Distance between the terminal empirical law of an N-particle system and
/// an N-atom subsample of an independent reference system with
/// reference_multiplier * max(N) particles, averaged over replications.
/// The trend verdict holds when each consecutive estimate rises by no more
/// than one standard error of the difference.
ChaosReport chaos_study(const ModelSpec& model, HurstParameter hurst, const UniformMesh& mesh,
                        const ChaosOptions& options);

// ------------------------------------------------------------ moments

struct MomentOptions {
  std::vector<double> deltas;  // mesh ladder; each a multiple of the smallest
  double horizon = 1.0;
  std::size_t particles = 200;
  std::size_t replications = 1;
  double q = 2.0;
  std::uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::Circulant;
  std::size_t workers = 1;
  double ratio_low = 0.8;
  double ratio_high = 1.25;
};

struct MomentPoint {
  double delta = 0.0;
  double max_moment = 0.0;       // max over mesh nodes of the empirical E|Y_t|^q
  double terminal_moment = 0.0;  // empirical E|Y_T|^q
  double terminal_standard_error = 0.0;  // treats particle samples as independent
  std::optional<double> ratio;   // max_moment / previous (coarser) max_moment
};

struct MomentReport {
  std::string model_name;
  double hurst = 0.0;
  double q = 2.0;
  std::size_t particles = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  std::vector<MomentPoint> points;  // deltas strictly decreasing
  bool pass = false;
  double wall_seconds = 0.0;
};

MomentReport moment_bound_check(const ModelSpec& model, HurstParameter hurst, const MomentOptions& options);

// ------------------------------------------------------------ fBm checks

struct CovarianceEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double empirical = 0.0;
  double theoretical = 0.0;
  double standard_error = 0.0;
  double z = 0.0;  // (empirical - theoretical) / standard_error
};

struct FbmCheckReport {
  double hurst = 0.0;
  std::size_t steps = 0;
  double horizon = 1.0;
  std::size_t paths = 0;
  std::string sampler;
  std::uint64_t seed = 0;
  std::vector<CovarianceEntry> entries;  // upper triangle, row-major
  double max_abs_z = 0.0;
  double wall_seconds = 0.0;
};

/// Empirical increment covariance over `paths` independent paths against the
/// exact matrix, with standard errors estimated from the sample.
FbmCheckReport fbm_covariance_check(HurstParameter hurst, const UniformMesh& mesh, std::size_t paths,
                                    SamplerKind sampler, std::uint64_t seed, std::size_t workers = 1);

struct IncrementMomentEntry {
  std::size_t from = 0;  // node index s
  std::size_t to = 0;    // node index t
  double empirical = 0.0;
  double theoretical = 0.0;  // |t - s|^{2H}
  double standard_error = 0.0;
  double z = 0.0;
};

/// Empirical E|B_t - B_s|^2 for node pairs, against |t - s|^{2H}.
std::vector<IncrementMomentEntry> fbm_increment_moment_check(
    HurstParameter hurst, const UniformMesh& mesh, const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    std::size_t paths, SamplerKind sampler, std::uint64_t seed, std::size_t workers = 1);

}  // namespace mvfbm

#include "mvfbm/fbm.hpp"

#include <cmath>
#include <mutex>
#include <ostream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fmt/format.h>
#include <fftw3.h>

#include "mvfbm/circulant.hpp"
#include "mvfbm/error.hpp"
#include "fftw_support.hpp"

namespace mvfbm {

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::Rough: return "rough";
    case Regime::Standard: return "standard";
    case Regime::Smooth: return "smooth";
  }
  return "unknown";
}

HurstParameter::HurstParameter(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw ConfigError(fmt::format("Hurst parameter must lie in (0, 1), got {}", value));
  }
  regime_ = value < 0.5 ? Regime::Rough : (value > 0.5 ? Regime::Smooth : Regime::Standard);
}

UniformMesh::UniformMesh(double horizon, std::size_t steps)
    : horizon_(horizon), steps_(steps), delta_(steps == 0 ? 0.0 : horizon / static_cast<double>(steps)) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError(fmt::format("mesh horizon must be positive and finite, got {}", horizon));
  }
}

double UniformMesh::node(std::size_t k) const noexcept {
  return k == steps_ ? horizon_ : static_cast<double>(k) * delta_;
}

UniformMesh UniformMesh::coarsen(std::size_t factor) const {
  if (factor == 0 || steps_ % factor != 0) {
    throw ConfigError(fmt::format("factor {} does not divide the {} mesh steps", factor, steps_));
  }
  return UniformMesh(horizon_, steps_ / factor);
}

FbmPath::FbmPath(UniformMesh mesh, std::size_t dimension, std::vector<double> increments)
    : mesh_(mesh), dimension_(dimension), increments_(std::move(increments)) {
  if (dimension_ == 0) throw ConfigError("fBm path dimension must be at least 1");
  if (increments_.size() != mesh_.steps() * dimension_) {
    throw ConfigError("fBm increment array does not match steps x dimension");
  }
}

std::vector<double> FbmPath::cumulative(std::size_t j) const {
  std::vector<double> out(steps() + 1, 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < steps(); ++k) {
    acc += increment(k, j);
    out[k + 1] = acc;
  }
  return out;
}

double fbm_covariance(HurstParameter hurst, double t, double s) {
  if (t < 0.0 || s < 0.0) throw ConfigError("fBm covariance needs nonnegative times");
  const double two_h = 2.0 * hurst.value();
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double increment_autocovariance(HurstParameter hurst, double delta, std::size_t lag) {
  const double two_h = 2.0 * hurst.value();
  const double k = static_cast<double>(lag);
  const double lower = lag == 0 ? 1.0 : std::pow(k - 1.0, two_h);
  return 0.5 * std::pow(delta, two_h) * (std::pow(k + 1.0, two_h) + lower - 2.0 * std::pow(k, two_h));
}

CovarianceMatrix increment_covariance_matrix(HurstParameter hurst, const UniformMesh& mesh) {
  const std::size_t n = mesh.steps();
  if (n == 0) throw ConfigError("increment covariance needs at least one step");
  std::vector<double> lags(n);
  for (std::size_t k = 0; k < n; ++k) lags[k] = increment_autocovariance(hurst, mesh.delta(), k);
  CovarianceMatrix c{n, std::vector<double>(n * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) c.values[i * n + j] = lags[i > j ? i - j : j - i];
  }
  return c;
}

std::string_view to_string(SamplerKind kind) noexcept {
  return kind == SamplerKind::Cholesky ? "cholesky" : "circulant";
}

SamplerKind parse_sampler_kind(std::string_view name) {
  if (name == "cholesky") return SamplerKind::Cholesky;
  if (name == "circulant") return SamplerKind::Circulant;
  throw ConfigError(fmt::format("unknown sampler '{}' (expected cholesky or circulant)", name));
}

// ---------------------------------------------------------------- Cholesky

CholeskySampler::CholeskySampler(HurstParameter hurst, UniformMesh mesh) : PathSampler(hurst, mesh) {
  const std::size_t n = mesh.steps();
  if (n == 0) return;
  const CovarianceMatrix cov = increment_covariance_matrix(hurst, mesh);
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = cov(i, j);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw SamplerError(fmt::format(
        "Cholesky factorization of the fBm increment covariance failed (H = {}, n = {}); "
        "the matrix is numerically not positive definite, use the circulant sampler instead",
        hurst.value(), n));
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  lower_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) lower_[i * n + j] = lower(i, j);
  }
}

void CholeskySampler::sample_component(RandomStream& stream, std::span<double> out) const {
  const std::size_t n = mesh().steps();
  std::vector<double> z(n);
  for (auto& v : z) v = stream.normal();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = lower_.data() + i * n;
    for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
    out[i] = acc;
  }
}

FbmPath CholeskySampler::sample(std::size_t dimension, const StreamKey& key) const {
  const std::size_t n = mesh().steps();
  std::vector<double> increments(n * dimension);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < dimension; ++j) {
    StreamKey component_key = key;
    component_key.component = j;
    RandomStream stream(component_key);
    sample_component(stream, column);
    for (std::size_t k = 0; k < n; ++k) increments[k * dimension + j] = column[k];
  }
  return FbmPath(mesh(), dimension, std::move(increments));
}

// ---------------------------------------------------------------- Circulant

struct CirculantSampler::Impl {
  std::size_t m = 0;
  std::vector<double> lambda;
  std::vector<double> scale;  // per frequency 0..m/2
  fftw_plan plan = nullptr;

  ~Impl() {
    if (plan != nullptr) {
      std::lock_guard lock(detail::planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

namespace {
constexpr int kMaxEmbeddingDoublings = 3;
}

CirculantSampler::CirculantSampler(HurstParameter hurst, UniformMesh mesh)
    : PathSampler(hurst, mesh), impl_(std::make_unique<Impl>()) {
  const std::size_t n = mesh.steps();
  if (n == 0) return;
  std::size_t m = 2 * n;
  for (int attempt = 0;; ++attempt, m *= 2) {
    std::vector<double> lags(m / 2 + 1);
    for (std::size_t k = 0; k < lags.size(); ++k) lags[k] = increment_autocovariance(hurst, mesh.delta(), k);
    std::vector<double> lambda = circulant::eigenvalues(circulant::embedding_row(lags, m));
    if (circulant::is_nonnegative_spectrum(lambda)) {
      impl_->m = m;
      impl_->lambda = std::move(lambda);
      break;
    }
    if (attempt == kMaxEmbeddingDoublings) {
      throw SamplerError(fmt::format(
          "circulant embedding of the fBm increments has a negative eigenvalue (H = {}, n = {}, "
          "embedding size up to {}); use a larger embedding or the Cholesky sampler",
          hurst.value(), n, m));
    }
  }

  const std::size_t half = impl_->m / 2;
  const double md = static_cast<double>(impl_->m);
  impl_->scale.resize(half + 1);
  for (std::size_t j = 0; j <= half; ++j) {
    // Round-off negatives below the tolerance are zeroed.
    const double lam = std::max(impl_->lambda[j], 0.0);
    impl_->scale[j] = (j == 0 || j == half) ? std::sqrt(lam / md) : std::sqrt(lam / (2.0 * md));
  }

  detail::FftwBuffer<fftw_complex> in(half + 1);
  detail::FftwBuffer<double> out(impl_->m);
  std::lock_guard lock(detail::planner_mutex());
  impl_->plan = fftw_plan_dft_c2r_1d(static_cast<int>(impl_->m), in.data(), out.data(), FFTW_ESTIMATE);
}

CirculantSampler::~CirculantSampler() = default;

std::size_t CirculantSampler::embedding_size() const noexcept { return impl_->m; }

std::span<const double> CirculantSampler::eigenvalues() const noexcept { return impl_->lambda; }

void CirculantSampler::sample_component(RandomStream& stream, std::span<double> out) const {
  const std::size_t n = mesh().steps();
  if (n == 0) return;
  const std::size_t half = impl_->m / 2;
  detail::FftwBuffer<fftw_complex> in(half + 1);
  detail::FftwBuffer<double> real(impl_->m);
  fftw_complex* w = in.data();
  w[0][0] = impl_->scale[0] * stream.normal();
  w[0][1] = 0.0;
  for (std::size_t j = 1; j < half; ++j) {
    const double re = stream.normal();
    const double im = stream.normal();
    w[j][0] = impl_->scale[j] * re;
    w[j][1] = impl_->scale[j] * im;
  }
  w[half][0] = impl_->scale[half] * stream.normal();
  w[half][1] = 0.0;
  fftw_execute_dft_c2r(impl_->plan, in.data(), real.data());
  for (std::size_t k = 0; k < n; ++k) out[k] = real.data()[k];
}

FbmPath CirculantSampler::sample(std::size_t dimension, const StreamKey& key) const {
  const std::size_t n = mesh().steps();
  std::vector<double> increments(n * dimension);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < dimension; ++j) {
    StreamKey component_key = key;
    component_key.component = j;
    RandomStream stream(component_key);
    sample_component(stream, column);
    for (std::size_t k = 0; k < n; ++k) increments[k * dimension + j] = column[k];
  }
  return FbmPath(mesh(), dimension, std::move(increments));
}

std::unique_ptr<PathSampler> make_sampler(SamplerKind kind, HurstParameter hurst, const UniformMesh& mesh) {
  if (kind == SamplerKind::Cholesky) return std::make_unique<CholeskySampler>(hurst, mesh);
  return std::make_unique<CirculantSampler>(hurst, mesh);
}

FbmPath generate_path_cholesky(HurstParameter hurst, const UniformMesh& mesh, std::size_t dimension,
                               const StreamKey& key) {
  return CholeskySampler(hurst, mesh).sample(dimension, key);
}

FbmPath generate_path_circulant(HurstParameter hurst, const UniformMesh& mesh, std::size_t dimension,
                                const StreamKey& key) {
  return CirculantSampler(hurst, mesh).sample(dimension, key);
}

FbmPath restrict_to_coarse(const FbmPath& path, std::size_t factor) {
  const UniformMesh coarse = path.mesh().coarsen(factor);
  const std::size_t d = path.dimension();
  std::vector<double> increments(coarse.steps() * d);
  for (std::size_t k = 0; k < coarse.steps(); ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t f = 0; f < factor; ++f) acc += path.increment(k * factor + f, j);
      increments[k * d + j] = acc;
    }
  }
  return FbmPath(coarse, d, std::move(increments));
}

void write_path_csv(const FbmPath& path, std::ostream& out) {
  const std::size_t d = path.dimension();
  out << "t";
  for (std::size_t j = 0; j < d; ++j) out << ",component_" << (j + 1);
  out << '\n';
  std::vector<std::vector<double>> columns;
  columns.reserve(d);
  for (std::size_t j = 0; j < d; ++j) columns.push_back(path.cumulative(j));
  for (std::size_t k = 0; k <= path.steps(); ++k) {
    out << fmt::format("{}", path.mesh().node(k));
    for (std::size_t j = 0; j < d; ++j) out << fmt::format(",{}", columns[j][k]);
    out << '\n';
  }
}

}  // namespace mvfbm

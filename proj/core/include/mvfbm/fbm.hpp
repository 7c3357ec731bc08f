#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "mvfbm/random.hpp"

namespace mvfbm {

enum class Regime { Rough, Standard, Smooth };

std::string_view to_string(Regime regime) noexcept;

/// Hurst exponent in the open interval (0, 1).
class HurstParameter {
public:
  explicit HurstParameter(double value);

  double value() const noexcept { return value_; }
  Regime regime() const noexcept { return regime_; }

private:
  double value_;
  Regime regime_;
};

/// Uniform mesh 0 = t_0 < ... < t_n = T. A mesh with zero steps holds only t_0.
class UniformMesh {
public:
  UniformMesh(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  double delta() const noexcept { return delta_; }
  double node(std::size_t k) const noexcept;

  /// Mesh with steps / factor steps over the same horizon.
  UniformMesh coarsen(std::size_t factor) const;

private:
  double horizon_;
  std::size_t steps_;
  double delta_;
};

/// fBm increments on a uniform mesh, row-major n x d:
/// increment(k, j) = B^j(t_{k+1}) - B^j(t_k).
class FbmPath {
public:
  FbmPath(UniformMesh mesh, std::size_t dimension, std::vector<double> increments);

  const UniformMesh& mesh() const noexcept { return mesh_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t steps() const noexcept { return mesh_.steps(); }

  double increment(std::size_t k, std::size_t j) const { return increments_[k * dimension_ + j]; }
  std::span<const double> increments() const noexcept { return increments_; }
  /// The d increments of step k.
  std::span<const double> step(std::size_t k) const {
    return std::span<const double>(increments_).subspan(k * dimension_, dimension_);
  }

  /// B^j at every node, starting from B^j(0) = 0. Summed left to right.
  std::vector<double> cumulative(std::size_t j) const;

private:
  UniformMesh mesh_;
  std::size_t dimension_;
  std::vector<double> increments_;
};

/// R_H(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(HurstParameter hurst, double t, double s);

/// Cov(dB_{t_j}, dB_{t_k}) for |j - k| = lag on a mesh of width delta.
double increment_autocovariance(HurstParameter hurst, double delta, std::size_t lag);

/// Dense symmetric matrix stored row-major.
struct CovarianceMatrix {
  std::size_t size = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * size + j]; }
};

CovarianceMatrix increment_covariance_matrix(HurstParameter hurst, const UniformMesh& mesh);

enum class SamplerKind { Cholesky, Circulant };

std::string_view to_string(SamplerKind kind) noexcept;
SamplerKind parse_sampler_kind(std::string_view name);

/// Exact sampler of fBm increments for a fixed (H, mesh). Setup cost is paid
/// once at construction; sample() is const and safe to call concurrently.
/// Component j of a path draws from the stream `key` with component = j.
class PathSampler {
public:
  virtual ~PathSampler() = default;

  virtual FbmPath sample(std::size_t dimension, const StreamKey& key) const = 0;
  virtual SamplerKind kind() const noexcept = 0;

  HurstParameter hurst() const noexcept { return hurst_; }
  const UniformMesh& mesh() const noexcept { return mesh_; }

protected:
  PathSampler(HurstParameter hurst, UniformMesh mesh) : hurst_(hurst), mesh_(mesh) {}

private:
  HurstParameter hurst_;
  UniformMesh mesh_;
};

/// Dense Cholesky factor of the increment covariance. O(n^2) per path.
class CholeskySampler final : public PathSampler {
public:
  /// Throws SamplerError if the covariance is not numerically positive definite.
  CholeskySampler(HurstParameter hurst, UniformMesh mesh);

  FbmPath sample(std::size_t dimension, const StreamKey& key) const override;
  SamplerKind kind() const noexcept override { return SamplerKind::Cholesky; }

  /// Draw one component's increments from an existing stream.
  void sample_component(RandomStream& stream, std::span<double> out) const;

private:
  std::vector<double> lower_;  // row-major lower triangle factor
};

/// Davies-Harte circulant embedding of the stationary increment sequence.
/// O(n log n) per path.
class CirculantSampler final : public PathSampler {
public:
  /// The embedding starts at 2n and doubles up to three times while the
  /// circulant spectrum has a negative eigenvalue; then throws SamplerError.
  CirculantSampler(HurstParameter hurst, UniformMesh mesh);
  ~CirculantSampler() override;
  CirculantSampler(const CirculantSampler&) = delete;
  CirculantSampler& operator=(const CirculantSampler&) = delete;

  FbmPath sample(std::size_t dimension, const StreamKey& key) const override;
  SamplerKind kind() const noexcept override { return SamplerKind::Circulant; }

  void sample_component(RandomStream& stream, std::span<double> out) const;

  std::size_t embedding_size() const noexcept;
  std::span<const double> eigenvalues() const noexcept;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<PathSampler> make_sampler(SamplerKind kind, HurstParameter hurst, const UniformMesh& mesh);

FbmPath generate_path_cholesky(HurstParameter hurst, const UniformMesh& mesh, std::size_t dimension,
                               const StreamKey& key);
FbmPath generate_path_circulant(HurstParameter hurst, const UniformMesh& mesh, std::size_t dimension,
                                const StreamKey& key);

/// Coarse increment k is the left-to-right sum of fine increments
/// k*factor .. (k+1)*factor - 1.
FbmPath restrict_to_coarse(const FbmPath& path, std::size_t factor);

/// CSV with header `t,component_1..component_d` and cumulative values per node.
void write_path_csv(const FbmPath& path, std::ostream& out);

}  // namespace mvfbm

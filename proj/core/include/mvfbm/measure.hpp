#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvfbm {

/// Order theta >= 2 of a Wasserstein distance.
class WassersteinOrder {
public:
  explicit WassersteinOrder(double theta = 2.0);
  double value() const noexcept { return theta_; }

private:
  double theta_;
};

/// Sum in a fixed pairwise-tree order. The result depends only on the
/// input sequence, never on how a caller parallelizes around it.
double pairwise_sum(std::span<const double> values);

/// N equally weighted atoms in R^d, stored row-major. The mean is computed
/// once at construction in a fixed reduction order, relative to the first
/// atom, so that N identical atoms have a mean equal to that atom exactly.
class EmpiricalMeasure {
public:
  EmpiricalMeasure(std::size_t dimension, std::vector<double> atoms);

  /// Dirac mass at `point`.
  static EmpiricalMeasure dirac(std::span<const double> point);

  std::size_t size() const noexcept { return count_; }
  std::size_t dimension() const noexcept { return dimension_; }

  std::span<const double> atom(std::size_t i) const {
    return std::span<const double>(atoms_).subspan(i * dimension_, dimension_);
  }
  std::span<const double> atoms() const noexcept { return atoms_; }
  std::span<const double> mean() const noexcept { return mean_; }

private:
  std::size_t dimension_;
  std::size_t count_;
  std::vector<double> atoms_;
  std::vector<double> mean_;
};

double euclidean_norm(std::span<const double> x);
double euclidean_distance(std::span<const double> x, std::span<const double> y);

/// W_theta(mu, delta_0) = ((1/N) sum_j |x_j|^theta)^(1/theta); every coupling to a Dirac is forced.
double moment_distance_to_dirac0(const EmpiricalMeasure& mu, WassersteinOrder theta);

/// Cost of the identity-index coupling, an upper bound on W_theta(mu, nu).
/// Throws ConfigError if N or d differ.
double coupled_upper_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, WassersteinOrder theta);

/// Exact W_theta for equally weighted one-dimensional measures of equal size
/// (sorted quantile matching). Throws ConfigError when d != 1 or sizes differ.
double wasserstein_1d_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, WassersteinOrder theta);

/// W_low <= W_high + tolerance, both computed exactly in d = 1.
bool monotonicity_check(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, WassersteinOrder theta_low,
                        WassersteinOrder theta_high, double tolerance = 1e-12);

}  // namespace mvfbm

#include "mvfbm/measure.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mvfbm/error.hpp"

namespace mvfbm {

WassersteinOrder::WassersteinOrder(double theta) : theta_(theta) {
  if (!(theta >= 2.0) || !std::isfinite(theta)) {
    throw ConfigError(fmt::format("Wasserstein order theta must be >= 2, got {}", theta));
  }
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EmpiricalMeasure::EmpiricalMeasure(std::size_t dimension, std::vector<double> atoms)
    : dimension_(dimension), count_(0), atoms_(std::move(atoms)), mean_(dimension, 0.0) {
  if (dimension_ == 0) throw ConfigError("empirical measure dimension must be at least 1");
  if (atoms_.empty() || atoms_.size() % dimension_ != 0) {
    throw ConfigError("empirical measure needs a positive whole number of atoms");
  }
  count_ = atoms_.size() / dimension_;
  std::vector<double> deviations(count_);
  for (std::size_t j = 0; j < dimension_; ++j) {
    const double anchor = atoms_[j];
    for (std::size_t i = 0; i < count_; ++i) deviations[i] = atoms_[i * dimension_ + j] - anchor;
    mean_[j] = anchor + pairwise_sum(deviations) / static_cast<double>(count_);
  }
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::span<const double> point) {
  return EmpiricalMeasure(point.size(), std::vector<double>(point.begin(), point.end()));
}

double euclidean_norm(std::span<const double> x) {
  if (x.size() == 1) return std::abs(x[0]);
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() == 1) return std::abs(x[0] - y[0]);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

namespace {

double power_mean(std::span<const double> costs, double theta) {
  // theta = 2 is the common case; avoid pow round-off there.
  std::vector<double> powered(costs.size());
  if (theta == 2.0) {
    for (std::size_t i = 0; i < costs.size(); ++i) powered[i] = costs[i] * costs[i];
    return std::sqrt(pairwise_sum(powered) / static_cast<double>(costs.size()));
  }
  for (std::size_t i = 0; i < costs.size(); ++i) powered[i] = std::pow(costs[i], theta);
  return std::pow(pairwise_sum(powered) / static_cast<double>(costs.size()), 1.0 / theta);
}

void require_aligned(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.size() != nu.size() || mu.dimension() != nu.dimension()) {
    throw ConfigError(fmt::format("measures are not index-aligned: N {} vs {}, d {} vs {}", mu.size(),
                                  nu.size(), mu.dimension(), nu.dimension()));
  }
}

}  // namespace

double moment_distance_to_dirac0(const EmpiricalMeasure& mu, WassersteinOrder theta) {
  std::vector<double> norms(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) norms[i] = euclidean_norm(mu.atom(i));
  return power_mean(norms, theta.value());
}

double coupled_upper_bound(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, WassersteinOrder theta) {
  require_aligned(mu, nu);
  std::vector<double> costs(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) costs[i] = euclidean_distance(mu.atom(i), nu.atom(i));
  return power_mean(costs, theta.value());
}

double wasserstein_1d_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, WassersteinOrder theta) {
  if (mu.dimension() != 1 || nu.dimension() != 1) {
    throw ConfigError("exact Wasserstein distance is only available in d = 1; "
                      "use coupled_upper_bound for multi-dimensional measures");
  }
  require_aligned(mu, nu);
  std::vector<double> a(mu.atoms().begin(), mu.atoms().end());
  std::vector<double> b(nu.atoms().begin(), nu.atoms().end());
  std::stable_sort(a.begin(), a.end());
  std::stable_sort(b.begin(), b.end());
  std::vector<double> costs(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) costs[i] = std::abs(a[i] - b[i]);
  return power_mean(costs, theta.value());
}

bool monotonicity_check(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu, WassersteinOrder theta_low,
                        WassersteinOrder theta_high, double tolerance) {
  if (theta_low.value() > theta_high.value()) {
    throw ConfigError("monotonicity_check needs theta_low <= theta_high");
  }
  return wasserstein_1d_exact(mu, nu, theta_low) <= wasserstein_1d_exact(mu, nu, theta_high) + tolerance;
}

}  // namespace mvfbm

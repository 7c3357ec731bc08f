#include "mvfbm/circulant.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

#include "mvfbm/error.hpp"
#include "fftw_support.hpp"

namespace mvfbm::circulant {

std::vector<double> embedding_row(std::span<const double> autocovariance, std::size_t m) {
  if (m < 2 || m % 2 != 0) {
    throw ConfigError("circulant embedding size must be even and at least 2");
  }
  const std::size_t half = m / 2;
  if (autocovariance.size() < half + 1) {
    throw ConfigError("circulant embedding needs autocovariance at lags 0..m/2");
  }
  std::vector<double> row(m);
  for (std::size_t j = 0; j <= half; ++j) row[j] = autocovariance[j];
  for (std::size_t j = 1; j < half; ++j) row[m - j] = autocovariance[j];
  return row;
}

std::vector<double> eigenvalues(std::span<const double> row) {
  const std::size_t m = row.size();
  detail::FftwBuffer<double> in(m);
  detail::FftwBuffer<fftw_complex> out(m / 2 + 1);
  std::copy(row.begin(), row.end(), in.data());
  fftw_plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(), out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(plan);
  }
  std::vector<double> lambda(m);
  for (std::size_t j = 0; j <= m / 2; ++j) {
    lambda[j] = out.data()[j][0];
    if (j > 0 && j < m - j) lambda[m - j] = lambda[j];
  }
  return lambda;
}

bool is_nonnegative_spectrum(std::span<const double> lambda) {
  double largest = 0.0;
  double smallest = 0.0;
  for (double v : lambda) {
    largest = std::max(largest, std::abs(v));
    smallest = std::min(smallest, v);
  }
  return smallest >= -kNegativeEigenvalueTolerance * largest;
}

}  // namespace mvfbm::circulant

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvfbm::circulant {

/// First row of the size-m circulant matrix embedding a stationary
/// autocovariance given at lags 0..m/2. m must be even and >= 2.
std::vector<double> embedding_row(std::span<const double> autocovariance, std::size_t m);

/// Eigenvalues of the symmetric circulant matrix with the given first row
/// (the real DFT of the row).
std::vector<double> eigenvalues(std::span<const double> row);

/// Relative tolerance below which negative eigenvalues count as round-off.
inline constexpr double kNegativeEigenvalueTolerance = 1e-10;

/// True when min(lambda) >= -tolerance * max(|lambda|).
bool is_nonnegative_spectrum(std::span<const double> lambda);

}  // namespace mvfbm::circulant

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvfbm {

/// Invalid argument or configuration. Maps to exit status 2 in the CLI.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A model/Hurst combination outside the supported well-posedness regimes.
class RegimeViolation : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// Base for failures that occur while computing (exit status 1 in the CLI).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Covariance factorization or circulant embedding could not produce an exact sampler.
class SamplerError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// A particle state became NaN or infinite.
class NumericalBlowup : public NumericalError {
public:
  NumericalBlowup(std::size_t step, std::size_t particle, const std::string& what)
      : NumericalError(what), step_(step), particle_(particle) {}

  std::size_t step() const noexcept { return step_; }
  std::size_t particle() const noexcept { return particle_; }

private:
  std::size_t step_;
  std::size_t particle_;
};

}  // namespace mvfbm

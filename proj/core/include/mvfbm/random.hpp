#pragma once

#include <cstdint>
#include <random>

namespace mvfbm {

/// What a derived stream is used for. Distinct purposes never share draws.
enum class StreamPurpose : std::uint64_t {
  Driver = 0,
  InitialState = 1,
  Probe = 2,
  Subsample = 3,
};

/// Coordinates of a child stream. Identical keys always yield identical draws,
/// which is what makes runs independent of the parallel schedule.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t replication = 0;
  std::uint64_t particle = 0;
  std::uint64_t component = 0;
  StreamPurpose purpose = StreamPurpose::Driver;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Hash of a stream key into a 64-bit seed.
std::uint64_t derive_seed(const StreamKey& key) noexcept;

/// Combine a seed with an extra tag (used to give sub-experiments their own seed space).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// A reproducible random stream. Standard normals use std::normal_distribution,
/// so golden values are fixed per standard library build.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed);
  explicit RandomStream(const StreamKey& key) : RandomStream(derive_seed(key)) {}

  double normal();
  double uniform(double lo, double hi);
  std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound)

  std::mt19937_64& engine() noexcept { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mvfbm

#include "mvfbm/random.hpp"

namespace mvfbm {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  return mix64(mix64(seed) ^ (tag * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

std::uint64_t derive_seed(const StreamKey& key) noexcept {
  std::uint64_t h = mix64(key.master_seed);
  h = derive_seed(h, key.replication);
  h = derive_seed(h, key.particle);
  h = derive_seed(h, key.component);
  return derive_seed(h, static_cast<std::uint64_t>(key.purpose));
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(seed) {}

double RandomStream::normal() { return normal_(engine_); }

double RandomStream::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
}

}  // namespace mvfbm

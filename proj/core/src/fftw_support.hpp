#pragma once

#include <cstddef>
#include <mutex>
#include <new>

#include <fftw3.h>

namespace mvfbm::detail {

/// FFTW's planner is not thread-safe; plan creation and destruction go through this lock.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// SIMD-aligned buffer from fftw_malloc. All buffers share FFTW's alignment,
/// so a plan made on one may execute on another through the new-array API.
template <typename T>
class FftwBuffer {
public:
  explicit FftwBuffer(std::size_t count)
      : data_(static_cast<T*>(fftw_malloc(sizeof(T) * (count == 0 ? 1 : count)))) {
    if (data_ == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data_); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  T* data() noexcept { return data_; }
  const T* data() const noexcept { return data_; }

private:
  T* data_;
};

}  // namespace mvfbm::detail

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "chlab/error.hpp"

namespace chlab::fft {

using Complex = std::complex<double>;

namespace detail {

// FFTW's planner is not re-entrant; execution with a finished plan is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Real-to-half-complex transform pair of fixed length, owning FFTW buffers
/// and plans. The forward transform is unnormalised; the inverse divides by N.
class RealTransform {
 public:
  explicit RealTransform(std::size_t n) : n_(n) {
    if (n < 2) throw InvalidArgument("RealTransform: length must be >= 2");
    real_ = fftw_alloc_real(n_);
    spec_ = fftw_alloc_complex(n_ / 2 + 1);
    std::lock_guard lock(detail::planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec_, real_, FFTW_ESTIMATE);
  }

  RealTransform(const RealTransform&) = delete;
  RealTransform& operator=(const RealTransform&) = delete;

  ~RealTransform() {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(inverse_);
    fftw_destroy_plan(forward_);
    fftw_free(spec_);
    fftw_free(real_);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t modes() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<Complex> out) {
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(forward_);
    auto* c = reinterpret_cast<const Complex*>(spec_);
    std::copy(c, c + modes(), out.begin());
  }

  /// Consumes the spectrum (c2r transforms overwrite their input).
  void inverse(std::span<const Complex> in, std::span<double> out) {
    auto* c = reinterpret_cast<Complex*>(spec_);
    std::copy(in.begin(), in.end(), c);
    fftw_execute(inverse_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = real_[i] * scale;
  }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

/// Per-thread transform cache keyed by length.
inline RealTransform& transform_for(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealTransform>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealTransform>(n);
  return *slot;
}

}  // namespace chlab::fft

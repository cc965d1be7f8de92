#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>

#include "dpnls/error.hpp"

namespace dpnls {

/// Owning 1D complex FFT workspace (FFTW). Plans use FFTW_ESTIMATE so the
/// chosen algorithm, and therefore every output bit, is stable across runs.
/// One instance per trajectory; instances are not shared between threads.
class Fft1d {
 public:
  explicit Fft1d(std::size_t m) : m_(m) {
    require(m >= 2, ErrorKind::domain, "FFT size must be >= 2");
    buf_ = fftw_alloc_complex(m);
    require(buf_ != nullptr, ErrorKind::domain, "FFT buffer allocation failed");
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(m), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(m), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  Fft1d(const Fft1d&) = delete;
  Fft1d& operator=(const Fft1d&) = delete;

  ~Fft1d() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  std::size_t size() const noexcept { return m_; }

  /// Unnormalized forward transform, in place.
  void forward(std::span<std::complex<double>> data) { run(fwd_, data, 1.0); }

  /// Inverse transform including the 1/m factor, in place.
  void backward(std::span<std::complex<double>> data) {
    run(bwd_, data, 1.0 / static_cast<double>(m_));
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
  }

  void run(fftw_plan plan, std::span<std::complex<double>> data, double scale) {
    require(data.size() == m_, ErrorKind::domain, "FFT input size mismatch");
    auto* b = reinterpret_cast<std::complex<double>*>(buf_);
    for (std::size_t j = 0; j < m_; ++j) b[j] = data[j];
    fftw_execute(plan);
    for (std::size_t j = 0; j < m_; ++j) data[j] = b[j] * scale;
  }

  std::size_t m_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace dpnls

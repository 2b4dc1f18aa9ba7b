#pragma once

// Thin FFTW wrappers. Planning is not thread-safe in FFTW, execution is.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "error.hpp"

namespace lrex {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Circular correlation on Z_N: (C_w b)(x) = sum_d w(d) b(x + d).
///
/// In Fourier space this is conj(W_k) B_k, so a fixed kernel w is transformed
/// once and reused. Owns its buffers; one instance per thread.
class RingConvolver {
 public:
  using Spectrum = std::vector<std::complex<double>>;

  explicit RingConvolver(std::size_t size) : n_(size) {
    detail::require(size >= 2, "RingConvolver: size must be at least 2");
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
    spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n_ / 2 + 1)));
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    const int n = static_cast<int>(n_);
    fwd_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
  }

  RingConvolver(const RingConvolver&) = delete;
  RingConvolver& operator=(const RingConvolver&) = delete;

  ~RingConvolver() {
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(fwd_);
      fftw_destroy_plan(bwd_);
    }
    fftw_free(real_);
    fftw_free(spec_);
  }

  std::size_t size() const { return n_; }

  Spectrum transform(std::span<const double> x) {
    detail::require(x.size() == n_, "RingConvolver: length mismatch");
    std::copy(x.begin(), x.end(), real_);
    fftw_execute(fwd_);
    Spectrum out(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {spec_[k][0], spec_[k][1]};
    return out;
  }

  /// C_w b given w_hat = transform(w).
  std::vector<double> correlate(const Spectrum& w_hat, std::span<const double> b) {
    detail::require(w_hat.size() == n_ / 2 + 1, "RingConvolver: spectrum length mismatch");
    std::vector<double> out(n_);
    correlate_into(w_hat, b, out);
    return out;
  }

  void correlate_into(const Spectrum& w_hat, std::span<const double> b, std::span<double> out) {
    detail::require(b.size() == n_ && out.size() == n_, "RingConvolver: length mismatch");
    std::copy(b.begin(), b.end(), real_);
    fftw_execute(fwd_);
    const double inv = 1.0 / static_cast<double>(n_);
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      const std::complex<double> v = std::conj(w_hat[k]) * std::complex<double>(spec_[k][0], spec_[k][1]) * inv;
      spec_[k][0] = v.real();
      spec_[k][1] = v.imag();
    }
    fftw_execute(bwd_);
    std::copy(real_, real_ + n_, out.begin());
  }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace lrex

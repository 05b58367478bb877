#pragma once

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "smq/error.hpp"

namespace smq {

namespace detail {

// The FFTW planner is not thread-safe; executing distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Unnormalized forward complex DFT of a real signal of fixed length.
class ForwardDft {
 public:
  explicit ForwardDft(std::size_t n) : n_(n) {
    in_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!in_ || !out_) throw std::bad_alloc();
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ForwardDft(const ForwardDft&) = delete;
  ForwardDft& operator=(const ForwardDft&) = delete;
  ~ForwardDft() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }

  std::size_t size() const noexcept { return n_; }

  /// Fills the internal output buffer; returns it as |X_k| is read by callers.
  void execute(std::span<const double> x) {
    for (std::size_t i = 0; i < n_; ++i) {
      in_[i][0] = x[i];
      in_[i][1] = 0.0;
    }
    fftw_execute(plan_);
  }

  double magnitude(std::size_t k) const noexcept { return std::hypot(out_[k][0], out_[k][1]); }
  std::complex<double> coefficient(std::size_t k) const noexcept { return {out_[k][0], out_[k][1]}; }

 private:
  std::size_t n_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

inline ForwardDft& thread_dft(std::size_t n) {
  thread_local std::vector<std::unique_ptr<ForwardDft>> cache;
  for (auto& d : cache)
    if (d->size() == n) return *d;
  cache.push_back(std::make_unique<ForwardDft>(n));
  return *cache.back();
}

inline void require_pow2(std::size_t n) {
  if (n < 2 || !std::has_single_bit(n))
    throw Error(Errc::contract, "spectral window length must be a power of two >= 2, got " + std::to_string(n));
}

}  // namespace detail

/// |X_k| for k = 0..n-1 of the unnormalized forward DFT.
inline std::vector<double> spectrum_magnitudes(std::span<const double> window) {
  detail::require_pow2(window.size());
  auto& dft = detail::thread_dft(window.size());
  dft.execute(window);
  std::vector<double> mags(window.size());
  for (std::size_t k = 0; k < mags.size(); ++k) mags[k] = dft.magnitude(k);
  return mags;
}

/// Frequency-weighted mean DFT magnitude over the half spectrum:
/// (1/m) * sum_{k=0}^{m-1} |X_k| / (k+1) with m = n/2 + 1.
inline double f_operator(std::span<const double> window) {
  detail::require_pow2(window.size());
  auto& dft = detail::thread_dft(window.size());
  dft.execute(window);
  const std::size_t half = window.size() / 2 + 1;
  double sum = 0.0;
  for (std::size_t k = 0; k < half; ++k) sum += dft.magnitude(k) / static_cast<double>(k + 1);
  return sum / static_cast<double>(half);
}

}  // namespace smq

#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "scent/errors.hpp"

namespace scent {

inline bool is_pow2(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey transform. Forward uses the
// (engineering) e^{-2pi i k n / N} kernel; the inverse divides by N.
inline void fft_inplace(std::span<std::complex<double>> a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_pow2(static_cast<std::int64_t>(n)))
    throw ContractError("fft: length must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv_n;
  }
}

// 2D complex FFT over an H x W row-major grid.
class Fft2 {
 public:
  Fft2(std::int64_t h, std::int64_t w) : h_(h), w_(w), col_(static_cast<std::size_t>(h)) {
    if (!is_pow2(h) || !is_pow2(w))
      throw ContractError("Fft2: grid dimensions must be powers of two");
  }

  void transform(std::span<std::complex<double>> grid, bool inverse) const {
    if (static_cast<std::int64_t>(grid.size()) != h_ * w_)
      throw ContractError("Fft2: grid size mismatch");
    for (std::int64_t r = 0; r < h_; ++r)
      fft_inplace(grid.subspan(static_cast<std::size_t>(r * w_),
                               static_cast<std::size_t>(w_)),
                  inverse);
    auto& col = col_;
    for (std::int64_t c = 0; c < w_; ++c) {
      for (std::int64_t r = 0; r < h_; ++r)
        col[static_cast<std::size_t>(r)] = grid[static_cast<std::size_t>(r * w_ + c)];
      fft_inplace(col, inverse);
      for (std::int64_t r = 0; r < h_; ++r)
        grid[static_cast<std::size_t>(r * w_ + c)] = col[static_cast<std::size_t>(r)];
    }
  }

  void forward(std::span<const double> real, std::span<std::complex<double>> out) const {
    if (real.size() != out.size()) throw ContractError("Fft2: buffer size mismatch");
    for (std::size_t i = 0; i < real.size(); ++i) out[i] = {real[i], 0.0};
    transform(out, false);
  }

  void inverse_real(std::span<std::complex<double>> freq, std::span<double> out) const {
    if (freq.size() != out.size()) throw ContractError("Fft2: buffer size mismatch");
    transform(freq, true);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = freq[i].real();
  }

  std::int64_t height() const { return h_; }
  std::int64_t width() const { return w_; }

 private:
  std::int64_t h_, w_;
  mutable std::vector<std::complex<double>> col_;
};

// Signed integer wavenumber for index i on an axis of length n: 0,1,..,n/2,
// then negative frequencies -(n/2-1)..-1.
inline std::int64_t fft_freq(std::int64_t i, std::int64_t n) {
  return i <= n / 2 ? i : i - n;
}

}  // namespace scent

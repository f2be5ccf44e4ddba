#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "scent/errors.hpp"
#include "scent/tensor.hpp"

namespace scent {

// Sinusoidal positional features. Each scalar axis value x expands to
// [sin(pi f_1 x) .. sin(pi f_B x), cos(pi f_1 x) .. cos(pi f_B x), x] with the
// frequencies f_k spaced linearly from 1 to max_resolution / 2.
struct FourierConfig {
  int bands = 12;
  double max_resolution = 20.0;

  void validate() const {
    if (bands < 1) throw ConfigError("FourierConfig: bands must be >= 1");
    if (!(max_resolution > 0))
      throw ConfigError("FourierConfig: max_resolution must be positive");
  }

  int width() const { return 2 * bands + 1; }

  std::vector<double> frequencies() const {
    validate();
    std::vector<double> f(static_cast<std::size_t>(bands));
    const double top = max_resolution / 2.0;
    if (bands == 1) {
      f[0] = 1.0;
    } else {
      const double step = (top - 1.0) / static_cast<double>(bands - 1);
      for (int k = 0; k < bands; ++k) f[static_cast<std::size_t>(k)] = 1.0 + step * k;
    }
    return f;
  }
};

namespace detail {

inline void fourier_expand(double x, std::span<const double> freqs, double* out) {
  if (!std::isfinite(x)) throw ContractError("fourier_features: non-finite input");
  const std::size_t b = freqs.size();
  for (std::size_t k = 0; k < b; ++k) out[k] = std::sin(std::numbers::pi * freqs[k] * x);
  for (std::size_t k = 0; k < b; ++k)
    out[b + k] = std::cos(std::numbers::pi * freqs[k] * x);
  out[2 * b] = x;
}

}  // namespace detail

// Expands an n x k coordinate block into an n x (k * width) feature matrix.
// Axes are expanded independently and concatenated in axis order.
template <typename T>
Tensor<T> fourier_features(std::span<const double> coords, std::int64_t n, int axes,
                           const FourierConfig& cfg) {
  cfg.validate();
  if (n < 0 || axes < 1) throw ContractError("fourier_features: bad extent");
  if (static_cast<std::int64_t>(coords.size()) != n * axes)
    throw ContractError("fourier_features: coordinate buffer size mismatch");
  const auto freqs = cfg.frequencies();
  const int w = cfg.width();
  std::vector<T> out(static_cast<std::size_t>(n * axes * w));
  std::vector<double> row(static_cast<std::size_t>(w));
  for (std::int64_t i = 0; i < n; ++i) {
    for (int a = 0; a < axes; ++a) {
      detail::fourier_expand(coords[static_cast<std::size_t>(i * axes + a)], freqs,
                             row.data());
      T* dst = out.data() + i * axes * w + a * w;
      for (int j = 0; j < w; ++j) dst[static_cast<std::size_t>(j)] = static_cast<T>(row[static_cast<std::size_t>(j)]);
    }
  }
  return Tensor<T>::from({n, static_cast<std::int64_t>(axes) * w}, std::move(out));
}

// Single-scalar convenience (time embeddings): returns a width-long vector.
inline std::vector<double> fourier_scalar(double x, const FourierConfig& cfg) {
  cfg.validate();
  const auto freqs = cfg.frequencies();
  std::vector<double> out(static_cast<std::size_t>(cfg.width()));
  detail::fourier_expand(x, freqs, out.data());
  return out;
}

}  // namespace scent

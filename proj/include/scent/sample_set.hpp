#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "scent/errors.hpp"

namespace scent {

// Scattered observation coordinates in the normalized box [-1, 1]^dims.
struct CoordSet {
  std::int64_t count = 0;
  int dims = 2;
  std::vector<double> data;  // count * dims, row-major

  void validate() const {
    if (count < 0 || dims < 1) throw ContractError("CoordSet: bad extents");
    if (static_cast<std::int64_t>(data.size()) != count * dims)
      throw ContractError("CoordSet: buffer size mismatch");
    for (double v : data) {
      if (!std::isfinite(v) || v < -1.0 || v > 1.0)
        throw ContractError("CoordSet: coordinates must lie in [-1,1]");
    }
  }
};

// A set of scattered observations of a field at one time instant.
struct SampleSet {
  CoordSet coords;
  std::vector<double> values;  // count * channels
  int channels = 1;
  double time = 0.0;

  void validate() const {
    coords.validate();
    if (coords.count < 1) throw ContractError("SampleSet: need at least one point");
    if (channels < 1) throw ContractError("SampleSet: channels must be >= 1");
    if (static_cast<std::int64_t>(values.size()) != coords.count * channels)
      throw ContractError("SampleSet: value buffer size mismatch");
    if (!std::isfinite(time)) throw ContractError("SampleSet: non-finite time");
    for (double v : values)
      if (!std::isfinite(v)) throw ContractError("SampleSet: non-finite value");
  }
};

// Normalized cell-center coordinate of index j on an axis of length n.
inline double cell_center(std::int64_t j, std::int64_t n) {
  return -1.0 + static_cast<double>(2 * j + 1) / static_cast<double>(n);
}

// Full-grid coordinates in row-major order; axis order is (x1, x2) =
// (column, row) so coords pair naturally with (horizontal, vertical).
inline CoordSet grid_coords(std::int64_t h, std::int64_t w) {
  if (h < 1 || w < 1) throw ContractError("grid_coords: bad extent");
  CoordSet cs;
  cs.count = h * w;
  cs.dims = 2;
  cs.data.resize(static_cast<std::size_t>(cs.count * 2));
  for (std::int64_t i = 0; i < h; ++i)
    for (std::int64_t j = 0; j < w; ++j) {
      const auto idx = static_cast<std::size_t>((i * w + j) * 2);
      cs.data[idx] = cell_center(j, w);
      cs.data[idx + 1] = cell_center(i, h);
    }
  return cs;
}

// Converts the masked cells of one grid frame into a scattered sample set.
inline SampleSet to_sample_set(std::span<const float> frame,
                               std::span<const std::uint8_t> mask, std::int64_t h,
                               std::int64_t w, double time) {
  if (static_cast<std::int64_t>(frame.size()) != h * w || frame.size() != mask.size())
    throw ContractError("to_sample_set: extent mismatch");
  std::int64_t n = 0;
  for (auto m : mask) n += m ? 1 : 0;
  if (n == 0) throw ContractError("to_sample_set: empty mask");
  SampleSet out;
  out.coords.count = n;
  out.coords.dims = 2;
  out.coords.data.reserve(static_cast<std::size_t>(2 * n));
  out.values.reserve(static_cast<std::size_t>(n));
  out.channels = 1;
  out.time = time;
  for (std::int64_t i = 0; i < h; ++i)
    for (std::int64_t j = 0; j < w; ++j) {
      const auto idx = static_cast<std::size_t>(i * w + j);
      if (!mask[idx]) continue;
      out.coords.data.push_back(cell_center(j, w));
      out.coords.data.push_back(cell_center(i, h));
      out.values.push_back(static_cast<double>(frame[idx]));
    }
  return out;
}

}  // namespace scent

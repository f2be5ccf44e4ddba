#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "scent/errors.hpp"

namespace scent {

struct PgmRange {
  double min = 0;
  double max = 0;
};

// 8-bit binary PGM (P5) with per-frame min/max normalization; a flat frame
// renders as all zeros. Returns the range used so callers can record it in a
// sidecar file.
inline PgmRange write_pgm(const std::string& path, std::span<const float> frame,
                          std::int64_t h, std::int64_t w) {
  if (h < 1 || w < 1 || static_cast<std::int64_t>(frame.size()) != h * w)
    throw ContractError("write_pgm: extent mismatch");
  PgmRange r{frame[0], frame[0]};
  for (float v : frame) {
    if (!std::isfinite(v)) throw ContractError("write_pgm: non-finite value");
    r.min = std::min(r.min, static_cast<double>(v));
    r.max = std::max(r.max, static_cast<double>(v));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("write_pgm: cannot open " + path);
  os << "P5\n" << w << ' ' << h << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w));
  const double span = r.max - r.min;
  for (std::int64_t i = 0; i < h; ++i) {
    for (std::int64_t j = 0; j < w; ++j) {
      const double v = frame[static_cast<std::size_t>(i * w + j)];
      row[static_cast<std::size_t>(j)] =
          span > 0 ? static_cast<std::uint8_t>(
                         std::lround(255.0 * (v - r.min) / span))
                   : std::uint8_t{0};
    }
    os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  os.flush();
  if (!os) throw IoError("write_pgm: write failed for " + path);
  return r;
}

}  // namespace scent

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "scent/archive.hpp"
#include "scent/errors.hpp"
#include "scent/rng.hpp"

namespace scent {

enum class ScenarioKind { S1, S2, S3, S4, S5 };

inline std::string scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::S1: return "s1";
    case ScenarioKind::S2: return "s2";
    case ScenarioKind::S3: return "s3";
    case ScenarioKind::S4: return "s4";
    case ScenarioKind::S5: return "s5";
  }
  throw ContractError("scenario_name: bad kind");
}

inline ScenarioKind scenario_from_name(const std::string& s) {
  if (s == "s1") return ScenarioKind::S1;
  if (s == "s2") return ScenarioKind::S2;
  if (s == "s3") return ScenarioKind::S3;
  if (s == "s4") return ScenarioKind::S4;
  if (s == "s5") return ScenarioKind::S5;
  throw ConfigError("unknown scenario '" + s + "'");
}

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::S1;
  // S2: multiplicative observation noise.
  double noise_mean = 1.0;
  double noise_sigma = 0.2;
  // S4: fraction of valid grid points.
  double sparsity = 0.5;
  // S5: moving sensor regions.
  std::int64_t regions = 20;
  std::int64_t region_size = 10;
  std::int64_t max_shift = 10;

  void validate() const {
    if (noise_sigma < 0) throw ConfigError("ScenarioConfig: negative noise sigma");
    if (!(sparsity > 0) || sparsity > 1)
      throw ConfigError("ScenarioConfig: sparsity must lie in (0,1]");
    if (regions < 1 || region_size < 1 || max_shift < 0)
      throw ConfigError("ScenarioConfig: bad moving-region parameters");
  }
};

namespace detail {

struct Square {
  std::int64_t row, col, size;  // top-left corner
  bool overlaps(const Square& o) const {
    return row < o.row + o.size && o.row < row + size && col < o.col + o.size &&
           o.col < col + size;
  }
};

// Reflects a top-left coordinate into [0, limit] by mirroring at the edges.
inline std::int64_t reflect(std::int64_t v, std::int64_t limit) {
  while (v < 0 || v > limit) {
    if (v < 0) v = -v;
    if (v > limit) v = 2 * limit - v;
  }
  return v;
}

constexpr int kPlacementRestarts = 1000;

// Places pairwise non-overlapping squares, each uniform over the top-left
// positions that avoid the ones already placed — the distribution per-square
// rejection sampling would produce, but computed by enumerating the feasible
// set directly, so a square with any legal position left never fails. A
// sequential draw can still paint itself into a corner at high coverage
// (20 squares of 10x10 occupy half of a 64x64 grid), in which case the whole
// placement restarts.
inline std::vector<Square> place_squares(std::int64_t h, std::int64_t w,
                                         const std::vector<std::int64_t>& sizes,
                                         RngStream& rng) {
  for (const auto size : sizes)
    if (size > h || size > w)
      throw ConfigError("scenario: region does not fit the grid");

  for (int attempt = 0; attempt < kPlacementRestarts; ++attempt) {
    std::vector<Square> placed;
    placed.reserve(sizes.size());
    bool stuck = false;
    for (const auto size : sizes) {
      const std::int64_t rows = h - size + 1, cols = w - size + 1;
      std::vector<std::uint8_t> open(static_cast<std::size_t>(rows * cols), 1);
      std::int64_t n_open = rows * cols;
      for (const auto& s : placed) {
        // A top-left at (r, c) collides with `s` iff it lies in the box
        // [s.row - size + 1, s.row + s.size - 1] x [same for columns].
        const std::int64_t r0 = std::max<std::int64_t>(0, s.row - size + 1);
        const std::int64_t r1 = std::min(rows - 1, s.row + s.size - 1);
        const std::int64_t c0 = std::max<std::int64_t>(0, s.col - size + 1);
        const std::int64_t c1 = std::min(cols - 1, s.col + s.size - 1);
        for (std::int64_t r = r0; r <= r1; ++r)
          for (std::int64_t c = c0; c <= c1; ++c) {
            auto& cell = open[static_cast<std::size_t>(r * cols + c)];
            n_open -= cell;
            cell = 0;
          }
      }
      if (n_open == 0) {
        stuck = true;
        break;
      }
      auto pick = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n_open)));
      std::int64_t flat = 0;
      for (;; ++flat) {
        if (!open[static_cast<std::size_t>(flat)]) continue;
        if (pick == 0) break;
        --pick;
      }
      placed.push_back(Square{flat / cols, flat % cols, size});
    }
    if (!stuck) return placed;
  }
  throw PlacementError("scenario: could not place non-overlapping regions after " +
                       std::to_string(kPlacementRestarts) + " restarts");
}

inline void fill_square(std::span<std::uint8_t> mask, std::int64_t w, const Square& s,
                        std::uint8_t value) {
  if (s.row < 0 || s.col < 0 || s.col + s.size > w ||
      (s.row + s.size) * w > static_cast<std::int64_t>(mask.size()))
    throw ContractError("scenario: region escapes the grid");
  for (std::int64_t r = s.row; r < s.row + s.size; ++r)
    for (std::int64_t c = s.col; c < s.col + s.size; ++c)
      mask[static_cast<std::size_t>(r * w + c)] = value;
}

}  // namespace detail

// Derives a degraded-observation trajectory from S1 ground truth. Values are
// only altered by S2; S3-S5 act purely on the validity masks.
inline Trajectory apply_scenario(const Trajectory& src, const ScenarioConfig& sc,
                                 std::uint64_t seed) {
  sc.validate();
  src.validate();
  if (src.scenario != "s1")
    throw ContractError("apply_scenario: input must be an S1 trajectory");
  Trajectory out = src;
  out.scenario = scenario_name(sc.kind);
  const std::int64_t h = src.height, w = src.width, T = src.frames_count;

  switch (sc.kind) {
    case ScenarioKind::S1:
      break;

    case ScenarioKind::S2: {
      RngStream rng(seed, "s2-noise", src.seed);
      for (auto& v : out.frames)
        v = static_cast<float>(v * (sc.noise_mean + sc.noise_sigma * rng.gaussian()));
      break;
    }

    case ScenarioKind::S3: {
      // Three static square holes of sizes H/4, H/6, H/8.
      RngStream rng(seed, "s3-holes", src.seed);
      const std::vector<std::int64_t> sizes{h / 4, h / 6, h / 8};
      const auto holes = detail::place_squares(h, w, sizes, rng);
      for (std::int64_t t = 0; t < T; ++t)
        for (const auto& hole : holes) detail::fill_square(out.mask_mut(t), w, hole, 0);
      break;
    }

    case ScenarioKind::S4: {
      // Static uniform subsampling: exactly floor(sparsity * H * W) valid.
      RngStream rng(seed, "s4-sparse", src.seed);
      const std::int64_t cells = h * w;
      const auto keep = static_cast<std::int64_t>(sc.sparsity * static_cast<double>(cells));
      const auto perm = rng.permutation(cells);
      std::vector<std::uint8_t> mask(static_cast<std::size_t>(cells), 0);
      for (std::int64_t i = 0; i < keep; ++i)
        mask[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = 1;
      for (std::int64_t t = 0; t < T; ++t)
        std::copy(mask.begin(), mask.end(), out.mask_mut(t).begin());
      break;
    }

    case ScenarioKind::S5: {
      // Moving sensor regions: frame 0 is placed uniformly without overlap,
      // then each frame transition translates the whole set by one shared
      // integer shift (h, v), mirroring regions that cross the grid boundary.
      // The shift is uniform over the non-identity shifts whose mirrored set
      // stays pairwise disjoint (enumerated directly; rejection would sample
      // the same distribution but can spin when few shifts qualify), so every
      // frame keeps exactly regions*size^2 valid cells and the masks
      // genuinely move. A rigid translation preserves disjointness wherever
      // no region folds, so feasibility only ever hinges on boundary
      // collisions.
      RngStream rng(seed, "s5-regions", src.seed);
      const std::vector<std::int64_t> sizes(static_cast<std::size_t>(sc.regions),
                                            sc.region_size);
      auto regions = detail::place_squares(h, w, sizes, rng);
      const std::int64_t rlim = h - sc.region_size;
      const std::int64_t clim = w - sc.region_size;
      const auto translate = [&](std::int64_t dv, std::int64_t dh) {
        std::vector<detail::Square> moved;
        moved.reserve(regions.size());
        for (const auto& reg : regions) {
          detail::Square cand{detail::reflect(reg.row + dv, rlim),
                              detail::reflect(reg.col + dh, clim), sc.region_size};
          const bool ok =
              std::none_of(moved.begin(), moved.end(),
                           [&](const detail::Square& s) { return cand.overlaps(s); });
          if (!ok) return std::vector<detail::Square>{};
          moved.push_back(cand);
        }
        return moved;
      };
      for (std::int64_t t = 0; t < T; ++t) {
        if (t > 0) {
          std::vector<std::pair<std::int64_t, std::int64_t>> options;
          for (std::int64_t dv = -sc.max_shift; dv <= sc.max_shift; ++dv)
            for (std::int64_t dh = -sc.max_shift; dh <= sc.max_shift; ++dh) {
              if (dv == 0 && dh == 0) continue;
              if (!translate(dv, dh).empty()) options.emplace_back(dv, dh);
            }
          if (options.empty()) {
            // A crowded boundary can fold every candidate shift onto a
            // neighbor. Cardinality and movement are the contract, the rigid
            // walk is not: place the set afresh for this frame instead.
            regions = detail::place_squares(h, w, sizes, rng);
          } else {
            const auto [dv, dh] =
                options[static_cast<std::size_t>(rng.below(options.size()))];
            regions = translate(dv, dh);
          }
        }
        auto mask = out.mask_mut(t);
        std::fill(mask.begin(), mask.end(), 0);
        for (const auto& reg : regions) detail::fill_square(mask, w, reg, 1);
      }
      break;
    }
  }
  return out;
}

}  // namespace scent

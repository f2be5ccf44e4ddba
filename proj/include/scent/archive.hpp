#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "scent/errors.hpp"
#include "scent/rng.hpp"
#include "scent/solver.hpp"

namespace scent {

// One solver rollout: T frames of vorticity plus per-cell validity masks.
struct Trajectory {
  std::int64_t frames_count = 0;  // T
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<float> frames;       // T*H*W, row-major
  std::vector<std::uint8_t> masks;  // T*H*W, 0/1
  std::string scenario = "s1";
  std::uint64_t seed = 0;

  std::int64_t frame_size() const { return height * width; }

  std::span<const float> frame(std::int64_t t) const {
    check_index(t);
    return {frames.data() + t * frame_size(), static_cast<std::size_t>(frame_size())};
  }
  std::span<const std::uint8_t> mask(std::int64_t t) const {
    check_index(t);
    return {masks.data() + t * frame_size(), static_cast<std::size_t>(frame_size())};
  }
  std::span<float> frame_mut(std::int64_t t) {
    check_index(t);
    return {frames.data() + t * frame_size(), static_cast<std::size_t>(frame_size())};
  }
  std::span<std::uint8_t> mask_mut(std::int64_t t) {
    check_index(t);
    return {masks.data() + t * frame_size(), static_cast<std::size_t>(frame_size())};
  }

  // Even raw frames are training frames; odd frames are held out for
  // continuity evaluation. One coarse (training) step equals 1.0 time units,
  // so raw frame r sits at time r / 2.
  static bool is_train_frame(std::int64_t r) { return r % 2 == 0; }
  static double frame_time(std::int64_t r) { return static_cast<double>(r) / 2.0; }

  std::vector<std::int64_t> train_frames() const {
    std::vector<std::int64_t> out;
    for (std::int64_t r = 0; r < frames_count; r += 2) out.push_back(r);
    return out;
  }

  void validate() const {
    if (frames_count < 2) throw ContractError("Trajectory: need at least 2 frames");
    if (static_cast<std::int64_t>(frames.size()) != frames_count * frame_size() ||
        frames.size() != masks.size())
      throw ContractError("Trajectory: buffer sizes inconsistent");
  }

 private:
  void check_index(std::int64_t t) const {
    if (t < 0 || t >= frames_count) throw ContractError("Trajectory: frame index out of range");
  }
};

// GRF init, burn-in, then T stored frames spaced steps_per_frame * dt apart.
inline Trajectory gen_trajectory(const SolverConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  VorticitySolver solver(cfg);
  std::vector<double> omega = grf_init(cfg, seed);
  const auto burn_steps =
      static_cast<std::int64_t>(std::llround(cfg.burn_in_time / cfg.dt));
  for (std::int64_t s = 0; s < burn_steps; ++s) solver.step(omega);

  Trajectory traj;
  traj.frames_count = cfg.frames;
  traj.height = cfg.height;
  traj.width = cfg.width;
  traj.seed = seed;
  traj.frames.resize(static_cast<std::size_t>(cfg.frames * cfg.height * cfg.width));
  traj.masks.assign(traj.frames.size(), 1);
  for (std::int64_t t = 0; t < cfg.frames; ++t) {
    if (t > 0)
      for (std::int64_t s = 0; s < cfg.steps_per_frame; ++s) solver.step(omega);
    auto dst = traj.frame_mut(t);
    for (std::int64_t i = 0; i < traj.frame_size(); ++i)
      dst[static_cast<std::size_t>(i)] = static_cast<float>(omega[static_cast<std::size_t>(i)]);
  }
  return traj;
}

// ---- STRJ archive ----
// Layout: magic "STRJ", u32 version (LE), u64 header length (LE), JSON header
// {count, T, H, W, dtype, scenario, seeds, domain}, then per trajectory the
// frames as little-endian binary32 row-major followed by masks as packed bits
// (LSB-first within each byte), padded to a byte boundary.

namespace detail {

inline void write_bytes(std::ofstream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) throw IoError("archive: write failed");
}

inline void read_bytes(std::ifstream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n))
    throw IoError("archive: truncated file");
}

static_assert(std::endian::native == std::endian::little,
              "archive I/O assumes a little-endian host");

}  // namespace detail

inline void write_archive(const std::string& path, const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw ContractError("write_archive: no trajectories");
  const auto& t0 = trajs.front();
  for (const auto& t : trajs) {
    t.validate();
    if (t.frames_count != t0.frames_count || t.height != t0.height ||
        t.width != t0.width || t.scenario != t0.scenario)
      throw ContractError("write_archive: trajectories are not homogeneous");
  }
  nlohmann::json header;
  header["count"] = trajs.size();
  header["T"] = t0.frames_count;
  header["H"] = t0.height;
  header["W"] = t0.width;
  header["dtype"] = "float32";
  header["scenario"] = t0.scenario;
  std::vector<std::uint64_t> seeds;
  for (const auto& t : trajs) seeds.push_back(t.seed);
  header["seeds"] = seeds;
  header["domain"] = {-3.141592653589793, 3.141592653589793};
  const std::string hj = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_archive: cannot open " + path);
  detail::write_bytes(os, "STRJ", 4);
  const std::uint32_t version = 1;
  detail::write_bytes(os, &version, 4);
  const std::uint64_t hlen = hj.size();
  detail::write_bytes(os, &hlen, 8);
  detail::write_bytes(os, hj.data(), hj.size());

  const std::size_t mask_bytes =
      (static_cast<std::size_t>(t0.frames_count * t0.frame_size()) + 7) / 8;
  std::vector<std::uint8_t> packed(mask_bytes);
  for (const auto& t : trajs) {
    detail::write_bytes(os, t.frames.data(), t.frames.size() * sizeof(float));
    std::fill(packed.begin(), packed.end(), 0);
    for (std::size_t i = 0; i < t.masks.size(); ++i)
      if (t.masks[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    detail::write_bytes(os, packed.data(), packed.size());
  }
  os.flush();
  if (!os) throw IoError("write_archive: flush failed");
}

inline std::vector<Trajectory> read_archive(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_archive: cannot open " + path);
  char magic[4];
  detail::read_bytes(is, magic, 4);
  if (std::memcmp(magic, "STRJ", 4) != 0)
    throw IoError("read_archive: bad magic in " + path);
  std::uint32_t version = 0;
  detail::read_bytes(is, &version, 4);
  if (version != 1) throw IoError("read_archive: unsupported version");
  std::uint64_t hlen = 0;
  detail::read_bytes(is, &hlen, 8);
  std::string hj(hlen, '\0');
  detail::read_bytes(is, hj.data(), hlen);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hj);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("read_archive: bad header: ") + e.what());
  }
  const auto count = header.at("count").get<std::size_t>();
  const auto T = header.at("T").get<std::int64_t>();
  const auto H = header.at("H").get<std::int64_t>();
  const auto W = header.at("W").get<std::int64_t>();
  if (header.at("dtype").get<std::string>() != "float32")
    throw IoError("read_archive: unsupported dtype");
  const auto scenario = header.at("scenario").get<std::string>();
  const auto seeds = header.at("seeds").get<std::vector<std::uint64_t>>();
  if (seeds.size() != count) throw IoError("read_archive: seed list length mismatch");

  std::vector<Trajectory> out(count);
  const std::size_t cells = static_cast<std::size_t>(T * H * W);
  const std::size_t mask_bytes = (cells + 7) / 8;
  std::vector<std::uint8_t> packed(mask_bytes);
  for (std::size_t k = 0; k < count; ++k) {
    auto& t = out[k];
    t.frames_count = T;
    t.height = H;
    t.width = W;
    t.scenario = scenario;
    t.seed = seeds[k];
    t.frames.resize(cells);
    t.masks.resize(cells);
    detail::read_bytes(is, t.frames.data(), cells * sizeof(float));
    detail::read_bytes(is, packed.data(), packed.size());
    for (std::size_t i = 0; i < cells; ++i)
      t.masks[i] = (packed[i / 8] >> (i % 8)) & 1u;
    t.validate();
  }
  return out;
}

}  // namespace scent

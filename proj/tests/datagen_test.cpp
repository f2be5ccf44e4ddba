#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "scent/archive.hpp"
#include "scent/sample_set.hpp"
#include "scent/scenarios.hpp"
#include "scent/solver.hpp"

namespace {

using scent::ScenarioConfig;
using scent::ScenarioKind;
using scent::Trajectory;

scent::SolverConfig fast_cfg() {
  scent::SolverConfig cfg;
  cfg.height = 32;
  cfg.width = 32;
  cfg.dt = 0.01;
  cfg.steps_per_frame = 2;
  cfg.frames = 6;
  cfg.burn_in_time = 0.05;
  return cfg;
}

std::int64_t mask_count(const Trajectory& t, std::int64_t frame) {
  std::int64_t n = 0;
  for (auto m : t.mask(frame)) n += m ? 1 : 0;
  return n;
}

// ---------- gen_trajectory ----------

TEST(GenTrajectory, ShapesMasksAndDeterminism) {
  const auto cfg = fast_cfg();
  auto a = scent::gen_trajectory(cfg, 11);
  EXPECT_EQ(a.frames_count, cfg.frames);
  EXPECT_EQ(a.height, cfg.height);
  EXPECT_EQ(a.width, cfg.width);
  EXPECT_EQ(a.scenario, "s1");
  EXPECT_EQ(a.seed, 11u);
  for (std::int64_t t = 0; t < cfg.frames; ++t)
    EXPECT_EQ(mask_count(a, t), cfg.height * cfg.width);
  for (float v : a.frames) ASSERT_TRUE(std::isfinite(v));
  auto b = scent::gen_trajectory(cfg, 11);
  EXPECT_EQ(a.frames, b.frames);
  auto c = scent::gen_trajectory(cfg, 12);
  EXPECT_NE(a.frames, c.frames);
  // Consecutive frames must differ (the flow is not stationary).
  EXPECT_NE(std::vector<float>(a.frame(0).begin(), a.frame(0).end()),
            std::vector<float>(a.frame(1).begin(), a.frame(1).end()));
}

TEST(GenTrajectory, TrainEvalSplit) {
  EXPECT_TRUE(Trajectory::is_train_frame(0));
  EXPECT_FALSE(Trajectory::is_train_frame(1));
  EXPECT_DOUBLE_EQ(Trajectory::frame_time(4), 2.0);
  auto traj = scent::gen_trajectory(fast_cfg(), 1);
  EXPECT_EQ(traj.train_frames(), (std::vector<std::int64_t>{0, 2, 4}));
}

// ---------- scenarios ----------

Trajectory base_traj() {
  static Trajectory cached = scent::gen_trajectory(fast_cfg(), 5);
  return cached;
}

TEST(Scenario, S2ZeroSigmaIsIdentity) {
  auto src = base_traj();
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S2;
  sc.noise_sigma = 0.0;
  auto out = scent::apply_scenario(src, sc, 0);
  EXPECT_EQ(out.frames, src.frames);
  EXPECT_EQ(out.masks, src.masks);
  EXPECT_EQ(out.scenario, "s2");
}

TEST(Scenario, S2PerturbsValuesOnly) {
  auto src = base_traj();
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S2;
  auto out = scent::apply_scenario(src, sc, 3);
  EXPECT_NE(out.frames, src.frames);
  EXPECT_EQ(out.masks, src.masks);
  auto again = scent::apply_scenario(src, sc, 3);
  EXPECT_EQ(out.frames, again.frames);
  auto other = scent::apply_scenario(src, sc, 4);
  EXPECT_NE(out.frames, other.frames);
  // Noise is multiplicative with mean 1: values keep their sign distribution
  // and the ratio matches a Gaussian sample. Spot-check the scale.
  double ratio_sum = 0;
  std::int64_t counted = 0;
  for (std::size_t i = 0; i < src.frames.size(); ++i) {
    if (std::abs(src.frames[i]) < 1e-3) continue;
    ratio_sum += out.frames[i] / src.frames[i];
    ++counted;
  }
  EXPECT_NEAR(ratio_sum / static_cast<double>(counted), 1.0, 0.02);
}

TEST(Scenario, S3StaticHoles) {
  auto src = base_traj();
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S3;
  auto out = scent::apply_scenario(src, sc, 9);
  EXPECT_EQ(out.frames, src.frames);  // values untouched
  const std::int64_t h = src.height;
  const std::int64_t holes = (h / 4) * (h / 4) + (h / 6) * (h / 6) + (h / 8) * (h / 8);
  for (std::int64_t t = 0; t < out.frames_count; ++t)
    EXPECT_EQ(mask_count(out, t), h * src.width - holes);
  // Static across time.
  for (std::int64_t t = 1; t < out.frames_count; ++t)
    EXPECT_TRUE(std::equal(out.mask(0).begin(), out.mask(0).end(), out.mask(t).begin()));
}

TEST(Scenario, S4ExactSparsityStatic) {
  auto src = base_traj();
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S4;
  auto out = scent::apply_scenario(src, sc, 1);
  const std::int64_t want = (src.height * src.width) / 2;
  for (std::int64_t t = 0; t < out.frames_count; ++t)
    EXPECT_EQ(mask_count(out, t), want);
  for (std::int64_t t = 1; t < out.frames_count; ++t)
    EXPECT_TRUE(std::equal(out.mask(0).begin(), out.mask(0).end(), out.mask(t).begin()));
  // Different fraction.
  sc.sparsity = 0.25;
  auto quarter = scent::apply_scenario(src, sc, 1);
  EXPECT_EQ(mask_count(quarter, 0), (src.height * src.width) / 4);
}

TEST(Scenario, S5MovingRegionsExactCount) {
  auto src = base_traj();
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S5;
  sc.regions = 20;
  sc.region_size = 5;  // desk scale for a 32x32 grid
  sc.max_shift = 5;
  auto out = scent::apply_scenario(src, sc, 2);
  EXPECT_EQ(out.frames, src.frames);
  for (std::int64_t t = 0; t < out.frames_count; ++t)
    EXPECT_EQ(mask_count(out, t), sc.regions * sc.region_size * sc.region_size);
  // Masks must move between every pair of consecutive frames.
  for (std::int64_t t = 1; t < out.frames_count; ++t)
    EXPECT_FALSE(std::equal(out.mask(t - 1).begin(), out.mask(t - 1).end(),
                            out.mask(t).begin()))
        << "mask did not move at frame " << t;
  auto again = scent::apply_scenario(src, sc, 2);
  EXPECT_EQ(out.masks, again.masks);
}

TEST(Scenario, S5FullScaleCountAt64) {
  auto cfg = fast_cfg();
  cfg.height = 64;
  cfg.width = 64;
  cfg.frames = 3;
  auto src = scent::gen_trajectory(cfg, 2);
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S5;
  auto out = scent::apply_scenario(src, sc, 0);
  for (std::int64_t t = 0; t < out.frames_count; ++t)
    EXPECT_EQ(mask_count(out, t), 2000);
}

TEST(Scenario, S4FullScaleCountAt64) {
  auto cfg = fast_cfg();
  cfg.height = 64;
  cfg.width = 64;
  cfg.frames = 2;
  auto src = scent::gen_trajectory(cfg, 2);
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S4;
  auto out = scent::apply_scenario(src, sc, 0);
  EXPECT_EQ(mask_count(out, 0), 2048);
}

TEST(Scenario, ImpossiblePlacementThrows) {
  auto src = base_traj();  // 32x32
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S5;
  sc.regions = 20;
  sc.region_size = 10;  // 2000 cells never fit disjointly into 1024
  EXPECT_THROW(scent::apply_scenario(src, sc, 0), scent::PlacementError);
}

TEST(Scenario, RequiresGroundTruthInput) {
  auto src = base_traj();
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S2;
  auto s2 = scent::apply_scenario(src, sc, 0);
  EXPECT_THROW(scent::apply_scenario(s2, sc, 0), scent::ContractError);
}

TEST(Scenario, ReflectionStaysInBounds) {
  // reflect() must map any shifted coordinate back into [0, limit].
  for (std::int64_t v = -15; v <= 40; ++v) {
    const auto r = scent::detail::reflect(v, 27);
    EXPECT_GE(r, 0);
    EXPECT_LE(r, 27);
  }
  EXPECT_EQ(scent::detail::reflect(-3, 27), 3);
  EXPECT_EQ(scent::detail::reflect(30, 27), 24);
  EXPECT_EQ(scent::detail::reflect(5, 27), 5);
}

// ---------- sample sets ----------

TEST(SampleSet, FullGridLattice) {
  std::vector<float> frame(16);
  for (std::size_t i = 0; i < 16; ++i) frame[i] = static_cast<float>(i);
  std::vector<std::uint8_t> mask(16, 1);
  auto ss = scent::to_sample_set(frame, mask, 4, 4, 1.5);
  ss.validate();
  EXPECT_EQ(ss.coords.count, 16);
  EXPECT_DOUBLE_EQ(ss.time, 1.5);
  // First point: cell (0,0) -> (-1 + 1/4, -1 + 1/4).
  EXPECT_DOUBLE_EQ(ss.coords.data[0], -0.75);
  EXPECT_DOUBLE_EQ(ss.coords.data[1], -0.75);
  // Last point: cell (3,3) -> (0.75, 0.75).
  EXPECT_DOUBLE_EQ(ss.coords.data[30], 0.75);
  EXPECT_DOUBLE_EQ(ss.coords.data[31], 0.75);
  EXPECT_DOUBLE_EQ(ss.values[5], 5.0);
}

TEST(SampleSet, SingleCellCenterFormula) {
  std::vector<float> frame(64 * 64, 0.f);
  std::vector<std::uint8_t> mask(64 * 64, 0);
  mask[0] = 1;
  frame[0] = 2.5f;
  auto ss = scent::to_sample_set(frame, mask, 64, 64, 0.0);
  EXPECT_EQ(ss.coords.count, 1);
  EXPECT_DOUBLE_EQ(ss.coords.data[0], -1.0 + 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(ss.coords.data[1], -1.0 + 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(ss.values[0], 2.5);
}

TEST(SampleSet, CountMatchesMaskAndEmptyThrows) {
  std::vector<float> frame(16, 1.f);
  std::vector<std::uint8_t> mask(16, 0);
  EXPECT_THROW(scent::to_sample_set(frame, mask, 4, 4, 0.0), scent::ContractError);
  mask[3] = mask[7] = mask[12] = 1;
  auto ss = scent::to_sample_set(frame, mask, 4, 4, 0.0);
  EXPECT_EQ(ss.coords.count, 3);
}

TEST(SampleSet, GridCoordsMatchSampleSet) {
  auto cs = scent::grid_coords(4, 4);
  std::vector<float> frame(16, 0.f);
  std::vector<std::uint8_t> mask(16, 1);
  auto ss = scent::to_sample_set(frame, mask, 4, 4, 0.0);
  EXPECT_EQ(cs.data, ss.coords.data);
}

// ---------- archive ----------

TEST(Archive, RoundTripBitExact) {
  const std::string path = "test_archive.strj";
  auto cfg = fast_cfg();
  std::vector<Trajectory> trajs;
  for (std::uint64_t s = 0; s < 3; ++s) trajs.push_back(scent::gen_trajectory(cfg, s));
  ScenarioConfig sc;
  sc.kind = ScenarioKind::S4;
  for (auto& t : trajs) t = scent::apply_scenario(t, sc, t.seed);
  scent::write_archive(path, trajs);
  auto loaded = scent::read_archive(path);
  ASSERT_EQ(loaded.size(), trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    EXPECT_EQ(loaded[i].frames, trajs[i].frames);
    EXPECT_EQ(loaded[i].masks, trajs[i].masks);
    EXPECT_EQ(loaded[i].seed, trajs[i].seed);
    EXPECT_EQ(loaded[i].scenario, "s4");
  }
  std::filesystem::remove(path);
}

TEST(Archive, WriteIsByteDeterministic) {
  auto cfg = fast_cfg();
  std::vector<Trajectory> trajs{scent::gen_trajectory(cfg, 1)};
  scent::write_archive("det_a.strj", trajs);
  scent::write_archive("det_b.strj", trajs);
  std::ifstream a("det_a.strj", std::ios::binary), b("det_b.strj", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(sa.substr(0, 4), "STRJ");
  std::filesystem::remove("det_a.strj");
  std::filesystem::remove("det_b.strj");
}

TEST(Archive, RejectsCorruptedInput) {
  EXPECT_THROW(scent::read_archive("does_not_exist.strj"), scent::IoError);
  {
    std::ofstream os("bad_magic.strj", std::ios::binary);
    os << "NOPE1234567890";
  }
  EXPECT_THROW(scent::read_archive("bad_magic.strj"), scent::IoError);
  std::filesystem::remove("bad_magic.strj");
  // Truncated payload.
  auto cfg = fast_cfg();
  std::vector<Trajectory> trajs{scent::gen_trajectory(cfg, 1)};
  scent::write_archive("trunc.strj", trajs);
  const auto size = std::filesystem::file_size("trunc.strj");
  std::filesystem::resize_file("trunc.strj", size - 64);
  EXPECT_THROW(scent::read_archive("trunc.strj"), scent::IoError);
  std::filesystem::remove("trunc.strj");
}

}  // namespace

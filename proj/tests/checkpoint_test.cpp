#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "scent/checkpoint.hpp"
#include "scent/model.hpp"
#include "scent/optim.hpp"

namespace {

using scent::AdamW;
using scent::AdamWConfig;
using scent::CoordSet;
using scent::ModelConfig;
using scent::RngStream;
using scent::SampleSet;
using scent::ScentModel;

ModelConfig tiny_config() {
  ModelConfig c;
  c.embed_dim = 8;
  c.latent_dim = 8;
  c.linear_projection_dim = 4;
  c.num_queries = 4;
  c.n_enc = 1;
  c.n_proc = 1;
  c.n_dec = 1;
  c.enc_heads = 2;
  c.proc_heads = 2;
  c.dec_heads = 2;
  c.sparse_groups = 2;
  c.ff_multiplier = 2;
  c.fourier.bands = 2;
  c.fourier.max_resolution = 4.0;
  return c;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

SampleSet make_input(std::int64_t n, std::uint64_t seed) {
  RngStream rng(seed, "ckpt-test-input");
  SampleSet s;
  s.coords.count = n;
  s.coords.dims = 2;
  s.channels = 1;
  s.time = 0.0;
  s.coords.data.resize(static_cast<std::size_t>(2 * n));
  s.values.resize(static_cast<std::size_t>(n));
  for (auto& v : s.coords.data) v = rng.uniform(-1.0, 1.0);
  for (auto& v : s.values) v = rng.gaussian();
  return s;
}

// Runs a few optimizer steps so moments and weights are non-trivial.
void churn(ScentModel<double>& m, AdamW<double>& opt, int steps) {
  auto input = make_input(16, 7);
  CoordSet coords;
  coords.count = 8;
  coords.dims = 2;
  RngStream cr(8, "ckpt-test-coords");
  coords.data.resize(16);
  for (auto& v : coords.data) v = cr.uniform(-1.0, 1.0);
  for (int s = 0; s < steps; ++s) {
    opt.zero_grad();
    RngStream rng(11, "fwd", static_cast<std::uint64_t>(s));
    auto y = m.forward(input, 1.0, coords, rng);
    auto loss = scent::sum_all(scent::mul(y, y));
    scent::backward(loss);
    opt.step(1e-3);
  }
}

TEST(Checkpoint, RoundTripBitExact) {
  const auto path = temp_path("scent_ckpt_roundtrip.scck");
  auto cfg = tiny_config();
  ScentModel<double> m(cfg, 42);
  AdamWConfig acfg;
  acfg.weight_decay = 0.01;
  AdamW<double> opt(m.trainable_parameters(), acfg);
  churn(m, opt, 3);

  scent::save_checkpoint(path, m, 3, 42, &opt);
  auto r = scent::load_checkpoint<double>(path);

  EXPECT_EQ(r.step, 3);
  EXPECT_EQ(r.seed, 42u);
  nlohmann::json a = m.config(), b = r.model.config();
  EXPECT_EQ(a, b);

  ASSERT_EQ(m.named_parameters().size(), r.model.named_parameters().size());
  for (std::size_t i = 0; i < m.named_parameters().size(); ++i) {
    const auto& [name, t] = m.named_parameters()[i];
    const auto& [rname, rt] = r.model.named_parameters()[i];
    EXPECT_EQ(name, rname);
    ASSERT_EQ(t.data().size(), rt.data().size());
    EXPECT_EQ(std::memcmp(t.data().data(), rt.data().data(),
                          t.data().size() * sizeof(double)),
              0)
        << "tensor mismatch: " << name;
    EXPECT_EQ(t.requires_grad(), rt.requires_grad());
  }

  ASSERT_TRUE(r.has_optimizer);
  EXPECT_EQ(r.adam_step_count, opt.step_count());
  auto ropt = scent::restore_optimizer(r);
  ASSERT_EQ(ropt.size(), opt.size());
  for (std::size_t i = 0; i < opt.size(); ++i) {
    EXPECT_EQ(opt.exp_avg(i), ropt.exp_avg(i)) << "m moment mismatch at " << i;
    EXPECT_EQ(opt.exp_avg_sq(i), ropt.exp_avg_sq(i)) << "v moment mismatch at " << i;
  }

  // One more identical step on both sides keeps them bit-identical.
  churn(m, opt, 1);
  churn(r.model, ropt, 1);
  for (std::size_t i = 0; i < m.named_parameters().size(); ++i) {
    const auto& [name, t] = m.named_parameters()[i];
    const auto& rt = r.model.named_parameters()[i].second;
    EXPECT_EQ(std::memcmp(t.data().data(), rt.data().data(),
                          t.data().size() * sizeof(double)),
              0)
        << "post-resume divergence: " << name;
  }
  std::remove(path.c_str());
}

TEST(Checkpoint, WriteIsByteDeterministic) {
  const auto p1 = temp_path("scent_ckpt_det_a.scck");
  const auto p2 = temp_path("scent_ckpt_det_b.scck");
  ScentModel<double> m(tiny_config(), 9);
  scent::save_checkpoint(p1, m, 0, 9);
  scent::save_checkpoint(p2, m, 0, 9);
  std::ifstream a(p1, std::ios::binary), b(p2, std::ios::binary);
  std::vector<char> da((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::vector<char> db((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  EXPECT_EQ(da, db);
  EXPECT_GT(da.size(), 16u);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST(Checkpoint, WithoutOptimizerState) {
  const auto path = temp_path("scent_ckpt_noopt.scck");
  ScentModel<double> m(tiny_config(), 9);
  scent::save_checkpoint(path, m, 17, 9);
  auto r = scent::load_checkpoint<double>(path);
  EXPECT_EQ(r.step, 17);
  EXPECT_FALSE(r.has_optimizer);
  EXPECT_THROW(scent::restore_optimizer(r), scent::ContractError);
  std::remove(path.c_str());
}

TEST(Checkpoint, RejectsCorruptedInput) {
  EXPECT_THROW(scent::load_checkpoint<double>(temp_path("scent_no_such.scck")),
               scent::IoError);

  const auto path = temp_path("scent_ckpt_corrupt.scck");
  ScentModel<double> m(tiny_config(), 9);
  scent::save_checkpoint(path, m, 0, 9);

  {  // Bad magic.
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(scent::load_checkpoint<double>(path), scent::IoError);

  scent::save_checkpoint(path, m, 0, 9);
  {  // Truncate the payload.
    std::error_code ec;
    auto size = std::filesystem::file_size(path, ec);
    std::filesystem::resize_file(path, size - 64, ec);
    ASSERT_FALSE(ec);
  }
  EXPECT_THROW(scent::load_checkpoint<double>(path), scent::IoError);

  // Wrong element type.
  scent::save_checkpoint(path, m, 0, 9);
  EXPECT_THROW(scent::load_checkpoint<float>(path), scent::IoError);
  std::remove(path.c_str());
}

}  // namespace

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scent/config.hpp"
#include "scent/errors.hpp"

namespace scent {

namespace detail {

// Simulated-dataset table (S1-S5 at publication scale).
inline RunConfig simulated_preset(const std::string& scenario) {
  RunConfig c;
  c.data.scenario = scenario;
  c.data.count_train = 100000;
  c.data.count_val = 1000;
  c.data.initial_frame = 1;
  c.data.solver.height = 64;
  c.data.solver.width = 64;
  c.data.solver.frames = 50;
  c.data.params.kind = scenario_from_name(scenario);

  c.model.embed_dim = 164;
  c.model.latent_dim = 128;
  c.model.linear_projection_dim = 64;
  c.model.num_queries = 128;
  c.model.n_enc = 6;
  c.model.n_proc = 2;
  c.model.n_dec = 6;
  c.model.enc_heads = 4;
  c.model.proc_heads = 4;
  c.model.dec_heads = 4;
  const bool dense_pair = (scenario == "s1" || scenario == "s2");
  c.model.sparse_groups = dense_pair ? 2 : 8;
  c.model.ff_multiplier = 4;
  c.model.output_scale = 0.1;
  c.model.latent_init_std = 0.02;
  c.model.fourier.bands = 12;
  c.model.fourier.max_resolution = 20.0;
  c.model.time_horizon = 3.0;

  c.train.batch_size = 256;
  c.train.total_steps = dense_pair ? 100000 : 50000;
  c.train.time_horizon = 3;
  c.train.loss = LossKind::RelMse;
  c.train.val_interval = 1000;
  c.train.lr.max_lr = 0.0008;
  c.train.lr.min_lr = 0.00008;
  c.train.lr.warmup_steps = 2000;
  c.train.lr.total_steps = c.train.total_steps;
  c.train.adam.beta1 = 0.9;
  c.train.adam.beta2 = 0.999;
  c.train.adam.weight_decay = 0.0001;
  return c;
}

// Benchmark Navier-Stokes table (NS-3/4/5).
inline RunConfig benchmark_preset(int exponent) {
  RunConfig c;
  c.data.scenario = "s1";  // fully observed grids
  c.data.initial_frame = 10;
  c.data.solver.height = 64;
  c.data.solver.width = 64;
  switch (exponent) {
    case 3:
      c.data.count_train = 256;
      c.data.count_val = 64;
      c.data.solver.frames = 30;
      c.data.solver.viscosity = 1e-3;
      break;
    case 4:
      c.data.count_train = 1000;
      c.data.count_val = 200;
      c.data.solver.frames = 30;
      c.data.solver.viscosity = 1e-4;
      break;
    case 5:
      c.data.count_train = 1000;
      c.data.count_val = 200;
      c.data.solver.frames = 20;
      c.data.solver.viscosity = 1e-5;
      break;
    default:
      throw ConfigError("preset: unknown benchmark viscosity exponent");
  }

  c.model.embed_dim = 128;
  c.model.latent_dim = 128;
  c.model.linear_projection_dim = 64;
  c.model.num_queries = exponent == 3 ? 64 : 256;
  c.model.n_enc = 4;
  c.model.n_proc = 2;
  c.model.n_dec = 4;
  c.model.enc_heads = 4;
  c.model.proc_heads = 4;
  c.model.dec_heads = 4;
  c.model.sparse_groups = exponent == 3 ? 1 : 8;
  c.model.ff_multiplier = 4;
  c.model.output_scale = 0.1;
  c.model.latent_init_std = 0.02;
  c.model.fourier.bands = exponent == 3 ? 6 : 12;
  c.model.fourier.max_resolution = 20.0;
  c.model.time_horizon = 5.0;

  c.train.batch_size = 100;
  c.train.total_steps = exponent == 3 ? 150000 : 110000;
  c.train.time_horizon = 5;
  c.train.loss = LossKind::RelMse;
  c.train.val_interval = 1000;
  c.train.lr.max_lr = exponent == 3 ? 0.001 : (exponent == 4 ? 0.0006 : 0.0008);
  c.train.lr.min_lr = exponent == 5 ? 0.000008 : 0.0;
  c.train.lr.warmup_steps = exponent == 3 ? 0 : 2000;
  c.train.lr.total_steps = c.train.total_steps;
  c.train.adam.beta1 = 0.9;
  c.train.adam.beta2 = 0.999;
  c.train.adam.weight_decay = 0.00001;
  return c;
}

// Model-scalability ladder (m1-m7), trained on S5. Values are stored exactly
// as published; m7 pairs latent 1024 with 12 processor heads, which the
// head-divisibility contract rejects at model construction.
inline RunConfig ladder_preset(int idx) {
  static constexpr std::int64_t kLatent[7] = {128, 192, 256, 384, 512, 768, 1024};
  static constexpr std::int64_t kQueries[7] = {128, 138, 164, 192, 224, 224, 256};
  static constexpr std::int64_t kProcLayers[7] = {2, 2, 2, 2, 2, 4, 6};
  static constexpr std::int64_t kProcHeads[7] = {4, 4, 4, 6, 8, 8, 12};
  static constexpr std::int64_t kEncDecHeads[7] = {2, 2, 2, 2, 4, 4, 4};
  static constexpr double kMaxLr[7] = {0.0008, 0.0007, 0.0006, 0.0005,
                                       0.0004, 0.0003, 0.0002};
  static constexpr double kMinLr[7] = {0.00008, 0.00007, 0.00006, 0.00005,
                                       0.00004, 0.00003, 0.00002};
  if (idx < 1 || idx > 7) throw ConfigError("preset: ladder index out of range");
  RunConfig c = simulated_preset("s5");
  const int i = idx - 1;
  c.model.latent_dim = kLatent[i];
  c.model.num_queries = kQueries[i];
  c.model.n_proc = kProcLayers[i];
  c.model.n_enc = 6;
  c.model.n_dec = 6;
  c.model.proc_heads = kProcHeads[i];
  c.model.enc_heads = kEncDecHeads[i];
  c.model.dec_heads = kEncDecHeads[i];
  c.model.sparse_groups = 8;
  c.train.total_steps = 50000;
  c.train.lr.max_lr = kMaxLr[i];
  c.train.lr.min_lr = kMinLr[i];
  c.train.lr.warmup_steps = 2000;
  c.train.lr.total_steps = 50000;
  return c;
}

// Single-core desk scale: 16x16 grids, 24 frames, a model small enough to
// train in minutes. Scenario knobs keep the published coverage fractions
// (S4 half of the grid, S5 moving regions over ~49% of cells).
inline RunConfig desk_preset(const std::string& scenario) {
  RunConfig c;
  c.data.scenario = scenario;
  c.data.count_train = 200;
  c.data.count_val = 20;
  c.data.initial_frame = 1;
  c.data.solver.height = 16;
  c.data.solver.width = 16;
  c.data.solver.frames = 24;
  c.data.params.kind = scenario_from_name(scenario);
  c.data.params.regions = 5;
  c.data.params.region_size = 5;
  c.data.params.max_shift = 2;

  c.model.embed_dim = 32;
  c.model.latent_dim = 32;
  c.model.linear_projection_dim = 16;
  c.model.num_queries = 16;
  c.model.n_enc = 2;
  c.model.n_proc = 1;
  c.model.n_dec = 2;
  c.model.enc_heads = 2;
  c.model.proc_heads = 2;
  c.model.dec_heads = 2;
  const bool dense_pair = (scenario == "s1" || scenario == "s2");
  c.model.sparse_groups = dense_pair ? 2 : 4;
  c.model.ff_multiplier = 2;
  c.model.output_scale = 0.1;
  c.model.latent_init_std = 0.02;
  c.model.fourier.bands = 6;
  c.model.fourier.max_resolution = 8.0;
  c.model.time_horizon = 3.0;

  c.train.batch_size = 4;
  c.train.total_steps = 5000;
  c.train.time_horizon = 3;
  c.train.loss = LossKind::RelMse;
  c.train.val_interval = 500;
  c.train.lr.max_lr = 0.0008;
  c.train.lr.min_lr = 0.00008;
  c.train.lr.warmup_steps = 100;
  c.train.lr.total_steps = 5000;
  c.train.adam.beta1 = 0.9;
  c.train.adam.beta2 = 0.999;
  c.train.adam.weight_decay = 0.0001;
  return c;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  return {"ns3",     "ns4",     "ns5",     "s1",      "s2",      "s3",
          "s4",      "s5",      "desk-s1", "desk-s2", "desk-s3", "desk-s4",
          "desk-s5", "m1",      "m2",      "m3",      "m4",      "m5",
          "m6",      "m7"};
}

inline RunConfig make_preset(const std::string& name) {
  if (name == "ns3") return detail::benchmark_preset(3);
  if (name == "ns4") return detail::benchmark_preset(4);
  if (name == "ns5") return detail::benchmark_preset(5);
  if (name.size() == 2 && name[0] == 's' && name[1] >= '1' && name[1] <= '5')
    return detail::simulated_preset(name);
  if (name.rfind("desk-", 0) == 0) {
    const auto rest = name.substr(5);
    if (rest.size() == 2 && rest[0] == 's' && rest[1] >= '1' && rest[1] <= '5')
      return detail::desk_preset(rest);
  }
  if (name.size() == 2 && name[0] == 'm' && name[1] >= '1' && name[1] <= '7')
    return detail::ladder_preset(name[1] - '0');
  throw ConfigError("preset: unknown name '" + name + "'");
}

}  // namespace scent

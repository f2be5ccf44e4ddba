#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "scent/archive.hpp"
#include "scent/checkpoint.hpp"
#include "scent/config.hpp"
#include "scent/cost_model.hpp"
#include "scent/forecast.hpp"
#include "scent/gradcheck.hpp"
#include "scent/interpolate.hpp"
#include "scent/pgm.hpp"
#include "scent/presets.hpp"
#include "scent/scenarios.hpp"
#include "scent/training.hpp"

namespace scent::cli {

// Per-trajectory seeds come from one counter stream so a longer run extends a
// shorter one instead of reshuffling it.
inline std::vector<Trajectory> make_dataset(const DataConfig& d, std::uint64_t seed,
                                            const std::string& split,
                                            std::int64_t count) {
  d.validate();
  RngStream seeder(seed, "dataset-" + split);
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k < count; ++k) {
    const auto traj_seed = seeder.next_u64();
    out.push_back(apply_scenario(gen_trajectory(d.solver, traj_seed), d.params, seed));
  }
  return out;
}

inline double mask_density(const std::vector<Trajectory>& trajs) {
  std::int64_t valid = 0, total = 0;
  for (const auto& t : trajs) {
    total += static_cast<std::int64_t>(t.masks.size());
    for (auto m : t.masks) valid += m ? 1 : 0;
  }
  return total == 0 ? 0.0 : static_cast<double>(valid) / static_cast<double>(total);
}

inline void run_gen_data(const RunConfig& cfg, std::ostream& out) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto emit = [&](const std::string& split, std::int64_t count) {
    if (count < 1) return;
    const auto trajs = make_dataset(cfg.data, cfg.seed, split, count);
    const auto path = cfg.out_dir + "/" + split + ".strj";
    write_archive(path, trajs);
    out << "wrote " << path << ": " << trajs.size() << " trajectories, scenario "
        << cfg.data.scenario << ", " << cfg.data.solver.height << "x"
        << cfg.data.solver.width << ", T " << cfg.data.solver.frames
        << ", mask density " << mask_density(trajs) << "\n";
  };
  emit("train", cfg.data.count_train);
  emit("val", cfg.data.count_val);
}

inline TrainResult run_train(RunConfig cfg, const std::string& data_path,
                             const std::string& val_path,
                             const std::string& resume_path, std::ostream& out) {
  const auto train = read_archive(data_path);
  std::vector<Trajectory> val;
  if (!val_path.empty()) val = read_archive(val_path);

  std::filesystem::create_directories(cfg.out_dir);
  cfg.train.seed = cfg.seed;
  cfg.train.checkpoint_path = cfg.out_dir + "/checkpoint.scck";
  cfg.train.metrics_path = cfg.out_dir + "/metrics.csv";

  TrainResult res;
  if (resume_path.empty()) {
    ScentModel<double> model(cfg.model, cfg.seed);
    AdamW<double> opt(model.trainable_parameters(), cfg.train.adam);
    res = train_loop(model, opt, train, val, cfg.train);
  } else {
    auto restored = load_checkpoint<double>(resume_path);
    auto opt = restore_optimizer(restored);
    cfg.train.seed = restored.seed;  // continuation must replay the same streams
    res = train_loop(restored.model, opt, train, val, cfg.train, restored.step);
  }
  out << "trained to step " << res.steps_run << ", train_loss " << res.final_train_loss
      << ", val_rel_mse " << res.final_val_rel_mse << "\n";
  return res;
}

inline double run_eval(const std::string& checkpoint_path, const std::string& data_path,
                       const std::uint64_t* seed_override, std::ostream& out) {
  auto restored = load_checkpoint<double>(checkpoint_path);
  const auto data = read_archive(data_path);
  const auto seed = seed_override ? *seed_override : restored.seed;
  const double v = validate(restored.model, data, seed);
  out << "rel_mse " << detail::format_metric(v) << "\n";
  return v;
}

struct ForecastOptions {
  std::string checkpoint_path;
  std::string data_path;
  std::int64_t trajectory = 0;
  std::int64_t start = 0;      // train-frame ordinal (coarse time units)
  std::int64_t span = 1;       // coarse steps ahead
  double t_h = 0;              // 0: use the model's horizon
  std::string out_dir = ".";
  bool render = false;
  const std::uint64_t* seed_override = nullptr;
};

// Warps one trajectory forward hop by hop, writing the decoded grids as an
// STRJ archive, a per-frame Rel-MSE CSV against the archive's ground truth
// (blank where the trajectory ends), and optional PGM renders.
inline std::int64_t run_forecast(const ForecastOptions& opt, std::ostream& out) {
  auto restored = load_checkpoint<double>(opt.checkpoint_path);
  const auto data = read_archive(opt.data_path);
  if (opt.trajectory < 0 || opt.trajectory >= static_cast<std::int64_t>(data.size()))
    throw ContractError("forecast: trajectory index out of range");
  if (opt.span < 1) throw ContractError("forecast: span must be >= 1");
  const auto& traj = data[static_cast<std::size_t>(opt.trajectory)];
  const auto train_frames = traj.train_frames();
  const auto n_train = static_cast<std::int64_t>(train_frames.size());
  if (opt.start < 0 || opt.start >= n_train)
    throw ContractError("forecast: start frame out of range");

  const auto& model = restored.model;
  const double t_h = opt.t_h > 0 ? opt.t_h : model.config().time_horizon;
  const auto seed = opt.seed_override ? *opt.seed_override : restored.seed;
  const auto h = traj.height, w = traj.width;
  const auto raw_start = train_frames[static_cast<std::size_t>(opt.start)];
  auto input = to_sample_set(traj.frame(raw_start), traj.mask(raw_start), h, w,
                             static_cast<double>(opt.start));
  const CoordSet grid = grid_coords(h, w);

  const auto plan = plan_wuf(input.time, static_cast<double>(opt.start + opt.span), t_h);
  std::filesystem::create_directories(opt.out_dir);

  Trajectory fc;
  fc.frames_count = static_cast<std::int64_t>(plan.hops.size()) + 1;
  fc.height = h;
  fc.width = w;
  fc.scenario = "s1";
  fc.seed = seed;
  fc.frames.resize(static_cast<std::size_t>(fc.frames_count * h * w));
  fc.masks.assign(fc.frames.size(), 1);
  std::copy(traj.frame(raw_start).begin(), traj.frame(raw_start).end(),
            fc.frame_mut(0).begin());

  std::ofstream csv(opt.out_dir + "/forecast.csv", std::ios::trunc);
  if (!csv) throw IoError("forecast: cannot open csv in " + opt.out_dir);
  csv << "time,rel_mse\n";
  std::ofstream ranges;
  if (opt.render) {
    ranges.open(opt.out_dir + "/frame_ranges.txt", std::ios::trunc);
    if (!ranges) throw IoError("forecast: cannot open sidecar in " + opt.out_dir);
    const auto r0 = write_pgm(opt.out_dir + "/frame_0.pgm", traj.frame(raw_start), h, w);
    ranges << "frame_0.pgm min " << r0.min << " max " << r0.max << "\n";
  }

  RngStream rng(seed, "forecast", static_cast<std::uint64_t>(opt.trajectory));
  std::int64_t calls = 0;
  SampleSet state = input;
  for (std::size_t i = 0; i < plan.hops.size(); ++i) {
    const double target_time = state.time + plan.hops[i];
    auto hop = wuf_forecast(model, state, target_time, grid, h, w, rng, t_h);
    calls += hop.model_calls;
    state = std::move(hop.output);
    auto dst = fc.frame_mut(static_cast<std::int64_t>(i) + 1);
    for (std::size_t k = 0; k < state.values.size(); ++k)
      dst[k] = static_cast<float>(state.values[k]);

    csv << detail::format_metric(target_time) << ',';
    const double rounded = std::round(target_time);
    const auto ordinal = static_cast<std::int64_t>(rounded);
    if (std::abs(target_time - rounded) < 1e-9 && ordinal >= 0 && ordinal < n_train) {
      const auto raw = train_frames[static_cast<std::size_t>(ordinal)];
      std::vector<double> gt(traj.frame(raw).begin(), traj.frame(raw).end());
      csv << detail::format_metric(rel_mse(state.values, gt));
    }
    csv << '\n';
    if (opt.render) {
      const auto name = "frame_" + std::to_string(i + 1) + ".pgm";
      const auto r = write_pgm(opt.out_dir + "/" + name,
                               fc.frame(static_cast<std::int64_t>(i) + 1), h, w);
      ranges << name << " min " << r.min << " max " << r.max << "\n";
    }
  }
  csv.flush();
  if (!csv) throw IoError("forecast: csv write failed");
  write_archive(opt.out_dir + "/forecast.strj", {fc});
  out << "hops " << plan.hops.size() << ", model calls " << calls << ", wrote "
      << opt.out_dir << "/forecast.strj\n";
  return calls;
}

// Full-model finite-difference verification at binary64. Exceeding the
// threshold is reported through the exit code (5) by the CLI wrapper.
inline double run_gradcheck(const ModelConfig& mc, std::uint64_t seed,
                            int samples, std::ostream& out) {
  ScentModel<double> model(mc, seed);
  RngStream data_rng(seed, "gradcheck-data");
  SampleSet input;
  input.coords.count = 16;
  input.coords.dims = mc.spatial_dims;
  input.coords.data.resize(static_cast<std::size_t>(16 * mc.spatial_dims));
  for (auto& v : input.coords.data) v = data_rng.uniform(-1.0, 1.0);
  input.channels = static_cast<int>(mc.channels);
  input.values.resize(16 * static_cast<std::size_t>(mc.channels));
  for (auto& v : input.values) v = data_rng.gaussian();
  input.time = 0.0;
  CoordSet queries;
  queries.count = 16;
  queries.dims = mc.spatial_dims;
  queries.data.resize(input.coords.data.size());
  for (auto& v : queries.data) v = data_rng.uniform(-1.0, 1.0);

  GradcheckOptions gopt;
  gopt.samples = samples;
  const auto report = gradcheck(
      [&] {
        RngStream rng(seed, "gradcheck-fwd");
        auto y = model.forward(input, 1.0, queries, rng);
        return sum_all(mul(y, y));
      },
      model.trainable_parameters(), gopt);
  out << "max_rel_error " << detail::format_metric(report.max_rel_error) << "\n";
  return report.max_rel_error;
}

// Prints one family at its published operating point, or the whole table.
inline void run_cost(const CostModelParams* params, std::ostream& out) {
  if (params) {
    const double c = cost_model(*params);
    out << cost_family_name(params->family) << " cost " << detail::format_metric(c)
        << "\n";
    return;
  }
  const double fno1 = cost_model(paper_cost_params(CostFamily::Fno, 1));
  const double fno20 = cost_model(paper_cost_params(CostFamily::Fno, 20));
  out << "family,unroll_1,scale_1,unroll_20,scale_20\n";
  for (auto family : {CostFamily::Fno, CostFamily::Aroma, CostFamily::Scent}) {
    const std::int64_t long_unroll = family == CostFamily::Scent ? 7 : 20;
    const double c1 = cost_model(paper_cost_params(family, 1));
    const double c20 = cost_model(paper_cost_params(family, long_unroll));
    out << cost_family_name(family) << ',' << detail::format_metric(c1) << ','
        << detail::format_metric(c1 / fno1) << ',' << detail::format_metric(c20) << ','
        << detail::format_metric(c20 / fno20) << "\n";
  }
}

}  // namespace scent::cli

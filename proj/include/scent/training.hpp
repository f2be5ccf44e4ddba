#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "scent/archive.hpp"
#include "scent/checkpoint.hpp"
#include "scent/errors.hpp"
#include "scent/losses.hpp"
#include "scent/model.hpp"
#include "scent/optim.hpp"
#include "scent/sampling.hpp"

namespace scent {

struct TrainConfig {
  std::int64_t batch_size = 4;
  std::int64_t total_steps = 100;
  std::int64_t time_horizon = 3;  // coarse steps; must not exceed the model's
  LossKind loss = LossKind::RelMse;
  LrSchedule lr{};
  AdamWConfig adam{};
  std::int64_t val_interval = 50;
  std::uint64_t seed = 0;
  std::string checkpoint_path;
  std::string metrics_path;

  void validate() const {
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (total_steps < 0) throw ConfigError("TrainConfig: total_steps must be >= 0");
    if (time_horizon < 0) throw ConfigError("TrainConfig: time_horizon must be >= 0");
    if (val_interval < 1) throw ConfigError("TrainConfig: val_interval must be >= 1");
    if (checkpoint_path.empty() || metrics_path.empty())
      throw ConfigError("TrainConfig: checkpoint and metrics paths are required");
    lr.validate();
    adam.validate();
  }
};

struct TrainResult {
  std::int64_t steps_run = 0;
  double final_train_loss = std::numeric_limits<double>::quiet_NaN();
  double final_val_rel_mse = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::string format_metric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double wall_clock_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace detail

// Mean Rel-MSE over every consecutive train-frame pair (dt = 1) of every
// trajectory. `fwd(input, t_o, coords, traj_idx, pair_idx)` returns the
// predicted values at `coords`; genericity lets tests plug oracles in place
// of a model.
template <typename Fwd>
double validate_loop(const std::vector<Trajectory>& data, Fwd&& fwd) {
  double acc = 0;
  std::int64_t pairs = 0;
  for (std::size_t ti = 0; ti < data.size(); ++ti) {
    const auto& traj = data[ti];
    const auto train = traj.train_frames();
    for (std::size_t j = 0; j + 1 < train.size(); ++j) {
      const auto raw_in = train[j];
      const auto raw_out = train[j + 1];
      auto input = to_sample_set(traj.frame(raw_in), traj.mask(raw_in), traj.height,
                                 traj.width, static_cast<double>(j));
      auto target = to_sample_set(traj.frame(raw_out), traj.mask(raw_out), traj.height,
                                  traj.width, static_cast<double>(j + 1));
      const auto pred = fwd(input, target.time, target.coords,
                            static_cast<std::int64_t>(ti), static_cast<std::int64_t>(j));
      if (pred.size() != target.values.size())
        throw ContractError("validate: prediction size mismatch");
      acc += rel_mse(pred, target.values);
      ++pairs;
    }
  }
  if (pairs == 0) throw ContractError("validate: empty validation set");
  return acc / static_cast<double>(pairs);
}

// Model-driven validation; grouping randomness is keyed by (seed, trajectory,
// pair) so repeated validations of the same weights agree exactly.
template <typename T>
double validate(const ScentModel<T>& model, const std::vector<Trajectory>& data,
                std::uint64_t seed) {
  NoGradGuard ng;
  return validate_loop(data, [&](const SampleSet& input, double t_o,
                                 const CoordSet& coords, std::int64_t traj,
                                 std::int64_t pair) {
    RngStream rng(seed, "val", static_cast<std::uint64_t>(traj),
                  static_cast<std::uint64_t>(pair));
    auto y = model.forward(input, t_o, coords, rng);
    std::vector<double> out(y.data().size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = static_cast<double>(y.data()[i]);
    return out;
  });
}

// Appendix-B style training. Every per-step random choice (trajectory, pair,
// sparse groupings) is drawn from a stream keyed by (seed, step), so resuming
// from the checkpoint written at step k reproduces the uninterrupted run bit
// for bit. A metrics row and a checkpoint are emitted at every validation
// interval and at the final step; a non-finite training loss aborts with the
// last checkpoint retained. `clock` exists so tests can inject deterministic
// time; the default reads the monotonic wall clock.
template <typename T>
TrainResult train_loop(ScentModel<T>& model, AdamW<T>& opt,
                       const std::vector<Trajectory>& train,
                       const std::vector<Trajectory>& val, const TrainConfig& cfg,
                       std::int64_t start_step = 0,
                       std::function<double()> clock = detail::wall_clock_seconds) {
  cfg.validate();
  if (train.empty()) throw ContractError("train_loop: no training trajectories");
  if (start_step < 0 || start_step > cfg.total_steps)
    throw ContractError("train_loop: start_step out of range");
  if (static_cast<double>(cfg.time_horizon) > model.config().time_horizon)
    throw ContractError("train_loop: horizon exceeds the model's");

  std::ofstream metrics;
  if (start_step == 0) {
    metrics.open(cfg.metrics_path, std::ios::trunc);
    if (!metrics) throw IoError("train_loop: cannot open " + cfg.metrics_path);
    metrics << "step,lr,train_loss,val_rel_mse,seconds\n";
  } else {
    metrics.open(cfg.metrics_path, std::ios::app);
    if (!metrics) throw IoError("train_loop: cannot open " + cfg.metrics_path);
  }

  if (start_step == 0) save_checkpoint(cfg.checkpoint_path, model, 0, cfg.seed, &opt);

  TrainResult result;
  result.steps_run = start_step;
  const double t0 = clock();

  for (std::int64_t step = start_step + 1; step <= cfg.total_steps; ++step) {
    RngStream rng(cfg.seed, "train-step", static_cast<std::uint64_t>(step));
    opt.zero_grad();

    Tensor<T> batch_loss;
    for (std::int64_t b = 0; b < cfg.batch_size; ++b) {
      const auto idx = rng.below(train.size());
      const auto pair = sample_pair(train[static_cast<std::size_t>(idx)],
                                    cfg.time_horizon, rng);
      auto pred = model.forward(pair.input, pair.target.time, pair.target.coords, rng);
      std::vector<T> gt(pair.target.values.size());
      for (std::size_t i = 0; i < gt.size(); ++i)
        gt[i] = static_cast<T>(pair.target.values[i]);
      auto gt_t = Tensor<T>::from({pair.target.coords.count, 1}, std::move(gt));
      auto l = instance_loss(cfg.loss, pred, gt_t);
      batch_loss = batch_loss.defined() ? add(batch_loss, l) : l;
    }
    if (cfg.batch_size > 1)
      batch_loss = scale(batch_loss, static_cast<T>(1.0 / static_cast<double>(cfg.batch_size)));

    const double loss_value = static_cast<double>(batch_loss.item());
    if (!std::isfinite(loss_value))
      throw NumericError("train_loop: non-finite loss at step " + std::to_string(step) +
                         "; last checkpoint retained");
    backward(batch_loss);
    const double lr = cosine_lr(step, cfg.lr);
    opt.step(lr);

    result.steps_run = step;
    result.final_train_loss = loss_value;

    if (step % cfg.val_interval == 0 || step == cfg.total_steps) {
      const double v = val.empty() ? std::numeric_limits<double>::quiet_NaN()
                                   : validate(model, val, cfg.seed);
      result.final_val_rel_mse = v;
      metrics << step << ',' << detail::format_metric(lr) << ','
              << detail::format_metric(loss_value) << ',' << detail::format_metric(v)
              << ',' << detail::format_metric(clock() - t0) << '\n';
      metrics.flush();
      if (!metrics) throw IoError("train_loop: metrics write failed");
      save_checkpoint(cfg.checkpoint_path, model, step, cfg.seed, &opt);
    }
  }
  return result;
}

}  // namespace scent

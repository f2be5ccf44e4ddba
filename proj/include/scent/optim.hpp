#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "scent/errors.hpp"
#include "scent/tensor.hpp"

namespace scent {

struct LrSchedule {
  double max_lr = 1e-3;
  double min_lr = 0.0;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 1;

  void validate() const {
    if (total_steps <= 0) throw ConfigError("LrSchedule: total_steps must be positive");
    if (warmup_steps < 0 || warmup_steps > total_steps)
      throw ConfigError("LrSchedule: warmup_steps out of range");
    if (max_lr < 0 || min_lr < 0 || min_lr > max_lr)
      throw ConfigError("LrSchedule: need 0 <= min_lr <= max_lr");
  }
};

// Linear warmup from 0 to max_lr, then cosine decay to min_lr. Past
// total_steps the rate stays clamped at min_lr.
inline double cosine_lr(std::int64_t step, const LrSchedule& s) {
  s.validate();
  if (step < 0) throw ContractError("cosine_lr: negative step");
  if (s.warmup_steps > 0 && step < s.warmup_steps)
    return s.max_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  if (step >= s.total_steps) return s.min_lr;
  if (s.total_steps == s.warmup_steps) return s.max_lr;
  const double progress = static_cast<double>(step - s.warmup_steps) /
                          static_cast<double>(s.total_steps - s.warmup_steps);
  return s.min_lr + 0.5 * (s.max_lr - s.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  void validate() const {
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
      throw ConfigError("AdamWConfig: betas must lie in [0,1)");
    if (eps < 0) throw ConfigError("AdamWConfig: eps must be >= 0");
    if (weight_decay < 0) throw ConfigError("AdamWConfig: weight_decay must be >= 0");
  }
};

// AdamW with decoupled weight decay: the decay shrink param *= (1 - lr*wd) is
// applied before the bias-corrected adaptive update.
template <typename T>
class AdamW {
 public:
  AdamW(std::vector<Tensor<T>> params, AdamWConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {
    cfg_.validate();
    states_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      states_[i].m.assign(params_[i].data().size(), T(0));
      states_[i].v.assign(params_[i].data().size(), T(0));
    }
  }

  void step(double lr) {
    if (lr < 0) throw ContractError("AdamW::step: negative learning rate");
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i].data();
      auto& g = params_[i].grad();
      if (g.size() != p.size())
        throw ContractError("AdamW::step: gradient shape mismatch");
      auto& st = states_[i];
      const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
      const T decay = static_cast<T>(1.0 - lr * cfg_.weight_decay);
      for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] *= decay;
        st.m[j] = b1 * st.m[j] + (T(1) - b1) * g[j];
        st.v[j] = b2 * st.v[j] + (T(1) - b2) * g[j] * g[j];
        const double mhat = static_cast<double>(st.m[j]) / bc1;
        const double vhat = static_cast<double>(st.v[j]) / bc2;
        p[j] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  std::int64_t step_count() const { return step_count_; }
  void set_step_count(std::int64_t n) {
    if (n < 0) throw ContractError("AdamW: negative step count");
    step_count_ = n;
  }

  std::size_t size() const { return params_.size(); }

  // Moment buffers, exposed for checkpointing. Index matches the param order
  // given at construction.
  std::vector<T>& exp_avg(std::size_t i) { return states_.at(i).m; }
  std::vector<T>& exp_avg_sq(std::size_t i) { return states_.at(i).v; }
  const std::vector<T>& exp_avg(std::size_t i) const { return states_.at(i).m; }
  const std::vector<T>& exp_avg_sq(std::size_t i) const { return states_.at(i).v; }

  const AdamWConfig& config() const { return cfg_; }

 private:
  struct State {
    std::vector<T> m, v;
  };
  std::vector<Tensor<T>> params_;
  std::vector<State> states_;
  AdamWConfig cfg_;
  std::int64_t step_count_ = 0;
};

}  // namespace scent

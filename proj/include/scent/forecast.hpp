#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "scent/errors.hpp"
#include "scent/model.hpp"
#include "scent/rng.hpp"
#include "scent/sample_set.hpp"

namespace scent {

// Hop schedule for warp-unrolling forecasting: full-horizon warps plus an
// optional shorter trailing hop.
struct ForecastPlan {
  double t_i = 0;
  double t_o = 0;
  double t_h = 0;
  std::vector<double> hops;
};

// q = floor(span / t_h) hops of t_h plus the remainder if nonzero, so the hop
// count is ceil(span / t_h) and span 0 gives an empty plan. A relative
// tolerance keeps exact multiples (span = k * t_h) from growing a spurious
// epsilon-sized trailing hop.
inline ForecastPlan plan_wuf(double t_i, double t_o, double t_h) {
  if (!(t_h > 0)) throw ContractError("plan_wuf: time horizon must be positive");
  if (t_o < t_i) throw ContractError("plan_wuf: target time precedes input time");
  ForecastPlan plan;
  plan.t_i = t_i;
  plan.t_o = t_o;
  plan.t_h = t_h;
  const double span = t_o - t_i;
  const double tol = 1e-9 * std::max({1.0, std::abs(span), t_h});
  double remaining = span;
  while (remaining > t_h + tol) {
    plan.hops.push_back(t_h);
    remaining -= t_h;
  }
  if (remaining > tol) plan.hops.push_back(remaining);
  return plan;
}

struct WufResult {
  SampleSet output;
  std::int64_t model_calls = 0;
};

// Warp-unrolling forecasting: execute the plan's hops, decoding every
// intermediate state onto the full (grid_h x grid_w) training grid and
// re-encoding it as the next input; the final hop decodes onto query_coords.
// A zero span still runs one reconstruction pass (dt = 0) so the output
// always comes from the model. `t_h` may be below the model's horizon;
// above it is rejected.
template <typename T>
WufResult wuf_forecast(const ScentModel<T>& model, const SampleSet& input, double t_o,
                       const CoordSet& query_coords, std::int64_t grid_h,
                       std::int64_t grid_w, RngStream& rng, double t_h = 0) {
  input.validate();
  query_coords.validate();
  if (t_h == 0) t_h = model.config().time_horizon;
  if (t_h > model.config().time_horizon)
    throw ContractError("wuf_forecast: planning horizon exceeds the model's");
  if (grid_h < 1 || grid_w < 1) throw ContractError("wuf_forecast: bad grid extents");

  NoGradGuard ng;
  const auto plan = plan_wuf(input.time, t_o, t_h);
  const CoordSet grid = grid_coords(grid_h, grid_w);

  WufResult res;
  SampleSet state = input;
  const std::size_t n_hops = plan.hops.empty() ? 1 : plan.hops.size();
  for (std::size_t i = 0; i < n_hops; ++i) {
    const bool last = (i + 1 == n_hops);
    const double target_time = last ? t_o : state.time + plan.hops[i];
    const CoordSet& out_coords = last ? query_coords : grid;
    auto y = model.forward(state, target_time, out_coords, rng);
    ++res.model_calls;
    SampleSet next;
    next.coords = out_coords;
    next.channels = 1;
    next.time = target_time;
    next.values.resize(y.data().size());
    for (std::size_t k = 0; k < next.values.size(); ++k)
      next.values[k] = static_cast<double>(y.data()[k]);
    state = std::move(next);
  }
  res.output = std::move(state);
  return res;
}

}  // namespace scent

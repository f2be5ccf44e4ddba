#pragma once

#include <cstdint>

#include "scent/archive.hpp"
#include "scent/errors.hpp"
#include "scent/rng.hpp"
#include "scent/sample_set.hpp"

namespace scent {

struct TrainingPair {
  SampleSet input;
  SampleSet target;
  std::int64_t dt = 0;  // coarse steps
};

// Draws one supervised pair from a trajectory: dt uniform over {0..t_h}, then
// the input train frame uniform over the starts that keep the target in
// range. Both sides carry their own observation masks. Times are in coarse
// units (one train-frame step = 1.0).
inline TrainingPair sample_pair(const Trajectory& traj, std::int64_t t_h,
                                RngStream& rng) {
  if (t_h < 0) throw ContractError("sample_pair: negative time horizon");
  const auto train = traj.train_frames();
  const auto n_train = static_cast<std::int64_t>(train.size());
  if (n_train < t_h + 1)
    throw ContractError("sample_pair: trajectory shorter than time horizon");

  const std::int64_t dt = static_cast<std::int64_t>(rng.below(
      static_cast<std::uint64_t>(t_h + 1)));
  const std::int64_t max_start = n_train - dt;  // starts 0 .. max_start-1
  const std::int64_t ti = static_cast<std::int64_t>(rng.below(
      static_cast<std::uint64_t>(max_start)));

  const std::int64_t raw_in = train[static_cast<std::size_t>(ti)];
  const std::int64_t raw_out = train[static_cast<std::size_t>(ti + dt)];
  TrainingPair p;
  p.dt = dt;
  p.input = to_sample_set(traj.frame(raw_in), traj.mask(raw_in), traj.height,
                          traj.width, static_cast<double>(ti));
  p.target = to_sample_set(traj.frame(raw_out), traj.mask(raw_out), traj.height,
                           traj.width, static_cast<double>(ti + dt));
  return p;
}

}  // namespace scent

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <vector>

#include "scent/errors.hpp"
#include "scent/rng.hpp"
#include "scent/tensor.hpp"

namespace scent {

struct GradcheckOptions {
  double eps = 1e-5;
  int samples = 100;      // coordinates probed across all parameters
  std::uint64_t seed = 0;
  bool exhaustive = false;  // probe every coordinate once, ignoring samples
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  int checked = 0;
};

// Compares reverse-mode gradients of a scalar-valued forward closure against
// central finite differences in binary64. The closure must be deterministic:
// two evaluations with identical parameters must agree bit-for-bit, otherwise
// finite differences are meaningless and a ContractError is thrown.
inline GradcheckReport gradcheck(const std::function<Tensor<double>()>& forward,
                                 std::vector<Tensor<double>> params,
                                 const GradcheckOptions& opt = {}) {
  if (params.empty()) throw ContractError("gradcheck: no parameters given");
  if (opt.eps <= 0) throw ContractError("gradcheck: eps must be positive");
  if (opt.samples <= 0) throw ContractError("gradcheck: samples must be positive");

  const double base = forward().item();
  const double again = forward().item();
  if (std::memcmp(&base, &again, sizeof(double)) != 0)
    throw ContractError("gradcheck: forward pass is not deterministic");

  for (auto& p : params) p.zero_grad();
  {
    Tensor<double> loss = forward();
    backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.grad());

  std::int64_t total = 0;
  for (auto& p : params) total += p.numel();
  if (total == 0) throw ContractError("gradcheck: parameters are empty");

  RngStream rng(opt.seed, "gradcheck");
  GradcheckReport report;
  NoGradGuard no_grad;
  const auto probe = [&](std::int64_t flat) {
    std::size_t pi = 0;
    while (flat >= params[pi].numel()) {
      flat -= params[pi].numel();
      ++pi;
    }
    auto& slot = params[pi].data()[static_cast<std::size_t>(flat)];
    const double saved = slot;
    slot = saved + opt.eps;
    const double up = forward().item();
    slot = saved - opt.eps;
    const double down = forward().item();
    slot = saved;
    const double numeric = (up - down) / (2.0 * opt.eps);
    const double a = analytic[pi][static_cast<std::size_t>(flat)];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
    report.max_rel_error = std::max(report.max_rel_error, std::abs(a - numeric) / denom);
    ++report.checked;
  };
  if (opt.exhaustive) {
    for (std::int64_t flat = 0; flat < total; ++flat) probe(flat);
  } else {
    for (int s = 0; s < opt.samples; ++s)
      probe(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total))));
  }
  return report;
}

}  // namespace scent

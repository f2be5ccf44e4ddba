#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "scent/errors.hpp"
#include "scent/tensor.hpp"

namespace scent {

// ---- plain metrics over raw buffers ----

inline double mse(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size() || pred.empty())
    throw ContractError("mse: shape mismatch or empty input");
  double acc = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - gt[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

inline double rmse(std::span<const double> pred, std::span<const double> gt) {
  return std::sqrt(mse(pred, gt));
}

// Eq.-style relative MSE of one instance: sum (pred-gt)^2 / sum gt^2.
inline double rel_mse(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size() || pred.empty())
    throw ContractError("rel_mse: shape mismatch or empty input");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - gt[i];
    num += d * d;
    den += gt[i] * gt[i];
  }
  if (den == 0) throw NumericError("rel_mse: ground truth is identically zero");
  return num / den;
}

// ---- differentiable losses (gt is a constant) ----

template <typename T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& gt) {
  if (pred.shape() != gt.shape()) throw ContractError("mse_loss: shape mismatch");
  auto diff = sub(pred, gt);
  return mean_all(mul(diff, diff));
}

// Per-instance relative MSE as a graph node. The denominator involves only the
// ground truth, so it enters as a plain scaling constant.
template <typename T>
Tensor<T> rel_mse_loss(const Tensor<T>& pred, const Tensor<T>& gt) {
  if (pred.shape() != gt.shape()) throw ContractError("rel_mse_loss: shape mismatch");
  double den = 0;
  for (const T& v : gt.data()) den += static_cast<double>(v) * static_cast<double>(v);
  if (den == 0) throw NumericError("rel_mse_loss: ground truth is identically zero");
  auto diff = sub(pred, gt);
  return scale(sum_all(mul(diff, diff)), static_cast<T>(1.0 / den));
}

enum class LossKind { Mse, RelMse };

inline const char* loss_kind_name(LossKind k) {
  return k == LossKind::Mse ? "mse" : "rel_mse";
}

template <typename T>
Tensor<T> instance_loss(LossKind kind, const Tensor<T>& pred, const Tensor<T>& gt) {
  return kind == LossKind::Mse ? mse_loss(pred, gt) : rel_mse_loss(pred, gt);
}

}  // namespace scent

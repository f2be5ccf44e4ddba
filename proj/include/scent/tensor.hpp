#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "scent/errors.hpp"

namespace scent {

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& s) {
  std::int64_t n = 1;
  for (auto e : s) n *= e;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

// Thread-local autograd switch. Ops recorded only while enabled.
inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(grad_mode()) { grad_mode() = false; }
  ~NoGradGuard() { grad_mode() = prev; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

template <typename T>
class Tensor;

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  const char* op = "";  // empty for leaves
  std::vector<Tensor<T>> parents;
  std::function<void(TensorNode<T>&)> backward_fn;

  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
  }
};

namespace detail {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;

}  // namespace detail

// Value-semantic handle to a node in the autodiff graph. Data buffers are
// written once by the op that creates them; in-place mutation is reserved for
// the optimizer and finite-difference probes acting on leaf parameters.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    return filled(std::move(shape), T(0), requires_grad);
  }

  static Tensor filled(Shape shape, T value, bool requires_grad = false) {
    auto n = std::make_shared<TensorNode<T>>();
    n->shape = std::move(shape);
    validate_shape(n->shape);
    n->data.assign(static_cast<std::size_t>(shape_numel(n->shape)), value);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return Tensor(std::move(n));
  }

  static Tensor from(Shape shape, std::vector<T> data, bool requires_grad = false) {
    auto n = std::make_shared<TensorNode<T>>();
    n->shape = std::move(shape);
    validate_shape(n->shape);
    if (static_cast<std::int64_t>(data.size()) != shape_numel(n->shape))
      throw ContractError("Tensor::from: data size does not match shape " +
                          shape_str(n->shape));
    n->data = std::move(data);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return Tensor(std::move(n));
  }

  static Tensor scalar(T v) { return from({1}, {v}); }

  bool defined() const { return n_ != nullptr; }
  const Shape& shape() const { return node().shape; }
  std::int64_t numel() const { return shape_numel(node().shape); }
  std::int64_t rank() const { return static_cast<std::int64_t>(node().shape.size()); }

  std::int64_t rows() const {
    require_rank2("rows");
    return node().shape[0];
  }
  std::int64_t cols() const {
    require_rank2("cols");
    return node().shape[1];
  }

  std::vector<T>& data() { return node().data; }
  const std::vector<T>& data() const { return node().data; }
  std::vector<T>& grad() { return node().grad; }
  const std::vector<T>& grad() const { return node().grad; }

  bool requires_grad() const { return node().requires_grad; }

  T item() const {
    if (numel() != 1) throw ContractError("Tensor::item: tensor is not a scalar");
    return node().data[0];
  }

  void zero_grad() {
    auto& g = node().grad;
    g.assign(node().data.size(), T(0));
  }

  void assert_finite(const char* what) const {
    for (T v : node().data) {
      if (!std::isfinite(static_cast<double>(v)))
        throw NumericError(std::string("non-finite value in ") + what);
    }
  }

  TensorNode<T>& node() const {
    if (!n_) throw ContractError("Tensor: use of undefined tensor");
    return *n_;
  }
  const std::shared_ptr<TensorNode<T>>& ptr() const { return n_; }

  explicit Tensor(std::shared_ptr<TensorNode<T>> n) : n_(std::move(n)) {}

 private:
  void require_rank2(const char* what) const {
    if (node().shape.size() != 2)
      throw ContractError(std::string("Tensor::") + what + ": rank-2 tensor required, got " +
                          shape_str(node().shape));
  }
  static void validate_shape(const Shape& s) {
    if (s.empty()) throw ContractError("Tensor: rank-0 shapes are not supported");
    for (auto e : s)
      if (e < 0) throw ContractError("Tensor: negative dimension in " + shape_str(s));
  }

  std::shared_ptr<TensorNode<T>> n_;
};

namespace detail {

// Creates an op node. The graph is only recorded when grad mode is on and at
// least one parent requires grad; otherwise the result is a detached constant.
template <typename T>
Tensor<T> make_op(Shape shape, std::vector<T> data, const char* op,
                  std::vector<Tensor<T>> parents,
                  std::function<void(TensorNode<T>&)> backward_fn) {
  auto n = std::make_shared<TensorNode<T>>();
  n->shape = std::move(shape);
  n->data = std::move(data);
  bool track = grad_mode();
  if (track) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    track = any;
  }
  if (track) {
    n->requires_grad = true;
    n->op = op;
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return Tensor<T>(std::move(n));
}

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw ContractError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                        " vs " + shape_str(b.shape()));
}

}  // namespace detail

// ---- elementwise ----

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check_same_shape(a, b, "add");
  std::vector<T> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return detail::make_op<T>(
      a.shape(), std::move(out), "add", {a, b}, [](TensorNode<T>& self) {
        for (int k = 0; k < 2; ++k) {
          auto& p = self.parents[static_cast<std::size_t>(k)].node();
          if (!p.requires_grad) continue;
          p.ensure_grad();
          for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
        }
      });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check_same_shape(a, b, "sub");
  std::vector<T> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return detail::make_op<T>(
      a.shape(), std::move(out), "sub", {a, b}, [](TensorNode<T>& self) {
        auto& pa = self.parents[0].node();
        auto& pb = self.parents[1].node();
        if (pa.requires_grad) {
          pa.ensure_grad();
          for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
        }
        if (pb.requires_grad) {
          pb.ensure_grad();
          for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] -= self.grad[i];
        }
      });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::check_same_shape(a, b, "mul");
  std::vector<T> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return detail::make_op<T>(
      a.shape(), std::move(out), "mul", {a, b}, [](TensorNode<T>& self) {
        auto& pa = self.parents[0].node();
        auto& pb = self.parents[1].node();
        if (pa.requires_grad) {
          pa.ensure_grad();
          for (std::size_t i = 0; i < self.grad.size(); ++i)
            pa.grad[i] += self.grad[i] * pb.data[i];
        }
        if (pb.requires_grad) {
          pb.ensure_grad();
          for (std::size_t i = 0; i < self.grad.size(); ++i)
            pb.grad[i] += self.grad[i] * pa.data[i];
        }
      });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T s) {
  std::vector<T> out(a.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * s;
  return detail::make_op<T>(
      a.shape(), std::move(out), "scale", {a}, [s](TensorNode<T>& self) {
        auto& p = self.parents[0].node();
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += s * self.grad[i];
      });
}

// y[r,c] = a[r,c] + v[c]
template <typename T>
Tensor<T> add_rowvec(const Tensor<T>& a, const Tensor<T>& v) {
  const std::int64_t r = a.rows(), c = a.cols();
  if (v.rank() != 1 || v.numel() != c)
    throw ContractError("add_rowvec: vector length must equal column count");
  std::vector<T> out(a.data().size());
  for (std::int64_t i = 0; i < r; ++i)
    for (std::int64_t j = 0; j < c; ++j)
      out[static_cast<std::size_t>(i * c + j)] =
          a.data()[static_cast<std::size_t>(i * c + j)] + v.data()[static_cast<std::size_t>(j)];
  return detail::make_op<T>(
      a.shape(), std::move(out), "add_rowvec", {a, v}, [r, c](TensorNode<T>& self) {
        auto& pa = self.parents[0].node();
        auto& pv = self.parents[1].node();
        if (pa.requires_grad) {
          pa.ensure_grad();
          for (std::size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
        }
        if (pv.requires_grad) {
          pv.ensure_grad();
          for (std::int64_t i = 0; i < r; ++i)
            for (std::int64_t j = 0; j < c; ++j)
              pv.grad[static_cast<std::size_t>(j)] +=
                  self.grad[static_cast<std::size_t>(i * c + j)];
        }
      });
}

// ---- matrix products (Eigen-backed) ----

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  const std::int64_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k)
    throw ContractError("matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                        " x " + shape_str(b.shape()));
  std::vector<T> out(static_cast<std::size_t>(m * n));
  {
    detail::ConstMatMap<T> A(a.data().data(), m, k);
    detail::ConstMatMap<T> B(b.data().data(), k, n);
    detail::MatMap<T> C(out.data(), m, n);
    C.noalias() = A * B;
  }
  return detail::make_op<T>(
      {m, n}, std::move(out), "matmul", {a, b}, [m, k, n](TensorNode<T>& self) {
        auto& pa = self.parents[0].node();
        auto& pb = self.parents[1].node();
        detail::ConstMatMap<T> G(self.grad.data(), m, n);
        if (pa.requires_grad) {
          pa.ensure_grad();
          detail::ConstMatMap<T> B(pb.data.data(), k, n);
          detail::MatMap<T> GA(pa.grad.data(), m, k);
          GA.noalias() += G * B.transpose();
        }
        if (pb.requires_grad) {
          pb.ensure_grad();
          detail::ConstMatMap<T> A(pa.data.data(), m, k);
          detail::MatMap<T> GB(pb.grad.data(), k, n);
          GB.noalias() += A.transpose() * G;
        }
      });
}

// y = alpha * a * b^T
template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b, T alpha = T(1)) {
  const std::int64_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k)
    throw ContractError("matmul_nt: inner dimensions disagree, " + shape_str(a.shape()) +
                        " x " + shape_str(b.shape()) + "^T");
  std::vector<T> out(static_cast<std::size_t>(m * n));
  {
    detail::ConstMatMap<T> A(a.data().data(), m, k);
    detail::ConstMatMap<T> B(b.data().data(), n, k);
    detail::MatMap<T> C(out.data(), m, n);
    C.noalias() = alpha * (A * B.transpose());
  }
  return detail::make_op<T>(
      {m, n}, std::move(out), "matmul_nt", {a, b},
      [m, k, n, alpha](TensorNode<T>& self) {
        auto& pa = self.parents[0].node();
        auto& pb = self.parents[1].node();
        detail::ConstMatMap<T> G(self.grad.data(), m, n);
        if (pa.requires_grad) {
          pa.ensure_grad();
          detail::ConstMatMap<T> B(pb.data.data(), n, k);
          detail::MatMap<T> GA(pa.grad.data(), m, k);
          GA.noalias() += alpha * (G * B);
        }
        if (pb.requires_grad) {
          pb.ensure_grad();
          detail::ConstMatMap<T> A(pa.data.data(), m, k);
          detail::MatMap<T> GB(pb.grad.data(), n, k);
          GB.noalias() += alpha * (G.transpose() * A);
        }
      });
}

// ---- row-structured nonlinearities ----

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& x) {
  const std::int64_t r = x.rows(), c = x.cols();
  if (c == 0) throw ContractError("softmax_rows: empty rows");
  std::vector<T> out(x.data().size());
  for (std::int64_t i = 0; i < r; ++i) {
    const T* xs = x.data().data() + i * c;
    T* ys = out.data() + i * c;
    T mx = xs[0];
    for (std::int64_t j = 1; j < c; ++j) mx = std::max(mx, xs[j]);
    T sum = T(0);
    for (std::int64_t j = 0; j < c; ++j) {
      ys[j] = std::exp(xs[j] - mx);
      sum += ys[j];
    }
    for (std::int64_t j = 0; j < c; ++j) ys[j] /= sum;
  }
  return detail::make_op<T>(
      x.shape(), std::move(out), "softmax_rows", {x}, [r, c](TensorNode<T>& self) {
        auto& p = self.parents[0].node();
        p.ensure_grad();
        for (std::int64_t i = 0; i < r; ++i) {
          const T* y = self.data.data() + i * c;
          const T* gy = self.grad.data() + i * c;
          T* gx = p.grad.data() + i * c;
          T dot = T(0);
          for (std::int64_t j = 0; j < c; ++j) dot += gy[j] * y[j];
          for (std::int64_t j = 0; j < c; ++j) gx[j] += y[j] * (gy[j] - dot);
        }
      });
}

// Per-row layer norm with learned affine. Population variance, epsilon inside
// the square root.
template <typename T>
Tensor<T> layer_norm_rows(const Tensor<T>& x, const Tensor<T>& gamma,
                          const Tensor<T>& beta, T eps = T(1e-5)) {
  const std::int64_t r = x.rows(), c = x.cols();
  if (gamma.rank() != 1 || gamma.numel() != c || beta.rank() != 1 || beta.numel() != c)
    throw ContractError("layer_norm_rows: affine parameters must have length = columns");
  std::vector<T> out(x.data().size());
  for (std::int64_t i = 0; i < r; ++i) {
    const T* xs = x.data().data() + i * c;
    T* ys = out.data() + i * c;
    T mean = T(0);
    for (std::int64_t j = 0; j < c; ++j) mean += xs[j];
    mean /= static_cast<T>(c);
    T var = T(0);
    for (std::int64_t j = 0; j < c; ++j) var += (xs[j] - mean) * (xs[j] - mean);
    var /= static_cast<T>(c);
    const T inv = T(1) / std::sqrt(var + eps);
    for (std::int64_t j = 0; j < c; ++j)
      ys[j] = (xs[j] - mean) * inv * gamma.data()[static_cast<std::size_t>(j)] +
              beta.data()[static_cast<std::size_t>(j)];
  }
  return detail::make_op<T>(
      x.shape(), std::move(out), "layer_norm", {x, gamma, beta},
      [r, c, eps](TensorNode<T>& self) {
        auto& px = self.parents[0].node();
        auto& pg = self.parents[1].node();
        auto& pb = self.parents[2].node();
        if (px.requires_grad) px.ensure_grad();
        if (pg.requires_grad) pg.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        std::vector<T> xhat(static_cast<std::size_t>(c));
        for (std::int64_t i = 0; i < r; ++i) {
          const T* xs = px.data.data() + i * c;
          const T* gy = self.grad.data() + i * c;
          T mean = T(0);
          for (std::int64_t j = 0; j < c; ++j) mean += xs[j];
          mean /= static_cast<T>(c);
          T var = T(0);
          for (std::int64_t j = 0; j < c; ++j) var += (xs[j] - mean) * (xs[j] - mean);
          var /= static_cast<T>(c);
          const T inv = T(1) / std::sqrt(var + eps);
          for (std::int64_t j = 0; j < c; ++j)
            xhat[static_cast<std::size_t>(j)] = (xs[j] - mean) * inv;
          if (pb.requires_grad)
            for (std::int64_t j = 0; j < c; ++j)
              pb.grad[static_cast<std::size_t>(j)] += gy[j];
          if (pg.requires_grad)
            for (std::int64_t j = 0; j < c; ++j)
              pg.grad[static_cast<std::size_t>(j)] +=
                  gy[j] * xhat[static_cast<std::size_t>(j)];
          if (px.requires_grad) {
            T mean_g = T(0), mean_gx = T(0);
            for (std::int64_t j = 0; j < c; ++j) {
              const T g = gy[j] * pg.data[static_cast<std::size_t>(j)];
              mean_g += g;
              mean_gx += g * xhat[static_cast<std::size_t>(j)];
            }
            mean_g /= static_cast<T>(c);
            mean_gx /= static_cast<T>(c);
            T* gx = px.grad.data() + i * c;
            for (std::int64_t j = 0; j < c; ++j) {
              const T g = gy[j] * pg.data[static_cast<std::size_t>(j)];
              gx[j] += inv * (g - mean_g - xhat[static_cast<std::size_t>(j)] * mean_gx);
            }
          }
        }
      });
}

// Exact (erf-based) GELU.
template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr T kInvSqrt2 = T(0.7071067811865475244);
  std::vector<T> out(x.data().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T v = x.data()[i];
    out[i] = T(0.5) * v * (T(1) + std::erf(v * kInvSqrt2));
  }
  return detail::make_op<T>(
      x.shape(), std::move(out), "gelu", {x}, [](TensorNode<T>& self) {
        constexpr T kInvSqrt2c = T(0.7071067811865475244);
        const T kInvSqrt2Pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
        auto& p = self.parents[0].node();
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          const T v = p.data[i];
          const T cdf = T(0.5) * (T(1) + std::erf(v * kInvSqrt2c));
          const T pdf = kInvSqrt2Pi * std::exp(T(-0.5) * v * v);
          p.grad[i] += self.grad[i] * (cdf + v * pdf);
        }
      });
}

// ---- reductions ----

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
  T s = T(0);
  for (T v : x.data()) s += v;
  return detail::make_op<T>(
      {1}, {s}, "sum", {x}, [](TensorNode<T>& self) {
        auto& p = self.parents[0].node();
        p.ensure_grad();
        for (auto& g : p.grad) g += self.grad[0];
      });
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& x) {
  if (x.numel() == 0) throw ContractError("mean_all: empty tensor");
  T s = T(0);
  for (T v : x.data()) s += v;
  const T n = static_cast<T>(x.numel());
  return detail::make_op<T>(
      {1}, {s / n}, "mean", {x}, [n](TensorNode<T>& self) {
        auto& p = self.parents[0].node();
        p.ensure_grad();
        const T g = self.grad[0] / n;
        for (auto& gv : p.grad) gv += g;
      });
}

// ---- structural ops ----

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::int64_t r0, std::int64_t n) {
  const std::int64_t r = x.rows(), c = x.cols();
  if (r0 < 0 || n < 0 || r0 + n > r) throw ContractError("slice_rows: range out of bounds");
  std::vector<T> out(static_cast<std::size_t>(n * c));
  std::copy_n(x.data().data() + r0 * c, n * c, out.data());
  return detail::make_op<T>(
      {n, c}, std::move(out), "slice_rows", {x}, [r0, c](TensorNode<T>& self) {
        auto& p = self.parents[0].node();
        p.ensure_grad();
        T* gp = p.grad.data() + r0 * c;
        for (std::size_t i = 0; i < self.grad.size(); ++i) gp[i] += self.grad[i];
      });
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::int64_t c0, std::int64_t n) {
  const std::int64_t r = x.rows(), c = x.cols();
  if (c0 < 0 || n < 0 || c0 + n > c) throw ContractError("slice_cols: range out of bounds");
  std::vector<T> out(static_cast<std::size_t>(r * n));
  for (std::int64_t i = 0; i < r; ++i)
    std::copy_n(x.data().data() + i * c + c0, n, out.data() + i * n);
  return detail::make_op<T>(
      {r, n}, std::move(out), "slice_cols", {x}, [r, c, c0, n](TensorNode<T>& self) {
        auto& p = self.parents[0].node();
        p.ensure_grad();
        for (std::int64_t i = 0; i < r; ++i) {
          const T* gs = self.grad.data() + i * n;
          T* gp = p.grad.data() + i * c + c0;
          for (std::int64_t j = 0; j < n; ++j) gp[j] += gs[j];
        }
      });
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: no inputs");
  const std::int64_t c = parts[0].cols();
  std::int64_t r = 0;
  for (const auto& p : parts) {
    if (p.cols() != c) throw ContractError("concat_rows: column counts disagree");
    r += p.rows();
  }
  std::vector<T> out(static_cast<std::size_t>(r * c));
  std::int64_t off = 0;
  std::vector<std::int64_t> offsets;
  for (const auto& p : parts) {
    offsets.push_back(off);
    std::copy_n(p.data().data(), p.numel(), out.data() + off * c);
    off += p.rows();
  }
  return detail::make_op<T>(
      {r, c}, std::move(out), "concat_rows", parts,
      [offsets, c](TensorNode<T>& self) {
        for (std::size_t k = 0; k < self.parents.size(); ++k) {
          auto& p = self.parents[k].node();
          if (!p.requires_grad) continue;
          p.ensure_grad();
          const T* gs = self.grad.data() + offsets[k] * c;
          for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += gs[i];
        }
      });
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const std::int64_t r = parts[0].rows();
  std::int64_t c = 0;
  for (const auto& p : parts) {
    if (p.rows() != r) throw ContractError("concat_cols: row counts disagree");
    c += p.cols();
  }
  std::vector<T> out(static_cast<std::size_t>(r * c));
  std::vector<std::int64_t> offsets;
  std::int64_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::int64_t pc = p.cols();
    for (std::int64_t i = 0; i < r; ++i)
      std::copy_n(p.data().data() + i * pc, pc, out.data() + i * c + off);
    off += pc;
  }
  return detail::make_op<T>(
      {r, c}, std::move(out), "concat_cols", parts,
      [offsets, r, c](TensorNode<T>& self) {
        for (std::size_t k = 0; k < self.parents.size(); ++k) {
          auto& p = self.parents[k].node();
          if (!p.requires_grad) continue;
          p.ensure_grad();
          const std::int64_t pc = p.shape[1];
          for (std::int64_t i = 0; i < r; ++i) {
            const T* gs = self.grad.data() + i * c + offsets[k];
            T* gp = p.grad.data() + i * pc;
            for (std::int64_t j = 0; j < pc; ++j) gp[j] += gs[j];
          }
        }
      });
}

// y[i] = x[indices[i]]; duplicate indices accumulate in the backward pass.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& x, std::vector<std::int64_t> indices) {
  const std::int64_t r = x.rows(), c = x.cols();
  const std::int64_t n = static_cast<std::int64_t>(indices.size());
  for (auto i : indices)
    if (i < 0 || i >= r) throw ContractError("gather_rows: index out of range");
  std::vector<T> out(static_cast<std::size_t>(n * c));
  for (std::int64_t i = 0; i < n; ++i)
    std::copy_n(x.data().data() + indices[static_cast<std::size_t>(i)] * c, c,
                out.data() + i * c);
  return detail::make_op<T>(
      {n, c}, std::move(out), "gather_rows", {x},
      [indices = std::move(indices), c](TensorNode<T>& self) {
        auto& p = self.parents[0].node();
        p.ensure_grad();
        for (std::size_t i = 0; i < indices.size(); ++i) {
          const T* gs = self.grad.data() + static_cast<std::int64_t>(i) * c;
          T* gp = p.grad.data() + indices[i] * c;
          for (std::int64_t j = 0; j < c; ++j) gp[j] += gs[j];
        }
      });
}

// ---- backward ----

// Reverse-mode sweep from a scalar loss. Gradients accumulate additively into
// every reachable node that requires grad; leaves keep their grads afterwards.
template <typename T>
void backward(const Tensor<T>& loss) {
  if (loss.numel() != 1) throw ContractError("backward: loss must be a scalar");
  if (!loss.requires_grad())
    throw ContractError("backward: loss does not require grad");
  if (!std::isfinite(static_cast<double>(loss.item())))
    throw NumericError("backward: loss is not finite");

  // Iterative post-order over the parent DAG.
  std::vector<TensorNode<T>*> order;
  std::unordered_set<TensorNode<T>*> visited;
  struct Frame {
    TensorNode<T>* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.ptr().get(), 0});
  visited.insert(loss.ptr().get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      TensorNode<T>* p = f.node->parents[f.next_parent++].ptr().get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  loss.ptr()->ensure_grad();
  loss.ptr()->grad[0] += T(1);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode<T>* n = *it;
    if (n->grad.empty() || !n->backward_fn) continue;
    for (T g : n->grad) {
      if (!std::isfinite(static_cast<double>(g)))
        throw NumericError(std::string("backward: non-finite gradient at op '") +
                           n->op + "'");
    }
    n->backward_fn(*n);
  }
}

}  // namespace scent

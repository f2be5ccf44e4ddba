#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "scent/errors.hpp"
#include "scent/rng.hpp"
#include "scent/tensor.hpp"

namespace scent {

template <typename T>
struct LinearParams {
  Tensor<T> weight;  // (in, out)
  Tensor<T> bias;    // (out); undefined for bias-free layers
};

template <typename T>
Tensor<T> apply_linear(const Tensor<T>& x, const LinearParams<T>& p) {
  auto y = matmul(x, p.weight);
  return p.bias.defined() ? add_rowvec(y, p.bias) : y;
}

template <typename T>
struct LayerNormParams {
  Tensor<T> gamma, beta;
};

// Pre-norm multi-head attention with a residual connection on the query
// stream. For self-attention norm_kv aliases norm_q and both streams share the
// single normalized view. The key projection is bias-free: a key bias shifts
// every logit in a softmax row by the same amount, so it cannot affect the
// output and would only add a zero-gradient parameter.
template <typename T>
struct AttentionParams {
  int heads = 1;
  LayerNormParams<T> norm_q, norm_kv;
  LinearParams<T> query, key, value, out;
};

// Pre-norm feed-forward: x + W2 gelu(W1 ln(x)).
template <typename T>
struct FeedForwardParams {
  LayerNormParams<T> norm;
  LinearParams<T> expand, contract;
};

template <typename T>
struct BlockParams {
  AttentionParams<T> attn;
  FeedForwardParams<T> ff;
};

template <typename T>
Tensor<T> feed_forward(const Tensor<T>& x, const FeedForwardParams<T>& p) {
  auto h = layer_norm_rows(x, p.norm.gamma, p.norm.beta);
  h = apply_linear(gelu(apply_linear(h, p.expand)), p.contract);
  return add(x, h);
}

namespace detail {

// Core scaled dot-product attention over already-normalized streams; adds the
// residual from `residual_src` (the raw query stream).
template <typename T>
Tensor<T> attention_core(const Tensor<T>& normed_q, const Tensor<T>& normed_kv,
                         const Tensor<T>& residual_src, const AttentionParams<T>& p) {
  const std::int64_t d = p.query.weight.cols();
  if (p.heads < 1 || d % p.heads != 0)
    throw ContractError("attention: width must be divisible by head count");
  const std::int64_t hd = d / p.heads;
  auto q = apply_linear(normed_q, p.query);
  auto k = apply_linear(normed_kv, p.key);
  auto v = apply_linear(normed_kv, p.value);
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  std::vector<Tensor<T>> heads;
  heads.reserve(static_cast<std::size_t>(p.heads));
  for (int h = 0; h < p.heads; ++h) {
    auto qh = slice_cols(q, h * hd, hd);
    auto kh = slice_cols(k, h * hd, hd);
    auto vh = slice_cols(v, h * hd, hd);
    auto logits = matmul_nt(qh, kh, inv_sqrt);
    heads.push_back(matmul(softmax_rows(logits), vh));
  }
  auto merged = p.heads == 1 ? heads[0] : concat_cols(heads);
  return add(residual_src, apply_linear(merged, p.out));
}

}  // namespace detail

// Cross-attention: queries attend to a separate key/value set. Both streams
// are pre-normalized with their own affine parameters.
template <typename T>
Tensor<T> cross_attention(const Tensor<T>& queries, const Tensor<T>& keys_values,
                          const AttentionParams<T>& p) {
  if (keys_values.rows() == 0)
    throw ContractError("cross_attention: empty key/value set");
  if (queries.rows() == 0) throw ContractError("cross_attention: empty query set");
  auto nq = layer_norm_rows(queries, p.norm_q.gamma, p.norm_q.beta);
  auto nkv = layer_norm_rows(keys_values, p.norm_kv.gamma, p.norm_kv.beta);
  return detail::attention_core(nq, nkv, queries, p);
}

template <typename T>
Tensor<T> self_attention(const Tensor<T>& x, const AttentionParams<T>& p) {
  if (x.rows() == 0) throw ContractError("self_attention: empty token set");
  auto nx = layer_norm_rows(x, p.norm_q.gamma, p.norm_q.beta);
  return detail::attention_core(nx, nx, x, p);
}

// Dense transformer block: self-attention followed by the feed-forward stage.
template <typename T>
Tensor<T> dense_block(const Tensor<T>& x, const BlockParams<T>& p) {
  return feed_forward(self_attention(x, p.attn), p.ff);
}

// Sparse self-attention block. Tokens are randomly permuted, split into
// `groups` contiguous groups (sizes floor(N/G) or ceil(N/G)), each group runs
// dense self-attention, and the permutation is undone before the shared
// feed-forward stage. groups == 1 reduces exactly to a dense block: no
// permutation is drawn and no RNG state is consumed.
template <typename T>
Tensor<T> sparse_block(const Tensor<T>& x, int groups, const BlockParams<T>& p,
                       RngStream& rng) {
  const std::int64_t n = x.rows();
  if (groups < 1) throw ContractError("sparse_block: groups must be >= 1");
  if (n < groups) throw ContractError("sparse_block: fewer tokens than groups");
  if (groups == 1) return dense_block(x, p);

  const auto perm = rng.permutation(n);
  auto xp = gather_rows(x, perm);

  const std::int64_t base = n / groups;
  const std::int64_t extra = n % groups;  // first `extra` groups get one more
  std::vector<Tensor<T>> segs;
  segs.reserve(static_cast<std::size_t>(groups));
  std::int64_t off = 0;
  for (int g = 0; g < groups; ++g) {
    const std::int64_t len = base + (g < extra ? 1 : 0);
    segs.push_back(self_attention(slice_rows(xp, off, len), p.attn));
    off += len;
  }
  auto yp = concat_rows(segs);

  std::vector<std::int64_t> inv(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
  auto y = gather_rows(yp, inv);
  return feed_forward(y, p.ff);
}

}  // namespace scent

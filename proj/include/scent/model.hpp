#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scent/attention.hpp"
#include "scent/errors.hpp"
#include "scent/fourier.hpp"
#include "scent/rng.hpp"
#include "scent/sample_set.hpp"
#include "scent/tensor.hpp"

namespace scent {

// Fixed-size latent summary of one field snapshot.
template <typename T>
struct LatentTokens {
  Tensor<T> tokens;  // (num_queries, latent_dim)
  double time = 0.0;
};

struct ModelConfig {
  std::int64_t embed_dim = 164;             // encoder token width (post-adapter)
  std::int64_t latent_dim = 128;            // query / latent / decoder width
  std::int64_t linear_projection_dim = 64;  // frozen value-projection width
  std::int64_t num_queries = 128;           // M
  std::int64_t n_enc = 6;
  std::int64_t n_proc = 2;
  std::int64_t n_dec = 6;
  int enc_heads = 4;
  int proc_heads = 4;
  int dec_heads = 4;
  int sparse_groups = 8;  // G; 1 recovers dense attention
  std::int64_t ff_multiplier = 4;
  FourierConfig fourier{};     // shared by spatial and time features
  double output_scale = 0.1;   // multiplier on the decoder head output
  double latent_init_std = 0.02;
  std::int64_t channels = 1;     // c
  int spatial_dims = 2;          // k
  double time_horizon = 3.0;     // t_h, in coarse dataset steps
  bool use_cen = true;   // encoder self-attention stack (Context Embedding Network)
  bool use_cn = true;    // decoder self-attention stack (Calibration Network)
  bool use_proj = true;  // frozen value projection
  bool use_tt = true;    // target-time conditioning in the encoder

  void validate() const {
    fourier.validate();
    if (embed_dim < 1 || latent_dim < 1 || linear_projection_dim < 1 ||
        num_queries < 1 || n_enc < 1 || n_proc < 1 || n_dec < 1 ||
        ff_multiplier < 1 || channels < 1 || spatial_dims < 1)
      throw ConfigError("ModelConfig: extents must be positive");
    if (enc_heads < 1 || proc_heads < 1 || dec_heads < 1)
      throw ConfigError("ModelConfig: head counts must be positive");
    if (sparse_groups < 1) throw ConfigError("ModelConfig: sparse_groups must be >= 1");
    if (embed_dim % enc_heads != 0 || latent_dim % enc_heads != 0)
      throw ConfigError("ModelConfig: enc_heads must divide embed_dim and latent_dim");
    if (latent_dim % proc_heads != 0)
      throw ConfigError("ModelConfig: proc_heads must divide latent_dim");
    if (latent_dim % dec_heads != 0)
      throw ConfigError("ModelConfig: dec_heads must divide latent_dim");
    if (!(time_horizon > 0)) throw ConfigError("ModelConfig: time_horizon must be > 0");
    if (!(output_scale > 0)) throw ConfigError("ModelConfig: output_scale must be > 0");
    if (!(latent_init_std > 0))
      throw ConfigError("ModelConfig: latent_init_std must be > 0");
  }

  // Width of the per-point encoder feature vector before the adapter linear.
  std::int64_t encoder_in_width() const {
    const std::int64_t fw = fourier.width();
    const std::int64_t vals = use_proj ? linear_projection_dim : channels;
    return vals + spatial_dims * fw + fw + (use_tt ? fw : 0);
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"embed_dim", c.embed_dim},
                     {"latent_dim", c.latent_dim},
                     {"linear_projection_dim", c.linear_projection_dim},
                     {"num_queries", c.num_queries},
                     {"n_enc", c.n_enc},
                     {"n_proc", c.n_proc},
                     {"n_dec", c.n_dec},
                     {"enc_heads", c.enc_heads},
                     {"proc_heads", c.proc_heads},
                     {"dec_heads", c.dec_heads},
                     {"sparse_groups", c.sparse_groups},
                     {"ff_multiplier", c.ff_multiplier},
                     {"fourier_bands", c.fourier.bands},
                     {"fourier_max_resolution", c.fourier.max_resolution},
                     {"output_scale", c.output_scale},
                     {"latent_init_std", c.latent_init_std},
                     {"channels", c.channels},
                     {"spatial_dims", c.spatial_dims},
                     {"time_horizon", c.time_horizon},
                     {"use_cen", c.use_cen},
                     {"use_cn", c.use_cn},
                     {"use_proj", c.use_proj},
                     {"use_tt", c.use_tt}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("embed_dim").get_to(c.embed_dim);
  j.at("latent_dim").get_to(c.latent_dim);
  j.at("linear_projection_dim").get_to(c.linear_projection_dim);
  j.at("num_queries").get_to(c.num_queries);
  j.at("n_enc").get_to(c.n_enc);
  j.at("n_proc").get_to(c.n_proc);
  j.at("n_dec").get_to(c.n_dec);
  j.at("enc_heads").get_to(c.enc_heads);
  j.at("proc_heads").get_to(c.proc_heads);
  j.at("dec_heads").get_to(c.dec_heads);
  j.at("sparse_groups").get_to(c.sparse_groups);
  j.at("ff_multiplier").get_to(c.ff_multiplier);
  j.at("fourier_bands").get_to(c.fourier.bands);
  j.at("fourier_max_resolution").get_to(c.fourier.max_resolution);
  j.at("output_scale").get_to(c.output_scale);
  j.at("latent_init_std").get_to(c.latent_init_std);
  j.at("channels").get_to(c.channels);
  j.at("spatial_dims").get_to(c.spatial_dims);
  j.at("time_horizon").get_to(c.time_horizon);
  j.at("use_cen").get_to(c.use_cen);
  j.at("use_cn").get_to(c.use_cn);
  j.at("use_proj").get_to(c.use_proj);
  j.at("use_tt").get_to(c.use_tt);
}

// Encoder-processor-decoder conditioned neural field.
//
// Stages:
//  - encode: per-point features (frozen value projection + Fourier coordinates
//    + Fourier input time + optionally Fourier target time) run through an
//    adapter linear, a stack of grouped sparse self-attention blocks, and a
//    learnable-query cross-attention pooling to a fixed latent.
//  - process: a conditioning token built from (t_i, t_o, dt) Fourier features
//    is prepended, dense self-attention blocks mix the latent, the token is
//    dropped.
//  - decode: query coordinates embed to latent width, cross-attend into the
//    latent, refine with sparse self-attention blocks, and project to channel
//    values scaled by output_scale.
//
// Every parameter is initialized from its own counter-based stream keyed by
// "init/<name>", so adding or removing parameters (ablations) never shifts the
// initialization of the others.
template <typename T>
class ScentModel {
 public:
  explicit ScentModel(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), seed_(seed) {
    cfg_.validate();
    const std::int64_t fw = cfg_.fourier.width();
    if (cfg_.use_proj) {
      proj_ = init_gaussian("encoder.proj.weight", {cfg_.channels, cfg_.linear_projection_dim},
                            1.0 / std::sqrt(static_cast<double>(cfg_.linear_projection_dim)),
                            /*trainable=*/false);
    }
    adapter_ = make_linear("encoder.adapter", cfg_.encoder_in_width(), cfg_.embed_dim);
    if (cfg_.use_cen) {
      cen_.reserve(static_cast<std::size_t>(cfg_.n_enc));
      for (std::int64_t l = 0; l < cfg_.n_enc; ++l)
        cen_.push_back(make_block("encoder.block" + std::to_string(l), cfg_.embed_dim,
                                  cfg_.enc_heads));
    }
    queries_ = init_gaussian("encoder.queries", {cfg_.num_queries, cfg_.latent_dim},
                             cfg_.latent_init_std, /*trainable=*/true);
    enc_pool_ = make_cross_attention("encoder.pool", cfg_.latent_dim, cfg_.embed_dim,
                                     cfg_.enc_heads);
    cond_ = make_linear("processor.cond", 3 * fw, cfg_.latent_dim);
    proc_.reserve(static_cast<std::size_t>(cfg_.n_proc));
    for (std::int64_t l = 0; l < cfg_.n_proc; ++l)
      proc_.push_back(make_block("processor.block" + std::to_string(l), cfg_.latent_dim,
                                 cfg_.proc_heads));
    dec_embed_ = make_linear("decoder.embed", (cfg_.spatial_dims + 1) * fw, cfg_.latent_dim);
    dec_pool_ = make_cross_attention("decoder.pool", cfg_.latent_dim, cfg_.latent_dim,
                                     cfg_.dec_heads);
    if (cfg_.use_cn) {
      cn_.reserve(static_cast<std::size_t>(cfg_.n_dec));
      for (std::int64_t l = 0; l < cfg_.n_dec; ++l)
        cn_.push_back(make_block("decoder.block" + std::to_string(l), cfg_.latent_dim,
                                 cfg_.dec_heads));
    }
    head_ = make_linear("decoder.head", cfg_.latent_dim, cfg_.channels);
  }

  const ModelConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }

  // Pools the scattered observations at t_i into the fixed latent. t_o only
  // participates when target-time conditioning is enabled, but the
  // forecast-forward convention t_o >= t_i is enforced regardless.
  LatentTokens<T> encode(const SampleSet& input, double t_i, double t_o,
                         RngStream& rng) const {
    input.validate();
    if (input.coords.dims != cfg_.spatial_dims)
      throw ContractError("encode: coordinate dimensionality mismatch");
    if (input.channels != cfg_.channels)
      throw ContractError("encode: channel count mismatch");
    if (t_o < t_i) throw ContractError("encode: target time precedes input time");
    const std::int64_t n = input.coords.count;
    if (n < cfg_.sparse_groups)
      throw ContractError("encode: fewer input points than sparse groups");

    auto tokens = apply_linear(encoder_features(input, t_i, t_o), adapter_);
    if (cfg_.use_cen)
      for (const auto& blk : cen_) tokens = sparse_block(tokens, cfg_.sparse_groups, blk, rng);
    auto latent = cross_attention(queries_, tokens, enc_pool_);
    return {latent, t_i};
  }

  // Warps the latent from t_i to t_o through dense attention conditioned on a
  // prepended (t_i, t_o, dt) token. dt must stay within the training horizon;
  // longer spans are the forecaster's job.
  LatentTokens<T> process(const LatentTokens<T>& z, double t_i, double t_o) const {
    check_latent(z, "process");
    if (z.time != t_i) throw ContractError("process: latent time does not match t_i");
    const double dt = t_o - t_i;
    if (dt < 0) throw ContractError("process: negative time warp");
    if (dt > cfg_.time_horizon)
      throw ContractError("process: time warp exceeds training horizon");

    const std::int64_t fw = cfg_.fourier.width();
    std::vector<T> feat(static_cast<std::size_t>(3 * fw));
    write_time_features(t_i, feat.data());
    write_time_features(t_o, feat.data() + fw);
    write_time_features(dt, feat.data() + 2 * fw);
    auto cond_tok = apply_linear(Tensor<T>::from({1, 3 * fw}, std::move(feat)), cond_);

    auto x = concat_rows<T>({cond_tok, z.tokens});
    for (const auto& blk : proc_) x = dense_block(x, blk);
    return {slice_rows(x, 1, cfg_.num_queries), t_o};
  }

  // Evaluates the latent at arbitrary coordinates at its own time t_o.
  Tensor<T> decode(const LatentTokens<T>& z, const CoordSet& query_coords, double t_o,
                   RngStream& rng) const {
    check_latent(z, "decode");
    if (z.time != t_o) throw ContractError("decode: latent time does not match t_o");
    query_coords.validate();
    if (query_coords.count < 1) throw ContractError("decode: empty query set");
    if (query_coords.dims != cfg_.spatial_dims)
      throw ContractError("decode: coordinate dimensionality mismatch");
    if (cfg_.use_cn && query_coords.count < cfg_.sparse_groups)
      throw ContractError("decode: fewer query points than sparse groups");

    const std::int64_t fw = cfg_.fourier.width();
    const std::int64_t n = query_coords.count;
    const std::int64_t width = (cfg_.spatial_dims + 1) * fw;
    const auto freqs = cfg_.fourier.frequencies();
    std::vector<double> trow(static_cast<std::size_t>(fw));
    detail::fourier_expand(t_o, freqs, trow.data());
    std::vector<T> feat(static_cast<std::size_t>(n * width));
    std::vector<double> row(static_cast<std::size_t>(fw));
    for (std::int64_t i = 0; i < n; ++i) {
      T* dst = feat.data() + i * width;
      for (int a = 0; a < cfg_.spatial_dims; ++a) {
        detail::fourier_expand(
            query_coords.data[static_cast<std::size_t>(i * cfg_.spatial_dims + a)], freqs,
            row.data());
        for (std::int64_t j = 0; j < fw; ++j) dst[a * fw + j] = static_cast<T>(row[static_cast<std::size_t>(j)]);
      }
      for (std::int64_t j = 0; j < fw; ++j)
        dst[cfg_.spatial_dims * fw + j] = static_cast<T>(trow[static_cast<std::size_t>(j)]);
    }

    auto dq = apply_linear(Tensor<T>::from({n, width}, std::move(feat)), dec_embed_);
    auto x = cross_attention(dq, z.tokens, dec_pool_);
    if (cfg_.use_cn)
      for (const auto& blk : cn_) x = sparse_block(x, cfg_.sparse_groups, blk, rng);
    return scale(apply_linear(x, head_), static_cast<T>(cfg_.output_scale));
  }

  // Full pass: observations at input.time -> field values at query_coords, t_o.
  Tensor<T> forward(const SampleSet& input, double t_o, const CoordSet& query_coords,
                    RngStream& rng) const {
    auto z = encode(input, input.time, t_o, rng);
    auto zt = process(z, input.time, t_o);
    return decode(zt, query_coords, t_o, rng);
  }

  // All stored tensors, including the frozen projection, in registration order.
  const std::vector<std::pair<std::string, Tensor<T>>>& named_parameters() const {
    return named_;
  }

  // Optimizer view: only tensors that receive gradients, in registration order.
  std::vector<Tensor<T>> trainable_parameters() const {
    std::vector<Tensor<T>> out;
    for (const auto& [name, t] : named_)
      if (t.requires_grad()) out.push_back(t);
    return out;
  }

  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for (const auto& [name, t] : named_) n += t.numel();
    return n;
  }

 private:
  Tensor<T> init_gaussian(const std::string& name, Shape shape, double std,
                          bool trainable) {
    RngStream rng(seed_, "init/" + name);
    std::vector<T> data(static_cast<std::size_t>(shape_numel(shape)));
    for (auto& v : data) v = static_cast<T>(std * rng.gaussian());
    auto t = Tensor<T>::from(std::move(shape), std::move(data), trainable);
    named_.emplace_back(name, t);
    return t;
  }

  Tensor<T> init_constant(const std::string& name, Shape shape, T value) {
    auto t = Tensor<T>::filled(std::move(shape), value, /*requires_grad=*/true);
    named_.emplace_back(name, t);
    return t;
  }

  LinearParams<T> make_linear(const std::string& prefix, std::int64_t in, std::int64_t out,
                              bool bias = true) {
    LinearParams<T> p;
    p.weight = init_gaussian(prefix + ".weight", {in, out},
                             1.0 / std::sqrt(static_cast<double>(in)), /*trainable=*/true);
    if (bias) p.bias = init_constant(prefix + ".bias", {out}, T(0));
    return p;
  }

  LayerNormParams<T> make_norm(const std::string& prefix, std::int64_t d) {
    LayerNormParams<T> p;
    p.gamma = init_constant(prefix + ".gamma", {d}, T(1));
    p.beta = init_constant(prefix + ".beta", {d}, T(0));
    return p;
  }

  // Self-attention parameters at width d; the single pre-norm lives in norm_q.
  AttentionParams<T> make_self_attention(const std::string& prefix, std::int64_t d,
                                         int heads) {
    AttentionParams<T> p;
    p.heads = heads;
    p.norm_q = make_norm(prefix + ".norm", d);
    p.query = make_linear(prefix + ".query", d, d);
    p.key = make_linear(prefix + ".key", d, d, /*bias=*/false);
    p.value = make_linear(prefix + ".value", d, d);
    p.out = make_linear(prefix + ".out", d, d);
    return p;
  }

  AttentionParams<T> make_cross_attention(const std::string& prefix, std::int64_t dq,
                                          std::int64_t dkv, int heads) {
    AttentionParams<T> p;
    p.heads = heads;
    p.norm_q = make_norm(prefix + ".norm_q", dq);
    p.norm_kv = make_norm(prefix + ".norm_kv", dkv);
    p.query = make_linear(prefix + ".query", dq, dq);
    p.key = make_linear(prefix + ".key", dkv, dq, /*bias=*/false);
    p.value = make_linear(prefix + ".value", dkv, dq);
    p.out = make_linear(prefix + ".out", dq, dq);
    return p;
  }

  BlockParams<T> make_block(const std::string& prefix, std::int64_t d, int heads) {
    BlockParams<T> p;
    p.attn = make_self_attention(prefix + ".attn", d, heads);
    p.ff.norm = make_norm(prefix + ".ff.norm", d);
    p.ff.expand = make_linear(prefix + ".ff.expand", d, cfg_.ff_multiplier * d);
    p.ff.contract = make_linear(prefix + ".ff.contract", cfg_.ff_multiplier * d, d);
    return p;
  }

  void check_latent(const LatentTokens<T>& z, const char* where) const {
    if (!z.tokens.defined() || z.tokens.rank() != 2 ||
        z.tokens.rows() != cfg_.num_queries || z.tokens.cols() != cfg_.latent_dim)
      throw ContractError(std::string(where) + ": latent token shape mismatch");
  }

  void write_time_features(double t, T* dst) const {
    const auto freqs = cfg_.fourier.frequencies();
    std::vector<double> row(static_cast<std::size_t>(cfg_.fourier.width()));
    detail::fourier_expand(t, freqs, row.data());
    for (std::size_t j = 0; j < row.size(); ++j) dst[j] = static_cast<T>(row[j]);
  }

  // Per-point feature assembly: value projection | raw values, then Fourier
  // features of each spatial axis, of t_i, and (when conditioned) of t_o.
  Tensor<T> encoder_features(const SampleSet& input, double t_i, double t_o) const {
    const std::int64_t n = input.coords.count;
    const std::int64_t fw = cfg_.fourier.width();
    const std::int64_t c = cfg_.channels;
    const std::int64_t vw = cfg_.use_proj ? cfg_.linear_projection_dim : c;
    const std::int64_t width = cfg_.encoder_in_width();
    const auto freqs = cfg_.fourier.frequencies();

    std::vector<double> ti_row(static_cast<std::size_t>(fw));
    detail::fourier_expand(t_i, freqs, ti_row.data());
    std::vector<double> to_row(static_cast<std::size_t>(fw));
    if (cfg_.use_tt) detail::fourier_expand(t_o, freqs, to_row.data());

    const T* projw = cfg_.use_proj ? proj_.data().data() : nullptr;
    std::vector<T> feat(static_cast<std::size_t>(n * width));
    std::vector<double> row(static_cast<std::size_t>(fw));
    for (std::int64_t i = 0; i < n; ++i) {
      T* dst = feat.data() + i * width;
      if (cfg_.use_proj) {
        for (std::int64_t p = 0; p < vw; ++p) {
          double acc = 0;
          for (std::int64_t ch = 0; ch < c; ++ch)
            acc += input.values[static_cast<std::size_t>(i * c + ch)] *
                   static_cast<double>(projw[ch * vw + p]);
          dst[p] = static_cast<T>(acc);
        }
      } else {
        for (std::int64_t ch = 0; ch < c; ++ch)
          dst[ch] = static_cast<T>(input.values[static_cast<std::size_t>(i * c + ch)]);
      }
      std::int64_t off = vw;
      for (int a = 0; a < cfg_.spatial_dims; ++a) {
        detail::fourier_expand(
            input.coords.data[static_cast<std::size_t>(i * cfg_.spatial_dims + a)], freqs,
            row.data());
        for (std::int64_t j = 0; j < fw; ++j) dst[off + j] = static_cast<T>(row[static_cast<std::size_t>(j)]);
        off += fw;
      }
      for (std::int64_t j = 0; j < fw; ++j) dst[off + j] = static_cast<T>(ti_row[static_cast<std::size_t>(j)]);
      off += fw;
      if (cfg_.use_tt)
        for (std::int64_t j = 0; j < fw; ++j) dst[off + j] = static_cast<T>(to_row[static_cast<std::size_t>(j)]);
    }
    return Tensor<T>::from({n, width}, std::move(feat));
  }

  ModelConfig cfg_;
  std::uint64_t seed_;
  Tensor<T> proj_;
  LinearParams<T> adapter_;
  std::vector<BlockParams<T>> cen_;
  Tensor<T> queries_;
  AttentionParams<T> enc_pool_;
  LinearParams<T> cond_;
  std::vector<BlockParams<T>> proc_;
  LinearParams<T> dec_embed_;
  AttentionParams<T> dec_pool_;
  std::vector<BlockParams<T>> cn_;
  LinearParams<T> head_;
  std::vector<std::pair<std::string, Tensor<T>>> named_;
};

}  // namespace scent

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "scent/attention.hpp"
#include "scent/fourier.hpp"
#include "scent/gradcheck.hpp"
#include "scent/rng.hpp"
#include "scent/tensor.hpp"
#include "test_util.hpp"

namespace {

using scent::Tensor;
using scent_test::randn;

// ---------- Fourier features ----------

TEST(Fourier, FrequenciesAreLinearlySpaced) {
  scent::FourierConfig cfg{2, 4.0};
  EXPECT_EQ(cfg.width(), 5);
  const auto f = cfg.frequencies();
  ASSERT_EQ(f.size(), 2u);
  EXPECT_DOUBLE_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[1], 2.0);
  scent::FourierConfig wide{12, 20.0};
  const auto g = wide.frequencies();
  EXPECT_DOUBLE_EQ(g.front(), 1.0);
  EXPECT_DOUBLE_EQ(g.back(), 10.0);
  EXPECT_NEAR(g[1] - g[0], 9.0 / 11.0, 1e-15);
  scent::FourierConfig one{1, 8.0};
  EXPECT_DOUBLE_EQ(one.frequencies()[0], 1.0);
}

TEST(Fourier, HandValuesAtHalf) {
  scent::FourierConfig cfg{2, 4.0};
  const std::vector<double> coords{0.5};
  auto feat = scent::fourier_features<double>(coords, 1, 1, cfg);
  ASSERT_EQ(feat.cols(), 5);
  EXPECT_NEAR(feat.data()[0], 1.0, 1e-12);   // sin(pi/2)
  EXPECT_NEAR(feat.data()[1], 0.0, 1e-12);   // sin(pi)
  EXPECT_NEAR(feat.data()[2], 0.0, 1e-12);   // cos(pi/2)
  EXPECT_NEAR(feat.data()[3], -1.0, 1e-12);  // cos(pi)
  EXPECT_DOUBLE_EQ(feat.data()[4], 0.5);     // identity passthrough
}

TEST(Fourier, MultiAxisLayout) {
  scent::FourierConfig cfg{1, 2.0};  // width 3: [sin(pi x), cos(pi x), x]
  const std::vector<double> coords{0.25, -0.75, 1.0, 0.0};
  auto feat = scent::fourier_features<double>(coords, 2, 2, cfg);
  ASSERT_EQ(feat.rows(), 2);
  ASSERT_EQ(feat.cols(), 6);
  // Row 0, axis 1 occupies columns 3..5.
  EXPECT_NEAR(feat.data()[3], std::sin(-0.75 * std::numbers::pi), 1e-15);
  EXPECT_DOUBLE_EQ(feat.data()[5], -0.75);
  EXPECT_DOUBLE_EQ(feat.data()[2], 0.25);
}

TEST(Fourier, Errors) {
  scent::FourierConfig cfg{0, 4.0};
  EXPECT_THROW(cfg.validate(), scent::ConfigError);
  scent::FourierConfig ok{2, 4.0};
  const std::vector<double> nan_coord{std::nan("")};
  EXPECT_THROW(scent::fourier_features<double>(nan_coord, 1, 1, ok),
               scent::ContractError);
  const std::vector<double> coords{1.0, 2.0};
  EXPECT_THROW(scent::fourier_features<double>(coords, 3, 1, ok),
               scent::ContractError);
}

// ---------- Scalar-loop attention oracle ----------

struct RefLinear {
  std::vector<double> w, b;
  std::int64_t in, out;
};

RefLinear to_ref(const scent::LinearParams<double>& p) {
  return {p.weight.data(),
          p.bias.defined() ? p.bias.data()
                           : std::vector<double>(static_cast<std::size_t>(p.weight.cols()), 0.0),
          p.weight.rows(), p.weight.cols()};
}

std::vector<double> ref_layer_norm(const std::vector<double>& x, std::int64_t n,
                                   std::int64_t d, const std::vector<double>& gamma,
                                   const std::vector<double>& beta) {
  std::vector<double> y(x.size());
  for (std::int64_t i = 0; i < n; ++i) {
    double mean = 0, var = 0;
    for (std::int64_t j = 0; j < d; ++j) mean += x[static_cast<std::size_t>(i * d + j)];
    mean /= static_cast<double>(d);
    for (std::int64_t j = 0; j < d; ++j) {
      const double e = x[static_cast<std::size_t>(i * d + j)] - mean;
      var += e * e;
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    for (std::int64_t j = 0; j < d; ++j)
      y[static_cast<std::size_t>(i * d + j)] =
          (x[static_cast<std::size_t>(i * d + j)] - mean) * inv *
              gamma[static_cast<std::size_t>(j)] +
          beta[static_cast<std::size_t>(j)];
  }
  return y;
}

std::vector<double> ref_linear(const std::vector<double>& x, std::int64_t n,
                               const RefLinear& lin) {
  std::vector<double> y(static_cast<std::size_t>(n * lin.out));
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t o = 0; o < lin.out; ++o) {
      double acc = lin.b[static_cast<std::size_t>(o)];
      for (std::int64_t k = 0; k < lin.in; ++k)
        acc += x[static_cast<std::size_t>(i * lin.in + k)] *
               lin.w[static_cast<std::size_t>(k * lin.out + o)];
      y[static_cast<std::size_t>(i * lin.out + o)] = acc;
    }
  return y;
}

// Direct realization of pre-norm multi-head cross-attention with plain loops.
std::vector<double> ref_cross_attention(const std::vector<double>& q_in,
                                        std::int64_t nq, std::int64_t dq,
                                        const std::vector<double>& kv_in,
                                        std::int64_t nkv, std::int64_t dkv,
                                        const scent::AttentionParams<double>& p) {
  const auto nq_normed = ref_layer_norm(q_in, nq, dq, p.norm_q.gamma.data(),
                                        p.norm_q.beta.data());
  const auto nkv_normed = ref_layer_norm(kv_in, nkv, dkv, p.norm_kv.gamma.data(),
                                         p.norm_kv.beta.data());
  const auto q = ref_linear(nq_normed, nq, to_ref(p.query));
  const auto k = ref_linear(nkv_normed, nkv, to_ref(p.key));
  const auto v = ref_linear(nkv_normed, nkv, to_ref(p.value));
  const std::int64_t d = p.query.weight.cols();
  const std::int64_t hd = d / p.heads;
  std::vector<double> merged(static_cast<std::size_t>(nq * d));
  for (int h = 0; h < p.heads; ++h) {
    const std::int64_t c0 = h * hd;
    for (std::int64_t i = 0; i < nq; ++i) {
      std::vector<double> logits(static_cast<std::size_t>(nkv));
      double mx = -1e300;
      for (std::int64_t j = 0; j < nkv; ++j) {
        double acc = 0;
        for (std::int64_t e = 0; e < hd; ++e)
          acc += q[static_cast<std::size_t>(i * d + c0 + e)] *
                 k[static_cast<std::size_t>(j * d + c0 + e)];
        logits[static_cast<std::size_t>(j)] = acc / std::sqrt(static_cast<double>(hd));
        mx = std::max(mx, logits[static_cast<std::size_t>(j)]);
      }
      double z = 0;
      for (auto& l : logits) {
        l = std::exp(l - mx);
        z += l;
      }
      for (std::int64_t e = 0; e < hd; ++e) {
        double acc = 0;
        for (std::int64_t j = 0; j < nkv; ++j)
          acc += (logits[static_cast<std::size_t>(j)] / z) *
                 v[static_cast<std::size_t>(j * d + c0 + e)];
        merged[static_cast<std::size_t>(i * d + c0 + e)] = acc;
      }
    }
  }
  auto out = ref_linear(merged, nq, to_ref(p.out));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += q_in[i];
  return out;
}

TEST(Attention, MatchesScalarLoopOracle) {
  scent::RngStream rng(21, "attn-oracle");
  const std::int64_t nq = 5, nkv = 7, d = 8, dkv = 6;
  auto p = scent_test::random_attention<double>(d, dkv, 2, rng);
  auto q = randn<double>({nq, d}, rng, 1.0, false);
  auto kv = randn<double>({nkv, dkv}, rng, 1.0, false);
  auto y = scent::cross_attention(q, kv, p);
  const auto ref = ref_cross_attention(q.data(), nq, d, kv.data(), nkv, dkv, p);
  ASSERT_EQ(y.data().size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i)
    EXPECT_NEAR(y.data()[i], ref[i], 1e-12) << "index " << i;
}

TEST(Attention, SingleHeadMatchesOracle) {
  scent::RngStream rng(22, "attn-oracle-1h");
  const std::int64_t n = 6, d = 4;
  auto p = scent_test::random_attention<double>(d, d, 1, rng);
  auto x = randn<double>({n, d}, rng, 1.0, false);
  auto y = scent::cross_attention(x, x, p);
  const auto ref = ref_cross_attention(x.data(), n, d, x.data(), n, d, p);
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.data()[i], ref[i], 1e-12);
}

TEST(Attention, SelfAttentionSharesNormWithCross) {
  scent::RngStream rng(23, "self");
  const std::int64_t n = 6, d = 8;
  auto p = scent_test::random_attention<double>(d, d, 2, rng, /*shared_norm=*/true);
  auto x = randn<double>({n, d}, rng, 1.0, false);
  auto a = scent::self_attention(x, p);
  auto b = scent::cross_attention(x, x, p);
  EXPECT_EQ(a.data(), b.data());
}

TEST(Attention, ZeroOutProjectionIsIdentity) {
  scent::RngStream rng(24, "resid");
  const std::int64_t n = 4, d = 6;
  auto p = scent_test::random_attention<double>(d, d, 3, rng);
  p.out.weight = Tensor<double>::zeros({d, d});
  p.out.bias = Tensor<double>::zeros({d});
  auto x = randn<double>({n, d}, rng, 1.0, false);
  auto y = scent::self_attention(x, p);
  EXPECT_EQ(y.data(), x.data());
}

// Self-attention commutes with row permutations of the token set.
TEST(Attention, PermutationEquivariance) {
  scent::RngStream rng(25, "equiv");
  const std::int64_t n = 9, d = 6;
  auto p = scent_test::random_attention<double>(d, d, 2, rng, true);
  auto x = randn<double>({n, d}, rng, 1.0, false);
  auto perm = rng.permutation(n);
  auto xp = scent::gather_rows(x, perm);
  auto y = scent::self_attention(x, p);
  auto yp = scent::self_attention(xp, p);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto src = perm[static_cast<std::size_t>(i)];
    for (std::int64_t j = 0; j < d; ++j)
      EXPECT_NEAR(yp.data()[static_cast<std::size_t>(i * d + j)],
                  y.data()[static_cast<std::size_t>(src * d + j)], 1e-12);
  }
}

TEST(Attention, ContractErrors) {
  scent::RngStream rng(26, "err");
  auto p = scent_test::random_attention<double>(6, 6, 4, rng);  // 6 % 4 != 0
  auto x = randn<double>({3, 6}, rng, 1.0, false);
  EXPECT_THROW(scent::self_attention(x, p), scent::ContractError);
  auto ok = scent_test::random_attention<double>(6, 6, 2, rng);
  auto empty = Tensor<double>::zeros({0, 6});
  EXPECT_THROW(scent::cross_attention(x, empty, ok), scent::ContractError);
  EXPECT_THROW(scent::cross_attention(empty, x, ok), scent::ContractError);
}

TEST(FeedForward, GradcheckAndResidual) {
  scent::RngStream rng(27, "ff");
  const std::int64_t n = 4, d = 6;
  auto p = scent_test::random_ff<double>(d, 2 * d, rng);
  auto x = randn<double>({n, d}, rng);
  auto fn = [&] { return scent::mean_all(scent::feed_forward(x, p)); };
  auto params = scent_test::ff_param_list(p);
  params.push_back(x);
  EXPECT_LT(scent::gradcheck(fn, params).max_rel_error, 1e-6);
  // Zero contract weights => pure residual.
  auto q = p;
  q.contract.weight = Tensor<double>::zeros({2 * d, d});
  q.contract.bias = Tensor<double>::zeros({d});
  scent::NoGradGuard no_grad;
  EXPECT_EQ(scent::feed_forward(x, q).data(), x.data());
}

TEST(Attention, CrossAttentionGradcheck) {
  scent::RngStream rng(28, "attn-grad");
  const std::int64_t nq = 3, nkv = 5, d = 4, dkv = 6;
  auto p = scent_test::random_attention<double>(d, dkv, 2, rng);
  auto q = randn<double>({nq, d}, rng);
  auto kv = randn<double>({nkv, dkv}, rng);
  auto fn = [&] { return scent::mean_all(scent::cross_attention(q, kv, p)); };
  auto params = scent_test::attention_param_list(p);
  params.push_back(q);
  params.push_back(kv);
  scent::GradcheckOptions opt;
  opt.samples = 200;
  EXPECT_LT(scent::gradcheck(fn, params, opt).max_rel_error, 1e-4);
}

// ---------- sparse blocks ----------

TEST(SparseBlock, GroupsOneIsExactlyDense) {
  scent::RngStream rng(29, "sparse1");
  const std::int64_t n = 7, d = 6;
  scent::BlockParams<double> p{scent_test::random_attention<double>(d, d, 2, rng, true),
                               scent_test::random_ff<double>(d, 4 * d, rng)};
  auto x = randn<double>({n, d}, rng, 1.0, false);
  scent::RngStream block_rng(0, "blk");
  auto sparse = scent::sparse_block(x, 1, p, block_rng);
  auto dense = scent::dense_block(x, p);
  EXPECT_EQ(sparse.data(), dense.data());
  // No RNG state consumed for the dense path.
  scent::RngStream fresh(0, "blk");
  EXPECT_EQ(block_rng.next_u32(), fresh.next_u32());
}

TEST(SparseBlock, OutputShapeAndDeterminism) {
  scent::RngStream rng(30, "sparse2");
  const std::int64_t n = 10, d = 6;
  scent::BlockParams<double> p{scent_test::random_attention<double>(d, d, 3, rng, true),
                               scent_test::random_ff<double>(d, 2 * d, rng)};
  auto x = randn<double>({n, d}, rng, 1.0, false);
  scent::RngStream r1(5, "blk"), r2(5, "blk");
  auto y1 = scent::sparse_block(x, 3, p, r1);
  auto y2 = scent::sparse_block(x, 3, p, r2);
  EXPECT_EQ(y1.rows(), n);
  EXPECT_EQ(y1.cols(), d);
  EXPECT_EQ(y1.data(), y2.data());
  scent::RngStream r3(6, "blk");
  auto y3 = scent::sparse_block(x, 3, p, r3);
  EXPECT_NE(y1.data(), y3.data());  // different grouping, different result
}

// With the out-projection and FF contract weights zeroed the block is the
// identity regardless of grouping, which pins the permute/split/unpermute
// bookkeeping.
TEST(SparseBlock, InversePermutationRestoresOrder) {
  scent::RngStream rng(31, "sparse3");
  const std::int64_t n = 11, d = 4;
  scent::BlockParams<double> p{scent_test::random_attention<double>(d, d, 2, rng, true),
                               scent_test::random_ff<double>(d, 2 * d, rng)};
  p.attn.out.weight = Tensor<double>::zeros({d, d});
  p.attn.out.bias = Tensor<double>::zeros({d});
  p.ff.contract.weight = Tensor<double>::zeros({2 * d, d});
  p.ff.contract.bias = Tensor<double>::zeros({d});
  auto x = randn<double>({n, d}, rng, 1.0, false);
  scent::RngStream r(7, "blk");
  auto y = scent::sparse_block(x, 4, p, r);
  EXPECT_EQ(y.data(), x.data());
}

TEST(SparseBlock, UnevenGroupsGradcheck) {
  scent::RngStream rng(32, "sparse4");
  const std::int64_t n = 7, d = 4;  // 7 tokens in 3 groups: sizes 3,2,2
  scent::BlockParams<double> p{scent_test::random_attention<double>(d, d, 2, rng, true),
                               scent_test::random_ff<double>(d, 2 * d, rng)};
  auto x = randn<double>({n, d}, rng);
  auto fn = [&] {
    scent::RngStream r(11, "blk");  // same grouping on every call
    return scent::mean_all(scent::sparse_block(x, 3, p, r));
  };
  std::vector<Tensor<double>> params = scent_test::attention_param_list(p.attn, true);
  auto ffp = scent_test::ff_param_list(p.ff);
  params.insert(params.end(), ffp.begin(), ffp.end());
  params.push_back(x);
  EXPECT_LT(scent::gradcheck(fn, params).max_rel_error, 1e-4);
}

TEST(SparseBlock, ContractErrors) {
  scent::RngStream rng(33, "sparse5");
  const std::int64_t d = 4;
  scent::BlockParams<double> p{scent_test::random_attention<double>(d, d, 2, rng, true),
                               scent_test::random_ff<double>(d, 2 * d, rng)};
  auto x = randn<double>({3, d}, rng, 1.0, false);
  scent::RngStream r(0, "blk");
  EXPECT_THROW(scent::sparse_block(x, 0, p, r), scent::ContractError);
  EXPECT_THROW(scent::sparse_block(x, 4, p, r), scent::ContractError);
}

}  // namespace

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "scent/cost_model.hpp"
#include "scent/forecast.hpp"
#include "scent/interpolate.hpp"
#include "scent/rng.hpp"

namespace {

using scent::CoordSet;
using scent::CostFamily;
using scent::CostModelParams;
using scent::ModelConfig;
using scent::RngStream;
using scent::SampleSet;
using scent::ScentModel;

ModelConfig tiny_config() {
  ModelConfig c;
  c.embed_dim = 8;
  c.latent_dim = 8;
  c.linear_projection_dim = 4;
  c.num_queries = 4;
  c.n_enc = 1;
  c.n_proc = 1;
  c.n_dec = 1;
  c.enc_heads = 2;
  c.proc_heads = 2;
  c.dec_heads = 2;
  c.sparse_groups = 2;
  c.ff_multiplier = 2;
  c.fourier.bands = 2;
  c.fourier.max_resolution = 4.0;
  c.time_horizon = 3.0;
  return c;
}

SampleSet random_samples(std::int64_t n, double time, std::uint64_t seed,
                         const char* tag = "samples") {
  RngStream rng(seed, tag);
  SampleSet s;
  s.coords.count = n;
  s.coords.dims = 2;
  s.coords.data.resize(static_cast<std::size_t>(2 * n));
  for (auto& v : s.coords.data) v = rng.uniform(-1.0, 1.0);
  s.values.resize(static_cast<std::size_t>(n));
  for (auto& v : s.values) v = rng.gaussian();
  s.time = time;
  return s;
}

CoordSet random_queries(std::int64_t n, std::uint64_t seed) {
  RngStream rng(seed, "queries");
  CoordSet q;
  q.count = n;
  q.dims = 2;
  q.data.resize(static_cast<std::size_t>(2 * n));
  for (auto& v : q.data) v = rng.uniform(-1.0, 1.0);
  return q;
}

// Rejection-sampled point set with a minimum pairwise separation.
SampleSet separated_samples(std::int64_t n, double min_sep, std::uint64_t seed) {
  RngStream rng(seed, "separated");
  SampleSet s;
  s.coords.count = n;
  s.coords.dims = 2;
  s.coords.data.reserve(static_cast<std::size_t>(2 * n));
  while (static_cast<std::int64_t>(s.coords.data.size()) < 2 * n) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    bool ok = true;
    for (std::size_t j = 0; j + 1 < s.coords.data.size(); j += 2) {
      const double dx = s.coords.data[j] - x;
      const double dy = s.coords.data[j + 1] - y;
      if (dx * dx + dy * dy < min_sep * min_sep) {
        ok = false;
        break;
      }
    }
    if (ok) {
      s.coords.data.push_back(x);
      s.coords.data.push_back(y);
    }
  }
  s.values.resize(static_cast<std::size_t>(n));
  for (auto& v : s.values) v = rng.gaussian();
  return s;
}

// ---- plan_wuf ----

TEST(PlanWuf, PinnedExamples) {
  auto p = scent::plan_wuf(0, 7, 3);
  EXPECT_EQ(p.hops, (std::vector<double>{3, 3, 1}));

  p = scent::plan_wuf(2, 5, 3);
  EXPECT_EQ(p.hops, (std::vector<double>{3}));

  p = scent::plan_wuf(0, 20, 3);
  EXPECT_EQ(p.hops.size(), 7u);  // 6 full warps + remainder 2
  EXPECT_DOUBLE_EQ(p.hops.back(), 2.0);

  p = scent::plan_wuf(1.5, 1.5, 3);
  EXPECT_TRUE(p.hops.empty());

  p = scent::plan_wuf(0, 7.5, 3);
  EXPECT_EQ(p.hops.size(), 3u);
  EXPECT_DOUBLE_EQ(p.hops.back(), 1.5);
}

TEST(PlanWuf, HopCountMatchesCeilForAllSpans) {
  for (std::int64_t t_h : {1, 3, 5}) {
    for (std::int64_t span = 0; span <= 100; ++span) {
      auto p = scent::plan_wuf(0, static_cast<double>(span), static_cast<double>(t_h));
      const auto expected = (span + t_h - 1) / t_h;  // ceil for integers
      EXPECT_EQ(static_cast<std::int64_t>(p.hops.size()), expected)
          << "span " << span << " t_h " << t_h;
      double sum = 0;
      for (double h : p.hops) {
        EXPECT_GT(h, 0.0);
        EXPECT_LE(h, static_cast<double>(t_h) + 1e-9);
        sum += h;
      }
      EXPECT_NEAR(sum, static_cast<double>(span), 1e-9);
    }
  }
}

TEST(PlanWuf, RejectsBadArguments) {
  EXPECT_THROW(scent::plan_wuf(0, 1, 0), scent::ContractError);
  EXPECT_THROW(scent::plan_wuf(0, 1, -2), scent::ContractError);
  EXPECT_THROW(scent::plan_wuf(3, 2, 1), scent::ContractError);
}

// ---- warp-unrolling forecast ----

TEST(WufForecast, CallCountEqualsCeilSpanOverHorizon) {
  ScentModel<double> model(tiny_config(), 3);
  auto input = random_samples(12, 0.0, 7);
  auto queries = random_queries(5, 8);
  for (std::int64_t span = 1; span <= 20; ++span) {
    RngStream rng(9, "wuf", static_cast<std::uint64_t>(span));
    auto res = scent::wuf_forecast(model, input, static_cast<double>(span), queries,
                                   6, 6, rng);
    EXPECT_EQ(res.model_calls, (span + 2) / 3) << "span " << span;
    EXPECT_EQ(res.output.coords.count, 5);
    EXPECT_DOUBLE_EQ(res.output.time, static_cast<double>(span));
    for (double v : res.output.values) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(WufForecast, SingleHopEqualsDirectForward) {
  ScentModel<double> model(tiny_config(), 3);
  auto input = random_samples(12, 1.0, 7);
  auto queries = random_queries(5, 8);

  RngStream r1(4, "one-hop");
  auto res = scent::wuf_forecast(model, input, 3.0, queries, 6, 6, r1);
  EXPECT_EQ(res.model_calls, 1);

  RngStream r2(4, "one-hop");
  scent::NoGradGuard ng;
  auto direct = model.forward(input, 3.0, queries, r2);
  ASSERT_EQ(res.output.values.size(), direct.data().size());
  for (std::size_t i = 0; i < direct.data().size(); ++i)
    EXPECT_EQ(res.output.values[i], direct.data()[i]);
}

TEST(WufForecast, ZeroSpanRunsOneReconstructionPass) {
  ScentModel<double> model(tiny_config(), 3);
  auto input = random_samples(12, 2.0, 7);
  auto queries = random_queries(5, 8);
  RngStream rng(4, "zero-span");
  auto res = scent::wuf_forecast(model, input, 2.0, queries, 6, 6, rng);
  EXPECT_EQ(res.model_calls, 1);
  EXPECT_DOUBLE_EQ(res.output.time, 2.0);
}

TEST(WufForecast, ShorterPlanningHorizonAllowedLongerRejected) {
  ScentModel<double> model(tiny_config(), 3);
  auto input = random_samples(12, 0.0, 7);
  auto queries = random_queries(5, 8);
  RngStream rng(4, "short-th");
  auto res = scent::wuf_forecast(model, input, 4.0, queries, 6, 6, rng, 2.0);
  EXPECT_EQ(res.model_calls, 2);  // hops [2, 2]
  RngStream rng2(4, "long-th");
  EXPECT_THROW(scent::wuf_forecast(model, input, 4.0, queries, 6, 6, rng2, 5.0),
               scent::ContractError);
}

// ---- nearest neighbor ----

TEST(NnInterpolate, ExactAtSampleLocations) {
  auto s = random_samples(30, 0.0, 5);
  CoordSet q;
  q.count = s.coords.count;
  q.dims = 2;
  q.data = s.coords.data;
  auto out = scent::nn_interpolate(s, q);
  for (std::int64_t i = 0; i < q.count; ++i)
    EXPECT_EQ(out[static_cast<std::size_t>(i)], s.values[static_cast<std::size_t>(i)]);
}

TEST(NnInterpolate, TieBreaksToLowestIndex) {
  SampleSet s;
  s.coords.count = 2;
  s.coords.dims = 2;
  s.coords.data = {-0.5, 0.0, 0.5, 0.0};  // equidistant from the origin
  s.values = {10.0, 20.0};
  CoordSet q;
  q.count = 1;
  q.dims = 2;
  q.data = {0.0, 0.0};
  EXPECT_EQ(scent::nn_interpolate(s, q)[0], 10.0);
}

TEST(NnInterpolate, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = random_samples(50, 0.0, 100 + seed);
    auto q = random_queries(20, 200 + seed);
    auto out = scent::nn_interpolate(s, q);
    for (std::int64_t i = 0; i < q.count; ++i) {
      // Independent oracle: materialize all distances, take min_element.
      std::vector<double> d(static_cast<std::size_t>(s.coords.count));
      for (std::int64_t j = 0; j < s.coords.count; ++j) {
        const double dx = q.data[static_cast<std::size_t>(2 * i)] -
                          s.coords.data[static_cast<std::size_t>(2 * j)];
        const double dy = q.data[static_cast<std::size_t>(2 * i + 1)] -
                          s.coords.data[static_cast<std::size_t>(2 * j + 1)];
        d[static_cast<std::size_t>(j)] = std::hypot(dx, dy);
      }
      const auto best = std::min_element(d.begin(), d.end()) - d.begin();
      EXPECT_EQ(out[static_cast<std::size_t>(i)],
                s.values[static_cast<std::size_t>(best)]);
    }
  }
}

TEST(NnInterpolate, RejectsEmptyAndMismatched) {
  SampleSet s;
  s.coords.count = 0;
  s.coords.dims = 2;
  CoordSet q = random_queries(2, 1);
  EXPECT_THROW(scent::nn_interpolate(s, q), scent::ContractError);
  auto ok = random_samples(3, 0.0, 1);
  CoordSet q3;
  q3.count = 1;
  q3.dims = 3;
  q3.data = {0.0, 0.0, 0.0};
  EXPECT_THROW(scent::nn_interpolate(ok, q3), scent::ContractError);
}

// ---- RBF ----

TEST(RbfInterpolate, ReproducesNodeValues) {
  for (std::int64_t n : {5, 40, 200}) {
    auto s = separated_samples(n, 0.08, 17 + static_cast<std::uint64_t>(n));
    CoordSet q;
    q.count = n;
    q.dims = 2;
    q.data = s.coords.data;
    auto out = scent::rbf_interpolate(s, q);
    double worst = 0;
    for (std::int64_t i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(out[static_cast<std::size_t>(i)] -
                                       s.values[static_cast<std::size_t>(i)]));
    EXPECT_LE(worst, 1e-6) << "n = " << n;
  }
}

TEST(RbfInterpolate, ConstantFieldStaysConstant) {
  auto s = separated_samples(60, 0.08, 23);
  std::fill(s.values.begin(), s.values.end(), 3.75);
  auto q = random_queries(100, 31);
  auto out = scent::rbf_interpolate(s, q);
  for (double v : out) EXPECT_NEAR(v, 3.75, 1e-6);
}

TEST(RbfInterpolate, SingleSampleClosedForm) {
  SampleSet s;
  s.coords.count = 1;
  s.coords.dims = 2;
  s.coords.data = {0.1, -0.2};
  s.values = {2.5};
  CoordSet q;
  q.count = 2;
  q.dims = 2;
  q.data = {0.1, -0.2, 0.4, 0.3};
  auto out = scent::rbf_interpolate(s, q);
  EXPECT_NEAR(out[0], 2.5, 1e-6);  // at the node itself
  const double r2 = 0.3 * 0.3 + 0.5 * 0.5;
  EXPECT_NEAR(out[1], 2.5 * std::exp(-r2 / 2.0), 1e-6);  // fallback l = 1
}

TEST(RbfInterpolate, SmoothFieldBeatsNearestNeighbor) {
  auto s = separated_samples(150, 0.08, 41);
  auto f = [](double x, double y) { return std::sin(2.3 * x + 0.4) * std::cos(1.7 * y); };
  for (std::int64_t i = 0; i < s.coords.count; ++i)
    s.values[static_cast<std::size_t>(i)] =
        f(s.coords.data[static_cast<std::size_t>(2 * i)],
          s.coords.data[static_cast<std::size_t>(2 * i + 1)]);
  RngStream rng(43, "interior");
  CoordSet q;
  q.count = 300;
  q.dims = 2;
  q.data.resize(600);
  for (auto& v : q.data) v = rng.uniform(-0.9, 0.9);
  auto rbf = scent::rbf_interpolate(s, q);
  auto nn = scent::nn_interpolate(s, q);
  double rbf_se = 0, nn_se = 0;
  for (std::int64_t i = 0; i < q.count; ++i) {
    const double truth = f(q.data[static_cast<std::size_t>(2 * i)],
                           q.data[static_cast<std::size_t>(2 * i + 1)]);
    rbf_se += (rbf[static_cast<std::size_t>(i)] - truth) *
              (rbf[static_cast<std::size_t>(i)] - truth);
    nn_se += (nn[static_cast<std::size_t>(i)] - truth) *
             (nn[static_cast<std::size_t>(i)] - truth);
  }
  EXPECT_LT(rbf_se, nn_se);
}

TEST(RbfInterpolate, DuplicateCoordinatesRejected) {
  SampleSet s;
  s.coords.count = 3;
  s.coords.dims = 2;
  s.coords.data = {0.0, 0.0, 0.5, 0.5, 0.0, 0.0};
  s.values = {1.0, 2.0, 3.0};
  auto q = random_queries(2, 1);
  EXPECT_THROW(scent::rbf_interpolate(s, q), scent::ContractError);
}

// ---- persistence ----

TEST(Persistence, EqualsNearestNeighborByDefinition) {
  auto s = random_samples(30, 0.0, 5);
  auto q = random_queries(40, 6);
  EXPECT_EQ(scent::persistence_forecast(s, q), scent::nn_interpolate(s, q));
  // Time on the input is irrelevant to the output.
  auto s_late = s;
  s_late.time = 17.0;
  EXPECT_EQ(scent::persistence_forecast(s_late, q), scent::persistence_forecast(s, q));
}

// ---- cost model ----

constexpr double kCostTol = 0.01;  // published values quoted to 3 significant digits

TEST(CostModel, ReproducesPublishedTable) {
  const struct {
    CostFamily family;
    std::int64_t unroll;
    double published;
  } rows[] = {
      {CostFamily::Fno, 1, 1.28e8},   {CostFamily::Fno, 20, 2.56e9},
      {CostFamily::Aroma, 1, 2.29e8}, {CostFamily::Aroma, 20, 3.09e9},
      {CostFamily::Scent, 1, 8.04e8}, {CostFamily::Scent, 7, 5.63e9},
  };
  for (const auto& row : rows) {
    const double c = scent::cost_model(scent::paper_cost_params(row.family, row.unroll));
    EXPECT_NEAR(c / row.published, 1.0, kCostTol)
        << scent::cost_family_name(row.family) << " unroll " << row.unroll;
  }
}

TEST(CostModel, ReproducesPublishedRelativeScales) {
  const double fno1 = scent::cost_model(scent::paper_cost_params(CostFamily::Fno, 1));
  const double fno20 = scent::cost_model(scent::paper_cost_params(CostFamily::Fno, 20));
  EXPECT_NEAR(scent::cost_model(scent::paper_cost_params(CostFamily::Aroma, 1)) / fno1,
              1.78, 1.78 * kCostTol);
  EXPECT_NEAR(scent::cost_model(scent::paper_cost_params(CostFamily::Scent, 1)) / fno1,
              6.28, 6.28 * kCostTol);
  EXPECT_NEAR(scent::cost_model(scent::paper_cost_params(CostFamily::Aroma, 20)) / fno20,
              1.21, 1.21 * kCostTol);
  EXPECT_NEAR(scent::cost_model(scent::paper_cost_params(CostFamily::Scent, 7)) / fno20,
              2.20, 2.20 * kCostTol);
}

TEST(CostModel, ExactLinearity) {
  const auto s1 = scent::paper_cost_params(CostFamily::Scent, 1);
  const auto s7 = scent::paper_cost_params(CostFamily::Scent, 7);
  EXPECT_DOUBLE_EQ(scent::cost_model(s7), 7.0 * scent::cost_model(s1));
  const auto f1 = scent::paper_cost_params(CostFamily::Fno, 1);
  const auto f20 = scent::paper_cost_params(CostFamily::Fno, 20);
  EXPECT_DOUBLE_EQ(scent::cost_model(f20), 20.0 * scent::cost_model(f1));
}

TEST(CostModel, FnoClosedFormSpotCheck) {
  // Hand evaluation: T(L N log2(N) C + L N d^2 C) at the published point.
  CostModelParams p = scent::paper_cost_params(CostFamily::Fno, 1);
  const double logterm = 4.0 * 2000.0 * std::log2(2000.0) * 60.0;
  const double matterm = 4.0 * 2000.0 * 16.0 * 16.0 * 60.0;
  EXPECT_DOUBLE_EQ(scent::cost_model(p), logterm + matterm);
}

TEST(CostModel, MissingParameterNamesIt) {
  CostModelParams p = scent::paper_cost_params(CostFamily::Fno, 1);
  p.C = 0;
  try {
    scent::cost_model(p);
    FAIL() << "expected ConfigError";
  } catch (const scent::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'C'"), std::string::npos);
  }
  CostModelParams a = scent::paper_cost_params(CostFamily::Aroma, 1);
  a.L2 = 0;
  try {
    scent::cost_model(a);
    FAIL() << "expected ConfigError";
  } catch (const scent::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'L2'"), std::string::npos);
  }
}

TEST(CostModel, FamilyNamesRoundTrip) {
  for (auto f : {CostFamily::Fno, CostFamily::Aroma, CostFamily::Scent})
    EXPECT_EQ(scent::cost_family_from_string(scent::cost_family_name(f)), f);
  EXPECT_THROW(scent::cost_family_from_string("mlp"), scent::ConfigError);
}

}  // namespace

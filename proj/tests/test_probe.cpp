#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dgs/probe.hpp"

namespace dgs::probe {
namespace {

TEST(CrossEntropy, KnownValues) {
  const std::vector<double> t{0, 1, 0}, p{0.2, 0.7, 0.1};
  EXPECT_NEAR(cross_entropy(t, p), 0.356675, 1e-6);
  EXPECT_NEAR(cross_entropy(t, p), -std::log(0.7), 1e-15);
  const std::vector<double> u{1.0 / 3, 1.0 / 3, 1.0 / 3};
  EXPECT_NEAR(cross_entropy(t, u), std::log(3.0), 1e-9);
  EXPECT_NEAR(cross_entropy(t, u), 1.098612, 1e-6);
}

TEST(CrossEntropy, ClampsZeroProbability) {
  const std::vector<double> t{1, 0}, p{0, 1};
  EXPECT_NEAR(cross_entropy(t, p), -std::log(1e-12), 1e-9);
  EXPECT_TRUE(std::isfinite(cross_entropy(t, p)));
}

TEST(CrossEntropy, InputValidation) {
  const std::vector<double> t{0, 1, 0};
  try {
    cross_entropy(t, std::vector<double>{0.5, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dimension_mismatch);
  }
  EXPECT_THROW(cross_entropy(t, std::vector<double>{0.5, 0.6, 0.1}), Error);
  EXPECT_THROW(cross_entropy(t, std::vector<double>{-0.1, 1.0, 0.1}), Error);
}

TEST(Softmax, StableForLargeLogits) {
  const auto p = softmax(std::vector<double>{1000, 1000, 999});
  const double e = std::exp(-1.0);
  EXPECT_NEAR(p[0], 1 / (2 + e), 1e-15);
  EXPECT_NEAR(p[2], e / (2 + e), 1e-15);
  const auto q = softmax(std::vector<double>{-1e4, 0});
  EXPECT_EQ(q[1], 1.0);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + rng() % 5;
    std::vector<double> z(k);
    for (auto& v : z) v = nd(rng);
    const auto t = one_hot(rng() % k, k);
    const auto g = logit_gradient(t, z);
    const auto loss = [&](std::vector<double> zz) { return cross_entropy(t, softmax(zz)); };
    for (std::size_t i = 0; i < k; ++i) {
      const double h = 1e-5;
      auto zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double num = (loss(zp) - loss(zm)) / (2 * h);
      EXPECT_LE(std::abs(num - g[i]), 1e-6 * std::max(1.0, std::abs(g[i]))) << trial << ":" << i;
    }
  }
}

TEST(Features, StaticSnippetIsAllZeroMotion) {
  PlanarRgb img{GrayImage(8, 8, 50), GrayImage(8, 8, 50), GrayImage(8, 8, 50)};
  const auto f = extract_features(img);
  for (double v : f) EXPECT_EQ(v, 0.0);
}

TEST(Features, HandComputed) {
  PlanarRgb img{GrayImage(4, 1, 0), GrayImage(4, 1, 0), GrayImage(4, 1, 0)};
  img.r.pixels = {0, 100, 0, 3};
  img.g.pixels = {0, 50, 20, 3};
  img.b.pixels = {0, 0, 40, 0};
  const auto f = extract_features(img);
  EXPECT_DOUBLE_EQ(f[0], (0 + 100 + 40 + 3) / 4.0);
  EXPECT_DOUBLE_EQ(f[1], 0.5);
  EXPECT_DOUBLE_EQ(f[2], (100 + 40) / 2.0);
  EXPECT_DOUBLE_EQ(f[3], (0 + 0) / 2.0);
  EXPECT_DOUBLE_EQ(f[4], std::hypot(2.0, 1.0) / std::hypot(4.0, 1.0));
  EXPECT_DOUBLE_EQ(f[5], std::log(3.0));
}

std::vector<Sample> separable(std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.3);
  std::vector<Sample> out;
  for (std::uint32_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      Sample s;
      for (auto& v : s.x) v = nd(rng);
      s.x[0] += 2.0 * c;
      s.x[3] = 7.0;  // constant feature
      s.label = c;
      out.push_back(s);
    }
  return out;
}

TEST(Train, LearnsSeparableData) {
  const auto train = separable(40, 1), val = separable(20, 2);
  const auto r = train_softmax(train, val, 3, {300, 0.5, 0});
  ASSERT_EQ(r.curve.size(), 300u);
  EXPECT_LT(r.curve.back().train, r.curve.front().train);
  EXPECT_LT(r.curve.front().train, std::log(3.0));
  const auto ev = evaluate(r.model, val);
  EXPECT_GE(ev.accuracy, 0.95);
  EXPECT_EQ(ev.count, 60u);
  std::size_t total = 0;
  for (const auto& row : ev.confusion)
    for (auto c : row) total += c;
  EXPECT_EQ(total, 60u);
  EXPECT_EQ(r.model.stddev[3], 1.0);
}

TEST(Train, DeterministicAndLossNonIncreasing) {
  const auto train = separable(30, 5);
  const auto a = train_softmax(train, {}, 3, {100, 0.1, 0});
  const auto b = train_softmax(train, {}, 3, {100, 0.1, 0});
  EXPECT_EQ(a.model.weights, b.model.weights);
  for (std::size_t i = 1; i < a.curve.size(); ++i) EXPECT_LE(a.curve[i].train, a.curve[i - 1].train + 1e-12);
  EXPECT_TRUE(std::isnan(a.curve[0].val));
}

TEST(Train, MissingClassIsDegenerate) {
  auto train = separable(10, 3);
  std::erase_if(train, [](const Sample& s) { return s.label == 2; });
  try {
    train_softmax(train, {}, 3, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_data);
  }
  EXPECT_THROW(evaluate(SoftmaxModel{}, {}), Error);
}

TEST(Model, SaveLoadPreservesPredictions) {
  const auto train = separable(20, 9);
  const auto r = train_softmax(train, {}, 3, {50, 0.3, 0});
  std::stringstream s;
  r.model.save(s);
  const auto m = SoftmaxModel::load(s);
  for (const auto& smp : train) {
    const auto p = r.model.predict_proba(smp.x), q = m.predict_proba(smp.x);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(p[c], q[c]);
  }
  std::istringstream bad("something else");
  EXPECT_THROW(SoftmaxModel::load(bad), Error);
}

TEST(Curve, CsvLayout) {
  std::vector<EpochLoss> c{{1, 1.5, 2.0}, {2, 1.25, std::nan("")}};
  std::ostringstream out;
  write_curve_csv(out, c);
  EXPECT_EQ(out.str(), "epoch,train_loss,val_loss\n1,1.5,2\n2,1.25,\n");
}

}  // namespace
}  // namespace dgs::probe

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "roughstop/error.hpp"
#include "roughstop/forecaster.hpp"
#include "roughstop/gbt.hpp"

using namespace roughstop;

namespace {

Matrix random_features(std::size_t n, std::size_t p, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) x(i, j) = u(g);
  return x;
}

std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z(0, 0.03);
  std::vector<double> h(n);
  double v = 0.4;
  for (auto& x : h) {
    v = 0.4 + phi * (v - 0.4) + z(g);
    x = std::clamp(v, 0.0, 1.0);
  }
  return h;
}

}  // namespace

TEST(Gbt, ConstantTargetsPredictConstant) {
  std::mt19937_64 g(1);
  const auto x = random_features(40, 3, g);
  const std::vector<double> y(40, 0.37);
  const auto m = fit_gbt(x, y, GbtConfig{});
  EXPECT_EQ(m.base_prediction, 0.37);
  EXPECT_EQ(m.trees.size(), 100u);
  for (const auto& t : m.trees)
    for (const auto& n : t.nodes())
      if (n.is_leaf()) EXPECT_EQ(n.value, 0.0);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(m.predict(x.row(i)), 0.37);
}

TEST(Gbt, SingleSplitMatchesExhaustiveSearch) {
  const std::vector<double> xs{0.1, 0.2, 0.3, 0.7, 0.8, 0.9};
  const std::vector<double> ys{0.2, 0.2, 0.2, 0.8, 0.8, 0.8};
  Matrix x(6, 1);
  for (std::size_t i = 0; i < 6; ++i) x(i, 0) = xs[i];
  const auto m = fit_gbt(x, ys, GbtConfig{1, 1.0, 1, 2});
  ASSERT_EQ(m.trees.size(), 1u);
  const auto& nodes = m.trees[0].nodes();
  const auto oracle_split = oracle::best_split(xs, ys, 2);
  EXPECT_NEAR(nodes[0].threshold, 0.5, 1e-15);
  EXPECT_NEAR(nodes[0].threshold, oracle_split.threshold, 1e-15);
  EXPECT_NEAR(m.base_prediction, 0.5, 1e-15);
  EXPECT_NEAR(nodes[nodes[0].left].value, -0.3, 1e-15);
  EXPECT_NEAR(nodes[nodes[0].right].value, 0.3, 1e-15);
  EXPECT_NEAR(nodes[nodes[0].left].value + m.base_prediction, oracle_split.left_mean, 1e-15);
}

TEST(Gbt, TrainingMseNonIncreasing) {
  std::mt19937_64 g(7);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_features(60, 4, g);
    std::vector<double> y(60);
    for (std::size_t i = 0; i < 60; ++i) y[i] = std::sin(3 * x(i, 0)) + x(i, 1) * x(i, 2) + 0.1 * z(g);
    const auto m = fit_gbt(x, y, GbtConfig{50, 0.1, 3, 2});
    ASSERT_EQ(m.training_mse.size(), 51u);
    for (std::size_t k = 1; k < m.training_mse.size(); ++k) EXPECT_LE(m.training_mse[k], m.training_mse[k - 1]);
    for (const auto& t : m.trees) EXPECT_LE(t.depth(), 3u);
  }
}

TEST(Gbt, PredictionIsBasePlusScaledLeaves) {
  std::mt19937_64 g(3);
  const auto x = random_features(32, 2, g);
  std::vector<double> y(32);
  for (std::size_t i = 0; i < 32; ++i) y[i] = x(i, 0) - x(i, 1);
  const auto m = fit_gbt(x, y, GbtConfig{10, 0.3, 2, 2});
  for (std::size_t i = 0; i < 32; ++i) {
    double s = 0;
    for (const auto& t : m.trees) s += t.predict(x.row(i));
    EXPECT_NEAR(m.predict(x.row(i)), m.base_prediction + 0.3 * s, 1e-14);
  }
}

TEST(Gbt, Errors) {
  Matrix x(7, 1);
  std::vector<double> y(7, 1.0);
  EXPECT_THROW(fit_gbt(x, y, GbtConfig{}), Error);  // 7 < 2 * 2^3
  Matrix x2(16, 1);
  std::vector<double> y2(16, 1.0);
  y2[3] = NAN;
  try {
    fit_gbt(x2, y2, GbtConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteInput);
  }
}

TEST(Forecaster, ConstantSeriesPredictsConstant) {
  const std::vector<double> h(60, 0.4);
  const auto ens = train_horizon_models(h, 10);
  ASSERT_EQ(ens.horizon(), 10u);
  const std::vector<double> lags(5, 0.4);
  const auto p = predict_path(ens, lags);
  for (double v : p.values) EXPECT_EQ(v, 0.4);
  EXPECT_NEAR(p.mean, 0.4, 1e-15);
}

TEST(Forecaster, TooShortSeriesIsInsufficientData) {
  const auto h = ar1(5 + 10, 0.5, 1);  // exactly one row per horizon
  try {
    train_horizon_models(h, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(Forecaster, Ar1HorizonOneBeatsVarianceBaseline) {
  const auto h = ar1(300, 0.8, 2);
  const auto ens = train_horizon_models(h, 3);
  // targets for horizon 1 are h[5..]
  const std::vector<double> t(h.begin() + 5, h.end());
  const double m = std::accumulate(t.begin(), t.end(), 0.0) / t.size();
  double var = 0;
  for (double v : t) var += (v - m) * (v - m) / t.size();
  EXPECT_LE(ens.horizon_models[0].training_mse.back(), var);
}

TEST(Forecaster, MeanIsAverageAndValuesClipped) {
  const auto h = ar1(200, 0.9, 4);
  const auto ens = train_horizon_models(h, 7);
  const std::span<const double> all(h);
  const auto p = predict_path(ens, all.subspan(all.size() - 5));
  double s = 0;
  for (std::size_t k = 0; k < ens.horizon(); ++k) {
    const double v = std::clamp(ens.horizon_models[k].predict(all.subspan(all.size() - 5)), 0.0, 1.0);
    EXPECT_EQ(p.values[k], v);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    s += v;
  }
  EXPECT_NEAR(p.mean, s / 7.0, 1e-12);
}

TEST(Forecaster, SingleHorizonMeanIsTheValue) {
  const auto h = ar1(100, 0.5, 8);
  const auto ens = train_horizon_models(h, 1);
  const std::span<const double> all(h);
  const auto p = predict_path(ens, all.subspan(all.size() - 5));
  EXPECT_EQ(p.mean, p.values[0]);
}

TEST(Forecaster, WrongLagCountIsShapeMismatch) {
  const auto ens = train_horizon_models(ar1(100, 0.5, 8), 2);
  const std::vector<double> lags(4, 0.5);
  try {
    predict_path(ens, lags);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Forecaster, Deterministic) {
  const auto h = ar1(150, 0.7, 5);
  const auto a = train_horizon_models(h, 5);
  const auto b = train_horizon_models(h, 5);
  const std::span<const double> all(h);
  const auto pa = predict_path(a, all.subspan(all.size() - 5));
  const auto pb = predict_path(b, all.subspan(all.size() - 5));
  EXPECT_EQ(pa.values, pb.values);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(a.horizon_models[k].training_mse, b.horizon_models[k].training_mse);
}

TEST(Regime, Boundary) {
  EXPECT_EQ(select_regime(0.4999), Regime::Rough);
  EXPECT_EQ(select_regime(std::nextafter(0.5, 0.0)), Regime::Rough);
  EXPECT_EQ(select_regime(0.5), Regime::Smooth);
  EXPECT_EQ(select_regime(0.7), Regime::Smooth);
  EXPECT_EQ(select_regime(0.2, Regime::Smooth), Regime::Smooth);
  EXPECT_EQ(select_regime(0.9, Regime::Rough), Regime::Rough);
  EXPECT_EQ(to_string(Regime::Rough), "rough");
}

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "roughstop/calibration.hpp"
#include "roughstop/error.hpp"

using namespace roughstop;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

}  // namespace

TEST(Rho, PerfectAnticorrelation) {
  const std::vector<double> r{0.01, -0.02, 0.005, 0.03, -0.01};
  std::vector<double> v;
  for (double x : r) v.push_back(-x);
  EXPECT_NEAR(estimate_rho(r, v), -1.0, 1e-15);
}

TEST(Rho, FourPointHandComputed) {
  const std::vector<double> r{0.01, -0.02, 0.03, 0.00};
  const std::vector<double> v{0.5, 0.49, 0.52, 0.47};
  // means 0.005 and 0.495; deviations r: .005 -.025 .025 -.005, v: .005 -.005 .025 -.025
  const double sxy = 0.005 * 0.005 + 0.025 * 0.005 + 0.025 * 0.025 + 0.005 * 0.025;
  const double sxx = 2 * (0.005 * 0.005 + 0.025 * 0.025);
  const double syy = sxx;
  EXPECT_NEAR(estimate_rho(r, v), sxy / std::sqrt(sxx * syy), 1e-12);
  EXPECT_NEAR(estimate_rho(r, v), oracle::pearson(r, v), 1e-12);
}

TEST(Rho, Errors) {
  const std::vector<double> a(10, 0.1), b(9, 0.1);
  EXPECT_EQ(code_of([&] { estimate_rho(a, b); }), ErrorCode::LengthMismatch);
  const std::vector<double> flat(10, 0.1);
  std::vector<double> moving(10);
  for (int i = 0; i < 10; ++i) moving[i] = i;
  EXPECT_EQ(code_of([&] { estimate_rho(flat, moving); }), ErrorCode::DegenerateSeries);
}

TEST(Rho, SymmetricUnderJointPermutationAndAffineInvariant) {
  std::mt19937_64 g(1);
  std::normal_distribution<double> z;
  std::vector<double> r(50), v(50);
  for (int i = 0; i < 50; ++i) {
    r[i] = z(g);
    v[i] = 0.3 * r[i] + z(g);
  }
  const double base = estimate_rho(r, v);
  EXPECT_GE(base, -1.0);
  EXPECT_LE(base, 1.0);
  std::vector<std::size_t> idx(50);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), g);
  std::vector<double> rp, vp, rs;
  for (auto i : idx) rp.push_back(r[i]), vp.push_back(v[i]);
  EXPECT_NEAR(estimate_rho(rp, vp), base, 1e-12);
  for (double x : r) rs.push_back(3.0 * x + 7.0);
  EXPECT_NEAR(estimate_rho(rs, v), base, 1e-12);
}

TEST(Eta, ZeroDispersion) {
  const std::vector<double> d(20, 0.013);
  EXPECT_EQ(estimate_eta(d, 0.3), 0.0);
}

TEST(Eta, ExactCancellationAtHalf) {
  // two values with sample std sqrt(1/252)
  const double s = std::sqrt(1.0 / 252.0);
  const std::vector<double> d{0.0, s * std::sqrt(2.0)};
  EXPECT_NEAR(estimate_eta(d, 0.5), 1.0, 1e-12);
}

TEST(Eta, FormulaFixture) {
  const double s = 0.02;
  const std::vector<double> d{-s, s, 0.0};  // sample sd = s
  EXPECT_NEAR(estimate_eta(d, 0.1), 0.02 * std::pow(252.0, 0.1), 1e-12);
}

TEST(Eta, IncreasingInHurstForDailySteps) {
  // dt < 1 so dt^H shrinks as H grows
  const std::vector<double> d{0.01, -0.03, 0.02, 0.005};
  double prev = 0.0;
  for (double h = 0.05; h < 1.0; h += 0.05) {
    const double e = estimate_eta(d, h);
    EXPECT_GT(e, prev);
    EXPECT_TRUE(std::isfinite(e));
    prev = e;
  }
}

TEST(Eta, Errors) {
  const std::vector<double> one{0.1};
  EXPECT_EQ(code_of([&] { estimate_eta(one, 0.3); }), ErrorCode::DegenerateSeries);
  const std::vector<double> two{0.1, 0.2};
  EXPECT_EQ(code_of([&] { estimate_eta(two, 1.0); }), ErrorCode::InvalidParams);
}

TEST(Xi0, Square) {
  EXPECT_EQ(estimate_xi0(0.0), 0.0);
  EXPECT_NEAR(estimate_xi0(0.2), 0.04, 1e-17);
  EXPECT_EQ(estimate_xi0(1.0), 1.0);
}

TEST(HestonReversion, Defaults) {
  EXPECT_NEAR(default_heston_reversion(0.2).theta, 0.04, 1e-17);
  EXPECT_EQ(default_heston_reversion(0.2).kappa, 2.0);
  EXPECT_EQ(default_heston_reversion(0.2, 5.0).kappa, 5.0);
}

TEST(Calibrate, AssemblesParams) {
  PriceSeries p;
  AtmVolSeries a;
  std::mt19937_64 g(2);
  std::normal_distribution<double> z;
  double c = 100, vol = 0.25;
  for (int i = 0; i < 100; ++i) {
    p.dates.push_back(Date{19000 + i});
    p.closes.push_back(c);
    if (i % 10 != 3) {  // some vol dates missing
      a.dates.push_back(Date{19000 + i});
      a.atm_implied_vols.push_back(vol);
    }
    const double e = z(g);
    c *= std::exp(0.01 * e);
    vol *= std::exp(-0.02 * e + 0.01 * z(g));
  }
  p.log_returns = compute_log_returns(p.closes);
  const auto params = calibrate(p, a, 0.3, 0.22);
  EXPECT_LT(params.rho, 0.0);
  EXPECT_GT(params.eta, 0.0);
  EXPECT_NEAR(params.xi0, 0.0484, 1e-15);
  EXPECT_EQ(params.v0, params.xi0);
  EXPECT_EQ(params.theta, params.xi0);
  EXPECT_EQ(params.kappa, 2.0);
  EXPECT_EQ(params.r, 0.045);
  EXPECT_EQ(params.dt, 1.0 / 252.0);
}

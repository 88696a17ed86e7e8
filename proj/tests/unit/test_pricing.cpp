#include <gtest/gtest.h>

#include <cmath>

#include "roughstop/error.hpp"
#include "roughstop/parallel.hpp"
#include "roughstop/pricing.hpp"

using namespace roughstop;

namespace {

EngineParams heston_params() {
  EngineParams p;
  p.kappa = 2.0;
  p.theta = 0.04;
  p.v0 = 0.04;
  p.rho = -0.7;
  p.eta = 0.3;
  return p;
}

PathEnsemble heston(std::uint64_t seed, std::size_t paths = 2048, EngineParams p = heston_params(),
                    double spot = 100.0) {
  SimulationSpec spec;
  spec.paths = paths;
  spec.steps = 10;
  spec.seed = seed;
  spec.spot = spot;
  return simulate_heston(p, spec);
}

std::vector<Matrix> slices(const PathEnsemble& e, const std::vector<std::size_t>& steps) {
  return signature_slices(e, ChannelSet{}, steps);
}

std::span<const Matrix> suffix(const std::vector<Matrix>& all, std::size_t n) {
  return {all.data() + (all.size() - n), n};
}

double european(const PathEnsemble& e, const OptionSpec& o, double* se = nullptr) {
  const double df = std::exp(-o.r * e.grid.back());
  double s = 0, s2 = 0;
  for (std::size_t p = 0; p < e.paths(); ++p) {
    const double v = df * payoff(e.asset(p, e.steps()), o.strike, o.type);
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(e.paths());
  if (se) *se = std::sqrt((s2 / n - (s / n) * (s / n)) / (n - 1));
  return s / n;
}

PrimalConfig quick_primal() {
  PrimalConfig c;
  c.mlp.epochs = 5;
  c.features.rff_dim = 32;
  return c;
}

}  // namespace

TEST(Payoff, Examples) {
  EXPECT_EQ(payoff(90, 100, OptionType::Put), 10);
  EXPECT_EQ(payoff(110, 100, OptionType::Put), 0);
  EXPECT_EQ(payoff(110, 100, OptionType::Call), 10);
  EXPECT_EQ(payoff(90, 100, OptionType::Call), 0);
}

TEST(Grid, FactoriesAndValidation) {
  const auto e = heston(1, 4);
  const auto daily = ExerciseGrid::daily(e);
  EXPECT_EQ(daily.indices.size(), 11u);
  EXPECT_EQ(daily.control_points(), daily.indices);
  const auto terminal = ExerciseGrid::terminal(e);
  EXPECT_EQ(terminal.indices, std::vector<std::size_t>{10});
  EXPECT_EQ(terminal.control_points(), (std::vector<std::size_t>{0, 10}));
  EXPECT_NEAR(terminal.times[0], 10.0 / 252.0, 1e-15);
  EXPECT_THROW(ExerciseGrid::from_indices(e, {3, 2, 10}), Error);
  EXPECT_THROW(ExerciseGrid::from_indices(e, {1, 5}), Error);
  EXPECT_THROW(ExerciseGrid::from_indices(e, {}), Error);
}

TEST(Regressors, Names) {
  for (auto k : all_regressors()) EXPECT_EQ(parse_regressor(to_string(k)), k);
  EXPECT_EQ(display_name(RegressorKind::DeepKernelRff), "Deep Kernel Method");
  EXPECT_THROW(parse_regressor("quadratic"), Error);
}

TEST(Features, Dimensions) {
  const auto e = heston(2, 64);
  const auto s = slices(e, {5});
  FeatureConfig fc;
  EXPECT_EQ(SliceFeatures::fit(RegressorKind::LinearSignature, s[0], 3, fc, 1).dim(), 40u);
  EXPECT_EQ(SliceFeatures::fit(RegressorKind::ExtendedLinearSignature, s[0], 3, fc, 1).dim(), 46u);
  EXPECT_EQ(SliceFeatures::fit(RegressorKind::DeepLogSignature, s[0], 3, fc, 1).dim(), 40u);
  EXPECT_EQ(SliceFeatures::fit(RegressorKind::DeepKernelRff, s[0], 3, fc, 1).dim(), 256u);
  const auto ext = SliceFeatures::fit(RegressorKind::ExtendedLinearSignature, s[0], 3, fc, 1);
  const auto row = ext.transform(s[0]);
  // appended products of level-1 pairs (i <= j)
  EXPECT_DOUBLE_EQ(row(0, 40), s[0](0, 1) * s[0](0, 1));
  EXPECT_DOUBLE_EQ(row(0, 41), s[0](0, 1) * s[0](0, 2));
  EXPECT_DOUBLE_EQ(row(0, 45), s[0](0, 3) * s[0](0, 3));
}

TEST(Primal, DeepInTheMoneyZeroVolExercisesImmediately) {
  EngineParams p;
  p.kappa = 0.0;
  p.eta = 0.0;
  p.v0 = 1e-12;
  p.r = 0.0;
  const auto train = heston(3, 512, p, 80.0);
  const auto eval = heston(4, 512, p, 80.0);
  const auto grid = ExerciseGrid::daily(train);
  OptionSpec o{100.0, OptionType::Put, 0.0};
  for (auto kind : all_regressors()) {
    const auto model = fit_continuation(train, slices(train, grid.indices), grid, kind, o, quick_primal());
    const auto lb = lower_bound(eval, slices(eval, grid.indices), model, o);
    EXPECT_NEAR(lb.value, 20.0, 1e-4) << to_string(kind);
  }
}

TEST(Primal, ZeroStrikePutIsWorthless) {
  const auto train = heston(5, 256);
  const auto grid = ExerciseGrid::daily(train);
  OptionSpec o{0.0, OptionType::Put, 0.045};
  const auto model = fit_continuation(train, slices(train, grid.indices), grid, RegressorKind::LinearSignature, o);
  EXPECT_EQ(model.degenerate_slices.size(), 10u);
  const auto lb = lower_bound(train, slices(train, grid.indices), model, o);
  EXPECT_EQ(lb.value, 0.0);
  EXPECT_EQ(lb.standard_error, 0.0);
}

TEST(Primal, SinglePointGridIsEuropean) {
  const auto train = heston(6);
  const auto eval = heston(7);
  const auto grid = ExerciseGrid::terminal(train);
  OptionSpec o;
  const auto model = fit_continuation(train, slices(train, grid.indices), grid, RegressorKind::LinearSignature, o);
  const auto lb = lower_bound(eval, slices(eval, grid.indices), model, o);
  double se = 0;
  const double eu = european(eval, o, &se);
  EXPECT_NEAR(lb.value, eu, 1e-12);
  EXPECT_LE(std::abs(lb.value - eu), 3 * se);
  EXPECT_GT(lb.standard_error, 0.0);
}

TEST(Primal, ForcedImmediateExercise) {
  const auto e = heston(8, 256);
  const auto grid = ExerciseGrid::daily(e);
  PrimalModel model;
  model.grid = grid;
  model.slices.assign(10, ContinuationModel::always(0.0));
  OptionSpec o{110.0, OptionType::Put, 0.045};
  const auto lb = lower_bound(e, slices(e, grid.indices), model, o);
  EXPECT_EQ(lb.value, 10.0);
  EXPECT_EQ(lb.standard_error, 0.0);
}

TEST(Primal, MonotoneInStrike) {
  const auto train = heston(9);
  const auto eval = heston(10);
  const auto grid = ExerciseGrid::daily(train);
  const auto ts = slices(train, grid.indices);
  const auto es = slices(eval, grid.indices);
  double prev = -1.0;
  for (double k : {95.0, 100.0, 105.0}) {
    OptionSpec o{k, OptionType::Put, 0.045};
    const auto m = fit_continuation(train, ts, grid, RegressorKind::LinearSignature, o);
    const double v = lower_bound(eval, es, m, o).value;
    EXPECT_GE(v, prev) << k;
    prev = v;
  }
}

TEST(Primal, DivergedMlpFallsBackToLinear) {
  const auto train = heston(11, 512);
  const auto grid = ExerciseGrid::daily(train);
  auto cfg = quick_primal();
  cfg.mlp.learning_rate = 1e300;
  OptionSpec o;
  const auto m = fit_continuation(train, slices(train, grid.indices), grid, RegressorKind::DeepLogSignature, o, cfg);
  EXPECT_FALSE(m.mlp_fallbacks.empty());
  for (auto k : m.mlp_fallbacks) EXPECT_EQ(m.slices[k].form, ContinuationModel::Form::Ridge);
}

TEST(Dual, ZeroControlIsMaxDiscountedPayoff) {
  const auto e = heston(12, 512);
  const auto grid = ExerciseGrid::daily(e);
  OptionSpec o;
  const auto s = slices(e, grid.control_points());
  const auto ub = dual_upper_bound(e, s, MartingaleControl::zero(grid), grid, o);
  double expect = 0;
  for (std::size_t p = 0; p < e.paths(); ++p) {
    double best = 0;
    for (std::size_t i = 0; i < grid.indices.size(); ++i)
      best = std::max(best, std::exp(-o.r * grid.times[i]) * payoff(e.asset(p, grid.indices[i]), o.strike, o.type));
    expect += best / e.paths();
  }
  EXPECT_NEAR(ub.value, expect, 1e-12);
}

TEST(Dual, FittedNeverWorseOnTrainingAndStartsAtZero) {
  const auto train = heston(13);
  const auto grid = ExerciseGrid::daily(train);
  OptionSpec o;
  const auto s = slices(train, grid.control_points());
  for (auto kind : all_regressors()) {
    DualConfig dc;
    dc.iterations = 40;
    FeatureConfig fc;
    fc.rff_dim = 32;
    const auto c = fit_martingale_control(train, s, grid, kind, o, dc, fc);
    const double fitted = dual_upper_bound(train, s, c, grid, o).value;
    const double zero = dual_upper_bound(train, s, MartingaleControl::zero(grid), grid, o).value;
    EXPECT_LE(fitted, zero) << to_string(kind);
    EXPECT_LE(c.best_objective, c.zero_objective);
    EXPECT_NEAR(c.objective_trace.front(), zero, 1e-9);
    const auto m = martingale_values(train, s, c, grid);
    for (std::size_t p = 0; p < train.paths(); ++p) EXPECT_EQ(m(p, 0), 0.0);
  }
}

TEST(Dual, ZeroIterationsAndZeroPayoffGiveZeroControl) {
  const auto train = heston(14, 512);
  const auto grid = ExerciseGrid::daily(train);
  const auto s = slices(train, grid.control_points());
  DualConfig none;
  none.iterations = 0;
  const auto c0 = fit_martingale_control(train, s, grid, RegressorKind::LinearSignature, OptionSpec{}, none);
  for (const auto& v : c0.coefficients)
    for (double x : v) EXPECT_EQ(x, 0.0);
  const OptionSpec worthless{0.0, OptionType::Put, 0.045};
  const auto c1 = fit_martingale_control(train, s, grid, RegressorKind::LinearSignature, worthless);
  for (const auto& v : c1.coefficients)
    for (double x : v) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(c1.best_objective, 0.0);
}

TEST(Dual, SinglePointGridIsEuropean) {
  const auto train = heston(15);
  const auto eval = heston(16);
  const auto grid = ExerciseGrid::terminal(train);
  OptionSpec o;
  const auto c = fit_martingale_control(train, slices(train, grid.control_points()), grid,
                                        RegressorKind::LinearSignature, o);
  const auto ub = dual_upper_bound(eval, slices(eval, grid.control_points()), c, grid, o);
  double se = 0;
  const double eu = european(eval, o, &se);
  EXPECT_LE(std::abs(ub.value - eu), 3 * std::max(se, ub.standard_error));
}

TEST(Bounds, TableArithmetic) {
  const auto a = make_bounds({2.04, 0.01}, {2.39, 0.01}, 2.08);
  EXPECT_NEAR(a.gap, 0.35, 1e-12);
  EXPECT_NEAR(*a.gap_pct * 100, 17.16, 0.005);
  EXPECT_EQ(a.premium_status, PremiumStatus::Within);
  const auto b = make_bounds({10.16, 0.07}, {15.97, 0.07}, 5.61);
  EXPECT_NEAR(b.gap, 5.81, 1e-12);
  EXPECT_NEAR(*b.gap_pct * 100, 57.25, 0.15);
  EXPECT_EQ(b.premium_status, PremiumStatus::Outside);
  EXPECT_EQ(make_bounds({5.29, 0.03}, {8.01, 0.03}, 5.61).premium_status, PremiumStatus::Within);
  EXPECT_EQ(make_bounds({2.0, 0}, {3.0, 0}, 2.0).premium_status, PremiumStatus::Within);
  EXPECT_EQ(make_bounds({2.0, 0}, {3.0, 0}, 3.0).premium_status, PremiumStatus::Within);
  EXPECT_FALSE(make_bounds({0.0, 0}, {1.0, 0}, 3.0).gap_pct.has_value());
  EXPECT_EQ(to_string(PremiumStatus::Outside), "Outside");
}

TEST(AllVariants, OrderingDominanceAndThreadIndependence) {
  Ensembles ens{heston(20), heston(21), heston(22)};
  const auto grid = ExerciseGrid::daily(ens.evaluation);
  OptionSpec o;
  PricingConfig pc;
  pc.primal = quick_primal();
  pc.dual.iterations = 40;
  const auto kinds = all_regressors();
  const unsigned before = thread_count();
  set_thread_count(1);
  const auto serial = price_with_all_variants(ens, grid, o, 1.5, kinds, pc);
  set_thread_count(4);
  const auto threaded = price_with_all_variants(ens, grid, o, 1.5, kinds, pc);
  set_thread_count(before);
  ASSERT_EQ(serial.size(), 4u);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    const auto& b = serial[i].bounds;
    EXPECT_EQ(serial[i].kind, kinds[i]);
    EXPECT_GE(b.upper + 3 * b.upper_se, b.lower - 3 * b.lower_se);
    EXPECT_NEAR(b.gap, b.upper - b.lower, 1e-15);
    EXPECT_NEAR(*b.gap_pct, b.gap / b.lower, 1e-15);
    EXPECT_LE(b.upper, serial[i].zero_control_upper + 3 * b.upper_se);
    EXPECT_LE(serial[i].dual_training_objective, serial[i].dual_zero_objective);
    EXPECT_EQ(b.lower, threaded[i].bounds.lower);
    EXPECT_EQ(b.upper, threaded[i].bounds.upper);
  }
}

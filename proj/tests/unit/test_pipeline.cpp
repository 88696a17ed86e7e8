#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <json.hpp>
#include <string>

#include "fixtures.hpp"
#include "roughstop/parallel.hpp"
#include "roughstop/pipeline.hpp"

using namespace roughstop;

TEST(Config, JsonRoundTrip) {
  PipelineConfig c;
  c.ticker = "META";
  c.dte = 21;
  c.cp = OptionType::Call;
  c.engine = EngineChoice::Heston;
  c.rff_gamma = 0.25;
  c.regressors = {RegressorKind::DeepKernelRff, RegressorKind::LinearSignature};
  c.injected_mean_hurst = 0.3;
  c.output = OutputFormat::Csv;
  c.seed = 123456789012345ULL;
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
  EXPECT_EQ(config_from_json("{}"), PipelineConfig{});
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(R"({"pathz": 10})"), Error);
  EXPECT_THROW(config_from_json("not json"), Error);
  PipelineConfig c;
  c.paths = 0;
  EXPECT_THROW(c.validate(), Error);
  c = PipelineConfig{};
  c.sig_depth = 2;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Diagnostics, Examples) {
  const std::vector<double> a{0.3, 0.4, 0.5};
  auto d = forecast_diagnostics(a, a);
  EXPECT_EQ(d.mae, 0.0);
  EXPECT_EQ(d.mse, 0.0);
  const std::vector<double> b{0.4, 0.5, 0.6};
  d = forecast_diagnostics(b, a);
  EXPECT_NEAR(d.mae, 0.1, 1e-12);
  EXPECT_NEAR(d.mse, 0.01, 1e-12);
  EXPECT_THROW(forecast_diagnostics(a, std::vector<double>{0.1}), Error);
}

TEST(Diagnostics, Properties) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> f(1 + rep % 17), r(f.size());
    double max_err = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = u(rng);
      r[i] = u(rng);
      max_err = std::max(max_err, std::abs(f[i] - r[i]));
    }
    const auto d = forecast_diagnostics(f, r);
    EXPECT_GE(d.mae, 0.0);
    EXPECT_GE(d.mse, 0.0);
    EXPECT_LE(d.mse, max_err * d.mae + 1e-15);
    EXPECT_LE(d.mae * d.mae, d.mse + 1e-15);
  }
}

class PipelineRun : public ::testing::Test {
 protected:
  oracle::TempDir dir;
  PipelineConfig config = fixture::synthetic_config(dir);
};

TEST_F(PipelineRun, ReportIsConsistent) {
  const auto rep = run_pipeline(config);
  ASSERT_EQ(rep.variants.size(), 4u);
  EXPECT_EQ(rep.seeds, (std::vector<std::uint64_t>{42, 43, 44}));
  EXPECT_EQ(rep.forecast.values.size(), 10u);
  EXPECT_EQ(rep.regime, select_regime(rep.mean_hurst));
  EXPECT_EQ(rep.engine, engine_for(rep.regime));
  ASSERT_TRUE(rep.realized.has_value());
  const auto& cmp = *rep.realized;
  double mae = 0;
  for (std::size_t i = 0; i < cmp.forecast.size(); ++i) mae += std::abs(cmp.forecast[i] - cmp.realized[i]);
  EXPECT_NEAR(mae / cmp.forecast.size(), cmp.errors.mae, 1e-12);
  for (const auto& v : rep.variants) {
    EXPECT_NEAR(v.bounds.gap, v.bounds.upper - v.bounds.lower, 1e-12);
    const bool within = v.bounds.lower <= rep.contract.premium && rep.contract.premium <= v.bounds.upper;
    EXPECT_EQ(v.bounds.premium_status == PremiumStatus::Within, within);
  }
  const auto j = nlohmann::json::parse(report_to_json(rep));
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["variants"].size(), 4u);
  EXPECT_FALSE(j.contains("timings"));
  EXPECT_TRUE(nlohmann::json::parse(report_to_json(rep, true)).contains("timings"));
  const auto table = report_to_table(rep);
  EXPECT_NE(table.find("Premium Status"), std::string::npos);
  EXPECT_NE(table.find("Deep Kernel Method"), std::string::npos);
  const auto csv = report_to_csv(rep);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(PipelineRun, InjectedRoughMeanSelectsRoughBergomi) {
  config.injected_mean_hurst = 0.3;
  config.regressors = {RegressorKind::LinearSignature};
  const auto rep = run_pipeline(config);
  EXPECT_TRUE(rep.mean_hurst_injected);
  EXPECT_EQ(rep.regime, Regime::Rough);
  EXPECT_EQ(rep.engine, EngineKind::RoughBergomi);
  EXPECT_EQ(rep.simulation_hurst.size(), 10u);
  config.injected_mean_hurst = 0.7;
  const auto smooth = run_pipeline(config);
  EXPECT_EQ(smooth.regime, Regime::Smooth);
  EXPECT_EQ(smooth.engine, EngineKind::Heston);
}

TEST_F(PipelineRun, RepeatRunsAreByteIdenticalAcrossThreads) {
  config.regressors = {RegressorKind::LinearSignature, RegressorKind::DeepKernelRff};
  const unsigned before = thread_count();
  set_thread_count(1);
  const auto a = report_to_json(run_pipeline(config));
  set_thread_count(3);
  const auto b = report_to_json(run_pipeline(config));
  set_thread_count(before);
  EXPECT_EQ(a, b);
}

TEST_F(PipelineRun, ForcingEngineLeavesUpstreamStagesAlone) {
  config.regressors = {RegressorKind::LinearSignature};
  config.engine = EngineChoice::RoughBergomi;
  const auto a = run_pipeline(config);
  config.engine = EngineChoice::Heston;
  const auto b = run_pipeline(config);
  EXPECT_EQ(a.forecast.values, b.forecast.values);
  EXPECT_EQ(a.mean_hurst, b.mean_hurst);
  EXPECT_EQ(a.regime, b.regime);
  EXPECT_EQ(a.params.rho, b.params.rho);
  EXPECT_EQ(a.params.eta, b.params.eta);
  EXPECT_TRUE(b.engine_forced);
  EXPECT_EQ(b.engine, EngineKind::Heston);
  EXPECT_EQ(a.engine, EngineKind::RoughBergomi);
}

TEST_F(PipelineRun, ErrorsNameTheirStage) {
  auto bad = config;
  bad.prices_path = dir.file("missing.csv");
  try {
    run_pipeline(bad);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "market_data");
    EXPECT_EQ(std::string(e.what()).rfind("[market_data]", 0), 0u);
  }
  bad = config;
  bad.dte = 999;
  try {
    run_pipeline(bad);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "market_data");
    EXPECT_NE(std::string(e.what()).find("NoMatch"), std::string::npos);
  }
  bad = config;
  bad.paths = 0;
  try {
    run_pipeline(bad);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "config");
  }
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roughstop/calibration.hpp"
#include "roughstop/engines.hpp"
#include "roughstop/error.hpp"
#include "roughstop/forecaster.hpp"
#include "roughstop/market_data.hpp"
#include "roughstop/pricing.hpp"

namespace roughstop {

inline constexpr int kReportSchemaVersion = 1;

enum class OutputFormat { Json, Table, Csv };
enum class EngineChoice { Auto, RoughBergomi, Heston };

std::string_view to_string(OutputFormat f) noexcept;
std::string_view to_string(EngineChoice e) noexcept;
OutputFormat parse_output_format(std::string_view text);
EngineChoice parse_engine_choice(std::string_view text);
Compensator parse_compensator(std::string_view text);

struct PipelineConfig {
  std::string options_path;
  std::string prices_path;
  std::string ticker = "AAPL";
  std::string quote_date = "2023-08-31";
  int dte = 10;
  OptionType cp = OptionType::Put;

  std::size_t hurst_window = 32;
  std::size_t forecast_lags = 5;
  std::size_t gbt_rounds = 100;
  double gbt_learning_rate = 0.1;
  std::size_t gbt_depth = 3;

  std::size_t calib_window = 64;
  double kappa = 2.0;
  double risk_free_rate = 0.045;
  int atm_min_days = 1;
  int atm_max_days = 60;

  std::size_t paths = std::size_t{1} << 15;
  std::size_t steps = 0;  // 0: one step per day to expiry
  EngineChoice engine = EngineChoice::Auto;
  Compensator compensator = Compensator::Exact;
  std::uint64_t seed = 42;

  std::string sig_channels = "time,vol,price";
  int sig_depth = 3;

  std::size_t rff_dim = 128;
  std::optional<double> rff_gamma;  // median heuristic when unset
  double ridge_lambda = 1e-3;       // kernel ridge
  double linear_lambda = 1e-6;      // linear and extended bases

  std::vector<RegressorKind> regressors = all_regressors();
  std::size_t dual_iters = 200;
  double dual_step = 0.5;
  std::size_t mlp_width = 32;
  std::size_t mlp_epochs = 20;

  // Testing hook: replaces the forecast mean in the regime decision.
  std::optional<double> injected_mean_hurst;

  OutputFormat output = OutputFormat::Json;

  [[nodiscard]] std::size_t simulation_steps() const noexcept {
    return steps > 0 ? steps : static_cast<std::size_t>(dte);
  }
  void validate() const;  // throws InvalidConfig
  bool operator==(const PipelineConfig&) const = default;
};

std::string config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(std::string_view text);  // missing keys keep defaults

struct ForecastDiagnostics {
  double mae = 0.0;
  double mse = 0.0;
};

ForecastDiagnostics forecast_diagnostics(std::span<const double> forecast, std::span<const double> realized);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RealizedComparison {
  std::vector<Date> dates;
  std::vector<double> forecast;
  std::vector<double> realized;
  ForecastDiagnostics errors;
};

struct RunReport {
  PipelineConfig config;
  OptionContract contract;
  double spot = 0.0;
  std::size_t history_days = 0;
  std::size_t hurst_windows = 0;
  std::size_t degenerate_hurst_windows = 0;
  double hurst_current = 0.0;
  ForecastPath forecast;
  double mean_hurst = 0.0;  // the value the regime rule saw
  bool mean_hurst_injected = false;
  Regime regime = Regime::Smooth;
  EngineKind engine = EngineKind::Heston;
  bool engine_forced = false;
  EngineParams params;
  std::vector<double> simulation_hurst;  // per step, rough Bergomi only
  std::optional<RealizedComparison> realized;
  std::vector<VariantResult> variants;
  double european_mc = 0.0;  // discounted terminal payoff on the evaluation paths
  std::vector<std::uint64_t> seeds;  // primal-train, dual-train, evaluation
  std::vector<StageTiming> timings;
};

// Raised by run_pipeline; what() starts with "[stage] ".
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

RunReport run_pipeline(const PipelineConfig& config);

std::string report_to_json(const RunReport& report, bool include_timings = false);
std::string report_to_table(const RunReport& report);
std::string report_to_csv(const RunReport& report);
std::string render_report(const RunReport& report, bool include_timings = false);  // per config.output

}  // namespace roughstop

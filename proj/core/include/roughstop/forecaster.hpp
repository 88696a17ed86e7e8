#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "roughstop/gbt.hpp"
#include "roughstop/roughness.hpp"

namespace roughstop {

struct ForecastConfig {
  std::size_t lags = 5;
  std::size_t min_rows = 16;  // supervised pairs required per horizon
  GbtConfig gbt;
};

struct ForecastEnsemble {
  std::vector<GbtModel> horizon_models;  // index h-1 forecasts h steps ahead
  std::size_t lags = 5;

  [[nodiscard]] std::size_t horizon() const noexcept { return horizon_models.size(); }
};

struct ForecastPath {
  std::vector<double> values;  // each in [0, 1]
  double mean = 0.0;
};

enum class Regime { Rough, Smooth };

std::string_view to_string(Regime regime) noexcept;

// One model per horizon h in 1..horizon, fitted on (H[t-lags+1..t]) -> H[t+h].
ForecastEnsemble train_horizon_models(std::span<const double> hurst, std::size_t horizon,
                                      const ForecastConfig& config = {});
ForecastEnsemble train_horizon_models(const HurstSeries& hurst, std::size_t horizon,
                                      const ForecastConfig& config = {});

ForecastPath predict_path(const ForecastEnsemble& ensemble, std::span<const double> latest_lags);

inline constexpr double kRoughThreshold = 0.5;

// Rough iff mean_hurst < threshold. An override bypasses the threshold.
Regime select_regime(double mean_hurst, std::optional<Regime> override_regime = std::nullopt,
                     double threshold = kRoughThreshold);

}  // namespace roughstop

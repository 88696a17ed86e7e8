#include "roughstop/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughstop/error.hpp"
#include "roughstop/parallel.hpp"

namespace roughstop {

std::string_view to_string(Regime regime) noexcept {
  return regime == Regime::Rough ? "rough" : "smooth";
}

ForecastEnsemble train_horizon_models(std::span<const double> hurst, std::size_t horizon,
                                      const ForecastConfig& config) {
  if (horizon < 1 || config.lags < 1) {
    throw Error(ErrorCode::InvalidParams, "forecast horizon and lags must be positive");
  }
  const std::size_t n = hurst.size();
  // Rows for horizon h: t runs from lags-1 to n-1-h.
  const std::size_t rows_at_max =
      n + 1 >= config.lags + horizon ? n + 1 - config.lags - horizon : 0;
  if (rows_at_max < config.min_rows) {
    throw Error(ErrorCode::InsufficientData,
                std::to_string(n) + " Hurst values give " + std::to_string(rows_at_max) +
                    " training rows at horizon " + std::to_string(horizon) + ", need " +
                    std::to_string(config.min_rows));
  }

  ForecastEnsemble ensemble;
  ensemble.lags = config.lags;
  ensemble.horizon_models.resize(horizon);
  parallel_for(horizon, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t h = k + 1;
      const std::size_t rows = n + 1 - config.lags - h;
      Matrix x(rows, config.lags);
      std::vector<double> y(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + config.lags - 1;
        for (std::size_t j = 0; j < config.lags; ++j) x(r, j) = hurst[t + 1 - config.lags + j];
        y[r] = hurst[t + h];
      }
      ensemble.horizon_models[k] = fit_gbt(x, y, config.gbt);
    }
  });
  return ensemble;
}

ForecastEnsemble train_horizon_models(const HurstSeries& hurst, std::size_t horizon,
                                      const ForecastConfig& config) {
  return train_horizon_models(std::span<const double>(hurst.values), horizon, config);
}

ForecastPath predict_path(const ForecastEnsemble& ensemble, std::span<const double> latest_lags) {
  if (latest_lags.size() != ensemble.lags) {
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(ensemble.lags) +
                                              " lagged values, got " +
                                              std::to_string(latest_lags.size()));
  }
  if (ensemble.horizon_models.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "ensemble has no horizon models");
  }
  ForecastPath path;
  path.values.reserve(ensemble.horizon());
  double sum = 0.0;
  for (const auto& model : ensemble.horizon_models) {
    const double v = std::clamp(model.predict(latest_lags), 0.0, 1.0);
    path.values.push_back(v);
    sum += v;
  }
  path.mean = sum / static_cast<double>(path.values.size());
  return path;
}

Regime select_regime(double mean_hurst, std::optional<Regime> override_regime, double threshold) {
  if (override_regime) return *override_regime;
  return mean_hurst < threshold ? Regime::Rough : Regime::Smooth;
}

}  // namespace roughstop

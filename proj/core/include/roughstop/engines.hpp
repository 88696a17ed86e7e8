#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "roughstop/calibration.hpp"
#include "roughstop/forecaster.hpp"
#include "roughstop/matrix.hpp"

namespace roughstop {

enum class EngineKind { RoughBergomi, Heston };

std::string_view to_string(EngineKind kind) noexcept;
EngineKind engine_for(Regime regime) noexcept;

// How the rough Bergomi variance is normalised: Exact uses the variance of
// the simulated discrete driver (so E[v_t] = xi0 at every step); Continuous uses
// the continuous-time term 0.5 * eta^2 * s^(2H).
enum class Compensator { Exact, Continuous };

std::string_view to_string(Compensator c) noexcept;

// Hurst value per simulation step; values[t-1] drives step t.
struct HurstPath {
  std::vector<double> values;
};

// Forecast values fill the first steps; the last one is held beyond the
// forecast horizon. Values are clamped into [floor, 1 - floor].
HurstPath extend_forecast(std::span<const double> forecast, std::size_t steps, double floor = 0.01);
HurstPath constant_hurst(double h, std::size_t steps);

// Kernel weights K_t(i) = (t-i+1)^(H_t-1/2) - (t-i)^(H_t-1/2) for
// i = 1..t, with 0^(H-1/2) taken as 0 so K_t(t) = 1. Element i-1 holds K_t(i).
std::vector<double> volterra_weights(std::size_t t_index, const HurstPath& hurst);

struct SimulationSpec {
  double spot = 100.0;
  double maturity_years = 10.0 / 252.0;
  std::size_t paths = std::size_t{1} << 15;
  std::size_t steps = 10;
  std::uint64_t seed = 42;
};

struct PathEnsemble {
  Matrix asset;     // paths x (steps + 1)
  Matrix variance;  // paths x (steps + 1), per-year variance
  Matrix dW;        // paths x steps, vol-driver Brownian increments
  std::vector<double> grid;  // t_i = i * T / N in years
  EngineKind engine = EngineKind::Heston;
  std::uint64_t seed = 0;
  double spot = 0.0;

  [[nodiscard]] std::size_t paths() const noexcept { return asset.rows(); }
  [[nodiscard]] std::size_t steps() const noexcept { return dW.cols(); }
  bool operator==(const PathEnsemble&) const = default;
};

PathEnsemble simulate_rbergomi(const EngineParams& params, const HurstPath& hurst,
                               const SimulationSpec& spec, Compensator compensator = Compensator::Exact);

// Full-truncation Euler for the variance, log-Euler for the asset.
PathEnsemble simulate_heston(const EngineParams& params, const SimulationSpec& spec);

PathEnsemble simulate(EngineKind engine, const EngineParams& params, const HurstPath& hurst,
                      const SimulationSpec& spec, Compensator compensator = Compensator::Exact);

}  // namespace roughstop

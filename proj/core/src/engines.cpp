#include "roughstop/engines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughstop/error.hpp"
#include "roughstop/parallel.hpp"
#include "roughstop/rng.hpp"

namespace roughstop {

std::string_view to_string(EngineKind kind) noexcept {
  return kind == EngineKind::RoughBergomi ? "rbergomi" : "heston";
}

EngineKind engine_for(Regime regime) noexcept {
  return regime == Regime::Rough ? EngineKind::RoughBergomi : EngineKind::Heston;
}

std::string_view to_string(Compensator c) noexcept {
  return c == Compensator::Exact ? "exact" : "continuous";
}

HurstPath extend_forecast(std::span<const double> forecast, std::size_t steps, double floor) {
  if (forecast.empty()) throw Error(ErrorCode::InvalidParams, "empty Hurst forecast");
  HurstPath path;
  path.values.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const double h = forecast[std::min(t, forecast.size() - 1)];
    path.values.push_back(std::clamp(h, floor, 1.0 - floor));
  }
  return path;
}

HurstPath constant_hurst(double h, std::size_t steps) {
  return HurstPath{std::vector<double>(steps, h)};
}

std::vector<double> volterra_weights(std::size_t t_index, const HurstPath& hurst) {
  if (t_index < 1 || t_index > hurst.values.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "kernel step " + std::to_string(t_index) +
                                                " outside 1.." + std::to_string(hurst.values.size()));
  }
  const double a = hurst.values[t_index - 1] - 0.5;
  std::vector<double> w(t_index);
  for (std::size_t i = 1; i <= t_index; ++i) {
    const double lag = static_cast<double>(t_index - i);
    const double tail = lag == 0.0 ? 0.0 : std::pow(lag, a);
    w[i - 1] = std::pow(lag + 1.0, a) - tail;
  }
  return w;
}

namespace {

void check_spec(const SimulationSpec& spec) {
  if (spec.paths < 1 || spec.steps < 1 || !(spec.spot > 0.0) || !(spec.maturity_years > 0.0) ||
      !std::isfinite(spec.spot) || !std::isfinite(spec.maturity_years)) {
    throw Error(ErrorCode::InvalidParams, "need paths >= 1, steps >= 1, spot > 0, maturity > 0");
  }
}

PathEnsemble allocate(const SimulationSpec& spec, EngineKind engine) {
  PathEnsemble e;
  e.asset = Matrix(spec.paths, spec.steps + 1);
  e.variance = Matrix(spec.paths, spec.steps + 1);
  e.dW = Matrix(spec.paths, spec.steps);
  e.grid.resize(spec.steps + 1);
  for (std::size_t i = 0; i <= spec.steps; ++i) {
    e.grid[i] = spec.maturity_years * static_cast<double>(i) / static_cast<double>(spec.steps);
  }
  e.engine = engine;
  e.seed = spec.seed;
  e.spot = spec.spot;
  return e;
}

}  // namespace

PathEnsemble simulate_rbergomi(const EngineParams& params, const HurstPath& hurst,
                               const SimulationSpec& spec, Compensator compensator) {
  validate(params);
  check_spec(spec);
  if (hurst.values.size() != spec.steps) {
    throw Error(ErrorCode::InvalidParams, "Hurst path length " + std::to_string(hurst.values.size()) +
                                              " != steps " + std::to_string(spec.steps));
  }
  for (double h : hurst.values) {
    if (!(h > 0.0 && h < 1.0)) throw Error(ErrorCode::InvalidParams, "Hurst values must lie in (0, 1)");
  }

  const std::size_t n = spec.steps;
  const double dt = spec.maturity_years / static_cast<double>(n);
  const double sqrt_dt = std::sqrt(dt);

  // Per-step kernel, driver scaling and compensator; shared by all paths.
  std::vector<std::vector<double>> weights(n);
  std::vector<double> scale(n);
  std::vector<double> compensation(n);
  for (std::size_t t = 1; t <= n; ++t) {
    weights[t - 1] = volterra_weights(t, hurst);
    const double h = hurst.values[t - 1];
    scale[t - 1] = std::pow(dt, h - 0.5);
    double sum_sq = 0.0;
    for (double w : weights[t - 1]) sum_sq += w * w;
    const double driver_var = scale[t - 1] * scale[t - 1] * dt * sum_sq;
    const double s = static_cast<double>(t) * dt;
    compensation[t - 1] = compensator == Compensator::Exact
                              ? 0.5 * params.eta * params.eta * driver_var
                              : 0.5 * params.eta * params.eta * std::pow(s, 2.0 * h);
  }

  auto ens = allocate(spec, EngineKind::RoughBergomi);
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - params.rho * params.rho));
  parallel_for(spec.paths, [&](std::size_t begin, std::size_t end) {
    std::vector<double> db(n);
    for (std::size_t p = begin; p < end; ++p) {
      NormalStream normal(spec.seed, p);
      auto dw = ens.dW.row(p);
      for (std::size_t t = 0; t < n; ++t) {
        dw[t] = sqrt_dt * normal();
        db[t] = sqrt_dt * normal();
      }
      auto x = ens.asset.row(p);
      auto v = ens.variance.row(p);
      x[0] = spec.spot;
      v[0] = params.xi0;
      for (std::size_t t = 1; t <= n; ++t) {
        const double v_prev = v[t - 1];
        const double shock = params.rho * dw[t - 1] + rho_bar * db[t - 1];
        x[t] = x[t - 1] * std::exp((params.r - 0.5 * v_prev) * dt + std::sqrt(v_prev) * shock);

        const auto& w = weights[t - 1];
        double y = 0.0;
        for (std::size_t i = 0; i < t; ++i) y += w[i] * dw[i];
        y *= scale[t - 1];
        v[t] = params.xi0 * std::exp(params.eta * y - compensation[t - 1]);
      }
    }
  });
  return ens;
}

PathEnsemble simulate_heston(const EngineParams& params, const SimulationSpec& spec) {
  validate(params);
  check_spec(spec);
  const std::size_t n = spec.steps;
  const double dt = spec.maturity_years / static_cast<double>(n);
  const double sqrt_dt = std::sqrt(dt);
  const double rho_bar = std::sqrt(std::max(0.0, 1.0 - params.rho * params.rho));

  auto ens = allocate(spec, EngineKind::Heston);
  parallel_for(spec.paths, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      NormalStream normal(spec.seed, p);
      auto dw = ens.dW.row(p);
      auto x = ens.asset.row(p);
      auto v = ens.variance.row(p);
      x[0] = spec.spot;
      v[0] = params.v0;
      double state = params.v0;  // untruncated Euler state
      for (std::size_t t = 1; t <= n; ++t) {
        const double w = sqrt_dt * normal();
        const double b = sqrt_dt * normal();
        dw[t - 1] = w;
        const double vp = std::max(state, 0.0);
        const double root = std::sqrt(vp);
        x[t] = x[t - 1] * std::exp((params.r - 0.5 * vp) * dt + root * (params.rho * w + rho_bar * b));
        state = state + params.kappa * (params.theta - vp) * dt + params.eta * root * w;
        v[t] = std::max(state, 0.0);
      }
    }
  });
  return ens;
}

PathEnsemble simulate(EngineKind engine, const EngineParams& params, const HurstPath& hurst,
                      const SimulationSpec& spec, Compensator compensator) {
  if (engine == EngineKind::RoughBergomi) return simulate_rbergomi(params, hurst, spec, compensator);
  return simulate_heston(params, spec);
}

}  // namespace roughstop

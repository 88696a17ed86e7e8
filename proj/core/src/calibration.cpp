#include "roughstop/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "roughstop/error.hpp"

namespace roughstop {

void validate(const EngineParams& p) {
  for (double v : {p.rho, p.eta, p.xi0, p.kappa, p.theta, p.v0, p.r, p.dt}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParams, "non-finite engine parameter");
  }
  if (std::abs(p.rho) > 1.0) throw Error(ErrorCode::InvalidParams, "rho outside [-1, 1]");
  if (p.eta < 0.0 || p.xi0 < 0.0 || p.kappa < 0.0 || p.theta < 0.0 || p.v0 < 0.0) {
    throw Error(ErrorCode::InvalidParams, "negative variance or rate parameter");
  }
}

double estimate_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(x.size()) + " returns vs " + std::to_string(y.size()) + " vol changes");
  }
  if (x.size() < 3) throw Error(ErrorCode::InsufficientData, "correlation needs 3 observations");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y) || !(sxx > 0.0) || !(syy > 0.0)) {
    throw Error(ErrorCode::DegenerateSeries, "zero variance in correlation input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double estimate_eta(std::span<const double> log_vol_changes, double hurst_current, double dt) {
  if (log_vol_changes.size() < 2) {
    throw Error(ErrorCode::DegenerateSeries, "vol-of-vol needs at least two changes");
  }
  if (!(hurst_current > 0.0 && hurst_current < 1.0) || !(dt > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "need 0 < H < 1 and dt > 0");
  }
  const double n = static_cast<double>(log_vol_changes.size());
  double mean = 0.0;
  for (double v : log_vol_changes) mean += v;
  mean /= n;
  double ss = 0.0;
  bool all_equal = true;
  for (double v : log_vol_changes) {
    ss += (v - mean) * (v - mean);
    all_equal = all_equal && v == log_vol_changes.front();
  }
  if (all_equal) return 0.0;
  return std::sqrt(ss / (n - 1.0)) / std::pow(dt, hurst_current);
}

double estimate_xi0(double atm_implied_vol) {
  if (!(atm_implied_vol >= 0.0)) throw Error(ErrorCode::InvalidParams, "negative implied vol");
  return atm_implied_vol * atm_implied_vol;
}

HestonReversion default_heston_reversion(double atm_implied_vol, double kappa) {
  if (!(kappa >= 0.0)) throw Error(ErrorCode::InvalidParams, "negative kappa");
  return HestonReversion{kappa, estimate_xi0(atm_implied_vol)};
}

EngineParams calibrate(const PriceSeries& prices, const AtmVolSeries& atm_vols,
                       double hurst_current, double atm_implied_vol,
                       const CalibrationConfig& config) {
  std::vector<double> closes;
  std::vector<double> vols;
  std::size_t j = 0;
  for (std::size_t i = 0; i < prices.dates.size(); ++i) {
    while (j < atm_vols.dates.size() && atm_vols.dates[j] < prices.dates[i]) ++j;
    if (j < atm_vols.dates.size() && atm_vols.dates[j] == prices.dates[i]) {
      closes.push_back(prices.closes[i]);
      vols.push_back(atm_vols.atm_implied_vols[j]);
    }
  }
  if (closes.size() < 4) {
    throw Error(ErrorCode::InsufficientData,
                std::to_string(closes.size()) + " dates shared by prices and ATM vols");
  }
  const std::size_t changes = closes.size() - 1;
  const std::size_t take = std::min(changes, config.window);
  const std::size_t first = changes - take;
  std::vector<double> returns;
  std::vector<double> dvol;
  std::vector<double> dlogvol;
  for (std::size_t k = first; k < changes; ++k) {
    returns.push_back(std::log(closes[k + 1] / closes[k]));
    dvol.push_back(vols[k + 1] - vols[k]);
    if (!(vols[k] > 0.0) || !(vols[k + 1] > 0.0)) {
      throw Error(ErrorCode::DegenerateSeries, "ATM implied vol must be positive for log changes");
    }
    dlogvol.push_back(std::log(vols[k + 1] / vols[k]));
  }

  EngineParams p;
  p.dt = kDailyDt;
  p.r = config.risk_free_rate;
  p.rho = estimate_rho(returns, dvol);
  p.eta = estimate_eta(dlogvol, hurst_current, p.dt);
  p.xi0 = estimate_xi0(atm_implied_vol);
  const auto reversion = default_heston_reversion(atm_implied_vol, config.kappa);
  p.kappa = reversion.kappa;
  p.theta = reversion.theta;
  p.v0 = p.xi0;
  validate(p);
  return p;
}

}  // namespace roughstop

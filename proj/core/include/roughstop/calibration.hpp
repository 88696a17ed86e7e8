#pragma once

#include <cstddef>
#include <span>

#include "roughstop/market_data.hpp"

namespace roughstop {

inline constexpr double kTradingDaysPerYear = 252.0;
inline constexpr double kDailyDt = 1.0 / kTradingDaysPerYear;

// Parameters shared by both volatility engines. Variances are per year.
struct EngineParams {
  double rho = 0.0;     // price / vol-driver correlation
  double eta = 0.0;     // vol-of-vol
  double xi0 = 0.04;    // initial forward variance (rough Bergomi)
  double kappa = 2.0;   // Heston mean-reversion speed
  double theta = 0.04;  // Heston long-run variance
  double v0 = 0.04;     // Heston initial variance
  double r = 0.045;     // continuously compounded risk-free rate
  double dt = kDailyDt;
};

// Throws InvalidParams unless every field is finite, |rho| <= 1 and the
// variance parameters are non-negative.
void validate(const EngineParams& params);

// Pearson correlation between daily log returns and implied-vol changes.
double estimate_rho(std::span<const double> log_returns, std::span<const double> vol_changes);

// std(d log sigma) / dt^H using the latest rolling Hurst estimate.
double estimate_eta(std::span<const double> log_vol_changes, double hurst_current,
                    double dt = kDailyDt);

double estimate_xi0(double atm_implied_vol);

struct HestonReversion {
  double kappa = 2.0;
  double theta = 0.04;
};

HestonReversion default_heston_reversion(double atm_implied_vol, double kappa = 2.0);

struct CalibrationConfig {
  std::size_t window = 64;  // trailing changes used for rho and eta
  double kappa = 2.0;
  double risk_free_rate = 0.045;
};

// Joins prices and ATM vols on common dates, takes the trailing window of
// daily changes, and assembles the engine parameters. xi0, v0 and theta are
// anchored at atm_implied_vol^2.
EngineParams calibrate(const PriceSeries& prices, const AtmVolSeries& atm_vols,
                       double hurst_current, double atm_implied_vol,
                       const CalibrationConfig& config = {});

}  // namespace roughstop

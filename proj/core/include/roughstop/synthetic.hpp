#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "roughstop/dates.hpp"
#include "roughstop/market_data.hpp"

namespace roughstop {

// Fractional Gaussian noise (unit variance per step) by Cholesky
// factorisation of the exact covariance. O(n^3); fine for a few thousand.
std::vector<double> fgn_increments(std::size_t n, double hurst, std::uint64_t seed);

struct SyntheticMarketConfig {
  std::string ticker = "SYN";
  Date start = parse_date("2021-01-04");
  std::size_t days = 600;  // business days
  double spot = 100.0;
  double hurst = 0.5;        // of the daily return noise
  double daily_vol = 0.015;
  double iv_level = 0.25;
  double iv_vol = 0.04;      // daily log-iv shock size
  double iv_return_corr = -0.6;
  double r = 0.045;
  std::vector<int> dtes{5, 10, 21, 42};
  int strikes_each_side = 4;
  double strike_step = 0.025;  // fraction of the forward
  std::uint64_t seed = 2024;
};

struct SyntheticMarket {
  PriceSeries prices;
  std::vector<OptionQuote> quotes;
};

// Business-day price history plus a daily option chain (puts and calls on a
// strike ladder around the forward, Black-76 premiums).
SyntheticMarket make_synthetic_market(const SyntheticMarketConfig& config);

void write_option_quotes(std::ostream& out, std::span<const OptionQuote> quotes);

// Undiscounted-forward Black-76 price, discounted at r over T years.
double black_price(double forward, double strike, double vol, double maturity, double r, OptionType type);

}  // namespace roughstop

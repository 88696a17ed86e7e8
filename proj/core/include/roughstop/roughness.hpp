#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "roughstop/dates.hpp"
#include "roughstop/market_data.hpp"

namespace roughstop {

inline constexpr std::size_t kDefaultHurstWindow = 32;

struct HurstSeries {
  std::vector<Date> dates;    // last day of each window; empty when built from bare returns
  std::vector<double> values; // clipped to [0, 1]
  std::size_t window = kDefaultHurstWindow;
  std::size_t degenerate_windows = 0;  // windows whose value was carried forward
};

// Rescaled range of one window: range of the cumulative demeaned returns
// divided by their sample standard deviation (divisor n - 1). Throws
// DegenerateWindow when the window has zero dispersion.
double rs_statistic(std::span<const double> window_returns);

// H_t = log2(R/S) / log2(window) over every trailing window, clipped to
// [0, 1]. Degenerate windows repeat the previous value (0.5 at the start).
HurstSeries rolling_hurst(std::span<const double> returns, std::size_t window = kDefaultHurstWindow);

// Same, with dates taken from the price series (return i ends on dates[i+1]).
HurstSeries rolling_hurst(const PriceSeries& prices, std::size_t window = kDefaultHurstWindow);

}  // namespace roughstop

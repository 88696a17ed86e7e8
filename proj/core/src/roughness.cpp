#include "roughstop/roughness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "roughstop/error.hpp"

namespace roughstop {

double rs_statistic(std::span<const double> window_returns) {
  const std::size_t n = window_returns.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "R/S needs at least two returns");

  double mean = 0.0;
  for (double r : window_returns) mean += r;
  mean /= static_cast<double>(n);

  double cumulative = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double ss = 0.0;
  for (double r : window_returns) {
    const double x = r - mean;
    ss += x * x;
    cumulative += x;
    lo = std::min(lo, cumulative);
    hi = std::max(hi, cumulative);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  // Rounding in the mean leaves ~1e-17 relative noise on constant windows.
  double scale = 0.0;
  for (double r : window_returns) scale = std::max(scale, std::abs(r));
  if (!(sd > 1e-13 * scale) || sd == 0.0) {
    throw Error(ErrorCode::DegenerateWindow, "window has zero dispersion");
  }
  return (hi - lo) / sd;
}

HurstSeries rolling_hurst(std::span<const double> returns, std::size_t window) {
  if (window < 2) throw Error(ErrorCode::InvalidParams, "Hurst window must be at least 2");
  if (returns.size() < window) {
    throw Error(ErrorCode::InsufficientData, std::to_string(returns.size()) +
                                                 " returns for a window of " + std::to_string(window));
  }
  HurstSeries out;
  out.window = window;
  const std::size_t count = returns.size() - window + 1;
  out.values.reserve(count);
  const double log_window = std::log2(static_cast<double>(window));
  double previous = 0.5;
  for (std::size_t end = window; end <= returns.size(); ++end) {
    double h = previous;
    try {
      const double rs = rs_statistic(returns.subspan(end - window, window));
      h = std::clamp(std::log2(rs) / log_window, 0.0, 1.0);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateWindow) throw;
      ++out.degenerate_windows;
    }
    out.values.push_back(h);
    previous = h;
  }
  return out;
}

HurstSeries rolling_hurst(const PriceSeries& prices, std::size_t window) {
  auto out = rolling_hurst(std::span<const double>(prices.log_returns), window);
  out.dates.reserve(out.values.size());
  for (std::size_t k = 0; k < out.values.size(); ++k) out.dates.push_back(prices.dates[k + window]);
  return out;
}

}  // namespace roughstop

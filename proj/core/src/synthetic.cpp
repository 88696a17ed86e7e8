#include "roughstop/synthetic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "roughstop/error.hpp"
#include "roughstop/rng.hpp"

namespace roughstop {

std::vector<double> fgn_increments(std::size_t n, double hurst, std::uint64_t seed) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw Error(ErrorCode::InvalidParams, "fGn needs H in (0, 1)");
  const double two_h = 2.0 * hurst;
  auto gamma = [&](double k) {
    return 0.5 * (std::pow(std::abs(k + 1.0), two_h) - 2.0 * std::pow(std::abs(k), two_h) +
                  std::pow(std::abs(k - 1.0), two_h));
  };
  Eigen::MatrixXd cov(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cov(i, j) = gamma(static_cast<double>(i) - static_cast<double>(j));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "fGn covariance not positive definite");
  NormalStream normal(seed, 0);
  Eigen::VectorXd z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = normal();
  const Eigen::VectorXd x = llt.matrixL() * z;
  return {x.data(), x.data() + n};
}

double black_price(double forward, double strike, double vol, double maturity, double r, OptionType type) {
  const double df = std::exp(-r * maturity);
  const double sd = vol * std::sqrt(maturity);
  if (!(sd > 0.0)) {
    return df * (type == OptionType::Put ? std::max(strike - forward, 0.0) : std::max(forward - strike, 0.0));
  }
  const double d1 = (std::log(forward / strike) + 0.5 * sd * sd) / sd;
  const double d2 = d1 - sd;
  auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  if (type == OptionType::Put) return df * (strike * cdf(-d2) - forward * cdf(-d1));
  return df * (forward * cdf(d1) - strike * cdf(d2));
}

namespace {

bool is_weekend(Date d) {
  // 1970-01-01 was a Thursday
  const int wd = ((d.days % 7) + 7) % 7;
  return wd == 2 || wd == 3;
}

}  // namespace

SyntheticMarket make_synthetic_market(const SyntheticMarketConfig& cfg) {
  if (cfg.days < 2) throw Error(ErrorCode::InvalidParams, "synthetic market needs at least 2 days");
  SyntheticMarket m;
  auto& px = m.prices;
  px.ticker = cfg.ticker;

  const auto noise = fgn_increments(cfg.days - 1, cfg.hurst, splitmix64(cfg.seed));
  NormalStream iv_shocks(cfg.seed, 1);

  Date d = cfg.start;
  while (is_weekend(d)) ++d.days;
  double close = cfg.spot;
  double log_iv = std::log(cfg.iv_level);
  const double mix = std::sqrt(1.0 - cfg.iv_return_corr * cfg.iv_return_corr);
  std::vector<double> ivs;
  for (std::size_t i = 0; i < cfg.days; ++i) {
    if (i > 0) {
      const double z = noise[i - 1];
      close *= std::exp(cfg.daily_vol * z - 0.5 * cfg.daily_vol * cfg.daily_vol);
      // mean-reverting log iv, shocks correlated with the return noise
      const double shock = cfg.iv_return_corr * z + mix * iv_shocks();
      log_iv += 0.05 * (std::log(cfg.iv_level) - log_iv) + cfg.iv_vol * shock;
      do ++d.days; while (is_weekend(d));
    }
    px.dates.push_back(d);
    px.closes.push_back(close);
    ivs.push_back(std::exp(log_iv));
  }
  px.log_returns = compute_log_returns(px.closes);
  px.stored_returns.assign(px.dates.size(), std::nan(""));
  for (std::size_t i = 1; i < px.dates.size(); ++i) px.stored_returns[i] = px.log_returns[i - 1];

  for (std::size_t i = 0; i < cfg.days; ++i) {
    for (int dte : cfg.dtes) {
      const double t = dte / 252.0;
      const double forward = px.closes[i] * std::exp(cfg.r * t);
      for (int k = -cfg.strikes_each_side; k <= cfg.strikes_each_side; ++k) {
        // round strikes to cents so they survive the csv round trip
        const double strike = std::round(forward * (1.0 + k * cfg.strike_step) * 100.0) / 100.0;
        const double smile = ivs[i] * (1.0 + 0.5 * std::pow(std::log(strike / forward), 2.0));
        for (auto type : {OptionType::Call, OptionType::Put}) {
          OptionQuote q;
          q.date = px.dates[i];
          q.days = dte;
          q.forward_price = forward;
          q.strike = strike;
          q.implied_vol = smile;
          q.premium = black_price(forward, strike, smile, t, cfg.r, type);
          q.type = type;
          q.ticker = cfg.ticker;
          m.quotes.push_back(std::move(q));
        }
      }
    }
  }
  return m;
}

void write_option_quotes(std::ostream& out, std::span<const OptionQuote> quotes) {
  out << "date,days,forward_price,strike_price,premium,impl_volatility,cp_flag,ticker,index_flag\n";
  char buf[256];
  for (const auto& q : quotes) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%.17g,%s,%s,0\n", format_date(q.date).c_str(), q.days,
                  q.forward_price, q.strike, q.premium, q.implied_vol, q.type == OptionType::Put ? "P" : "C",
                  q.ticker.c_str());
    out << buf;
  }
}

}  // namespace roughstop

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roughstop/dates.hpp"

namespace roughstop {

enum class OptionType { Put, Call };

// Accepts P/C as written by option vendors, and put/call in any case.
OptionType parse_option_type(std::string_view text);
std::string_view to_string(OptionType type) noexcept;

struct PriceSeries {
  std::string ticker;
  std::vector<Date> dates;
  std::vector<double> closes;
  std::vector<double> log_returns;     // log_returns[i] = ln(closes[i+1] / closes[i])
  std::vector<double> stored_returns;  // aligned with dates; NaN where the file had none
  std::size_t duplicate_rows = 0;      // (date, ticker) rows overwritten by a later row
};

// Reads `date,ticker,close[,return]` CSV, keeps rows for `ticker`, sorts by
// date and keeps the last row for a repeated date. Returns are always
// recomputed from closes.
PriceSeries load_price_series(std::istream& source, std::string_view ticker);
void write_price_series(std::ostream& out, const PriceSeries& series);

std::vector<double> compute_log_returns(std::span<const double> closes);

// Prefix of the series with dates <= last.
PriceSeries truncate_through(const PriceSeries& series, Date last);

struct OptionQuote {
  Date date;
  int days = 0;
  double forward_price = 0.0;
  double strike = 0.0;
  double premium = 0.0;
  double implied_vol = 0.0;
  OptionType type = OptionType::Put;
  std::string ticker;
};

struct OptionContract {
  std::string ticker;
  Date quote_date;
  int dte = 0;
  double strike = 0.0;
  double forward_price = 0.0;
  double premium = 0.0;
  double implied_vol = 0.0;
  OptionType type = OptionType::Put;

  [[nodiscard]] double maturity_years() const noexcept { return dte / 252.0; }
};

struct DteBand {
  int min_days = 1;
  int max_days = 60;
};

struct AtmVolSeries {
  std::vector<Date> dates;
  std::vector<double> atm_implied_vols;
};

// Parses the option CSV (header must name date, days, forward_price,
// strike_price, premium, impl_volatility, cp_flag, ticker). Rows with a
// blank numeric field are skipped; unparseable values throw MalformedRow.
std::vector<OptionQuote> load_option_quotes(std::istream& source);

// ATM contract: strike nearest the forward, ties toward the lower strike.
OptionContract select_contract(std::span<const OptionQuote> quotes, std::string_view ticker,
                               Date quote_date, int dte, OptionType type);
OptionContract select_contract(std::istream& source, std::string_view ticker, Date quote_date,
                               int dte, OptionType type);

AtmVolSeries extract_atm_vol_series(std::span<const OptionQuote> quotes, std::string_view ticker,
                                    DteBand band, std::optional<OptionType> type = std::nullopt);
AtmVolSeries extract_atm_vol_series(std::istream& source, std::string_view ticker, DteBand band,
                                    std::optional<OptionType> type = std::nullopt);

}  // namespace roughstop

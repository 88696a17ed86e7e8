#include "roughstop/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include "roughstop/error.hpp"

namespace roughstop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double parse_number(std::string_view s, std::size_t line_no) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorCode::MalformedRow,
                "line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return value;
}

class CsvTable {
 public:
  explicit CsvTable(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::MalformedRow, "missing CSV header");
    }
    std::string_view header = line;
    if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
    const auto names = split(header);
    for (std::size_t i = 0; i < names.size(); ++i) columns_[lower(names[i])] = i;
    width_ = names.size();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      rows_.emplace_back(line_no, std::move(line));
    }
  }

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const {
    const auto it = columns_.find(std::string(name));
    if (it == columns_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] std::size_t require(std::string_view name) const {
    auto c = column(name);
    if (!c) throw Error(ErrorCode::MalformedRow, "CSV header lacks column '" + std::string(name) + "'");
    return *c;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [line_no, text] : rows_) {
      auto fields = split(text);
      if (fields.size() < width_) {
        throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected " +
                                                 std::to_string(width_) + " fields");
      }
      fn(line_no, fields);
    }
  }

 private:
  std::unordered_map<std::string, std::size_t> columns_;
  std::size_t width_ = 0;
  std::vector<std::pair<std::size_t, std::string>> rows_;
};

}  // namespace

OptionType parse_option_type(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "p" || t == "put") return OptionType::Put;
  if (t == "c" || t == "call") return OptionType::Call;
  throw Error(ErrorCode::MalformedRow, "unknown option type '" + std::string(text) + "'");
}

std::string_view to_string(OptionType type) noexcept {
  return type == OptionType::Put ? "put" : "call";
}

std::vector<double> compute_log_returns(std::span<const double> closes) {
  std::vector<double> out;
  if (closes.size() < 2) return out;
  out.reserve(closes.size() - 1);
  for (std::size_t i = 0; i + 1 < closes.size(); ++i) out.push_back(std::log(closes[i + 1] / closes[i]));
  return out;
}

PriceSeries load_price_series(std::istream& source, std::string_view ticker) {
  const CsvTable table(source);
  const auto date_col = table.require("date");
  const auto ticker_col = table.require("ticker");
  const auto close_col = table.require("close");
  const auto return_col = table.column("return");

  // Later rows overwrite earlier ones for the same date.
  std::map<Date, std::pair<double, double>> by_date;
  std::size_t duplicates = 0;
  table.for_each([&](std::size_t line_no, const std::vector<std::string_view>& f) {
    if (f[ticker_col] != ticker) return;
    const Date d = parse_date(f[date_col]);
    const double close = parse_number(f[close_col], line_no);
    if (close <= 0.0) {
      throw Error(ErrorCode::NonPositivePrice,
                  "line " + std::to_string(line_no) + ": close " + std::string(f[close_col]));
    }
    double stored = kNaN;
    if (return_col && !f[*return_col].empty()) stored = parse_number(f[*return_col], line_no);
    auto [it, inserted] = by_date.insert_or_assign(d, std::make_pair(close, stored));
    if (!inserted) ++duplicates;
  });
  if (by_date.empty()) {
    throw Error(ErrorCode::EmptySeries, "no price rows for ticker '" + std::string(ticker) + "'");
  }

  PriceSeries series;
  series.ticker = std::string(ticker);
  series.duplicate_rows = duplicates;
  for (const auto& [d, row] : by_date) {
    series.dates.push_back(d);
    series.closes.push_back(row.first);
    series.stored_returns.push_back(row.second);
  }
  series.log_returns = compute_log_returns(series.closes);
  return series;
}

void write_price_series(std::ostream& out, const PriceSeries& series) {
  out << "date,ticker,close,return\n";
  char buf[64];
  for (std::size_t i = 0; i < series.dates.size(); ++i) {
    out << format_date(series.dates[i]) << ',' << series.ticker << ',';
    std::snprintf(buf, sizeof buf, "%.17g", series.closes[i]);
    out << buf << ',';
    if (i > 0) {
      std::snprintf(buf, sizeof buf, "%.17g", series.log_returns[i - 1]);
      out << buf;
    }
    out << '\n';
  }
}

PriceSeries truncate_through(const PriceSeries& series, Date last) {
  const auto end = std::upper_bound(series.dates.begin(), series.dates.end(), last);
  const auto n = static_cast<std::size_t>(end - series.dates.begin());
  PriceSeries out;
  out.ticker = series.ticker;
  out.duplicate_rows = series.duplicate_rows;
  out.dates.assign(series.dates.begin(), series.dates.begin() + n);
  out.closes.assign(series.closes.begin(), series.closes.begin() + n);
  out.stored_returns.assign(series.stored_returns.begin(), series.stored_returns.begin() + n);
  out.log_returns = compute_log_returns(out.closes);
  return out;
}

std::vector<OptionQuote> load_option_quotes(std::istream& source) {
  const CsvTable table(source);
  const auto date_col = table.require("date");
  const auto days_col = table.require("days");
  const auto fwd_col = table.require("forward_price");
  const auto strike_col = table.require("strike_price");
  const auto premium_col = table.require("premium");
  const auto iv_col = table.require("impl_volatility");
  const auto cp_col = table.require("cp_flag");
  const auto ticker_col = table.require("ticker");

  std::vector<OptionQuote> quotes;
  table.for_each([&](std::size_t line_no, const std::vector<std::string_view>& f) {
    for (auto c : {days_col, fwd_col, strike_col, premium_col, iv_col}) {
      if (f[c].empty()) return;
    }
    OptionQuote q;
    q.date = parse_date(f[date_col]);
    const double days = parse_number(f[days_col], line_no);
    if (days != std::floor(days)) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": non-integer days");
    }
    q.days = static_cast<int>(days);
    q.forward_price = parse_number(f[fwd_col], line_no);
    q.strike = parse_number(f[strike_col], line_no);
    q.premium = parse_number(f[premium_col], line_no);
    q.implied_vol = parse_number(f[iv_col], line_no);
    q.type = parse_option_type(f[cp_col]);
    q.ticker = std::string(f[ticker_col]);
    quotes.push_back(std::move(q));
  });
  return quotes;
}

namespace {

// Total order used to pick the ATM row; independent of input order.
auto atm_key(const OptionQuote& q) {
  return std::make_tuple(std::abs(q.strike - q.forward_price), q.strike, q.days, q.premium,
                         q.implied_vol, q.forward_price, q.type);
}

}  // namespace

OptionContract select_contract(std::span<const OptionQuote> quotes, std::string_view ticker,
                               Date quote_date, int dte, OptionType type) {
  const OptionQuote* best = nullptr;
  for (const auto& q : quotes) {
    if (q.ticker != ticker || q.date != quote_date || q.days != dte || q.type != type) continue;
    if (best == nullptr || atm_key(q) < atm_key(*best)) best = &q;
  }
  if (best == nullptr) {
    throw Error(ErrorCode::NoMatch, "no " + std::string(to_string(type)) + " quotes for " +
                                        std::string(ticker) + " on " + format_date(quote_date) +
                                        " with " + std::to_string(dte) + " days");
  }
  if (best->days < 1 || best->strike <= 0.0 || best->implied_vol < 0.0) {
    throw Error(ErrorCode::MalformedRow, "selected contract violates days>=1, strike>0, vol>=0");
  }
  return OptionContract{best->ticker, best->date,    best->days,        best->strike,
                        best->forward_price, best->premium, best->implied_vol, best->type};
}

OptionContract select_contract(std::istream& source, std::string_view ticker, Date quote_date,
                               int dte, OptionType type) {
  const auto quotes = load_option_quotes(source);
  return select_contract(quotes, ticker, quote_date, dte, type);
}

AtmVolSeries extract_atm_vol_series(std::span<const OptionQuote> quotes, std::string_view ticker,
                                    DteBand band, std::optional<OptionType> type) {
  std::map<Date, const OptionQuote*> best;
  for (const auto& q : quotes) {
    if (q.ticker != ticker || q.days < band.min_days || q.days > band.max_days) continue;
    if (type && q.type != *type) continue;
    if (q.implied_vol < 0.0) continue;
    auto& slot = best[q.date];
    if (slot == nullptr || atm_key(q) < atm_key(*slot)) slot = &q;
  }
  if (best.empty()) {
    throw Error(ErrorCode::EmptySeries, "no ATM quotes for '" + std::string(ticker) +
                                            "' within the requested days band");
  }
  AtmVolSeries series;
  for (const auto& [d, q] : best) {
    series.dates.push_back(d);
    series.atm_implied_vols.push_back(q->implied_vol);
  }
  return series;
}

AtmVolSeries extract_atm_vol_series(std::istream& source, std::string_view ticker, DteBand band,
                                    std::optional<OptionType> type) {
  const auto quotes = load_option_quotes(source);
  return extract_atm_vol_series(quotes, ticker, band, type);
}

}  // namespace roughstop

#include "roughstop/dates.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "roughstop/error.hpp"

namespace roughstop {

namespace {

int parse_field(std::string_view s, std::string_view whole) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::MalformedRow, "bad date '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw Error(ErrorCode::MalformedRow, "bad date '" + std::string(iso) + "'");
  }
  const int y = parse_field(iso.substr(0, 4), iso);
  const int m = parse_field(iso.substr(5, 2), iso);
  const int d = parse_field(iso.substr(8, 2), iso);
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::MalformedRow, "invalid calendar date '" + std::string(iso) + "'");
  }
  const std::chrono::sys_days sd{ymd};
  return Date{static_cast<std::int32_t>(sd.time_since_epoch().count())};
}

std::string format_date(Date d) {
  const std::chrono::sys_days sd{std::chrono::days{d.days}};
  const std::chrono::year_month_day ymd{sd};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace roughstop

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace roughstop {

// Calendar date stored as a day index (days since 1970-01-01). Files carry
// ISO-8601 strings; nothing here knows about time zones.
struct Date {
  std::int32_t days = 0;

  auto operator<=>(const Date&) const = default;
};

// Throws Error{MalformedRow} on anything other than YYYY-MM-DD.
Date parse_date(std::string_view iso);
std::string format_date(Date d);

}  // namespace roughstop

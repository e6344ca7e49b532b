#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "mmdedup/errors.hpp"

// Calendar math and ISO-8601 handling, all in UTC at second precision.
// Timestamps are carried around as seconds since the Unix epoch.

namespace mmdedup {

using EpochSeconds = std::int64_t;

namespace detail {

// Days since 1970-01-01 for a proleptic Gregorian date (Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);             // [0, 399]
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;   // [0, 365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;            // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
  int year;
  unsigned month;  // 1..12
  unsigned day;    // 1..31
};

inline CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);           // [0, 146096]
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);           // [0, 365]
  const unsigned mp = (5 * doy + 2) / 153;                                // [0, 11]
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;                        // [1, 31]
  const unsigned m = mp + (mp < 10 ? 3 : -9);                             // [1, 12]
  return {static_cast<int>(y + (m <= 2)), m, d};
}

inline bool is_leap_year(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline unsigned days_in_month(int y, unsigned m) {
  static const unsigned lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return lengths[m - 1];
}

// Floor division/modulo so pre-1970 timestamps land in the right day.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t floor_mod(std::int64_t a, std::int64_t b) {
  return a - floor_div(a, b) * b;
}

}  // namespace detail

inline int hour_of_day_utc(EpochSeconds t) {
  return static_cast<int>(detail::floor_mod(t, 86400) / 3600);
}

// 0 = Monday ... 6 = Sunday. 1970-01-01 was a Thursday (index 3).
inline int weekday_utc(EpochSeconds t) {
  const std::int64_t days = detail::floor_div(t, 86400);
  return static_cast<int>(detail::floor_mod(days + 3, 7));
}

// Parses the strict form YYYY-MM-DDTHH:MM:SSZ. Anything else is rejected.
inline EpochSeconds parse_iso8601_utc(const std::string& s) {
  auto fail = [&]() -> EpochSeconds {
    throw ValidationError("invalid ISO-8601 UTC timestamp: '" + s + "'");
  };
  if (s.size() != 20) return fail();
  if (s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
      s[16] != ':' || s[19] != 'Z')
    return fail();
  auto digits = [&](int pos, int len) -> int {
    int v = 0;
    for (int i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return -1;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  const int year = digits(0, 4);
  const int month = digits(5, 2);
  const int day = digits(8, 2);
  const int hour = digits(11, 2);
  const int minute = digits(14, 2);
  const int second = digits(17, 2);
  if (year < 0 || month < 1 || month > 12) return fail();
  if (day < 1 || static_cast<unsigned>(day) > detail::days_in_month(year, month))
    return fail();
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 || second > 59)
    return fail();
  const std::int64_t days = detail::days_from_civil(year, month, day);
  return days * 86400 + hour * 3600 + minute * 60 + second;
}

inline std::string format_iso8601_utc(EpochSeconds t) {
  const std::int64_t days = detail::floor_div(t, 86400);
  const std::int64_t rem = detail::floor_mod(t, 86400);
  const detail::CivilDate date = detail::civil_from_days(days);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                date.year, date.month, date.day,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem % 3600) / 60),
                static_cast<long long>(rem % 60));
  return buf;
}

}  // namespace mmdedup

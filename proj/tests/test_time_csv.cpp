#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "mmdedup/csv.hpp"
#include "mmdedup/rng.hpp"
#include "mmdedup/time_utc.hpp"

using namespace mmdedup;

namespace {

// Zeller's congruence, an independent weekday oracle. Returns 0 = Monday.
int zeller_weekday(int year, unsigned month, unsigned day) {
  int q = static_cast<int>(day);
  int m = static_cast<int>(month);
  int y = year;
  if (m < 3) {
    m += 12;
    y -= 1;
  }
  const int k = y % 100;
  const int j = y / 100;
  const int h = (q + 13 * (m + 1) / 5 + k + k / 4 + j / 4 + 5 * j) % 7;
  // h: 0 = Saturday, 1 = Sunday, 2 = Monday, ...
  return (h + 5) % 7;
}

}  // namespace

TEST_CASE("ISO-8601 parse/format round trip and known anchors") {
  // 2024-01-01 is day 19723 since the epoch and a Monday.
  const EpochSeconds jan1 = parse_iso8601_utc("2024-01-01T00:00:00Z");
  REQUIRE(jan1 == 19723LL * 86400);
  REQUIRE(weekday_utc(jan1) == 0);
  REQUIRE(hour_of_day_utc(jan1) == 0);

  const EpochSeconds t = parse_iso8601_utc("2024-01-01T22:00:00Z");
  REQUIRE(t == jan1 + 22 * 3600);
  REQUIRE(hour_of_day_utc(t) == 22);
  REQUIRE(format_iso8601_utc(t) == "2024-01-01T22:00:00Z");

  REQUIRE(parse_iso8601_utc("1970-01-01T00:00:00Z") == 0);
  REQUIRE(weekday_utc(0) == 3);  // Thursday
  REQUIRE(format_iso8601_utc(0) == "1970-01-01T00:00:00Z");

  // Pre-epoch values use floor math, not truncation.
  REQUIRE(format_iso8601_utc(-1) == "1969-12-31T23:59:59Z");
  REQUIRE(hour_of_day_utc(-1) == 23);
  REQUIRE(weekday_utc(-1) == 2);  // Wednesday

  // Leap-year handling.
  REQUIRE(format_iso8601_utc(parse_iso8601_utc("2024-02-29T12:30:45Z")) ==
          "2024-02-29T12:30:45Z");
  REQUIRE(format_iso8601_utc(parse_iso8601_utc("2000-02-29T00:00:00Z")) ==
          "2000-02-29T00:00:00Z");
}

TEST_CASE("ISO-8601 parser rejects non-strict forms") {
  const std::vector<std::string> bad = {
      "",
      "2024-01-01",                      // date only
      "2024-01-01T22:00:00",             // missing Z
      "2024-01-01 22:00:00Z",            // space separator
      "2024-01-01t22:00:00Z",            // lowercase t
      "2024-01-01T22:00:00+00:00",       // offset form
      "2024-01-01T22:00:00.000Z",        // fractional seconds
      "2024-13-01T00:00:00Z",            // month 13
      "2024-00-10T00:00:00Z",            // month 0
      "2024-01-00T00:00:00Z",            // day 0
      "2024-01-32T00:00:00Z",            // day 32
      "2023-02-29T00:00:00Z",            // not a leap year
      "2024-01-01T24:00:00Z",            // hour 24
      "2024-01-01T00:60:00Z",            // minute 60
      "2024-01-01T00:00:60Z",            // second 60
      "2O24-01-01T00:00:00Z",            // letter O for zero
      "20240101T000000Z",                // compact form
  };
  for (const auto& s : bad) {
    INFO("input: '" << s << "'");
    REQUIRE_THROWS_AS(parse_iso8601_utc(s), ValidationError);
  }
}

TEST_CASE("weekday matches Zeller's congruence over random dates") {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto day_index =
        static_cast<std::int64_t>(rng.range(-40000, 40000));  // ~1860..2079
    const auto civil = mmdedup::detail::civil_from_days(day_index);
    const int expected = zeller_weekday(civil.year, civil.month, civil.day);
    REQUIRE(weekday_utc(day_index * 86400) == expected);
    REQUIRE(weekday_utc(day_index * 86400 + 86399) == expected);
  }
}

TEST_CASE("timestamp round trip over random instants") {
  Rng rng(202);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = static_cast<EpochSeconds>(
        rng.range(0, 4102444799LL));  // 1970..2099
    REQUIRE(parse_iso8601_utc(format_iso8601_utc(t)) == t);
  }
}

TEST_CASE("CSV parser handles quoting, separators, and line endings") {
  SECTION("plain rows") {
    const auto rows = csv::parse("a,b,c\n1,2,3\n");
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0] == csv::Row{"a", "b", "c"});
    REQUIRE(rows[1] == csv::Row{"1", "2", "3"});
  }
  SECTION("quoted commas, escaped quotes, embedded newlines") {
    const auto rows = csv::parse("\"a,b\",\"say \"\"hi\"\"\",\"two\nlines\"\n");
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0] == csv::Row{"a,b", "say \"hi\"", "two\nlines"});
  }
  SECTION("CRLF endings") {
    const auto rows = csv::parse("a,b\r\nc,d\r\n");
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0] == csv::Row{"a", "b"});
    REQUIRE(rows[1] == csv::Row{"c", "d"});
  }
  SECTION("no trailing newline still yields the final row") {
    const auto rows = csv::parse("a,b\nc,d");
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[1] == csv::Row{"c", "d"});
  }
  SECTION("trailing newline does not add an empty row") {
    REQUIRE(csv::parse("a\n").size() == 1);
  }
  SECTION("empty trailing field survives") {
    const auto rows = csv::parse("a,\n");
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0] == csv::Row{"a", ""});
  }
  SECTION("unterminated quote is a schema error") {
    REQUIRE_THROWS_AS(csv::parse("\"abc\n"), SchemaError);
  }
  SECTION("empty document parses to zero rows") {
    REQUIRE(csv::parse("").empty());
  }
}

TEST_CASE("CSV writer output re-parses to the original row") {
  const std::vector<csv::Row> tricky = {
      {"plain", "fields", "only"},
      {"comma,inside", "quote\"inside", "newline\ninside"},
      {"", "", ""},
      {"\"", ",", "\r\n"},
      {"json", R"(["2024-01-01T00:00:00Z","2024-01-02T00:00:00Z"])"},
  };
  for (const auto& row : tricky) {
    const auto parsed = csv::parse(csv::format_row(row));
    REQUIRE(parsed.size() == 1);
    REQUIRE(parsed[0] == row);
  }
}

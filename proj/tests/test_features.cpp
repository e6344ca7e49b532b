#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "mmdedup/features.hpp"

using namespace mmdedup;

namespace {

EpochSeconds ts(const std::string& s) { return parse_iso8601_utc(s); }

}  // namespace

TEST_CASE("behavior vector of an empty login list is all zeros") {
  const Vec v = behavior_vector({});
  REQUIRE(v.size() == kBehaviorDim);
  for (double x : v) REQUIRE(x == 0.0);
}

TEST_CASE("behavior vector of a single Monday 22:00 login") {
  const Vec v = behavior_vector({ts("2024-01-01T22:00:00Z")});  // a Monday
  for (std::size_t h = 0; h < kHourBins; ++h)
    REQUIRE(v[h] == (h == 22 ? 1.0 : 0.0));
  for (std::size_t w = 0; w < kWeekdayBins; ++w)
    REQUIRE(v[kHourBins + w] == (w == 0 ? 1.0 : 0.0));  // Monday first
  REQUIRE(std::fabs(v[31] - 0.693147) <= 1e-6);  // log1p(1)
  REQUIRE(v[32] == 0.0);                         // no gap with one login
}

TEST_CASE("behavior vector of two logins 24 hours apart") {
  const Vec v = behavior_vector(
      {ts("2024-01-01T22:00:00Z"), ts("2024-01-02T22:00:00Z")});  // Mon, Tue
  REQUIRE(v[22] == 1.0);                       // both in hour bin 22
  REQUIRE(v[kHourBins + 0] == 0.5);            // Monday
  REQUIRE(v[kHourBins + 1] == 0.5);            // Tuesday
  REQUIRE(std::fabs(v[31] - 1.098612) <= 1e-6);  // log1p(2)
  REQUIRE(v[32] == 24.0);                      // mean gap in hours
}

TEST_CASE("behavior histograms are normalized distributions") {
  const Vec v = behavior_vector({ts("2024-01-01T08:00:00Z"), ts("2024-01-03T09:30:00Z"),
                                 ts("2024-01-06T08:15:00Z")});
  double hour_sum = 0.0;
  double weekday_sum = 0.0;
  for (std::size_t h = 0; h < kHourBins; ++h) hour_sum += v[h];
  for (std::size_t w = 0; w < kWeekdayBins; ++w) weekday_sum += v[kHourBins + w];
  REQUIRE(std::fabs(hour_sum - 1.0) <= 1e-12);
  REQUIRE(std::fabs(weekday_sum - 1.0) <= 1e-12);
}

TEST_CASE("mean inter-login gap is capped at the outlier limit") {
  // Two logins ~11,000 hours apart exceed the 10,000-hour cap.
  const EpochSeconds start = ts("2024-01-01T00:00:00Z");
  const Vec v = behavior_vector({start, start + 11000LL * 3600});
  REQUIRE(v[32] == 10000.0);
}

TEST_CASE("behavior matrix shapes and the count_only variant") {
  const std::vector<std::vector<EpochSeconds>> logins = {
      {}, {ts("2024-01-01T10:00:00Z")}, {ts("2024-01-01T10:00:00Z"), ts("2024-01-02T10:00:00Z")}};

  const Matrix full = behavior_matrix(logins);
  REQUIRE(full.rows == 3);
  REQUIRE(full.cols == kBehaviorDim);
  REQUIRE(full.row_vec(1) == behavior_vector(logins[1]));

  BehaviorConfig cfg;
  cfg.count_only = true;
  const Matrix counts = behavior_matrix(logins, cfg);
  REQUIRE(counts.rows == 3);
  REQUIRE(counts.cols == 1);
  REQUIRE(counts.at(0, 0) == 0.0);
  REQUIRE(counts.at(1, 0) == 1.0);
  REQUIRE(counts.at(2, 0) == 2.0);
}

TEST_CASE("device one-hot encoding with per-block vocabularies") {
  const DeviceEncoding enc =
      device_matrix({"Chrome", "Safari"}, {"Windows", "Windows"});
  REQUIRE(enc.browser_vocab == std::vector<std::string>{"chrome", "safari"});
  REQUIRE(enc.os_vocab == std::vector<std::string>{"windows"});
  REQUIRE(enc.one_hot.rows == 2);
  REQUIRE(enc.one_hot.cols == 3);
  REQUIRE(enc.one_hot.row_vec(0) == Vec{1.0, 0.0, 1.0});
  REQUIRE(enc.one_hot.row_vec(1) == Vec{0.0, 1.0, 1.0});
}

TEST_CASE("device encoding case-folds before building vocabularies") {
  const DeviceEncoding enc = device_matrix({"chrome", "Chrome"}, {"MACOS", "macos"});
  REQUIRE(enc.browser_vocab == std::vector<std::string>{"chrome"});
  REQUIRE(enc.os_vocab == std::vector<std::string>{"macos"});
  REQUIRE(enc.one_hot.row_vec(0) == enc.one_hot.row_vec(1));
}

TEST_CASE("device encoding is independent of record order") {
  const DeviceEncoding a = device_matrix({"chrome", "safari"}, {"windows", "macos"});
  const DeviceEncoding b = device_matrix({"safari", "chrome"}, {"macos", "windows"});
  REQUIRE(a.browser_vocab == b.browser_vocab);
  REQUIRE(a.os_vocab == b.os_vocab);
  REQUIRE(a.one_hot.row_vec(0) == b.one_hot.row_vec(1));
  REQUIRE(a.one_hot.row_vec(1) == b.one_hot.row_vec(0));
}

TEST_CASE("device encoding rejects mismatched column lengths") {
  REQUIRE_THROWS_AS(device_matrix({"chrome"}, {"windows", "macos"}), ShapeError);
}

TEST_CASE("reduce_device clamps the output dimension") {
  SECTION("3 distinct rows, target 16: dimension min(16, width, 2)") {
    const DeviceEncoding enc = device_matrix({"chrome", "safari", "firefox"},
                                             {"windows", "macos", "linux"});
    REQUIRE(enc.one_hot.cols == 6);
    const Matrix red = reduce_device(enc.one_hot, 16);
    REQUIRE(red.rows == 3);
    REQUIRE(red.cols == 2);  // min(16, 6, 3 - 1)
  }
  SECTION("many rows, width 8, target 16: dimension 8") {
    const std::vector<std::string> browsers_pool = {"chrome", "safari", "firefox", "edge"};
    const std::vector<std::string> oses_pool = {"windows", "macos", "android", "ios"};
    std::vector<std::string> browsers, oses;
    for (std::size_t i = 0; i < 1000; ++i) {
      browsers.push_back(browsers_pool[i % 4]);
      oses.push_back(oses_pool[(i / 4) % 4]);
    }
    const DeviceEncoding enc = device_matrix(browsers, oses);
    REQUIRE(enc.one_hot.cols == 8);
    const Matrix red = reduce_device(enc.one_hot, 16);
    REQUIRE(red.rows == 1000);
    REQUIRE(red.cols == 8);  // min(16, 8, 999)
  }
}

TEST_CASE("identical devices for all records survive reduction as identical") {
  // Zero-variance one-hots leave PCA nothing to fit; the raw encoding comes
  // back so identical devices still compare as identical.
  const DeviceEncoding enc = device_matrix({"chrome", "chrome", "chrome"},
                                           {"windows", "windows", "windows"});
  const Matrix red = reduce_device(enc.one_hot, 16);
  REQUIRE(red.rows == 3);
  REQUIRE(red.cols == enc.one_hot.cols);
  REQUIRE(red.row_vec(0) == red.row_vec(1));
  REQUIRE(red.row_vec(1) == red.row_vec(2));
  REQUIRE(cosine(red.row(0), red.row(2), red.cols) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("reduce_device needs at least two records") {
  const DeviceEncoding enc = device_matrix({"chrome"}, {"windows"});
  REQUIRE_THROWS_AS(reduce_device(enc.one_hot, 16), ConfigError);
  REQUIRE_THROWS_AS(reduce_device(Matrix(0, 0), 16), ConfigError);
}

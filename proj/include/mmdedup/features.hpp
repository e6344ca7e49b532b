#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mmdedup/embedding.hpp"
#include "mmdedup/errors.hpp"
#include "mmdedup/linalg.hpp"
#include "mmdedup/time_utc.hpp"

// Behavioral featurization of login timestamps and categorical encoding of
// the device columns.

namespace mmdedup {

inline constexpr std::size_t kHourBins = 24;
inline constexpr std::size_t kWeekdayBins = 7;
inline constexpr std::size_t kBehaviorDim = kHourBins + kWeekdayBins + 2;  // 33
inline constexpr double kMaxMeanGapHours = 10000.0;  // outlier cap

struct BehaviorConfig {
  // When set, reduces the behavior signal to the bare login count (the
  // minimal variant); otherwise the full 33-value profile is used.
  bool count_only = false;
};

// 33-value activity profile, all computed in UTC:
//   [0..23]  normalized hour-of-day histogram
//   [24..30] normalized day-of-week histogram (Monday first)
//   [31]     log1p(login count)
//   [32]     mean inter-login gap in hours (0 when fewer than 2 logins)
// Histograms are all-zero for a record with no logins.
inline Vec behavior_vector(const std::vector<EpochSeconds>& login_times) {
  Vec v(kBehaviorDim, 0.0);
  const std::size_t count = login_times.size();
  if (count == 0) return v;
  const double w = 1.0 / static_cast<double>(count);
  for (EpochSeconds t : login_times) {
    v[static_cast<std::size_t>(hour_of_day_utc(t))] += w;
    v[kHourBins + static_cast<std::size_t>(weekday_utc(t))] += w;
  }
  v[kHourBins + kWeekdayBins] = std::log1p(static_cast<double>(count));
  if (count >= 2) {
    double gap_sum = 0.0;
    for (std::size_t i = 1; i < count; ++i)
      gap_sum += static_cast<double>(login_times[i] - login_times[i - 1]) / 3600.0;
    v[kHourBins + kWeekdayBins + 1] =
        std::min(gap_sum / static_cast<double>(count - 1), kMaxMeanGapHours);
  }
  return v;
}

inline Matrix behavior_matrix(const std::vector<std::vector<EpochSeconds>>& logins,
                              const BehaviorConfig& cfg = {}) {
  if (cfg.count_only) {
    Matrix out(logins.size(), 1);
    for (std::size_t r = 0; r < logins.size(); ++r)
      out.at(r, 0) = static_cast<double>(logins[r].size());
    return out;
  }
  Matrix out(logins.size(), kBehaviorDim);
  for (std::size_t r = 0; r < logins.size(); ++r) {
    const Vec v = behavior_vector(logins[r]);
    std::copy(v.begin(), v.end(), out.row(r));
  }
  return out;
}

struct DeviceConfig {
  std::size_t target_dim = 16;  // PCA target for the one-hot matrix
};

struct DeviceEncoding {
  std::vector<std::string> browser_vocab;  // sorted distinct case-folded values
  std::vector<std::string> os_vocab;
  Matrix one_hot;  // n x (|browser_vocab| + |os_vocab|), one 1 per block
};

// One-hot encodes browser and os against dataset-relative vocabularies.
// Values are case-folded first, so "Chrome" and "chrome" share a column,
// and vocabularies are sorted so row order never changes the encoding.
inline DeviceEncoding device_matrix(const std::vector<std::string>& browsers,
                                    const std::vector<std::string>& oses) {
  if (browsers.size() != oses.size())
    throw ShapeError("device_matrix: browser/os column lengths differ");

  auto build_vocab = [](const std::vector<std::string>& column) {
    std::vector<std::string> vocab;
    for (const auto& value : column) vocab.push_back(normalize_text(value));
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    return vocab;
  };

  DeviceEncoding enc;
  enc.browser_vocab = build_vocab(browsers);
  enc.os_vocab = build_vocab(oses);

  auto index_of = [](const std::vector<std::string>& vocab, const std::string& value) {
    return static_cast<std::size_t>(
        std::lower_bound(vocab.begin(), vocab.end(), value) - vocab.begin());
  };

  const std::size_t n = browsers.size();
  const std::size_t width = enc.browser_vocab.size() + enc.os_vocab.size();
  enc.one_hot = Matrix(n, width);
  for (std::size_t r = 0; r < n; ++r) {
    enc.one_hot.at(r, index_of(enc.browser_vocab, normalize_text(browsers[r]))) = 1.0;
    enc.one_hot.at(r, enc.browser_vocab.size() +
                          index_of(enc.os_vocab, normalize_text(oses[r]))) = 1.0;
  }
  return enc;
}

// PCA-reduces the one-hot device matrix. The effective dimension is
// min(target_dim, vector width, record count - 1); a single-record dataset
// leaves no usable dimension at all. When every record carries the same
// device (zero variance), the raw one-hots are returned unchanged so that
// identical devices still compare as identical downstream.
inline Matrix reduce_device(const Matrix& one_hot, std::size_t target_dim) {
  if (one_hot.rows == 0) throw ConfigError("reduce_device: empty device matrix");
  if (one_hot.rows < 2)
    throw ConfigError(
        "reduce_device: PCA needs at least 2 records (effective dimension would be 0)");
  const std::size_t k = std::min({target_dim, one_hot.cols, one_hot.rows - 1});
  const PcaModel model = pca_fit(one_hot, k);
  if (model.degenerate) return one_hot;
  return pca_transform(model, one_hot);
}

}  // namespace mmdedup

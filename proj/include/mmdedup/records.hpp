#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmdedup/csv.hpp"
#include "mmdedup/errors.hpp"
#include "mmdedup/fusion.hpp"
#include "mmdedup/time_utc.hpp"

// Canonical record schema, CSV ingestion/emission, and ground-truth
// handling. The dataset schema deliberately carries no PII-class columns:
// only name, city, browser, os, and login timestamps.

namespace mmdedup {

struct RawRecord {
  int record_id = 0;
  std::string name;
  std::string city;
  std::string browser;
  std::string os;
  std::vector<EpochSeconds> login_times;  // sorted ascending, may be empty

  bool operator==(const RawRecord&) const = default;
};

struct Dataset;

struct GroundTruth {
  // record_id -> entity_id; every record appears exactly once.
  std::map<int, int> entity_of;

  // All unordered record pairs sharing an entity_id, i < j, sorted.
  std::vector<std::pair<int, int>> true_pairs() const {
    std::unordered_map<int, std::vector<int>> groups;
    for (const auto& [record, entity] : entity_of) groups[entity].push_back(record);
    std::vector<std::pair<int, int>> pairs;
    for (auto& [entity, members] : groups) {
      std::sort(members.begin(), members.end());
      for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = a + 1; b < members.size(); ++b)
          pairs.emplace_back(members[a], members[b]);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
  }
};

struct Dataset {
  std::vector<RawRecord> records;
  std::optional<GroundTruth> ground_truth;

  std::size_t size() const { return records.size(); }
};

inline const std::vector<std::string>& dataset_columns() {
  static const std::vector<std::string> cols = {"name", "city", "browser", "os",
                                                "login_times"};
  return cols;
}

namespace detail {

inline void check_header(const csv::Row& header, const std::vector<std::string>& expected,
                         const std::string& path) {
  for (const auto& col : expected)
    if (std::find(header.begin(), header.end(), col) == header.end())
      throw SchemaError(path + ": missing column '" + col + "'");
  for (const auto& col : header)
    if (std::find(expected.begin(), expected.end(), col) == expected.end())
      throw SchemaError(path + ": unexpected column '" + col + "'");
  if (header != expected)
    throw SchemaError(path + ": columns out of order; expected " +
                      [&] {
                        std::string s;
                        for (const auto& c : expected) s += (s.empty() ? "" : ",") + c;
                        return s;
                      }());
}

inline std::vector<EpochSeconds> parse_login_cell(const std::string& cell,
                                                  std::size_t file_row) {
  nlohmann::json parsed = nlohmann::json::parse(cell, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array())
    throw ValidationError("row " + std::to_string(file_row) +
                          ": login_times is not a JSON array");
  std::vector<EpochSeconds> times;
  times.reserve(parsed.size());
  for (const auto& item : parsed) {
    if (!item.is_string())
      throw ValidationError("row " + std::to_string(file_row) +
                            ": login_times entry is not a string");
    try {
      times.push_back(parse_iso8601_utc(item.get<std::string>()));
    } catch (const ValidationError& e) {
      throw ValidationError("row " + std::to_string(file_row) + ": " + e.what());
    }
  }
  std::sort(times.begin(), times.end());
  return times;
}

inline int parse_int_cell(const std::string& cell, const std::string& column,
                          std::size_t file_row) {
  if (cell.empty())
    throw ValidationError("row " + std::to_string(file_row) + ": empty " + column);
  std::size_t pos = 0;
  int value = 0;
  try {
    value = std::stoi(cell, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != cell.size())
    throw ValidationError("row " + std::to_string(file_row) + ": " + column +
                          " is not an integer: '" + cell + "'");
  return value;
}

}  // namespace detail

// Loads the 5-column dataset CSV. record_id is assigned by row order.
inline Dataset load_dataset(const std::string& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw SchemaError(path + ": empty file");
  detail::check_header(rows[0], dataset_columns(), path);
  if (rows.size() == 1) throw SchemaError(path + ": no data rows");

  Dataset ds;
  ds.records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    const std::size_t file_row = r + 1;
    if (row.size() != 5)
      throw SchemaError(path + ": row " + std::to_string(file_row) + " has " +
                        std::to_string(row.size()) + " fields, expected 5");
    RawRecord rec;
    rec.record_id = static_cast<int>(r - 1);
    rec.name = row[0];
    rec.city = row[1];
    rec.browser = row[2];
    rec.os = row[3];
    rec.login_times = detail::parse_login_cell(row[4], file_row);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

inline void write_dataset(const std::string& path, const Dataset& ds) {
  csv::Writer out(path);
  out.write_row(dataset_columns());
  for (const auto& rec : ds.records) {
    nlohmann::json times = nlohmann::json::array();
    for (EpochSeconds t : rec.login_times) times.push_back(format_iso8601_utc(t));
    out.write_row({rec.name, rec.city, rec.browser, rec.os, times.dump()});
  }
  out.close();
}

inline GroundTruth load_ground_truth(const std::string& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw SchemaError(path + ": empty file");
  detail::check_header(rows[0], {"record_id", "entity_id"}, path);
  GroundTruth gt;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t file_row = r + 1;
    if (rows[r].size() != 2)
      throw SchemaError(path + ": row " + std::to_string(file_row) + " has " +
                        std::to_string(rows[r].size()) + " fields, expected 2");
    const int record = detail::parse_int_cell(rows[r][0], "record_id", file_row);
    const int entity = detail::parse_int_cell(rows[r][1], "entity_id", file_row);
    if (!gt.entity_of.emplace(record, entity).second)
      throw ValidationError(path + ": duplicate record_id " + std::to_string(record));
  }
  return gt;
}

inline void write_ground_truth(const std::string& path, const GroundTruth& gt) {
  csv::Writer out(path);
  out.write_row({"record_id", "entity_id"});
  for (const auto& [record, entity] : gt.entity_of)
    out.write_row({std::to_string(record), std::to_string(entity)});
  out.close();
}

// Checks that a ground truth covers a dataset exactly: every record_id
// 0..n-1 present once, nothing outside the range.
inline void validate_coverage(const Dataset& ds, const GroundTruth& gt) {
  const int n = static_cast<int>(ds.records.size());
  if (static_cast<int>(gt.entity_of.size()) != n)
    throw ValidationError("ground truth covers " + std::to_string(gt.entity_of.size()) +
                          " records, dataset has " + std::to_string(n));
  for (const auto& [record, entity] : gt.entity_of)
    if (record < 0 || record >= n)
      throw ValidationError("ground truth record_id " + std::to_string(record) +
                            " outside dataset range [0, " + std::to_string(n) + ")");
}

inline std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Pairs CSV: record_i,record_j,text_sim,behavior_sim,device_sim,fused_score
// with rows sorted by (i, j) and floats at 6 decimal places.
inline void write_pairs(const std::string& path, std::vector<ScoredPair> pairs) {
  for (const auto& p : pairs)
    if (p.i >= p.j)
      throw ValidationError("scored pair (" + std::to_string(p.i) + ", " +
                            std::to_string(p.j) + ") violates i < j");
  std::sort(pairs.begin(), pairs.end(),
            [](const ScoredPair& a, const ScoredPair& b) {
              return std::pair(a.i, a.j) < std::pair(b.i, b.j);
            });
  csv::Writer out(path);
  out.write_row({"record_i", "record_j", "text_sim", "behavior_sim", "device_sim",
                 "fused_score"});
  for (const auto& p : pairs)
    out.write_row({std::to_string(p.i), std::to_string(p.j), format_fixed6(p.text_sim),
                   format_fixed6(p.behavior_sim), format_fixed6(p.device_sim),
                   format_fixed6(p.fused)});
  out.close();
}

// Reads the first two integer columns of any headered pairs CSV (works for
// both the fused-pairs file and the baseline file).
inline std::vector<std::pair<int, int>> load_pairs(const std::string& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw SchemaError(path + ": empty file");
  if (rows[0].size() < 2)
    throw SchemaError(path + ": expected at least two columns");
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t file_row = r + 1;
    if (rows[r].size() < 2)
      throw SchemaError(path + ": row " + std::to_string(file_row) +
                        " has fewer than 2 fields");
    pairs.emplace_back(detail::parse_int_cell(rows[r][0], "record_i", file_row),
                       detail::parse_int_cell(rows[r][1], "record_j", file_row));
  }
  return pairs;
}

}  // namespace mmdedup

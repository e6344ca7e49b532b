#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mmdedup/embedding.hpp"
#include "mmdedup/errors.hpp"
#include "mmdedup/records.hpp"

// String-matching baseline (normalized Levenshtein ratio over name+city)
// and the pair-level precision/recall/F1 evaluation harness.

namespace mmdedup {

// Decodes UTF-8 into Unicode scalar values so edit distance counts
// characters, not bytes. Invalid sequences degrade gracefully: each bad
// byte becomes its own code point, keeping the function total and
// deterministic on arbitrary input.
inline std::u32string decode_utf8(const std::string& s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(s[i]);
    std::size_t len;
    char32_t cp;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(b0);
      ++i;
      continue;
    }
    if (i + len > n) {
      out.push_back(b0);
      ++i;
      continue;
    }
    bool valid = true;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(s[i + k]);
      if ((bk & 0xC0) != 0x80) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!valid || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(b0);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

// Classic two-row dynamic program; unit cost for insert/delete/substitute.
inline std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  if (la == 0) return lb;
  if (lb == 0) return la;
  std::vector<std::size_t> prev(lb + 1), cur(lb + 1);
  for (std::size_t j = 0; j <= lb; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= la; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= lb; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[lb];
}

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
  return levenshtein(decode_utf8(a), decode_utf8(b));
}

namespace detail {

// Similarity on already-normalized, already-decoded strings.
inline double similarity_normalized(const std::u32string& a, const std::u32string& b) {
  const std::size_t longer = std::max(a.size(), b.size());
  if (longer == 0) return 1.0;  // both empty: identical by convention
  const std::size_t d = levenshtein(a, b);
  return 1.0 - static_cast<double>(d) / static_cast<double>(longer);
}

}  // namespace detail

// Normalized Levenshtein ratio 1 - D/max(|a'|, |b'|) on case-folded,
// whitespace-collapsed inputs.
inline double string_similarity(const std::string& a, const std::string& b) {
  return detail::similarity_normalized(decode_utf8(normalize_text(a)),
                                       decode_utf8(normalize_text(b)));
}

struct BaselineConfig {
  double threshold = 0.85;

  void validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0))
      throw ConfigError("baseline threshold must be in [0,1], got " +
                        std::to_string(threshold));
  }
};

struct BaselinePair {
  int i = 0;  // record indices, i < j
  int j = 0;
  double similarity = 0.0;
};

// Flags every unordered pair whose name+city similarity meets the
// threshold (inclusive). Output is sorted by (i, j).
inline std::vector<BaselinePair> baseline_pairs(const std::vector<RawRecord>& records,
                                                const BaselineConfig& cfg = {}) {
  cfg.validate();
  if (records.size() < 2)
    throw ConfigError("baseline_pairs requires at least 2 records, got " +
                      std::to_string(records.size()));

  std::vector<std::u32string> keys;
  keys.reserve(records.size());
  for (const auto& rec : records)
    keys.push_back(decode_utf8(combine_text(rec.name, rec.city)));

  std::vector<BaselinePair> out;
  const int n = static_cast<int>(records.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double sim = detail::similarity_normalized(keys[i], keys[j]);
      if (sim >= cfg.threshold) out.push_back({i, j, sim});
    }
  }
  return out;
}

struct EvalReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
};

// Applies the degenerate-denominator conventions: 0/0 -> 1.0 for precision
// and recall (vacuously perfect), F1 = 0 when precision + recall = 0.
inline EvalReport make_eval_report(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalReport r;
  r.true_positives = tp;
  r.false_positives = fp;
  r.false_negatives = fn;
  r.precision = (tp + fp == 0) ? 1.0
                               : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = (tp + fn == 0) ? 1.0
                            : static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double pr = r.precision + r.recall;
  r.f1 = (pr == 0.0) ? 0.0 : 2.0 * r.precision * r.recall / pr;
  return r;
}

// Pair-level comparison of a predicted duplicate set against ground truth.
// Pairs are canonicalized to (min, max) and deduplicated first.
inline EvalReport evaluate(const std::vector<std::pair<int, int>>& predicted,
                           const GroundTruth& truth) {
  std::set<std::pair<int, int>> pred;
  for (auto [i, j] : predicted) {
    if (i == j)
      throw ValidationError("evaluate: self-pair (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
    if (!truth.entity_of.count(i) || !truth.entity_of.count(j))
      throw ValidationError("evaluate: pair (" + std::to_string(i) + "," +
                            std::to_string(j) + ") references a record outside the ground truth");
    pred.emplace(std::min(i, j), std::max(i, j));
  }

  const auto truth_vec = truth.true_pairs();
  const std::set<std::pair<int, int>> actual(truth_vec.begin(), truth_vec.end());

  std::size_t tp = 0;
  for (const auto& p : pred) tp += actual.count(p);
  const std::size_t fp = pred.size() - tp;
  const std::size_t fn = actual.size() - tp;
  return make_eval_report(tp, fp, fn);
}

inline std::string eval_report_json(const EvalReport& r) {
  std::string out = "{";
  out += "\"tp\": " + std::to_string(r.true_positives);
  out += ", \"fp\": " + std::to_string(r.false_positives);
  out += ", \"fn\": " + std::to_string(r.false_negatives);
  out += ", \"precision\": " + format_fixed6(r.precision);
  out += ", \"recall\": " + format_fixed6(r.recall);
  out += ", \"f1\": " + format_fixed6(r.f1);
  out += "}";
  return out;
}

inline std::string eval_report_table(const EvalReport& r) {
  std::string out;
  out += "metric              value\n";
  out += "------------------  --------\n";
  out += "true positives      " + std::to_string(r.true_positives) + "\n";
  out += "false positives     " + std::to_string(r.false_positives) + "\n";
  out += "false negatives     " + std::to_string(r.false_negatives) + "\n";
  out += "precision           " + format_fixed6(r.precision) + "\n";
  out += "recall              " + format_fixed6(r.recall) + "\n";
  out += "f1                  " + format_fixed6(r.f1) + "\n";
  out += "(0/0 denominators count as 1.0; F1 is 0 when precision+recall is 0)\n";
  return out;
}

// Writes baseline pairs as record_i,record_j,similarity.
inline void write_baseline_pairs(const std::string& path,
                                 const std::vector<BaselinePair>& pairs) {
  csv::Writer w(path);
  w.write_row({"record_i", "record_j", "similarity"});
  for (const auto& p : pairs)
    w.write_row({std::to_string(p.i), std::to_string(p.j), format_fixed6(p.similarity)});
  w.close();
}

}  // namespace mmdedup

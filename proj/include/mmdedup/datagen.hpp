#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mmdedup/errors.hpp"
#include "mmdedup/records.hpp"
#include "mmdedup/rng.hpp"
#include "mmdedup/time_utc.hpp"

// Synthetic CRM data with injected ground-truth duplicates. Entities get a
// base identity (name, city, device, login habit); duplicated entities get
// extra records with realistic noise: abbreviated or typo'd names, a device
// that usually persists, and fresh logins from the same habit.

namespace mmdedup {

struct GenConfig {
  std::size_t n_entities = 833;      // 833 + ~20% duplicates ~= 1000 records
  double duplicate_fraction = 0.2;   // fraction of entities given extra records
  double typo_prob = 0.3;            // P(one-character substitution in the name)
  double abbrev_prob = 0.3;          // P(given name collapses to an initial)
  double device_persist_prob = 0.7;  // P(duplicate keeps browser+os)
  double behavior_jitter_hours = 1.0;
  int logins_min = 3;
  int logins_max = 15;
  std::uint64_t seed = 42;
  std::size_t max_group_size = 2;  // records per duplicated entity

  void validate() const {
    if (n_entities < 2) throw ConfigError("datagen: n_entities must be >= 2");
    auto prob = [](double p, const char* what) {
      if (!(p >= 0.0 && p <= 1.0))
        throw ConfigError(std::string("datagen: ") + what + " must be in [0,1]");
    };
    prob(duplicate_fraction, "duplicate_fraction");
    prob(typo_prob, "typo_prob");
    prob(abbrev_prob, "abbrev_prob");
    prob(device_persist_prob, "device_persist_prob");
    if (!(behavior_jitter_hours >= 0.0))
      throw ConfigError("datagen: behavior_jitter_hours must be >= 0");
    if (logins_min < 0 || logins_max < logins_min)
      throw ConfigError("datagen: logins range must satisfy 0 <= min <= max");
    if (max_group_size < 2)
      throw ConfigError("datagen: max_group_size must be >= 2");
  }
};

namespace datagen_detail {

// Name pools are curated so any two entries are several edits apart; that
// keeps distinct entities from ever looking like near-duplicate strings.
inline const std::vector<std::string>& given_names() {
  static const std::vector<std::string> v = {
      "alexandra",  "bartholomew", "christopher", "demetrius",  "evangeline",
      "fitzgerald", "gwendolyn",   "hezekiah",    "ignatius",   "jacqueline",
      "leopold",    "magdalena",   "nathaniel",   "octavia",    "persephone",
      "quentin",    "rosalind",    "sebastian",   "theodora",   "ulysses",
      "valentina",  "wilhelmina",  "xiomara",     "yolanda",    "zachariah",
      "cornelius",  "esperanza",   "humphrey",    "josephine",  "lucinda",
      "maximilian", "nikolai",     "remington",   "salvatore",  "temperance",
      "winifred"};
  return v;
}

inline const std::vector<std::string>& family_names() {
  static const std::vector<std::string> v = {
      "ashworth",   "blackwood",   "carrington", "davenport",  "fairbanks",
      "galloway",   "ironside",    "jefferson",  "kingsley",   "lancaster",
      "middleton",  "northgate",   "okonkwo",    "pemberton",  "ravenscroft",
      "silverstein", "thornbury",  "vanderbilt", "whitfield",  "xanthopoulos",
      "yamaguchi",  "zimmerman",   "abernathy",  "beauregard", "castellanos",
      "delacroix",  "fitzwilliam", "goldsmith",  "ivanovich",  "kowalczyk",
      "lindqvist",  "montgomery",  "nakamura",   "oyelaran",   "petrakis",
      "mcallister"};
  return v;
}

inline const std::vector<std::string>& city_names() {
  static const std::vector<std::string> v = {
      "springfield", "riverside",  "fairview",   "greenville", "bristol",
      "clayton",     "madison",    "franklin",   "arlington",  "georgetown",
      "oakland",     "concord",    "ashland",    "bakersfield", "pasadena",
      "tallahassee", "sacramento", "cheyenne",   "missoula",   "galveston",
      "scottsdale",  "pensacola",  "bridgeport", "youngstown", "harrisburg",
      "montpelier",  "annapolis",  "spokane",    "norfolk",    "memphis"};
  return v;
}

// Skewed toward one dominant platform, as real traffic is; the skew also
// means a resampled device often lands on the same values again.
inline const std::vector<std::string>& browsers() {
  static const std::vector<std::string> v = {"chrome", "safari", "firefox", "edge"};
  return v;
}
inline const std::vector<double>& browser_weights() {
  static const std::vector<double> v = {0.90, 0.05, 0.03, 0.02};
  return v;
}
inline const std::vector<std::string>& oses() {
  static const std::vector<std::string> v = {"windows", "macos", "android", "ios",
                                             "linux"};
  return v;
}
inline const std::vector<double>& os_weights() {
  static const std::vector<double> v = {0.90, 0.04, 0.03, 0.02, 0.01};
  return v;
}

inline std::string title_case(const std::string& s) {
  std::string out = s;
  bool start = true;
  for (char& c : out) {
    if (c == ' ') {
      start = true;
    } else if (start) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      start = false;
    }
  }
  return out;
}

struct Entity {
  std::string given;   // title-cased
  std::string family;  // title-cased
  std::string city;    // title-cased
  std::string browser;
  std::string os;
  int preferred_hour = 0;
};

inline std::string full_name(const Entity& e) { return e.given + " " + e.family; }

// "Christopher Ashworth" -> "C. Ashworth".
inline std::string abbreviate(const Entity& e) {
  return e.given.substr(0, 1) + ". " + e.family;
}

// One random substitution to a different lowercase letter.
inline std::string typo(const std::string& name, Rng& rng) {
  std::string out = name;
  const std::size_t pos = rng.below(out.size());
  char replacement;
  do {
    replacement = static_cast<char>('a' + rng.below(26));
  } while (replacement == out[pos]);
  out[pos] = replacement;
  return out;
}

// 2024-01-01T00:00:00Z, the start of the 90-day activity window.
inline constexpr EpochSeconds kWindowStart = 19723LL * 86400;
inline constexpr int kWindowDays = 90;

inline std::vector<EpochSeconds> sample_logins(const Entity& e, const GenConfig& cfg,
                                               Rng& rng) {
  const int count = static_cast<int>(rng.range(cfg.logins_min, cfg.logins_max));
  std::vector<EpochSeconds> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto day = static_cast<EpochSeconds>(rng.below(kWindowDays));
    const double hour =
        static_cast<double>(e.preferred_hour) + rng.normal(0.0, cfg.behavior_jitter_hours);
    const EpochSeconds in_day =
        detail::floor_mod(static_cast<EpochSeconds>(std::llround(hour * 3600.0)), 86400);
    out.push_back(kWindowStart + day * 86400 + in_day);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace datagen_detail

// Generates the dataset and its ground truth from a single seeded stream.
// Identity pools are combined so no two entities share both a family name
// and a city (and never a full name), which keeps distinct entities well
// separated as strings even after abbreviation.
inline Dataset generate(const GenConfig& cfg) {
  namespace dd = datagen_detail;
  cfg.validate();
  Rng rng(cfg.seed);

  const auto& givens = dd::given_names();
  const auto& families = dd::family_names();
  const auto& cities = dd::city_names();

  // Distinct (given, family) combination per entity, in shuffled order.
  std::vector<std::pair<std::size_t, std::size_t>> combos;
  combos.reserve(givens.size() * families.size());
  for (std::size_t g = 0; g < givens.size(); ++g)
    for (std::size_t f = 0; f < families.size(); ++f) combos.emplace_back(g, f);
  rng.shuffle(combos);

  std::set<std::pair<std::size_t, std::size_t>> family_city_used;
  std::vector<dd::Entity> entities;
  entities.reserve(cfg.n_entities);
  for (std::size_t e = 0; e < cfg.n_entities; ++e) {
    const auto [g, f] = combos[e % combos.size()];
    dd::Entity ent;
    ent.given = dd::title_case(givens[g]);
    ent.family = dd::title_case(families[f]);
    if (e >= combos.size())  // pool exhausted: disambiguate, keep generating
      ent.family += " " + std::to_string(e / combos.size() + 1);

    // Avoid reusing a (family, city) pair while capacity allows.
    std::size_t c = rng.below(cities.size());
    for (int attempt = 0; attempt < 64; ++attempt) {
      if (family_city_used.insert({f, c}).second) break;
      c = rng.below(cities.size());
    }
    ent.city = dd::title_case(cities[c]);

    ent.browser = dd::browsers()[rng.weighted(dd::browser_weights())];
    ent.os = dd::oses()[rng.weighted(dd::os_weights())];
    ent.preferred_hour = static_cast<int>(rng.range(0, 23));
    entities.push_back(std::move(ent));
  }

  const auto n_duplicated = static_cast<std::size_t>(
      cfg.duplicate_fraction * static_cast<double>(cfg.n_entities));

  std::vector<std::pair<int, RawRecord>> staged;  // (entity_id, record)
  for (std::size_t e = 0; e < cfg.n_entities; ++e) {
    const dd::Entity& ent = entities[e];

    RawRecord base;
    base.name = dd::full_name(ent);
    base.city = ent.city;
    base.browser = ent.browser;
    base.os = ent.os;
    base.login_times = dd::sample_logins(ent, cfg, rng);
    staged.emplace_back(static_cast<int>(e), std::move(base));

    if (e >= n_duplicated) continue;
    for (std::size_t extra = 1; extra < cfg.max_group_size; ++extra) {
      RawRecord dup;
      dup.city = ent.city;
      if (rng.chance(cfg.device_persist_prob)) {
        dup.browser = ent.browser;
        dup.os = ent.os;
      } else {
        dup.browser = dd::browsers()[rng.weighted(dd::browser_weights())];
        dup.os = dd::oses()[rng.weighted(dd::os_weights())];
      }
      dup.name = rng.chance(cfg.abbrev_prob) ? dd::abbreviate(ent) : dd::full_name(ent);
      if (rng.chance(cfg.typo_prob)) dup.name = dd::typo(dup.name, rng);
      dup.login_times = dd::sample_logins(ent, cfg, rng);
      staged.emplace_back(static_cast<int>(e), std::move(dup));
    }
  }

  rng.shuffle(staged);

  Dataset ds;
  GroundTruth gt;
  ds.records.reserve(staged.size());
  for (std::size_t i = 0; i < staged.size(); ++i) {
    staged[i].second.record_id = static_cast<int>(i);
    gt.entity_of[static_cast<int>(i)] = staged[i].first;
    ds.records.push_back(std::move(staged[i].second));
  }
  ds.ground_truth = std::move(gt);
  return ds;
}

struct DataSummary {
  std::size_t records = 0;
  std::size_t entities = 0;
  std::size_t true_pairs = 0;
  std::size_t name_vocab = 0;
  std::size_t city_vocab = 0;
  std::size_t browser_vocab = 0;
  std::size_t os_vocab = 0;
};

inline DataSummary summarize(const Dataset& ds, const GroundTruth& gt) {
  validate_coverage(ds, gt);
  DataSummary s;
  s.records = ds.records.size();
  std::set<int> entity_ids;
  for (const auto& [record, entity] : gt.entity_of) entity_ids.insert(entity);
  s.entities = entity_ids.size();
  s.true_pairs = gt.true_pairs().size();
  std::set<std::string> names, cities, browsers, oses;
  for (const auto& r : ds.records) {
    names.insert(r.name);
    cities.insert(r.city);
    browsers.insert(r.browser);
    oses.insert(r.os);
  }
  s.name_vocab = names.size();
  s.city_vocab = cities.size();
  s.browser_vocab = browsers.size();
  s.os_vocab = oses.size();
  return s;
}

inline std::string summary_json(const DataSummary& s) {
  std::string out = "{";
  out += "\"records\": " + std::to_string(s.records);
  out += ", \"entities\": " + std::to_string(s.entities);
  out += ", \"true_pairs\": " + std::to_string(s.true_pairs);
  out += ", \"name_vocab\": " + std::to_string(s.name_vocab);
  out += ", \"city_vocab\": " + std::to_string(s.city_vocab);
  out += ", \"browser_vocab\": " + std::to_string(s.browser_vocab);
  out += ", \"os_vocab\": " + std::to_string(s.os_vocab);
  out += "}";
  return out;
}

inline std::string summary_table(const DataSummary& s) {
  std::string out;
  out += "records          " + std::to_string(s.records) + "\n";
  out += "entities         " + std::to_string(s.entities) + "\n";
  out += "true pairs       " + std::to_string(s.true_pairs) + "\n";
  out += "distinct names   " + std::to_string(s.name_vocab) + "\n";
  out += "distinct cities  " + std::to_string(s.city_vocab) + "\n";
  out += "browsers         " + std::to_string(s.browser_vocab) + "\n";
  out += "oses             " + std::to_string(s.os_vocab) + "\n";
  return out;
}

}  // namespace mmdedup

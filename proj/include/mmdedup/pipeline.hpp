#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mmdedup/baseline.hpp"
#include "mmdedup/datagen.hpp"
#include "mmdedup/embedding.hpp"
#include "mmdedup/errors.hpp"
#include "mmdedup/features.hpp"
#include "mmdedup/fusion.hpp"
#include "mmdedup/linalg.hpp"
#include "mmdedup/records.hpp"
#include "mmdedup/remote_embedding.hpp"

// End-to-end orchestration: the generate / dedupe / baseline / evaluate /
// compare flows, shared between the CLI and the test suite.

namespace mmdedup {

enum class DecisionMode { threshold, cluster };

inline DecisionMode parse_decision(const std::string& s) {
  if (s == "threshold") return DecisionMode::threshold;
  if (s == "cluster") return DecisionMode::cluster;
  throw ConfigError("decision mode must be 'threshold' or 'cluster', got '" + s + "'");
}

inline std::string to_string(DecisionMode m) {
  return m == DecisionMode::threshold ? "threshold" : "cluster";
}

struct RunConfig {
  EmbeddingConfig embedding;
  BehaviorConfig behavior;
  PcaConfig pca;  // text_dim (default 64) and device_dim (default 16)
  FusionWeights fusion;
  ClusterParams dbscan;
  BaselineConfig baseline;
  GenConfig gen;
  DecisionMode decision = DecisionMode::threshold;
  unsigned workers = 1;
  std::size_t chunk_size = 65536;
  std::string out_dir = ".";

  void validate() const {
    embedding.validate();
    fusion.validate();
    dbscan.validate();
    baseline.validate();
    gen.validate();
    if (pca.text_dim < 1 || pca.device_dim < 1)
      throw ConfigError("pca target dimensions must be >= 1");
    if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
  }
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

namespace detail {

class StageClock {
public:
  StageClock() : last_(std::chrono::steady_clock::now()) {}

  void lap(std::vector<StageTiming>& out, const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    out.push_back({stage, std::chrono::duration<double>(now - last_).count()});
    last_ = now;
  }

private:
  std::chrono::steady_clock::time_point last_;
};

}  // namespace detail

struct DedupeResult {
  std::vector<ScoredPair> flagged;  // per the decision mode, sorted by (i, j)
  ClusterAssignment clusters;
  std::size_t pairs_scored = 0;
  std::vector<StageTiming> timings;
};

// The multimodal path: embed name+city text, PCA both the embeddings and
// the device one-hots, score all pairs with late fusion, cluster the fused
// features. The flagged set comes from the fusion threshold or from
// within-cluster pairs, per cfg.decision.
inline DedupeResult run_dedupe(const Dataset& ds, const RunConfig& cfg,
                               TextEmbedder& embedder) {
  cfg.validate();
  const std::size_t n = ds.size();
  if (n < 2) throw ConfigError("dedupe requires at least 2 records");

  DedupeResult res;
  detail::StageClock clock;

  std::vector<std::string> texts;
  texts.reserve(n);
  std::vector<std::vector<EpochSeconds>> logins;
  logins.reserve(n);
  std::vector<std::string> browsers, oses;
  browsers.reserve(n);
  oses.reserve(n);
  for (const auto& r : ds.records) {
    texts.push_back(combine_text(r.name, r.city));
    logins.push_back(r.login_times);
    browsers.push_back(r.browser);
    oses.push_back(r.os);
  }

  const std::vector<Vec> raw_embeddings = embedder.embed_batch(texts);
  Matrix emb(n, embedder.dim());
  for (std::size_t r = 0; r < n; ++r) {
    if (raw_embeddings[r].size() != emb.cols)
      throw ShapeError("embedding provider returned wrong dimension");
    std::copy(raw_embeddings[r].begin(), raw_embeddings[r].end(), emb.row(r));
  }
  clock.lap(res.timings, "embed_text");

  // Zero-variance embeddings (e.g. all records textually identical) leave
  // PCA nothing to fit; scoring then proceeds on the raw vectors so that
  // identical records still compare as identical.
  const PcaModel text_model = pca_fit(emb, cfg.pca.text_dim);
  const Matrix text_red = text_model.degenerate ? emb : pca_transform(text_model, emb);
  clock.lap(res.timings, "pca_text");

  const Matrix behavior = behavior_matrix(logins, cfg.behavior);
  clock.lap(res.timings, "behavior");

  const DeviceEncoding device = device_matrix(browsers, oses);
  const Matrix device_red = reduce_device(device.one_hot, cfg.pca.device_dim);
  clock.lap(res.timings, "device");

  ScoreOptions opt;
  opt.chunk_size = cfg.chunk_size;
  opt.workers = cfg.workers;
  res.pairs_scored = n * (n - 1) / 2;

  std::vector<ScoredPair> threshold_flagged;
  score_pairs_visit(text_red, behavior, device_red, cfg.fusion, opt,
                    [&](const std::vector<ScoredPair>& chunk) {
                      for (const auto& p : chunk)
                        if (p.fused > cfg.fusion.threshold) threshold_flagged.push_back(p);
                    });
  clock.lap(res.timings, "score_pairs");

  const Matrix fused = fuse_features(text_red, behavior, device_red);
  res.clusters = dbscan(fused, cfg.dbscan);
  clock.lap(res.timings, "cluster");

  if (cfg.decision == DecisionMode::threshold) {
    res.flagged = std::move(threshold_flagged);
  } else {
    for (const auto& [i, j] : cluster_pairs(res.clusters))
      res.flagged.push_back(score_single_pair(text_red, behavior, device_red, cfg.fusion,
                                              static_cast<std::size_t>(i),
                                              static_cast<std::size_t>(j)));
  }
  clock.lap(res.timings, "decide");
  return res;
}

inline void write_clusters(const std::string& path, const ClusterAssignment& assign) {
  csv::Writer w(path);
  w.write_row({"record_id", "label"});
  for (std::size_t r = 0; r < assign.labels.size(); ++r)
    w.write_row({std::to_string(r), std::to_string(assign.labels[r])});
  w.close();
}

// data/customers.csv -> <out_dir>/customers
inline std::string output_stem(const std::string& input_path, const std::string& out_dir) {
  const std::filesystem::path stem = std::filesystem::path(input_path).stem();
  return (std::filesystem::path(out_dir) / stem).string();
}

inline void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
}

struct GeneratePaths {
  std::string dataset;
  std::string truth;
};

inline GeneratePaths generate_paths(const std::string& out_dir) {
  return {(std::filesystem::path(out_dir) / "dataset.csv").string(),
          (std::filesystem::path(out_dir) / "dataset_truth.csv").string()};
}

// generate: write dataset + ground truth, return the summary.
inline DataSummary run_generate_files(const RunConfig& cfg, GeneratePaths* paths_out = nullptr) {
  ensure_out_dir(cfg.out_dir);
  const Dataset ds = generate(cfg.gen);
  const GeneratePaths paths = generate_paths(cfg.out_dir);
  write_dataset(paths.dataset, ds);
  write_ground_truth(paths.truth, *ds.ground_truth);
  if (paths_out) *paths_out = paths;
  return summarize(ds, *ds.ground_truth);
}

struct DedupeFiles {
  std::string duplicates_path;
  std::string clusters_path;
  DedupeResult result;
};

// dedupe: read a dataset, run the multimodal path, write
// <stem>_duplicates.csv and <stem>_clusters.csv.
inline DedupeFiles run_dedupe_files(const std::string& input_csv, const RunConfig& cfg) {
  const Dataset ds = load_dataset(input_csv);
  const std::unique_ptr<TextEmbedder> embedder = make_embedder(cfg.embedding);
  ensure_out_dir(cfg.out_dir);

  DedupeFiles out;
  out.result = run_dedupe(ds, cfg, *embedder);
  const std::string stem = output_stem(input_csv, cfg.out_dir);
  out.duplicates_path = stem + "_duplicates.csv";
  out.clusters_path = stem + "_clusters.csv";
  write_pairs(out.duplicates_path, out.result.flagged);
  write_clusters(out.clusters_path, out.result.clusters);
  return out;
}

struct BaselineFiles {
  std::string pairs_path;
  std::size_t flagged = 0;
};

// baseline: read a dataset, write <stem>_baseline.csv.
inline BaselineFiles run_baseline_files(const std::string& input_csv, const RunConfig& cfg) {
  const Dataset ds = load_dataset(input_csv);
  ensure_out_dir(cfg.out_dir);
  const std::vector<BaselinePair> pairs = baseline_pairs(ds.records, cfg.baseline);
  BaselineFiles out;
  out.pairs_path = output_stem(input_csv, cfg.out_dir) + "_baseline.csv";
  out.flagged = pairs.size();
  write_baseline_pairs(out.pairs_path, pairs);
  return out;
}

// evaluate: pairs CSV + ground-truth CSV -> report.
inline EvalReport run_evaluate_files(const std::string& pairs_csv,
                                     const std::string& truth_csv) {
  const std::vector<std::pair<int, int>> predicted = load_pairs(pairs_csv);
  const GroundTruth truth = load_ground_truth(truth_csv);
  return evaluate(predicted, truth);
}

struct CompareReport {
  EvalReport baseline;
  EvalReport multimodal;
  std::size_t baseline_flagged = 0;
  std::size_t multimodal_flagged = 0;
  bool recall_check = false;       // multimodal recall > baseline recall
  bool precision_check = false;    // baseline precision >= multimodal precision
  std::vector<StageTiming> timings;
};

// compare: run both paths on a dataset with ground truth and report the
// two metric rows plus the directional checks.
inline CompareReport run_compare(const Dataset& ds, const RunConfig& cfg,
                                 TextEmbedder& embedder) {
  if (!ds.ground_truth)
    throw ValidationError("compare requires a dataset with ground truth");
  validate_coverage(ds, *ds.ground_truth);

  CompareReport rep;
  detail::StageClock clock;

  const std::vector<BaselinePair> base = baseline_pairs(ds.records, cfg.baseline);
  std::vector<std::pair<int, int>> base_idx;
  base_idx.reserve(base.size());
  for (const auto& p : base) base_idx.emplace_back(p.i, p.j);
  rep.baseline = evaluate(base_idx, *ds.ground_truth);
  rep.baseline_flagged = base.size();
  clock.lap(rep.timings, "baseline");

  DedupeResult multi = run_dedupe(ds, cfg, embedder);
  std::vector<std::pair<int, int>> multi_idx;
  multi_idx.reserve(multi.flagged.size());
  for (const auto& p : multi.flagged) multi_idx.emplace_back(p.i, p.j);
  rep.multimodal = evaluate(multi_idx, *ds.ground_truth);
  rep.multimodal_flagged = multi.flagged.size();
  for (auto& t : multi.timings) rep.timings.push_back(std::move(t));

  rep.recall_check = rep.multimodal.recall > rep.baseline.recall;
  rep.precision_check = rep.baseline.precision >= rep.multimodal.precision;
  return rep;
}

inline std::string compare_table(const CompareReport& r) {
  auto row = [](const std::string& label, const EvalReport& e) {
    std::string s = label;
    s.resize(26, ' ');
    return s + format_fixed6(e.precision) + "   " + format_fixed6(e.recall) + "   " +
           format_fixed6(e.f1) + "\n";
  };
  std::string out;
  out += "approach                  precision  recall     f1\n";
  out += row("baseline (string match)", r.baseline);
  out += row("multimodal (late fusion)", r.multimodal);
  out += "\n";
  out += "checks:\n";
  out += std::string("  multimodal recall > baseline recall        ") +
         (r.recall_check ? "PASS" : "FAIL") + " (" + format_fixed6(r.multimodal.recall) +
         " vs " + format_fixed6(r.baseline.recall) + ")\n";
  out += std::string("  baseline precision >= multimodal precision ") +
         (r.precision_check ? "PASS" : "FAIL") + " (" + format_fixed6(r.baseline.precision) +
         " vs " + format_fixed6(r.multimodal.precision) + ")\n";
  return out;
}

inline std::string compare_json(const CompareReport& r) {
  std::string out = "{";
  out += "\"baseline\": " + eval_report_json(r.baseline);
  out += ", \"multimodal\": " + eval_report_json(r.multimodal);
  out += ", \"baseline_flagged\": " + std::to_string(r.baseline_flagged);
  out += ", \"multimodal_flagged\": " + std::to_string(r.multimodal_flagged);
  out += std::string(", \"recall_check\": ") + (r.recall_check ? "true" : "false");
  out += std::string(", \"precision_check\": ") + (r.precision_check ? "true" : "false");
  out += "}";
  return out;
}

inline std::string timings_table(const std::vector<StageTiming>& timings) {
  std::string out;
  for (const auto& t : timings)
    out += "  " + t.stage + std::string(t.stage.size() < 14 ? 14 - t.stage.size() : 1, ' ') +
           format_fixed6(t.seconds) + " s\n";
  return out;
}

}  // namespace mmdedup

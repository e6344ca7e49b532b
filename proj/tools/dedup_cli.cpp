// mmdedup: privacy-preserving multimodal customer deduplication.
//
// Subcommands: generate, dedupe, baseline, evaluate, compare.
// Configuration precedence: command-line flag > TOML config file > default.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmdedup/mmdedup.hpp"

namespace {

using nlohmann::ordered_json;

// Maps TOML sections onto this app's flat dotted option names: "[fusion]
// threshold = 0.6" and a top-level "fusion.threshold = 0.6" both resolve to
// --fusion.threshold. Without this, CLI11 only matches sections against
// subcommands, and section markers trip allow_config_extras(error).
class SectionedConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::vector<CLI::ConfigItem> flat;
    for (auto& item : CLI::ConfigTOML::from_config(input)) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      CLI::ConfigItem out;
      out.name = item.fullname();
      out.inputs = std::move(item.inputs);
      flat.push_back(std::move(out));
    }
    return flat;
  }
};

// Raw option storage; folded into a RunConfig after parsing.
struct CliState {
  mmdedup::RunConfig cfg;
  std::string provider = "local";
  std::string decision = "threshold";
  bool print_config = false;

  // Convenience aliases with their own storage so precedence stays clear.
  std::size_t entities_alias = 0;
  double dup_fraction_alias = 0.0;
  std::uint64_t seed_alias = 0;
  std::size_t device_target_dim_alias = 0;

  // Subcommand positionals.
  std::string input_path;
  std::string pairs_path;
  std::string truth_path;
};

ordered_json config_to_json(const mmdedup::RunConfig& cfg) {
  ordered_json j;
  j["embedding"] = {{"dim", cfg.embedding.dim},
                    {"ngram_size", cfg.embedding.ngram_size},
                    {"hash_seed", cfg.embedding.hash_seed},
                    {"provider", cfg.embedding.provider ==
                                         mmdedup::EmbeddingProviderKind::local_hashed
                                     ? "local"
                                     : "remote"},
                    {"endpoint", cfg.embedding.endpoint},
                    {"max_batch", cfg.embedding.max_batch},
                    {"max_in_flight", cfg.embedding.max_in_flight},
                    {"timeout_seconds", cfg.embedding.timeout_seconds}};
  j["behavior"] = {{"count_only", cfg.behavior.count_only}};
  j["pca"] = {{"text_dim", cfg.pca.text_dim}, {"device_dim", cfg.pca.device_dim}};
  j["fusion"] = {{"w_text", cfg.fusion.w_text},
                 {"w_behavior", cfg.fusion.w_behavior},
                 {"w_device", cfg.fusion.w_device},
                 {"threshold", cfg.fusion.threshold}};
  j["dbscan"] = {{"eps", cfg.dbscan.eps}, {"min_samples", cfg.dbscan.min_samples}};
  j["baseline"] = {{"threshold", cfg.baseline.threshold}};
  j["gen"] = {{"n_entities", cfg.gen.n_entities},
              {"duplicate_fraction", cfg.gen.duplicate_fraction},
              {"typo_prob", cfg.gen.typo_prob},
              {"abbrev_prob", cfg.gen.abbrev_prob},
              {"device_persist_prob", cfg.gen.device_persist_prob},
              {"behavior_jitter_hours", cfg.gen.behavior_jitter_hours},
              {"logins_min", cfg.gen.logins_min},
              {"logins_max", cfg.gen.logins_max},
              {"seed", cfg.gen.seed},
              {"max_group_size", cfg.gen.max_group_size}};
  j["decision"] = mmdedup::to_string(cfg.decision);
  j["workers"] = cfg.workers;
  j["chunk_size"] = cfg.chunk_size;
  j["out_dir"] = cfg.out_dir;
  return j;
}

int cmd_generate(const mmdedup::RunConfig& cfg) {
  mmdedup::GeneratePaths paths;
  const mmdedup::DataSummary summary = mmdedup::run_generate_files(cfg, &paths);
  std::cout << "wrote " << paths.dataset << "\n";
  std::cout << "wrote " << paths.truth << "\n";
  std::cout << mmdedup::summary_table(summary);
  std::cout << mmdedup::summary_json(summary) << "\n";
  return 0;
}

int cmd_dedupe(const std::string& input, const mmdedup::RunConfig& cfg) {
  const mmdedup::DedupeFiles out = mmdedup::run_dedupe_files(input, cfg);
  std::cout << "wrote " << out.duplicates_path << "\n";
  std::cout << "wrote " << out.clusters_path << "\n";
  std::cout << "pairs_scored: " << out.result.pairs_scored << "\n";
  std::cout << "flagged_pairs: " << out.result.flagged.size() << "\n";
  std::cout << "clusters: " << out.result.clusters.cluster_count() << "\n";
  std::cout << "stage timings:\n" << mmdedup::timings_table(out.result.timings);
  return 0;
}

int cmd_baseline(const std::string& input, const mmdedup::RunConfig& cfg) {
  const mmdedup::BaselineFiles out = mmdedup::run_baseline_files(input, cfg);
  std::cout << "wrote " << out.pairs_path << "\n";
  std::cout << "flagged_pairs: " << out.flagged << "\n";
  return 0;
}

int cmd_evaluate(const std::string& pairs, const std::string& truth) {
  const mmdedup::EvalReport report = mmdedup::run_evaluate_files(pairs, truth);
  std::cout << mmdedup::eval_report_table(report);
  std::cout << mmdedup::eval_report_json(report) << "\n";
  return 0;
}

int cmd_compare(const std::string& dataset, const std::string& truth,
                const mmdedup::RunConfig& cfg) {
  mmdedup::Dataset ds = mmdedup::load_dataset(dataset);
  ds.ground_truth = mmdedup::load_ground_truth(truth);
  const auto embedder = mmdedup::make_embedder(cfg.embedding);
  const mmdedup::CompareReport report = mmdedup::run_compare(ds, cfg, *embedder);
  std::cout << mmdedup::compare_table(report);
  std::cout << "stage timings:\n" << mmdedup::timings_table(report.timings);
  std::cout << mmdedup::compare_json(report) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving multimodal customer deduplication"};
  app.require_subcommand(0, 1);
  app.allow_config_extras(CLI::config_extras_mode::error);

  CliState st;
  st.cfg.workers = std::max(1u, std::thread::hardware_concurrency());

  app.set_config("--config", "", "TOML configuration file");
  app.config_formatter(std::make_shared<SectionedConfig>());
  app.add_flag("--print-config", st.print_config,
               "Print the effective merged configuration as JSON and exit");

  // Globals.
  auto* seed_opt =
      app.add_option("--seed", st.seed_alias, "Random seed for data generation");
  app.add_option("-o,--out-dir", st.cfg.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--workers", st.cfg.workers, "Worker threads for pair scoring")
      ->capture_default_str();
  app.add_option("--decision", st.decision,
                 "Duplicate decision mode: threshold (fused score) or cluster "
                 "(within-DBSCAN-cluster pairs)")
      ->check(CLI::IsMember({"threshold", "cluster"}))
      ->capture_default_str();
  app.add_option("--chunk_size", st.cfg.chunk_size,
                 "Pairs scored per batch (bounds scoring memory)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // Embedding.
  app.add_option("--embedding.dim", st.cfg.embedding.dim, "Text embedding dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--embedding.ngram_size", st.cfg.embedding.ngram_size,
                 "Character n-gram size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--embedding.hash_seed", st.cfg.embedding.hash_seed,
                 "Feature-hashing seed")
      ->capture_default_str();
  auto* provider_opt =
      app.add_option("--embedding.provider", st.provider,
                     "Embedding provider: local (hashed n-grams) or remote")
          ->check(CLI::IsMember({"local", "remote"}))
          ->capture_default_str();
  auto* endpoint_opt =
      app.add_option("--embedding.endpoint", st.cfg.embedding.endpoint,
                     "Remote embedding endpoint, e.g. http://host:port")
          ->envname("DEDUPE_EMBED_ENDPOINT");
  app.add_option("--embedding.max_batch", st.cfg.embedding.max_batch,
                 "Texts per remote request")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--embedding.max_in_flight", st.cfg.embedding.max_in_flight,
                 "Concurrent remote requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--embedding.timeout_seconds", st.cfg.embedding.timeout_seconds,
                 "Remote request timeout")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  // Behavior / PCA / device.
  app.add_option("--behavior.count_only", st.cfg.behavior.count_only,
                 "Reduce behavior features to the bare login count")
      ->capture_default_str();
  app.add_option("--pca.text_dim", st.cfg.pca.text_dim, "PCA target for text")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* pca_device_opt =
      app.add_option("--pca.device_dim", st.cfg.pca.device_dim, "PCA target for device")
          ->check(CLI::PositiveNumber)
          ->capture_default_str();
  auto* device_target_opt =
      app.add_option("--device.target_dim", st.device_target_dim_alias,
                     "Alias for --pca.device_dim (takes precedence when both given)")
          ->check(CLI::PositiveNumber);

  // Fusion / clustering / baseline.
  app.add_option("--fusion.w_text", st.cfg.fusion.w_text, "Text weight")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--fusion.w_behavior", st.cfg.fusion.w_behavior, "Behavior weight")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--fusion.w_device", st.cfg.fusion.w_device, "Device weight")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--fusion.threshold", st.cfg.fusion.threshold,
                 "Fused-score duplicate threshold (strict >)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--dbscan.eps", st.cfg.dbscan.eps, "DBSCAN neighborhood radius")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--dbscan.min_samples", st.cfg.dbscan.min_samples,
                 "DBSCAN core-point density (self counts)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--baseline.threshold", st.cfg.baseline.threshold,
                 "Baseline similarity threshold (inclusive >=)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  // Generator.
  app.add_option("--gen.n_entities", st.cfg.gen.n_entities, "Distinct entities")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--gen.duplicate_fraction", st.cfg.gen.duplicate_fraction,
                 "Fraction of entities that get duplicate records")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--gen.typo_prob", st.cfg.gen.typo_prob, "Name typo probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--gen.abbrev_prob", st.cfg.gen.abbrev_prob,
                 "Given-name abbreviation probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--gen.device_persist_prob", st.cfg.gen.device_persist_prob,
                 "Probability a duplicate keeps its device")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--gen.behavior_jitter_hours", st.cfg.gen.behavior_jitter_hours,
                 "Std-dev of login-hour jitter")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--gen.logins_min", st.cfg.gen.logins_min, "Min logins per record")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--gen.logins_max", st.cfg.gen.logins_max, "Max logins per record")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--gen.seed", st.cfg.gen.seed, "Generator seed")
      ->capture_default_str();
  app.add_option("--gen.max_group_size", st.cfg.gen.max_group_size,
                 "Records per duplicated entity")
      ->check(CLI::Range(std::size_t{2}, std::size_t{64}))
      ->capture_default_str();

  // Subcommands.
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic dataset");
  generate->fallthrough();
  auto* entities_opt = generate->add_option("--entities", st.entities_alias,
                                            "Distinct entities (alias for --gen.n_entities)")
                           ->check(CLI::PositiveNumber);
  auto* dupfrac_opt =
      generate
          ->add_option("--dup-fraction", st.dup_fraction_alias,
                       "Duplicate fraction (alias for --gen.duplicate_fraction)")
          ->check(CLI::Range(0.0, 1.0));

  CLI::App* dedupe = app.add_subcommand("dedupe", "Run the multimodal pipeline");
  dedupe->fallthrough();
  dedupe->add_option("input", st.input_path, "Dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* baseline = app.add_subcommand("baseline", "Run the string-match baseline");
  baseline->fallthrough();
  baseline->add_option("input", st.input_path, "Dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score predicted pairs");
  evaluate->fallthrough();
  evaluate->add_option("pairs", st.pairs_path, "Predicted pairs CSV")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("truth", st.truth_path, "Ground-truth CSV")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* compare = app.add_subcommand("compare", "Baseline vs multimodal on one dataset");
  compare->fallthrough();
  compare->add_option("dataset", st.input_path, "Dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("truth", st.truth_path, "Ground-truth CSV")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    // Fold aliases and inferences into the final config.
    if (seed_opt->count() > 0) st.cfg.gen.seed = st.seed_alias;
    if (entities_opt->count() > 0) st.cfg.gen.n_entities = st.entities_alias;
    if (dupfrac_opt->count() > 0) st.cfg.gen.duplicate_fraction = st.dup_fraction_alias;
    if (device_target_opt->count() > 0)
      st.cfg.pca.device_dim = st.device_target_dim_alias;
    (void)pca_device_opt;

    st.cfg.decision = mmdedup::parse_decision(st.decision);
    st.cfg.embedding.provider = st.provider == "remote"
                                    ? mmdedup::EmbeddingProviderKind::remote
                                    : mmdedup::EmbeddingProviderKind::local_hashed;
    // An endpoint (flag, config, or DEDUPE_EMBED_ENDPOINT) selects the
    // remote provider unless the provider was named explicitly.
    if (endpoint_opt->count() > 0 && provider_opt->count() == 0 &&
        !st.cfg.embedding.endpoint.empty())
      st.cfg.embedding.provider = mmdedup::EmbeddingProviderKind::remote;

    st.cfg.validate();

    if (st.print_config) {
      std::cout << config_to_json(st.cfg).dump(2) << "\n";
      return 0;
    }

    if (app.got_subcommand(generate)) return cmd_generate(st.cfg);
    if (app.got_subcommand(dedupe)) return cmd_dedupe(st.input_path, st.cfg);
    if (app.got_subcommand(baseline)) return cmd_baseline(st.input_path, st.cfg);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(st.pairs_path, st.truth_path);
    if (app.got_subcommand(compare))
      return cmd_compare(st.input_path, st.truth_path, st.cfg);

    std::cerr << app.help() << std::flush;
    return 1;
  } catch (const mmdedup::ProviderError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.retryable())
      std::cerr << "hint: the failure looks transient; retrying may succeed\n";
    return 1;
  } catch (const mmdedup::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

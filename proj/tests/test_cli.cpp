#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "mmdedup/records.hpp"

// End-to-end tests against the installed mmdedup binary (path injected by
// the build). Every invocation goes through a real shell, real argv parsing
// and real files, exactly as a user would drive it.

namespace fs = std::filesystem;
using helpers::run_cli;
using nlohmann::json;

namespace {

std::string last_line(const std::string& text) {
  std::size_t end = text.size();
  while (end > 0 && (text[end - 1] == '\n' || text[end - 1] == '\r')) --end;
  const std::size_t start = text.rfind('\n', end - 1);
  return text.substr(start == std::string::npos ? 0 : start + 1,
                     end - (start == std::string::npos ? 0 : start + 1));
}

json last_json(const std::string& stdout_text) {
  return json::parse(last_line(stdout_text));
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

// Three records: two identical up to case/whitespace, one a single edit away.
const char* kTinyDataset =
    "name,city,browser,os,login_times\n"
    "Jon Doe,New York,Chrome,Windows,\"[\"\"2024-01-01T10:00:00Z\"\"]\"\n"
    "jon  doe,new york,Safari,Macos,\"[\"\"2024-01-02T11:00:00Z\"\"]\"\n"
    "Jon Dob,New York,Chrome,Windows,\"[\"\"2024-01-03T12:00:00Z\"\"]\"\n";

}  // namespace

TEST_CASE("print-config reports the effective defaults") {
  helpers::TempDir dir;
  const auto r = run_cli("--print-config", dir.path());
  REQUIRE(r.exit_code == 0);
  const json cfg = json::parse(r.out);
  REQUIRE(cfg["embedding"]["dim"] == 768);
  REQUIRE(cfg["embedding"]["ngram_size"] == 3);
  REQUIRE(cfg["embedding"]["provider"] == "local");
  REQUIRE(cfg["pca"]["text_dim"] == 64);
  REQUIRE(cfg["pca"]["device_dim"] == 16);
  REQUIRE(cfg["fusion"]["w_text"] == 0.4);
  REQUIRE(cfg["fusion"]["w_behavior"] == 0.35);
  REQUIRE(cfg["fusion"]["w_device"] == 0.25);
  REQUIRE(cfg["fusion"]["threshold"] == 0.75);
  REQUIRE(cfg["dbscan"]["eps"] == 0.3);
  REQUIRE(cfg["dbscan"]["min_samples"] == 2);
  REQUIRE(cfg["baseline"]["threshold"] == 0.85);
  REQUIRE(cfg["gen"]["n_entities"] == 833);
  REQUIRE(cfg["gen"]["duplicate_fraction"] == 0.2);
  REQUIRE(cfg["gen"]["seed"] == 42);
  REQUIRE(cfg["decision"] == "threshold");
  REQUIRE(cfg["chunk_size"] == 65536);
}

TEST_CASE("configuration precedence: flag beats config file beats environment") {
  helpers::TempDir dir;
  const fs::path toml = dir.path() / "mmdedup.toml";
  write_file(toml,
             "[fusion]\n"
             "threshold = 0.6\n"
             "[gen]\n"
             "n_entities = 120\n");

  SECTION("config file overrides defaults") {
    const auto r = run_cli("--config " + toml.string() + " --print-config", dir.path());
    REQUIRE(r.exit_code == 0);
    const json cfg = json::parse(r.out);
    REQUIRE(cfg["fusion"]["threshold"] == 0.6);
    REQUIRE(cfg["gen"]["n_entities"] == 120);
  }
  SECTION("a flag overrides the config file") {
    const auto r = run_cli(
        "--config " + toml.string() + " --fusion.threshold 0.9 --print-config",
        dir.path());
    REQUIRE(r.exit_code == 0);
    const json cfg = json::parse(r.out);
    REQUIRE(cfg["fusion"]["threshold"] == 0.9);
    REQUIRE(cfg["gen"]["n_entities"] == 120);  // untouched key still applies
  }
  SECTION("environment supplies the endpoint and implies the remote provider") {
    const auto r = run_cli("--print-config", dir.path(),
                           "DEDUPE_EMBED_ENDPOINT=http://127.0.0.1:9");
    REQUIRE(r.exit_code == 0);
    const json cfg = json::parse(r.out);
    REQUIRE(cfg["embedding"]["endpoint"] == "http://127.0.0.1:9");
    REQUIRE(cfg["embedding"]["provider"] == "remote");
  }
  SECTION("a flag overrides the environment") {
    const auto r = run_cli("--embedding.endpoint http://127.0.0.1:8 --print-config",
                           dir.path(), "DEDUPE_EMBED_ENDPOINT=http://127.0.0.1:9");
    REQUIRE(r.exit_code == 0);
    const json cfg = json::parse(r.out);
    REQUIRE(cfg["embedding"]["endpoint"] == "http://127.0.0.1:8");
  }
  SECTION("the config file overrides the environment") {
    const fs::path endpoint_toml = dir.path() / "endpoint.toml";
    write_file(endpoint_toml,
               "[embedding]\n"
               "endpoint = \"http://127.0.0.1:7\"\n");
    const auto r = run_cli("--config " + endpoint_toml.string() + " --print-config",
                           dir.path(), "DEDUPE_EMBED_ENDPOINT=http://127.0.0.1:9");
    REQUIRE(r.exit_code == 0);
    const json cfg = json::parse(r.out);
    REQUIRE(cfg["embedding"]["endpoint"] == "http://127.0.0.1:7");
  }
  SECTION("an explicit local provider wins over endpoint inference") {
    const auto r = run_cli("--embedding.provider local --print-config", dir.path(),
                           "DEDUPE_EMBED_ENDPOINT=http://127.0.0.1:9");
    REQUIRE(r.exit_code == 0);
    const json cfg = json::parse(r.out);
    REQUIRE(cfg["embedding"]["provider"] == "local");
  }
  SECTION("unknown keys in the config file are rejected") {
    const fs::path bad = dir.path() / "bad.toml";
    write_file(bad, "[fusion]\nbogus = 1\n");
    const auto r = run_cli("--config " + bad.string() + " --print-config", dir.path());
    REQUIRE(r.exit_code != 0);
    REQUIRE_FALSE(r.err.empty());
  }
}

TEST_CASE("seed and device-dimension aliases land in the config") {
  helpers::TempDir dir;
  const auto r =
      run_cli("--seed 7 --device.target_dim 12 --print-config", dir.path());
  REQUIRE(r.exit_code == 0);
  const json cfg = json::parse(r.out);
  REQUIRE(cfg["gen"]["seed"] == 7);
  REQUIRE(cfg["pca"]["device_dim"] == 12);

  const auto r2 = run_cli("--gen.seed 9 --pca.device_dim 6 --print-config", dir.path());
  const json cfg2 = json::parse(r2.out);
  REQUIRE(cfg2["gen"]["seed"] == 9);
  REQUIRE(cfg2["pca"]["device_dim"] == 6);
}

TEST_CASE("generate writes both artifacts and prints a machine-readable summary") {
  helpers::TempDir dir;
  const fs::path out = dir.path() / "data";
  const auto r = run_cli(
      "generate --entities 50 --dup-fraction 0.2 --seed 3 -o " + out.string(),
      dir.path());
  REQUIRE(r.exit_code == 0);
  REQUIRE(fs::exists(out / "dataset.csv"));
  REQUIRE(fs::exists(out / "dataset_truth.csv"));
  REQUIRE(r.out.find("wrote ") != std::string::npos);

  const json summary = last_json(r.out);
  REQUIRE(summary["records"] == 60);  // 50 entities + floor(0.2 * 50) duplicates
  REQUIRE(summary["entities"] == 50);
  REQUIRE(summary["true_pairs"] == 10);

  const mmdedup::Dataset ds = mmdedup::load_dataset((out / "dataset.csv").string());
  REQUIRE(ds.records.size() == 60);
}

TEST_CASE("generate is byte-identical across identical invocations") {
  helpers::TempDir dir;
  const fs::path a = dir.path() / "a";
  const fs::path b = dir.path() / "b";
  const std::string args = "generate --entities 50 --seed 17 -o ";
  REQUIRE(run_cli(args + a.string(), dir.path()).exit_code == 0);
  REQUIRE(run_cli(args + b.string(), dir.path()).exit_code == 0);
  REQUIRE(helpers::slurp(a / "dataset.csv") == helpers::slurp(b / "dataset.csv"));
  REQUIRE(helpers::slurp(a / "dataset_truth.csv") ==
          helpers::slurp(b / "dataset_truth.csv"));
}

TEST_CASE("out-of-range flag values fail at parse time") {
  helpers::TempDir dir;
  REQUIRE(run_cli("generate --dup-fraction 1.5 -o " + dir.str(), dir.path()).exit_code !=
          0);
  REQUIRE(run_cli("--fusion.threshold 1.2 --print-config", dir.path()).exit_code != 0);
  REQUIRE(run_cli("--gen.max_group_size 1 --print-config", dir.path()).exit_code != 0);
  REQUIRE(run_cli("--chunk_size 0 --print-config", dir.path()).exit_code != 0);
}

TEST_CASE("dedupe console counts agree with the files it writes") {
  helpers::TempDir dir;
  REQUIRE(run_cli("generate -o " + dir.str(), dir.path()).exit_code == 0);

  const auto r = run_cli(
      "dedupe " + (dir.path() / "dataset.csv").string() + " -o " + dir.str() +
          " --workers 2",
      dir.path());
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("pairs_scored: 498501") != std::string::npos);  // C(999, 2)

  // The flagged_pairs count on the console must equal the number of data
  // rows in the duplicates CSV.
  const std::string needle = "flagged_pairs: ";
  const std::size_t at = r.out.find(needle);
  REQUIRE(at != std::string::npos);
  const std::size_t flagged = std::stoul(r.out.substr(at + needle.size()));

  const auto pairs =
      mmdedup::load_pairs((dir.path() / "dataset_duplicates.csv").string());
  REQUIRE(pairs.size() == flagged);

  const std::string clusters = helpers::slurp(dir.path() / "dataset_clusters.csv");
  const auto lines = static_cast<std::size_t>(
      std::count(clusters.begin(), clusters.end(), '\n'));
  REQUIRE(lines == 999 + 1);
}

TEST_CASE("dedupe rejects missing or malformed inputs") {
  helpers::TempDir dir;
  SECTION("missing file fails argv validation") {
    const auto r = run_cli("dedupe " + (dir.path() / "absent.csv").string(), dir.path());
    REQUIRE(r.exit_code != 0);
    REQUIRE_FALSE(r.err.empty());
  }
  SECTION("wrong schema fails with a diagnostic") {
    const fs::path bad = dir.path() / "bad.csv";
    write_file(bad, "who,what\nx,y\n");
    const auto r = run_cli("dedupe " + bad.string() + " -o " + dir.str(), dir.path());
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.err.find("error:") != std::string::npos);
  }
}

TEST_CASE("cluster decision mode emits well-formed pairs") {
  helpers::TempDir dir;
  REQUIRE(run_cli("generate --entities 60 --dup-fraction 0.4 --seed 6 -o " + dir.str(),
                  dir.path())
              .exit_code == 0);
  const auto r = run_cli(
      "dedupe " + (dir.path() / "dataset.csv").string() + " -o " + dir.str() +
          " --decision cluster --embedding.dim 96 --pca.text_dim 16",
      dir.path());
  REQUIRE(r.exit_code == 0);
  const auto pairs =
      mmdedup::load_pairs((dir.path() / "dataset_duplicates.csv").string());
  for (const auto& [i, j] : pairs) {
    REQUIRE(i >= 0);
    REQUIRE(i < j);
    REQUIRE(j < 84);  // 60 entities + 24 duplicates
  }
}

TEST_CASE("baseline at threshold 1.0 keeps only exact normalized matches") {
  helpers::TempDir dir;
  const fs::path data = dir.path() / "tiny.csv";
  write_file(data, kTinyDataset);

  const auto strict = run_cli(
      "baseline " + data.string() + " -o " + dir.str() + " --baseline.threshold 1.0",
      dir.path());
  REQUIRE(strict.exit_code == 0);
  REQUIRE(strict.out.find("flagged_pairs: 1") != std::string::npos);

  // "jon dob new york" sits one edit from "jon doe new york":
  // similarity 15/16 = 0.9375, above the default 0.85 threshold.
  const auto relaxed =
      run_cli("baseline " + data.string() + " -o " + dir.str(), dir.path());
  REQUIRE(relaxed.exit_code == 0);
  REQUIRE(relaxed.out.find("flagged_pairs: 3") != std::string::npos);
}

TEST_CASE("evaluate prints a table and a final JSON line") {
  helpers::TempDir dir;
  const fs::path truth = dir.path() / "truth.csv";
  write_file(truth, "record_id,entity_id\n0,7\n1,7\n2,9\n");

  SECTION("perfect prediction") {
    const fs::path pairs = dir.path() / "pairs.csv";
    write_file(pairs, "record_i,record_j,similarity\n0,1,1.000000\n");
    const auto r = run_cli("evaluate " + pairs.string() + " " + truth.string(),
                           dir.path());
    REQUIRE(r.exit_code == 0);
    const json rep = last_json(r.out);
    REQUIRE(rep["tp"] == 1);
    REQUIRE(rep["precision"] == 1.0);
    REQUIRE(rep["recall"] == 1.0);
    REQUIRE(rep["f1"] == 1.0);
  }
  SECTION("header-only predictions score zero recall and vacuous precision") {
    const fs::path pairs = dir.path() / "empty.csv";
    write_file(pairs, "record_i,record_j,similarity\n");
    const auto r = run_cli("evaluate " + pairs.string() + " " + truth.string(),
                           dir.path());
    REQUIRE(r.exit_code == 0);
    const json rep = last_json(r.out);
    REQUIRE(rep["tp"] == 0);
    REQUIRE(rep["precision"] == 1.0);
    REQUIRE(rep["recall"] == 0.0);
    REQUIRE(rep["f1"] == 0.0);
  }
}

TEST_CASE("compare on a duplicate-free dataset reports vacuous recall for both") {
  helpers::TempDir dir;
  REQUIRE(run_cli("generate --entities 40 --dup-fraction 0 --seed 5 -o " + dir.str(),
                  dir.path())
              .exit_code == 0);
  const auto r = run_cli(
      "compare " + (dir.path() / "dataset.csv").string() + " " +
          (dir.path() / "dataset_truth.csv").string() + " -o " + dir.str() +
          " --embedding.dim 96 --pca.text_dim 16",
      dir.path());
  REQUIRE(r.exit_code == 0);
  const json rep = last_json(r.out);
  // No true pairs exist, so recall is 0/0 on both sides: 1.0 by convention.
  REQUIRE(rep["baseline"]["recall"] == 1.0);
  REQUIRE(rep["multimodal"]["recall"] == 1.0);
  REQUIRE(rep["recall_check"] == false);  // strict improvement is impossible
}

TEST_CASE("bare invocation prints help and fails; --help succeeds") {
  helpers::TempDir dir;
  const auto bare = run_cli("", dir.path());
  REQUIRE(bare.exit_code == 1);
  REQUIRE(bare.err.find("generate") != std::string::npos);
  REQUIRE(bare.err.find("compare") != std::string::npos);

  const auto help = run_cli("--help", dir.path());
  REQUIRE(help.exit_code == 0);
  REQUIRE(help.out.find("generate") != std::string::npos);
}

TEST_CASE("remote provider without an endpoint is a configuration error") {
  helpers::TempDir dir;
  const auto r = run_cli("--embedding.provider remote --print-config", dir.path());
  REQUIRE(r.exit_code == 1);
  REQUIRE(r.err.find("error:") != std::string::npos);
  REQUIRE(r.err.find("endpoint") != std::string::npos);
}

TEST_CASE("an unreachable remote endpoint fails with a retry hint") {
  helpers::TempDir dir;
  const fs::path data = dir.path() / "tiny.csv";
  write_file(data, kTinyDataset);
  const auto r = run_cli(
      "dedupe " + data.string() + " -o " + dir.str() +
          " --embedding.provider remote --embedding.endpoint http://127.0.0.1:1" +
          " --embedding.timeout_seconds 2",
      dir.path());
  REQUIRE(r.exit_code == 1);
  REQUIRE(r.err.find("error:") != std::string::npos);
  REQUIRE(r.err.find("hint: the failure looks transient") != std::string::npos);
}

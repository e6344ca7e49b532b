#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef _WIN32
#include <sys/wait.h>
#include <unistd.h>
#endif

// Utilities shared by the CLI-facing tests.

namespace helpers {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = fs::temp_directory_path();
    path_ = base / ("mmdedup_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the real mmdedup binary (path injected by CMake) with the given
// argument string, capturing stdout/stderr. `env_assignments` is a shell
// prefix such as "VAR=value" applied to just this invocation. Only available
// in targets that define MMDEDUP_CLI_PATH.
#ifdef MMDEDUP_CLI_PATH
inline CliResult run_cli(const std::string& args, const fs::path& scratch,
                         const std::string& env_assignments = "") {
  static std::atomic<unsigned> counter{0};
  const unsigned id = counter.fetch_add(1);
  const fs::path out_file = scratch / ("cli_out_" + std::to_string(id) + ".txt");
  const fs::path err_file = scratch / ("cli_err_" + std::to_string(id) + ".txt");

  const std::string cmd =
      (env_assignments.empty() ? std::string() : env_assignments + " ") +
      std::string(MMDEDUP_CLI_PATH) + " " + args + " >" + out_file.string() +
      " 2>" + err_file.string();
  const int raw = std::system(cmd.c_str());

  CliResult r;
#ifdef _WIN32
  r.exit_code = raw;
#else
  r.exit_code = (raw >= 0 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
#endif
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}
#endif  // MMDEDUP_CLI_PATH

}  // namespace helpers

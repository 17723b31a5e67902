#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("impact_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// Runs the CLI inside `dir`; returns the exit status.
int pipe_run(const fs::path& dir, const std::string& args, const std::string& env = "SOURCE_DATE_EPOCH=0") {
  const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" + IMPACT_PIPE_BIN + "' -q " + args +
                          " >>cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli exit codes") {
  TempDir tmp("codes");
  CHECK(pipe_run(tmp.path, "") == 2);
  CHECK(pipe_run(tmp.path, "no-such-command") == 2);
  CHECK(pipe_run(tmp.path, "evaluate --data nowhere") == 2);
  CHECK(pipe_run(tmp.path, "ingest --data nowhere") == 3);
  CHECK(pipe_run(tmp.path, "simulate --true 2 --false 2 --timestamp") == 2);
}

TEST_CASE("cli pipeline is deterministic under SOURCE_DATE_EPOCH") {
  TempDir tmp("pipeline");
  auto run_all = [&](const std::string& out) {
    REQUIRE(pipe_run(tmp.path, "--out " + out + " simulate --true 20 --false 24") == 0);
    REQUIRE(pipe_run(tmp.path, "--out " + out + " split --data " + out + " --test-true 5 --test-false 6") == 0);
    REQUIRE(pipe_run(tmp.path, "--out " + out + " train-svm --data " + out + " --split " + out + "/split.csv") == 0);
    REQUIRE(pipe_run(tmp.path, "--out " + out + " evaluate --model " + out + "/svm.model --data " + out +
                                   " --split " + out + "/split.csv") == 0);
  };
  run_all("a");
  run_all("b");
  for (const char* f : {"manifest.csv", "split.csv", "svm.model", "selection.csv", "report.txt"}) {
    CAPTURE(f);
    const auto a = slurp(tmp.path / "a" / f);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(tmp.path / "b" / f));
  }
  const auto report = slurp(tmp.path / "a" / "report.txt");
  CHECK(report.find("timestamp=1970-01-01T00:00:00Z") != std::string::npos);
  CHECK(report.find("Dataset size  11") != std::string::npos);

  CHECK(pipe_run(tmp.path, "--out c report a/report.txt") == 0);
  CHECK(slurp(tmp.path / "c" / "table.txt").find("Accuracy") != std::string::npos);
}

TEST_CASE("cli report --reference flags the inconsistent row") {
  TempDir tmp("reference");
  REQUIRE(pipe_run(tmp.path, "--out o report --reference") == 0);
  const auto table = slurp(tmp.path / "o" / "table.txt");
  CHECK(table.find("INCONSISTENT") != std::string::npos);
  CHECK(table.find("consistent (tp=63 fn=2 fp=10 tn=90)") != std::string::npos);
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tsncbs/cli.hpp"

namespace fs = std::filesystem;
using tsncbs::run_cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tsncbs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("tsncbs_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config(const char* name) { return std::string(TSNCBS_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST_CASE("analyze reports the unschedulable illustrative flows") {
  TempDir tmp;
  auto r = cli({"analyze", config("illustrative.json"), "--out", tmp.path.string(), "--dump-curves"});
  CHECK(r.code == tsncbs::kExitUnschedulable);
  std::string verdicts = slurp(tmp / "verdicts.csv");
  for (const char* f : {"f2,", "f3,", "f4,"}) {
    auto pos = verdicts.find(f);
    REQUIRE(pos != std::string::npos);
    CHECK(verdicts.substr(pos, verdicts.find('\n', pos) - pos).find("UNSCHED_NONSHAPED") !=
          std::string::npos);
  }
  CHECK(fs::exists(tmp / "delays.csv"));
  CHECK(fs::exists(tmp / "analysis.json"));
  CHECK_FALSE(fs::is_empty(tmp / "curves"));
}

TEST_CASE("analyze of a deployed configuration succeeds") {
  TempDir tmp;
  auto d = cli({"deploy", config("illustrative.json"), "--out", tmp.path.string()});
  REQUIRE(d.code == tsncbs::kExitOk);
  CHECK(d.out.find("TSN devices: 1/2") != std::string::npos);
  std::string placement = slurp(tmp / "placement.csv");
  CHECK(placement.find("SW0_1") != std::string::npos);
  CHECK(placement.find("SW0_2") != std::string::npos);
  CHECK(fs::exists(tmp / "framework_trace.csv"));
  TempDir again;
  auto a = cli({"analyze", tmp / "enriched.json", "--out", again.path.string()});
  CHECK(a.code == tsncbs::kExitOk);
}

TEST_CASE("input errors exit with the configuration code") {
  TempDir tmp;
  {
    std::ofstream bad(tmp / "bad.json");
    bad << R"({"devices": [{"id": "A", "kind": "router"}], "ports": [], "flows": []})";
  }
  auto r = cli({"analyze", tmp / "bad.json", "--out", tmp.path.string()});
  CHECK(r.code == tsncbs::kExitConfigError);
  CHECK(r.err.find("devices[0]") != std::string::npos);
  CHECK(cli({"analyze", tmp / "missing.json"}).code == tsncbs::kExitConfigError);
  CHECK(cli({}).code == tsncbs::kExitConfigError);
  CHECK(cli({"analyze", config("illustrative.json"), "--model", "exact"}).code ==
        tsncbs::kExitConfigError);
  CHECK(cli({"frobnicate"}).code == tsncbs::kExitConfigError);
}

TEST_CASE("deploy failure codes") {
  TempDir tmp;
  auto r = cli({"deploy", config("illustrative.json"), "--out", tmp.path.string(), "--max-rounds",
                "0"});
  CHECK(r.code == tsncbs::kExitBudgetExceeded);
}

TEST_CASE("compare writes one cdf per priority and approach") {
  TempDir tmp;
  auto r = cli({"compare", config("illustrative.json"), "--out", tmp.path.string()});
  REQUIRE(r.code == tsncbs::kExitOk);
  for (const char* k : {"0", "1"})
    for (const char* a : {"npsp", "partial", "full"})
      CHECK(fs::exists(tmp / (std::string("cdf_p") + k + "_" + a + ".csv")));
  CHECK(fs::exists(tmp / "compare.csv"));
}

TEST_CASE("simulate checks dominance") {
  TempDir tmp;
  auto r = cli({"simulate", config("illustrative.json"), "--out", tmp.path.string(), "--deploy",
                "--horizon", "5000", "--spread", "300", "--seed", "3"});
  CHECK(r.code == tsncbs::kExitOk);
  CHECK(r.out.find("violations: 0") != std::string::npos);
  CHECK(fs::exists(tmp / "sim_summary.csv"));
  CHECK(fs::exists(tmp / "trace.csv"));
  auto z = cli({"simulate", config("illustrative.json"), "--out", tmp.path.string(), "--horizon",
                "0"});
  CHECK(z.code == tsncbs::kExitOk);
  CHECK(z.out.find("frames: 0") != std::string::npos);
}

TEST_CASE("output files are identical across runs") {
  TempDir a, b;
  for (const TempDir* d : {&a, &b}) {
    REQUIRE(cli({"deploy", config("automotive.json"), "--out", d->path.string()}).code ==
            tsncbs::kExitOk);
    REQUIRE(cli({"simulate", config("illustrative.json"), "--out", d->path.string(), "--horizon",
                 "2000", "--arrivals", "jitter"})
                .code == tsncbs::kExitOk);
  }
  for (const char* f : {"placement.csv", "enriched.json", "verdicts.csv", "framework_trace.csv",
                        "sim_summary.csv", "trace.csv"})
    CHECK_MESSAGE(slurp(a.path / f) == slurp(b.path / f), f);
}

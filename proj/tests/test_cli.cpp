// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cli.hpp"

using namespace sheetlab::cli;
using nlohmann::json;

namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "sheetlab-cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const json& find_result(const json& report, const std::string& name) {
  for (const auto& r : report.at("results"))
    if (r.at("name") == name) return r;
  FAIL("missing result " << name);
  static const json none;
  return none;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("documented examples") {
  ExperimentConfig ortho;
  ortho.command = "hermite-ortho";
  ortho.d = 1;
  ortho.v = 1.0;
  ortho.max_order = 4;
  ortho.replicates = 200000;
  ortho.seed = 7;
  const Report r = run(ortho);
  CHECK(r.pass);
  const json& diag = find_result(r.json, "<(2),(2)>");
  CHECK(diag.at("theoretical").get<double>() == doctest::Approx(0.5));
  CHECK(std::abs(diag.at("estimate").get<double>() - 0.5) <= 4 * diag.at("se").get<double>());
  CHECK(r.json.at("schema") == kReportSchema);
  CHECK(r.json.at("seed") == 7);
  CHECK(r.json.at("config").at("replicates") == 200000);

  const Invocation mv = invoke({"mean-value", "--f", "cos", "--t", "1,1", "--x", "0", "--method", "quadrature"});
  CHECK(mv.code == kPass);
  const json mvj = json::parse(mv.out);
  CHECK(std::abs(find_result(mvj, "u").at("estimate").get<double>() - 0.6065306597126334) <= 1e-6);

  const Invocation tz = invoke({"tzitzeica", "--surface", "volume", "--k", "1", "--points", "100"});
  CHECK(tz.code == kPass);
  CHECK(find_result(json::parse(tz.out), "ratio relative spread").at("estimate").get<double>() <= 1e-8);
}

TEST_CASE("reports are reproducible") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"martingale", "--replicates", "3000", "--seed", "11"},
           {"ito-rules", "--d", "2", "--replicates", "2000", "--curves", "2"},
           {"path-independence", "--replicates", "300", "--mesh", "4,8"},
           {"sample-sheet", "--t", "1,2", "--d", "2", "--mesh", "3"}}) {
    const Invocation a = invoke(args), b = invoke(args);
    CHECK(a.code == b.code);
    CHECK(canonical_dump(json::parse(a.out)) == canonical_dump(json::parse(b.out)));
    CHECK(json::parse(a.out).contains("timestamp"));
  }
  // Thread count changes the embedded config but not a single result.
  ExperimentConfig cfg;
  cfg.command = "hermite-ortho";
  cfg.d = 2;
  cfg.max_order = 2;
  cfg.replicates = 5000;
  cfg.threads = 1;
  const json one = run(cfg).json.at("results");
  cfg.threads = 4;
  CHECK(run(cfg).json.at("results") == one);
}

TEST_CASE("exit-code contract") {
  CHECK(invoke({"kernel-residual"}).code == kPass);
  CHECK(invoke({"kernel-residual", "--tol", "1e-30"}).code == kToleranceFailure);
  CHECK(invoke({"hermite-ortho", "--replicates", "500", "--se-mult", "1e-6"}).code == kToleranceFailure);

  CHECK(invoke({}).code == kUsageError);
  CHECK(invoke({"no-such-command"}).code == kUsageError);
  CHECK(invoke({"mean-value", "--format", "xml"}).code == kUsageError);
  CHECK(invoke({"mean-value", "--t", "-1,1"}).code == kUsageError);
  CHECK(invoke({"martingale", "--replicates", "1"}).code == kUsageError);
  CHECK(invoke({"expand", "--series", "1=3,2"}).code == kUsageError);
  CHECK(invoke({"expand", "--series", "1=3,2:1=4"}).code == kUsageError);
  CHECK(invoke({"level-set", "--phi", "spline:1"}).code == kUsageError);
  CHECK(invoke({"volumetric-invariance", "--t", "2,3", "--s", "6,2"}).code == kUsageError);
  CHECK(invoke({"martingale", "--config", "/nonexistent/config.json"}).code == kUsageError);
  CHECK(invoke({"--help"}).code == kPass);
}

TEST_CASE("config files and precedence") {
  const auto json_path = temp_file("sheetlab_cfg_test.json");
  std::ofstream(json_path) << R"({"replicates": 1500, "seed": 9, "t": [1, 2], "mesh": [4]})";
  const Invocation a = invoke({"martingale", "--config", json_path.string()});
  REQUIRE(a.code == kPass);
  const json aj = json::parse(a.out);
  CHECK(aj.at("seed") == 9);
  CHECK(aj.at("config").at("replicates") == 1500);
  CHECK(aj.at("config").at("mesh") == json::parse("[4]"));
  CHECK(json::parse(invoke({"martingale", "--config", json_path.string(), "--seed", "10"}).out).at("seed") == 10);

  // The embedded config reproduces the run when fed back.
  const auto echo_path = temp_file("sheetlab_cfg_echo.json");
  std::ofstream(echo_path) << aj.at("config").dump();
  const Invocation replay = invoke({"martingale", "--config", echo_path.string()});
  CHECK(canonical_dump(json::parse(replay.out)) == canonical_dump(aj));

  const auto flat_path = temp_file("sheetlab_cfg_test.toml");
  std::ofstream(flat_path) << "replicates = 1200\nseed = 4\nt = 1,2\n";
  const json fj = json::parse(invoke({"martingale", "--config", flat_path.string()}).out);
  CHECK(fj.at("seed") == 4);
  CHECK(fj.at("config").at("t") == json::parse("[1.0, 2.0]"));

  const auto bad_path = temp_file("sheetlab_cfg_bad.json");
  std::ofstream(bad_path) << R"({"replicatez": 10})";
  CHECK(invoke({"martingale", "--config", bad_path.string()}).code == kUsageError);
  std::ofstream(bad_path) << R"({"replicates": )";
  CHECK(invoke({"martingale", "--config", bad_path.string()}).code == kUsageError);
  for (const auto& p : {json_path, echo_path, flat_path, bad_path}) std::filesystem::remove(p);
}

TEST_CASE("seed from the environment") {
  ::setenv(kSeedEnv, "123", 1);
  CHECK(json::parse(invoke({"martingale", "--replicates", "100"}).out).at("seed") == 123);
  CHECK(json::parse(invoke({"martingale", "--replicates", "100", "--seed", "5"}).out).at("seed") == 5);
  ::setenv(kSeedEnv, "12x", 1);
  CHECK(invoke({"martingale", "--replicates", "100"}).code == kUsageError);
  ::unsetenv(kSeedEnv);
  CHECK(json::parse(invoke({"martingale", "--replicates", "100"}).out).at("seed") == 1);
}

TEST_CASE("output files and csv") {
  const auto path = temp_file("sheetlab_sheet_test.csv");
  const Invocation r = invoke({"sample-sheet", "--t", "1,1", "--mesh", "2", "--format", "csv", "--out", path.string()});
  REQUIRE(r.code == kPass);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# sheetlab-sheet v1");
  std::filesystem::remove(path);

  const Invocation pi = invoke({"path-independence", "--replicates", "200", "--mesh", "4,8", "--format", "csv"});
  CHECK(pi.out.rfind("mesh,pair_ms,", 0) == 0);
  CHECK(invoke({"martingale", "--replicates", "100", "--out", "/nonexistent/dir/report.json"}).code == kUsageError);
}

TEST_CASE("every subcommand runs with its defaults") {
  for (const auto& name : command_names()) {
    std::vector<std::string> args{name, "--replicates", "400"};
    if (name == "path-independence" || name == "derivative-check") {
      args.push_back("--mesh");
      args.push_back("4,8");
    }
    const Invocation r = invoke(args);
    CAPTURE(name);
    CAPTURE(r.err);
    CHECK(r.code != kUsageError);
    CHECK(json::parse(r.out).at("command") == name);
  }
}

TEST_CASE("installed executable honours the exit codes") {
  const std::string exe = SHEETLAB_CLI_PATH;
  const auto status = [&](const std::string& args) {
    const int raw = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("level-set --phi poly:1,4") == 0);
  CHECK(status("kernel-residual --tol 1e-30") == 1);
  CHECK(status("frobnicate") == 2);
}

// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sheetlab::cli {

inline constexpr const char* kReportSchema = "sheetlab.report/1";
inline constexpr const char* kSeedEnv = "SHEETLAB_SEED";

enum ExitCode : int { kPass = 0, kToleranceFailure = 1, kUsageError = 2 };

/// Malformed or inconsistent experiment configuration.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Everything a run depends on. Multitimes left empty take per-command
/// defaults; indices a, b are 1-based component numbers.
struct ExperimentConfig {
  std::string command;
  std::size_t m = 2;
  std::size_t d = 1;
  std::vector<double> t;
  std::vector<double> T;
  std::vector<double> s;
  std::vector<double> x;
  double v = 1.0;
  int max_order = 4;
  std::size_t replicates = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::vector<std::size_t> mesh;
  std::size_t a = 1;
  std::size_t b = 1;
  double se_mult = 4.0;
  double tol = -1.0;  ///< negative: the command's default bound
  double h = 1e-3;
  std::string f = "cos";
  double f_param = 0.0;
  std::string method = "quadrature";
  std::string kernel = "forward";
  std::string surface = "volume";
  double k = 1.0;
  double radius = 1.0;
  std::size_t points = 100;
  std::string series;
  int tail_p = -1;
  std::string phi = "poly:1,4";
  double c = 0.0;
  double lo = 0.0;
  double hi = 10.0;
  std::size_t grid_n = 200;
  std::size_t curves = 2;
  std::size_t corners = 0;  ///< 0: 2m
  std::string out;
  std::string format = "json";
};

nlohmann::json to_json(const ExperimentConfig& cfg);

struct Report {
  nlohmann::json json;  ///< full report, including the timestamp field
  std::string csv;      ///< plot-ready table for --format csv
  bool pass = false;
};

const std::vector<std::string>& command_names();

/// Executes one experiment. Throws UsageError (or another std::logic_error
/// from the library) on malformed configurations.
Report run(const ExperimentConfig& cfg);

/// Report serialized without its timestamp, for reproducibility comparisons.
std::string canonical_dump(const nlohmann::json& report);

/// Parses argv (flags override an optional --config file), runs and writes
/// the report to --out or `out`. Returns an ExitCode.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sheetlab::cli

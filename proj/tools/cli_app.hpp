#pragma once

// Command-line front end. The entry point takes the streams explicitly so
// the test suite can drive it in-process.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperadia/channel.hpp"

namespace hyperadia::cli {

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  int points = 0;
  bool logarithmic = true;

  static GridSpec parse(const std::string& text);  // min:max:points:log|lin
  std::string str() const;
  std::vector<double> values() const;
};

struct RunConfig {
  std::string command;
  std::optional<double> lambda_star;
  std::optional<double> v0bar;
  std::vector<Channel> channels;
  std::vector<double> rhos;
  std::optional<GridSpec> rho_grid;
  std::vector<int> n_max;
  std::string k_grid;  // lo..hi or lo..hi:points
  bool hard_disc = false;
  int L = 0;
  std::string format = "csv";
  std::string out;
  int jobs = 0;  // 0 leaves the OpenMP default
  std::map<std::string, std::string> tol_overrides;

  StepPotential potential() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2 };

// Parses argv, runs one subcommand, writes the table to --out (or `out`) and
// the sidecar next to it. Returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Runs an already parsed configuration.
int run_config(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Default location of the reference dataset, overridable by HYPERADIA_REF_DATA.
std::string reference_data_path();

// Fixed 12-significant-digit rendering used for every CSV number.
std::string format_number(double v);

}  // namespace hyperadia::cli

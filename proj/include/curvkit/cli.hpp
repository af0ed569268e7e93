#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace curvkit::cli {

// Everything a run depends on. Defaults are mirrored into every report.
struct RunConfig {
  std::string command;
  std::string input;      // chain file (JSON or edge-list TSV)
  std::string generator;  // e.g. "hypercube:3"
  std::string mean = "arithmetic";
  double n = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  std::string rho = "ones";  // "ones", "uniform", "dirac:<id>", JSON object or file
  std::string out;           // report path; stdout when empty
  std::string csv;           // CSV path for curvature profiles
  std::string suite = "all";
  int jobs = 1;
  int trials = 200;
  int starts = 32;
  int probe = 0;
  int max_size = 24;
  double t = 1.0;
  double eps = 0.25;
  std::string k;  // curvature override for verify, empty means computed
  std::string x;
  std::string y;
  std::vector<double> t_grid = {0.1, 1.0, 10.0};
  std::vector<double> profile;  // dimensions for a curvature profile
  double agreement_tol = 1e-8;
  double verify_tol = 1e-9;
  double entropic_tol = 1e-8;
  int max_iters = 500;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

// Runs one subcommand. Exit codes: 0 success, 2 invalid input, 3 numerical
// failure, 4 a verified inequality with exact preconditions failed.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

}  // namespace curvkit::cli

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "skewifs/circle.hpp"

namespace skewifs::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericError = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double lambda = 0.48;
  std::string potentials = "quad; tent";
  long grid_n = 8192;
  std::uint64_t seed = 1;
  std::size_t burn_in = 1000;
  std::size_t n_points = 10000;
  double tol = 1e-6;
  std::vector<double> lambda_schedule{0.9, 0.99, 0.999};
  unsigned oracle_len = 12;

  double x0 = 0.2472135954;  // orbit start, taken as the exact decimal
  double y0 = 0.1;
  std::vector<int> control;  // repeated control pattern; empty means iid from the seed
  std::size_t srb_samples = 100000;
  std::size_t n_trials = 20;
  std::size_t n_steps = 100000;
  unsigned enum_depth = 6;
  std::size_t enum_grid = 64;
  double epsilon = 0.05;
};

// Reads a config document; unknown keys and ill-typed values are ConfigErrors.
RunConfig parse_config(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& cfg);
// Throws ConfigError when an invariant of the configuration fails.
void validate(const RunConfig& cfg);

// The rational with the shortest decimal expansion that rounds to x, mod 1.
CirclePoint exact_decimal(double x);

// `<tool> <subcommand> --config path [--lambda f] [--seed n] [--out dir] [--workers k]`
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skewifs::cli

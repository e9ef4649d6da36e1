#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdcs/eval.hpp"

namespace sdcs::cli {

/// Bad configuration text or values; the CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything the front end reads from a config file. Keys carry their units.
struct RunConfig {
  int n_subcarriers = 512;
  int cp_length = 64;
  int delay_taps = 64;
  int sparsity = 6;
  int n_symbols = 3;
  int bem_order = 3;
  double delta_f_hz = 15e3;
  double carrier_hz = 3e9;
  double speed_kmh = 350.0;
  unsigned long long seed = 1;
  int oscillators = 64;
  bool enforce_joint_bound = true;

  std::vector<double> snr_grid_db{0, 5, 10, 15, 20, 25, 30, 35, 40};
  int trials = 200;
  std::vector<std::string> nmse_schemes{"sdcs", "sdcs+smooth", "dcs", "dcs+smooth", "cs", "cs+smooth"};
  std::vector<std::string> ber_schemes{"joint", "single", "ideal"};
  int joint_clusters = 60;
  int single_clusters = 24;
  int pattern_iterations = 1000;
  int pattern_restarts = 8;
  std::string joint_pattern_file;
  std::string single_pattern_file;
  bool exact_bem = false;

  double estimate_snr_db = 30.0;
  std::string estimate_scheme = "joint";
  std::string channel_file;

  bool operator==(const RunConfig&) const = default;

  SystemConfig system() const;
  ExperimentSpec experiment(MetricKind kind, int jobs) const;
};

/// "key = value" lines, '#' comments. Unknown keys, duplicate keys, and
/// malformed values raise ConfigError naming the line.
RunConfig parse_run_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_run_config(const std::string& path);
void write_run_config(const RunConfig& cfg, std::ostream& out);

/// "0:5:40" (inclusive range) or "0,10,20".
std::vector<double> parse_grid(const std::string& text);

}  // namespace sdcs::cli

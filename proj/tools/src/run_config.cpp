#include "sdcs_cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace sdcs::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty list item in '" + text + "'");
    out.push_back(item);
  }
  if (out.empty() || text.back() == ',') throw ConfigError("malformed list '" + text + "'");
  return out;
}

std::vector<std::string> scheme_list(const std::string& text) {
  auto names = split_list(text);
  for (const auto& n : names) {
    try {
      parse_scheme(n);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return names;
}

template <class T>
T parse_number(const std::string& text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ConfigError("not a number: '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("not a boolean: '" + text + "'");
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"n_subcarriers", [](RunConfig& c, const std::string& v) { c.n_subcarriers = parse_number<int>(v); }},
      {"cp_length", [](RunConfig& c, const std::string& v) { c.cp_length = parse_number<int>(v); }},
      {"delay_taps", [](RunConfig& c, const std::string& v) { c.delay_taps = parse_number<int>(v); }},
      {"sparsity", [](RunConfig& c, const std::string& v) { c.sparsity = parse_number<int>(v); }},
      {"n_symbols", [](RunConfig& c, const std::string& v) { c.n_symbols = parse_number<int>(v); }},
      {"bem_order", [](RunConfig& c, const std::string& v) { c.bem_order = parse_number<int>(v); }},
      {"delta_f_hz", [](RunConfig& c, const std::string& v) { c.delta_f_hz = parse_number<double>(v); }},
      {"carrier_hz", [](RunConfig& c, const std::string& v) { c.carrier_hz = parse_number<double>(v); }},
      {"speed_kmh", [](RunConfig& c, const std::string& v) { c.speed_kmh = parse_number<double>(v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_number<unsigned long long>(v); }},
      {"oscillators", [](RunConfig& c, const std::string& v) { c.oscillators = parse_number<int>(v); }},
      {"enforce_joint_bound", [](RunConfig& c, const std::string& v) { c.enforce_joint_bound = parse_bool(v); }},
      {"snr_grid_db", [](RunConfig& c, const std::string& v) { c.snr_grid_db = parse_grid(v); }},
      {"trials", [](RunConfig& c, const std::string& v) { c.trials = parse_number<int>(v); }},
      {"nmse_schemes", [](RunConfig& c, const std::string& v) { c.nmse_schemes = scheme_list(v); }},
      {"ber_schemes", [](RunConfig& c, const std::string& v) { c.ber_schemes = scheme_list(v); }},
      {"joint_clusters", [](RunConfig& c, const std::string& v) { c.joint_clusters = parse_number<int>(v); }},
      {"single_clusters", [](RunConfig& c, const std::string& v) { c.single_clusters = parse_number<int>(v); }},
      {"pattern_iterations", [](RunConfig& c, const std::string& v) { c.pattern_iterations = parse_number<int>(v); }},
      {"pattern_restarts", [](RunConfig& c, const std::string& v) { c.pattern_restarts = parse_number<int>(v); }},
      {"joint_pattern_file", [](RunConfig& c, const std::string& v) { c.joint_pattern_file = v; }},
      {"single_pattern_file", [](RunConfig& c, const std::string& v) { c.single_pattern_file = v; }},
      {"exact_bem", [](RunConfig& c, const std::string& v) { c.exact_bem = parse_bool(v); }},
      {"estimate_snr_db", [](RunConfig& c, const std::string& v) {
         c.estimate_snr_db = v == "inf" ? kNoiseless : parse_number<double>(v);
       }},
      {"estimate_scheme", [](RunConfig& c, const std::string& v) { c.estimate_scheme = v; }},
      {"channel_file", [](RunConfig& c, const std::string& v) { c.channel_file = v; }},
  };
  return table;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const auto t = trim(text);
  std::vector<double> out;
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(trim(item));
    if (parts.size() != 3) throw ConfigError("range must be start:step:stop, got '" + text + "'");
    const double start = parse_number<double>(parts[0]);
    const double step = parse_number<double>(parts[1]);
    const double stop = parse_number<double>(parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("bad range '" + text + "'");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    for (const auto& item : split_list(t)) out.push_back(parse_number<double>(item));
  }
  if (out.empty()) throw ConfigError("empty SNR grid");
  return out;
}

SystemConfig RunConfig::system() const {
  SystemConfig s;
  s.n_subcarriers = n_subcarriers;
  s.cp_length = cp_length;
  s.delay_taps = delay_taps;
  s.sparsity = sparsity;
  s.n_symbols = n_symbols;
  s.bem_order = bem_order;
  s.delta_f_hz = delta_f_hz;
  s.carrier_hz = carrier_hz;
  s.speed_mps = speed_kmh / 3.6;
  s.seed = seed;
  s.oscillators = oscillators;
  s.enforce_joint_bound = enforce_joint_bound;
  return s;
}

ExperimentSpec RunConfig::experiment(MetricKind kind, int jobs) const {
  ExperimentSpec spec;
  spec.system = system();
  spec.snr_grid = snr_grid_db;
  spec.trials = trials;
  try {
    for (const auto& s : kind == MetricKind::nmse ? nmse_schemes : ber_schemes) {
      spec.schemes.push_back(parse_scheme(s));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  spec.joint_clusters = joint_clusters;
  spec.single_clusters = single_clusters;
  spec.joint_pattern_path = joint_pattern_file;
  spec.single_pattern_path = single_pattern_file;
  spec.pattern_iterations = pattern_iterations;
  spec.pattern_restarts = pattern_restarts;
  spec.exact_bem = exact_bem;
  spec.jobs = jobs;
  return spec;
}

RunConfig parse_run_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  try {
    cfg.system().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (cfg.trials < 1) throw ConfigError(source + ": trials must be >= 1");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_run_config(in, path);
}

void write_run_config(const RunConfig& c, std::ostream& out) {
  std::ostringstream grid;
  grid << std::setprecision(17);
  for (std::size_t i = 0; i < c.snr_grid_db.size(); ++i) grid << (i ? "," : "") << c.snr_grid_db[i];
  out << std::setprecision(17);
  out << "# system\n";
  out << "n_subcarriers = " << c.n_subcarriers << '\n';
  out << "cp_length = " << c.cp_length << '\n';
  out << "delay_taps = " << c.delay_taps << '\n';
  out << "sparsity = " << c.sparsity << '\n';
  out << "n_symbols = " << c.n_symbols << '\n';
  out << "bem_order = " << c.bem_order << '\n';
  out << "delta_f_hz = " << c.delta_f_hz << '\n';
  out << "carrier_hz = " << c.carrier_hz << '\n';
  out << "speed_kmh = " << c.speed_kmh << '\n';
  out << "seed = " << c.seed << '\n';
  out << "oscillators = " << c.oscillators << '\n';
  out << "enforce_joint_bound = " << (c.enforce_joint_bound ? "true" : "false") << '\n';
  out << "\n# experiments\n";
  out << "snr_grid_db = " << grid.str() << '\n';
  out << "trials = " << c.trials << '\n';
  out << "nmse_schemes = " << join(c.nmse_schemes) << '\n';
  out << "ber_schemes = " << join(c.ber_schemes) << '\n';
  out << "joint_clusters = " << c.joint_clusters << '\n';
  out << "single_clusters = " << c.single_clusters << '\n';
  out << "pattern_iterations = " << c.pattern_iterations << '\n';
  out << "pattern_restarts = " << c.pattern_restarts << '\n';
  out << "joint_pattern_file = " << c.joint_pattern_file << '\n';
  out << "single_pattern_file = " << c.single_pattern_file << '\n';
  out << "exact_bem = " << (c.exact_bem ? "true" : "false") << '\n';
  out << "\n# estimate\n";
  out << "estimate_snr_db = ";
  if (std::isinf(c.estimate_snr_db)) {
    out << "inf\n";
  } else {
    out << c.estimate_snr_db << '\n';
  }
  out << "estimate_scheme = " << c.estimate_scheme << '\n';
  out << "channel_file = " << c.channel_file << '\n';
}

}  // namespace sdcs::cli

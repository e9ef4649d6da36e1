#include "sdcs_cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <thread>

#include "sdcs/bem.hpp"
#include "sdcs/dschan.hpp"
#include "sdcs/eval.hpp"
#include "sdcs/ofdm.hpp"
#include "sdcs/pilots.hpp"
#include "sdcs/recovery.hpp"
#include "sdcs/rng.hpp"
#include "sdcs/validation.hpp"
#include "sdcs_cli/run_config.hpp"

namespace fs = std::filesystem;

namespace sdcs::cli {

namespace {

struct Globals {
  std::string config;
  std::optional<unsigned long long> seed;
  int jobs = 0;
  std::string out;
};

RunConfig resolve(const Globals& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

int jobs_of(const Globals& g) {
  if (g.jobs > 0) return g.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

int cmd_design_pilots(const Globals& g, bool single, std::ostream& out) {
  const RunConfig cfg = resolve(g);
  const SystemConfig sys = cfg.system();
  if (!single) check_joint_bound(sys);
  PatternSearch search;
  search.n_subcarriers = sys.n_subcarriers;
  search.n_symbols = single ? 1 : sys.n_symbols;
  search.order = sys.bem_order;
  search.clusters = single ? cfg.single_clusters : cfg.joint_clusters;
  search.delay_taps = sys.delay_taps;
  search.iterations = cfg.pattern_iterations;
  search.restarts = cfg.pattern_restarts;
  search.jobs = jobs_of(g);
  // Same derived seed as the sweeps, so a designed file reproduces their pattern.
  const auto result = optimize_pattern(search, derive_seed(sys.seed, Stream::pattern, single ? 1 : 0));
  const fs::path path = g.out.empty() ? fs::path(single ? "single_pattern.txt" : "pattern.txt") : fs::path(g.out);
  auto f = open_out(path);
  write_pattern(result.pattern, f);
  out << "wrote " << path.string() << ": " << result.pattern.clusters() << " clusters, "
      << result.pattern.total_pilots() << " pilot subcarriers\n";
  out << std::setprecision(6) << "coherence " << result.coherence << " (equispaced "
      << result.baseline_coherence << ")\n";
  return kExitOk;
}

int cmd_sweep(const Globals& g, const std::string& kind_text, std::ostream& out) {
  const RunConfig cfg = resolve(g);
  const MetricKind kind = kind_text == "nmse" ? MetricKind::nmse : MetricKind::ber;
  const Experiment exp(cfg.experiment(kind, jobs_of(g)));
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(dir);
  const auto curves = exp.sweep(kind);
  std::vector<std::string> files, titles;
  for (const auto& c : curves) {
    const std::string name = std::string(to_string(kind)) + "_" + file_stem(c.scheme) + ".csv";
    auto f = open_out(dir / name);
    write_curve_csv(c, f);
    files.push_back(name);
    titles.push_back(c.scheme.name());
    out << c.scheme.name() << ':';
    for (const auto& p : c.points) out << ' ' << p.snr_db << "dB=" << std::setprecision(5) << p.metric;
    if (!c.points.empty() && c.points.front().skipped > 0) out << " (skipped trials present)";
    out << '\n';
  }
  auto script = open_out(dir / (std::string(to_string(kind)) + ".gp"));
  write_plot_script(kind, files, titles, script);
  out << "wrote " << curves.size() << " curves to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_estimate(const Globals& g, std::ostream& out) {
  const RunConfig cfg = resolve(g);
  ExperimentSpec spec = cfg.experiment(MetricKind::nmse, jobs_of(g));
  Scheme scheme;
  try {
    scheme = parse_scheme(cfg.estimate_scheme);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  spec.schemes = {scheme};
  spec.trials = 1;
  const Experiment exp(spec);
  const SystemConfig sys = spec.system;

  ChannelRealization real = cfg.channel_file.empty()
                                ? generate_channel(sys, derive_seed(sys.seed, Stream::support, 0))
                                : read_channel_csv(cfg.channel_file);
  if (real.n_subcarriers != sys.n_subcarriers || real.cp_length != sys.cp_length ||
      real.delay_taps != sys.delay_taps || real.n_symbols != sys.n_symbols) {
    throw ConfigError("channel file dimensions do not match the configuration");
  }
  const TapTrajectories truth = data_taps(real);
  const PilotPattern& symbol_pattern = scheme.single_symbol ? exp.single_pattern() : exp.joint_pattern();
  const PilotPattern frame_pattern =
      scheme.single_symbol ? tile_pattern(symbol_pattern, sys.n_symbols) : symbol_pattern;

  TxFrame tx = blank_frame(sys.n_symbols, sys.n_subcarriers);
  embed_pilots(tx, frame_pattern);
  auto data_rng = make_rng(sys.seed, Stream::data, 0);
  fill_random_data(tx, data_rng);
  auto noise_rng = make_rng(sys.seed, Stream::noise, 0);
  const RxFrame rx = transmit(tx, real, cfg.estimate_snr_db, noise_rng);

  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "channel.csv");
    write_channel_csv(real, f);
  }
  TapTrajectories taps;
  BemCoefficients coeffs;
  if (scheme.ideal) {
    coeffs = fit_coefficients(real, exp.basis());
    taps = reconstruct_taps(coeffs, exp.basis());
  } else if (scheme.single_symbol) {
    const auto per = estimate_channel_per_symbol(rx, symbol_pattern, exp.single_phi(), exp.basis(), sys,
                                                 scheme.recovery,
                                                 scheme.smoothing ? Smoothing::single_symbol : Smoothing::none);
    for (std::size_t j = 0; j < per.size(); ++j) {
      taps.push_back(per[j].taps.front());
      auto f = open_out(dir / ("sparse_symbol" + std::to_string(j) + ".csv"));
      write_estimate_csv(per[j].sparse, sys.delay_taps, f);
    }
    coeffs = fit_coefficients(taps, exp.basis());
  } else {
    const Smoothing mode = !scheme.smoothing      ? Smoothing::none
                           : sys.n_symbols >= 2 ? Smoothing::multi_symbol
                                                : Smoothing::single_symbol;
    const auto est = estimate_channel(rx, symbol_pattern, exp.joint_phi(), exp.basis(), sys, scheme.recovery, mode);
    taps = est.taps;
    coeffs = est.coeffs;
    auto f = open_out(dir / "sparse.csv");
    write_estimate_csv(est.sparse, sys.delay_taps, f);
  }
  {
    auto f = open_out(dir / "coefficients.csv");
    write_coefficients_csv(coeffs, f);
  }
  out << "scheme " << scheme.name() << ", snr " << cfg.estimate_snr_db << " dB\n";
  out << "true support:";
  for (int l : real.support) out << ' ' << l;
  out << "\nestimated taps:";
  for (int l : coeffs.active_taps()) out << ' ' << l;
  out << '\n' << std::setprecision(6) << "nmse " << nmse_db(truth, taps) << " dB\n";
  return kExitOk;
}

int cmd_validate(const Globals& g, const std::string& pattern, std::ostream& out) {
  const RunConfig cfg = resolve(g);
  const auto checks = run_validation_suite(cfg.seed, pattern);
  bool ok = true;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_dump_defaults(const Globals& g, std::ostream& out) {
  RunConfig cfg;
  if (g.seed) cfg.seed = *g.seed;
  if (g.out.empty()) {
    write_run_config(cfg, out);
  } else {
    auto f = open_out(g.out);
    write_run_config(cfg, f);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse doubly-selective OFDM channel estimation toolkit", "sdcs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "configuration file (key = value)");
  app.add_option("--seed", g.seed, "override the configured seed");
  app.add_option("--jobs", g.jobs, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "output file or directory");

  auto* design = app.add_subcommand("design-pilots", "optimize a pilot pattern and write it");
  bool single = false;
  design->add_flag("--single", single, "design the one-symbol pattern");
  auto* sweep = app.add_subcommand("sweep", "NMSE or coded-BER curves over the SNR grid");
  std::string kind;
  sweep->add_option("--kind", kind, "nmse or ber")->required()->check(CLI::IsMember({"nmse", "ber"}));
  auto* estimate = app.add_subcommand("estimate", "estimate one channel realization");
  auto* validate = app.add_subcommand("validate", "run the invariant suite");
  std::string pattern;
  validate->add_option("--pattern", pattern, "also check this pattern file");
  auto* dump = app.add_subcommand("dump-defaults", "print the default configuration");

  // Global options may follow the subcommand too.
  for (auto* sub : {design, sweep, estimate, validate, dump}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*design) return cmd_design_pilots(g, single, out);
    if (*sweep) return cmd_sweep(g, kind, out);
    if (*estimate) return cmd_estimate(g, out);
    if (*validate) return cmd_validate(g, pattern, out);
    if (*dump) return cmd_dump_defaults(g, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sdcs::cli

#include "sdcs/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "sdcs/banded.hpp"
#include "sdcs/coding.hpp"
#include "sdcs/ofdm.hpp"
#include "sdcs/rng.hpp"
#include "sdcs/smooth.hpp"

namespace sdcs {

double nmse_linear(const TapTrajectories& truth, const TapTrajectories& estimate) {
  if (truth.size() != estimate.size()) throw std::invalid_argument("nmse: symbol count mismatch");
  double err = 0.0, ref = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (truth[j].rows() != estimate[j].rows() || truth[j].cols() != estimate[j].cols()) {
      throw std::invalid_argument("nmse: trajectory shape mismatch");
    }
    err += (truth[j] - estimate[j]).squaredNorm();
    ref += truth[j].squaredNorm();
  }
  if (ref == 0.0) throw std::domain_error("nmse: all-zero reference channel");
  return err / ref;
}

double to_db(double linear) {
  if (!(linear > 0.0)) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(linear));
}

double nmse_db(const TapTrajectories& truth, const TapTrajectories& estimate) {
  return to_db(nmse_linear(truth, estimate));
}

std::string Scheme::name() const {
  if (ideal) return "ideal";
  std::string s = recovery == Recovery::bsomp ? "sdcs" : recovery == Recovery::somp ? "dcs" : "cs";
  if (single_symbol) s += "-single";
  if (smoothing) s += "+smooth";
  return s;
}

Scheme parse_scheme(const std::string& text) {
  if (text == "ideal") return Scheme{Recovery::bsomp, false, false, true};
  if (text == "joint") return Scheme{Recovery::bsomp, true, false, false};
  if (text == "single") return Scheme{Recovery::bsomp, true, true, false};
  Scheme s;
  std::string rest = text;
  auto take = [&](const std::string& word) {
    if (rest.compare(0, word.size(), word) == 0) {
      rest.erase(0, word.size());
      return true;
    }
    return false;
  };
  if (take("sdcs")) {
    s.recovery = Recovery::bsomp;
  } else if (take("dcs")) {
    s.recovery = Recovery::somp;
  } else if (take("cs")) {
    s.recovery = Recovery::omp;
  } else {
    throw std::invalid_argument("unknown scheme '" + text + "'");
  }
  while (!rest.empty()) {
    if (take("+smooth")) {
      s.smoothing = true;
    } else if (take("-single")) {
      s.single_symbol = true;
    } else {
      throw std::invalid_argument("unknown scheme modifier in '" + text + "'");
    }
  }
  return s;
}

const char* to_string(MetricKind kind) { return kind == MetricKind::nmse ? "nmse" : "ber"; }

void ExperimentSpec::validate() const {
  system.validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (snr_grid.empty()) throw std::invalid_argument("snr grid is empty");
  if (schemes.empty()) throw std::invalid_argument("no schemes selected");
  if (joint_clusters < system.n_symbols) throw std::invalid_argument("joint_clusters must be >= J");
  if (single_clusters < 1) throw std::invalid_argument("single_clusters must be >= 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
}

std::vector<Scheme> default_nmse_schemes() {
  std::vector<Scheme> out;
  for (auto r : {Recovery::bsomp, Recovery::somp, Recovery::omp}) {
    out.push_back(Scheme{r, false, false, false});
    out.push_back(Scheme{r, true, false, false});
  }
  return out;
}

std::vector<Scheme> default_ber_schemes() {
  return {parse_scheme("joint"), parse_scheme("single"), parse_scheme("ideal")};
}

int PairedTrials::skipped() const {
  return static_cast<int>(std::count_if(trials.begin(), trials.end(),
                                        [](const TrialOutcome& t) { return t.skipped; }));
}

std::vector<double> PairedTrials::values(MetricKind kind, std::size_t s) const {
  std::vector<double> out;
  for (const auto& t : trials) {
    if (t.skipped) continue;
    out.push_back(kind == MetricKind::nmse ? t.nmse.at(s) : t.ber.at(s));
  }
  return out;
}

namespace {

PilotPattern load_or_design(const std::string& path, const PatternSearch& search, std::uint64_t seed,
                            double* coherence) {
  PilotPattern p;
  if (!path.empty()) {
    p = read_pattern(path);
    if (p.n_subcarriers != search.n_subcarriers || p.n_symbols != search.n_symbols ||
        p.order != search.order) {
      throw std::invalid_argument("pattern file " + path + " does not match the configured N, J, Q");
    }
  } else {
    p = optimize_pattern(search, seed).pattern;
  }
  if (coherence) *coherence = pattern_coherence(p.values, p.n_subcarriers, p.n_symbols, search.delay_taps);
  return p;
}

struct Link {
  TxFrame tx;
  RxFrame rx;
  Bits info;
};

Link make_link(const PilotPattern& pattern, const ChannelRealization& real, double snr_db,
               std::uint64_t data_seed, std::uint64_t noise_seed) {
  Link link;
  link.tx = blank_frame(pattern.n_symbols, pattern.n_subcarriers);
  embed_pilots(link.tx, pattern);
  std::mt19937_64 data_rng(data_seed);
  link.info.resize(info_bits_for(2 * link.tx.data_count()));
  for (auto& b : link.info) b = static_cast<std::uint8_t>(data_rng() & 1U);
  Bits coded = conv_encode(link.info);
  coded.resize(2 * static_cast<std::size_t>(link.tx.data_count()), 0);  // odd data counts leave one pad pair
  fill_data(link.tx, coded);
  std::mt19937_64 noise_rng(noise_seed);
  link.rx = transmit(link.tx, real, snr_db, noise_rng);
  return link;
}

// Data-subcarrier decisions after per-symbol equalization, Viterbi-decoded.
template <class Equalizer>
long count_bit_errors(const Link& link, Equalizer&& equalize, long* info_bits) {
  const int J = link.tx.n_symbols();
  const int N = link.tx.n_subcarriers();
  std::vector<cplx> data;
  data.reserve(link.tx.data_count());
  for (int j = 0; j < J; ++j) {
    const CVector x = equalize(j, CVector(link.rx.symbols.row(j).transpose()));
    for (int k = 0; k < N; ++k) {
      if (link.tx.data_mask[static_cast<std::size_t>(j) * N + k]) data.push_back(x(k));
    }
  }
  Bits coded = qpsk_demap(data);
  coded.resize(2 * (link.info.size() + kTailBits));
  const Bits decoded = viterbi_decode(coded);
  long errors = 0;
  for (std::size_t i = 0; i < link.info.size(); ++i) errors += decoded[i] != link.info[i];
  *info_bits = static_cast<long>(link.info.size());
  return errors;
}

long banded_bit_errors(const Link& link, const BemCoefficients& coeffs, long* info_bits) {
  const int N = link.tx.n_subcarriers();
  return count_bit_errors(
      link, [&](int j, const CVector& y) { return equalize_zf(frequency_channel_band(coeffs, N, j), y); },
      info_bits);
}

// Ideal CSI: the complete frequency-domain matrix F H_T F^H, ICI outside the band included.
long true_channel_bit_errors(const Link& link, const ChannelRealization& real, long* info_bits) {
  return count_bit_errors(
      link,
      [&](int j, const CVector& y) {
        CVector x = frequency_domain_matrix(real, j).partialPivLu().solve(y);
        if (!x.allFinite()) throw SingularMatrixError("true H_F is singular");
        return x;
      },
      info_bits);
}

}  // namespace

Experiment::Experiment(ExperimentSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const auto& cfg = spec_.system;
  check_joint_bound(cfg);
  basis_ = build_basis(cfg.n_subcarriers, cfg.bem_order);

  PatternSearch search;
  search.n_subcarriers = cfg.n_subcarriers;
  search.n_symbols = cfg.n_symbols;
  search.order = cfg.bem_order;
  search.clusters = spec_.joint_clusters;
  search.delay_taps = cfg.delay_taps;
  search.iterations = spec_.pattern_iterations;
  search.restarts = spec_.pattern_restarts;
  search.jobs = spec_.jobs;
  joint_ = load_or_design(spec_.joint_pattern_path, search, derive_seed(cfg.seed, Stream::pattern, 0),
                          &joint_mu_);
  joint_phi_ = build_measurement_matrix(joint_, cfg.delay_taps);

  if (needs_single()) {
    search.n_symbols = 1;
    search.clusters = spec_.single_clusters;
    single_ = load_or_design(spec_.single_pattern_path, search,
                             derive_seed(cfg.seed, Stream::pattern, 1), nullptr);
    single_frame_ = tile_pattern(single_, cfg.n_symbols);
    single_phi_ = build_measurement_matrix(single_, cfg.delay_taps);
  }
}

bool Experiment::needs_single() const {
  return std::any_of(spec_.schemes.begin(), spec_.schemes.end(),
                     [](const Scheme& s) { return s.single_symbol && !s.ideal; });
}

TrialOutcome Experiment::run_trial(int trial, double snr_db, bool with_ber,
                                   std::size_t snr_index) const {
  const auto& cfg = spec_.system;
  const auto t = static_cast<std::uint64_t>(trial);
  TrialOutcome out;
  try {
    ChannelRealization real = generate_channel(cfg, derive_seed(cfg.seed, Stream::support, t));
    const BemCoefficients true_fit = fit_coefficients(real, basis_);
    if (spec_.exact_bem) real = synthesize_exact_bem_channel(true_fit, basis_, cfg);
    const TapTrajectories truth = data_taps(real);

    const std::uint64_t noise_seed = derive_seed(derive_seed(cfg.seed, Stream::noise, t), Stream::noise, snr_index);
    const Link joint = make_link(joint_, real, snr_db, derive_seed(cfg.seed, Stream::data, 2 * t), noise_seed);
    std::optional<Link> single;
    if (needs_single()) {
      single = make_link(single_frame_, real, snr_db, derive_seed(cfg.seed, Stream::data, 2 * t + 1),
                         noise_seed);
    }

    for (const auto& scheme : spec_.schemes) {
      TapTrajectories taps;
      const Link* link = &joint;
      if (scheme.ideal) {
        taps = reconstruct_taps(true_fit, basis_);
      } else if (scheme.single_symbol) {
        link = &*single;
        const auto per = estimate_channel_per_symbol(
            single->rx, single_, single_phi_, basis_, cfg, scheme.recovery,
            scheme.smoothing ? Smoothing::single_symbol : Smoothing::none);
        for (const auto& e : per) taps.push_back(e.taps.front());
      } else {
        Smoothing mode = Smoothing::none;
        if (scheme.smoothing) mode = cfg.n_symbols >= 2 ? Smoothing::multi_symbol : Smoothing::single_symbol;
        taps = estimate_channel(joint.rx, joint_, joint_phi_, basis_, cfg, scheme.recovery, mode).taps;
      }
      out.nmse.push_back(nmse_linear(truth, taps));
      if (with_ber) {
        long bits = 0;
        const long errors = scheme.ideal ? true_channel_bit_errors(*link, real, &bits)
                                         : banded_bit_errors(*link, fit_coefficients(taps, basis_), &bits);
        out.bit_errors.push_back(errors);
        out.info_bits.push_back(bits);
        out.ber.push_back(bits > 0 ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0);
      }
    }
  } catch (const RankDeficientError& e) {
    out = TrialOutcome{true, e.what(), {}, {}, {}, {}};
  } catch (const SingularMatrixError& e) {
    out = TrialOutcome{true, e.what(), {}, {}, {}, {}};
  } catch (const std::domain_error& e) {
    out = TrialOutcome{true, e.what(), {}, {}, {}, {}};
  }
  return out;
}

PairedTrials Experiment::run_point(double snr_db, bool with_ber, std::size_t snr_index) const {
  PairedTrials result;
  result.snr_db = snr_db;
  result.schemes = spec_.schemes;
  result.trials.resize(spec_.trials);

  const int workers = std::min(spec_.jobs, spec_.trials);
  if (workers <= 1) {
    for (int t = 0; t < spec_.trials; ++t) result.trials[t] = run_trial(t, snr_db, with_ber, snr_index);
    return result;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next++; t < spec_.trials; t = next++) {
        try {
          result.trials[t] = run_trial(t, snr_db, with_ber, snr_index);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

CurvePoint summarize(const PairedTrials& trials, MetricKind kind, std::size_t scheme) {
  CurvePoint p;
  p.snr_db = trials.snr_db;
  p.skipped = trials.skipped();
  const auto v = trials.values(kind, scheme);
  p.trials = static_cast<int>(v.size());
  if (v.empty()) {
    p.metric = std::numeric_limits<double>::quiet_NaN();
    return p;
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double se = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
  if (kind == MetricKind::nmse) {
    p.metric = to_db(mean);
    p.std_error = mean > 0.0 ? 10.0 / std::log(10.0) * se / mean : 0.0;
  } else {
    p.metric = mean;
    p.std_error = se;
  }
  return p;
}

std::vector<Curve> Experiment::sweep(MetricKind kind) const {
  std::vector<Curve> curves(spec_.schemes.size());
  for (std::size_t s = 0; s < curves.size(); ++s) {
    curves[s].scheme = spec_.schemes[s];
    curves[s].kind = kind;
  }
  for (std::size_t i = 0; i < spec_.snr_grid.size(); ++i) {
    const auto point = run_point(spec_.snr_grid[i], kind == MetricKind::ber, i);
    for (std::size_t s = 0; s < curves.size(); ++s) curves[s].points.push_back(summarize(point, kind, s));
  }
  return curves;
}

PairedDifference paired_difference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_difference: length mismatch");
  PairedDifference d;
  d.n = static_cast<int>(a.size());
  if (d.n == 0) return d;
  for (std::size_t i = 0; i < a.size(); ++i) d.mean += a[i] - b[i];
  d.mean /= d.n;
  if (d.n > 1) {
    double var = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x = a[i] - b[i] - d.mean;
      var += x * x;
    }
    d.std_error = std::sqrt(var / (d.n - 1) / d.n);
  }
  return d;
}

void write_curve_csv(const Curve& curve, std::ostream& out) {
  out << "snr_db,metric,trials,stderr\n" << std::setprecision(10);
  for (const auto& p : curve.points) {
    out << p.snr_db << ',' << p.metric << ',' << p.trials << ',' << p.std_error << '\n';
  }
}

void write_plot_script(MetricKind kind, const std::vector<std::string>& files,
                       const std::vector<std::string>& titles, std::ostream& out) {
  out << "set datafile separator ','\n";
  out << "set xlabel 'SNR (dB)'\n";
  if (kind == MetricKind::nmse) {
    out << "set ylabel 'NMSE (dB)'\n";
  } else {
    out << "set ylabel 'coded BER'\nset logscale y\n";
  }
  out << "set grid\nset key top right\n";
  out << "plot";
  for (std::size_t i = 0; i < files.size(); ++i) {
    out << (i ? ", \\\n     " : " ") << '\'' << files[i] << "' skip 1 using 1:2 with linespoints title '"
        << (i < titles.size() ? titles[i] : files[i]) << '\'';
  }
  out << '\n';
}

std::string file_stem(const Scheme& scheme) {
  std::string s = scheme.name();
  for (auto& c : s) {
    if (c == '+' || c == '-') c = '_';
  }
  return s;
}

}  // namespace sdcs

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdcs/bem.hpp"
#include "sdcs/dschan.hpp"
#include "sdcs/pilots.hpp"
#include "sdcs/recovery.hpp"
#include "sdcs/types.hpp"

namespace sdcs {

/// Linear NMSE ||truth - est||^2 / ||truth||^2 over every symbol.
/// Throws std::domain_error for an all-zero truth, std::invalid_argument on shape mismatch.
double nmse_linear(const TapTrajectories& truth, const TapTrajectories& estimate);
/// 10 log10 of nmse_linear, floored at kDbFloor.
double nmse_db(const TapTrajectories& truth, const TapTrajectories& estimate);
double to_db(double linear);

/// One estimator configuration. Tokens: sdcs | dcs | cs, optional "+smooth",
/// optional "-single" (one-symbol pattern in every symbol). "ideal" reports the
/// BEM fit of the true taps as its NMSE and equalizes with the complete true
/// frequency-domain matrix. Aliases: joint = sdcs+smooth, single = sdcs-single+smooth.
struct Scheme {
  Recovery recovery = Recovery::bsomp;
  bool smoothing = false;
  bool single_symbol = false;
  bool ideal = false;

  std::string name() const;
  bool operator==(const Scheme&) const = default;
};

Scheme parse_scheme(const std::string& text);

enum class MetricKind { nmse, ber };

const char* to_string(MetricKind kind);

struct ExperimentSpec {
  SystemConfig system;
  std::vector<double> snr_grid{0, 5, 10, 15, 20, 25, 30, 35, 40};
  int trials = 200;
  std::vector<Scheme> schemes;
  int joint_clusters = 60;   // G for J-symbol patterns
  int single_clusters = 24;  // G for the one-symbol pattern
  std::string joint_pattern_path;   // empty: optimize
  std::string single_pattern_path;  // empty: optimize
  int pattern_iterations = 1000;
  int pattern_restarts = 8;
  bool exact_bem = false;  // replace each channel by its CE-BEM fit
  int jobs = 1;

  void validate() const;
};

/// The six NMSE curves: three recoveries, smoothing off and on.
std::vector<Scheme> default_nmse_schemes();
/// joint, single, ideal.
std::vector<Scheme> default_ber_schemes();

struct TrialOutcome {
  bool skipped = false;
  std::string reason;
  std::vector<double> nmse;        // linear, per scheme
  std::vector<double> ber;         // per scheme (empty unless BER requested)
  std::vector<long> bit_errors;
  std::vector<long> info_bits;
};

struct PairedTrials {
  double snr_db = 0.0;
  std::vector<Scheme> schemes;
  std::vector<TrialOutcome> trials;

  int skipped() const;
  /// Values of one metric for scheme `s` over non-skipped trials.
  std::vector<double> values(MetricKind kind, std::size_t s) const;
};

struct CurvePoint {
  double snr_db = 0.0;
  double metric = 0.0;  // NMSE in dB or BER
  int trials = 0;       // trials that contributed
  double std_error = 0.0;  // standard error, dB for NMSE (delta method), absolute for BER
  int skipped = 0;
};

struct Curve {
  Scheme scheme;
  MetricKind kind = MetricKind::nmse;
  std::vector<CurvePoint> points;
};

/// Owns the patterns, measurement matrices, and basis shared by every trial.
class Experiment {
 public:
  explicit Experiment(ExperimentSpec spec);

  const ExperimentSpec& spec() const { return spec_; }
  const PilotPattern& joint_pattern() const { return joint_; }
  const PilotPattern& single_pattern() const { return single_; }
  const MeasurementMatrix& joint_phi() const { return joint_phi_; }
  const MeasurementMatrix& single_phi() const { return single_phi_; }
  const BemBasis& basis() const { return basis_; }
  double joint_coherence() const { return joint_mu_; }

  /// Runs every trial at one SNR. Channel, data seed and noise seed depend only on
  /// (seed, trial, snr index), so every scheme sees the same randomness.
  PairedTrials run_point(double snr_db, bool with_ber, std::size_t snr_index = 0) const;

  std::vector<Curve> sweep(MetricKind kind) const;

  TrialOutcome run_trial(int trial, double snr_db, bool with_ber, std::size_t snr_index) const;

 private:
  bool needs_single() const;

  ExperimentSpec spec_;
  BemBasis basis_;
  PilotPattern joint_;
  PilotPattern single_;      // one symbol
  PilotPattern single_frame_;// tiled over J
  MeasurementMatrix joint_phi_;
  MeasurementMatrix single_phi_;
  double joint_mu_ = 0.0;
};

CurvePoint summarize(const PairedTrials& trials, MetricKind kind, std::size_t scheme);

/// Paired one-sided comparison: mean(a - b) and its standard error.
struct PairedDifference {
  double mean = 0.0;
  double std_error = 0.0;
  int n = 0;
  /// True when mean + z se <= 0, i.e. a <= b at the one-sided level set by z.
  bool a_not_worse(double z = 1.645) const { return mean + z * std_error <= 0.0; }
};

PairedDifference paired_difference(const std::vector<double>& a, const std::vector<double>& b);

/// CSV: snr_db,metric,trials,stderr
void write_curve_csv(const Curve& curve, std::ostream& out);
/// gnuplot commands plotting every CSV in `files` with `titles`.
void write_plot_script(MetricKind kind, const std::vector<std::string>& files,
                       const std::vector<std::string>& titles, std::ostream& out);

/// File-name-safe scheme label ("sdcs+smooth" -> "sdcs_smooth").
std::string file_stem(const Scheme& scheme);

}  // namespace sdcs

#include "sdcs/validation.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <sstream>

#include "sdcs/bem.hpp"
#include "sdcs/dschan.hpp"
#include "sdcs/eval.hpp"
#include "sdcs/ofdm.hpp"
#include "sdcs/pilots.hpp"
#include "sdcs/recovery.hpp"
#include "sdcs/rng.hpp"
#include "sdcs/smooth.hpp"

namespace sdcs {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = cplx(n(rng), n(rng));
  }
  return m;
}

ValidationCheck decoupling(std::uint64_t seed) {
  SystemConfig cfg;
  const auto basis = build_basis(cfg.n_subcarriers, cfg.bem_order);
  const auto pattern = equispaced_pattern(cfg.n_subcarriers, cfg.n_symbols, cfg.bem_order, 60,
                                          default_pilot_amplitude(cfg.bem_order));
  const auto phi = build_measurement_matrix(pattern, cfg.delay_taps);
  double worst = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const auto fit = fit_coefficients(generate_channel(cfg, derive_seed(seed, Stream::support, trial)), basis);
    const auto real = synthesize_exact_bem_channel(fit, basis, cfg);
    TxFrame tx = blank_frame(cfg.n_symbols, cfg.n_subcarriers);
    embed_pilots(tx, pattern);
    auto data_rng = make_rng(seed, Stream::data, trial);
    fill_random_data(tx, data_rng);
    auto noise_rng = make_rng(seed, Stream::noise, trial);
    const auto rx = transmit(tx, real, kNoiseless, noise_rng);
    const CMatrix expected = phi.phi * sparse_from_coefficients(fit);
    worst = std::max(worst, (decouple(rx, pattern).values - expected).norm() / expected.norm());
  }
  return {"decoupling-exactness", worst <= 1e-9, "max relative error " + fmt(worst)};
}

ValidationCheck bsomp_matches_somp(std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::coefficients, 100);
  for (int trial = 0; trial < 20; ++trial) {
    MeasurementMatrix phi;
    phi.phi = random_matrix(24, 16, rng);
    phi.n_symbols = 1;
    phi.delay_taps = 16;
    CMatrix s = CMatrix::Zero(16, 3);
    for (int k = 0; k < 3; ++k) s.row((trial + 5 * k) % 16) = random_matrix(1, 3, rng);
    const DecoupledObservations y{phi.phi * s};
    const auto a = bsomp(y, phi, 3);
    const auto b = somp(y, phi, 3);
    if (a.selected != b.selected || a.s != b.s) {
      return {"bsomp-equals-somp", false, "instance " + std::to_string(trial) + " differs"};
    }
  }
  return {"bsomp-equals-somp", true, "20 instances bit-identical"};
}

ValidationCheck basis_orthogonality() {
  double worst = 0.0;
  for (int n : {16, 64, 512}) {
    for (int q : {1, 3, 5}) {
      const auto b = build_basis(n, q);
      const CMatrix gram = b.vectors.adjoint() * b.vectors;
      const CMatrix ref = CMatrix::Identity(q, q) * static_cast<double>(n);
      worst = std::max(worst, (gram - ref).cwiseAbs().maxCoeff() / n);
    }
  }
  return {"basis-orthogonality", worst <= 1e-12, "max deviation " + fmt(worst)};
}

ValidationCheck ramp_slopes(std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::coefficients, 200);
  std::normal_distribution<double> n(0.0, 1.0);
  const int N = 64, L = 4, cp = 8, J = 3;
  const cplx a(n(rng) * 1e-2, n(rng) * 1e-2), b(n(rng), n(rng));
  double worst = 0.0;

  CMatrix one(N, L);
  for (int p = 0; p < N; ++p) one.row(p).setConstant(a * static_cast<double>(p) + b);
  const CMatrix s1 = smooth_single_symbol(one);
  for (int p = 0; p < N; ++p) {
    worst = std::max(worst, std::abs(s1(p, 0) - (a * (p + 0.5) + b)));
  }

  TapTrajectories frame(J, CMatrix(N, L));
  for (int j = 0; j < J; ++j) {
    for (int p = 0; p < N; ++p) {
      const double g = j * (N + cp) + cp + p;
      frame[j].row(p).setConstant(a * g + b);
    }
  }
  const auto sm = smooth_multi_symbol(frame, cp);
  for (int j = 0; j < J; ++j) {
    for (int p = 0; p < N; ++p) {
      const double g = j * (N + cp) + cp + p;
      worst = std::max(worst, (sm[j].row(p).array() - (a * (g + 0.5) + b)).abs().maxCoeff());
    }
  }
  return {"ramp-slope-exactness", worst <= 1e-10, "max deviation " + fmt(worst)};
}

ValidationCheck nmse_identities(std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::coefficients, 300);
  TapTrajectories h{random_matrix(32, 4, rng), random_matrix(32, 4, rng)};
  TapTrajectories zero{CMatrix::Zero(32, 4), CMatrix::Zero(32, 4)};
  double worst = std::abs(nmse_db(h, h) - kDbFloor);
  worst = std::max(worst, std::abs(nmse_db(h, zero)));
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    TapTrajectories e = h;
    for (auto& m : e) m *= 1.0 + eps;
    worst = std::max(worst, std::abs(nmse_db(h, e) - 20.0 * std::log10(eps)));
  }
  return {"nmse-identities", worst <= 1e-9, "max deviation " + fmt(worst) + " dB"};
}

ValidationCheck residual_monotonicity(std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::coefficients, 400);
  for (int trial = 0; trial < 10; ++trial) {
    MeasurementMatrix phi;
    phi.phi = random_matrix(30, 40, rng);
    phi.n_symbols = 2;
    phi.delay_taps = 20;
    const DecoupledObservations y{random_matrix(30, 3, rng)};
    const auto est = bsomp(y, phi, 8);
    for (std::size_t i = 1; i < est.residual_norms.size(); ++i) {
      if (est.residual_norms[i] > est.residual_norms[i - 1] * (1.0 + 1e-12)) {
        return {"residual-monotonicity", false,
                "residual rose at iteration " + std::to_string(i) + " of instance " + std::to_string(trial)};
      }
    }
  }
  return {"residual-monotonicity", true, "10 instances non-increasing"};
}

ValidationCheck pattern_file(const std::string& path) {
  try {
    const auto p = read_pattern(path);
    const double mu = pattern_coherence(p.values, p.n_subcarriers, p.n_symbols, SystemConfig{}.delay_taps);
    if (!std::isfinite(mu)) return {"pattern-file", false, path + ": a symbol has no value pilot"};
    return {"pattern-file", true, path + ": " + std::to_string(p.clusters()) + " clusters, mu " + fmt(mu)};
  } catch (const std::exception& e) {
    return {"pattern-file", false, e.what()};
  }
}

template <class F>
ValidationCheck guarded(const char* name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

std::vector<ValidationCheck> run_validation_suite(std::uint64_t seed, const std::string& pattern_path) {
  std::vector<ValidationCheck> out;
  out.push_back(guarded("decoupling-exactness", [&] { return decoupling(seed); }));
  out.push_back(guarded("bsomp-equals-somp", [&] { return bsomp_matches_somp(seed); }));
  out.push_back(guarded("basis-orthogonality", [] { return basis_orthogonality(); }));
  out.push_back(guarded("ramp-slope-exactness", [&] { return ramp_slopes(seed); }));
  out.push_back(guarded("nmse-identities", [&] { return nmse_identities(seed); }));
  out.push_back(guarded("residual-monotonicity", [&] { return residual_monotonicity(seed); }));
  if (!pattern_path.empty()) out.push_back(pattern_file(pattern_path));
  return out;
}

}  // namespace sdcs

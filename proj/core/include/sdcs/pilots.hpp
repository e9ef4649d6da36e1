#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdcs/ofdm.hpp"
#include "sdcs/types.hpp"

namespace sdcs {

/// Guard-protected pilot clusters on the aggregate J N subcarrier grid.
/// Each value pilot p is flanked by Q-1 zero guards on either side; the Q
/// shifted subsets P_q = P_val + (q - (Q-1)/2) address the observations
/// in which only the q-th basis tone of the channel is seen.
struct PilotPattern {
  int n_subcarriers = 0;
  int n_symbols = 0;
  int order = 0;
  cplx pilot_value{1.0, 0.0};
  std::vector<int> values;                // sorted aggregate indices
  std::vector<int> guards;                // sorted
  std::vector<std::vector<int>> subsets;  // Q subsets, each aligned with `values`

  int clusters() const { return static_cast<int>(values.size()); }
  int total_pilots() const { return (2 * order - 1) * clusters(); }
  int symbol_of(int g) const { return values[g] / n_subcarriers; }
  std::vector<int> per_symbol_counts() const;
};

/// Amplitude giving each cluster the same average power as the data it displaces:
/// sqrt(2Q - 1) for unit-power data.
double default_pilot_amplitude(int order);

/// Largest number of clusters that fit in one symbol.
int max_clusters_per_symbol(int n_subcarriers, int order);

/// Validates spacing |p_i - p_j| >= 2Q-1 and confinement mod(p, N) in [Q-1, N-Q],
/// then derives guards and subsets. Throws std::invalid_argument naming the
/// offending index or pair.
PilotPattern build_pattern(std::vector<int> values, int order, int n_symbols, int n_subcarriers,
                           cplx pilot_value);

/// Phi = Psi [I_J (x) V_L]_{P_val} with column l J + j holding tap l of symbol j,
/// so block l (G x J) is contiguous.
struct MeasurementMatrix {
  CMatrix phi;
  int n_symbols = 0;
  int delay_taps = 0;

  int rows() const { return static_cast<int>(phi.rows()); }
  auto block(int l) const { return phi.middleCols(static_cast<Eigen::Index>(l) * n_symbols, n_symbols); }
};

/// Throws std::invalid_argument if some symbol carries no value pilot.
MeasurementMatrix build_measurement_matrix(const PilotPattern& pattern, int delay_taps);

/// max_{i != j} |<m_i, m_j>| / (|m_i| |m_j|). Throws on zero columns or < 2 columns.
double mutual_coherence(const CMatrix& m);

/// mu(Phi) evaluated from the pilot geometry alone (constant pilot amplitude):
/// max over symbols and tap lags d of |sum_g w^{r_g d}| / G_j. +inf if a symbol is empty.
double pattern_coherence(const std::vector<int>& values, int n_subcarriers, int n_symbols,
                         int delay_taps);

/// Near-even split of clusters over symbols, each symbol's clusters spread
/// uniformly over [Q-1, N-Q].
PilotPattern equispaced_pattern(int n_subcarriers, int n_symbols, int order, int clusters,
                                cplx pilot_value);

struct PatternSearch {
  int n_subcarriers = 512;
  int n_symbols = 3;
  int order = 3;
  int clusters = 60;
  int delay_taps = 64;
  int iterations = 1000;
  int restarts = 8;
  int jobs = 1;
  double amplitude = 0.0;  // 0 selects default_pilot_amplitude(order)
};

struct PatternSearchResult {
  PilotPattern pattern;
  double coherence = 0.0;
  double baseline_coherence = 0.0;  // equispaced pattern
  int best_restart = 0;
};

/// Called with the current placement after every accepted move.
using PatternObserver = std::function<void(const std::vector<int>& values, double coherence)>;

/// Randomized local search over value-pilot placements minimizing mu(Phi).
/// Restart 0 starts from the equispaced pattern; the others from random feasible
/// placements. Each iteration relocates one value pilot to a random feasible
/// position in the same symbol and keeps the move if mu does not increase. Throws
/// std::invalid_argument when the clusters cannot be placed.
PatternSearchResult optimize_pattern(const PatternSearch& search, std::uint64_t seed,
                                     const PatternObserver& observer = {});

/// Repeats a one-symbol pattern in each of n_symbols symbols.
PilotPattern tile_pattern(const PilotPattern& symbol_pattern, int n_symbols);

/// Writes pilot_value on value pilots and zeros on guards; clears their data flags.
void embed_pilots(TxFrame& frame, const PilotPattern& pattern);

void write_pattern(const PilotPattern& pattern, std::ostream& out);
void write_pattern(const PilotPattern& pattern, const std::string& path);
PilotPattern read_pattern(std::istream& in);
PilotPattern read_pattern(const std::string& path);

}  // namespace sdcs

#include "sdcs/pilots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sdcs/rng.hpp"

namespace sdcs {

namespace {

bool confined(int index, int n_subcarriers, int order) {
  const int local = index % n_subcarriers;
  return local >= order - 1 && local <= n_subcarriers - order;
}

// unit roots w^k = exp(-j 2 pi k / N)
std::vector<cplx> unit_roots(int n) {
  std::vector<cplx> roots(n);
  for (int k = 0; k < n; ++k) roots[k] = std::polar(1.0, -2.0 * kPi * k / n);
  return roots;
}

struct SearchGrid {
  int n_subcarriers;
  int n_symbols;
  int order;
  int spacing() const { return 2 * order - 1; }
  int size() const { return n_symbols * n_subcarriers; }
};

// Positions where pilot `moving` could go given the others.
std::vector<int> feasible_moves(const std::vector<int>& values, std::size_t moving,
                                const SearchGrid& grid) {
  std::vector<char> blocked(grid.size(), 0);
  const int reach = grid.spacing() - 1;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k == moving) continue;
    const int lo = std::max(0, values[k] - reach);
    const int hi = std::min(grid.size() - 1, values[k] + reach);
    for (int a = lo; a <= hi; ++a) blocked[a] = 1;
  }
  // Moves stay inside the pilot's own symbol so the per-symbol split is kept.
  const int base = values[moving] / grid.n_subcarriers * grid.n_subcarriers;
  std::vector<int> free;
  for (int a = base; a < base + grid.n_subcarriers; ++a) {
    if (!blocked[a] && a != values[moving] && confined(a, grid.n_subcarriers, grid.order)) {
      free.push_back(a);
    }
  }
  return free;
}

std::vector<int> even_counts(int clusters, int n_symbols) {
  std::vector<int> counts(n_symbols, clusters / n_symbols);
  for (int j = 0; j < clusters % n_symbols; ++j) ++counts[j];
  return counts;
}

// Uniformly random placement of `count` clusters inside one symbol.
void place_random(int count, int symbol, const SearchGrid& grid, std::mt19937_64& rng,
                  std::vector<int>& out) {
  if (count == 0) return;
  const int span = grid.n_subcarriers - 2 * grid.order + 1;  // last - first admissible offset
  const int slack = span - (count - 1) * grid.spacing();
  std::uniform_int_distribution<int> draw(0, slack);
  std::vector<int> offsets(count);
  for (auto& u : offsets) u = draw(rng);
  std::sort(offsets.begin(), offsets.end());
  for (int i = 0; i < count; ++i) {
    out.push_back(symbol * grid.n_subcarriers + (grid.order - 1) + offsets[i] + i * grid.spacing());
  }
}

struct RestartOutcome {
  std::vector<int> values;
  double coherence = std::numeric_limits<double>::infinity();
};

RestartOutcome local_search(std::vector<int> values, const PatternSearch& search,
                            std::mt19937_64& rng, const PatternObserver& observer) {
  const SearchGrid grid{search.n_subcarriers, search.n_symbols, search.order};
  RestartOutcome out;
  out.coherence =
      pattern_coherence(values, search.n_subcarriers, search.n_symbols, search.delay_taps);
  for (int it = 0; it < search.iterations; ++it) {
    std::uniform_int_distribution<std::size_t> which(0, values.size() - 1);
    const std::size_t moving = which(rng);
    const auto moves = feasible_moves(values, moving, grid);
    if (moves.empty()) continue;
    std::uniform_int_distribution<std::size_t> where(0, moves.size() - 1);
    const int previous = values[moving];
    values[moving] = moves[where(rng)];
    const double mu =
        pattern_coherence(values, search.n_subcarriers, search.n_symbols, search.delay_taps);
    if (mu <= out.coherence) {
      out.coherence = mu;
      if (observer) {
        auto sorted = values;
        std::sort(sorted.begin(), sorted.end());
        observer(sorted, mu);
      }
    } else {
      values[moving] = previous;
    }
  }
  std::sort(values.begin(), values.end());
  out.values = std::move(values);
  return out;
}

}  // namespace

std::vector<int> PilotPattern::per_symbol_counts() const {
  std::vector<int> counts(n_symbols, 0);
  for (int g = 0; g < clusters(); ++g) ++counts[symbol_of(g)];
  return counts;
}

double default_pilot_amplitude(int order) { return std::sqrt(2.0 * order - 1.0); }

int max_clusters_per_symbol(int n_subcarriers, int order) {
  const int span = n_subcarriers - 2 * order + 1;
  if (span < 0) return 0;
  return span / (2 * order - 1) + 1;
}

PilotPattern build_pattern(std::vector<int> values, int order, int n_symbols, int n_subcarriers,
                           cplx pilot_value) {
  if (order < 1 || order % 2 == 0) throw std::invalid_argument("build_pattern: order must be odd");
  if (n_symbols < 1 || n_subcarriers < 1) throw std::invalid_argument("build_pattern: empty grid");
  std::sort(values.begin(), values.end());
  const int grid = n_symbols * n_subcarriers;
  const int spacing = 2 * order - 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int p = values[i];
    if (p < 0 || p >= grid) {
      throw std::invalid_argument("build_pattern: index " + std::to_string(p) + " outside [0, " +
                                  std::to_string(grid - 1) + "]");
    }
    if (!confined(p, n_subcarriers, order)) {
      throw std::invalid_argument("build_pattern: cluster around " + std::to_string(p) +
                                  " crosses a symbol boundary");
    }
    if (i > 0 && p - values[i - 1] < spacing) {
      throw std::invalid_argument("build_pattern: pilots " + std::to_string(values[i - 1]) +
                                  " and " + std::to_string(p) + " closer than " +
                                  std::to_string(spacing));
    }
  }
  PilotPattern pattern;
  pattern.n_subcarriers = n_subcarriers;
  pattern.n_symbols = n_symbols;
  pattern.order = order;
  pattern.pilot_value = pilot_value;
  pattern.values = std::move(values);
  for (int p : pattern.values) {
    for (int d = 1; d < order; ++d) {
      pattern.guards.push_back(p - d);
      pattern.guards.push_back(p + d);
    }
  }
  std::sort(pattern.guards.begin(), pattern.guards.end());
  const int half = (order - 1) / 2;
  pattern.subsets.resize(order);
  for (int q = 0; q < order; ++q) {
    for (int p : pattern.values) pattern.subsets[q].push_back(p + q - half);
  }
  return pattern;
}

MeasurementMatrix build_measurement_matrix(const PilotPattern& pattern, int delay_taps) {
  const int N = pattern.n_subcarriers;
  const int J = pattern.n_symbols;
  const auto counts = pattern.per_symbol_counts();
  for (int j = 0; j < J; ++j) {
    if (counts[j] == 0) {
      throw std::invalid_argument("build_measurement_matrix: symbol " + std::to_string(j) +
                                  " carries no value pilot");
    }
  }
  const auto roots = unit_roots(N);
  MeasurementMatrix m;
  m.n_symbols = J;
  m.delay_taps = delay_taps;
  m.phi = CMatrix::Zero(pattern.clusters(), static_cast<Eigen::Index>(J) * delay_taps);
  for (int g = 0; g < pattern.clusters(); ++g) {
    const int j = pattern.symbol_of(g);
    const long long r = pattern.values[g] % N;
    for (int l = 0; l < delay_taps; ++l) {
      m.phi(g, static_cast<Eigen::Index>(l) * J + j) = pattern.pilot_value * roots[(r * l) % N];
    }
  }
  return m;
}

double mutual_coherence(const CMatrix& m) {
  if (m.cols() < 2) throw std::invalid_argument("mutual_coherence: need at least two columns");
  const RVector norms = m.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (norms(i) == 0.0) {
      throw std::invalid_argument("mutual_coherence: column " + std::to_string(i) + " is zero");
    }
  }
  const CMatrix gram = m.adjoint() * m;
  double mu = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < gram.cols(); ++j) {
      mu = std::max(mu, std::abs(gram(i, j)) / (norms(i) * norms(j)));
    }
  }
  return mu;
}

double pattern_coherence(const std::vector<int>& values, int n_subcarriers, int n_symbols,
                         int delay_taps) {
  const int N = n_subcarriers;
  std::vector<std::vector<int>> rows(n_symbols);
  for (int p : values) rows[p / N].push_back(p % N);
  static thread_local std::vector<cplx> roots;
  if (static_cast<int>(roots.size()) != N) roots = unit_roots(N);
  double mu = 0.0;
  bool any_pair = false;
  for (const auto& symbol_rows : rows) {
    if (symbol_rows.empty()) return std::numeric_limits<double>::infinity();
    const double count = static_cast<double>(symbol_rows.size());
    for (int d = 1; d < delay_taps; ++d) {
      cplx sum{0.0, 0.0};
      for (int r : symbol_rows) sum += roots[(static_cast<long long>(r) * d) % N];
      mu = std::max(mu, std::abs(sum) / count);
      any_pair = true;
    }
  }
  if (!any_pair && n_symbols < 2) {
    throw std::invalid_argument("pattern_coherence: need at least two columns");
  }
  return mu;
}

PilotPattern equispaced_pattern(int n_subcarriers, int n_symbols, int order, int clusters,
                                cplx pilot_value) {
  const int cap = max_clusters_per_symbol(n_subcarriers, order);
  if (clusters < 1 || clusters > cap * n_symbols) {
    throw std::invalid_argument("equispaced_pattern: cannot place " + std::to_string(clusters) +
                                " clusters (capacity " + std::to_string(cap * n_symbols) + ")");
  }
  const int first = order - 1;
  const int span = n_subcarriers - 2 * order + 1;
  std::vector<int> values;
  const auto counts = even_counts(clusters, n_symbols);
  for (int j = 0; j < n_symbols; ++j) {
    const int g = counts[j];
    if (g == 1) values.push_back(j * n_subcarriers + first + span / 2);
    for (int i = 0; g > 1 && i < g; ++i) {
      values.push_back(j * n_subcarriers + first +
                       static_cast<int>((static_cast<long long>(i) * span) / (g - 1)));
    }
  }
  return build_pattern(std::move(values), order, n_symbols, n_subcarriers, pilot_value);
}

PatternSearchResult optimize_pattern(const PatternSearch& search, std::uint64_t seed,
                                     const PatternObserver& observer) {
  const int cap = max_clusters_per_symbol(search.n_subcarriers, search.order);
  if (search.clusters > cap * search.n_symbols) {
    throw std::invalid_argument("optimize_pattern: " + std::to_string(search.clusters) +
                                " clusters exceed the grid capacity " +
                                std::to_string(cap * search.n_symbols));
  }
  if (search.clusters < search.n_symbols) {
    throw std::invalid_argument("optimize_pattern: every symbol needs at least one cluster");
  }
  if (search.restarts < 1 || search.iterations < 0) {
    throw std::invalid_argument("optimize_pattern: restarts >= 1 and iterations >= 0 required");
  }
  const double amplitude =
      search.amplitude > 0.0 ? search.amplitude : default_pilot_amplitude(search.order);
  const SearchGrid grid{search.n_subcarriers, search.n_symbols, search.order};

  const PilotPattern baseline = equispaced_pattern(search.n_subcarriers, search.n_symbols,
                                                   search.order, search.clusters, amplitude);

  std::vector<RestartOutcome> outcomes(search.restarts);
  auto run = [&](int r) {
    auto rng = make_rng(seed, Stream::pattern, static_cast<std::uint64_t>(r));
    std::vector<int> start;
    if (r == 0) {
      start = baseline.values;
    } else {
      const auto counts = even_counts(search.clusters, search.n_symbols);
      // random assignment of the remainder clusters to symbols
      std::vector<int> order(search.n_symbols);
      for (int j = 0; j < search.n_symbols; ++j) order[j] = j;
      for (int j = search.n_symbols - 1; j > 0; --j) {
        std::uniform_int_distribution<int> pick(0, j);
        std::swap(order[j], order[pick(rng)]);
      }
      for (int j = 0; j < search.n_symbols; ++j) place_random(counts[order[j]], j, grid, rng, start);
    }
    outcomes[r] = local_search(std::move(start), search, rng, observer);
  };

  const int workers = observer ? 1 : std::max(1, std::min(search.jobs, search.restarts));
  if (workers == 1) {
    for (int r = 0; r < search.restarts; ++r) run(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int r = w; r < search.restarts; r += workers) run(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  PatternSearchResult result;
  result.baseline_coherence =
      pattern_coherence(baseline.values, search.n_subcarriers, search.n_symbols, search.delay_taps);
  int best = 0;
  for (int r = 1; r < search.restarts; ++r) {
    if (outcomes[r].coherence < outcomes[best].coherence) best = r;
  }
  result.best_restart = best;
  result.coherence = outcomes[best].coherence;
  result.pattern = build_pattern(outcomes[best].values, search.order, search.n_symbols,
                                 search.n_subcarriers, amplitude);
  return result;
}

PilotPattern tile_pattern(const PilotPattern& symbol_pattern, int n_symbols) {
  if (symbol_pattern.n_symbols != 1) throw std::invalid_argument("tile_pattern: needs a one-symbol pattern");
  std::vector<int> values;
  for (int j = 0; j < n_symbols; ++j) {
    for (int p : symbol_pattern.values) values.push_back(j * symbol_pattern.n_subcarriers + p);
  }
  return build_pattern(std::move(values), symbol_pattern.order, n_symbols,
                       symbol_pattern.n_subcarriers, symbol_pattern.pilot_value);
}

void embed_pilots(TxFrame& frame, const PilotPattern& pattern) {
  if (frame.n_symbols() != pattern.n_symbols || frame.n_subcarriers() != pattern.n_subcarriers) {
    throw std::invalid_argument("embed_pilots: frame and pattern dimensions differ");
  }
  for (int p : pattern.values) {
    frame.at(p) = pattern.pilot_value;
    frame.data_mask[p] = false;
  }
  for (int p : pattern.guards) {
    frame.at(p) = 0.0;
    frame.data_mask[p] = false;
  }
}

void write_pattern(const PilotPattern& pattern, std::ostream& out) {
  out << "# pilot pattern: header then one value-pilot index per line\n";
  out << "N " << pattern.n_subcarriers << '\n';
  out << "J " << pattern.n_symbols << '\n';
  out << "Q " << pattern.order << '\n';
  out << "G " << pattern.clusters() << '\n';
  out << "amplitude " << std::setprecision(17) << std::abs(pattern.pilot_value) << '\n';
  for (int p : pattern.values) out << p << '\n';
}

void write_pattern(const PilotPattern& pattern, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_pattern(pattern, out);
}

PilotPattern read_pattern(std::istream& in) {
  int n = -1, j = -1, q = -1, g = -1;
  double amplitude = -1.0;
  std::vector<int> values;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("pattern file line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string head;
    fields >> head;
    auto read_int = [&](int& target) {
      if (!(fields >> target)) fail("malformed value for " + head);
    };
    if (head == "N") read_int(n);
    else if (head == "J") read_int(j);
    else if (head == "Q") read_int(q);
    else if (head == "G") read_int(g);
    else if (head == "amplitude") {
      if (!(fields >> amplitude) || !(amplitude > 0.0)) fail("amplitude must be positive");
    } else {
      std::size_t used = 0;
      int value = 0;
      try {
        value = std::stoi(head, &used);
      } catch (const std::exception&) {
        fail("unexpected token '" + head + "'");
      }
      if (used != head.size()) fail("unexpected token '" + head + "'");
      values.push_back(value);
    }
    std::string extra;
    if (fields >> extra) fail("trailing content '" + extra + "'");
  }
  if (n < 1 || j < 1 || q < 1 || g < 0 || amplitude <= 0.0) fail("incomplete header");
  if (static_cast<int>(values.size()) != g) {
    fail("header declares G = " + std::to_string(g) + " but " + std::to_string(values.size()) +
         " indices follow");
  }
  try {
    return build_pattern(std::move(values), q, j, n, cplx{amplitude, 0.0});
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("pattern file: ") + e.what());
  }
}

PilotPattern read_pattern(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_pattern(in);
}

}  // namespace sdcs

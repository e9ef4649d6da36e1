#pragma once

#include "sdcs/types.hpp"

namespace sdcs {

/// Piecewise-linear smoothing of one symbol's taps (N x L, N even).
/// Per tap: half-symbol means ave1, ave2 anchored at n = N/4 - 1 and 3N/4 - 1,
/// slope (ave2 - ave1) / (N/2), output (n + 1 - N/4) slope + ave1.
CMatrix smooth_single_symbol(const CMatrix& taps);

/// Multi-symbol variant. Symbol means are anchored at local n = N/2 - 1 and
/// joined by slopes across the (N + L_cp)-sample symbol pitch; interior
/// symbols average the reconstructions from both neighbouring slopes, edge
/// symbols use the single slope available. Requires at least two symbols.
TapTrajectories smooth_multi_symbol(const TapTrajectories& taps, int cp_length);

}  // namespace sdcs

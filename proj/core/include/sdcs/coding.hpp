#pragma once

#include <cstdint>
#include <span>

#include "sdcs/ofdm.hpp"

namespace sdcs {

// Rate-1/2 feedforward convolutional code, constraint length 7,
// generators 133 and 171 (octal). Blocks are zero-terminated.
inline constexpr int kConstraintLength = 7;
inline constexpr int kTailBits = kConstraintLength - 1;

/// Output has 2 (n + 6) bits: two per input bit plus the flushing tail.
Bits conv_encode(std::span<const std::uint8_t> bits);

/// Hard-decision Viterbi over a zero-terminated block; returns (size/2 - 6) bits.
Bits viterbi_decode(std::span<const std::uint8_t> coded);

/// Input length that fills exactly `coded_bits` channel bits (>= 0).
int info_bits_for(int coded_bits);

}  // namespace sdcs

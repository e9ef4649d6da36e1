#include "sdcs/coding.hpp"

#include <array>
#include <bit>
#include <limits>
#include <stdexcept>

namespace sdcs {

namespace {

constexpr unsigned kG0 = 0133;
constexpr unsigned kG1 = 0171;
constexpr int kStates = 1 << kTailBits;

// reg holds the newest bit in bit 6 and the state (previous six bits) below it.
inline unsigned parity(unsigned x) { return static_cast<unsigned>(std::popcount(x) & 1); }

struct Trellis {
  std::array<std::array<std::uint8_t, 2>, kStates * 2> out{};  // [state*2+bit] -> (c0, c1)
  Trellis() {
    for (int s = 0; s < kStates; ++s) {
      for (int b = 0; b < 2; ++b) {
        const unsigned reg = (static_cast<unsigned>(b) << kTailBits) | static_cast<unsigned>(s);
        out[s * 2 + b] = {static_cast<std::uint8_t>(parity(reg & kG0)),
                          static_cast<std::uint8_t>(parity(reg & kG1))};
      }
    }
  }
  static int next(int state, int bit) { return (state >> 1) | (bit << (kTailBits - 1)); }
};

const Trellis& trellis() {
  static const Trellis t;
  return t;
}

}  // namespace

int info_bits_for(int coded_bits) {
  const int n = coded_bits / 2 - kTailBits;
  return n > 0 ? n : 0;
}

Bits conv_encode(std::span<const std::uint8_t> bits) {
  const auto& t = trellis();
  Bits out;
  out.reserve(2 * (bits.size() + kTailBits));
  int state = 0;
  auto push = [&](int b) {
    const auto& o = t.out[state * 2 + b];
    out.push_back(o[0]);
    out.push_back(o[1]);
    state = Trellis::next(state, b);
  };
  for (auto b : bits) push(b & 1);
  for (int i = 0; i < kTailBits; ++i) push(0);
  return out;
}

Bits viterbi_decode(std::span<const std::uint8_t> coded) {
  if (coded.size() % 2 != 0) throw std::invalid_argument("viterbi_decode: odd coded length");
  const auto steps = coded.size() / 2;
  if (steps < static_cast<std::size_t>(kTailBits)) {
    throw std::invalid_argument("viterbi_decode: block shorter than the tail");
  }
  const auto& t = trellis();
  constexpr int kInf = std::numeric_limits<int>::max() / 2;
  std::array<int, kStates> metric;
  metric.fill(kInf);
  metric[0] = 0;
  // Survivors: the predecessor state for each (step, state); the decision bit is the
  // top bit of the state itself.
  std::vector<std::uint8_t> from(steps * kStates);
  std::array<int, kStates> next_metric;

  for (std::size_t k = 0; k < steps; ++k) {
    next_metric.fill(kInf);
    const std::uint8_t r0 = coded[2 * k] & 1, r1 = coded[2 * k + 1] & 1;
    const int max_bit = k + kTailBits >= steps ? 0 : 1;
    for (int s = 0; s < kStates; ++s) {
      if (metric[s] >= kInf) continue;
      for (int b = 0; b <= max_bit; ++b) {
        const auto& o = t.out[s * 2 + b];
        const int m = metric[s] + (o[0] != r0) + (o[1] != r1);
        const int ns = Trellis::next(s, b);
        // Strict < keeps the lower predecessor on ties.
        if (m < next_metric[ns]) {
          next_metric[ns] = m;
          from[k * kStates + ns] = static_cast<std::uint8_t>(s);
        }
      }
    }
    metric = next_metric;
  }

  Bits decoded(steps);
  int state = 0;
  for (std::size_t k = steps; k-- > 0;) {
    decoded[k] = static_cast<std::uint8_t>((state >> (kTailBits - 1)) & 1);
    state = from[k * kStates + state];
  }
  decoded.resize(steps - kTailBits);
  return decoded;
}

}  // namespace sdcs

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdcs {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite: decoupling exactness, BSOMP == SOMP at J = 1, basis
/// orthogonality, smoothing ramp slopes, NMSE identities, residual monotonicity.
/// A non-empty pattern_path adds a check that the file parses and is usable.
std::vector<ValidationCheck> run_validation_suite(std::uint64_t seed,
                                                  const std::string& pattern_path = {});

}  // namespace sdcs

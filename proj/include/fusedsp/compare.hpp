#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace fusedsp {

struct Equivalence {
  std::size_t reference_length = 0;
  std::size_t candidate_length = 0;
  double max_abs_diff = 0.0;
  double reference_peak = 0.0;
  /// max |candidate - reference| / max |reference|; 0 when both are silent.
  double relative_error = 0.0;

  bool same_length() const { return reference_length == candidate_length; }
  bool within(double tolerance) const { return same_length() && relative_error <= tolerance; }
};

Equivalence compare_signals(std::span<const float> reference, std::span<const float> candidate);

/// Allowed relative error between engines for a benchmark program: 1e-5 for
/// memoryless programs, 1e-3 for programs with recursive filters.
double engine_tolerance(const std::string& program);

}  // namespace fusedsp

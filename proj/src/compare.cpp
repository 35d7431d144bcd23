#include "fusedsp/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fusedsp {

Equivalence compare_signals(std::span<const float> reference, std::span<const float> candidate) {
  Equivalence e;
  e.reference_length = reference.size();
  e.candidate_length = candidate.size();
  const std::size_t n = std::min(reference.size(), candidate.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double r = reference[i];
    const double d = std::abs(static_cast<double>(candidate[i]) - r);
    e.max_abs_diff = std::isnan(d) ? std::numeric_limits<double>::infinity() : std::max(e.max_abs_diff, d);
    e.reference_peak = std::max(e.reference_peak, std::abs(r));
  }
  if (e.reference_peak > 0.0) {
    e.relative_error = e.max_abs_diff / e.reference_peak;
  } else if (e.max_abs_diff > 0.0) {
    e.relative_error = std::numeric_limits<double>::infinity();
  }
  return e;
}

double engine_tolerance(const std::string& program) {
  if (program == "butterworth" || program == "allpass" || program == "karplus") return 1e-3;
  return 1e-5;
}

}  // namespace fusedsp

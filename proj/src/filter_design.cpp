#include "fusedsp/filter_design.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace fusedsp {

namespace detail {

void check_cutoff(double fc) {
  if (!(fc > 0.0 && fc < 0.5)) {
    throw std::invalid_argument("cutoff must lie in (0, 0.5) cycles/sample, got " + std::to_string(fc));
  }
}

double butterworth_quality(int order, int m) {
  return 1.0 / (2.0 * std::sin((2 * m + 1) * std::numbers::pi / (2.0 * order)));
}

}  // namespace detail

using detail::check_cutoff;

FirstOrderParam<double> lowpass_param_from_cutoff(double fc, SlopeFirstOrder) {
  check_cutoff(fc);
  return FirstOrderParam<double>::stable(std::exp(-2.0 * std::numbers::pi * fc));
}

SecondOrderParam<double> lowpass_param_from_cutoff(double fc, ResonanceQ resonance) {
  check_cutoff(fc);
  const double q = resonance.q;
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw std::invalid_argument("quality factor must be positive, got " + std::to_string(q));
  }
  return detail::lowpass_section(std::tan(std::numbers::pi * fc), q);
}

SecondOrderParam<double> lowpass_param_from_cutoff(double fc, ResonancePeak resonance) {
  return lowpass_param_from_cutoff(fc, ResonanceQ{quality_from_peak(resonance.gain)});
}

double resonance_peak_gain(double q) {
  if (!(q > std::numbers::sqrt2 / 2.0)) {
    throw std::invalid_argument("resonance peak exists only for q > 1/sqrt(2), got " + std::to_string(q));
  }
  return q / std::sqrt(1.0 - 1.0 / (4.0 * q * q));
}

double quality_from_peak(double gain) {
  if (!(gain > 1.0) || !std::isfinite(gain)) {
    throw std::invalid_argument("resonance peak gain must exceed 1, got " + std::to_string(gain));
  }
  const double g2 = gain * gain;
  return std::sqrt((g2 + std::sqrt(g2 * g2 - g2)) / 2.0);
}

std::vector<SecondOrderParam<double>> butterworth_lowpass_cascade(int order, double fc) {
  if (order < 2 || order % 2 != 0) {
    throw std::invalid_argument("butterworth order must be even and at least 2, got " + std::to_string(order));
  }
  check_cutoff(fc);
  std::vector<SecondOrderParam<double>> sections;
  sections.reserve(static_cast<std::size_t>(order / 2));
  const double k = std::tan(std::numbers::pi * fc);
  for (int m = order / 2 - 1; m >= 0; --m) sections.push_back(detail::lowpass_section(k, detail::butterworth_quality(order, m)));
  return sections;
}

std::complex<double> frequency_response(const SecondOrderParam<double>& p, double f) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * f);
  const std::complex<double> z2 = z1 * z1;
  return (p.n0() + p.n1() * z1 + p.n2() * z2) / (1.0 - p.a() * z1 + p.b() * z2);
}

std::complex<double> frequency_response(const FirstOrderParam<double>& p, double f) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * f);
  return 1.0 / (1.0 - p.k() * z1);
}

double cascade_magnitude(std::span<const SecondOrderParam<double>> sections, double f) {
  double m = 1.0;
  for (const auto& s : sections) m *= std::abs(frequency_response(s, f));
  return m;
}

}  // namespace fusedsp

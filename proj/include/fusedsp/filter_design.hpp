#pragma once

// Coefficient design for the lowpass and Butterworth filters. Frequencies are
// in cycles per sample.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fusedsp/filters.hpp"

namespace fusedsp {

/// First-order lowpass selected by slope (6 dB/octave).
struct SlopeFirstOrder {};

/// Resonant second-order lowpass selected by its quality factor.
struct ResonanceQ {
  double q;
};

/// Resonant second-order lowpass selected by the amplification of the
/// resonant frequency (linear gain above 1).
struct ResonancePeak {
  double gain;
};

/// k = exp(-2 pi fc).
FirstOrderParam<double> lowpass_param_from_cutoff(double fc, SlopeFirstOrder);
/// Bilinear-transform lowpass section with quality q.
SecondOrderParam<double> lowpass_param_from_cutoff(double fc, ResonanceQ resonance);
SecondOrderParam<double> lowpass_param_from_cutoff(double fc, ResonancePeak resonance);

/// Peak magnitude of the analog second-order lowpass with quality q (q > 1/sqrt 2).
double resonance_peak_gain(double q);
/// Inverse of resonance_peak_gain; requires gain > 1.
double quality_from_peak(double gain);

/// order/2 sections, ordered by increasing Q.
std::vector<SecondOrderParam<double>> butterworth_lowpass_cascade(int order, double fc);

namespace detail {
void check_cutoff(double fc);
/// Bilinear lowpass section from k = tan(pi fc).
inline SecondOrderParam<double> lowpass_section(double k, double q) {
  const double kk = k * k;
  const double norm = 1.0 / (1.0 + k / q + kk);
  const double b0 = kk * norm;
  const double a1 = 2.0 * (kk - 1.0) * norm;
  const double a2 = (1.0 - k / q + kk) * norm;
  return SecondOrderParam<double>::biquad(b0, 2.0 * b0, b0, -a1, a2);
}
/// Q of the m-th pole pair of an analog Butterworth prototype.
double butterworth_quality(int order, int m);
}  // namespace detail

/// Same sections as butterworth_lowpass_cascade(2 * Sections, fc), without
/// allocating; cheap enough for control rate.
template <std::size_t Sections, class T = float>
std::array<SecondOrderParam<T>, Sections> butterworth_sections(double fc) {
  static const std::array<double, Sections> qualities = [] {
    std::array<double, Sections> q{};
    for (std::size_t i = 0; i < Sections; ++i)
      q[i] = detail::butterworth_quality(static_cast<int>(2 * Sections), static_cast<int>(Sections - 1 - i));
    return q;
  }();
  detail::check_cutoff(fc);
  const double k = std::tan(std::numbers::pi * fc);
  std::array<SecondOrderParam<T>, Sections> out;
  for (std::size_t i = 0; i < Sections; ++i) out[i] = detail::lowpass_section(k, qualities[i]).template cast<T>();
  return out;
}

/// H(e^{j 2 pi f}) of one section.
std::complex<double> frequency_response(const SecondOrderParam<double>& p, double f);
std::complex<double> frequency_response(const FirstOrderParam<double>& p, double f);
double cascade_magnitude(std::span<const SecondOrderParam<double>> sections, double f);

inline double to_decibels(double magnitude) {
  return 20.0 * std::log10(magnitude);
}

}  // namespace fusedsp

#pragma once

// Polynomials in z^-1 and the decomposition of a purely recursive filter
// 1/d(z) into a short non-recursive part and a recursion whose lags are all
// multiples of a stride. Templated on the coefficient ring so the identities
// can be checked with exact rational or symbolic coefficients.

#include <bit>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fusedsp::simd {

/// coefficient[i] multiplies z^-i.
template <class R>
using Polynomial = std::vector<R>;

template <class R>
Polynomial<R> multiply(const Polynomial<R>& p, const Polynomial<R>& q) {
  if (p.empty() || q.empty()) return {};
  Polynomial<R> r(p.size() + q.size() - 1, R(0));
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) r[i + j] = r[i + j] + p[i] * q[j];
  return r;
}

/// The alternating polynomial: coefficients at odd multiples of `spacing`
/// negated. With spacing 1 this is d(-z); for a polynomial in z^-s it is the
/// same operation on the variable z^-s.
template <class R>
Polynomial<R> alternating(const Polynomial<R>& d, std::size_t spacing = 1) {
  Polynomial<R> m = d;
  for (std::size_t i = spacing; i < m.size(); i += 2 * spacing) m[i] = -m[i];
  return m;
}

/// numerator / denominator, both in z^-1; denominator[0] == 1.
template <class R>
struct PolyFrac {
  Polynomial<R> numerator;
  Polynomial<R> denominator;
};

template <class R>
void require_monic(const Polynomial<R>& d, const char* who) {
  if (d.empty() || !(d[0] == R(1))) {
    throw std::invalid_argument(std::string(who) + ": denominator must start with coefficient 1");
  }
}

template <class R>
struct OddLagElimination {
  Polynomial<R> multiplier;   // the alternating polynomial of the input
  Polynomial<R> denominator;  // input * multiplier; every odd-lag coefficient is zero
};

/// `spacing` > 1 treats d as a polynomial in z^-spacing (all other lags must
/// be zero); the product then has nonzero lags only at multiples of
/// 2 * spacing.
template <class R>
OddLagElimination<R> eliminate_odd_lags(const Polynomial<R>& d, std::size_t spacing = 1) {
  require_monic(d, "eliminate_odd_lags");
  auto m = alternating(d, spacing);
  auto product = multiply(d, m);
  // The odd terms cancel algebraically; store exact zeros so rounding noise
  // does not leak into later rounds.
  for (std::size_t i = 1; i < product.size(); ++i)
    if (i % (2 * spacing) != 0) product[i] = R(0);
  return {std::move(m), std::move(product)};
}

/// Extends numerator and denominator by the alternating polynomial of the
/// denominator; the fraction's value is unchanged.
template <class R>
PolyFrac<R> extend_alternating(const PolyFrac<R>& f, std::size_t spacing = 1) {
  auto step = eliminate_odd_lags(f.denominator, spacing);
  return {multiply(f.numerator, step.multiplier), std::move(step.denominator)};
}

template <class R>
struct FilterDecomposition {
  std::size_t stride = 1;
  /// Short-term non-recursive part, product of all multipliers.
  Polynomial<R> fir;
  /// Long-term recursive denominator; nonzero lags are multiples of stride.
  Polynomial<R> recursive;
  /// recursive[m * stride] for m = 0, 1, ...
  std::vector<R> strided;
  /// Multiplier introduced in each doubling round; round j has nonzero
  /// coefficients only at multiples of 2^j.
  std::vector<Polynomial<R>> multipliers;
};

/// Repeats the alternating extension log2(stride) times so that
/// fir(z) * d(z) == recursive(z).
template <class R>
FilterDecomposition<R> decompose_recursive(const Polynomial<R>& d, std::size_t stride) {
  require_monic(d, "decompose_recursive");
  if (stride == 0 || !std::has_single_bit(stride)) {
    throw std::invalid_argument("decompose_recursive: stride must be a power of two, got " +
                                std::to_string(stride));
  }
  FilterDecomposition<R> out;
  out.stride = stride;
  PolyFrac<R> frac{{R(1)}, d};
  for (std::size_t s = 1; s < stride; s *= 2) {
    auto step = eliminate_odd_lags(frac.denominator, s);
    frac.numerator = multiply(frac.numerator, step.multiplier);
    frac.denominator = std::move(step.denominator);
    out.multipliers.push_back(std::move(step.multiplier));
  }
  out.fir = std::move(frac.numerator);
  out.recursive = std::move(frac.denominator);
  for (std::size_t lag = 0; lag < out.recursive.size(); lag += stride)
    out.strided.push_back(out.recursive[lag]);
  return out;
}

}  // namespace fusedsp::simd

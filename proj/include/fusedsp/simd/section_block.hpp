#pragma once

// Block evaluation of a recursive section n(z)/d(z) with the short-term part
// of the decomposition expanded into a single FIR.
//
// Within a block of N samples the product of the decomposition multipliers
// acts only through its first N coefficients, which are the impulse response
// h of 1/d. Applying n * h as one FIR of N taps replaces the log2(N)
// dependent shift-add rounds by independent products summed as a tree; the
// earlier blocks enter through the last Order inputs and outputs, each with
// its own natural-response vector. Filtering a block this way is exact up to
// rounding, and the carried state is the scalar filter's.

#include <array>
#include <cstddef>
#include <stdexcept>

#include "fusedsp/simd/lane_vector.hpp"
#include "fusedsp/simd/recursive_block.hpp"

namespace fusedsp::simd {

template <class T, std::size_t N, std::size_t Order>
struct SectionBlockCoeffs {
  /// impulse[j] multiplies the block shifted by j lanes.
  std::array<T, N> impulse{};
  /// Response of the block to a unit x[-m] (index m-1).
  std::array<LaneVector<T, N>, Order> input_natural{};
  /// Response of the block to a unit y[-m] (index m-1).
  std::array<LaneVector<T, N>, Order> output_natural{};
};

/// Past inputs and outputs of a section, each broadcast to all lanes.
template <class T, std::size_t N, std::size_t Order>
struct SectionBlockState {
  RecursiveHistory<T, N, Order> x{};
  RecursiveHistory<T, N, Order> y{};
};

/// `n[s]` and `d[s]` are numerator and denominator of section s in z^-1,
/// d[s][0] == 1. The impulse response of each 1/d is computed in double
/// precision and rounded to T once; every coefficient vector is a weighted
/// sum of its shifts. The sections' recursions run in lockstep.
template <class T, std::size_t N, std::size_t Order, std::size_t M>
std::array<SectionBlockCoeffs<T, N, Order>, M> prepare_sections(
    const std::array<std::array<double, Order + 1>, M>& n, const std::array<std::array<double, Order + 1>, M>& d) {
  static_assert(Order >= 1 && Order < N, "section order must be below the lane count");
  for (const auto& den : d)
    if (den[0] != 1.0) throw std::invalid_argument("prepare_section: d[0] must be 1");
  using V = LaneVector<T, N>;

  // first N coefficients of 1/d: the expanded product of the multipliers
  std::array<std::array<T, N>, M> hv;
  std::array<std::array<double, Order>, M> past{};  // h[i-1], h[i-2], ...
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t k = 0; k < M; ++k) {
      double h = i == 0 ? 1.0 : 0.0;
      for (std::size_t l = 1; l <= Order; ++l) h -= d[k][l] * past[k][l - 1];
      for (std::size_t l = Order - 1; l > 0; --l) past[k][l] = past[k][l - 1];
      past[k][0] = h;
      hv[k][i] = static_cast<T>(h);
    }
  }

  std::array<SectionBlockCoeffs<T, N, Order>, M> out;
  for (std::size_t k = 0; k < M; ++k) {
    const V h = V::from_array(hv[k]);
    std::array<V, Order + 1> shifted;  // shifted[j] = h delayed by j lanes
    static_for<Order + 1>([&](auto j) { shifted[j()] = shift_up<j()>(h); });
    // sum_j c[j + m] * shifted[j]
    const auto weighted = [&](const std::array<double, Order + 1>& c, std::size_t m) {
      V acc(T(0));
      for (std::size_t j = 0; j + m <= Order; ++j) acc = acc + V(static_cast<T>(c[j + m])) * shifted[j];
      return acc;
    };
    out[k].impulse = weighted(n[k], 0).to_array();
    for (std::size_t m = 1; m <= Order; ++m) {
      out[k].input_natural[m - 1] = weighted(n[k], m);
      out[k].output_natural[m - 1] = -weighted(d[k], m);
    }
  }
  return out;
}

template <class T, std::size_t N, std::size_t Order>
SectionBlockCoeffs<T, N, Order> prepare_section(const std::array<double, Order + 1>& n,
                                                const std::array<double, Order + 1>& d) {
  return prepare_sections<T, N, Order, 1>({n}, {d})[0];
}

namespace detail {

template <std::size_t Begin, std::size_t End, class V, std::size_t K>
FUSEDSP_INLINE V tree_sum(const std::array<V, K>& terms) {
  if constexpr (End - Begin == 1) {
    return terms[Begin];
  } else {
    constexpr std::size_t mid = Begin + (End - Begin) / 2;
    return tree_sum<Begin, mid>(terms) + tree_sum<mid, End>(terms);
  }
}

}  // namespace detail

/// Filters one block and advances the state to its last inputs and outputs.
template <class T, std::size_t N, std::size_t Order>
FUSEDSP_INLINE LaneVector<T, N> section_block(const SectionBlockCoeffs<T, N, Order>& c, const LaneVector<T, N>& x,
                                              SectionBlockState<T, N, Order>& s) {
  using V = LaneVector<T, N>;
  std::array<V, N + Order> terms;
  static_for<N>([&](auto j) { terms[j()] = V(c.impulse[j()]) * shift_up<j()>(x); });
  static_for<Order>([&](auto m) { terms[N + m()] = c.input_natural[m()] * s.x[m()]; });
  // the output history is the only dependency between blocks; add it last
  V carried = c.output_natural[0] * s.y[0];
  static_for<Order - 1>([&](auto m) { carried = carried + c.output_natural[m() + 1] * s.y[m() + 1]; });
  const V y = detail::tree_sum<0, N + Order>(terms) + carried;
  static_for<Order>([&](auto m) {
    s.x[m()] = broadcast_lane<N - 1 - m()>(x);
    s.y[m()] = broadcast_lane<N - 1 - m()>(y);
  });
  return y;
}

/// State of a section whose coefficients change at lane r (0 < r < N) of
/// block x: inputs and outputs up to sample r-1. `y` is the block filtered
/// with the old coefficients; `s` is the state before the block.
template <class T, std::size_t N, std::size_t Order>
SectionBlockState<T, N, Order> section_state_at(const LaneVector<T, N>& x, const LaneVector<T, N>& y,
                                                const SectionBlockState<T, N, Order>& s, std::size_t r) {
  using V = LaneVector<T, N>;
  const auto earlier = [](const RecursiveHistory<T, N, Order>& h) {
    return V::generate([&](std::size_t i) { return i + Order >= N ? h[N - 1 - i][0] : T(0); });
  };
  const V x_upto = shift_in(x, earlier(s.x), N - r);
  const V y_upto = shift_in(y, earlier(s.y), N - r);
  SectionBlockState<T, N, Order> out;
  static_for<Order>([&](auto m) {
    out.x[m()] = broadcast_lane<N - 1 - m()>(x_upto);
    out.y[m()] = broadcast_lane<N - 1 - m()>(y_upto);
  });
  return out;
}

/// One block whose coefficients switch from `before` to `after` at lane r.
template <class T, std::size_t N, std::size_t Order>
[[gnu::noinline]] LaneVector<T, N> section_block_split(const SectionBlockCoeffs<T, N, Order>& before,
                                                       const SectionBlockCoeffs<T, N, Order>& after,
                                                       const LaneVector<T, N>& x,
                                                       SectionBlockState<T, N, Order>& s, std::size_t r) {
  SectionBlockState<T, N, Order> head = s;
  const LaneVector<T, N> y_head = section_block(before, x, head);
  SectionBlockState<T, N, Order> tail = section_state_at(x, y_head, s, r);
  const LaneVector<T, N> y_tail = section_block(after, shift_down(x, r), tail);
  const LaneVector<T, N> y = blend_at(y_head, shift_up(y_tail, r), r);
  static_for<Order>([&](auto m) {
    s.x[m()] = broadcast_lane<N - 1 - m()>(x);
    s.y[m()] = broadcast_lane<N - 1 - m()>(y);
  });
  return y;
}

}  // namespace fusedsp::simd

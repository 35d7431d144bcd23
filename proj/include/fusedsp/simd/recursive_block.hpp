#pragma once

// Block evaluation of a purely recursive filter 1/d(z) on N serial samples.
//
// Within a block the filter is the product of the decomposition multipliers
// (one shift-add round per multiplier) followed by a recursion whose lags are
// all multiples of N, i.e. which only reaches into earlier blocks. Instead of
// keeping that long recursion's history, the earlier blocks enter through the
// natural response of d to the last Order outputs: y[i] += g_m[i] * y[-m].
// Both parts are exact rewrites of the scalar recursion, and the carried
// state is the same as the scalar filter's, so coefficients may change at any
// block boundary.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <utility>

#include "fusedsp/simd/lane_vector.hpp"

namespace fusedsp::simd {

template <class T, std::size_t N, std::size_t Order>
struct RecursiveBlockCoeffs {
  static constexpr std::size_t rounds = log2_lanes(N);
  /// taps[j][m-1] multiplies the block shifted by m * 2^j in round j.
  std::array<std::array<T, Order>, rounds> taps{};
  /// natural[m-1][i]: output at lane i caused by a unit value of y[-m].
  std::array<LaneVector<T, N>, Order> natural{};
};

/// The short-term part of the recursion: one shift-add round per multiplier.
template <class T, std::size_t N, std::size_t Order>
FUSEDSP_INLINE LaneVector<T, N> recursive_rounds(const RecursiveBlockCoeffs<T, N, Order>& c, LaneVector<T, N> w) {
  static_for<RecursiveBlockCoeffs<T, N, Order>::rounds>([&](auto j) {
    LaneVector<T, N> acc = w;
    static_for<Order>([&](auto m) {
      constexpr std::size_t lag = (m() + 1) << j();
      if constexpr (lag < N) acc = acc + LaneVector<T, N>(c.taps[j()][m()]) * shift_up<lag>(w);
    });
    w = acc;
  });
  return w;
}

/// `d` = {1, d1, ..., dOrder} for y[t] = x[t] - d1 y[t-1] - ... ; the
/// multipliers are derived in double precision and rounded to T once. Equal to
/// the multipliers of decompose_recursive(d, N), computed without allocation
/// so it can run at control rate.
template <class T, std::size_t N, std::size_t Order>
RecursiveBlockCoeffs<T, N, Order> prepare_recursive(const std::array<double, Order + 1>& d) {
  static_assert(Order >= 1 && Order < N, "filter order must be below the lane count");
  if (d[0] != 1.0) throw std::invalid_argument("prepare_recursive: d[0] must be 1");
  RecursiveBlockCoeffs<T, N, Order> c;

  // In round j the denominator is a polynomial of degree Order in z^-(2^j).
  std::array<double, Order + 1> den = d;
  for (std::size_t j = 0; j < c.rounds; ++j) {
    std::array<double, Order + 1> alt = den;
    for (std::size_t i = 1; i <= Order; i += 2) alt[i] = -alt[i];
    for (std::size_t m = 1; m <= Order; ++m) c.taps[j][m - 1] = static_cast<T>(alt[m]);
    std::array<double, Order + 1> next{};
    for (std::size_t q = 0; q <= Order; ++q) {
      double acc = 0.0;
      for (std::size_t i = 0; i <= 2 * q; ++i)
        if (i <= Order && 2 * q - i <= Order) acc += den[i] * alt[2 * q - i];
      next[q] = acc;
    }
    next[0] = 1.0;
    den = next;
  }

  // y[-m] acts on the block like the input -d[m], -d[m+1], ... at lanes
  // 0, 1, ...; lags of the strided recursion all reach past the block.
  for (std::size_t m = 1; m <= Order; ++m) {
    LaneVector<T, N> x(T(0));
    for (std::size_t j = 0; j + m <= Order; ++j) x.set(j, static_cast<T>(-d[j + m]));
    c.natural[m - 1] = recursive_rounds(c, x);
  }
  return c;
}

/// Past outputs y[-1] .. y[-Order], each broadcast to all lanes.
template <class T, std::size_t N, std::size_t Order>
using RecursiveHistory = std::array<LaneVector<T, N>, Order>;

/// Filters one block and advances `history` to its last outputs.
template <class T, std::size_t N, std::size_t Order>
FUSEDSP_INLINE LaneVector<T, N> recursive_block(const RecursiveBlockCoeffs<T, N, Order>& c, LaneVector<T, N> w,
                                 RecursiveHistory<T, N, Order>& history) {
  w = recursive_rounds(c, w);
  static_for<Order>([&](auto m) { w = w + c.natural[m()] * history[m()]; });
  static_for<Order>([&](auto m) { history[m()] = broadcast_lane<N - 1 - m()>(w); });
  return w;
}

/// One block of y[t] = x[t] + k y[t-1]; returns the block and its last output.
template <class T, std::size_t N>
std::pair<LaneVector<T, N>, T> first_order_vec_block(T k, const LaneVector<T, N>& x, T y_prev) {
  const auto c = prepare_recursive<T, N, 1>({1.0, -static_cast<double>(k)});
  RecursiveHistory<T, N, 1> h{LaneVector<T, N>(y_prev)};
  auto y = recursive_block(c, x, h);
  return {y, h[0][0]};
}

}  // namespace fusedsp::simd

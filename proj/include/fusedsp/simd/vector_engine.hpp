#pragma once

// Serially vectorised primitives: each generator step produces N consecutive
// samples, lane 0 first. The generic combinators (map, zip_with, mix, apply,
// >>, loop, controlled_filter) work unchanged on these.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fusedsp/causal.hpp"
#include "fusedsp/filters.hpp"
#include "fusedsp/generator.hpp"
#include "fusedsp/simd/lane_vector.hpp"
#include "fusedsp/simd/recursive_block.hpp"
#include "fusedsp/simd/section_block.hpp"

namespace fusedsp::simd {

/// Fixed-point phases to real phases, lane-wise; matches Phase::value.
template <std::floating_point T, std::size_t N>
LaneVector<T, N> phase_values(const LaneVector<std::uint32_t, N>& bits) {
  constexpr int digits = std::numeric_limits<T>::digits;
  if constexpr (digits >= 32) {
    return convert<T>(bits) * LaneVector<T, N>(static_cast<T>(1.0 / Phase::kScale));
  } else {
    const auto top = convert<std::int32_t>(shift_right_bits(bits, 32 - digits));
    return convert<T>(top) * LaneVector<T, N>(static_cast<T>(std::ldexp(1.0, -digits)));
  }
}

template <std::size_t N, std::floating_point T = float, class Wave>
auto osci_vec_serial(Wave wave, double phase0, double freq) {
  check_oscillator(phase0, freq);
  const std::uint32_t inc = Phase::from_cycles(freq);
  const std::uint32_t start = Phase::from_cycles(phase0);
  using P = LaneVector<std::uint32_t, N>;
  const P lanes = P::generate([&](std::size_t i) { return static_cast<std::uint32_t>(start + inc * i); });
  const P stride(static_cast<std::uint32_t>(inc * N));
  return make_generator(lanes, [wave, stride](P& phase) {
    auto y = wave(phase_values<T>(phase));
    phase += stride;
    return emit(y);
  });
}

/// Lanes start at the first N values of the scalar recurrence; every block is
/// then scaled by r^N. Like the scalar version the state is kept in double.
template <std::size_t N, std::floating_point T = float>
auto exponential_vec_serial(double half_life, T amp) {
  const double r = half_life_decay(half_life);
  std::array<double, N> first;
  double y = amp;
  for (std::size_t i = 0; i < N; ++i) {
    first[i] = y;
    y *= r;
  }
  using D = LaneVector<double, N>;
  const D block_decay(std::pow(r, static_cast<double>(N)));
  return make_generator(D::from_array(first), [block_decay](D& v) {
    const auto out = convert<T>(v);
    v *= block_decay;
    return emit(out);
  });
}

template <class U>
struct NoiseVecState {
  U current;  // states for the block about to be emitted
  U next;     // states for the block after it
};

/// Lane i runs the scalar noise sequence from position i. Two consecutive
/// blocks are kept and each is advanced by 2N states, so the multiply latency
/// of one block overlaps with the other.
template <std::size_t N, std::floating_point T = float>
auto noise_vec(std::uint32_t seed) {
  std::uint32_t a = 1, c = 0;  // composite of 2N LCG steps: x -> a x + c
  for (std::size_t i = 0; i < 2 * N; ++i) {
    a = Lcg::multiplier * a;
    c = Lcg::multiplier * c + Lcg::increment;
  }
  using U = LaneVector<std::uint32_t, N>;
  std::uint32_t x = Lcg::next(seed);
  std::array<std::uint32_t, 2 * N> init;
  for (auto& v : init) {
    v = x;
    x = Lcg::next(x);
  }
  NoiseVecState<U> start{U::load(init.data()), U::load(init.data() + N)};
  const U va(a), vc(c);
  return make_generator(start, [va, vc](NoiseVecState<U>& s) {
    const auto top = shift_right_bits(convert<std::int32_t>(s.current), 8);
    const auto y = convert<T>(top) * LaneVector<T, N>(static_cast<T>(1.0 / 8388608.0));
    const U advanced = va * s.current + vc;
    s.current = s.next;
    s.next = advanced;
    return emit(y);
  });
}

template <std::size_t N, std::floating_point T = float>
auto ramp_vec(T start, T slope) {
  const double s0 = start;
  const double ds = slope;
  return make_generator(std::uint64_t{0}, [s0, ds](std::uint64_t& n) {
    const auto y = LaneVector<T, N>::generate(
        [&](std::size_t i) { return static_cast<T>(s0 + ds * static_cast<double>(n + i)); });
    n += N;
    return emit(y);
  });
}

template <std::size_t N, class T = float>
auto gate_vec(std::uint64_t length) {
  return make_generator(std::uint64_t{0}, [length](std::uint64_t& n) {
    const auto y = LaneVector<T, N>::generate([&](std::size_t i) { return n + i < length ? T(1) : T(0); });
    n += N;
    return emit(y);
  });
}

template <std::size_t N, class T>
auto constant_vec(T value) {
  return constant(LaneVector<T, N>(value));
}

// ---------------------------------------------------------------------------
// block coefficients for the recursive filters

template <class T, std::size_t N>
struct FirstOrderBlock {
  T k = 0;
  RecursiveBlockCoeffs<T, N, 1> rec;
};

/// n0 + n1 z^-1 + n2 z^-2 over 1 - a z^-1 + b z^-2.
template <class T, std::size_t N>
using BiquadBlock = SectionBlockCoeffs<T, N, 2>;

/// k + z^-1 over 1 + k z^-1.
template <class T, std::size_t N>
using AllpassBlock = SectionBlockCoeffs<T, N, 1>;

template <std::size_t N, class T>
FirstOrderBlock<T, N> prepare_block(const FirstOrderParam<T>& p) {
  return {p.k(), prepare_recursive<T, N, 1>({1.0, -static_cast<double>(p.k())})};
}

template <std::size_t N, class T>
BiquadBlock<T, N> prepare_block(const SecondOrderParam<T>& p) {
  return prepare_section<T, N, 2>({double(p.n0()), double(p.n1()), double(p.n2())},
                                  {1.0, -static_cast<double>(p.a()), static_cast<double>(p.b())});
}

template <std::size_t N, class T>
AllpassBlock<T, N> prepare_block(const AllpassParam<T>& p) {
  return prepare_section<T, N, 1>({double(p.k()), 1.0}, {1.0, static_cast<double>(p.k())});
}

template <std::size_t N, class T, std::size_t M>
std::array<BiquadBlock<T, N>, M> prepare_block(const std::array<SecondOrderParam<T>, M>& ps) {
  std::array<std::array<double, 3>, M> n, d;
  for (std::size_t i = 0; i < M; ++i) {
    n[i] = {double(ps[i].n0()), double(ps[i].n1()), double(ps[i].n2())};
    d[i] = {1.0, -static_cast<double>(ps[i].a()), static_cast<double>(ps[i].b())};
  }
  return prepare_sections<T, N, 2, M>(n, d);
}

template <class T, std::size_t N>
using BiquadVecState = SectionBlockState<T, N, 2>;
template <class T, std::size_t N>
using AllpassVecState = SectionBlockState<T, N, 1>;

template <class T, std::size_t N>
FUSEDSP_INLINE LaneVector<T, N> biquad_block_step(const BiquadBlock<T, N>& c, const LaneVector<T, N>& x,
                                                  BiquadVecState<T, N>& s) {
  return section_block(c, x, s);
}

template <class T, std::size_t N>
FUSEDSP_INLINE LaneVector<T, N> allpass_block_step(const AllpassBlock<T, N>& c, const LaneVector<T, N>& x,
                                                   AllpassVecState<T, N>& s) {
  return section_block(c, x, s);
}

/// Coefficients for one block: lanes below `split` use *before, the others
/// *after. split == 0 means the whole block uses *after.
template <class P>
struct BlockParams {
  const P* before = nullptr;
  const P* after = nullptr;
  std::size_t split = 0;
};

template <class P>
BlockParams<P> block_params(const BlockParams<P>& p) {
  return p;
}

template <class P>
BlockParams<P> block_params(const P& p) {
  return {&p, &p, 0};
}

// ---------------------------------------------------------------------------
// fixed-parameter vector filters

template <std::size_t N, class T>
auto first_order_recursive_vec(FirstOrderParam<T> p) {
  using V = LaneVector<T, N>;
  using H = RecursiveHistory<T, N, 1>;
  return make_causal(H{}, [c = prepare_block<N>(p)](const V& x, H& h) { return emit(recursive_block(c.rec, x, h)); });
}

template <std::size_t N, class T>
auto first_order_lowpass_vec(FirstOrderParam<T> p) {
  using V = LaneVector<T, N>;
  using H = RecursiveHistory<T, N, 1>;
  const T gain = T(1) - p.k();
  return make_causal(H{}, [gain, c = prepare_block<N>(p)](const V& x, H& h) {
    return emit(recursive_block(c.rec, V(gain) * x, h));
  });
}

template <std::size_t N, class T>
auto second_order_recursive_vec(SecondOrderParam<T> p) {
  using V = LaneVector<T, N>;
  return make_causal(BiquadVecState<T, N>{}, [c = prepare_block<N>(p)](const V& x, BiquadVecState<T, N>& s) {
    return emit(biquad_block_step(c, x, s));
  });
}

template <std::size_t N, class T>
auto allpass_vec(AllpassParam<T> p) {
  using V = LaneVector<T, N>;
  return make_causal(AllpassVecState<T, N>{}, [c = prepare_block<N>(p)](const V& x, AllpassVecState<T, N>& s) {
    return emit(allpass_block_step(c, x, s));
  });
}

template <std::size_t N, class T>
auto allpass_cascade_vec(std::size_t stages, AllpassParam<T> p) {
  if (stages == 0) throw std::invalid_argument("allpass_cascade: need at least one stage");
  using V = LaneVector<T, N>;
  using S = std::vector<AllpassVecState<T, N>>;
  return make_causal(S(stages), [c = prepare_block<N>(p)](const V& x, S& s) {
    V y = x;
    for (auto& st : s) y = allpass_block_step(c, y, st);
    return emit(y);
  });
}

// ---------------------------------------------------------------------------
// controlled vector filters. The parameter part of the input is either a
// prepared block (as from controlled_filter) or a BlockParams switching
// mid-block (as from controlled_filter_vec).

template <std::size_t N, class T>
auto second_order_controlled_vec() {
  using V = LaneVector<T, N>;
  return make_causal(BiquadVecState<T, N>{}, [](const auto& in, BiquadVecState<T, N>& s) FUSEDSP_FLATTEN {
    const BlockParams<BiquadBlock<T, N>> p = block_params(in.first);
    const V x = in.second;
    if (p.split == 0) return emit(biquad_block_step(*p.after, x, s));
    return emit(section_block_split(*p.before, *p.after, x, s, p.split));
  });
}

template <std::size_t N, class T, std::size_t Sections>
auto biquad_cascade_controlled_vec() {
  using V = LaneVector<T, N>;
  using S = std::array<BiquadVecState<T, N>, Sections>;
  using P = std::array<BiquadBlock<T, N>, Sections>;
  return make_causal(S{}, [](const auto& in, S& s) FUSEDSP_FLATTEN {
    const BlockParams<P> p = block_params(in.first);
    V y = in.second;
    if (p.split == 0) {
      static_for<Sections>([&](auto i) { y = biquad_block_step((*p.after)[i()], y, s[i()]); });
    } else {
      for (std::size_t i = 0; i < Sections; ++i)
        y = section_block_split((*p.before)[i], (*p.after)[i], y, s[i], p.split);
    }
    return emit(y);
  });
}

template <std::size_t N, class T>
auto allpass_cascade_controlled_vec(std::size_t stages) {
  if (stages == 0) throw std::invalid_argument("allpass_cascade: need at least one stage");
  using V = LaneVector<T, N>;
  using S = std::vector<AllpassVecState<T, N>>;
  return make_causal(S(stages), [](const auto& in, S& s) FUSEDSP_FLATTEN {
    const BlockParams<AllpassBlock<T, N>> p = block_params(in.first);
    V y = in.second;
    if (p.split == 0) {
      for (auto& st : s) y = allpass_block_step(*p.after, y, st);
    } else {
      for (auto& st : s) y = section_block_split(*p.before, *p.after, y, st, p.split);
    }
    return emit(y);
  });
}

/// Runs a vector filter family with parameters at control rate. `ctrl.factor`
/// counts samples: control tick k starts at sample k * factor, also when that
/// falls inside a block, so the output equals the scalar controlled filter.
/// Requires factor >= N (at most one change per block).
template <std::size_t N, SignalGenerator G, class S, class F>
auto controlled_filter_vec(const ControlRated<G>& ctrl, const Causal<S, F>& family) {
  if (ctrl.factor < N) {
    throw std::invalid_argument("vector control rate factor " + std::to_string(ctrl.factor) +
                                " is below the lane count " + std::to_string(N));
  }
  using P = sample_t<G>;
  struct State {
    typename G::state_type source;
    P previous{};
    P current{};
    std::uint64_t block_start = 0;
    std::uint64_t next_tick = 0;
    S filter;
  };
  const std::uint64_t factor = ctrl.factor;
  return make_causal(State{ctrl.params.initial, P{}, P{}, 0, 0, family.initial},
                     [pn = ctrl.params.next, factor, ff = family.fn](const auto& x, State& s) {
                       using X = std::decay_t<decltype(x)>;
                       using In = std::pair<const BlockParams<P>&, const X&>;
                       using B = typename decltype(ff(std::declval<In>(), s.filter))::value_type;
                       std::size_t split = 0;
                       if (s.next_tick < s.block_start + N) {
                         auto r = pn(s.source);
                         if (!r.cont) return halt<B>();
                         s.previous = std::move(s.current);
                         s.current = std::move(r.value);
                         split = static_cast<std::size_t>(s.next_tick - s.block_start);
                         s.next_tick += factor;
                       }
                       s.block_start += N;
                       const BlockParams<P> params{&s.previous, &s.current, split};
                       return ff(In(params, x), s.filter);
                     });
}

// ---------------------------------------------------------------------------

template <class T, std::size_t N>
struct BlockDelayLine {
  std::vector<LaneVector<T, N>> ring;  // the last q+1 input blocks, oldest at pos
  std::size_t pos = 0;
};

/// Sample-granular delay by `d` samples on serial blocks.
template <std::size_t N, class T>
auto delay_n_vec(std::size_t d, T init) {
  using V = LaneVector<T, N>;
  const std::size_t q = d / N;
  const std::size_t r = d % N;
  return make_causal(BlockDelayLine<T, N>{std::vector<V>(q + 1, V(init)), 0},
                     [q, r](const V& x, BlockDelayLine<T, N>& line) {
                       const std::size_t size = line.ring.size();
                       const V older = line.ring[line.pos];
                       const V newer = q == 0 ? x : line.ring[line.pos + 1 == size ? 0 : line.pos + 1];
                       const V out = r == 0 ? newer : shift_in(newer, older, r);
                       line.ring[line.pos] = x;
                       if (++line.pos == size) line.pos = 0;
                       return emit(out);
                     });
}

/// Vector Karplus-Strong. The loop contributes one block of delay, so the
/// total delay must be at least N samples.
template <std::size_t N, std::floating_point T, SignalGenerator G>
auto karplus_strong_vec(const KarplusParams<T>& kp, const G& excitation) {
  if (kp.delay < N) {
    throw std::invalid_argument("karplus_strong: delay " + std::to_string(kp.delay) +
                                " is shorter than the lane count " + std::to_string(N));
  }
  using V = LaneVector<T, N>;
  const T gain = kp.gain;
  auto feedback = delay_n_vec<N>(kp.delay - N, T(0)) >> first_order_lowpass_vec<N>(kp.damping) >>
                  arr([gain](const V& v) { return V(gain) * v; });
  auto add_and_split = arr([](const std::pair<V, V>& xf) {
    const V y = xf.first + xf.second;
    return std::pair<V, V>(y, y);
  });
  return fusedsp::apply(loop(V(T(0)), second(feedback) >> add_and_split), excitation);
}

}  // namespace fusedsp::simd

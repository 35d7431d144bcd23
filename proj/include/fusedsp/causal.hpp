#pragma once

// Causal processes: every output sample depends only on the current and past
// input samples, and exactly one input is consumed per output. Processes are
// combined with processes (arrow combinators) instead of transforming
// generators, which lets a pipeline share one source evaluation among several
// consumers and express short feedback loops without deadlock.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "fusedsp/generator.hpp"

namespace fusedsp {

/// `fn(input, state)` returns Step<Output> and advances the state in place.
/// The input type is whatever `fn` accepts; most primitives are generic.
template <class State, class Fn>
struct Causal {
  using state_type = State;
  using fn_type = Fn;

  State initial;
  Fn fn;
};

template <class S, class F>
Causal(S, F) -> Causal<S, F>;

template <class State, class Fn>
constexpr auto make_causal(State initial, Fn fn) {
  return Causal<State, Fn>{std::move(initial), std::move(fn)};
}

template <class P, class A>
concept ProcessFor = requires(const P& p, const A& a, typename P::state_type& s) {
  { p.fn(a, s).cont } -> std::convertible_to<bool>;
  p.fn(a, s).value;
};

template <class P, class A>
  requires ProcessFor<P, A>
using output_t = typename std::invoke_result_t<const typename P::fn_type&, const A&,
                                               typename P::state_type&>::value_type;

/// Lifts a pure function to a stateless process.
template <class F>
auto arr(F f) {
  return make_causal(Unit{}, [f](const auto& a, Unit&) { return emit(f(a)); });
}

inline auto identity() {
  return arr([](const auto& a) { return a; });
}

/// Serial composition: run `f`, feed its output to `g`.
template <class S1, class F1, class S2, class F2>
auto compose(const Causal<S1, F1>& f, const Causal<S2, F2>& g) {
  using S = std::pair<S1, S2>;
  return make_causal(S{f.initial, g.initial}, [ff = f.fn, gf = g.fn](const auto& a, S& s) {
    auto r1 = ff(a, s.first);
    auto r2 = gf(r1.value, s.second);
    return Step<typename decltype(r2)::value_type>{r1.cont && r2.cont, std::move(r2.value)};
  });
}

/// `f >> g` reads left to right like a data flow: f first, then g.
template <class S1, class F1, class S2, class F2>
auto operator>>(const Causal<S1, F1>& f, const Causal<S2, F2>& g) {
  return compose(f, g);
}

/// Applies `f` to the first component of a pair, passing the second through.
template <class S, class F>
auto first(const Causal<S, F>& f) {
  return make_causal(f.initial, [ff = f.fn](const auto& ac, S& s) {
    auto r = ff(ac.first, s);
    using B = typename decltype(r)::value_type;
    using C = std::decay_t<decltype(ac.second)>;
    return Step<std::pair<B, C>>{r.cont, {std::move(r.value), ac.second}};
  });
}

template <class S, class F>
auto second(const Causal<S, F>& f) {
  return make_causal(f.initial, [ff = f.fn](const auto& ca, S& s) {
    auto r = ff(ca.second, s);
    using B = typename decltype(r)::value_type;
    using C = std::decay_t<decltype(ca.first)>;
    return Step<std::pair<C, B>>{r.cont, {ca.first, std::move(r.value)}};
  });
}

inline auto swap_pair() {
  return arr([](const auto& p) { return std::pair(p.second, p.first); });
}

inline auto fanout() {
  return arr([](const auto& x) { return std::pair(x, x); });
}

/// Stateless pairwise addition.
inline auto mix_proc() {
  return arr([](const auto& p) { return p.first + p.second; });
}

/// Runs a process over a generator. The result is a plain generator; the
/// source is stepped exactly once per output sample. Call it qualified:
/// argument-dependent lookup also finds std::apply.
template <class S, class F, SignalGenerator G>
auto apply(const Causal<S, F>& f, const G& g) {
  using St = std::pair<typename G::state_type, S>;
  return make_generator(St{g.initial, f.initial}, [gn = g.next, ff = f.fn](St& s) {
    auto rg = gn(s.first);
    auto rf = ff(rg.value, s.second);
    return Step<typename decltype(rf)::value_type>{rg.cont && rf.cont, std::move(rf.value)};
  });
}

/// Passes through the first n inputs, then stops.
inline auto take(std::uint64_t n) {
  return make_causal(n, [](const auto& a, std::uint64_t& remaining) {
    const bool cont = remaining > 0;
    if (cont) --remaining;
    return Step<std::decay_t<decltype(a)>>{cont, a};
  });
}

/// One-sample delay: init, x[0], x[1], ...
template <class A>
auto delay1(A init) {
  return make_causal(std::move(init), [](const A& x, A& previous) {
    A out = std::move(previous);
    previous = x;
    return emit(std::move(out));
  });
}

template <class A>
struct DelayLine {
  std::vector<A> ring;
  std::size_t pos = 0;
};

/// n-sample delay backed by a ring buffer of length n.
template <class A>
auto delay_n(std::size_t n, A init) {
  if (n == 0) throw std::invalid_argument("delay_n: delay must be at least one sample");
  return make_causal(DelayLine<A>{std::vector<A>(n, init), 0}, [](const A& x, DelayLine<A>& d) {
    A out = d.ring[d.pos];
    d.ring[d.pos] = x;
    if (++d.pos == d.ring.size()) d.pos = 0;
    return emit(std::move(out));
  });
}

/// Feedback. The body maps (input, fed_back) to (output, feed); `feed`
/// reaches the body's input one step later, starting from `init`. Evaluating a
/// tick never needs that tick's own output, so no fixpoint is involved. If the
/// body stops, the stop propagates and the final feed value is discarded.
template <class C, class S, class F>
auto loop(C init, const Causal<S, F>& body) {
  using St = std::pair<S, C>;
  return make_causal(St{body.initial, std::move(init)}, [bf = body.fn](const auto& a, St& s) {
    using A = std::decay_t<decltype(a)>;
    auto r = bf(std::pair<A, C>(a, s.second), s.first);
    s.second = std::move(r.value.second);
    using B = std::decay_t<decltype(r.value.first)>;
    return Step<B>{r.cont, std::move(r.value.first)};
  });
}

/// Oscillator whose frequency (cycles/sample) arrives as the process input:
/// causal with respect to the frequency control.
template <std::floating_point T = float, class Wave>
auto osci_fm(Wave wave, double phase0) {
  check_oscillator(phase0, 0.0);
  return make_causal(Phase::from_cycles(phase0), [wave](const T& freq, std::uint32_t& phase) {
    auto y = wave(Phase::value<T>(phase));
    phase += Phase::from_cycles(freq);
    return emit(y);
  });
}

}  // namespace fusedsp

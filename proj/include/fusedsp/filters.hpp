#pragma once

// Recursive filters with explicit, opaque parameter records. Filtering is split
// into parameter generation, parameter resampling and the filter proper; each
// parameter type only fits the filters it was made for.

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "fusedsp/causal.hpp"
#include "fusedsp/generator.hpp"

namespace fusedsp {

/// Feedback factor k of y[t] = x[t] + k*y[t-1].
template <std::floating_point T = float>
class FirstOrderParam {
 public:
  FirstOrderParam() = default;

  /// Requires |k| < 1.
  static FirstOrderParam stable(T k) {
    if (!(std::abs(k) < T(1))) {
      throw std::invalid_argument("FirstOrderParam: |k| must be below 1, got " + std::to_string(k));
    }
    return unchecked(k);
  }

  /// No stability check; |k| >= 1 makes the recursion grow without bound.
  static constexpr FirstOrderParam unchecked(T k) {
    FirstOrderParam p;
    p.k_ = k;
    return p;
  }

  constexpr T k() const { return k_; }

  template <std::floating_point U>
  constexpr FirstOrderParam<U> cast() const {
    return FirstOrderParam<U>::unchecked(static_cast<U>(k_));
  }

  friend constexpr bool operator==(const FirstOrderParam&, const FirstOrderParam&) = default;

 private:
  T k_ = 0;
};

/// Transfer function (n0 + n1 z^-1 + n2 z^-2) / (1 - a z^-1 + b z^-2). The
/// purely recursive form has numerator 1.
template <std::floating_point T = float>
class SecondOrderParam {
 public:
  SecondOrderParam() = default;

  static constexpr bool poles_inside_unit_circle(double a, double b) {
    return std::abs(b) < 1.0 && std::abs(a) < 1.0 + b;
  }

  static SecondOrderParam recursive(T a, T b) { return biquad(T(1), T(0), T(0), a, b); }

  static SecondOrderParam biquad(T n0, T n1, T n2, T a, T b) {
    if (!poles_inside_unit_circle(a, b)) {
      throw std::invalid_argument("SecondOrderParam: poles of 1 - a z^-1 + b z^-2 not inside the "
                                  "unit circle (a=" + std::to_string(a) + ", b=" +
                                  std::to_string(b) + ")");
    }
    return unchecked(n0, n1, n2, a, b);
  }

  static constexpr SecondOrderParam unchecked(T n0, T n1, T n2, T a, T b) {
    SecondOrderParam p;
    p.n0_ = n0;
    p.n1_ = n1;
    p.n2_ = n2;
    p.a_ = a;
    p.b_ = b;
    return p;
  }

  static constexpr SecondOrderParam unchecked_recursive(T a, T b) {
    return unchecked(T(1), T(0), T(0), a, b);
  }

  constexpr T a() const { return a_; }
  constexpr T b() const { return b_; }
  constexpr T n0() const { return n0_; }
  constexpr T n1() const { return n1_; }
  constexpr T n2() const { return n2_; }

  template <std::floating_point U>
  constexpr SecondOrderParam<U> cast() const {
    return SecondOrderParam<U>::unchecked(static_cast<U>(n0_), static_cast<U>(n1_),
                                          static_cast<U>(n2_), static_cast<U>(a_),
                                          static_cast<U>(b_));
  }

  friend constexpr bool operator==(const SecondOrderParam&, const SecondOrderParam&) = default;

 private:
  T n0_ = 1, n1_ = 0, n2_ = 0;
  T a_ = 0, b_ = 0;
};

/// Coefficient of the first-order allpass y[t] = k*x[t] + x[t-1] - k*y[t-1].
template <std::floating_point T = float>
class AllpassParam {
 public:
  AllpassParam() = default;

  static AllpassParam stable(T k) {
    if (!(std::abs(k) < T(1))) {
      throw std::invalid_argument("AllpassParam: |k| must be below 1, got " + std::to_string(k));
    }
    AllpassParam p;
    p.k_ = k;
    return p;
  }

  constexpr T k() const { return k_; }

  friend constexpr bool operator==(const AllpassParam&, const AllpassParam&) = default;

 private:
  T k_ = 0;
};

// Componentwise interpolation, used by resample_linear.
template <std::floating_point T>
T interpolate(T p, T q, T t) {
  return p + (q - p) * t;
}

template <std::floating_point T>
FirstOrderParam<T> interpolate(const FirstOrderParam<T>& p, const FirstOrderParam<T>& q, T t) {
  return FirstOrderParam<T>::unchecked(interpolate(p.k(), q.k(), t));
}

template <std::floating_point T>
SecondOrderParam<T> interpolate(const SecondOrderParam<T>& p, const SecondOrderParam<T>& q, T t) {
  return SecondOrderParam<T>::unchecked(interpolate(p.n0(), q.n0(), t), interpolate(p.n1(), q.n1(), t),
                                        interpolate(p.n2(), q.n2(), t), interpolate(p.a(), q.a(), t),
                                        interpolate(p.b(), q.b(), t));
}

template <std::floating_point T>
AllpassParam<T> interpolate(const AllpassParam<T>& p, const AllpassParam<T>& q, T t) {
  return AllpassParam<T>::stable(interpolate(p.k(), q.k(), t));
}

template <class P>
struct param_scalar {
  using type = P;
};
template <class T>
struct param_scalar<FirstOrderParam<T>> {
  using type = T;
};
template <class T>
struct param_scalar<SecondOrderParam<T>> {
  using type = T;
};
template <class T>
struct param_scalar<AllpassParam<T>> {
  using type = T;
};
template <class P>
using param_scalar_t = typename param_scalar<P>::type;

// ---------------------------------------------------------------------------
// per-sample kernels, shared by fixed and controlled filters

template <class T>
struct BiquadState {
  T x1 = 0, x2 = 0, y1 = 0, y2 = 0;
};

template <class T>
inline T first_order_step(T k, T x, T& y1) {
  const T y = x + k * y1;
  y1 = y;
  return y;
}

template <class T>
inline T biquad_step(const SecondOrderParam<T>& p, T x, BiquadState<T>& s) {
  const T y = p.n0() * x + p.n1() * s.x1 + p.n2() * s.x2 + p.a() * s.y1 - p.b() * s.y2;
  s.x2 = s.x1;
  s.x1 = x;
  s.y2 = s.y1;
  s.y1 = y;
  return y;
}

template <class T>
struct AllpassState {
  T x1 = 0, y1 = 0;
};

template <class T>
inline T allpass_step(T k, T x, AllpassState<T>& s) {
  const T y = k * x + s.x1 - k * s.y1;
  s.x1 = x;
  s.y1 = y;
  return y;
}

// ---------------------------------------------------------------------------
// fixed-parameter filters; all start from silent history

template <class T>
auto first_order_recursive(FirstOrderParam<T> p) {
  return make_causal(T(0), [k = p.k()](const T& x, T& y1) { return emit(first_order_step(k, x, y1)); });
}

/// Unity-DC-gain lowpass y[t] = (1-k) x[t] + k y[t-1].
template <class T>
auto first_order_lowpass(FirstOrderParam<T> p) {
  const T gain = T(1) - p.k();
  return make_causal(T(0), [gain, k = p.k()](const T& x, T& y1) {
    return emit(first_order_step(k, gain * x, y1));
  });
}

/// y[t] = n0 x[t] + n1 x[t-1] + n2 x[t-2] + a y[t-1] - b y[t-2].
template <class T>
auto second_order_recursive(SecondOrderParam<T> p) {
  return make_causal(BiquadState<T>{}, [p](const T& x, BiquadState<T>& s) {
    return emit(biquad_step(p, x, s));
  });
}

template <class T>
auto allpass(AllpassParam<T> p) {
  return make_causal(AllpassState<T>{}, [k = p.k()](const T& x, AllpassState<T>& s) {
    return emit(allpass_step(k, x, s));
  });
}

/// n identical first-order allpasses in series.
template <class T>
auto allpass_cascade(std::size_t stages, AllpassParam<T> p) {
  if (stages == 0) throw std::invalid_argument("allpass_cascade: need at least one stage");
  using S = std::vector<AllpassState<T>>;
  return make_causal(S(stages), [k = p.k()](const T& x, S& s) {
    T y = x;
    for (auto& st : s) y = allpass_step(k, y, st);
    return emit(y);
  });
}

template <class T, std::size_t Sections>
auto biquad_cascade(const std::array<SecondOrderParam<T>, Sections>& sections) {
  using S = std::array<BiquadState<T>, Sections>;
  return make_causal(S{}, [sections](const T& x, S& s) __attribute__((flatten)) {
    T y = x;
    for (std::size_t i = 0; i < Sections; ++i) y = biquad_step(sections[i], y, s[i]);
    return emit(y);
  });
}

template <class T>
auto biquad_cascade(std::vector<SecondOrderParam<T>> sections) {
  using S = std::vector<BiquadState<T>>;
  S initial(sections.size());
  return make_causal(std::move(initial), [sections = std::move(sections)](const T& x, S& s) __attribute__((flatten)) {
    T y = x;
    for (std::size_t i = 0; i < sections.size(); ++i) y = biquad_step(sections[i], y, s[i]);
    return emit(y);
  });
}

// ---------------------------------------------------------------------------
// controlled filters: the input is a (parameter, sample) pair per tick

template <class T>
auto first_order_controlled() {
  return make_causal(T(0), [](const auto& in, T& y1) {
    const FirstOrderParam<T>& p = in.first;
    return emit(first_order_step(p.k(), static_cast<T>(in.second), y1));
  });
}

template <class T>
auto second_order_controlled() {
  return make_causal(BiquadState<T>{}, [](const auto& in, BiquadState<T>& s) {
    const SecondOrderParam<T>& p = in.first;
    return emit(biquad_step(p, static_cast<T>(in.second), s));
  });
}

template <class T, std::size_t Sections>
auto biquad_cascade_controlled() {
  using S = std::array<BiquadState<T>, Sections>;
  return make_causal(S{}, [](const auto& in, S& s) __attribute__((flatten)) {
    const std::array<SecondOrderParam<T>, Sections>& p = in.first;
    T y = in.second;
    for (std::size_t i = 0; i < Sections; ++i) y = biquad_step(p[i], y, s[i]);
    return emit(y);
  });
}

template <class T>
auto allpass_cascade_controlled(std::size_t stages) {
  if (stages == 0) throw std::invalid_argument("allpass_cascade: need at least one stage");
  using S = std::vector<AllpassState<T>>;
  return make_causal(S(stages), [](const auto& in, S& s) __attribute__((flatten)) {
    const AllpassParam<T>& p = in.first;
    T y = in.second;
    for (auto& st : s) y = allpass_step(p.k(), y, st);
    return emit(y);
  });
}

/// A parameter stream at control rate: one value per `factor` samples.
template <SignalGenerator G>
struct ControlRated {
  G params;
  std::size_t factor = 1;
};

template <SignalGenerator G>
ControlRated<G> control_rated(G params, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("control rate factor must be at least 1");
  return {std::move(params), factor};
}

/// Each control value repeated `factor` times.
template <SignalGenerator G>
auto resample_constant(const ControlRated<G>& ctrl) {
  using P = sample_t<G>;
  struct State {
    typename G::state_type source;
    P current{};
    std::size_t remaining = 0;
  };
  return make_generator(State{ctrl.params.initial, P{}, 0},
                        [next = ctrl.params.next, factor = ctrl.factor](State& s) {
                          if (s.remaining == 0) {
                            auto r = next(s.source);
                            if (!r.cont) return halt<P>();
                            s.current = std::move(r.value);
                            s.remaining = factor;
                          }
                          --s.remaining;
                          return emit(s.current);
                        });
}

/// Componentwise linear interpolation between consecutive control values. The
/// stream ends where the control stream has no successor value.
template <SignalGenerator G>
auto resample_linear(const ControlRated<G>& ctrl) {
  using P = sample_t<G>;
  struct State {
    typename G::state_type source;
    P from{}, to{};
    std::size_t pos = 0;
    bool primed = false;
  };
  return make_generator(
      State{ctrl.params.initial}, [next = ctrl.params.next, factor = ctrl.factor](State& s) {
        if (!s.primed) {
          auto r0 = next(s.source);
          if (!r0.cont) return halt<P>();
          auto r1 = next(s.source);
          if (!r1.cont) return halt<P>();
          s.from = std::move(r0.value);
          s.to = std::move(r1.value);
          s.primed = true;
        } else if (s.pos == factor) {
          auto r = next(s.source);
          if (!r.cont) return halt<P>();
          s.from = std::move(s.to);
          s.to = std::move(r.value);
          s.pos = 0;
        }
        using T = param_scalar_t<P>;
        const T t = static_cast<T>(s.pos) / static_cast<T>(factor);
        ++s.pos;
        return emit(interpolate(s.from, s.to, t));
      });
}

/// Runs `family` (a process over (parameter, sample) pairs) with parameters
/// drawn from a sample-rate parameter stream. Exhausting the parameter stream
/// ends the process.
template <SignalGenerator G, class S, class F>
auto controlled_filter(const G& params, const Causal<S, F>& family) {
  using St = std::pair<typename G::state_type, S>;
  return make_causal(St{params.initial, family.initial},
                     [pn = params.next, ff = family.fn](const auto& x, St& s) {
                       auto rp = pn(s.first);
                       using X = std::decay_t<decltype(x)>;
                       using P = typename decltype(rp)::value_type;
                       auto r = ff(std::pair<const P&, const X&>(rp.value, x), s.second);
                       return Step<typename decltype(r)::value_type>{rp.cont && r.cont,
                                                                     std::move(r.value)};
                     });
}

/// Same as controlled_filter(resample_constant(ctrl), family), but the held
/// parameter is passed by reference instead of being copied every sample.
template <SignalGenerator G, class S, class F>
auto controlled_filter(const ControlRated<G>& ctrl, const Causal<S, F>& family) {
  using P = sample_t<G>;
  struct State {
    typename G::state_type source;
    P current{};
    std::size_t remaining = 0;
    S filter;
  };
  return make_causal(State{ctrl.params.initial, P{}, 0, family.initial},
                     [pn = ctrl.params.next, factor = ctrl.factor, ff = family.fn](const auto& x,
                                                                                   State& s) {
                       using X = std::decay_t<decltype(x)>;
                       using B = typename decltype(ff(std::pair<const P&, const X&>(s.current, x),
                                                      s.filter))::value_type;
                       if (s.remaining == 0) {
                         auto r = pn(s.source);
                         if (!r.cont) return halt<B>();
                         s.current = std::move(r.value);
                         s.remaining = factor;
                       }
                       --s.remaining;
                       return ff(std::pair<const P&, const X&>(s.current, x), s.filter);
                     });
}

// ---------------------------------------------------------------------------

template <std::floating_point T = float>
struct KarplusParams {
  std::size_t delay = 100;     // feedback delay in samples
  FirstOrderParam<T> damping;  // lowpass in the feedback path
  T gain = T(0.99);            // loop gain applied after the lowpass
};

/// y[t] = x[t] + gain * lowpass(y[t - delay]). The loop contributes one sample
/// of delay, the delay line the remaining delay - 1; delay must be at least 2.
template <std::floating_point T, SignalGenerator G>
auto karplus_strong(const KarplusParams<T>& kp, const G& excitation) {
  if (kp.delay < 2) throw std::invalid_argument("karplus_strong: delay must be at least 2");
  const T gain = kp.gain;
  auto feedback = delay_n(kp.delay - 1, T(0)) >> first_order_lowpass(kp.damping) >>
                  arr([gain](const T& v) { return gain * v; });
  auto add_and_split = arr([](const std::pair<T, T>& xf) {
    const T y = xf.first + xf.second;
    return std::pair<T, T>(y, y);
  });
  return fusedsp::apply(loop(T(0), second(feedback) >> add_and_split), excitation);
}

}  // namespace fusedsp

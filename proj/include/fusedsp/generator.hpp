#pragma once

// Signal generators: an initial state plus a transition function that ships
// one sample per request while updating the state. Combinators compose the
// transition functions, so a whole signal expression renders in a single loop
// whose body the compiler sees at once.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "fusedsp/sample_traits.hpp"

namespace fusedsp {

/// One transition result. `value` is only meaningful while `cont` is true.
template <class A>
struct Step {
  using value_type = A;
  bool cont = false;
  A value{};
};

template <class A>
constexpr Step<std::decay_t<A>> emit(A&& value) {
  return {true, std::forward<A>(value)};
}

template <class A>
constexpr Step<A> halt() {
  return {false, A{}};
}

/// Empty state for stateless stages.
struct Unit {};

/// A description of a sample stream. `next` takes the run-local state by
/// reference and advances it; the definition itself is never modified, so
/// every run started from `initial` reproduces the same samples.
template <class State, class Next>
struct Generator {
  using state_type = State;
  using next_type = Next;

  State initial;
  Next next;
};

template <class S, class N>
Generator(S, N) -> Generator<S, N>;

template <class G>
concept SignalGenerator = requires(const G& g, typename G::state_type& s) {
  { g.next(s).cont } -> std::convertible_to<bool>;
  g.next(s).value;
};

template <SignalGenerator G>
using sample_t = typename std::invoke_result_t<const typename G::next_type&,
                                               typename G::state_type&>::value_type;

template <class A>
using SampleBuffer = std::vector<A>;

struct RenderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class State, class Next>
constexpr auto make_generator(State initial, Next next) {
  return Generator<State, Next>{std::move(initial), std::move(next)};
}

// ---------------------------------------------------------------------------
// phases

/// x - floor(x), folded into [0, 1) even where rounding would produce 1.
template <std::floating_point T>
T fraction(T x) {
  const T r = x - std::floor(x);
  return r < T(1) ? r : T(0);
}

/// Oscillator phase as a 32-bit fixed-point fraction of a cycle. Wrapping to
/// [0, 1) is unsigned overflow, which keeps phase accumulation exact and
/// therefore identical between scalar and lane-interleaved oscillators.
struct Phase {
  static constexpr double kScale = 4294967296.0;  // 2^32

  static std::uint32_t from_cycles(double x) {
    const double f = fraction(x);
    return static_cast<std::uint32_t>(
        static_cast<std::uint64_t>(std::llround(f * kScale)) & 0xffffffffu);
  }

  /// Real phase in [0,1). Truncated to the mantissa width of T so the
  /// conversion is exact.
  template <std::floating_point T>
  static T value(std::uint32_t bits) {
    constexpr int digits = std::numeric_limits<T>::digits;
    if constexpr (digits >= 32) {
      return static_cast<T>(bits) * static_cast<T>(1.0 / kScale);
    } else {
      constexpr int drop = 32 - digits;
      return static_cast<T>(static_cast<std::int32_t>(bits >> drop)) *
             static_cast<T>(std::ldexp(1.0, -digits));
    }
  }
};

// ---------------------------------------------------------------------------
// waveforms; templated on the phase type so they work on lane vectors too

struct SawWave {
  template <class P>
  P operator()(const P& phase) const {
    return P(1) - P(2) * phase;
  }
};

struct SineWave {
  template <class P>
  P operator()(const P& phase) const {
    if constexpr (std::is_floating_point_v<P>) {
      return static_cast<P>(std::sin(2.0 * 3.14159265358979323846 * phase));
    } else {
      return P::generate([&](std::size_t i) { return (*this)(phase[i]); });
    }
  }
};

struct IdentityWave {
  template <class P>
  P operator()(const P& phase) const {
    return phase;
  }
};

inline constexpr SawWave saw_wave{};
inline constexpr SineWave sine_wave{};
inline constexpr IdentityWave identity_wave{};

// ---------------------------------------------------------------------------
// primitive generators

template <class T>
auto constant(T value) {
  return make_generator(Unit{}, [value](Unit&) { return emit(value); });
}

template <class T>
auto silence() {
  return constant(T(0));
}

/// amp, amp*r, amp*r^2, ... with the decay factor fixed at definition time.
template <class T>
auto exponential_decay(T amp, T decay) {
  return make_generator(amp, [decay](T& y) {
    const T out = y;
    y = y * decay;
    return emit(out);
  });
}

inline double half_life_decay(double half_life) {
  if (!(half_life > 0.0) || !std::isfinite(half_life)) {
    throw std::invalid_argument("exponential: half-life must be positive and finite, got " +
                                std::to_string(half_life));
  }
  return std::exp2(-1.0 / half_life);
}

/// amp * r^n with r = 2^(-1/half_life). The recurrence runs in double and
/// is rounded to T on output, so long envelopes do not drift.
template <class T>
auto exponential(double half_life, T amp) {
  const double r = half_life_decay(half_life);
  return make_generator(static_cast<double>(amp), [r](double& y) {
    const T out = static_cast<T>(y);
    y *= r;
    return emit(out);
  });
}

inline void check_oscillator(double phase0, double freq) {
  if (!(phase0 >= 0.0 && phase0 < 1.0)) {
    throw std::invalid_argument("osci: initial phase must lie in [0,1), got " +
                                std::to_string(phase0));
  }
  if (!std::isfinite(freq)) throw std::invalid_argument("osci: frequency must be finite");
}

/// wave(phi_n) with phi_{n+1} = fraction(phi_n + freq); freq in cycles/sample.
template <std::floating_point T = float, class Wave>
auto osci(Wave wave, double phase0, double freq) {
  check_oscillator(phase0, freq);
  const std::uint32_t increment = Phase::from_cycles(freq);
  return make_generator(Phase::from_cycles(phase0), [wave, increment](std::uint32_t& phase) {
    auto y = wave(Phase::value<T>(phase));
    phase += increment;
    return emit(y);
  });
}

/// 32-bit linear congruential generator (Numerical Recipes constants).
struct Lcg {
  static constexpr std::uint32_t multiplier = 1664525u;
  static constexpr std::uint32_t increment = 1013904223u;

  static constexpr std::uint32_t next(std::uint32_t x) { return multiplier * x + increment; }

  /// Raw state to [-1, 1) using the top 24 bits, exact in single precision.
  template <std::floating_point T>
  static T to_sample(std::uint32_t x) {
    return static_cast<T>(static_cast<std::int32_t>(x) >> 8) * static_cast<T>(1.0 / 8388608.0);
  }
};

template <std::floating_point T = float>
auto noise(std::uint32_t seed) {
  return make_generator(Lcg::next(seed), [](std::uint32_t& x) {
    const T y = Lcg::to_sample<T>(x);
    x = Lcg::next(x);
    return emit(y);
  });
}

/// start + n*slope, evaluated from the sample index (no accumulated rounding).
template <std::floating_point T = float>
auto ramp_linear(T start, T slope) {
  const double s0 = start;
  const double ds = slope;
  return make_generator(std::uint64_t{0}, [s0, ds](std::uint64_t& n) {
    const T y = static_cast<T>(s0 + ds * static_cast<double>(n));
    ++n;
    return emit(y);
  });
}

/// 1 for the first `length` samples, 0 afterwards; never terminates.
template <class T = float>
auto gate(std::uint64_t length) {
  return make_generator(std::uint64_t{0}, [length](std::uint64_t& n) {
    const T y = n < length ? T(1) : T(0);
    ++n;
    return emit(y);
  });
}

// ---------------------------------------------------------------------------
// generator transformations

template <class F, SignalGenerator G>
auto map(F f, const G& g) {
  return make_generator(g.initial, [f, next = g.next](typename G::state_type& s) {
    auto r = next(s);
    using B = std::decay_t<decltype(f(r.value))>;
    return Step<B>{r.cont, f(r.value)};
  });
}

/// Pointwise combination; stops as soon as either input stops.
template <class F, SignalGenerator GA, SignalGenerator GB>
auto zip_with(F f, const GA& a, const GB& b) {
  using S = std::pair<typename GA::state_type, typename GB::state_type>;
  return make_generator(S{a.initial, b.initial},
                        [f, na = a.next, nb = b.next](S& s) {
                          auto ra = na(s.first);
                          auto rb = nb(s.second);
                          using C = std::decay_t<decltype(f(ra.value, rb.value))>;
                          return Step<C>{ra.cont && rb.cont, f(ra.value, rb.value)};
                        });
}

template <SignalGenerator GA, SignalGenerator GB>
auto zip(const GA& a, const GB& b) {
  return zip_with([](const auto& x, const auto& y) { return std::pair(x, y); }, a, b);
}

template <SignalGenerator GE, SignalGenerator GI>
auto amplify(const GE& envelope, const GI& input) {
  return zip_with(std::multiplies<>{}, envelope, input);
}

template <SignalGenerator GA, SignalGenerator GB>
auto mix(const GA& a, const GB& b) {
  return zip_with(std::plus<>{}, a, b);
}

/// Plays back a buffer; the state is the read position.
template <class A>
auto from_buffer(SampleBuffer<A> buffer) {
  auto data = std::make_shared<const SampleBuffer<A>>(std::move(buffer));
  return make_generator(std::size_t{0}, [data](std::size_t& pos) {
    if (pos >= data->size()) return halt<A>();
    return emit((*data)[pos++]);
  });
}

/// Counts transitions into `*counter` (nothing is counted for a null
/// pointer). Instrumentation only: the counter is a plain integer, so
/// concurrent renders must use separate counters.
template <SignalGenerator G>
auto counted(const G& g, std::uint64_t* counter) {
  return make_generator(g.initial, [next = g.next, counter](typename G::state_type& s) {
    if (counter) ++*counter;
    return next(s);
  });
}

// ---------------------------------------------------------------------------
// drivers

namespace detail {

struct DriveResult {
  std::size_t produced = 0;
  bool terminated = false;
};

template <SignalGenerator G, class State>
[[gnu::always_inline]] inline DriveResult drive_local(const G& g, State& state, std::span<element_t<sample_t<G>>> out) {
  using Traits = sample_traits<sample_t<G>>;
  constexpr std::size_t width = Traits::width;
  std::size_t pos = 0;
  const std::size_t whole = out.size() - out.size() % width;
  auto* dst = out.data();
  while (pos < whole) {
    auto r = g.next(state);
    if (!r.cont) return {pos, true};
    Traits::store(r.value, dst + pos, width);
    pos += width;
  }
  if constexpr (width > 1) {
    // Tail shorter than a block: compute one more block, keep its prefix.
    if (pos < out.size()) {
      auto r = g.next(state);
      if (!r.cont) return {pos, true};
      Traits::store(r.value, dst + pos, out.size() - pos);
      pos = out.size();
    }
  }
  return {pos, false};
}

// The whole program is flattened into the loop. The state is worked on as a
// local: the output stores may alias any object reached through a reference,
// which would keep the state in memory between steps.
template <SignalGenerator G, class State>
__attribute__((flatten)) DriveResult drive(const G& g, State& state, std::span<element_t<sample_t<G>>> out) {
  State local = std::move(state);
  const DriveResult r = drive_local(g, local, out);
  state = std::move(local);
  return r;
}

}  // namespace detail

/// Writes samples into `out` until the generator stops or the buffer is full;
/// returns the number of samples written.
template <SignalGenerator G>
std::size_t render_into(const G& g, std::span<element_t<sample_t<G>>> out) {
  auto state = g.initial;
  return detail::drive(g, state, out).produced;
}

/// Pulls fixed-size chunks on demand; generator state carries over between
/// chunks. Nothing is computed before `next()` is called.
template <SignalGenerator G>
class ChunkedRender {
 public:
  using element_type = element_t<sample_t<G>>;

  ChunkedRender(G g, std::size_t chunk_size)
      : def_(std::move(g)), state_(def_.initial), chunk_size_(chunk_size) {
    constexpr std::size_t width = sample_traits<sample_t<G>>::width;
    if (chunk_size_ == 0 || chunk_size_ % width != 0) {
      throw std::invalid_argument("render_chunked: chunk size must be a positive multiple of " +
                                  std::to_string(width));
    }
  }

  std::optional<SampleBuffer<element_type>> next() {
    if (done_) return std::nullopt;
    SampleBuffer<element_type> chunk;
    try {
      chunk.resize(chunk_size_);
    } catch (const std::bad_alloc&) {
      throw RenderError("render_chunked: cannot allocate chunk of " +
                        std::to_string(chunk_size_) + " samples");
    }
    const auto r = detail::drive(def_, state_, std::span<element_type>(chunk));
    chunk.resize(r.produced);
    if (r.terminated) done_ = true;
    if (r.produced == 0) return std::nullopt;
    return chunk;
  }

  bool finished() const { return done_; }

 private:
  G def_;
  typename G::state_type state_;
  std::size_t chunk_size_;
  bool done_ = false;
};

template <SignalGenerator G>
ChunkedRender<G> render_chunked(const G& g, std::size_t chunk_size) {
  return ChunkedRender<G>(g, chunk_size);
}

/// Above this many samples render() grows its buffer chunk by chunk instead of
/// reserving max_samples up front (max_samples is a cap, not a size hint).
inline constexpr std::size_t kEagerRenderLimit = std::size_t{1} << 26;

/// Renders up to max_samples into a fresh buffer. Below kEagerRenderLimit this
/// performs exactly one allocation.
template <SignalGenerator G>
SampleBuffer<element_t<sample_t<G>>> render(const G& g, std::size_t max_samples) {
  using E = element_t<sample_t<G>>;
  SampleBuffer<E> out;
  try {
    if (max_samples <= kEagerRenderLimit) {
      out.resize(max_samples);
      out.resize(render_into(g, std::span<E>(out)));
      return out;
    }
    constexpr std::size_t width = sample_traits<sample_t<G>>::width;
    const std::size_t chunk = kEagerRenderLimit - kEagerRenderLimit % width;
    auto state = g.initial;
    while (out.size() < max_samples) {
      const std::size_t start = out.size();
      const std::size_t want = std::min(chunk, max_samples - start);
      out.resize(start + want);
      const auto r = detail::drive(g, state, std::span<E>(out.data() + start, want));
      out.resize(start + r.produced);
      if (r.terminated || r.produced < want) break;
    }
  } catch (const std::bad_alloc&) {
    throw RenderError("render: cannot allocate output buffer for " +
                      std::to_string(max_samples) + " samples");
  } catch (const std::length_error&) {
    throw RenderError("render: output buffer of " + std::to_string(max_samples) +
                      " samples exceeds the addressable size");
  }
  return out;
}

}  // namespace fusedsp

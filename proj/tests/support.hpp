#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "fusedsp/causal.hpp"
#include "fusedsp/generator.hpp"

namespace testing {

// Seeded source for the hand-rolled property generators; every failure is
// reproducible from the seed printed by the test.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  float uniform_f(float lo, float hi) { return static_cast<float>(uniform(lo, hi)); }

  template <class I = std::int64_t>
  I integer(I lo, I hi) {
    return static_cast<I>(std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_));
  }

  std::size_t index(std::size_t n) { return integer<std::size_t>(0, n - 1); }
  bool coin() { return integer<int>(0, 1) == 1; }

  std::vector<float> floats(std::size_t n, float lo = -1.0f, float hi = 1.0f) {
    std::vector<float> v(n);
    for (auto& x : v) x = uniform_f(lo, hi);
    return v;
  }

  std::vector<std::int64_t> ints(std::size_t n, std::int64_t lo, std::int64_t hi) {
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = integer(lo, hi);
    return v;
  }

  /// (a, b) with the poles of 1 - a z^-1 + b z^-2 at radius <= max_radius.
  std::pair<double, double> stable_pair(double max_radius = 0.95) {
    const double r = uniform(0.0, max_radius);
    if (coin()) {
      const double theta = uniform(0.0, 3.14159265358979);
      return {2.0 * r * std::cos(theta), r * r};
    }
    const double p = uniform(-max_radius, max_radius);
    const double q = uniform(-max_radius, max_radius);
    return {p + q, p * q};
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

template <class G>
auto take_samples(const G& g, std::size_t n) {
  return fusedsp::render(g, n);
}

/// Output of a process over a finite input.
template <class P, class A>
auto run_process(const P& p, const std::vector<A>& input) {
  return fusedsp::render(fusedsp::apply(p, fusedsp::from_buffer(input)), input.size());
}

inline std::vector<float> impulse(std::size_t n, float amp = 1.0f) {
  std::vector<float> v(n, 0.0f);
  if (n > 0) v[0] = amp;
  return v;
}

inline double rms(std::span<const float> x, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += double(x[i]) * x[i];
  return std::sqrt(acc / double(end - begin));
}

inline double energy(std::span<const float> x) {
  double acc = 0.0;
  for (float v : x) acc += double(v) * v;
  return acc;
}

/// max |a - b| / max |a| over doubles.
inline double relative_error(std::span<const double> ref, std::span<const double> got) {
  double diff = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    diff = std::max(diff, std::abs(ref[i] - got[i]));
    peak = std::max(peak, std::abs(ref[i]));
  }
  return peak > 0.0 ? diff / peak : diff;
}

// Random stateful processes on integer samples. All kinds share one C++ type,
// so randomly chosen processes compose freely.
struct ProcessSpec {
  int kind = 0;
  std::int64_t p = 0;
  std::int64_t q = 0;
};

struct ProcessState {
  std::int64_t acc = 0;
  std::vector<std::int64_t> ring;
  std::size_t pos = 0;
};

inline auto make_process(const ProcessSpec& spec) {
  ProcessState init;
  if (spec.kind == 2) init.ring.assign(static_cast<std::size_t>(spec.q), spec.p);
  if (spec.kind == 5) init.acc = spec.q;
  return fusedsp::make_causal(init, [spec](const std::int64_t& x, ProcessState& s) {
    switch (spec.kind) {
      case 0:  // affine
        return fusedsp::emit(spec.p * x + spec.q);
      case 1:  // running sum
        s.acc += x;
        return fusedsp::emit(s.acc + spec.p);
      case 2: {  // delay line
        const std::int64_t out = s.ring[s.pos];
        s.ring[s.pos] = x;
        s.pos = (s.pos + 1) % s.ring.size();
        return fusedsp::emit(out);
      }
      case 3: {  // weighted difference
        const std::int64_t out = x - spec.p * s.acc;
        s.acc = x;
        return fusedsp::emit(out);
      }
      case 4:  // data-dependent branch
        return fusedsp::emit(x % 2 == 0 ? x / 2 + spec.p : 3 * x + spec.q);
      default: {  // stops after q samples
        const bool cont = s.acc > 0;
        if (cont) --s.acc;
        return fusedsp::Step<std::int64_t>{cont, x + spec.p};
      }
    }
  });
}

inline ProcessSpec random_process_spec(Rng& rng) {
  ProcessSpec s;
  s.kind = rng.integer<int>(0, 5);
  s.p = rng.integer(-3, 3);
  s.q = s.kind == 2 ? rng.integer(1, 5) : s.kind == 5 ? rng.integer(0, 80) : rng.integer(-50, 50);
  return s;
}

// Polynomials in the filter coefficients a, b with integer coefficients, so
// the decomposition identities can be expanded symbolically.
class Sym {
 public:
  using Monomial = std::pair<int, int>;  // powers of a and b

  Sym() = default;
  Sym(std::int64_t c) {
    if (c != 0) terms_[{0, 0}] = c;
  }
  static Sym a() { return monomial(1, 0); }
  static Sym b() { return monomial(0, 1); }
  static Sym monomial(int pa, int pb, std::int64_t c = 1) {
    Sym s;
    if (c != 0) s.terms_[{pa, pb}] = c;
    return s;
  }

  friend Sym operator+(const Sym& x, const Sym& y) {
    Sym r = x;
    for (const auto& [m, c] : y.terms_) r.add(m, c);
    return r;
  }
  friend Sym operator-(const Sym& x) {
    Sym r;
    for (const auto& [m, c] : x.terms_) r.terms_[m] = -c;
    return r;
  }
  friend Sym operator-(const Sym& x, const Sym& y) { return x + (-y); }
  friend Sym operator*(const Sym& x, const Sym& y) {
    Sym r;
    for (const auto& [mx, cx] : x.terms_)
      for (const auto& [my, cy] : y.terms_) r.add({mx.first + my.first, mx.second + my.second}, cx * cy);
    return r;
  }
  friend bool operator==(const Sym& x, const Sym& y) { return x.terms_ == y.terms_; }

 private:
  void add(Monomial m, std::int64_t c) {
    const std::int64_t v = terms_[m] + c;
    if (v == 0) {
      terms_.erase(m);
    } else {
      terms_[m] = v;
    }
  }

  std::map<Monomial, std::int64_t> terms_;
};

}  // namespace testing

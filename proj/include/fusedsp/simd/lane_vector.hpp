#pragma once

// Fixed-width sample packs backed by GCC/Clang vector extensions. For serial
// vectorisation lane 0 holds the earliest sample of a block.

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

#include "fusedsp/sample_traits.hpp"

// Block kernels are small but used many times per program; GCC's inliner
// otherwise stops at the size limit and passes vectors through memory.
#define FUSEDSP_INLINE [[gnu::always_inline]] inline
// For lambdas and per-block functions: inline everything they call.
#define FUSEDSP_FLATTEN __attribute__((flatten))

namespace fusedsp::simd {

namespace detail {

template <class T>
using lane_index_t = std::conditional_t<sizeof(T) == 4, std::int32_t,
                     std::conditional_t<sizeof(T) == 8, std::int64_t, void>>;

template <class T, std::size_t N>
struct native_vector {
  typedef T type __attribute__((vector_size(N * sizeof(T))));
};

}  // namespace detail

template <class T, std::size_t N>
class LaneVector {
  static_assert(N >= 2 && std::has_single_bit(N), "lane count must be a power of two");
  static_assert(std::is_arithmetic_v<T>);

 public:
  using value_type = T;
  using native_type = typename detail::native_vector<T, N>::type;
  static constexpr std::size_t width = N;

  LaneVector() = default;
  // Broadcast. Implicit so scalar operands mix naturally: `T(1) - T(2) * v`.
  LaneVector(T scalar) : v_(scalar - native_type{}) {}
  explicit LaneVector(native_type v) : v_(v) {}

  static LaneVector from_array(const std::array<T, N>& a) {
    LaneVector r;
    std::memcpy(&r.v_, a.data(), sizeof(native_type));
    return r;
  }

  template <class F>
  static LaneVector generate(F f) {
    LaneVector r;
    for (std::size_t i = 0; i < N; ++i) r.v_[i] = f(i);
    return r;
  }

  static LaneVector load(const T* src) {
    LaneVector r;
    std::memcpy(&r.v_, src, sizeof(native_type));
    return r;
  }

  void store(T* dst) const { std::memcpy(dst, &v_, sizeof(native_type)); }

  std::array<T, N> to_array() const {
    std::array<T, N> a;
    std::memcpy(a.data(), &v_, sizeof(native_type));
    return a;
  }

  T operator[](std::size_t i) const { return v_[i]; }
  void set(std::size_t i, T value) { v_[i] = value; }

  const native_type& native() const { return v_; }

  friend LaneVector operator+(const LaneVector& a, const LaneVector& b) { return LaneVector(a.v_ + b.v_); }
  friend LaneVector operator-(const LaneVector& a, const LaneVector& b) { return LaneVector(a.v_ - b.v_); }
  friend LaneVector operator*(const LaneVector& a, const LaneVector& b) { return LaneVector(a.v_ * b.v_); }
  friend LaneVector operator/(const LaneVector& a, const LaneVector& b) { return LaneVector(a.v_ / b.v_); }
  friend LaneVector operator-(const LaneVector& a) { return LaneVector(-a.v_); }

  LaneVector& operator+=(const LaneVector& o) { v_ += o.v_; return *this; }
  LaneVector& operator*=(const LaneVector& o) { v_ *= o.v_; return *this; }

  friend bool operator==(const LaneVector& a, const LaneVector& b) {
    for (std::size_t i = 0; i < N; ++i)
      if (a.v_[i] != b.v_[i]) return false;
    return true;
  }

 private:
  native_type v_{};
};

template <class T>
struct is_lane_vector : std::false_type {};
template <class T, std::size_t N>
struct is_lane_vector<LaneVector<T, N>> : std::true_type {};
template <class T>
inline constexpr bool is_lane_vector_v = is_lane_vector<T>::value;

/// Lane-wise conversion between element types of equal lane count.
template <class To, class From, std::size_t N>
LaneVector<To, N> convert(const LaneVector<From, N>& v) {
  return LaneVector<To, N>(
      __builtin_convertvector(v.native(), typename LaneVector<To, N>::native_type));
}

template <class T, std::size_t N>
LaneVector<T, N> shift_right_bits(const LaneVector<T, N>& v, int bits) {
  return LaneVector<T, N>(v.native() >> bits);
}

// ---------------------------------------------------------------------------
// lane shifts

/// Moves lanes `Shift` positions towards higher indices; the lowest `Shift`
/// lanes become zero.
template <std::size_t Shift, class T, std::size_t N>
FUSEDSP_INLINE LaneVector<T, N> shift_up(const LaneVector<T, N>& v) {
  if constexpr (Shift == 0) {
    return v;
  } else if constexpr (Shift >= N) {
    return LaneVector<T, N>();
  } else {
#if defined(__clang__)
    using native = typename LaneVector<T, N>::native_type;
    return [&]<std::size_t... I>(std::index_sequence<I...>) {
      return LaneVector<T, N>(static_cast<native>(__builtin_shufflevector(
          v.native(), native{}, static_cast<int>(I >= Shift ? I - Shift : N)...)));
    }(std::make_index_sequence<N>{});
#else
    using I = detail::lane_index_t<T>;
    typedef I mask_t __attribute__((vector_size(N * sizeof(T))));
    constexpr mask_t mask = []<std::size_t... K>(std::index_sequence<K...>) {
      return mask_t{static_cast<I>(K >= Shift ? K - Shift : N)...};
    }(std::make_index_sequence<N>{});
    return LaneVector<T, N>(
        __builtin_shuffle(v.native(), typename LaneVector<T, N>::native_type{}, mask));
#endif
  }
}

/// Like shift_up, but the vacated low lanes are filled with the top `Shift`
/// lanes of `previous`: the block-crossing view `x[t - Shift]`.
template <std::size_t Shift, class T, std::size_t N>
FUSEDSP_INLINE LaneVector<T, N> shift_in(const LaneVector<T, N>& current, const LaneVector<T, N>& previous) {
  if constexpr (Shift == 0) {
    return current;
  } else if constexpr (Shift == N) {
    return previous;
  } else {
    static_assert(Shift < N);
#if defined(__clang__)
    using native = typename LaneVector<T, N>::native_type;
    return [&]<std::size_t... I>(std::index_sequence<I...>) {
      return LaneVector<T, N>(static_cast<native>(__builtin_shufflevector(
          previous.native(), current.native(),
          static_cast<int>(I < Shift ? N - Shift + I : N + I - Shift)...)));
    }(std::make_index_sequence<N>{});
#else
    using I = detail::lane_index_t<T>;
    typedef I mask_t __attribute__((vector_size(N * sizeof(T))));
    constexpr mask_t mask = []<std::size_t... K>(std::index_sequence<K...>) {
      return mask_t{static_cast<I>(K < Shift ? N - Shift + K : N + K - Shift)...};
    }(std::make_index_sequence<N>{});
    return LaneVector<T, N>(__builtin_shuffle(previous.native(), current.native(), mask));
#endif
  }
}

/// Every lane set to lane `Lane` of v.
template <std::size_t Lane, class T, std::size_t N>
FUSEDSP_INLINE LaneVector<T, N> broadcast_lane(const LaneVector<T, N>& v) {
  static_assert(Lane < N);
#if defined(__clang__)
  return [&]<std::size_t... I>(std::index_sequence<I...>) {
    return LaneVector<T, N>(static_cast<typename LaneVector<T, N>::native_type>(
        __builtin_shufflevector(v.native(), v.native(), static_cast<int>(I * 0 + Lane)...)));
  }(std::make_index_sequence<N>{});
#else
  using I = detail::lane_index_t<T>;
  typedef I mask_t __attribute__((vector_size(N * sizeof(T))));
  constexpr mask_t mask = []<std::size_t... K>(std::index_sequence<K...>) {
    return mask_t{static_cast<I>(K * 0 + Lane)...};
  }(std::make_index_sequence<N>{});
  return LaneVector<T, N>(__builtin_shuffle(v.native(), mask));
#endif
}

/// Runtime-amount shift_up; n must not exceed the lane count.
template <class T, std::size_t N>
LaneVector<T, N> shift_up(const LaneVector<T, N>& v, std::size_t n) {
  if (n > N) {
    throw std::invalid_argument("shift_up: shift " + std::to_string(n) + " exceeds " +
                                std::to_string(N) + " lanes");
  }
  LaneVector<T, N> r;
  for (std::size_t i = n; i < N; ++i) r.set(i, v[i - n]);
  return r;
}

/// Runtime-amount shift_in, 0 <= n <= N.
template <class T, std::size_t N>
LaneVector<T, N> shift_in(const LaneVector<T, N>& current, const LaneVector<T, N>& previous,
                          std::size_t n) {
  if (n > N) {
    throw std::invalid_argument("shift_in: shift " + std::to_string(n) + " exceeds " +
                                std::to_string(N) + " lanes");
  }
  std::array<T, 2 * N> joined;
  previous.store(joined.data());
  current.store(joined.data() + N);
  return LaneVector<T, N>::load(joined.data() + N - n);
}

/// Lanes moved toward lane 0 by n, zero-filled at the top; 0 <= n <= N.
template <class T, std::size_t N>
LaneVector<T, N> shift_down(const LaneVector<T, N>& v, std::size_t n) {
  if (n > N) {
    throw std::invalid_argument("shift_down: shift " + std::to_string(n) + " exceeds " +
                                std::to_string(N) + " lanes");
  }
  std::array<T, 2 * N> joined{};
  v.store(joined.data());
  return LaneVector<T, N>::load(joined.data() + n);
}

/// Lanes below `split` from `low`, the rest from `high`.
template <class T, std::size_t N>
LaneVector<T, N> blend_at(const LaneVector<T, N>& low, const LaneVector<T, N>& high, std::size_t split) {
  return LaneVector<T, N>::generate([&](std::size_t i) { return i < split ? low[i] : high[i]; });
}

/// Calls f(std::integral_constant<std::size_t, I>{}) for I = 0 .. Count-1.
template <std::size_t Count, class F>
[[gnu::always_inline]] constexpr void static_for(F&& f) {
  [&]<std::size_t... I>(std::index_sequence<I...>) __attribute__((always_inline)) {
    (f(std::integral_constant<std::size_t, I>{}), ...);
  }(std::make_index_sequence<Count>{});
}

inline constexpr std::size_t log2_lanes(std::size_t n) {
  return static_cast<std::size_t>(std::countr_zero(n));
}

/// Inclusive prefix sum by log2(N) shift-add rounds:
/// x <- x + shift_up(x, 1), x <- x + shift_up(x, 2), ...
template <class T, std::size_t N>
LaneVector<T, N> cum_sum(LaneVector<T, N> v) {
  static_for<log2_lanes(N)>([&](auto j) { v = v + shift_up<(std::size_t{1} << j())>(v); });
  return v;
}

}  // namespace fusedsp::simd

namespace fusedsp {

template <class T, std::size_t N>
struct sample_traits<simd::LaneVector<T, N>> {
  using element_type = T;
  static constexpr std::size_t width = N;

  static void store(const simd::LaneVector<T, N>& v, T* dst, std::size_t count) {
    if (count >= N) {
      v.store(dst);
    } else {
      for (std::size_t i = 0; i < count; ++i) dst[i] = v[i];
    }
  }
};

}  // namespace fusedsp

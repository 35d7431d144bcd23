#pragma once

#include <cstddef>

namespace fusedsp {

// How a generator's sample type maps onto the flat output buffer. Scalars
// occupy one slot; lane vectors (see simd/lane_vector.hpp) occupy `width`
// consecutive slots, lane 0 earliest.
template <class A>
struct sample_traits {
  using element_type = A;
  static constexpr std::size_t width = 1;

  static void store(const A& value, element_type* dst, std::size_t count = 1) {
    if (count > 0) *dst = value;
  }
};

template <class A>
using element_t = typename sample_traits<A>::element_type;

}  // namespace fusedsp

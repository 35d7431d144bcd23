// Counts heap allocations made while rendering. Kept out of the doctest
// binaries because the replacement operator new is global.
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <new>

#include "fusedsp/causal.hpp"
#include "fusedsp/filters.hpp"
#include "fusedsp/generator.hpp"
#include "fusedsp/simd/vector_engine.hpp"

namespace {
std::atomic<long> allocations{0};
}

void* operator new(std::size_t n) {
  ++allocations;
  if (void* p = std::malloc(n ? n : 1)) return p;
  throw std::bad_alloc();
}
void operator delete(void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }

namespace {

int failures = 0;

template <class F>
void expect_allocations(const char* what, long expected, F&& f) {
  const long before = allocations.load();
  const std::size_t n = f();
  const long got = allocations.load() - before;
  const bool ok = got == expected;
  if (!ok) ++failures;
  std::printf("%s %s: %ld allocation(s) for %zu samples, expected %ld\n", ok ? "ok  " : "FAIL", what, got, n,
              expected);
}

}  // namespace

int main() {
  using namespace fusedsp;
  expect_allocations("amplify(exponential, osci)", 1, [] {
    return render(amplify(exponential<float>(5000.0, 1.0f), osci<float>(saw_wave, 0.0, 0.01)), 1'000'000).size();
  });
  expect_allocations("noise through a biquad cascade", 1, [] {
    const auto p = SecondOrderParam<float>::recursive(1.2f, 0.5f);
    return render(fusedsp::apply(biquad_cascade(std::array{p, p, p}), noise<float>(7)), 500'000).size();
  });
  expect_allocations("vector saw", 1, [] {
    return render(simd::osci_vec_serial<8, float>(saw_wave, 0.0, 0.01), 500'000).size();
  });
  std::vector<float> buffer(4096);
  expect_allocations("render_into a caller buffer", 0, [&] {
    return render_into(fusedsp::apply(first_order_lowpass(FirstOrderParam<float>::stable(0.9f)), noise<float>(3)),
                       std::span<float>(buffer));
  });
  return failures == 0 ? 0 : 1;
}

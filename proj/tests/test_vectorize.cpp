#include <doctest.h>

#include <array>
#include <boost/rational.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fusedsp/compare.hpp"
#include "fusedsp/filter_design.hpp"
#include "fusedsp/filters.hpp"
#include "fusedsp/simd/decomposition.hpp"
#include "fusedsp/simd/vector_engine.hpp"
#include "support.hpp"

using namespace fusedsp;
using namespace fusedsp::simd;
using doctest::Approx;
using testing::impulse;
using testing::Rng;
using testing::run_process;
using testing::Sym;
using testing::take_samples;

namespace {

using V4 = LaneVector<float, 4>;
using I4 = LaneVector<std::int32_t, 4>;
using I8 = LaneVector<std::int32_t, 8>;
using Q = boost::rational<std::int64_t>;

template <std::size_t N, class T>
std::vector<LaneVector<T, N>> pack(const std::vector<T>& xs) {
  std::vector<LaneVector<T, N>> out;
  for (std::size_t i = 0; i + N <= xs.size(); i += N) out.push_back(LaneVector<T, N>::load(xs.data() + i));
  return out;
}

template <std::size_t N, class P>
std::vector<float> run_vec(const P& p, const std::vector<float>& xs) {
  return fusedsp::render(fusedsp::apply(p, from_buffer(pack<N>(xs))), xs.size());
}

double rel(const std::vector<float>& ref, const std::vector<float>& got) {
  const auto e = compare_signals(ref, got);
  return e.same_length() ? e.relative_error : 1e300;
}

template <class R>
bool all_equal(const Polynomial<R>& p, std::initializer_list<R> q) {
  return p == Polynomial<R>(q);
}

template <class T, std::size_t N>
std::array<T, N> lanes(const LaneVector<T, N>& v) {
  return v.to_array();
}

}  // namespace

TEST_CASE("lane shifts") {
  const V4 v = V4::from_array({1, 2, 3, 4});
  CHECK(lanes(shift_up<1>(v)) == std::array<float, 4>{0, 1, 2, 3});
  CHECK(shift_up<0>(v) == v);
  CHECK(shift_up<4>(v) == V4(0.0f));
  CHECK(lanes(shift_up(v, 3)) == std::array<float, 4>{0, 0, 0, 1});
  CHECK(lanes(shift_in<1>(v, V4::from_array({5, 6, 7, 8}))) == std::array<float, 4>{8, 1, 2, 3});
  CHECK(lanes(shift_down(v, 1)) == std::array<float, 4>{2, 3, 4, 0});
  CHECK(lanes(blend_at(v, V4(9.0f), 2)) == std::array<float, 4>{1, 2, 9, 9});
  CHECK(lanes(broadcast_lane<2>(v)) == std::array<float, 4>{3, 3, 3, 3});
  CHECK_THROWS_AS(shift_up(v, 5), std::invalid_argument);

  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const auto u = I8::generate([&](std::size_t) { return rng.integer<std::int32_t>(-1000, 1000); });
    const auto w = I8::generate([&](std::size_t) { return rng.integer<std::int32_t>(-1000, 1000); });
    const std::size_t a = rng.index(9), b = rng.index(9 - a);
    CHECK(shift_up(u + w, a) == shift_up(u, a) + shift_up(w, a));
    CHECK(shift_up(shift_up(u, a), b) == shift_up(u, a + b));
    // the low N-a lanes round-trip, the top a lanes come back the other way
    CHECK(shift_down(shift_up(u, a), a) + shift_up(shift_down(u, 8 - a), 8 - a) == u);
  }
}

TEST_CASE("cum_sum is a prefix sum") {
  CHECK(lanes(cum_sum(LaneVector<float, 8>(1.0f))) == std::array<float, 8>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(lanes(cum_sum(V4::from_array({2.5f, 0, 0, 0}))) == std::array<float, 4>{2.5f, 2.5f, 2.5f, 2.5f});

  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const auto v4 = I4::generate([&](std::size_t) { return rng.integer<std::int32_t>(-100000, 100000); });
    const auto s4 = cum_sum(v4);
    std::int32_t acc = 0;
    for (std::size_t i = 0; i < 4; ++i) CHECK(s4[i] == (acc += v4[i]));
    const auto v8 = I8::generate([&](std::size_t) { return rng.integer<std::int32_t>(-100000, 100000); });
    const auto s8 = cum_sum(v8);
    acc = 0;
    for (std::size_t i = 0; i < 8; ++i) CHECK(s8[i] == (acc += v8[i]));
  }
}

TEST_CASE("first_order_vec_block") {
  const V4 v = V4::from_array({0.5f, -1.0f, 2.0f, 0.25f});
  const auto [y0, c0] = first_order_vec_block(0.0f, v, 3.0f);
  CHECK(y0 == v);
  CHECK(c0 == 0.25f);

  const auto [y1, c1] = first_order_vec_block(1.0f, v, 3.0f);
  CHECK(y1 == cum_sum(v) + V4(3.0f));
  CHECK(c1 == y1[3]);

  const auto [y2, c2] = first_order_vec_block(0.5f, V4::from_array({1, 0, 0, 0}), 0.0f);
  CHECK(lanes(y2) == std::array<float, 4>{1.0f, 0.5f, 0.25f, 0.125f});
  CHECK(c2 == 0.125f);

  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const float k = rng.uniform_f(-0.99f, 0.99f);
    const auto xs = rng.floats(4096);
    std::vector<float> ref, got;
    float y = 0.0f;
    for (float x : xs) ref.push_back(y = x + k * y);
    float carry = 0.0f;
    for (const auto& block : pack<8>(xs)) {
      const auto [out, last] = first_order_vec_block(k, block, carry);
      carry = last;
      for (std::size_t i = 0; i < 8; ++i) got.push_back(out[i]);
    }
    CHECK(rel(ref, got) <= 1e-6);
  }
}

TEST_CASE("odd-lag elimination") {
  SUBCASE("second order, symbolically") {
    const Polynomial<Sym> d{Sym(1), -Sym::a(), Sym::b()};
    const auto e = eliminate_odd_lags(d);
    CHECK(e.multiplier == Polynomial<Sym>{Sym(1), Sym::a(), Sym::b()});
    const Sym a2 = Sym::a() * Sym::a();
    CHECK(e.denominator == Polynomial<Sym>{Sym(1), Sym(0), -(a2 - Sym(2) * Sym::b()), Sym(0), Sym::b() * Sym::b()});
  }
  SUBCASE("first order") {
    const auto e = eliminate_odd_lags(Polynomial<Sym>{Sym(1), -Sym::a()});
    CHECK(e.multiplier == Polynomial<Sym>{Sym(1), Sym::a()});
    CHECK(e.denominator == Polynomial<Sym>{Sym(1), Sym(0), -(Sym::a() * Sym::a())});
  }
  SUBCASE("a = b = 1") {
    CHECK(all_equal(eliminate_odd_lags(Polynomial<double>{1, -1, 1}).denominator, {1.0, 0.0, 1.0, 0.0, 1.0}));
  }
  CHECK_THROWS_AS(eliminate_odd_lags(Polynomial<double>{2, 1}), std::invalid_argument);
}

TEST_CASE("decomposition of recursive filters") {
  SUBCASE("first order at stride 4") {
    const auto k = Sym::a();
    const auto dec = decompose_recursive(Polynomial<Sym>{Sym(1), -k}, 4);
    CHECK(dec.fir == Polynomial<Sym>{Sym(1), k, k * k, k * k * k});
    CHECK(dec.recursive == Polynomial<Sym>{Sym(1), Sym(0), Sym(0), Sym(0), -(k * k * k * k)});
    CHECK(dec.strided == std::vector<Sym>{Sym(1), -(k * k * k * k)});
    REQUIRE(dec.multipliers.size() == 2);
    CHECK(dec.multipliers[1] == Polynomial<Sym>{Sym(1), Sym(0), k * k});
  }
  SUBCASE("stride 1 is the identity") {
    const auto dec = decompose_recursive(Polynomial<double>{1, -0.6, 0.2}, 1);
    CHECK(dec.fir == Polynomial<double>{1});
    CHECK(dec.recursive == Polynomial<double>{1, -0.6, 0.2});
  }
  SUBCASE("second order a = 0.6, b = 0.2 at stride 4 in exact rationals") {
    const auto dec = decompose_recursive(Polynomial<Q>{Q(1), Q(-3, 5), Q(1, 5)}, 4);
    CHECK(dec.fir == Polynomial<Q>{Q(1), Q(3, 5), Q(4, 25), Q(-3, 125), Q(4, 125), Q(3, 125), Q(1, 125)});
    CHECK(dec.recursive == Polynomial<Q>{Q(1), Q(0), Q(0), Q(0), Q(49, 625), Q(0), Q(0), Q(0), Q(1, 625)});
    CHECK(multiply(dec.fir, Polynomial<Q>{Q(1), Q(-3, 5), Q(1, 5)}) == dec.recursive);
  }
  SUBCASE("random stable filters") {
    Rng rng(4);
    for (int t = 0; t < 300; ++t) {
      const auto [a, b] = rng.stable_pair(0.999);
      const Polynomial<double> d{1.0, -a, b};
      for (std::size_t stride : {2, 4, 8}) {
        const auto dec = decompose_recursive(d, stride);
        const auto back = multiply(dec.fir, d);
        double err = 0.0, peak = 0.0;
        for (std::size_t i = 0; i < back.size(); ++i) {
          err = std::max(err, std::abs(back[i] - dec.recursive[i]));
          peak = std::max(peak, std::abs(dec.recursive[i]));
        }
        CHECK(err <= 1e-10 * peak);
        for (std::size_t i = 0; i < dec.recursive.size(); ++i)
          if (i % stride != 0) CHECK(dec.recursive[i] == 0.0);
      }
    }
  }
  CHECK_THROWS_AS(decompose_recursive(Polynomial<double>{1, 0.5}, 3), std::invalid_argument);
}

TEST_CASE("block coefficients agree with the decomposition") {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto [a, b] = rng.stable_pair(0.99);
    const Polynomial<double> d{1.0, -a, b};
    const auto dec = decompose_recursive(d, 8);

    const auto rc = prepare_recursive<double, 8, 2>({1.0, -a, b});
    for (std::size_t j = 0; j < rc.rounds; ++j)
      for (std::size_t m = 1; m <= 2; ++m)
        CHECK(rc.taps[j][m - 1] == Approx(dec.multipliers[j][m << j]).epsilon(1e-12));

    // the section FIR is n * (product of multipliers), truncated to the block
    const Polynomial<double> n{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto expanded = multiply(n, dec.fir);
    const auto sc = prepare_section<double, 8, 2>({n[0], n[1], n[2]}, {1.0, -a, b});
    for (std::size_t i = 0; i < 8; ++i) CHECK(sc.impulse[i] == Approx(expanded[i]).epsilon(1e-12));
  }
  CHECK_THROWS_AS((prepare_recursive<float, 4, 1>({2.0, 0.5})), std::invalid_argument);
}

TEST_CASE("vector generators match the scalar engine") {
  SUBCASE("oscillator lanes") {
    const auto g = osci_vec_serial<4, float>(identity_wave, 0.0, 0.25);
    auto state = g.initial;
    for (int i = 0; i < 3; ++i) CHECK(lanes(g.next(state).value) == std::array<float, 4>{0, 0.25f, 0.5f, 0.75f});
    for (float v : take_samples(osci_vec_serial<8, float>(saw_wave, 0.3, 0.0), 64)) CHECK(v == take_samples(osci<float>(saw_wave, 0.3, 0.0), 1)[0]);

    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
      const double p = rng.uniform(0, 0.999), f = rng.uniform(-0.5, 0.5);
      const auto ref = take_samples(osci<float>(identity_wave, p, f), 50000);
      CHECK(take_samples(osci_vec_serial<4, float>(identity_wave, p, f), 50000) == ref);
      CHECK(take_samples(osci_vec_serial<8, float>(identity_wave, p, f), 50000) == ref);
    }
    const double p = 0.123, f = 0.0173;
    CHECK(take_samples(osci_vec_serial<8, float>(saw_wave, p, f), 1000000) ==
          take_samples(osci<float>(saw_wave, p, f), 1000000));
  }
  SUBCASE("exponential lanes") {
    auto g = exponential_vec_serial<4, float>(1.0, 1.0f);
    auto state = g.initial;
    CHECK(lanes(g.next(state).value) == std::array<float, 4>{1, 0.5f, 0.25f, 0.125f});
    CHECK(lanes(g.next(state).value) == std::array<float, 4>{1 / 16.f, 1 / 32.f, 1 / 64.f, 1 / 128.f});
    for (float v : take_samples(exponential_vec_serial<8, float>(3.0, 0.0f), 64)) CHECK(v == 0.0f);

    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
      const double hl = rng.uniform(10, 1e5);
      const float amp = rng.uniform_f(-3, 3);
      const auto y = take_samples(exponential_vec_serial<8, float>(hl, amp), 4000);
      for (std::size_t k = 0; k < y.size(); k += 37)
        CHECK(y[k] == Approx(amp * std::exp2(-double(k) / hl)).epsilon(1e-6));
    }
  }
  SUBCASE("noise") {
    for (std::uint32_t seed : {0u, 1u, 20100926u}) {
      const auto ref = take_samples(noise<float>(seed), 10000);
      CHECK(take_samples(noise_vec<4, float>(seed), 10000) == ref);
      CHECK(take_samples(noise_vec<8, float>(seed), 10000) == ref);
    }
  }
  SUBCASE("a partial last block") {
    const auto ref = take_samples(osci<float>(saw_wave, 0.0, 0.01), 10);
    const auto got = take_samples(osci_vec_serial<4, float>(saw_wave, 0.0, 0.01), 10);
    CHECK(got == ref);
    CHECK(take_samples(ramp_vec<8, float>(1.0f, 0.5f), 13) == take_samples(ramp_linear(1.0f, 0.5f), 13));
    CHECK(take_samples(gate_vec<4, float>(6), 9) == take_samples(gate<float>(6), 9));
  }
}

TEST_CASE("vector filters match the scalar engine") {
  Rng rng(8);
  const auto noise_in = rng.floats(44096);

  SUBCASE("first order") {
    const auto p = FirstOrderParam<float>::stable(0.9f);
    CHECK(rel(run_process(first_order_recursive(p), impulse(4096)), run_vec<4>(first_order_recursive_vec<4>(p), impulse(4096))) <= 1e-5);
    CHECK(rel(run_process(first_order_recursive(p), impulse(4096)), run_vec<8>(first_order_recursive_vec<8>(p), impulse(4096))) <= 1e-5);
    const auto zero = FirstOrderParam<float>::stable(0.0f);
    CHECK(run_vec<4>(first_order_recursive_vec<4>(zero), noise_in) == noise_in);
    CHECK(rel(run_process(first_order_lowpass(p), noise_in), run_vec<8>(first_order_lowpass_vec<8>(p), noise_in)) <= 1e-5);
  }
  SUBCASE("second order") {
    const auto p = SecondOrderParam<float>::recursive(1.2f, 0.5f);
    const auto ref = run_process(second_order_recursive(p), noise_in);
    CHECK(rel(ref, run_vec<4>(second_order_recursive_vec<4>(p), noise_in)) <= 1e-3);
    CHECK(rel(ref, run_vec<8>(second_order_recursive_vec<8>(p), noise_in)) <= 1e-3);

    for (int t = 0; t < 50; ++t) {
      const auto [a, b] = rng.stable_pair(0.99);
      const auto q = SecondOrderParam<float>::biquad(rng.uniform_f(-1, 1), rng.uniform_f(-1, 1), rng.uniform_f(-1, 1),
                                                     float(a), float(b));
      const auto x = rng.floats(2048);
      CHECK(rel(run_process(second_order_recursive(q), x), run_vec<8>(second_order_recursive_vec<8>(q), x)) <= 1e-3);
    }
  }
  SUBCASE("allpass") {
    for (float k : {-0.9f, 0.0f, 0.5f}) {
      const auto p = AllpassParam<float>::stable(k);
      const auto ref = run_process(allpass_cascade(8, p), noise_in);
      CHECK(rel(ref, run_vec<4>(allpass_cascade_vec<4>(8, p), noise_in)) <= 1e-4);
      CHECK(rel(ref, run_vec<8>(allpass_cascade_vec<8>(8, p), noise_in)) <= 1e-4);
      CHECK(rel(run_process(allpass(p), noise_in), run_vec<4>(allpass_vec<4>(p), noise_in)) <= 1e-5);
    }
  }
}

TEST_CASE("vector control rate") {
  Rng rng(9);
  const auto x = rng.floats(8192);

  SUBCASE("constant control equals the fixed filter") {
    const auto p = SecondOrderParam<float>::recursive(0.7f, 0.3f);
    const auto block = prepare_block<8>(p);
    const auto fixed = run_vec<8>(second_order_recursive_vec<8>(p), x);
    const auto ctrl = run_vec<8>(controlled_filter_vec<8>(control_rated(constant(block), 64),
                                                          second_order_controlled_vec<8, float>()),
                                 x);
    CHECK(ctrl == fixed);
  }
  SUBCASE("steps on and off block boundaries follow the scalar controlled filter") {
    for (std::size_t factor : {8, 64, 100, 13}) {
      std::vector<SecondOrderParam<float>> ps;
      for (int i = 0; i < 200; ++i) {
        const auto [a, b] = rng.stable_pair(0.95);
        ps.push_back(SecondOrderParam<float>::biquad(0.3f, 0.2f, 0.1f, float(a), float(b)));
      }
      const auto ref = run_process(controlled_filter(control_rated(from_buffer(ps), factor), second_order_controlled<float>()), x);
      const auto blocks = map([](const auto& p) { return prepare_block<8>(p); }, from_buffer(ps));
      const auto got = run_vec<8>(controlled_filter_vec<8>(control_rated(blocks, factor), second_order_controlled_vec<8, float>()), x);
      CHECK(rel(ref, got) <= 1e-4);
    }
  }
  SUBCASE("butterworth sweep at factor 100") {
    const auto control = map([](double s) { return butterworth_sections<5, float>(0.01 * std::pow(20.0, 0.5 * (s + 1))); },
                             osci<double>(sine_wave, 0.0, 1e-3));
    const auto ref = take_samples(fusedsp::apply(controlled_filter(control_rated(control, 100), biquad_cascade_controlled<float, 5>()),
                                                 noise<float>(1)),
                                  44100);
    const auto blocks = map([](const auto& s) { return prepare_block<4>(s); }, control);
    const auto got = take_samples(fusedsp::apply(controlled_filter_vec<4>(control_rated(blocks, 100), biquad_cascade_controlled_vec<4, float, 5>()),
                                                 noise_vec<4, float>(1)),
                                  44100);
    CHECK(rel(ref, got) <= 1e-3);
  }
  SUBCASE("allpass steps inside blocks") {
    std::vector<AllpassParam<float>> ks;
    for (int i = 0; i < 1000; ++i) ks.push_back(AllpassParam<float>::stable(rng.uniform_f(-0.9f, 0.9f)));
    const auto ref = run_process(controlled_filter(control_rated(from_buffer(ks), 10), allpass_cascade_controlled<float>(4)), x);
    const auto blocks = map([](const auto& p) { return prepare_block<8>(p); }, from_buffer(ks));
    const auto got = run_vec<8>(controlled_filter_vec<8>(control_rated(blocks, 10), allpass_cascade_controlled_vec<8, float>(4)), x);
    CHECK(rel(ref, got) <= 1e-4);
  }
  SUBCASE("factors below the lane count are rejected") {
    const auto block = prepare_block<8>(SecondOrderParam<float>::recursive(0.1f, 0.0f));
    CHECK_THROWS_AS(controlled_filter_vec<8>(control_rated(constant(block), 4), second_order_controlled_vec<8, float>()),
                    std::invalid_argument);
  }
}

TEST_CASE("vector delay and feedback") {
  Rng rng(10);
  const auto x = rng.floats(4000);
  for (std::size_t d : {0, 1, 3, 4, 7, 8, 9, 100}) {
    const auto ref = d == 0 ? x : run_process(delay_n(d, 0.0f), x);
    CHECK(run_vec<4>(delay_n_vec<4>(d, 0.0f), x) == ref);
    CHECK(run_vec<8>(delay_n_vec<8>(d, 0.0f), x) == ref);
  }

  for (std::size_t delay : {8, 37, 100}) {
    const KarplusParams<float> kp{delay, FirstOrderParam<float>::stable(0.4f), 0.98f};
    const auto ref = take_samples(karplus_strong(kp, amplify(gate<float>(delay), noise<float>(5))), 20000);
    const auto got = take_samples(karplus_strong_vec<8>(kp, amplify(gate_vec<8, float>(delay), noise_vec<8, float>(5))), 20000);
    CHECK(rel(ref, got) <= 1e-4);
  }
  CHECK_THROWS_AS(karplus_strong_vec<8>(KarplusParams<float>{4, {}, 0.5f}, noise_vec<8, float>(1)), std::invalid_argument);
}

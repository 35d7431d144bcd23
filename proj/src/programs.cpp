#include "fusedsp/programs.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "fusedsp/causal.hpp"
#include "fusedsp/filter_design.hpp"
#include "fusedsp/filters.hpp"
#include "fusedsp/generator.hpp"
#include "fusedsp/simd/vector_engine.hpp"
#include "fusedsp_default_config.hpp"

namespace fusedsp {

namespace {

// Engine policies. A program is written once against this interface.

struct ScalarOps {
  static constexpr std::size_t lanes = 1;

  template <class Wave>
  static auto osc(Wave wave, double phase0, double freq) {
    return osci<float>(wave, phase0, freq);
  }
  static auto envelope(double half_life, float amp) { return exponential<float>(half_life, amp); }
  static auto white_noise(std::uint32_t seed) { return noise<float>(seed); }
  static auto burst(std::uint64_t length) { return gate<float>(length); }

  template <std::size_t M, SignalGenerator G>
  static auto butterworth(const G& sections, std::size_t factor) {
    return controlled_filter(control_rated(sections, factor), biquad_cascade_controlled<float, M>());
  }

  template <SignalGenerator G>
  static auto allpass(const G& coeffs, std::size_t factor, std::size_t stages) {
    return controlled_filter(control_rated(coeffs, factor), allpass_cascade_controlled<float>(stages));
  }

  template <SignalGenerator G>
  static auto karplus(const KarplusParams<float>& kp, const G& excitation) {
    return karplus_strong(kp, excitation);
  }
};

template <std::size_t N>
struct VectorOps {
  static constexpr std::size_t lanes = N;

  template <class Wave>
  static auto osc(Wave wave, double phase0, double freq) {
    return simd::osci_vec_serial<N, float>(wave, phase0, freq);
  }
  static auto envelope(double half_life, float amp) { return simd::exponential_vec_serial<N, float>(half_life, amp); }
  static auto white_noise(std::uint32_t seed) { return simd::noise_vec<N, float>(seed); }
  static auto burst(std::uint64_t length) { return simd::gate_vec<N, float>(length); }

  template <std::size_t M, SignalGenerator G>
  static auto butterworth(const G& sections, std::size_t factor) {
    auto blocks = map([](const auto& s) { return simd::prepare_block<N>(s); }, sections);
    return simd::controlled_filter_vec<N>(control_rated(blocks, factor),
                                          simd::biquad_cascade_controlled_vec<N, float, M>());
  }

  template <SignalGenerator G>
  static auto allpass(const G& coeffs, std::size_t factor, std::size_t stages) {
    auto blocks = map([](const auto& p) { return simd::prepare_block<N>(p); }, coeffs);
    return simd::controlled_filter_vec<N>(control_rated(blocks, factor),
                                          simd::allpass_cascade_controlled_vec<N, float>(stages));
  }

  template <SignalGenerator G>
  static auto karplus(const KarplusParams<float>& kp, const G& excitation) {
    return simd::karplus_strong_vec<N>(kp, excitation);
  }
};

template <class G>
auto scaled(const G& g, float gain) {
  return map([gain](const auto& v) { return v * gain; }, g);
}

template <class G>
auto mix_all(const G& g) {
  return g;
}

template <class G, class... Gs>
auto mix_all(const G& g, const Gs&... gs) {
  return mix(g, mix_all(gs...));
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void count(std::uint64_t* counter) {
  if (counter) ++*counter;
}

// Copied into every bound program, so compiled programs outlive the
// arguments of build_program.
struct Context {
  ProgramConfig config;
  ProgramOptions options;
  double sr() const { return config.sample_rate; }
};

/// Sine sweep of the cutoff between two frequencies on a log scale, at
/// control rate, designed into M Butterworth sections.
struct ButterworthSweep {
  ParamRef<double> sweep, low, high;

  static ButterworthSweep declare(ParamSet& ps) {
    return {ps.param("sweep"), ps.param("cutoff_low"), ps.param("cutoff_high")};
  }

  template <std::size_t M>
  auto control(const ParamValues& v, const Context& ctx) const {
    const double sr = ctx.sr();
    const double lo = low(v), hi = high(v);
    require(lo > 0.0 && lo <= hi && hi < sr / 2.0,
            "butterworth: need 0 < cutoff_low <= cutoff_high < sample_rate/2");
    const double rate = sweep(v) * static_cast<double>(ctx.config.control_factor) / sr;
    return map(
        [lo, hi, sr](double s) {
          const double fc = lo * std::pow(hi / lo, 0.5 * (s + 1.0)) / sr;
          return butterworth_sections<M, float>(fc);
        },
        osci<double>(sine_wave, 0.0, rate));
  }
};

template <class Ops, std::size_t M>
auto butterworth_source(const ButterworthSweep& bw, const ParamValues& v, const Context& ctx) {
  return fusedsp::apply(Ops::template butterworth<M>(bw.control<M>(v, ctx), ctx.config.control_factor),
                        Ops::white_noise(ctx.config.noise_seed));
}

struct PhaserSweep {
  ParamRef<double> sweep, k_low, k_high;

  static PhaserSweep declare(ParamSet& ps) {
    return {ps.param("phaser_sweep"), ps.param("k_low"), ps.param("k_high")};
  }

  auto control(const ParamValues& v, const Context& ctx) const {
    const double lo = k_low(v), hi = k_high(v);
    require(std::abs(lo) < 1.0 && std::abs(hi) < 1.0, "allpass: k_low and k_high must lie in (-1, 1)");
    const double rate = sweep(v) * static_cast<double>(ctx.config.control_factor) / ctx.sr();
    return map(
        [lo, hi](double s) {
          return AllpassParam<float>::stable(static_cast<float>(lo + (hi - lo) * 0.5 * (s + 1.0)));
        },
        osci<double>(sine_wave, 0.25, rate));
  }
};

template <class F>
auto with_sections(int order, F&& f) {
  switch (order) {
    case 2: return f(std::integral_constant<std::size_t, 1>{});
    case 4: return f(std::integral_constant<std::size_t, 2>{});
    case 6: return f(std::integral_constant<std::size_t, 3>{});
    case 8: return f(std::integral_constant<std::size_t, 4>{});
    case 10: return f(std::integral_constant<std::size_t, 5>{});
    case 12: return f(std::integral_constant<std::size_t, 6>{});
    case 16: return f(std::integral_constant<std::size_t, 8>{});
    default:
      throw std::invalid_argument("butterworth: unsupported order " + std::to_string(order) +
                                  " (supported: 2, 4, 6, 8, 10, 12, 16)");
  }
}

// ---------------------------------------------------------------------------
// programs

template <class Ops>
CompiledProgram<float> saw_program(const Context& ctx) {
  return compile([&](ParamSet& ps) {
    count(ctx.options.build_counter);
    auto freq = ps.param("freq");
    return [freq, sr = ctx.sr()](const ParamValues& v) { return Ops::osc(saw_wave, 0.0, freq(v) / sr); };
  });
}

template <class Ops>
CompiledProgram<float> ping_program(const Context& ctx) {
  return compile([&](ParamSet& ps) {
    count(ctx.options.build_counter);
    const double sr = ctx.sr();
    auto freq = ps.param("freq");
    auto half_life = ps.param("half_life").map([sr](double seconds) { return seconds * sr; });
    return [freq, half_life, sr](const ParamValues& v) {
      return amplify(Ops::envelope(half_life(v), 1.0f), Ops::osc(saw_wave, 0.0, freq(v) / sr));
    };
  });
}

template <class Ops>
CompiledProgram<float> chord_program(const Context& ctx) {
  const auto& r = ctx.config.chord_ratios;
  require(r.size() == 4, "chord: expected 4 frequency ratios");
  return compile([&](ParamSet& ps) {
    count(ctx.options.build_counter);
    auto root = ps.param("root");
    return [root, r, sr = ctx.sr()](const ParamValues& v) {
      const double f = root(v) / sr;
      return scaled(mix_all(Ops::osc(saw_wave, 0.0, f * r[0]), Ops::osc(saw_wave, 0.0, f * r[1]),
                            Ops::osc(saw_wave, 0.0, f * r[2]), Ops::osc(saw_wave, 0.0, f * r[3])),
                    0.25f);
    };
  });
}

template <class Ops>
CompiledProgram<float> chordchorus_program(const Context& ctx) {
  const auto& r = ctx.config.chord_ratios;
  const auto& d = ctx.config.chorus_detune;
  require(r.size() == 4 && d.size() == 4, "chordchorus: expected 4 ratios and 4 detune factors");
  return compile([&](ParamSet& ps) {
    count(ctx.options.build_counter);
    auto root = ps.param("root");
    return [root, r, d, sr = ctx.sr()](const ParamValues& v) {
      const double f = root(v) / sr;
      auto voice = [&](std::size_t i) {
        return Ops::osc(saw_wave, 0.0, f * r[i / 4] * d[i % 4]);
      };
      return [&]<std::size_t... I>(std::index_sequence<I...>) {
        return scaled(mix_all(voice(I)...), 1.0f / 16.0f);
      }(std::make_index_sequence<16>{});
    };
  });
}

template <class Ops>
CompiledProgram<float> butterworth_program(const Context& ctx) {
  return with_sections(ctx.config.butterworth_order, [&](auto sections) {
    constexpr std::size_t M = decltype(sections)::value;
    return compile([&](ParamSet& ps) {
      count(ctx.options.build_counter);
      auto bw = ButterworthSweep::declare(ps);
      return [bw, ctx](const ParamValues& v) { return butterworth_source<Ops, M>(bw, v, ctx); };
    });
  });
}

template <class Ops>
CompiledProgram<float> allpass_program(const Context& ctx) {
  return with_sections(ctx.config.butterworth_order, [&](auto sections) {
    constexpr std::size_t M = decltype(sections)::value;
    return compile([&](ParamSet& ps) {
      count(ctx.options.build_counter);
      auto bw = ButterworthSweep::declare(ps);
      auto phaser = PhaserSweep::declare(ps);
      return [bw, phaser, ctx](const ParamValues& v) {
        auto source = counted(butterworth_source<Ops, M>(bw, v, ctx), ctx.options.source_counter);
        auto ap = Ops::allpass(phaser.control(v, ctx), ctx.config.control_factor, ctx.config.allpass_stages);
        return scaled(fusedsp::apply(fanout() >> second(ap) >> mix_proc(), source), 0.5f);
      };
    });
  });
}

template <class Ops>
CompiledProgram<float> karplus_program(const Context& ctx) {
  return compile([&](ParamSet& ps) {
    count(ctx.options.build_counter);
    auto damping = ps.param("cutoff").map([sr = ctx.sr()](double hz) {
      return lowpass_param_from_cutoff(hz / sr, SlopeFirstOrder{}).cast<float>();
    });
    auto gain = ps.param("gain");
    return [damping, gain, ctx](const ParamValues& v) {
      const double g = gain(v);
      require(std::abs(g) < 1.0, "karplus: loop gain must lie in (-1, 1)");
      const KarplusParams<float> kp{ctx.config.karplus_delay, damping(v), static_cast<float>(g)};
      auto excitation = amplify(Ops::burst(ctx.config.karplus_burst), Ops::white_noise(ctx.config.noise_seed));
      return Ops::karplus(kp, excitation);
    };
  });
}

template <class Ops>
CompiledProgram<float> build_for(const std::string& name, const Context& ctx) {
  if (name == "saw") return saw_program<Ops>(ctx);
  if (name == "ping") return ping_program<Ops>(ctx);
  if (name == "chord") return chord_program<Ops>(ctx);
  if (name == "chordchorus") return chordchorus_program<Ops>(ctx);
  if (name == "butterworth") return butterworth_program<Ops>(ctx);
  if (name == "allpass") return allpass_program<Ops>(ctx);
  if (name == "karplus") return karplus_program<Ops>(ctx);
  throw std::invalid_argument("unknown program '" + name + "'");
}

// ---------------------------------------------------------------------------
// configuration

std::vector<double> number_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<double>>();
}

}  // namespace

const char* engine_name(Engine e) {
  return e == Engine::scalar ? "scalar" : "vector";
}

Engine parse_engine(const std::string& name) {
  if (name == "scalar") return Engine::scalar;
  if (name == "vector") return Engine::vector;
  throw std::invalid_argument("unknown engine '" + name + "' (expected scalar or vector)");
}

const std::vector<std::string>& program_names() {
  static const std::vector<std::string> names{"saw",         "chord",   "chordchorus", "ping",
                                              "butterworth", "allpass", "karplus"};
  return names;
}

ProgramConfig parse_program_config(const std::string& json_text) {
  ProgramConfig cfg;
  try {
    const auto j = nlohmann::json::parse(json_text);
    cfg.sample_rate = j.value("sample_rate", 44100.0);
    cfg.noise_seed = j.value("noise_seed", 1u);
    require(cfg.sample_rate > 0.0, "config: sample_rate must be positive");
    const auto& progs = j.at("programs");
    for (const auto& name : program_names()) {
      require(progs.contains(name), "config: missing program '" + name + "'");
      const auto& p = progs.at(name);
      ParamRecord rec;
      if (p.contains("params"))
        for (const auto& [key, value] : p.at("params").items()) rec.set(key, value.get<double>());
      cfg.defaults[name] = rec;
    }
    cfg.chord_ratios = number_list(progs.at("chord"), "ratios");
    cfg.chorus_detune = number_list(progs.at("chordchorus"), "detune");
    const auto& bw = progs.at("butterworth");
    cfg.butterworth_order = bw.value("order", 10);
    cfg.control_factor = bw.value("control_factor", std::size_t{100});
    const auto& ap = progs.at("allpass");
    require(ap.value("order", cfg.butterworth_order) == cfg.butterworth_order &&
                ap.value("control_factor", cfg.control_factor) == cfg.control_factor,
            "config: allpass must use the butterworth program's order and control factor");
    cfg.allpass_stages = ap.value("stages", std::size_t{8});
    const auto& ks = progs.at("karplus");
    cfg.karplus_delay = ks.value("delay", std::size_t{100});
    cfg.karplus_burst = ks.value("burst", std::size_t{100});
    require(cfg.control_factor >= 1, "config: control_factor must be at least 1");
    require(cfg.allpass_stages >= 1, "config: allpass stages must be at least 1");
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

ProgramConfig default_program_config() {
  static const ProgramConfig cfg = parse_program_config(detail::kDefaultProgramConfig);
  return cfg;
}

ProgramConfig load_program_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_program_config(text.str());
}

BenchProgram build_program(const std::string& name, const ProgramConfig& config, const ProgramOptions& options) {
  const auto it = config.defaults.find(name);
  if (it == config.defaults.end()) throw std::invalid_argument("unknown program '" + name + "'");
  const Context ctx{config, options};
  auto scalar = build_for<ScalarOps>(name, ctx);
  switch (options.lanes) {
    case 4: return {name, it->second, std::move(scalar), build_for<VectorOps<4>>(name, ctx)};
    case 8: return {name, it->second, std::move(scalar), build_for<VectorOps<8>>(name, ctx)};
    default:
      throw std::invalid_argument("unsupported lane count " + std::to_string(options.lanes) + " (expected 4 or 8)");
  }
}

CompiledProgram<float> build_allpass_unshared(const ProgramConfig& config, std::uint64_t* source_counter) {
  const ProgramOptions options{1, source_counter, nullptr};
  const Context ctx{config, options};
  return with_sections(config.butterworth_order, [&](auto sections) {
    constexpr std::size_t M = decltype(sections)::value;
    return compile([&](ParamSet& ps) {
      auto bw = ButterworthSweep::declare(ps);
      auto phaser = PhaserSweep::declare(ps);
      return [bw, phaser, ctx](const ParamValues& v) {
        auto source = counted(butterworth_source<ScalarOps, M>(bw, v, ctx), ctx.options.source_counter);
        auto ap = ScalarOps::allpass(phaser.control(v, ctx), ctx.config.control_factor, ctx.config.allpass_stages);
        return scaled(mix(source, fusedsp::apply(ap, source)), 0.5f);
      };
    });
  });
}

}  // namespace fusedsp

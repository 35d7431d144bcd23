#include "fusedsp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <span>

#include <json.hpp>

namespace fusedsp {

namespace {

double time_render(const CompiledProgram<float>& program, const ParamRecord& params, std::span<float> out) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = program.render_into(params, out);
  const auto stop = std::chrono::steady_clock::now();
  if (n != out.size()) throw RenderError("program stopped after " + std::to_string(n) + " samples");
  return std::chrono::duration<double>(stop - start).count();
}

// Cache-sized, so the timing covers the render loop and not memory bandwidth.
constexpr std::size_t kBenchChunk = std::size_t{1} << 14;

double time_stream(const CompiledProgram<float>& program, const ParamRecord& params, std::size_t samples,
                   std::span<float> chunk) {
  volatile float last = 0.0f;
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n =
      program.render_stream(params, samples, chunk, [&](std::span<const float> c) { last = c.back(); });
  const auto stop = std::chrono::steady_clock::now();
  if (n != samples) throw RenderError("program stopped after " + std::to_string(n) + " samples");
  return std::chrono::duration<double>(stop - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

const BenchResult* BenchReport::find(const std::string& program, Engine engine) const {
  for (const auto& r : results)
    if (r.program == program && r.engine == engine) return &r;
  return nullptr;
}

BenchReport run_bench(const BenchOptions& options, const ProgramConfig& config) {
  if (options.runs == 0) throw std::invalid_argument("bench: need at least one timed run");
  BenchReport report;
  std::vector<float> scalar_out(options.samples), vector_out(options.samples);
  for (const auto& name : options.programs) {
    const auto program = build_program(name, config, ProgramOptions{options.lanes});
    const auto& params = program.defaults;

    time_render(program.scalar, params, scalar_out);
    time_render(program.vector, params, vector_out);
    GateResult gate{name, compare_signals(scalar_out, vector_out), engine_tolerance(name)};
    report.gates.push_back(gate);
    if (!gate.passed()) {
      throw EquivalenceFailure("bench: " + name + " engines disagree, relative error " +
                               std::to_string(gate.equivalence.relative_error) + " > " +
                               std::to_string(gate.tolerance));
    }

    std::vector<float> chunk(kBenchChunk);
    for (const Engine engine : {Engine::scalar, Engine::vector}) {
      std::vector<double> seconds;
      for (std::size_t i = 0; i < options.runs; ++i)
        seconds.push_back(time_stream(program.engine(engine), params, options.samples, chunk));
      const double s = median(std::move(seconds));
      report.results.push_back({name, engine, options.samples, s, s > 0.0 ? options.samples / s : 0.0});
    }
  }
  return report;
}

void print_bench_table(std::ostream& out, const BenchReport& report) {
  char line[128];
  std::snprintf(line, sizeof line, "%-12s %12s %12s %9s %12s\n", "program", "scalar [s]", "vector [s]", "speedup",
                "error");
  out << line;
  for (const auto& gate : report.gates) {
    const auto* s = report.find(gate.program, Engine::scalar);
    const auto* v = report.find(gate.program, Engine::vector);
    if (!s || !v) continue;
    std::snprintf(line, sizeof line, "%-12s %12.4f %12.4f %9.2f %12.3g\n", gate.program.c_str(), s->seconds,
                  v->seconds, v->seconds > 0.0 ? s->seconds / v->seconds : 0.0, gate.equivalence.relative_error);
    out << line;
  }
}

void write_bench_records(std::ostream& out, const BenchReport& report) {
  for (const auto& r : report.results) {
    const nlohmann::json j{{"program", r.program},
                           {"engine", engine_name(r.engine)},
                           {"samples", r.samples},
                           {"seconds", r.seconds},
                           {"samples_per_sec", r.samples_per_sec}};
    out << j.dump() << '\n';
  }
}

}  // namespace fusedsp

#pragma once

#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fusedsp/compare.hpp"
#include "fusedsp/programs.hpp"

namespace fusedsp {

struct BenchOptions {
  std::size_t samples = 8'820'000;
  std::size_t runs = 3;
  std::vector<std::string> programs = program_names();
  std::size_t lanes = 4;
};

struct BenchResult {
  std::string program;
  Engine engine = Engine::scalar;
  std::size_t samples = 0;
  double seconds = 0.0;
  double samples_per_sec = 0.0;
};

struct GateResult {
  std::string program;
  Equivalence equivalence;
  double tolerance = 0.0;
  bool passed() const { return equivalence.within(tolerance); }
};

struct BenchReport {
  std::vector<GateResult> gates;
  std::vector<BenchResult> results;

  const BenchResult* find(const std::string& program, Engine engine) const;
};

/// The engines disagree beyond tolerance; no timings were taken for the
/// program.
struct EquivalenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// For each program: render both engines once (warm-up and equivalence gate),
/// then time `runs` renders per engine and keep the median.
BenchReport run_bench(const BenchOptions& options, const ProgramConfig& config);

void print_bench_table(std::ostream& out, const BenchReport& report);
/// One JSON object per line: program, engine, samples, seconds, samples_per_sec.
void write_bench_records(std::ostream& out, const BenchReport& report);

}  // namespace fusedsp

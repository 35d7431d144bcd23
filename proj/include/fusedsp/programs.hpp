#pragma once

// The seven benchmark programs, each built for both engines from one
// definition so the two render the same signal.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fusedsp/runtime_params.hpp"

namespace fusedsp {

enum class Engine { scalar, vector };

const char* engine_name(Engine e);
/// Throws std::invalid_argument for anything but "scalar" or "vector".
Engine parse_engine(const std::string& name);

struct ProgramConfig {
  double sample_rate = 44100.0;
  std::uint32_t noise_seed = 1;
  /// Open parameters and their default values, per program.
  std::map<std::string, ParamRecord> defaults;
  std::vector<double> chord_ratios;
  std::vector<double> chorus_detune;
  int butterworth_order = 10;
  std::size_t control_factor = 100;
  std::size_t allpass_stages = 8;
  std::size_t karplus_delay = 100;
  std::size_t karplus_burst = 100;
};

/// The configuration shipped in config/programs.json.
ProgramConfig default_program_config();
ProgramConfig parse_program_config(const std::string& json_text);
ProgramConfig load_program_config(const std::string& path);

struct ProgramOptions {
  /// Lane count of the vector engine: 4 or 8.
  std::size_t lanes = 4;
  /// Incremented once per step of the allpass program's shared source.
  std::uint64_t* source_counter = nullptr;
  /// Incremented once each time a program builder runs.
  std::uint64_t* build_counter = nullptr;
};

struct BenchProgram {
  std::string name;
  ParamRecord defaults;
  CompiledProgram<float> scalar;
  CompiledProgram<float> vector;

  const CompiledProgram<float>& engine(Engine e) const { return e == Engine::scalar ? scalar : vector; }
};

const std::vector<std::string>& program_names();

/// Throws std::invalid_argument for unknown names or unsupported options.
BenchProgram build_program(const std::string& name, const ProgramConfig& config,
                           const ProgramOptions& options = {});

/// Allpass program written with generator transformations only:
/// mix(source, allpass(source)) duplicates the source, so it is stepped twice
/// per output sample. Scalar engine; used to show what sharing saves.
CompiledProgram<float> build_allpass_unshared(const ProgramConfig& config, std::uint64_t* source_counter);

}  // namespace fusedsp

#include "fusedsp/cli.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "fusedsp/audio_io.hpp"
#include "fusedsp/bench.hpp"
#include "fusedsp/programs.hpp"

namespace fusedsp::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string s;
  for (const auto& item : items) s += (s.empty() ? "" : sep) + item;
  return s;
}

struct RenderArgs {
  std::string program;
  std::size_t samples = 0;
  std::string engine = "scalar";
  std::string out = "-";
  std::string format = "f32";
  std::vector<std::string> set;
  std::size_t lanes = 4;
  std::string config;
};

struct BenchArgs {
  std::size_t samples = 8'820'000;
  bool desk = false;
  std::vector<std::string> programs;
  std::size_t runs = 3;
  std::string records;
  std::size_t lanes = 4;
  std::string config;
};

ProgramConfig config_from(const std::string& path) {
  try {
    return path.empty() ? default_program_config() : load_program_config(path);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int do_render(const RenderArgs& a, std::ostream& out, std::ostream& err) {
  const auto config = config_from(a.config);
  const Engine engine = parse_engine(a.engine);
  const AudioFormat format = a.format == "wav" ? AudioFormat::wav : AudioFormat::raw_f32;

  BenchProgram program = [&] {
    try {
      return build_program(a.program, config, ProgramOptions{a.lanes});
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();

  ParamRecord overrides;
  for (const auto& assignment : a.set) {
    try {
      overrides.set_assignment(assignment);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const ParamRecord params = program.defaults.merged(overrides);
  const auto& compiled = program.engine(engine);
  const auto report = compiled.check(params);
  if (!report.ok()) {
    std::string msg = "parameters do not match the schema of '" + a.program + "'";
    if (!report.unknown.empty()) msg += "; unknown: " + join(report.unknown, ", ");
    if (!report.missing.empty()) msg += "; missing: " + join(report.missing, ", ");
    msg += "; accepted: " + join(compiled.schema(), ", ");
    throw UsageError(msg);
  }

  std::vector<float> samples;
  try {
    samples = compiled.render(params, a.samples);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto rate = static_cast<std::uint32_t>(config.sample_rate);
  if (a.out == "-") {
    write_audio(out, samples, format, rate);
    out.flush();
    if (!out) throw std::runtime_error("error while writing to standard output");
  } else {
    write_audio_file(a.out, samples, format, rate);
  }
  (void)err;
  return kExitOk;
}

int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const auto config = config_from(a.config);
  BenchOptions options;
  options.samples = a.desk ? 441'000 : a.samples;
  options.runs = a.runs;
  options.lanes = a.lanes;
  if (!a.programs.empty()) {
    for (const auto& p : a.programs) {
      const auto& known = program_names();
      if (std::find(known.begin(), known.end(), p) == known.end()) throw UsageError("unknown program '" + p + "'");
    }
    options.programs = a.programs;
  }

  std::ofstream records;
  if (!a.records.empty()) {
    records.open(a.records, std::ios::trunc);
    if (!records) throw std::runtime_error("cannot open '" + a.records + "' for writing");
  }

  err << "rendering " << options.samples << " samples, " << options.runs << " timed runs, " << options.lanes
      << " lanes\n";
  BenchReport report;
  try {
    report = run_bench(options, config);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  print_bench_table(out, report);
  if (records.is_open()) {
    write_bench_records(records, report);
    records.flush();
    if (!records) throw std::runtime_error("error while writing '" + a.records + "'");
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Render and benchmark fused signal-processing programs", "fusedsp"};
  app.require_subcommand(1);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render one program to a file or standard output");
  render->add_option("--program", ra.program, "Program name")->required()->check(CLI::IsMember(program_names()));
  render->add_option("--samples", ra.samples, "Number of samples")->required();
  render->add_option("--engine", ra.engine, "scalar or vector")->check(CLI::IsMember({"scalar", "vector"}));
  render->add_option("--out", ra.out, "Output path, - for standard output");
  render->add_option("--format", ra.format, "f32 (raw little-endian) or wav")->check(CLI::IsMember({"f32", "wav"}));
  render->add_option("--set", ra.set, "Override a parameter, name=value")->take_all();
  render->add_option("--lanes", ra.lanes, "Vector lane count")->check(CLI::IsMember({4, 8}));
  render->add_option("--config", ra.config, "Program configuration JSON");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time both engines on the benchmark programs");
  bench->add_option("--samples", ba.samples, "Samples per render")->check(CLI::PositiveNumber);
  bench->add_flag("--desk", ba.desk, "Use 441000 samples");
  bench->add_option("--programs", ba.programs, "Comma-separated program list")->delimiter(',');
  bench->add_option("--runs", ba.runs, "Timed runs per cell (median is reported)")->check(CLI::Range(3, 1000));
  bench->add_option("--records", ba.records, "Write JSON lines to this path");
  bench->add_option("--lanes", ba.lanes, "Vector lane count")->check(CLI::IsMember({4, 8}));
  bench->add_option("--config", ba.config, "Program configuration JSON");

  auto* list = app.add_subcommand("list", "List programs and their parameters");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (render->parsed()) return do_render(ra, out, err);
    if (bench->parsed()) return do_bench(ba, out, err);
    if (list->parsed()) {
      const auto config = default_program_config();
      for (const auto& name : program_names()) {
        out << name;
        for (const auto& [key, value] : config.defaults.at(name).values()) out << ' ' << key << '=' << value;
        out << '\n';
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fusedsp::cli

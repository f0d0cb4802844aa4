#pragma once

#include <optional>
#include <string>
#include <vector>

#include "acep/engine.hpp"
#include "acep/types.hpp"
#include "acep/workload.hpp"

namespace acep {

/// Benchmark matrix configuration. Text format, one directive per line
/// ('#' comments):
///   pattern <file>            (repeatable)
///   pattern_text <pattern>    (inline alternative, repeatable)
///   workload preset <name> | workload script <file> | workload csv <file>
///   planner greedy zstream
///   policy <spec> ...         (decision policy specs, repeatable)
///   check_every <n>
///   repetitions <n>
///   out <file>                (optional; default stdout)
struct BenchConfig {
  struct PatternRef {
    std::string label;
    std::string text;  // pattern source text
  };
  std::vector<PatternRef> patterns;
  enum class Source { Preset, Script, Csv } source = Source::Preset;
  std::string workload_arg = "traffic-like";
  std::vector<PlannerKind> planners{PlannerKind::Greedy};
  std::vector<std::string> policies{"static"};
  int check_every = 1000;
  int repetitions = 1;
  std::string out_path;

  static BenchConfig parse(const std::string& text);
};

struct CellResult {
  double throughput_mean = 0;
  double throughput_stddev = 0;
  double gain_vs_static = 1.0;
  double reoptimizations_mean = 0;
  double overhead_mean = 0;
  double matches_mean = 0;
};

/// Runs one benchmark cell. When `script` is given, each repetition
/// regenerates the stream with seed+rep; otherwise `fixed` is replayed.
CellResult run_cell(const Pattern& pat, PlannerKind planner, const std::string& policy_spec,
                    const DriftScript* script, const NamedStream* fixed, int check_every,
                    int repetitions);

/// Full matrix; returns the CSV report (also written to cfg.out_path when
/// set). A static baseline is run for every (pattern, planner) cell to anchor
/// relative_gain_vs_static.
std::string run_benchmark(const BenchConfig& cfg);

inline constexpr const char* kBenchCsvHeader =
    "pattern,size,planner,policy,throughput_eps,throughput_stddev,relative_gain_vs_static,"
    "reoptimizations,overhead_frac,matches";

/// Text report: plan, all deciding condition sets, the selected invariants
/// with their gaps, and the average relative distance of the trace.
std::string explain_plan(const Pattern& pat, const StatSnapshot& s, PlannerKind planner, int k,
                         double d, bool auto_d);

}  // namespace acep

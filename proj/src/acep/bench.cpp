#include "acep/bench.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "acep/invariants.hpp"
#include "acep/parser.hpp"

namespace acep {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

struct RunTotals {
  double throughput = 0;
  double overhead = 0;
  double reopts = 0;
  double matches = 0;
};

RunTotals run_once(const Pattern& pat, PlannerKind planner, const std::string& policy_spec,
                   const NamedStream& stream, int check_every) {
  std::vector<const Pattern*> parts;
  if (pat.is_or())
    for (const auto& d : pat.disjuncts) parts.push_back(&d);
  else
    parts.push_back(&pat);

  RunTotals totals;
  double events = 0, wall = 0, busy = 0;
  for (const Pattern* part : parts) {
    PolicyConfig pc = PolicyConfig::parse(policy_spec);
    EngineConfig ec;
    ec.planner = planner;
    ec.check_every = check_every;
    ec.auto_distance = pc.auto_distance;
    AdaptiveEngine engine(*part, pc.instantiate(), ec);
    engine.start();
    RunMetrics m = run_loop(engine, vector_source(bind_stream(stream, *part)));
    events += static_cast<double>(m.events);
    wall += m.wall_seconds;
    busy += m.decision_seconds + m.planner_seconds;
    totals.reopts += static_cast<double>(m.reoptimizations);
    totals.matches += static_cast<double>(m.matches);
  }
  totals.throughput = wall > 0 ? events / wall : 0;
  totals.overhead = wall > 0 ? busy / wall : 0;
  return totals;
}

}  // namespace

CellResult run_cell(const Pattern& pat, PlannerKind planner, const std::string& policy_spec,
                    const DriftScript* script, const NamedStream* fixed, int check_every,
                    int repetitions) {
  if (repetitions < 1) throw Error("repetitions must be >= 1");
  if (!script && !fixed) throw Error("run_cell needs a script or a fixed stream");
  std::vector<double> throughputs;
  CellResult r;
  for (int rep = 0; rep < repetitions; ++rep) {
    NamedStream generated;
    const NamedStream* stream = fixed;
    if (script) {
      DriftScript copy = *script;
      copy.seed += static_cast<std::uint64_t>(rep);
      generated = generate(copy);
      stream = &generated;
    }
    RunTotals t = run_once(pat, planner, policy_spec, *stream, check_every);
    throughputs.push_back(t.throughput);
    r.reoptimizations_mean += t.reopts;
    r.overhead_mean += t.overhead;
    r.matches_mean += t.matches;
  }
  double n = static_cast<double>(repetitions);
  for (double t : throughputs) r.throughput_mean += t / n;
  if (repetitions > 1) {
    double ss = 0;
    for (double t : throughputs) ss += (t - r.throughput_mean) * (t - r.throughput_mean);
    r.throughput_stddev = std::sqrt(ss / (n - 1));
  }
  r.reoptimizations_mean /= n;
  r.overhead_mean /= n;
  r.matches_mean /= n;
  return r;
}

BenchConfig BenchConfig::parse(const std::string& text) {
  BenchConfig cfg;
  cfg.planners.clear();
  cfg.policies.clear();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto words = split_ws(line);
    if (words.empty()) continue;
    auto fail = [&](const std::string& msg) {
      throw Error("bench config line " + std::to_string(lineno) + ": " + msg);
    };
    const std::string& key = words[0];
    if (key == "pattern") {
      if (words.size() != 2) fail("pattern <file>");
      cfg.patterns.push_back({words[1], read_file(words[1])});
    } else if (key == "pattern_text") {
      size_t at = line.find("pattern_text") + 12;
      std::string body = line.substr(at);
      size_t start = body.find_first_not_of(" \t");
      if (start == std::string::npos) fail("pattern_text <pattern>");
      body = body.substr(start);
      cfg.patterns.push_back({"inline:" + std::to_string(lineno), body});
    } else if (key == "workload") {
      if (words.size() != 3) fail("workload preset|script|csv <arg>");
      if (words[1] == "preset")
        cfg.source = Source::Preset;
      else if (words[1] == "script")
        cfg.source = Source::Script;
      else if (words[1] == "csv")
        cfg.source = Source::Csv;
      else
        fail("unknown workload source '" + words[1] + "'");
      cfg.workload_arg = words[2];
    } else if (key == "planner") {
      if (words.size() < 2) fail("planner greedy|zstream ...");
      for (size_t i = 1; i < words.size(); ++i)
        cfg.planners.push_back(planner_kind_from_name(words[i]));
    } else if (key == "policy") {
      if (words.size() < 2) fail("policy <spec> ...");
      for (size_t i = 1; i < words.size(); ++i) {
        PolicyConfig::parse(words[i]);  // validate early
        cfg.policies.push_back(words[i]);
      }
    } else if (key == "check_every") {
      if (words.size() != 2) fail("check_every <n>");
      cfg.check_every = std::stoi(words[1]);
      if (cfg.check_every < 1) fail("check_every must be >= 1");
    } else if (key == "repetitions") {
      if (words.size() != 2) fail("repetitions <n>");
      cfg.repetitions = std::stoi(words[1]);
      if (cfg.repetitions < 1) fail("repetitions must be >= 1");
    } else if (key == "out") {
      if (words.size() != 2) fail("out <file>");
      cfg.out_path = words[1];
    } else {
      fail("unknown directive '" + key + "'");
    }
  }
  if (cfg.patterns.empty()) throw Error("bench config: no pattern given");
  if (cfg.planners.empty()) cfg.planners.push_back(PlannerKind::Greedy);
  if (cfg.policies.empty()) cfg.policies.push_back("static");
  return cfg;
}

std::string run_benchmark(const BenchConfig& cfg) {
  DriftScript script;
  NamedStream fixed;
  const DriftScript* script_ptr = nullptr;
  const NamedStream* fixed_ptr = nullptr;
  switch (cfg.source) {
    case BenchConfig::Source::Preset:
      script = DriftScript::preset(cfg.workload_arg);
      script_ptr = &script;
      break;
    case BenchConfig::Source::Script:
      script = DriftScript::parse(read_file(cfg.workload_arg));
      script_ptr = &script;
      break;
    case BenchConfig::Source::Csv:
      fixed = ingest_csv(read_file(cfg.workload_arg));
      fixed_ptr = &fixed;
      break;
  }

  std::string out = std::string(kBenchCsvHeader) + "\n";
  char buf[256];
  for (const auto& pref : cfg.patterns) {
    Pattern pat = parse_pattern(pref.text);
    int size = pattern_size(pat);
    for (PlannerKind planner : cfg.planners) {
      CellResult baseline = run_cell(pat, planner, "static", script_ptr, fixed_ptr,
                                     cfg.check_every, cfg.repetitions);
      for (const std::string& policy : cfg.policies) {
        CellResult r = policy == "static"
                           ? baseline
                           : run_cell(pat, planner, policy, script_ptr, fixed_ptr,
                                      cfg.check_every, cfg.repetitions);
        r.gain_vs_static =
            baseline.throughput_mean > 0 ? r.throughput_mean / baseline.throughput_mean : 1.0;
        std::snprintf(buf, sizeof buf, "%s,%d,%s,%s,%.1f,%.1f,%.4f,%.2f,%.6f,%.1f\n",
                      pref.label.c_str(), size, planner_kind_name(planner), policy.c_str(),
                      r.throughput_mean, r.throughput_stddev, r.gain_vs_static,
                      r.reoptimizations_mean, r.overhead_mean, r.matches_mean);
        out += buf;
      }
    }
  }
  if (!cfg.out_path.empty()) write_file(cfg.out_path, out);
  return out;
}

namespace {

std::string explain_flat(const Pattern& pat, const StatSnapshot& s, PlannerKind planner, int k,
                         double d, bool auto_d) {
  auto [plan, trace] = run_planner(planner, pat, s);
  std::ostringstream out;
  out << "planner: " << planner_kind_name(planner) << "\n";
  out << "plan: " << render_plan(plan, pat) << "\n";
  out << "model cost: " << plan_model_cost(plan, s) << "\n";

  DcsMap dcs = collect_dcs(trace);
  auto blocks = plan_blocks(plan, pat);
  out << "deciding conditions:\n";
  if (dcs.empty()) out << "  none\n";
  for (const auto& [block, conds] : dcs) {
    std::string descr = block < static_cast<int>(blocks.size())
                            ? blocks[static_cast<size_t>(block)].descriptor
                            : "off-plan cell";
    out << "  block " << block << " (" << descr << "):\n";
    for (const auto& c : conds)
      out << "    " << c.lhs.describe(pat) << " < " << c.rhs.describe(pat) << "\n";
  }

  double dist = d;
  std::string d_avg_text = "n/a (no two-sided conditions)";
  try {
    double est = estimate_distance(trace, s);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", est);
    d_avg_text = buf;
    if (auto_d) dist = est;
  } catch (const Error&) {
    if (auto_d) dist = 0;
  }

  InvariantSet inv = select_invariants(dcs, s, k, dist);
  out << "selected invariants (K=" << (k == kAllConditions ? std::string("ALL") : std::to_string(k))
      << ", d=" << dist << "):\n";
  std::istringstream lines(dump_invariants(inv, pat, s));
  std::string line;
  while (std::getline(lines, line)) out << "  " << line << "\n";
  out << "d_avg: " << d_avg_text << "\n";
  return out.str();
}

}  // namespace

std::string explain_plan(const Pattern& pat, const StatSnapshot& s, PlannerKind planner, int k,
                         double d, bool auto_d) {
  if (!pat.is_or()) return explain_flat(pat, s, planner, k, d, auto_d);
  std::string out;
  for (size_t i = 0; i < pat.disjuncts.size(); ++i) {
    out += "disjunct " + std::to_string(i) + ":\n";
    std::istringstream lines(explain_flat(pat.disjuncts[i], s, planner, k, d, auto_d));
    std::string line;
    while (std::getline(lines, line)) out += "  " + line + "\n";
  }
  return out;
}

}  // namespace acep

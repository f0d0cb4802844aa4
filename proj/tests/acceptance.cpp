// Acceptance harness: one line of output per criterion, nonzero exit when any
// of them fails. Each criterion is self-contained and seeded, so a failure is
// reproducible by running the binary again.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "acep/bench.hpp"
#include "acep/engine.hpp"
#include "acep/greedy_planner.hpp"
#include "acep/invariants.hpp"
#include "acep/parser.hpp"
#include "acep/tree_planner.hpp"
#include "acep/workload.hpp"
#include "oracle.hpp"

using namespace acep;

namespace {

int failures = 0;

void report(int number, bool ok, const std::string& what, const std::string& detail = "") {
  std::printf("%s criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", number, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

struct Case {
  Pattern pattern;
  StatSnapshot before, after;
};

/// Seeded (pattern, snapshot-pair) generator shared by the soundness and
/// completeness suites: sizes 3..8, SEQ and AND alternating, magnitudes
/// cycling from mild to aggressive so both verdicts occur.
Case make_case(int seed) {
  std::mt19937_64 g(static_cast<std::uint64_t>(seed) * 7919 + 13);
  int n = 3 + seed % 6;
  PatternOp op = (seed % 2 == 0) ? PatternOp::Seq : PatternOp::And;
  static const double magnitudes[] = {0.05, 0.15, 0.3, 0.6};
  Case c{oracle::make_pattern(op, n), oracle::random_snapshot(n, g), {}};
  c.after = oracle::perturb_snapshot(c.before, g, magnitudes[seed % 4]);
  return c;
}

// --- criterion 1: violations always announce a real plan change -------------

void criterion1() {
  double t0 = now_seconds();
  int violations = 0, intact = 0, false_positives = 0;
  for (int seed = 0; seed < 1000; ++seed) {
    Case c = make_case(seed);
    for (PlannerKind kind : {PlannerKind::Greedy, PlannerKind::ZStream}) {
      auto [plan1, trace1] = run_planner(kind, c.pattern, c.before);
      auto dcs = collect_dcs(trace1);
      for (int k : {1, 2}) {
        auto inv = select_invariants(dcs, c.before, k, 0.0);
        auto verdict = verify(inv, c.after);
        if (verdict.intact) {
          ++intact;
          continue;
        }
        ++violations;
        auto plan2 = run_planner(kind, c.pattern, c.after).first;
        if (plan2 == plan1) ++false_positives;
      }
    }
  }
  double elapsed = now_seconds() - t0;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "%d violations, %d intact, %d false positives, %.1fs", violations, intact,
                false_positives, elapsed);
  bool ok = false_positives == 0 && violations > 0 && intact > 0 && elapsed < 60.0;
  report(1, ok, "soundness: every K in {1,2} violation is followed by a changed plan", detail);
}

// --- criterion 2: K=ALL, d=0 decisions match re-planning exactly ------------

void criterion2() {
  double t0 = now_seconds();
  int mismatches = 0, fired = 0, held = 0;
  for (int seed = 0; seed < 1000; ++seed) {
    Case c = make_case(seed);
    for (PlannerKind kind : {PlannerKind::Greedy, PlannerKind::ZStream}) {
      auto [plan1, trace1] = run_planner(kind, c.pattern, c.before);
      auto inv = select_invariants(collect_dcs(trace1), c.before, kAllConditions, 0.0);
      auto plan2 = run_planner(kind, c.pattern, c.after).first;
      bool differs = !(plan2 == plan1);

      auto verdict = verify(inv, c.after);
      bool decision =
          !verdict.intact && (verdict.block_in_plan ? true : differs /* replanner branch */);
      if (decision != differs) ++mismatches;
      (decision ? fired : held)++;
    }
  }
  double elapsed = now_seconds() - t0;
  char detail[160];
  std::snprintf(detail, sizeof detail, "%d fired, %d held, %d mismatches, %.1fs", fired, held,
                mismatches, elapsed);
  bool ok = mismatches == 0 && fired > 0 && held > 0 && elapsed < 120.0;
  report(2, ok, "completeness: K=ALL, d=0 decision iff re-planned output differs", detail);
}

// --- criterion 3: planners against exhaustive references --------------------

std::string tree_sig(const TreeNode& t) {
  if (t.is_leaf()) return std::to_string(t.leaf);
  return "(" + tree_sig(*t.left) + "," + tree_sig(*t.right) + ")";
}

void criterion3() {
  std::string detail;
  bool ok = true;

  // Greedy order equals the per-step argmin reference.
  std::mt19937_64 g(4242);
  for (int n = 2; n <= 6 && ok; ++n)
    for (int it = 0; it < 200; ++it) {
      auto p = oracle::make_pattern(it % 2 ? PatternOp::And : PatternOp::Seq, n);
      auto s = oracle::random_snapshot(n, g);
      auto plan = build_order_plan(p, s).first;
      if (plan.order != oracle::greedy_order(n, s)) {
        ok = false;
        detail = "greedy mismatch at n=" + std::to_string(n) + " it=" + std::to_string(it);
        break;
      }
    }

  // Tree planner cost equals the minimum over every enumerated tree; the
  // shape matches whenever the minimum is unique.
  std::mt19937_64 h(2025);
  for (int n = 2; n <= 6 && ok; ++n)
    for (int it = 0; it < 200; ++it) {
      auto p = oracle::make_pattern(PatternOp::Seq, n);
      auto s = oracle::random_snapshot(n, h);
      auto plan = build_tree_plan(p, s).first;
      auto all = oracle::all_span_trees(0, n, s);
      double best = oracle::min_tree_cost(all);
      if (plan.tree->cost != best) {
        ok = false;
        detail = "tree cost off optimum at n=" + std::to_string(n);
        break;
      }
      int minima = 0;
      std::string best_sig;
      for (const auto& t : all)
        if (t->cost == best) {
          ++minima;
          best_sig = oracle::ref_signature(*t);
        }
      if (minima == 1 && tree_sig(*plan.tree) != best_sig) {
        ok = false;
        detail = "tree shape differs from the unique optimum at n=" + std::to_string(n);
        break;
      }
    }
  std::mt19937_64 h2(78);
  for (int n = 2; n <= 5 && ok; ++n)
    for (int it = 0; it < 200; ++it) {
      auto p = oracle::make_pattern(PatternOp::And, n);
      auto s = oracle::random_snapshot(n, h2);
      auto plan = build_tree_plan(p, s).first;
      std::vector<TypeId> ids;
      for (TypeId i = 0; i < n; ++i) ids.push_back(i);
      if (plan.tree->cost != oracle::min_tree_cost(oracle::all_set_trees(ids, s))) {
        ok = false;
        detail = "AND tree cost off optimum at n=" + std::to_string(n);
        break;
      }
    }

  // Candidate counters follow the Catalan numbers.
  std::mt19937_64 h3(18);
  for (int n = 2; n <= 6 && ok; ++n) {
    auto p = oracle::make_pattern(PatternOp::Seq, n);
    auto s = oracle::random_snapshot(n, h3);
    TreePlanInstrumentation instr;
    build_tree_plan(p, s, &instr);
    for (const auto& [leafset, count] : instr.candidates)
      if (count != oracle::catalan(static_cast<int>(leafset.size()) - 1)) {
        ok = false;
        detail = "candidate count is not Catalan(k-1) for k=" +
                 std::to_string(leafset.size());
      }
  }
  report(3, ok, "planner oracles: greedy argmin, exhaustive tree minimum, Catalan counts",
         detail);
}

// --- criterion 4: the worked three-type example end to end ------------------

void criterion4() {
  auto p = parse_pattern("PATTERN SEQ(A a, B b, C c) WITHIN 10 s");
  auto s1 = StatSnapshot::uniform(3);
  s1.rates = {100, 15, 10};

  bool ok = true;
  std::string detail;
  auto fail = [&](const std::string& why) {
    if (ok) detail = why;
    ok = false;
  };

  auto [plan1, trace1] = build_order_plan(p, s1);
  if (render_plan(plan1, p) != "C,B,A") fail("initial plan is " + render_plan(plan1, p));

  auto dcs = collect_dcs(trace1);
  if (dcs.size() != 2 || dcs[0].size() != 2 || dcs[1].size() != 1)
    fail("unexpected deciding-condition partition");
  // Step 1: rate_C beat both rate_B and rate_A. Step 2: rate_B beat rate_A.
  std::vector<double> rhs0;
  for (const auto& c : dcs[0]) {
    if (c.lhs_at_creation != 10.0) fail("step-1 winner side is not rate_C");
    rhs0.push_back(c.rhs_at_creation);
  }
  std::sort(rhs0.begin(), rhs0.end());
  if (rhs0 != std::vector<double>{15.0, 100.0}) fail("step-1 loser sides wrong");
  if (dcs[1][0].lhs_at_creation != 15.0 || dcs[1][0].rhs_at_creation != 100.0)
    fail("step-2 condition wrong");

  auto inv = select_invariants(dcs, s1, 1, 0.0);
  if (inv.size() != 2) fail("selected invariant count != 2");
  auto dump = dump_invariants(inv, p, s1);
  if (dump.find("gap=5]") == std::string::npos || dump.find("gap=85]") == std::string::npos)
    fail("selected invariants are not {rate_C<rate_B, rate_B<rate_A}");
  if (!verify(inv, s1).intact) fail("fresh invariants do not hold");

  // rate_C climbs to 16: the tightest invariant flips, one re-plan follows.
  auto s2 = s1;
  s2.rates[2] = 16;
  int replans = 0;
  InvariantPolicy policy(1, 0.0);
  policy.install(inv);
  std::string new_plan;
  if (policy.decide(s2)) {
    ++replans;
    auto [plan2, trace2] = build_order_plan(p, s2);
    new_plan = render_plan(plan2, p);
    policy.install(select_invariants(collect_dcs(trace2), s2, 1, 0.0));
  }
  if (policy.decide(s2)) ++replans;  // re-armed invariants must hold again
  if (replans != 1) fail("expected exactly one re-plan, got " + std::to_string(replans));
  if (new_plan != "B,C,A") fail("re-planned order is " + new_plan);

  report(4, ok, "worked example: C,B,A; two tight invariants; one re-plan to B,C,A", detail);
}

// --- criterion 5: engine match multisets equal brute force ------------------

void criterion5() {
  struct Shape {
    const char* text;
    int count;
    Timestamp span_ms;
  };
  const Shape shapes[] = {
      {"PATTERN SEQ(A a, B b) WHERE ((a.x < b.x)) WITHIN 400 ms", 10000, 2000000},
      {"PATTERN SEQ(A a, B b, C c) WHERE ((a.x < b.x)) WITHIN 300 ms", 10000, 3000000},
      {"PATTERN AND(A a, B b, C c) WHERE ((a.x < b.x) AND (b.x < c.x)) WITHIN 300 ms", 10000,
       3000000},
      {"PATTERN SEQ(A a, B b, C c, D d) WITHIN 200 ms", 2500, 250000},
      {"PATTERN AND(A a, B b, C c) WITHIN 250 ms", 10000, 4000000},
  };

  bool ok = true;
  std::string detail;
  std::uint64_t total_matches = 0;
  for (int seed = 0; seed < 100 && ok; ++seed) {
    const Shape& shape = shapes[seed % 5];
    auto p = parse_pattern(shape.text);
    int n = pattern_size(p);
    std::mt19937_64 g(static_cast<std::uint64_t>(seed) * 104729 + 7);
    auto stream = oracle::random_stream(p, shape.count, shape.span_ms, g);
    auto expect = oracle::enumerate_matches(p, stream);
    total_matches += expect.size();

    auto run_static = [&](PlannerKind kind) {
      EngineConfig cfg;
      cfg.planner = kind;
      AdaptiveEngine eng(p, PolicyConfig::parse("static").instantiate(), cfg);
      eng.start(oracle::random_snapshot(n, g));
      std::vector<std::string> keys;
      run_loop(eng, vector_source(stream),
               [&](const Match& m) { keys.push_back(m.key()); });
      std::sort(keys.begin(), keys.end());
      return keys;
    };
    if (run_static(PlannerKind::Greedy) != expect) {
      ok = false;
      detail = "order plan diverges at seed " + std::to_string(seed);
      break;
    }
    if (run_static(PlannerKind::ZStream) != expect) {
      ok = false;
      detail = "tree plan diverges at seed " + std::to_string(seed);
      break;
    }

    // Mid-stream migration from an order plan to a tree plan.
    AdaptiveEngine eng(p, PolicyConfig::parse("static").instantiate());
    eng.start(oracle::random_snapshot(n, g));
    std::vector<std::string> keys;
    std::vector<Match> out;
    size_t half = stream.size() / 2;
    for (size_t i = 0; i < stream.size(); ++i) {
      if (i == half) {
        auto s2 = oracle::random_snapshot(n, g);
        auto [plan, trace] = run_planner(PlannerKind::ZStream, p, s2);
        eng.migrate(std::move(plan), std::move(trace), s2, stream[i].ts);
      }
      out.clear();
      eng.process_event(stream[i], out);
      for (const auto& m : out) keys.push_back(m.key());
    }
    std::sort(keys.begin(), keys.end());
    if (keys != expect) {
      ok = false;
      detail = "migration run diverges at seed " + std::to_string(seed);
      break;
    }
  }
  if (ok) detail = std::to_string(total_matches) + " matches cross-checked";
  report(5, ok, "match multisets equal brute force for both plan kinds and across migration",
         detail);
}

// --- criterion 6: the d_avg worked value ------------------------------------

void criterion6() {
  auto p = parse_pattern("PATTERN SEQ(A a, B b, C c) WITHIN 10 s");
  auto s = StatSnapshot::uniform(3);
  s.rates = {100, 15, 10};
  auto trace = build_order_plan(p, s).second;
  double expected = (9.0 + 0.5 + 85.0 / 15.0) / 3.0;
  double got = estimate_distance(trace, s);
  char detail[96];
  std::snprintf(detail, sizeof detail, "d_avg=%.10f expected %.10f", got, expected);
  report(6, std::fabs(got - expected) <= 1e-9 && trace.size() == 3,
         "estimate_distance returns 5.0556 on the three-condition trace", detail);
}

// --- criterion 7: policy comparison on the two presets ----------------------

void criterion7() {
  bool ok = true;
  std::string detail;

  auto p = parse_pattern(
      "PATTERN SEQ(A a, B b, C c) WHERE ((a.x < b.x) AND (b.y < c.y)) WITHIN 2 s");
  auto traffic = DriftScript::preset("traffic-like");

  // Five-point threshold scan picks t_opt by mean throughput.
  double t_opt = 0.2, best_eps = 0;
  for (double t : {0.2, 0.4, 0.8, 1.6, 3.2}) {
    char spec[32];
    std::snprintf(spec, sizeof spec, "threshold:%g", t);
    auto r = run_cell(p, PlannerKind::ZStream, spec, &traffic, nullptr, 1000, 3);
    if (r.throughput_mean > best_eps) {
      best_eps = r.throughput_mean;
      t_opt = t;
    }
  }

  // Head-to-head comparison. Wall-clock noise on a shared machine drifts on a
  // scale of seconds, so each repetition times all three policies in three
  // interleaved rounds (rotating the order) and keeps each policy's best
  // round; one untimed warm-up run per repetition precedes the measurements.
  char thr_spec[32];
  std::snprintf(thr_spec, sizeof thr_spec, "threshold:%g", t_opt);
  const std::string specs[3] = {"unconditional", thr_spec, "invariant:K=1:d=auto"};
  double eps[3][3] = {};
  double reopts[3][3] = {};
  auto run_one = [&](const std::string& spec, const std::vector<Event>& events,
                     double& out_reopts) {
    auto pc = PolicyConfig::parse(spec);
    EngineConfig cfg;
    cfg.planner = PlannerKind::ZStream;
    cfg.check_every = 1000;
    cfg.auto_distance = pc.auto_distance;
    AdaptiveEngine eng(p, pc.instantiate(), cfg);
    eng.start();
    auto m = run_loop(eng, vector_source(events));
    out_reopts = static_cast<double>(m.reoptimizations);
    return m.throughput_eps();
  };
  for (int rep = 0; rep < 3; ++rep) {
    auto script = traffic;
    script.seed += static_cast<std::uint64_t>(rep);
    auto events = bind_stream(generate(script), p);
    double scratch;
    run_one(specs[rep % 3], events, scratch);  // warm-up, discarded
    for (int round = 0; round < 3; ++round)
      for (int pos = 0; pos < 3; ++pos) {
        int s = (pos + round + rep) % 3;
        eps[s][rep] = std::max(eps[s][rep], run_one(specs[s], events, reopts[s][rep]));
      }
  }
  CellResult uncond{}, best_thr{}, invar{};
  CellResult* cells[3] = {&uncond, &best_thr, &invar};
  for (int s = 0; s < 3; ++s) {
    double mean = (eps[s][0] + eps[s][1] + eps[s][2]) / 3.0;
    double var = 0;
    for (int rep = 0; rep < 3; ++rep) var += (eps[s][rep] - mean) * (eps[s][rep] - mean);
    cells[s]->throughput_mean = mean;
    cells[s]->throughput_stddev = std::sqrt(var / 2.0);
    cells[s]->reoptimizations_mean = (reopts[s][0] + reopts[s][1] + reopts[s][2]) / 3.0;
  }

  if (!(uncond.reoptimizations_mean >= best_thr.reoptimizations_mean &&
        best_thr.reoptimizations_mean >= invar.reoptimizations_mean)) {
    ok = false;
    detail = "re-plan ordering broken";
  }
  auto within_sigma = [&](const CellResult& alt) {
    // Guard the sample stddev with a floor: same-plan runs on this machine
    // jitter by several percent, and three repetitions can understate that.
    double sigma = std::max({alt.throughput_stddev, invar.throughput_stddev,
                             0.02 * alt.throughput_mean});
    return invar.throughput_mean >= alt.throughput_mean - sigma;
  };
  if (!within_sigma(uncond) || !within_sigma(best_thr)) {
    ok = false;
    detail = "invariant throughput below an alternative by more than one stddev";
  }

  // Stocks-like jitter: the unconditional policy pays for a full tree plan at
  // every check while the invariant policy only re-verifies.
  auto p6 = parse_pattern("PATTERN SEQ(A a, B b, C c, D d, E e, F f) WITHIN 100 ms");
  auto run_stocks = [&](const std::string& spec) {
    double overhead = 0;
    for (int rep = 0; rep < 3; ++rep) {
      auto script = DriftScript::preset("stocks-like");
      script.seed += static_cast<std::uint64_t>(rep);
      auto stream = generate(script);
      auto pc = PolicyConfig::parse(spec);
      EngineConfig cfg;
      cfg.planner = PlannerKind::ZStream;
      cfg.check_every = 1000;
      cfg.auto_distance = pc.auto_distance;
      cfg.stats.window_ms = 10000;
      AdaptiveEngine eng(p6, pc.instantiate(), cfg);
      eng.start();
      auto metrics = run_loop(eng, vector_source(bind_stream(stream, p6)));
      overhead += metrics.overhead_frac();
    }
    return overhead / 3.0;
  };
  double oh_uncond = run_stocks("unconditional");
  double oh_invar = run_stocks("invariant:K=1:d=auto");
  if (!(oh_uncond > 5.0 * oh_invar)) {
    ok = false;
    detail = "stocks-like overhead ratio too small";
  }

  char numbers[240];
  std::snprintf(numbers, sizeof numbers,
                "traffic reopts %.1f/%.1f/%.1f (t_opt=%g), eps %.0f/%.0f/%.0f; "
                "stocks overhead %.4f vs %.4f",
                uncond.reoptimizations_mean, best_thr.reoptimizations_mean,
                invar.reoptimizations_mean, t_opt, uncond.throughput_mean,
                best_thr.throughput_mean, invar.throughput_mean, oh_uncond, oh_invar);
  if (detail.empty())
    detail = numbers;
  else
    detail += std::string("; ") + numbers;
  report(7, ok, "presets: invariant policy re-plans least at competitive throughput", detail);
}

// --- criterion 8: sensitivity of the margin d -------------------------------

// Drifting workload for the d sweep: a stable rare anchor A plus two equally
// frequent followers whose step-1 comparison oscillates around a near-tie
// (ratios 0.96 and 1.04) before stepping decisively to 1.32. Small d values
// churn on the noise, d=0.5 stays blind to the real shift.
const char* kSweepScript =
    "seed 17\n"
    "duration 600000\n"
    "rate A 0:25\n"
    "rate B 0:70\n"
    "rate C 0:70\n"
    "sel x A B 0:0.24 40000:0.26 80000:0.24 120000:0.26 160000:0.24 200000:0.26 "
    "240000:0.24 280000:0.26 320000:0.24 360000:0.33\n"
    "sel w A C 0:0.25\n"
    "sel v B C 0:0.002\n";

void criterion8() {
  auto p = parse_pattern(
      "PATTERN SEQ(A a, B b, C c) WHERE ((a.x < b.x) AND (a.w < c.w) AND (b.v < c.v)) "
      "WITHIN 3 s");
  auto script = DriftScript::parse(kSweepScript);
  const double ds[] = {0.0, 0.05, 0.1, 0.25, 0.5};
  // As in criterion 7, machine drift is handled by interleaving: every
  // repetition times all five margins in two rotated rounds and keeps each
  // margin's best round.
  double eps[5][3] = {};
  double reopts[5][3] = {};
  for (int rep = 0; rep < 3; ++rep) {
    auto scr = script;
    scr.seed += static_cast<std::uint64_t>(rep);
    auto events = bind_stream(generate(scr), p);
    auto run_one = [&](double d, double& out_reopts) {
      char spec[40];
      std::snprintf(spec, sizeof spec, "invariant:K=1:d=%g", d);
      auto pc = PolicyConfig::parse(spec);
      EngineConfig cfg;
      cfg.check_every = 1000;
      cfg.auto_distance = pc.auto_distance;
      AdaptiveEngine eng(p, pc.instantiate(), cfg);
      eng.start();
      auto m = run_loop(eng, vector_source(events));
      out_reopts = static_cast<double>(m.reoptimizations);
      return m.throughput_eps();
    };
    double scratch;
    run_one(ds[rep % 5], scratch);  // warm-up, discarded
    for (int round = 0; round < 2; ++round)
      for (int pos = 0; pos < 5; ++pos) {
        int c = (pos + round + rep) % 5;
        eps[c][rep] = std::max(eps[c][rep], run_one(ds[c], reopts[c][rep]));
      }
  }
  std::vector<CellResult> cells(5);
  for (int c = 0; c < 5; ++c) {
    cells[static_cast<size_t>(c)].throughput_mean = (eps[c][0] + eps[c][1] + eps[c][2]) / 3.0;
    cells[static_cast<size_t>(c)].reoptimizations_mean =
        (reopts[c][0] + reopts[c][1] + reopts[c][2]) / 3.0;
  }
  size_t best = 0;
  for (size_t i = 1; i < cells.size(); ++i)
    if (cells[i].throughput_mean > cells[best].throughput_mean) best = i;

  char detail[200];
  std::snprintf(detail, sizeof detail,
                "eps %.0f/%.0f/%.0f/%.0f/%.0f, reopts %.1f/%.1f/%.1f/%.1f/%.1f, best d=%g",
                cells[0].throughput_mean, cells[1].throughput_mean, cells[2].throughput_mean,
                cells[3].throughput_mean, cells[4].throughput_mean,
                cells[0].reoptimizations_mean, cells[1].reoptimizations_mean,
                cells[2].reoptimizations_mean, cells[3].reoptimizations_mean,
                cells[4].reoptimizations_mean, ds[best]);
  bool ok = best >= 1 && best <= 3;
  report(8, ok, "d sweep peaks at an interior margin, never at 0.5", detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "acep/decision.hpp"
#include "acep/plan.hpp"
#include "acep/stats.hpp"
#include "acep/types.hpp"

namespace acep {

/// A complete pattern match: one event per non-negated position, a list for a
/// Kleene position. Indexed by type id.
struct Match {
  std::vector<std::vector<Event>> bindings;
  Timestamp detected_at = 0;

  Timestamp min_ts() const;
  /// Canonical identity (type ids + event seqs) for multiset comparison.
  std::string key() const;
};

struct RunMetrics {
  std::uint64_t events = 0;
  std::uint64_t matches = 0;
  std::uint64_t reoptimizations = 0;
  std::uint64_t planner_invocations = 0;
  std::uint64_t decision_checks = 0;
  std::uint64_t forced_migration_discards = 0;
  std::uint64_t out_of_order = 0;
  double decision_seconds = 0;
  double planner_seconds = 0;
  double wall_seconds = 0;
  std::size_t peak_partial_matches = 0;

  double throughput_eps() const { return wall_seconds > 0 ? events / wall_seconds : 0.0; }
  double overhead_frac() const {
    return wall_seconds > 0 ? (decision_seconds + planner_seconds) / wall_seconds : 0.0;
  }
};

/// Single-plan evaluation instance (order- or tree-based). Events must carry
/// strictly increasing seq numbers and nondecreasing timestamps.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual void process(const Event& e, std::vector<Match>& out) = 0;
  virtual std::size_t live_partial_matches() const = 0;
};

std::unique_ptr<Evaluator> make_evaluator(const Pattern& p, const Plan& plan);

enum class PlannerKind { Greedy, ZStream };
PlannerKind planner_kind_from_name(const std::string& name);
const char* planner_kind_name(PlannerKind k);

/// Plans with the configured planner and returns (plan, trace).
std::pair<Plan, PlanTrace> run_planner(PlannerKind kind, const Pattern& p, const StatSnapshot& s);

struct EngineConfig {
  PlannerKind planner = PlannerKind::Greedy;
  int check_every = 1000;
  bool auto_distance = false;  // re-estimate the invariant margin d per deployment
  StatCollectorConfig stats;
};

/// Detection-adaptation loop over one flat (non-OR) pattern: evaluates the
/// current plan, periodically snapshots statistics, consults the decision
/// policy and migrates to a better plan when one is found. During migration
/// the draining instance keeps matches containing at least one pre-switch
/// event; the fresh instance owns the all-new matches.
class AdaptiveEngine {
 public:
  AdaptiveEngine(Pattern pattern, std::unique_ptr<DecisionPolicy> policy, EngineConfig cfg = {});

  /// Builds and deploys the initial plan.
  void start(const StatSnapshot& initial);
  void start();  // empty initial statistics

  void process_event(const Event& e, std::vector<Match>& out);

  /// Force a migration to `plan` at time t0 (exposed for tests).
  void migrate(Plan plan, PlanTrace trace, const StatSnapshot& s, Timestamp t0);

  const Plan& current_plan() const { return plan_; }
  const Pattern& pattern() const { return pattern_; }
  RunMetrics& metrics() { return metrics_; }
  bool migrating() const { return draining_.has_value(); }

 private:
  void maybe_adapt(Timestamp now);
  void deploy(Plan plan, const PlanTrace& trace, const StatSnapshot& s, Timestamp t0);
  void arm_policy(const PlanTrace& trace, const StatSnapshot& s);

  Pattern pattern_;
  std::unique_ptr<DecisionPolicy> policy_;
  EngineConfig cfg_;
  StatCollector collector_;

  Plan plan_;
  std::unique_ptr<Evaluator> active_;
  Timestamp active_born_ = 0;  // the instance owns matches with min_ts >= born
  struct Draining {
    std::unique_ptr<Evaluator> instance;
    Timestamp born = 0;
    Timestamp t0 = 0;        // matches with min_ts < t0 belong here
    Timestamp deadline = 0;  // t0 + W
  };
  std::optional<Draining> draining_;

  RunMetrics metrics_;
  int since_check_ = 0;
  Timestamp last_ts_ = -1;
  std::uint64_t seq_ = 0;
  std::vector<Match> scratch_;
};

/// Event source abstraction: returns false when exhausted.
using EventSource = std::function<bool(Event&)>;

EventSource vector_source(std::vector<Event> events);

/// Runs the full detection-adaptation loop; wall time covers the processing
/// loop only. Matches are forwarded to `sink` when given.
RunMetrics run_loop(AdaptiveEngine& engine, EventSource source,
                    const std::function<void(const Match&)>& sink = {});

}  // namespace acep

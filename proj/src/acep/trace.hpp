#pragma once

#include <string>
#include <vector>

#include "acep/plan.hpp"
#include "acep/types.hpp"

namespace acep {

/// r_j * sel[j][j] * prod_{k in prefix} sel[k][j] -- the per-step objective of
/// the greedy order planner.
double eval_greedy_expr(TypeId candidate, const std::vector<TypeId>& prefix,
                        const StatSnapshot& s);

/// A re-evaluable side of a deciding condition: either a greedy step
/// expression or the cost of a candidate tree whose structure was frozen at
/// planning time (statistics are always read live).
struct CondExpr {
  enum class Kind { GreedyStep, TreeCost };
  Kind kind = Kind::GreedyStep;

  TypeId candidate = -1;
  std::vector<TypeId> prefix;

  TreePtr tree;  // structure + creation-time cost/cardinality caches

  double eval(const StatSnapshot& s) const;
  double frozen_value() const;  // value captured at creation
  std::string describe(const Pattern& pat) const;

  static CondExpr greedy(TypeId cand, std::vector<TypeId> pfx, const StatSnapshot& s);
  static CondExpr tree_cost_expr(TreePtr t);
};

/// One block-building comparison that held at planning time: lhs < rhs
/// (winner < loser). violate_on_equal captures the deterministic tie-break:
/// when true, equality of the two sides already flips the planner's choice.
struct DecidingCondition {
  int block = 0;
  bool block_in_plan = true;
  CondExpr lhs, rhs;
  double lhs_at_creation = 0.0;
  double rhs_at_creation = 0.0;
  bool violate_on_equal = false;
};

struct PlanTrace {
  std::vector<DecidingCondition> records;

  bool empty() const { return records.empty(); }
  size_t size() const { return records.size(); }
};

/// CSV form "block,winner,loser,lhs,rhs", one line per record, with header.
std::string trace_to_csv(const PlanTrace& t, const Pattern& pat);

}  // namespace acep

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acep/trace.hpp"
#include "acep/types.hpp"

namespace acep {

inline constexpr int kAllConditions = -1;  // K = ALL

/// Partition of a planner trace into per-block deciding condition sets.
using DcsMap = std::map<int, std::vector<DecidingCondition>>;

DcsMap collect_dcs(const PlanTrace& trace);

/// Ordered invariant list for one plan. Verification order follows block
/// order (bottom-up for tree plans).
struct InvariantSet {
  std::vector<DecidingCondition> conditions;
  int k = 1;            // kAllConditions for ALL
  double distance = 0;  // minimal relative margin d
  std::string created_from;  // canonical form of the plan

  size_t size() const { return conditions.size(); }
};

/// Keeps, per block, the K conditions with the smallest rhs-lhs gap under s
/// (ties by trace order). K = ALL keeps everything, including conditions for
/// memoized cells outside the final plan; finite K restricts to plan blocks.
InvariantSet select_invariants(const DcsMap& dcs, const StatSnapshot& s, int k, double d);

struct Verdict {
  bool intact = true;
  int block = -1;
  int condition = -1;       // index into InvariantSet::conditions
  bool block_in_plan = true;
  double lhs = 0, rhs = 0;  // values at verification time
};

/// Scans conditions in order; a condition is violated when its left side
/// exceeds the right by the relative margin d. Returns the first violation.
Verdict verify(const InvariantSet& inv, const StatSnapshot& s);

/// Average relative difference between the sides of the trace's deciding
/// conditions: AVG(|rhs-lhs| / min(lhs, rhs)). Conditions with a zero-valued
/// side are skipped; `skipped`, when given, receives their count.
double estimate_distance(const PlanTrace& trace, const StatSnapshot& s, int* skipped = nullptr);

/// Text dump: "block <i>: <lhs> < <rhs> [gap=<g>]" per condition.
std::string dump_invariants(const InvariantSet& inv, const Pattern& pat, const StatSnapshot& s);

}  // namespace acep

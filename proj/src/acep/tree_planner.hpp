#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "acep/plan.hpp"
#include "acep/trace.hpp"
#include "acep/types.hpp"

namespace acep {

/// Instrumentation: number of candidate trees examined per memoized leafset.
/// For a SEQ span of k leaves this equals Catalan(k-1).
struct TreePlanInstrumentation {
  std::map<std::vector<TypeId>, std::uint64_t> candidates;
};

/// Dynamic-programming tree planner with the ZStream cost model. SEQ patterns
/// use the contiguous-span DP (leaf order = pattern order); AND patterns use a
/// subset DP. Ties prefer the latest-enumerated split (for SEQ the larger
/// left subtree), deterministically. The trace records one deciding
/// condition per incumbent comparison, attributed to the cheaper tree's root
/// cell; cells of the final plan come first, in bottom-up order.
std::pair<Plan, PlanTrace> build_tree_plan(const Pattern& p, const StatSnapshot& s,
                                           TreePlanInstrumentation* instr = nullptr);

}  // namespace acep

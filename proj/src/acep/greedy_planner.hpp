#pragma once

#include <utility>

#include "acep/plan.hpp"
#include "acep/trace.hpp"
#include "acep/types.hpp"

namespace acep {

/// Greedy order-based planner: position 1 minimizes r_j*sel[j][j], every
/// later position minimizes the step expression among the remaining types.
/// Ties break toward the lowest type id. The trace holds one deciding
/// condition per (step, rejected candidate): n-i records at step i.
std::pair<Plan, PlanTrace> build_order_plan(const Pattern& p, const StatSnapshot& s);

}  // namespace acep

#include "acep/greedy_planner.hpp"

#include <algorithm>

namespace acep {

std::pair<Plan, PlanTrace> build_order_plan(const Pattern& p, const StatSnapshot& s) {
  if (p.is_or()) throw Error("build_order_plan: plan each OR disjunct separately");
  int n = pattern_size(p);
  if (n < 1) throw Error("build_order_plan: empty pattern");
  if (s.dim() != p.position_count() && s.dim() != n)
    throw Error("build_order_plan: snapshot dimension does not match pattern");

  Plan plan;
  plan.kind = PlanKind::Order;
  PlanTrace trace;

  std::vector<TypeId> remaining;
  for (TypeId j = 0; j < n; ++j) remaining.push_back(j);

  for (int step = 0; !remaining.empty(); ++step) {
    std::vector<double> values(remaining.size());
    for (size_t i = 0; i < remaining.size(); ++i)
      values[i] = eval_greedy_expr(remaining[i], plan.order, s);

    size_t best = 0;
    for (size_t i = 1; i < remaining.size(); ++i)
      if (values[i] < values[best]) best = i;  // remaining is id-sorted, so ties keep the lowest id

    TypeId winner = remaining[best];
    for (size_t i = 0; i < remaining.size(); ++i) {
      if (i == best) continue;
      DecidingCondition c;
      c.block = step;
      c.block_in_plan = true;
      c.lhs = CondExpr::greedy(winner, plan.order, s);
      c.rhs = CondExpr::greedy(remaining[i], plan.order, s);
      c.lhs_at_creation = values[best];
      c.rhs_at_creation = values[i];
      c.violate_on_equal = winner > remaining[i];
      trace.records.push_back(std::move(c));
    }

    plan.order.push_back(winner);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return {std::move(plan), std::move(trace)};
}

}  // namespace acep

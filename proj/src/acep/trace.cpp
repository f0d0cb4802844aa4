#include "acep/trace.hpp"

#include <cstdio>

namespace acep {

double eval_greedy_expr(TypeId candidate, const std::vector<TypeId>& prefix,
                        const StatSnapshot& s) {
  double v = s.rate(candidate) * s.selectivity(candidate, candidate);
  for (TypeId k : prefix) v *= s.selectivity(k, candidate);
  return v;
}

CondExpr CondExpr::greedy(TypeId cand, std::vector<TypeId> pfx, const StatSnapshot& s) {
  CondExpr e;
  e.kind = Kind::GreedyStep;
  e.candidate = cand;
  e.prefix = std::move(pfx);
  (void)s;
  return e;
}

CondExpr CondExpr::tree_cost_expr(TreePtr t) {
  CondExpr e;
  e.kind = Kind::TreeCost;
  e.tree = std::move(t);
  return e;
}

double CondExpr::eval(const StatSnapshot& s) const {
  if (kind == Kind::GreedyStep) return eval_greedy_expr(candidate, prefix, s);
  return tree_cost(*tree, s);
}

double CondExpr::frozen_value() const {
  if (kind == Kind::TreeCost) return tree->cost;
  throw Error("greedy expressions carry no frozen value");
}

namespace {

std::string tree_names(const TreeNode& t, const Pattern& pat) {
  if (t.is_leaf()) return pat.position_of_type(t.leaf).type.name;
  return "(" + tree_names(*t.left, pat) + "," + tree_names(*t.right, pat) + ")";
}

}  // namespace

std::string CondExpr::describe(const Pattern& pat) const {
  if (kind == Kind::TreeCost) return "cost(" + tree_names(*tree, pat) + ")";
  const std::string& name = pat.position_of_type(candidate).type.name;
  std::string out = "rate_" + name;
  bool has_self = false;
  for (const auto& p : pat.predicates)
    if (p.single_position() && p.lpos == candidate) has_self = true;
  if (has_self) out += "*sel(" + name + "," + name + ")";
  for (TypeId k : prefix) {
    if (pat.predicates_between(k, candidate).empty()) continue;
    out += "*sel(" + pat.position_of_type(k).type.name + "," + name + ")";
  }
  return out;
}

std::string trace_to_csv(const PlanTrace& t, const Pattern& pat) {
  std::string out = "block,winner,loser,lhs,rhs\n";
  char buf[64];
  for (const auto& r : t.records) {
    out += std::to_string(r.block) + "," + r.lhs.describe(pat) + "," + r.rhs.describe(pat);
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", r.lhs_at_creation, r.rhs_at_creation);
    out += buf;
  }
  return out;
}

}  // namespace acep

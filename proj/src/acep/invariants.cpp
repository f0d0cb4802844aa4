#include "acep/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace acep {

DcsMap collect_dcs(const PlanTrace& trace) {
  DcsMap out;
  for (const auto& rec : trace.records) out[rec.block].push_back(rec);
  return out;
}

InvariantSet select_invariants(const DcsMap& dcs, const StatSnapshot& s, int k, double d) {
  if (k != kAllConditions && k < 1) throw Error("select_invariants: K must be >= 1 or ALL");
  if (d < 0) throw Error("select_invariants: distance must be >= 0");
  InvariantSet inv;
  inv.k = k;
  inv.distance = d;
  for (const auto& [block, conds] : dcs) {
    std::vector<std::pair<double, size_t>> gaps;
    for (size_t i = 0; i < conds.size(); ++i) {
      double lhs = conds[i].lhs.eval(s);
      double rhs = conds[i].rhs.eval(s);
      bool holds = lhs < rhs || (lhs == rhs && !conds[i].violate_on_equal);
      if (!holds)
        throw Error("select_invariants: deciding condition violated under the given snapshot "
                    "(stale trace)");
      gaps.emplace_back(rhs - lhs, i);
    }
    if (k == kAllConditions) {
      for (const auto& c : conds) inv.conditions.push_back(c);
      continue;
    }
    // Finite K monitors only conditions whose violation proves a plan change.
    std::erase_if(gaps, [&](const auto& g) { return !conds[g.second].block_in_plan; });
    std::stable_sort(gaps.begin(), gaps.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t keep = std::min(static_cast<size_t>(k), gaps.size());
    std::vector<size_t> chosen;
    for (size_t i = 0; i < keep; ++i) chosen.push_back(gaps[i].second);
    std::sort(chosen.begin(), chosen.end());  // preserve trace order among the kept
    for (size_t i : chosen) inv.conditions.push_back(conds[i]);
  }
  return inv;
}

Verdict verify(const InvariantSet& inv, const StatSnapshot& s) {
  Verdict v;
  for (size_t i = 0; i < inv.conditions.size(); ++i) {
    const auto& c = inv.conditions[i];
    double lhs = c.lhs.eval(s);
    double rhs = c.rhs.eval(s);
    double bound = (1.0 + inv.distance) * rhs;
    bool violated = c.violate_on_equal ? lhs >= bound : lhs > bound;
    if (violated) {
      v.intact = false;
      v.block = c.block;
      v.condition = static_cast<int>(i);
      v.block_in_plan = c.block_in_plan;
      v.lhs = lhs;
      v.rhs = rhs;
      return v;
    }
  }
  return v;
}

double estimate_distance(const PlanTrace& trace, const StatSnapshot& s, int* skipped) {
  if (trace.empty()) throw Error("estimate_distance: empty trace");
  double sum = 0;
  int used = 0, skip = 0;
  for (const auto& rec : trace.records) {
    double lhs = rec.lhs.eval(s);
    double rhs = rec.rhs.eval(s);
    double lo = std::min(lhs, rhs);
    if (lo <= 0) {
      ++skip;
      continue;
    }
    sum += std::fabs(rhs - lhs) / lo;
    ++used;
  }
  if (skipped) *skipped = skip;
  if (used == 0) throw Error("estimate_distance: all conditions had a zero-valued side");
  return sum / used;
}

std::string dump_invariants(const InvariantSet& inv, const Pattern& pat, const StatSnapshot& s) {
  std::string out;
  char buf[64];
  for (const auto& c : inv.conditions) {
    double gap = c.rhs.eval(s) - c.lhs.eval(s);
    std::snprintf(buf, sizeof buf, "%g", gap);
    out += "block " + std::to_string(c.block) + ": " + c.lhs.describe(pat) + " < " +
           c.rhs.describe(pat) + " [gap=" + buf + "]";
    if (!c.block_in_plan) out += " (off-plan cell)";
    out += "\n";
  }
  if (inv.conditions.empty()) out = "no invariants\n";
  return out;
}

}  // namespace acep

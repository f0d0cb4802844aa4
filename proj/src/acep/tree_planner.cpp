#include "acep/tree_planner.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

namespace acep {

namespace {

using Mask = std::uint32_t;

struct Cell {
  TreePtr best;
  std::uint64_t candidates = 0;
  std::vector<DecidingCondition> records;  // block assigned after the DP
};

std::vector<TypeId> mask_leafset(Mask m) {
  std::vector<TypeId> out;
  for (TypeId i = 0; m; ++i, m >>= 1)
    if (m & 1u) out.push_back(i);
  return out;
}

void consider_split(Cell& cell, const Cell& left, const Cell& right, const StatSnapshot& s) {
  TreePtr cand = make_internal(left.best, right.best, s);
  cell.candidates += left.candidates * right.candidates;
  if (!cell.best) {
    cell.best = std::move(cand);
    return;
  }
  DecidingCondition c;
  if (cand->cost <= cell.best->cost) {
    c.lhs = CondExpr::tree_cost_expr(cand);
    c.rhs = CondExpr::tree_cost_expr(cell.best);
    c.lhs_at_creation = cand->cost;
    c.rhs_at_creation = cell.best->cost;
    // At equal cost the later-enumerated candidate wins, so equality of the
    // sides does not flip this choice.
    c.violate_on_equal = false;
    cell.best = std::move(cand);
  } else {
    c.lhs = CondExpr::tree_cost_expr(cell.best);
    c.rhs = CondExpr::tree_cost_expr(cand);
    c.lhs_at_creation = cell.best->cost;
    c.rhs_at_creation = cand->cost;
    // Had the sides been equal, the candidate would have replaced the
    // incumbent: equality is already a violation here.
    c.violate_on_equal = true;
  }
  cell.records.push_back(std::move(c));
}

}  // namespace

std::pair<Plan, PlanTrace> build_tree_plan(const Pattern& p, const StatSnapshot& s,
                                           TreePlanInstrumentation* instr) {
  if (p.is_or()) throw Error("build_tree_plan: plan each OR disjunct separately");
  int n = pattern_size(p);
  if (n < 1) throw Error("build_tree_plan: empty pattern");
  if (n > 20) throw Error("build_tree_plan: pattern too large for subset DP");
  if (s.dim() != p.position_count() && s.dim() != n)
    throw Error("build_tree_plan: snapshot dimension does not match pattern");

  std::unordered_map<Mask, Cell> cells;
  for (TypeId i = 0; i < n; ++i) {
    Cell leaf;
    leaf.best = make_leaf(i, s);
    leaf.candidates = 1;
    cells.emplace(Mask{1} << i, std::move(leaf));
  }

  std::vector<Mask> cell_order;  // internal cells in DP (= verification) order

  if (p.op == PatternOp::Seq || n == 1) {
    for (int len = 2; len <= n; ++len) {
      for (int start = 0; start + len <= n; ++start) {
        Mask mask = ((Mask{1} << len) - 1) << start;
        Cell cell;
        for (int k = 1; k < len; ++k) {  // left size ascending: the tie-break order
          Mask lmask = ((Mask{1} << k) - 1) << start;
          consider_split(cell, cells.at(lmask), cells.at(mask & ~lmask), s);
        }
        cells.emplace(mask, std::move(cell));
        cell_order.push_back(mask);
      }
    }
  } else {
    // AND: order-free subset DP. The left child always holds the smallest
    // leaf id; splits enumerated by left size, then mask value.
    std::vector<std::vector<Mask>> by_size(static_cast<size_t>(n) + 1);
    for (Mask m = 1; m < (Mask{1} << n); ++m)
      by_size[static_cast<size_t>(std::popcount(m))].push_back(m);
    for (int sz = 2; sz <= n; ++sz) {
      for (Mask mask : by_size[static_cast<size_t>(sz)]) {
        Mask lowest = mask & (~mask + 1);
        std::vector<Mask> lefts;
        for (Mask sub = (mask - 1) & mask; sub; sub = (sub - 1) & mask)
          if ((sub & lowest) && sub != mask) lefts.push_back(sub);
        std::sort(lefts.begin(), lefts.end(), [](Mask a, Mask b) {
          int pa = std::popcount(a), pb = std::popcount(b);
          if (pa != pb) return pa < pb;
          return a < b;
        });
        Cell cell;
        for (Mask lmask : lefts)
          consider_split(cell, cells.at(lmask), cells.at(mask & ~lmask), s);
        cells.emplace(mask, std::move(cell));
        cell_order.push_back(mask);
      }
    }
  }

  Mask full = (Mask{1} << n) - 1;
  Plan plan;
  plan.kind = PlanKind::Tree;
  plan.tree = cells.at(full).best;

  if (instr)
    for (const auto& [mask, cell] : cells)
      if (std::popcount(mask) > 1) instr->candidates[mask_leafset(mask)] = cell.candidates;

  // Block indices: internal nodes of the final plan first (bottom-up), then
  // the remaining memoized cells, all ordered by leafset size.
  std::unordered_map<Mask, int> block_of;
  int next_block = 0;
  for (const auto& ls : internal_leafsets(*plan.tree)) {
    Mask m = 0;
    for (TypeId i : ls) m |= Mask{1} << i;
    block_of[m] = next_block++;
  }
  int plan_blocks = next_block;
  std::stable_sort(cell_order.begin(), cell_order.end(), [](Mask a, Mask b) {
    return std::popcount(a) < std::popcount(b);
  });
  for (Mask m : cell_order)
    if (!block_of.count(m)) block_of[m] = next_block++;

  PlanTrace trace;
  std::vector<Mask> by_block(static_cast<size_t>(next_block));
  for (const auto& [m, b] : block_of) by_block[static_cast<size_t>(b)] = m;
  for (int b = 0; b < next_block; ++b) {
    Cell& cell = cells.at(by_block[static_cast<size_t>(b)]);
    for (auto& rec : cell.records) {
      rec.block = b;
      // Only comparisons in which the cell's final winner took part prove a
      // plan change when they flip; chains between superseded incumbents are
      // kept (for the exact K=ALL mode) but marked ambiguous.
      rec.block_in_plan = b < plan_blocks && rec.lhs.tree == cell.best;
      trace.records.push_back(std::move(rec));
    }
  }
  return {std::move(plan), std::move(trace)};
}

}  // namespace acep

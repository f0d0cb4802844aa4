#pragma once

// Independent reference implementations for cross-checking the planners, the
// invariant machinery and the runtime engine. Everything here is written
// directly from the defining formulas, favoring clarity over speed.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "acep/types.hpp"

namespace oracle {

using acep::Event;
using acep::Pattern;
using acep::PatternOp;
using acep::StatSnapshot;
using acep::Timestamp;
using acep::TypeId;

inline std::uint64_t catalan(int n) {
  std::uint64_t c = 1;
  for (int i = 0; i < n; ++i) c = c * 2 * (2 * static_cast<std::uint64_t>(i) + 1) / (i + 2);
  return c;
}

inline Pattern make_pattern(PatternOp op, int n, Timestamp window_ms = 1000) {
  Pattern p;
  p.op = op;
  p.window_ms = window_ms;
  for (TypeId i = 0; i < n; ++i) {
    acep::Position pos;
    pos.type.id = i;
    pos.type.name = std::string(1, static_cast<char>('A' + i % 26));
    if (i >= 26) pos.type.name += std::to_string(i / 26);
    pos.var = "v" + std::to_string(i);
    p.positions.push_back(std::move(pos));
  }
  return p;
}

inline StatSnapshot random_snapshot(int n, std::mt19937_64& g) {
  StatSnapshot s = StatSnapshot::uniform(n);
  std::uniform_real_distribution<double> rate(0.5, 200.0);
  std::uniform_real_distribution<double> sel(0.05, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < n; ++i) s.rates[static_cast<size_t>(i)] = rate(g);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (coin(g) < 0.7) s.sel[static_cast<size_t>(i)][static_cast<size_t>(j)] = sel(g);
  return s;
}

/// Mild perturbation of an existing snapshot; with small magnitudes the plan
/// usually survives, exercising both verdicts of the invariant checks.
inline StatSnapshot perturb_snapshot(const StatSnapshot& base, std::mt19937_64& g,
                                     double magnitude) {
  StatSnapshot s = base;
  std::uniform_real_distribution<double> factor(1.0 - magnitude, 1.0 + magnitude);
  for (auto& r : s.rates) r *= factor(g);
  for (int i = 0; i < s.dim(); ++i)
    for (int j = i; j < s.dim(); ++j) {
      double& v = s.sel[static_cast<size_t>(i)][static_cast<size_t>(j)];
      if (v < 1.0) v = std::min(1.0, std::max(0.01, v * factor(g)));
    }
  return s;
}

// --- greedy planner reference ---------------------------------------------

inline double greedy_expr(TypeId j, const std::vector<TypeId>& prefix, const StatSnapshot& s) {
  double v = s.rate(j) * s.selectivity(j, j);
  for (TypeId k : prefix) v *= s.selectivity(k, j);
  return v;
}

inline std::vector<TypeId> greedy_order(int n, const StatSnapshot& s) {
  std::vector<TypeId> remaining, order;
  for (TypeId i = 0; i < n; ++i) remaining.push_back(i);
  while (!remaining.empty()) {
    TypeId winner = remaining.front();
    double best = greedy_expr(winner, order, s);
    for (TypeId j : remaining) {
      double v = greedy_expr(j, order, s);
      if (v < best) {
        best = v;
        winner = j;
      }
    }
    order.push_back(winner);
    remaining.erase(std::find(remaining.begin(), remaining.end(), winner));
  }
  return order;
}

// --- tree planner reference -----------------------------------------------

struct RefTree {
  TypeId leaf = -1;
  std::shared_ptr<RefTree> left, right;
  std::vector<TypeId> leafset;
  double cost = 0;
};
using RefTreePtr = std::shared_ptr<RefTree>;

inline double leafset_card(const std::vector<TypeId>& ls, const StatSnapshot& s) {
  double card = 1.0;
  for (TypeId i : ls) card *= s.rate(i) * s.selectivity(i, i);
  for (size_t a = 0; a < ls.size(); ++a)
    for (size_t b = a + 1; b < ls.size(); ++b) card *= s.selectivity(ls[a], ls[b]);
  return card;
}

inline RefTreePtr ref_leaf(TypeId i, const StatSnapshot& s) {
  auto t = std::make_shared<RefTree>();
  t->leaf = i;
  t->leafset = {i};
  t->cost = s.rate(i);
  return t;
}

inline RefTreePtr ref_join(RefTreePtr l, RefTreePtr r, const StatSnapshot& s) {
  auto t = std::make_shared<RefTree>();
  t->left = std::move(l);
  t->right = std::move(r);
  std::merge(t->left->leafset.begin(), t->left->leafset.end(), t->right->leafset.begin(),
             t->right->leafset.end(), std::back_inserter(t->leafset));
  t->cost = t->left->cost + t->right->cost + leafset_card(t->leafset, s);
  return t;
}

inline std::string ref_signature(const RefTree& t) {
  if (t.leaf >= 0) return std::to_string(t.leaf);
  return "(" + ref_signature(*t.left) + "," + ref_signature(*t.right) + ")";
}

/// All binary trees over the contiguous leaf span [lo, hi).
inline std::vector<RefTreePtr> all_span_trees(int lo, int hi, const StatSnapshot& s) {
  std::vector<RefTreePtr> out;
  if (hi - lo == 1) {
    out.push_back(ref_leaf(lo, s));
    return out;
  }
  for (int mid = lo + 1; mid < hi; ++mid)
    for (const auto& l : all_span_trees(lo, mid, s))
      for (const auto& r : all_span_trees(mid, hi, s)) out.push_back(ref_join(l, r, s));
  return out;
}

/// All binary trees over an arbitrary leaf id set (for AND patterns); left
/// child always holds the smallest id, mirroring the planner's canonical form.
inline std::vector<RefTreePtr> all_set_trees(const std::vector<TypeId>& ids,
                                             const StatSnapshot& s) {
  std::vector<RefTreePtr> out;
  if (ids.size() == 1) {
    out.push_back(ref_leaf(ids[0], s));
    return out;
  }
  int n = static_cast<int>(ids.size());
  // Non-empty proper subsets of ids \ {ids[0]} complete the left child.
  for (std::uint32_t rest = 0; rest < (1u << (n - 1)); ++rest) {
    std::vector<TypeId> left{ids[0]}, right;
    for (int b = 0; b < n - 1; ++b)
      (rest >> b & 1u ? left : right).push_back(ids[static_cast<size_t>(b) + 1]);
    if (right.empty()) continue;
    for (const auto& l : all_set_trees(left, s))
      for (const auto& r : all_set_trees(right, s)) out.push_back(ref_join(l, r, s));
  }
  return out;
}

inline double min_tree_cost(const std::vector<RefTreePtr>& trees) {
  double best = trees.front()->cost;
  for (const auto& t : trees) best = std::min(best, t->cost);
  return best;
}

// --- brute-force match enumeration ----------------------------------------

inline bool arrives_before(const Event& a, const Event& b) {
  return a.ts != b.ts ? a.ts < b.ts : a.seq < b.seq;
}

/// Enumerates every match of `p` over `stream` (assumed seq-stamped in
/// arrival order) and returns the canonical match keys, sorted. Written
/// against the declared matching semantics: skip-till-any-match, SEQ order by
/// (ts, seq), window over the full match, negation gaps, Kleene maximal
/// accumulation with one emission per closing event (trailing) or per member
/// set (interior/leading).
inline std::vector<std::string> enumerate_matches(const Pattern& p,
                                                  const std::vector<Event>& stream) {
  int n = acep::pattern_size(p);
  int m = p.position_count();

  std::vector<std::vector<const Event*>> by_type(static_cast<size_t>(m));
  for (const Event& e : stream) by_type[static_cast<size_t>(e.type)].push_back(&e);

  auto self_ok = [&](TypeId x, const Event& e) {
    for (const auto& pred : p.predicates)
      if (pred.single_position() && pred.lpos == x && !pred.evaluate(e, e)) return false;
    return true;
  };
  auto pair_ok = [&](TypeId x, const Event& ex, TypeId y, const Event& ey) {
    if (ex.ts - ey.ts > p.window_ms || ey.ts - ex.ts > p.window_ms) return false;
    if (p.op == PatternOp::Seq && !(x < y ? arrives_before(ex, ey) : arrives_before(ey, ex)))
      return false;
    for (const auto& pred : p.predicates) {
      if (pred.single_position()) continue;
      if (pred.lpos == x && pred.rpos == y && !pred.evaluate(ex, ey)) return false;
      if (pred.lpos == y && pred.rpos == x && !pred.evaluate(ey, ex)) return false;
    }
    return true;
  };

  TypeId kleene_id = -1;
  for (const auto& pos : p.positions)
    if (pos.kleene) kleene_id = pos.type.id;
  bool kleene_trailing = true;
  if (kleene_id >= 0)
    for (const auto& pos : p.positions)
      if (!pos.negated && !pos.kleene && pos.type.id > kleene_id) kleene_trailing = false;

  std::vector<std::string> keys;
  std::vector<const Event*> bound(static_cast<size_t>(n), nullptr);

  auto suppressed = [&](const std::vector<const Event*>& b) {
    Timestamp max_ts = 0;
    for (const Event* e : b) max_ts = std::max(max_ts, e->ts);
    for (size_t idx = 0; idx < p.positions.size(); ++idx) {
      if (!p.positions[idx].negated) continue;
      TypeId g_id = p.positions[idx].type.id;
      const Event* prev = nullptr;
      const Event* next = nullptr;
      for (size_t i = idx; i-- > 0;)
        if (!p.positions[i].negated) {
          prev = b[static_cast<size_t>(p.positions[i].type.id)];
          break;
        }
      for (size_t i = idx + 1; i < p.positions.size(); ++i)
        if (!p.positions[i].negated) {
          next = b[static_cast<size_t>(p.positions[i].type.id)];
          break;
        }
      for (const Event* g : by_type[static_cast<size_t>(g_id)]) {
        if (!arrives_before(*g, *next)) continue;
        if (prev ? !arrives_before(*prev, *g) : g->ts < max_ts - p.window_ms) continue;
        if (!self_ok(g_id, *g)) continue;
        bool hit = true;
        for (const auto& pred : p.predicates) {
          if (pred.single_position()) continue;
          if (pred.lpos == g_id)
            hit = hit && pred.evaluate(*g, *b[static_cast<size_t>(pred.rpos)]);
          else if (pred.rpos == g_id)
            hit = hit && pred.evaluate(*b[static_cast<size_t>(pred.lpos)], *g);
        }
        if (hit) return true;
      }
    }
    return false;
  };

  auto emit = [&](const std::vector<const Event*>& b) {
    if (suppressed(b)) return;
    std::vector<std::vector<const Event*>> bindings(p.positions.size());
    if (kleene_id >= 0) {
      const Event* rep = b[static_cast<size_t>(kleene_id)];
      std::vector<const Event*> members;
      for (const Event* h : by_type[static_cast<size_t>(kleene_id)]) {
        if (!self_ok(kleene_id, *h)) continue;
        bool ok = true;
        for (TypeId x = 0; x < n && ok; ++x)
          if (x != kleene_id) ok = pair_ok(kleene_id, *h, x, *b[static_cast<size_t>(x)]);
        if (!ok) continue;
        if (kleene_trailing && arrives_before(*rep, *h)) continue;
        members.push_back(h);
      }
      std::sort(members.begin(), members.end(),
                [](const Event* a, const Event* c) { return arrives_before(*a, *c); });
      if (!kleene_trailing && members.front()->seq != rep->seq) return;
      bindings[static_cast<size_t>(kleene_id)] = members;
    }
    for (TypeId x = 0; x < n; ++x)
      if (x != kleene_id) bindings[static_cast<size_t>(x)] = {b[static_cast<size_t>(x)]};
    std::string key;
    for (size_t i = 0; i < bindings.size(); ++i) {
      if (i) key += "|";
      key += std::to_string(i) + ":";
      for (size_t j = 0; j < bindings[i].size(); ++j) {
        if (j) key += ",";
        key += std::to_string(bindings[i][j]->seq);
      }
    }
    keys.push_back(std::move(key));
  };

  auto assign = [&](auto&& self, TypeId next) -> void {
    if (next == n) {
      emit(bound);
      return;
    }
    const auto& pool = by_type[static_cast<size_t>(next)];
    auto first = pool.begin();
    auto last = pool.end();
    if (next > 0) {  // events are ts-sorted: restrict to the anchor's window
      Timestamp t0 = bound[0]->ts;
      first = std::partition_point(pool.begin(), pool.end(), [&](const Event* e) {
        return e->ts < t0 - p.window_ms;
      });
      last = std::partition_point(first, pool.end(), [&](const Event* e) {
        return e->ts <= t0 + p.window_ms;
      });
    }
    for (auto it = first; it != last; ++it) {
      const Event* e = *it;
      if (!self_ok(next, *e)) continue;
      bool ok = true;
      for (TypeId x = 0; x < next && ok; ++x) ok = pair_ok(x, *bound[static_cast<size_t>(x)], next, *e);
      if (!ok) continue;
      bound[static_cast<size_t>(next)] = e;
      self(self, next + 1);
    }
  };
  assign(assign, 0);

  std::sort(keys.begin(), keys.end());
  return keys;
}

// --- random streams --------------------------------------------------------

/// Uniform-random stream over the pattern's non-negated (and optionally
/// negated) types; each event carries attribute "x" in [0,1).
inline std::vector<Event> random_stream(const Pattern& p, int count, Timestamp span_ms,
                                        std::mt19937_64& g, bool include_negated = true) {
  std::vector<TypeId> pool;
  for (const auto& pos : p.positions)
    if (include_negated || !pos.negated) pool.push_back(pos.type.id);
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<Timestamp> when(0, span_ms);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  std::vector<Event> out;
  for (int i = 0; i < count; ++i) {
    Event e;
    e.type = pool[pick(g)];
    e.ts = when(g);
    e.attrs.emplace_back("x", val(g));
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const Event& a, const Event& b) { return a.ts < b.ts; });
  for (size_t i = 0; i < out.size(); ++i) out[i].seq = i + 1;
  return out;
}

}  // namespace oracle

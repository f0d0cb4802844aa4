#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace acep {

using TypeId = int;
using Timestamp = std::int64_t;  // milliseconds since stream epoch

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense 0-based event type within one pattern. Non-negated positions are
/// assigned ids 0..n-1 (n = pattern_size); negated positions follow.
struct EventType {
  TypeId id = 0;
  std::string name;
};

struct Event {
  TypeId type = 0;
  Timestamp ts = 0;
  std::uint64_t seq = 0;  // arrival order, assigned by the consumer
  std::vector<std::pair<std::string, double>> attrs;

  double attr(const std::string& name) const {
    for (const auto& [k, v] : attrs)
      if (k == name) return v;
    throw Error("event has no attribute '" + name + "'");
  }
  bool has_attr(const std::string& name) const {
    for (const auto& [k, v] : attrs)
      if (k == name) return true;
    return false;
  }
};

enum class CmpOp { Lt, Le, Eq, Ge, Gt, Ne };

const char* cmp_op_text(CmpOp op);

inline bool cmp_apply(CmpOp op, double a, double b) {
  switch (op) {
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Ge: return a >= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ne: return a != b;
  }
  return false;
}

/// Binary comparison between two pattern positions, or one position and a
/// numeric constant (rhs_is_const).
struct Predicate {
  int lpos = 0;
  std::string lattr;
  CmpOp op = CmpOp::Lt;
  int rpos = -1;
  std::string rattr;
  double constant = 0.0;
  bool rhs_is_const = false;

  bool single_position() const { return rhs_is_const || lpos == rpos; }
  bool touches(int pos) const { return lpos == pos || (!rhs_is_const && rpos == pos); }
  bool evaluate(const Event& le, const Event& re) const {
    double a = le.attr(lattr);
    double b = rhs_is_const ? constant : re.attr(rattr);
    return cmp_apply(op, a, b);
  }
};

enum class PatternOp { Seq, And, Or };

struct Position {
  EventType type;
  std::string var;
  bool negated = false;
  bool kleene = false;
};

/// Declarative event pattern. For Or, `disjuncts` holds the sub-patterns and
/// positions/predicates are empty; the window is shared.
struct Pattern {
  PatternOp op = PatternOp::Seq;
  std::vector<Position> positions;
  std::vector<Predicate> predicates;
  Timestamp window_ms = 0;
  std::vector<Pattern> disjuncts;

  bool is_or() const { return op == PatternOp::Or; }
  int position_count() const { return static_cast<int>(positions.size()); }

  /// Positions are kept in declaration order; with negation present, ids do
  /// not coincide with indices.
  const Position& position_of_type(TypeId id) const {
    for (const auto& p : positions)
      if (p.type.id == id) return p;
    throw Error("no position with type id " + std::to_string(id));
  }

  TypeId type_by_name(const std::string& name) const {
    for (const auto& p : positions)
      if (p.type.name == name) return p.type.id;
    return -1;
  }

  /// Predicates between positions a and b (unordered pair).
  std::vector<const Predicate*> predicates_between(int a, int b) const {
    std::vector<const Predicate*> out;
    for (const auto& p : predicates) {
      if (p.single_position()) continue;
      if ((p.lpos == a && p.rpos == b) || (p.lpos == b && p.rpos == a)) out.push_back(&p);
    }
    return out;
  }
};

/// Count of positions, Kleene included, negated excluded. For Or patterns the
/// sizes of the disjuncts are summed.
int pattern_size(const Pattern& p);

/// Point-in-time arrival rates (events/s) and pairwise selectivities.
/// sel[i][j] for i<=j; entries with no predicate are exactly 1.
struct StatSnapshot {
  std::vector<double> rates;
  std::vector<std::vector<double>> sel;
  Timestamp taken_at = 0;

  int dim() const { return static_cast<int>(rates.size()); }
  double rate(TypeId i) const { return rates.at(static_cast<size_t>(i)); }
  double selectivity(TypeId i, TypeId j) const {
    if (i > j) std::swap(i, j);
    return sel.at(static_cast<size_t>(i)).at(static_cast<size_t>(j));
  }

  static StatSnapshot uniform(int n, Timestamp at = 0) {
    StatSnapshot s;
    s.rates.assign(static_cast<size_t>(n), 0.0);
    s.sel.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n), 1.0));
    s.taken_at = at;
    return s;
  }

  void validate() const;
};

}  // namespace acep

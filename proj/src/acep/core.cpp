#include "acep/types.hpp"

namespace acep {

const char* cmp_op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

int pattern_size(const Pattern& p) {
  if (p.is_or()) {
    int total = 0;
    for (const auto& d : p.disjuncts) total += pattern_size(d);
    return total;
  }
  int n = 0;
  for (const auto& pos : p.positions)
    if (!pos.negated) ++n;
  return n;
}

void StatSnapshot::validate() const {
  if (sel.size() != rates.size()) throw Error("snapshot rate/sel dimension mismatch");
  for (double r : rates)
    if (!(r >= 0.0)) throw Error("negative or NaN arrival rate in snapshot");
  for (const auto& row : sel) {
    if (row.size() != rates.size()) throw Error("snapshot sel matrix is not square");
    for (double s : row)
      if (!(s >= 0.0 && s <= 1.0)) throw Error("selectivity outside [0,1] in snapshot");
  }
}

}  // namespace acep

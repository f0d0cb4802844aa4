#pragma once

#include <memory>
#include <string>
#include <vector>

#include "acep/types.hpp"

namespace acep {

/// Node of a tree-based plan. Internal nodes cache the model cost and
/// cardinality computed at planning time.
struct TreeNode {
  TypeId leaf = -1;  // >= 0 for leaves
  std::shared_ptr<const TreeNode> left, right;
  double cardinality = 0.0;
  double cost = 0.0;
  std::vector<TypeId> leafset;  // sorted

  bool is_leaf() const { return leaf >= 0; }
};

using TreePtr = std::shared_ptr<const TreeNode>;

TreePtr make_leaf(TypeId id, const StatSnapshot& s);
TreePtr make_internal(TreePtr l, TreePtr r, const StatSnapshot& s);

/// Card(L,R) = Card(L) * Card(R) * product of selectivities across the two
/// leafsets; seq_factor scales sequence parents (default 1).
double join_cardinality(const TreeNode& l, const TreeNode& r, const StatSnapshot& s,
                        double seq_factor = 1.0);

/// Leaf: arrival rate. Internal: Cost(L) + Cost(R) + Card(L,R).
double tree_cost(const TreeNode& t, const StatSnapshot& s);

enum class PlanKind { Order, Tree };

/// One indivisible unit of a plan, in verification order: plan steps for
/// order plans, internal nodes bottom-up for tree plans.
struct BuildingBlock {
  int index = 0;
  std::string descriptor;
};

struct Plan {
  PlanKind kind = PlanKind::Order;
  std::vector<TypeId> order;  // Order: permutation of 0..n-1
  TreePtr tree;               // Tree: n leaves

  bool operator==(const Plan& other) const;
};

/// Canonical single-line form: "C,B,A" for order plans, "((A,B),C)" for tree
/// plans. Type ids are rendered through the pattern's type names.
std::string render_plan(const Plan& p, const Pattern& pat);

/// Blocks in verification order (bottom-up for trees, children before
/// parents, ties by leftmost leaf id).
std::vector<BuildingBlock> plan_blocks(const Plan& p, const Pattern& pat);

/// Model cost of a whole plan under the planner's own cost model: expected
/// total number of partial matches for order plans, root cost for tree plans.
double plan_model_cost(const Plan& p, const StatSnapshot& s);

/// Leafsets of the internal nodes of `t`, bottom-up.
std::vector<std::vector<TypeId>> internal_leafsets(const TreeNode& t);

}  // namespace acep

#include "acep/plan.hpp"

#include <algorithm>

namespace acep {

namespace {

void merge_leafsets(const std::vector<TypeId>& a, const std::vector<TypeId>& b,
                    std::vector<TypeId>& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
}

std::string tree_signature(const TreeNode& t, const Pattern* pat) {
  if (t.is_leaf())
    return pat ? pat->position_of_type(t.leaf).type.name : std::to_string(t.leaf);
  return "(" + tree_signature(*t.left, pat) + "," + tree_signature(*t.right, pat) + ")";
}

std::string leafset_text(const std::vector<TypeId>& ls, const Pattern& pat) {
  std::string out = "{";
  for (size_t i = 0; i < ls.size(); ++i) {
    if (i) out += ",";
    out += pat.position_of_type(ls[i]).type.name;
  }
  return out + "}";
}

void collect_internal(const TreeNode& t, std::vector<const TreeNode*>& out) {
  if (t.is_leaf()) return;
  collect_internal(*t.left, out);
  collect_internal(*t.right, out);
  out.push_back(&t);
}

// Cardinality of a leafset is shape-invariant: product of leaf cardinalities
// and of all pairwise selectivities. Computing it canonically (sorted leafset
// order) keeps the value bit-identical across tree shapes.
double leafset_cardinality(const std::vector<TypeId>& ls, const StatSnapshot& s) {
  double card = 1.0;
  for (TypeId i : ls) card *= s.rate(i) * s.selectivity(i, i);
  for (size_t a = 0; a < ls.size(); ++a)
    for (size_t b = a + 1; b < ls.size(); ++b) card *= s.selectivity(ls[a], ls[b]);
  return card;
}

void sort_bottom_up(std::vector<const TreeNode*>& nodes) {
  std::stable_sort(nodes.begin(), nodes.end(), [](const TreeNode* a, const TreeNode* b) {
    if (a->leafset.size() != b->leafset.size()) return a->leafset.size() < b->leafset.size();
    return a->leafset.front() < b->leafset.front();
  });
}

}  // namespace

TreePtr make_leaf(TypeId id, const StatSnapshot& s) {
  auto n = std::make_shared<TreeNode>();
  n->leaf = id;
  n->leafset = {id};
  n->cost = s.rate(id);
  n->cardinality = s.rate(id) * s.selectivity(id, id);
  return n;
}

double join_cardinality(const TreeNode& l, const TreeNode& r, const StatSnapshot& s,
                        double seq_factor) {
  for (TypeId i : l.leafset)
    for (TypeId j : r.leafset)
      if (i == j) throw Error("join_cardinality: overlapping leafsets");
  double sel = 1.0;
  for (TypeId i : l.leafset)
    for (TypeId j : r.leafset) sel *= s.selectivity(i, j);
  return l.cardinality * r.cardinality * sel * seq_factor;
}

TreePtr make_internal(TreePtr l, TreePtr r, const StatSnapshot& s) {
  auto n = std::make_shared<TreeNode>();
  n->left = std::move(l);
  n->right = std::move(r);
  merge_leafsets(n->left->leafset, n->right->leafset, n->leafset);
  for (size_t i = 1; i < n->leafset.size(); ++i)
    if (n->leafset[i] == n->leafset[i - 1]) throw Error("make_internal: overlapping leafsets");
  n->cardinality = leafset_cardinality(n->leafset, s);
  n->cost = n->left->cost + n->right->cost + n->cardinality;
  return n;
}

double tree_cost(const TreeNode& t, const StatSnapshot& s) {
  if (t.is_leaf()) return s.rate(t.leaf);
  return tree_cost(*t.left, s) + tree_cost(*t.right, s) + leafset_cardinality(t.leafset, s);
}

bool Plan::operator==(const Plan& other) const {
  if (kind != other.kind) return false;
  if (kind == PlanKind::Order) return order == other.order;
  if (!tree || !other.tree) return tree == other.tree;
  return tree_signature(*tree, nullptr) == tree_signature(*other.tree, nullptr);
}

std::string render_plan(const Plan& p, const Pattern& pat) {
  if (p.kind == PlanKind::Order) {
    std::string out;
    for (size_t i = 0; i < p.order.size(); ++i) {
      if (i) out += ",";
      out += pat.position_of_type(p.order[i]).type.name;
    }
    return out;
  }
  return tree_signature(*p.tree, &pat);
}

std::vector<BuildingBlock> plan_blocks(const Plan& p, const Pattern& pat) {
  std::vector<BuildingBlock> blocks;
  if (p.kind == PlanKind::Order) {
    for (size_t i = 0; i < p.order.size(); ++i) {
      BuildingBlock b;
      b.index = static_cast<int>(i);
      b.descriptor = "type " + pat.position_of_type(p.order[i]).type.name + " at position " +
                     std::to_string(i + 1);
      blocks.push_back(std::move(b));
    }
    return blocks;
  }
  std::vector<const TreeNode*> nodes;
  collect_internal(*p.tree, nodes);
  sort_bottom_up(nodes);
  for (size_t i = 0; i < nodes.size(); ++i) {
    BuildingBlock b;
    b.index = static_cast<int>(i);
    b.descriptor = "(" + leafset_text(nodes[i]->left->leafset, pat) + "," +
                   leafset_text(nodes[i]->right->leafset, pat) + ")";
    blocks.push_back(std::move(b));
  }
  return blocks;
}

double plan_model_cost(const Plan& p, const StatSnapshot& s) {
  if (p.kind == PlanKind::Tree) return tree_cost(*p.tree, s);
  double total = 0.0;
  for (size_t i = 0; i < p.order.size(); ++i) {
    double partial = 1.0;
    for (size_t j = 0; j <= i; ++j) {
      TypeId tj = p.order[j];
      partial *= s.rate(tj) * s.selectivity(tj, tj);
      for (size_t k = 0; k < j; ++k) partial *= s.selectivity(p.order[k], tj);
    }
    total += partial;
  }
  return total;
}

std::vector<std::vector<TypeId>> internal_leafsets(const TreeNode& t) {
  std::vector<const TreeNode*> nodes;
  collect_internal(t, nodes);
  sort_bottom_up(nodes);
  std::vector<std::vector<TypeId>> out;
  out.reserve(nodes.size());
  for (const TreeNode* n : nodes) out.push_back(n->leafset);
  return out;
}

}  // namespace acep

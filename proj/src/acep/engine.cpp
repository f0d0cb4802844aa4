#include "acep/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>

#include "acep/greedy_planner.hpp"
#include "acep/invariants.hpp"
#include "acep/tree_planner.hpp"

namespace acep {

namespace {

bool arrives_before(const Event& a, const Event& b) {
  return a.ts != b.ts ? a.ts < b.ts : a.seq < b.seq;
}

/// Per-type event history shared by match finalization (Kleene members,
/// negation gaps) and the order evaluator's closure scans. Negated types are
/// retained for two windows so gaps that reach back a full window stay
/// inspectable.
class StreamContext {
 public:
  explicit StreamContext(const Pattern& p) : pat_(&p), history_(p.positions.size()) {}

  void append(const Event& e) { history_[static_cast<size_t>(e.type)].push_back(e); }

  void evict(Timestamp now) {
    for (size_t i = 0; i < history_.size(); ++i) {
      Timestamp keep = pat_->window_ms * (pat_->position_of_type(static_cast<TypeId>(i)).negated ? 2 : 1);
      auto& dq = history_[i];
      while (!dq.empty() && dq.front().ts < now - keep) dq.pop_front();
    }
  }

  const std::deque<Event>& of(TypeId id) const { return history_[static_cast<size_t>(id)]; }

 private:
  const Pattern* pat_;
  std::vector<std::deque<Event>> history_;
};

/// Static pattern shape shared by both evaluators: predicate routing, SEQ
/// ordering, Kleene/negation layout. Also validates the supported fragment.
struct Shape {
  const Pattern* pat;
  int n = 0;                       // non-negated positions (= plan size)
  Timestamp window = 0;
  TypeId kleene_id = -1;           // at most one Kleene position
  bool kleene_trailing = false;    // Kleene is the last non-negated position
  std::vector<std::vector<const Predicate*>> self_preds;   // by id, single-position
  std::vector<std::vector<const Predicate*>> pair_preds;   // by id*n+id, cross
  struct Negation {
    TypeId id = -1;
    TypeId prev = -1;  // nearest non-negated neighbors in declaration order
    TypeId next = -1;  // always set (trailing negation is rejected)
    std::vector<const Predicate*> preds;
  };
  std::vector<Negation> negations;

  explicit Shape(const Pattern& p) : pat(&p), window(p.window_ms) {
    if (p.is_or()) throw Error("evaluator: OR patterns run as independent sub-engines");
    n = pattern_size(p);
    self_preds.resize(p.positions.size());
    pair_preds.resize(static_cast<size_t>(n) * static_cast<size_t>(n));

    TypeId prev = -1;
    for (const auto& pos : p.positions) {  // declaration order
      if (pos.kleene) {
        if (p.op != PatternOp::Seq) throw Error("Kleene closure requires a SEQ pattern");
        if (kleene_id >= 0) throw Error("at most one Kleene position is supported");
        kleene_id = pos.type.id;
      }
      if (!pos.negated) {
        prev = pos.type.id;
        continue;
      }
      if (p.op != PatternOp::Seq) throw Error("negation requires a SEQ pattern");
      Negation neg;
      neg.id = pos.type.id;
      neg.prev = prev;
      negations.push_back(neg);
    }
    // Resolve each negation's right neighbor.
    for (auto& neg : negations) {
      size_t at = 0;
      for (size_t i = 0; i < p.positions.size(); ++i)
        if (p.positions[i].type.id == neg.id) at = i;
      for (size_t i = at + 1; i < p.positions.size(); ++i)
        if (!p.positions[i].negated) {
          neg.next = p.positions[i].type.id;
          break;
        }
      if (neg.next < 0) throw Error("trailing negation is not supported");
    }
    if (kleene_id >= 0) {
      kleene_trailing = true;
      for (const auto& pos : p.positions)
        if (!pos.negated && !pos.kleene && pos.type.id > kleene_id) kleene_trailing = false;
    }

    for (const auto& pred : p.predicates) {
      if (pred.single_position()) {
        self_preds[static_cast<size_t>(pred.lpos)].push_back(&pred);
        continue;
      }
      bool lneg = p.position_of_type(pred.lpos).negated;
      bool rneg = p.position_of_type(pred.rpos).negated;
      if (lneg && rneg) throw Error("predicates between two negated positions are not supported");
      if (lneg || rneg) {
        TypeId neg_id = lneg ? pred.lpos : pred.rpos;
        TypeId other = lneg ? pred.rpos : pred.lpos;
        if (other == kleene_id)
          throw Error("predicates linking negated and Kleene positions are not supported");
        for (auto& neg : negations)
          if (neg.id == neg_id) neg.preds.push_back(&pred);
        continue;
      }
      pair_preds[static_cast<size_t>(pred.lpos) * static_cast<size_t>(n) +
                 static_cast<size_t>(pred.rpos)]
          .push_back(&pred);
    }
  }

  bool self_ok(const Event& e) const {
    for (const Predicate* pr : self_preds[static_cast<size_t>(e.type)])
      if (!pr->evaluate(e, e)) return false;
    return true;
  }

  /// Full pairwise compatibility of two bound events: predicates, SEQ order
  /// (ids follow declaration order among non-negated positions), window.
  bool pair_ok(TypeId x, const Event& ex, TypeId y, const Event& ey) const {
    if (std::llabs(ex.ts - ey.ts) > window) return false;
    if (pat->op == PatternOp::Seq) {
      if (x < y ? !arrives_before(ex, ey) : !arrives_before(ey, ex)) return false;
    }
    for (const Predicate* pr :
         pair_preds[static_cast<size_t>(x) * static_cast<size_t>(n) + static_cast<size_t>(y)])
      if (!pr->evaluate(ex, ey)) return false;
    for (const Predicate* pr :
         pair_preds[static_cast<size_t>(y) * static_cast<size_t>(n) + static_cast<size_t>(x)])
      if (!pr->evaluate(ey, ex)) return false;
    return true;
  }
};

/// Kleene expansion and negation suppression over a fully bound candidate.
/// `bound` is indexed by non-negated type id. Returns false when the match is
/// suppressed (negated witness present, or a non-minimal Kleene delegate).
bool finalize_match(const Shape& sh, const std::vector<Event>& bound, Timestamp detected_at,
                    const StreamContext& ctx, Match& out) {
  Timestamp max_ts = bound[0].ts;
  for (const auto& e : bound) max_ts = std::max(max_ts, e.ts);

  for (const auto& neg : sh.negations) {
    for (const Event& g : ctx.of(neg.id)) {
      if (!arrives_before(g, bound[static_cast<size_t>(neg.next)])) continue;
      if (neg.prev >= 0) {
        if (!arrives_before(bound[static_cast<size_t>(neg.prev)], g)) continue;
      } else if (g.ts < max_ts - sh.window) {
        continue;
      }
      bool hit = true;
      for (const Predicate* pr : neg.preds) {
        const Event& other = bound[static_cast<size_t>(pr->lpos == neg.id ? pr->rpos : pr->lpos)];
        const Event& le = pr->lpos == neg.id ? g : other;
        const Event& re = pr->lpos == neg.id ? other : g;
        if (!pr->evaluate(le, re)) hit = false;
      }
      for (const Predicate* pr : sh.self_preds[static_cast<size_t>(neg.id)])
        if (!pr->evaluate(g, g)) hit = false;
      if (hit) return false;
    }
  }

  out.bindings.assign(sh.pat->positions.size(), {});
  out.detected_at = detected_at;

  if (sh.kleene_id >= 0) {
    TypeId k = sh.kleene_id;
    const Event& rep = bound[static_cast<size_t>(k)];
    auto member_ok = [&](const Event& h) {
      if (!sh.self_ok(h)) return false;
      for (TypeId x = 0; x < sh.n; ++x) {
        if (x == k) continue;
        if (!sh.pair_ok(k, h, x, bound[static_cast<size_t>(x)])) return false;
      }
      return true;
    };
    std::vector<Event> members;
    bool rep_seen = false;
    for (const Event& h : ctx.of(k)) {
      if (!member_ok(h)) continue;
      if (sh.kleene_trailing && arrives_before(rep, h)) continue;
      members.push_back(h);
      if (h.seq == rep.seq) rep_seen = true;
    }
    if (!rep_seen) members.push_back(rep);  // the delegate may still be in flight
    std::sort(members.begin(), members.end(),
              [](const Event& a, const Event& b) { return arrives_before(a, b); });
    // An interior or leading Kleene match is emitted through its earliest
    // member only, so every delegate choice collapses to one emission.
    if (!sh.kleene_trailing && members.front().seq != rep.seq) return false;
    out.bindings[static_cast<size_t>(k)] = std::move(members);
  }

  for (TypeId x = 0; x < sh.n; ++x)
    if (x != sh.kleene_id) out.bindings[static_cast<size_t>(x)] = {bound[static_cast<size_t>(x)]};
  return true;
}

class OrderEvaluator final : public Evaluator {
 public:
  OrderEvaluator(const Pattern& p, std::vector<TypeId> order)
      : shape_(p), ctx_(p), order_(std::move(order)) {
    if (static_cast<int>(order_.size()) != shape_.n) throw Error("order plan size mismatch");
    step_of_.assign(static_cast<size_t>(shape_.n), -1);
    for (size_t i = 0; i < order_.size(); ++i) step_of_[static_cast<size_t>(order_[i])] = static_cast<int>(i);
    for (int s : step_of_)
      if (s < 0) throw Error("order plan is not a permutation of the pattern types");
    pms_.resize(order_.size());
    sweep_mark_.assign(order_.size(), 64);
  }

  void process(const Event& e, std::vector<Match>& out) override {
    check_monotone(e);
    ctx_.evict(e.ts);
    sweep(e.ts);

    if (e.type < shape_.n && shape_.self_ok(e)) {
      int step = step_of_[static_cast<size_t>(e.type)];
      if (step == 0) {
        Pm root;
        root.bound.push_back(e);
        root.min_ts = e.ts;
        closure(root, e, out);
      } else {
        auto& bucket = pms_[static_cast<size_t>(step)];
        size_t existing = bucket.size();  // closure inserts only into deeper buckets
        for (size_t i = 0; i < existing; ++i) {
          if (bucket[i].min_ts + shape_.window < e.ts) continue;
          if (!compatible(bucket[i], e)) continue;
          Pm child = bucket[i];
          child.bound.push_back(e);
          child.min_ts = std::min(child.min_ts, e.ts);
          closure(child, e, out);
        }
      }
    }
    ctx_.append(e);
  }

  std::size_t live_partial_matches() const override {
    std::size_t total = 0;
    for (const auto& b : pms_) total += b.size();
    return total;
  }

 private:
  struct Pm {
    std::vector<Event> bound;  // by plan step
    Timestamp min_ts = 0;
  };

  void check_monotone(const Event& e) {
    if (e.ts < last_ts_ || (last_seq_ != 0 && e.seq <= last_seq_))
      throw Error("evaluator requires nondecreasing timestamps and increasing seq");
    last_ts_ = e.ts;
    last_seq_ = e.seq;
  }

  bool compatible(const Pm& pm, const Event& e) const {
    TypeId y = order_[pm.bound.size()];
    for (size_t j = 0; j < pm.bound.size(); ++j)
      if (!shape_.pair_ok(order_[j], pm.bound[j], y, e)) return false;
    return true;
  }

  /// Stores the partial match, then tries to grow it with already-seen events
  /// of the next plan type; complete matches are finalized immediately.
  void closure(Pm& pm, const Event& trigger, std::vector<Match>& out) {
    if (pm.bound.size() == order_.size()) {
      emit(pm, trigger, out);
      return;
    }
    size_t level = pm.bound.size();
    pms_[level].push_back(pm);
    TypeId next = order_[level];
    for (const Event& h : ctx_.of(next)) {
      if (!shape_.self_ok(h)) continue;
      if (!compatible(pm, h)) continue;
      Pm child = pm;
      child.bound.push_back(h);
      child.min_ts = std::min(child.min_ts, h.ts);
      closure(child, trigger, out);
    }
  }

  void emit(const Pm& pm, const Event& trigger, std::vector<Match>& out) {
    std::vector<Event> bound(static_cast<size_t>(shape_.n));
    for (size_t i = 0; i < pm.bound.size(); ++i) bound[static_cast<size_t>(order_[i])] = pm.bound[i];
    Match m;
    if (finalize_match(shape_, bound, trigger.ts, ctx_, m)) out.push_back(std::move(m));
  }

  void sweep(Timestamp now) {
    for (size_t i = 1; i < pms_.size(); ++i) {
      auto& bucket = pms_[i];
      if (bucket.size() < sweep_mark_[i]) continue;
      std::erase_if(bucket, [&](const Pm& pm) { return pm.min_ts + shape_.window < now; });
      sweep_mark_[i] = std::max<size_t>(64, bucket.size() * 2);
    }
  }

  Shape shape_;
  StreamContext ctx_;
  std::vector<TypeId> order_;
  std::vector<int> step_of_;
  std::vector<std::vector<Pm>> pms_;  // by bound count; bucket 0 unused
  std::vector<size_t> sweep_mark_;
  Timestamp last_ts_ = -1;
  std::uint64_t last_seq_ = 0;
};

class TreeEvaluator final : public Evaluator {
 public:
  TreeEvaluator(const Pattern& p, const TreePtr& tree) : shape_(p), ctx_(p) {
    if (!tree) throw Error("tree plan has no tree");
    leaf_of_.assign(static_cast<size_t>(shape_.n), -1);
    build(tree, -1);
    for (int l : leaf_of_)
      if (l < 0) throw Error("tree plan does not cover all pattern types");
  }

  void process(const Event& e, std::vector<Match>& out) override {
    check_monotone(e);
    ctx_.evict(e.ts);
    sweep(e.ts);

    if (e.type < shape_.n && shape_.self_ok(e)) {
      Tuple t;
      t.events.resize(static_cast<size_t>(shape_.n));
      t.events[static_cast<size_t>(e.type)] = e;
      t.ids.push_back(e.type);
      t.min_ts = e.ts;
      propagate(leaf_of_[static_cast<size_t>(e.type)], std::move(t), e, out);
    }
    ctx_.append(e);
  }

  std::size_t live_partial_matches() const override {
    std::size_t total = 0;
    for (size_t i = 0; i < nodes_.size(); ++i)
      if (parent_[i] >= 0) total += nodes_[i].store.size();  // root tuples are emitted
    return total;
  }

 private:
  struct Tuple {
    std::vector<Event> events;  // by type id, only `ids` slots are bound
    std::vector<TypeId> ids;
    Timestamp min_ts = 0;
  };
  struct NodeRt {
    std::vector<Tuple> store;
    size_t sweep_mark = 64;
  };

  int build(const TreePtr& t, int parent) {
    int idx = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    parent_.push_back(parent);
    sibling_.push_back(-1);
    if (t->is_leaf()) {
      if (t->leaf >= shape_.n) throw Error("tree plan leaf out of range");
      leaf_of_[static_cast<size_t>(t->leaf)] = idx;
      return idx;
    }
    int l = build(t->left, idx);
    int r = build(t->right, idx);
    sibling_[static_cast<size_t>(l)] = r;
    sibling_[static_cast<size_t>(r)] = l;
    return idx;
  }

  void check_monotone(const Event& e) {
    if (e.ts < last_ts_ || (last_seq_ != 0 && e.seq <= last_seq_))
      throw Error("evaluator requires nondecreasing timestamps and increasing seq");
    last_ts_ = e.ts;
    last_seq_ = e.seq;
  }

  bool join_ok(const Tuple& a, const Tuple& b) const {
    for (TypeId x : a.ids)
      for (TypeId y : b.ids)
        if (!shape_.pair_ok(x, a.events[static_cast<size_t>(x)], y, b.events[static_cast<size_t>(y)]))
          return false;
    return true;
  }

  void propagate(int node, Tuple t, const Event& trigger, std::vector<Match>& out) {
    if (parent_[static_cast<size_t>(node)] < 0) {
      Match m;
      if (finalize_match(shape_, t.events, trigger.ts, ctx_, m)) out.push_back(std::move(m));
      return;
    }
    int sib = sibling_[static_cast<size_t>(node)];
    int parent = parent_[static_cast<size_t>(node)];
    nodes_[static_cast<size_t>(node)].store.push_back(t);
    const Tuple& mine = nodes_[static_cast<size_t>(node)].store.back();
    // Sibling stores cannot gain tuples during this cascade (their leafsets
    // exclude the trigger's type), so plain iteration is safe.
    size_t count = nodes_[static_cast<size_t>(sib)].store.size();
    for (size_t i = 0; i < count; ++i) {
      const Tuple& other = nodes_[static_cast<size_t>(sib)].store[i];
      if (other.min_ts + shape_.window < trigger.ts) continue;
      if (!join_ok(mine, other)) continue;
      Tuple joined = mine;
      for (TypeId y : other.ids) {
        joined.events[static_cast<size_t>(y)] = other.events[static_cast<size_t>(y)];
        joined.ids.push_back(y);
      }
      joined.min_ts = std::min(mine.min_ts, other.min_ts);
      propagate(parent, std::move(joined), trigger, out);
    }
  }

  void sweep(Timestamp now) {
    for (auto& node : nodes_) {
      if (node.store.size() < node.sweep_mark) continue;
      std::erase_if(node.store, [&](const Tuple& t) { return t.min_ts + shape_.window < now; });
      node.sweep_mark = std::max<size_t>(64, node.store.size() * 2);
    }
  }

  Shape shape_;
  StreamContext ctx_;
  std::vector<NodeRt> nodes_;
  std::vector<int> parent_, sibling_;
  std::vector<int> leaf_of_;
  Timestamp last_ts_ = -1;
  std::uint64_t last_seq_ = 0;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Timestamp Match::min_ts() const {
  Timestamp m = detected_at;
  for (const auto& b : bindings)
    for (const auto& e : b) m = std::min(m, e.ts);
  return m;
}

std::string Match::key() const {
  std::string out;
  for (size_t i = 0; i < bindings.size(); ++i) {
    if (i) out += "|";
    out += std::to_string(i) + ":";
    for (size_t j = 0; j < bindings[i].size(); ++j) {
      if (j) out += ",";
      out += std::to_string(bindings[i][j].seq);
    }
  }
  return out;
}

std::unique_ptr<Evaluator> make_evaluator(const Pattern& p, const Plan& plan) {
  if (plan.kind == PlanKind::Order) return std::make_unique<OrderEvaluator>(p, plan.order);
  return std::make_unique<TreeEvaluator>(p, plan.tree);
}

PlannerKind planner_kind_from_name(const std::string& name) {
  if (name == "greedy") return PlannerKind::Greedy;
  if (name == "zstream" || name == "tree") return PlannerKind::ZStream;
  throw Error("unknown planner '" + name + "' (expected greedy or zstream)");
}

const char* planner_kind_name(PlannerKind k) {
  return k == PlannerKind::Greedy ? "greedy" : "zstream";
}

std::pair<Plan, PlanTrace> run_planner(PlannerKind kind, const Pattern& p, const StatSnapshot& s) {
  if (kind == PlannerKind::Greedy) return build_order_plan(p, s);
  return build_tree_plan(p, s);
}

AdaptiveEngine::AdaptiveEngine(Pattern pattern, std::unique_ptr<DecisionPolicy> policy,
                               EngineConfig cfg)
    : pattern_(std::move(pattern)),
      policy_(std::move(policy)),
      cfg_(cfg),
      collector_(pattern_, cfg.stats) {
  if (!policy_) throw Error("engine requires a decision policy");
  if (cfg_.check_every < 1) throw Error("check_every must be >= 1");
}

void AdaptiveEngine::start(const StatSnapshot& initial) {
  auto [plan, trace] = run_planner(cfg_.planner, pattern_, initial);
  plan_ = std::move(plan);
  active_ = make_evaluator(pattern_, plan_);
  active_born_ = 0;
  arm_policy(trace, initial);
  policy_->on_deploy(initial);
}

void AdaptiveEngine::start() { start(StatSnapshot::uniform(pattern_size(pattern_))); }

void AdaptiveEngine::arm_policy(const PlanTrace& trace, const StatSnapshot& s) {
  auto* ip = dynamic_cast<InvariantPolicy*>(policy_.get());
  if (!ip) return;
  double d = ip->distance();
  if (cfg_.auto_distance) {
    try {
      d = estimate_distance(trace, s);
    } catch (const Error&) {
      d = 0.0;  // degenerate trace (all conditions zero-valued)
    }
    ip->set_distance(d);
  }
  InvariantSet inv = select_invariants(collect_dcs(trace), s, ip->k(), d);
  inv.created_from = render_plan(plan_, pattern_);
  ip->install(std::move(inv));
  ip->set_replanner([this](const StatSnapshot& snap) {
    auto [candidate, trace2] = run_planner(cfg_.planner, pattern_, snap);
    metrics_.planner_invocations++;
    return !(candidate == plan_);
  });
}

void AdaptiveEngine::process_event(const Event& e, std::vector<Match>& out) {
  if (!active_) throw Error("engine not started");
  if (e.ts < last_ts_) {
    metrics_.out_of_order++;
    return;
  }
  last_ts_ = e.ts;
  Event stamped = e;
  stamped.seq = ++seq_;
  metrics_.events++;
  collector_.observe(stamped);

  if (draining_ && stamped.ts >= draining_->deadline) draining_.reset();

  if (draining_) {
    scratch_.clear();
    draining_->instance->process(stamped, scratch_);
    for (auto& m : scratch_) {
      Timestamp mt = m.min_ts();
      if (mt >= draining_->born && mt < draining_->t0) {
        metrics_.matches++;
        out.push_back(std::move(m));
      }
    }
  }
  scratch_.clear();
  active_->process(stamped, scratch_);
  for (auto& m : scratch_) {
    if (m.min_ts() < active_born_) continue;  // owned by the draining instance
    metrics_.matches++;
    out.push_back(std::move(m));
  }
  metrics_.peak_partial_matches =
      std::max(metrics_.peak_partial_matches, active_->live_partial_matches());

  if (++since_check_ >= cfg_.check_every) {
    since_check_ = 0;
    maybe_adapt(stamped.ts);
  }
}

void AdaptiveEngine::maybe_adapt(Timestamp now) {
  auto t0 = std::chrono::steady_clock::now();
  StatSnapshot snap = collector_.snapshot(now);
  bool go = policy_->decide(snap);
  metrics_.decision_seconds += seconds_since(t0);
  metrics_.decision_checks++;
  if (!go) return;

  auto t1 = std::chrono::steady_clock::now();
  auto [candidate, trace] = run_planner(cfg_.planner, pattern_, snap);
  metrics_.planner_seconds += seconds_since(t1);
  metrics_.planner_invocations++;

  // Deploy only a strictly better, different plan. On the no-deploy path the
  // policy keeps its installed invariants and baseline: they describe the
  // plan that is still running.
  if (!(candidate == plan_) && plan_model_cost(candidate, snap) < plan_model_cost(plan_, snap))
    deploy(std::move(candidate), trace, snap, now + 1);
}

void AdaptiveEngine::migrate(Plan plan, PlanTrace trace, const StatSnapshot& s, Timestamp t0) {
  deploy(std::move(plan), trace, s, t0);
}

void AdaptiveEngine::deploy(Plan plan, const PlanTrace& trace, const StatSnapshot& s,
                            Timestamp t0) {
  if (draining_) {
    metrics_.forced_migration_discards++;
    draining_.reset();
  }
  draining_.emplace();
  draining_->instance = std::move(active_);
  draining_->born = active_born_;
  draining_->t0 = t0;
  draining_->deadline = t0 + pattern_.window_ms;

  plan_ = std::move(plan);
  active_ = make_evaluator(pattern_, plan_);
  active_born_ = t0;
  metrics_.reoptimizations++;
  arm_policy(trace, s);
  policy_->on_deploy(s);
}

EventSource vector_source(std::vector<Event> events) {
  auto shared = std::make_shared<std::vector<Event>>(std::move(events));
  auto index = std::make_shared<size_t>(0);
  return [shared, index](Event& e) {
    if (*index >= shared->size()) return false;
    e = (*shared)[(*index)++];
    return true;
  };
}

RunMetrics run_loop(AdaptiveEngine& engine, EventSource source,
                    const std::function<void(const Match&)>& sink) {
  auto t0 = std::chrono::steady_clock::now();
  Event e;
  std::vector<Match> matches;
  while (source(e)) {
    matches.clear();
    engine.process_event(e, matches);
    if (sink)
      for (const auto& m : matches) sink(m);
  }
  engine.metrics().wall_seconds = seconds_since(t0);
  return engine.metrics();
}

}  // namespace acep

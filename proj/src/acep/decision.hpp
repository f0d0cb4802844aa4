#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "acep/invariants.hpp"
#include "acep/types.hpp"

namespace acep {

/// Reoptimizing decision function: given current statistics, should the
/// planner be invoked?
class DecisionPolicy {
 public:
  virtual ~DecisionPolicy() = default;
  virtual bool decide(const StatSnapshot& s) = 0;
  /// Called whenever a new plan is deployed (or on initial deployment).
  virtual void on_deploy(const StatSnapshot& s) {}
  virtual std::string name() const = 0;
};

class UnconditionalPolicy final : public DecisionPolicy {
 public:
  bool decide(const StatSnapshot&) override { return true; }
  std::string name() const override { return "unconditional"; }
};

/// Never re-plans; the static baseline of the benchmarks.
class StaticPolicy final : public DecisionPolicy {
 public:
  bool decide(const StatSnapshot&) override { return false; }
  std::string name() const override { return "static"; }
};

/// Fires when any rate or selectivity deviates from its baseline value by at
/// least t. Relative deviation by default; absolute behind a switch. The
/// baseline resets on every deployment.
class ThresholdPolicy final : public DecisionPolicy {
 public:
  explicit ThresholdPolicy(double t, bool absolute = false);
  bool decide(const StatSnapshot& s) override;
  void on_deploy(const StatSnapshot& s) override { baseline_ = s; }
  std::string name() const override;

 private:
  double threshold_;
  bool absolute_;
  std::optional<StatSnapshot> baseline_;
};

/// Holds the invariant set built for the current plan; fires when a verified
/// invariant is violated. For K=ALL tree-planner invariants, a violation at a
/// memoized cell outside the final plan is ambiguous (the final plan may
/// survive the flip), so it is disambiguated by re-running the planner.
class InvariantPolicy final : public DecisionPolicy {
 public:
  using Replanner = std::function<bool(const StatSnapshot&)>;  // true iff re-plan differs

  InvariantPolicy(int k, double d) : k_(k), distance_(d) {}

  void install(InvariantSet inv) { inv_ = std::move(inv); }
  void set_replanner(Replanner r) { replanner_ = std::move(r); }
  void set_distance(double d) { distance_ = d; }  // d=auto re-estimates per deployment

  bool decide(const StatSnapshot& s) override;
  std::string name() const override;

  int k() const { return k_; }
  double distance() const { return distance_; }
  const std::optional<InvariantSet>& invariants() const { return inv_; }

 private:
  int k_;
  double distance_;
  std::optional<InvariantSet> inv_;
  Replanner replanner_;
};

/// Parses a policy spec: "unconditional", "static", "threshold:<t>",
/// "invariant[:K=<k>|K=ALL][:d=<d>|d=auto]". For d=auto the caller reads
/// auto_distance() and supplies the estimate when installing invariants.
struct PolicyConfig {
  enum class Kind { Unconditional, Static, Threshold, Invariant } kind = Kind::Invariant;
  double threshold = 0.0;
  bool absolute = false;
  int k = 1;
  double distance = 0.0;
  bool auto_distance = false;

  static PolicyConfig parse(const std::string& spec);
  std::unique_ptr<DecisionPolicy> instantiate() const;
};

}  // namespace acep

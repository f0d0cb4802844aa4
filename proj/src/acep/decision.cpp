#include "acep/decision.hpp"

#include <cmath>
#include <cstdio>

namespace acep {

namespace {
constexpr double kEps = 1e-9;

double deviation(double v, double v0, bool absolute) {
  double diff = std::fabs(v - v0);
  return absolute ? diff : diff / std::max(v0, kEps);
}

double parse_num(const std::string& text, const char* what) {
  try {
    size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw Error("");
    return v;
  } catch (const std::exception&) {
    throw Error(std::string("policy spec: bad ") + what + " '" + text + "'");
  }
}
}  // namespace

ThresholdPolicy::ThresholdPolicy(double t, bool absolute) : threshold_(t), absolute_(absolute) {
  if (!(t > 0)) throw Error("threshold policy requires t > 0");
}

bool ThresholdPolicy::decide(const StatSnapshot& s) {
  if (!baseline_) return true;  // no baseline yet: force an initial planning pass
  const StatSnapshot& b = *baseline_;
  if (s.dim() != b.dim()) throw Error("threshold policy: snapshot dimension changed");
  for (int i = 0; i < s.dim(); ++i)
    if (deviation(s.rate(i), b.rate(i), absolute_) >= threshold_) return true;
  for (int i = 0; i < s.dim(); ++i)
    for (int j = i; j < s.dim(); ++j)
      if (deviation(s.selectivity(i, j), b.selectivity(i, j), absolute_) >= threshold_)
        return true;
  return false;
}

std::string ThresholdPolicy::name() const {
  char buf[48];
  std::snprintf(buf, sizeof buf, "threshold:%g%s", threshold_, absolute_ ? ":abs" : "");
  return buf;
}

bool InvariantPolicy::decide(const StatSnapshot& s) {
  if (!inv_) return true;
  Verdict v = verify(*inv_, s);
  if (v.intact) return false;
  if (v.block_in_plan) return true;
  // Off-plan cell flipped; only a re-run can tell whether the plan changes.
  if (replanner_) return replanner_(s);
  return true;
}

std::string InvariantPolicy::name() const {
  char buf[64];
  if (k_ == kAllConditions)
    std::snprintf(buf, sizeof buf, "invariant:K=ALL:d=%g", distance_);
  else
    std::snprintf(buf, sizeof buf, "invariant:K=%d:d=%g", k_, distance_);
  return buf;
}

PolicyConfig PolicyConfig::parse(const std::string& spec) {
  PolicyConfig cfg;
  size_t colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "unconditional") {
    cfg.kind = Kind::Unconditional;
    return cfg;
  }
  if (head == "static") {
    cfg.kind = Kind::Static;
    return cfg;
  }
  if (head == "threshold") {
    cfg.kind = Kind::Threshold;
    if (rest.empty()) throw Error("policy 'threshold' needs a value, e.g. threshold:0.4");
    size_t next = rest.find(':');
    cfg.threshold = parse_num(rest.substr(0, next), "threshold");
    if (next != std::string::npos) {
      if (rest.substr(next + 1) != "abs") throw Error("unknown threshold option: " + rest);
      cfg.absolute = true;
    }
    return cfg;
  }
  if (head != "invariant") throw Error("unknown decision policy: " + spec);
  cfg.kind = Kind::Invariant;
  while (!rest.empty()) {
    size_t next = rest.find(':');
    std::string part = rest.substr(0, next);
    rest = next == std::string::npos ? "" : rest.substr(next + 1);
    if (part.rfind("K=", 0) == 0) {
      std::string val = part.substr(2);
      cfg.k = (val == "ALL" || val == "all") ? kAllConditions
                                               : static_cast<int>(parse_num(val, "K"));
      if (cfg.k != kAllConditions && cfg.k < 1) throw Error("invariant policy: K must be >= 1");
    } else if (part.rfind("d=", 0) == 0) {
      std::string val = part.substr(2);
      if (val == "auto") {
        cfg.auto_distance = true;
      } else {
        cfg.distance = parse_num(val, "d");
        if (cfg.distance < 0) throw Error("invariant policy: d must be >= 0");
      }
    } else {
      throw Error("unknown invariant policy option: " + part);
    }
  }
  return cfg;
}

std::unique_ptr<DecisionPolicy> PolicyConfig::instantiate() const {
  switch (kind) {
    case Kind::Unconditional: return std::make_unique<UnconditionalPolicy>();
    case Kind::Static: return std::make_unique<StaticPolicy>();
    case Kind::Threshold: return std::make_unique<ThresholdPolicy>(threshold, absolute);
    case Kind::Invariant: return std::make_unique<InvariantPolicy>(k, distance);
  }
  throw Error("unreachable policy kind");
}

}  // namespace acep

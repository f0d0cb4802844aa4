#include "acep/stats.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace acep {

StatCollector::StatCollector(const Pattern& pattern, StatCollectorConfig cfg)
    : pattern_(&pattern),
      window_ms_(cfg.window_ms > 0 ? cfg.window_ms : pattern.window_ms * 10),
      reservoir_capacity_(cfg.reservoir_capacity),
      samples_per_event_(cfg.samples_per_event),
      min_samples_(cfg.min_samples),
      dim_(pattern.position_count()),
      rng_(cfg.seed) {
  if (pattern.is_or()) throw Error("StatCollector: attach one collector per OR disjunct");
  rate_buckets_.resize(static_cast<size_t>(dim_));
  reservoirs_.resize(static_cast<size_t>(dim_));
  reservoir_seen_.assign(static_cast<size_t>(dim_), 0);

  // Fold all predicates between one pair of positions into one PairState so
  // sel[i][j] estimates their joint pass rate.
  auto pair_state = [&](TypeId a, TypeId b) -> PairState& {
    for (auto& ps : pairs_)
      if (ps.a == a && ps.b == b) return ps;
    PairState ps;
    ps.a = a;
    ps.b = b;
    pairs_.push_back(std::move(ps));
    return pairs_.back();
  };
  for (const auto& pred : pattern.predicates) {
    TypeId a = pred.lpos;
    TypeId b = pred.rhs_is_const ? pred.lpos : pred.rpos;
    if (a > b) std::swap(a, b);
    pair_state(a, b).predicates.push_back(pred);
  }
}

void StatCollector::bump(std::deque<Bucket>& buckets, Timestamp ts) {
  std::int64_t second = ts / 1000;
  if (buckets.empty() || buckets.back().second != second) buckets.push_back({second, 0});
  buckets.back().count++;
}

void StatCollector::prune(Timestamp now) {
  std::int64_t horizon = (now - window_ms_) / 1000;
  for (auto& dq : rate_buckets_)
    while (!dq.empty() && dq.front().second < horizon) dq.pop_front();
  for (auto& ps : pairs_)
    while (!ps.buckets.empty() && ps.buckets.front().second < horizon) ps.buckets.pop_front();
}

void StatCollector::sample_pair(PairState& ps, const Event& e) {
  // Diagonal entry: single-position predicates, evaluated directly.
  if (ps.a == ps.b) {
    bool ok = true;
    for (const auto& pred : ps.predicates)
      if (!pred.evaluate(e, e)) ok = false;
    std::int64_t second = e.ts / 1000;
    if (ps.buckets.empty() || ps.buckets.back().second != second)
      ps.buckets.push_back({second, 0, 0});
    ps.buckets.back().tried++;
    if (ok) ps.buckets.back().satisfied++;
    return;
  }
  TypeId other = (e.type == ps.a) ? ps.b : ps.a;
  const auto& reservoir = reservoirs_[static_cast<size_t>(other)];
  if (reservoir.empty()) return;
  std::uniform_int_distribution<size_t> pick(0, reservoir.size() - 1);
  std::int64_t second = e.ts / 1000;
  if (ps.buckets.empty() || ps.buckets.back().second != second)
    ps.buckets.push_back({second, 0, 0});
  for (int i = 0; i < samples_per_event_; ++i) {
    const Event& counterpart = reservoir[pick(rng_)];
    const Event& ea = (e.type == ps.a) ? e : counterpart;
    const Event& eb = (e.type == ps.a) ? counterpart : e;
    bool ok = true;
    for (const auto& pred : ps.predicates) {
      const Event& le = (pred.lpos == ps.a) ? ea : eb;
      const Event& re = (pred.lpos == ps.a) ? eb : ea;
      if (!pred.evaluate(le, re)) ok = false;
    }
    ps.buckets.back().tried++;
    if (ok) ps.buckets.back().satisfied++;
  }
}

void StatCollector::observe(const Event& e) {
  if (e.ts < last_ts_) {
    ++rejected_;
    return;
  }
  last_ts_ = e.ts;
  if (first_ts_ < 0) first_ts_ = e.ts;
  if (e.type < 0 || e.type >= dim_) throw Error("observe: event type out of range");
  prune(e.ts);

  bump(rate_buckets_[static_cast<size_t>(e.type)], e.ts);

  // Reservoir sampling, with the counter restarted every statistics window so
  // the sample tracks recent data.
  std::int64_t epoch = e.ts / std::max<Timestamp>(window_ms_, 1);
  if (epoch != epoch_second_) {
    epoch_second_ = epoch;
    std::fill(reservoir_seen_.begin(), reservoir_seen_.end(), 0);
  }
  auto& reservoir = reservoirs_[static_cast<size_t>(e.type)];
  std::uint64_t seen = ++reservoir_seen_[static_cast<size_t>(e.type)];
  if (reservoir.size() < static_cast<size_t>(reservoir_capacity_)) {
    reservoir.push_back(e);
  } else {
    std::uniform_int_distribution<std::uint64_t> pick(0, seen - 1);
    std::uint64_t slot = pick(rng_);
    if (slot < reservoir.size()) reservoir[static_cast<size_t>(slot)] = e;
  }

  for (auto& ps : pairs_)
    if (ps.a == e.type || ps.b == e.type) sample_pair(ps, e);
}

StatSnapshot StatCollector::snapshot(Timestamp now) const {
  if (now < last_ts_) throw Error("snapshot: clock behind last observed event");
  StatSnapshot s = StatSnapshot::uniform(dim_, now);
  std::int64_t horizon = (now - window_ms_) / 1000;
  // Until a full window has elapsed, divide by the observed span so warm-up
  // rates are unbiased instead of scaled down by the empty remainder.
  double window_seconds = static_cast<double>(window_ms_) / 1000.0;
  if (first_ts_ >= 0 && now - first_ts_ < window_ms_)
    window_seconds = std::max(1.0, static_cast<double>(now - first_ts_) / 1000.0);
  for (int i = 0; i < dim_; ++i) {
    std::int64_t count = 0;
    for (const auto& b : rate_buckets_[static_cast<size_t>(i)])
      if (b.second >= horizon) count += b.count;
    s.rates[static_cast<size_t>(i)] = static_cast<double>(count) / window_seconds;
  }
  for (const auto& ps : pairs_) {
    std::int64_t tried = 0, satisfied = 0;
    for (const auto& b : ps.buckets) {
      if (b.second < horizon) continue;
      tried += b.tried;
      satisfied += b.satisfied;
    }
    double value;
    if (tried >= min_samples_) {
      value = static_cast<double>(satisfied) / static_cast<double>(tried);
      // Memoize so a sparse stretch falls back to the last confident value.
      ps.last_confident = value;
      ps.has_confident = true;
    } else if (ps.has_confident) {
      value = ps.last_confident;
    } else {
      value = 1.0;
    }
    s.sel[static_cast<size_t>(ps.a)][static_cast<size_t>(ps.b)] = value;
  }
  return s;
}

std::string snapshot_to_csv(const StatSnapshot& s) {
  std::string out = "kind,i,j,value\n";
  char buf[96];
  for (int i = 0; i < s.dim(); ++i) {
    std::snprintf(buf, sizeof buf, "rate,%d,%d,%.17g\n", i, i, s.rate(i));
    out += buf;
  }
  for (int i = 0; i < s.dim(); ++i)
    for (int j = i; j < s.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "sel,%d,%d,%.17g\n", i, j, s.selectivity(i, j));
      out += buf;
    }
  return out;
}

StatSnapshot snapshot_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("kind,i,j,value", 0) != 0)
    throw Error("snapshot CSV: missing 'kind,i,j,value' header");
  struct Entry {
    bool is_rate;
    int i, j;
    double v;
  };
  std::vector<Entry> entries;
  int dim = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    char kind[8];
    Entry e{};
    int rate_match = std::sscanf(line.c_str(), "%7[a-z],%d,%d,%lf", kind, &e.i, &e.j, &e.v);
    if (rate_match != 4) throw Error("snapshot CSV: malformed line " + std::to_string(lineno));
    std::string k = kind;
    if (k == "rate")
      e.is_rate = true;
    else if (k == "sel")
      e.is_rate = false;
    else
      throw Error("snapshot CSV: unknown kind '" + k + "' at line " + std::to_string(lineno));
    dim = std::max(dim, std::max(e.i, e.j) + 1);
    entries.push_back(e);
  }
  StatSnapshot s = StatSnapshot::uniform(dim);
  for (const auto& e : entries) {
    if (e.is_rate)
      s.rates[static_cast<size_t>(e.i)] = e.v;
    else {
      int i = std::min(e.i, e.j), j = std::max(e.i, e.j);
      s.sel[static_cast<size_t>(i)][static_cast<size_t>(j)] = e.v;
    }
  }
  s.validate();
  return s;
}

}  // namespace acep

#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "acep/types.hpp"

namespace acep {

struct StatCollectorConfig {
  Timestamp window_ms = 0;      // 0: derive as pattern window * 10
  int reservoir_capacity = 1024;  // R
  int samples_per_event = 8;      // S: counterpart samples tested per observe
  int min_samples = 20;         // confidence floor for a selectivity estimate
  std::uint64_t seed = 0x5eed;
};

/// Online estimator of arrival rates and predicate selectivities over a
/// sliding window, fed by the raw stream independently of the current plan.
/// Single-writer; snapshots are immutable values.
class StatCollector {
 public:
  StatCollector(const Pattern& pattern, StatCollectorConfig cfg = {});

  /// Monotone input only; out-of-order events are rejected and counted.
  void observe(const Event& e);

  StatSnapshot snapshot(Timestamp now) const;

  Timestamp window_ms() const { return window_ms_; }
  std::uint64_t rejected_out_of_order() const { return rejected_; }

 private:
  struct Bucket {
    std::int64_t second = 0;
    std::int64_t count = 0;
  };
  struct PairState {
    TypeId a = 0, b = 0;  // a < b, or a == b for single-position predicates
    std::vector<Predicate> predicates;
    struct PairBucket {
      std::int64_t second = 0;
      std::int64_t tried = 0, satisfied = 0;
    };
    std::deque<PairBucket> buckets;
    mutable double last_confident = 1.0;
    mutable bool has_confident = false;
  };

  void bump(std::deque<Bucket>& buckets, Timestamp ts);
  void prune(Timestamp now);
  void sample_pair(PairState& ps, const Event& e);

  const Pattern* pattern_;
  Timestamp window_ms_;
  int reservoir_capacity_;
  int samples_per_event_;
  int min_samples_;
  int dim_;

  std::vector<std::deque<Bucket>> rate_buckets_;
  std::vector<std::vector<Event>> reservoirs_;
  std::vector<std::uint64_t> reservoir_seen_;
  std::vector<PairState> pairs_;
  Timestamp last_ts_ = -1;
  Timestamp first_ts_ = -1;
  std::int64_t epoch_second_ = -1;
  std::uint64_t rejected_ = 0;
  mutable std::mt19937_64 rng_;
};

/// Snapshot dump: CSV "kind,i,j,value" (kind = rate|sel).
std::string snapshot_to_csv(const StatSnapshot& s);
StatSnapshot snapshot_from_csv(const std::string& text);

}  // namespace acep

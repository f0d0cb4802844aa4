#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acep/engine.hpp"
#include "acep/types.hpp"

namespace acep {

/// Piecewise schedule of (start_ms, value) points; `ramp` interpolates
/// linearly between points, otherwise values hold until the next point.
struct Schedule {
  struct Point {
    Timestamp at = 0;
    double value = 0;
  };
  std::vector<Point> points;
  bool ramp = false;

  double at(Timestamp t) const;
  double max_value() const;
};

/// Scripted synthetic workload: per-type arrival rates (events/s) and
/// per-attribute pair selectivities, both time-varying.
///
/// Text format, one directive per line ('#' comments):
///   seed <n>
///   duration <ms>
///   rate <Type> [ramp] <t_ms>:<value> ...
///   sel <attr> <TypeA> <TypeB> [ramp] <t_ms>:<value> ...
///
/// A `sel` line equips both types with numeric attribute <attr>, drawn so
/// that P(a.<attr> < b.<attr>) tracks the schedule; pair it with a pattern
/// predicate `a.<attr> < b.<attr>`.
struct DriftScript {
  std::uint64_t seed = 1;
  Timestamp duration_ms = 0;
  struct RateLine {
    std::string type;
    Schedule sched;
  };
  struct SelLine {
    std::string attr;
    std::string type_a, type_b;
    Schedule sched;
  };
  std::vector<RateLine> rates;
  std::vector<SelLine> sels;

  static DriftScript parse(const std::string& text);
  /// Built-in scripts: "traffic-like" (skewed rates, one large step change)
  /// and "stocks-like" (even rates, frequent small jitters).
  static DriftScript preset(const std::string& name);
  std::string render() const;
};

/// A stream with its own type-name table; `Event::type` indexes `names`.
struct NamedStream {
  std::vector<std::string> names;
  std::vector<Event> events;
};

/// Poisson arrivals per type at the scheduled instantaneous rate (thinning),
/// deterministic for a fixed script.
NamedStream generate(const DriftScript& script);

/// Remaps a named stream onto a pattern's type ids; events whose type the
/// pattern does not mention are dropped. Sequence numbers are reassigned.
std::vector<Event> bind_stream(const NamedStream& stream, const Pattern& p);

/// Event CSV: "timestamp_ms,type_name,attr1=val1;attr2=val2" (attributes
/// optional), no header.
std::string events_to_csv(const NamedStream& stream);
NamedStream ingest_csv(const std::string& text);

/// Match CSV row: "detect_ts,pos1_event_ts,..." in type-id order; Kleene
/// bindings joined with ';'.
std::string match_to_csv(const Match& m);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace acep

#pragma once

#include <string>

#include "acep/types.hpp"

namespace acep {

struct ParseError : Error {
  ParseError(const std::string& msg, size_t offset)
      : Error(msg + " (at offset " + std::to_string(offset) + ")"), offset(offset) {}
  size_t offset;
};

/// Parses the pattern DSL, e.g.
///   PATTERN SEQ(A a, B b, C c)
///   WHERE ((a.person_id = b.person_id) AND (b.person_id = c.person_id))
///   WITHIN 10 minutes
/// Negation: `NOT B b`; Kleene closure: `B* b`. Disjunctions nest groups:
///   PATTERN OR(SEQ(A a, B b), SEQ(C c, D d)) ...
Pattern parse_pattern(const std::string& text);

/// Canonical single-line rendering; parse_pattern(render_pattern(p)) is
/// structurally equal to p.
std::string render_pattern(const Pattern& p);

}  // namespace acep

#include "acep/acep.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "acep/bench.hpp"
#include "acep/engine.hpp"
#include "acep/invariants.hpp"
#include "acep/parser.hpp"
#include "acep/stats.hpp"
#include "acep/types.hpp"
#include "acep/workload.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

/// Runs `body`; exceptions thrown before `input_stage` flips to false are
/// reported as input errors, later ones as runtime errors.
template <typename Fn>
int guarded(Fn&& body, int failure_code = ACEP_ERR_RUNTIME) {
  try {
    return body();
  } catch (const acep::ParseError& e) {
    return fail(ACEP_ERR_INPUT, e.what());
  } catch (const std::exception& e) {
    return fail(failure_code, e.what());
  }
}

}  // namespace

struct acep_pattern {
  acep::Pattern pat;
};
struct acep_stats {
  acep::StatSnapshot snap;
};

extern "C" {

const char* acep_version(void) { return "0.1.0"; }

const char* acep_last_error(void) { return g_last_error.c_str(); }

void acep_string_free(char* s) { std::free(s); }

int acep_pattern_parse(const char* text, acep_pattern** out) {
  if (!text || !out) return fail(ACEP_ERR_INPUT, "null argument");
  return guarded(
      [&] {
        *out = new acep_pattern{acep::parse_pattern(text)};
        return ACEP_OK;
      },
      ACEP_ERR_INPUT);
}

void acep_pattern_free(acep_pattern* p) { delete p; }

int acep_pattern_size(const acep_pattern* p, int* out_size) {
  if (!p || !out_size) return fail(ACEP_ERR_INPUT, "null argument");
  return guarded([&] {
    *out_size = acep::pattern_size(p->pat);
    return ACEP_OK;
  });
}

int acep_pattern_render(const acep_pattern* p, char** out_text) {
  if (!p || !out_text) return fail(ACEP_ERR_INPUT, "null argument");
  return guarded([&] {
    *out_text = dup_string(acep::render_pattern(p->pat));
    return *out_text ? ACEP_OK : fail(ACEP_ERR_RUNTIME, "out of memory");
  });
}

int acep_stats_from_csv(const char* csv_text, acep_stats** out) {
  if (!csv_text || !out) return fail(ACEP_ERR_INPUT, "null argument");
  return guarded(
      [&] {
        *out = new acep_stats{acep::snapshot_from_csv(csv_text)};
        return ACEP_OK;
      },
      ACEP_ERR_INPUT);
}

int acep_stats_uniform(int dim, acep_stats** out) {
  if (!out || dim < 1) return fail(ACEP_ERR_INPUT, "dimension must be >= 1");
  *out = new acep_stats{acep::StatSnapshot::uniform(dim)};
  return ACEP_OK;
}

void acep_stats_free(acep_stats* s) { delete s; }

int acep_plan_build(const acep_pattern* p, const acep_stats* s, const char* planner,
                    char** out_plan_text) {
  if (!p || !s || !planner || !out_plan_text) return fail(ACEP_ERR_INPUT, "null argument");
  acep::PlannerKind kind;
  try {
    kind = acep::planner_kind_from_name(planner);
  } catch (const std::exception& e) {
    return fail(ACEP_ERR_INPUT, e.what());
  }
  return guarded([&] {
    if (p->pat.is_or()) {
      std::string text;
      for (size_t i = 0; i < p->pat.disjuncts.size(); ++i) {
        auto [plan, trace] = acep::run_planner(kind, p->pat.disjuncts[i], s->snap);
        if (i) text += " | ";
        text += acep::render_plan(plan, p->pat.disjuncts[i]);
      }
      *out_plan_text = dup_string(text);
    } else {
      auto [plan, trace] = acep::run_planner(kind, p->pat, s->snap);
      *out_plan_text = dup_string(acep::render_plan(plan, p->pat));
    }
    return *out_plan_text ? ACEP_OK : fail(ACEP_ERR_RUNTIME, "out of memory");
  });
}

int acep_explain(const acep_pattern* p, const acep_stats* s, const char* planner, int k, double d,
                 int auto_d, char** out_report) {
  if (!p || !s || !planner || !out_report) return fail(ACEP_ERR_INPUT, "null argument");
  if (k != acep::kAllConditions && k < 1)
    return fail(ACEP_ERR_INPUT, "K must be >= 1 (or -1 for ALL)");
  if (d < 0) return fail(ACEP_ERR_INPUT, "d must be >= 0");
  acep::PlannerKind kind;
  try {
    kind = acep::planner_kind_from_name(planner);
  } catch (const std::exception& e) {
    return fail(ACEP_ERR_INPUT, e.what());
  }
  return guarded([&] {
    *out_report = dup_string(acep::explain_plan(p->pat, s->snap, kind, k, d, auto_d != 0));
    return *out_report ? ACEP_OK : fail(ACEP_ERR_RUNTIME, "out of memory");
  });
}

int acep_generate(const char* script_text, char** out_csv) {
  if (!script_text || !out_csv) return fail(ACEP_ERR_INPUT, "null argument");
  acep::DriftScript script;
  try {
    script = acep::DriftScript::parse(script_text);
  } catch (const std::exception& e) {
    return fail(ACEP_ERR_INPUT, e.what());
  }
  return guarded([&] {
    *out_csv = dup_string(acep::events_to_csv(acep::generate(script)));
    return *out_csv ? ACEP_OK : fail(ACEP_ERR_RUNTIME, "out of memory");
  });
}

int acep_bench_run(const char* config_text, char** out_csv) {
  if (!config_text || !out_csv) return fail(ACEP_ERR_INPUT, "null argument");
  acep::BenchConfig cfg;
  try {
    cfg = acep::BenchConfig::parse(config_text);
  } catch (const std::exception& e) {
    return fail(ACEP_ERR_INPUT, e.what());
  }
  return guarded([&] {
    *out_csv = dup_string(acep::run_benchmark(cfg));
    return *out_csv ? ACEP_OK : fail(ACEP_ERR_RUNTIME, "out of memory");
  });
}

}  // extern "C"

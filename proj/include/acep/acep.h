/* Adaptive CEP engine: C API surface of the shared library.
 *
 * All functions returning int use:
 *   0  success
 *   1  runtime error
 *   2  invalid input / configuration error
 * On failure, acep_last_error() (thread-local) describes the problem.
 * Strings returned through char** are heap-allocated; release them with
 * acep_string_free().
 */
#ifndef ACEP_H
#define ACEP_H

#ifdef __cplusplus
extern "C" {
#endif

#define ACEP_OK 0
#define ACEP_ERR_RUNTIME 1
#define ACEP_ERR_INPUT 2

typedef struct acep_pattern acep_pattern;
typedef struct acep_stats acep_stats;

const char* acep_version(void);
const char* acep_last_error(void);
void acep_string_free(char* s);

/* Pattern text, e.g.
 * "PATTERN SEQ(A a, B b, C c) WHERE (a.x < b.x) WITHIN 5 s". */
int acep_pattern_parse(const char* text, acep_pattern** out);
void acep_pattern_free(acep_pattern* p);
int acep_pattern_size(const acep_pattern* p, int* out_size);
int acep_pattern_render(const acep_pattern* p, char** out_text);

/* Statistics CSV: header "kind,i,j,value", kind = rate|sel. */
int acep_stats_from_csv(const char* csv_text, acep_stats** out);
int acep_stats_uniform(int dim, acep_stats** out);
void acep_stats_free(acep_stats* s);

/* planner: "greedy" or "zstream". Canonical plan text via out_plan_text. */
int acep_plan_build(const acep_pattern* p, const acep_stats* s, const char* planner,
                    char** out_plan_text);

/* Full planning report: plan, deciding conditions, selected invariants,
 * average invariant distance. k = -1 selects all conditions (K=ALL);
 * auto_d != 0 estimates d from the trace and ignores the d argument. */
int acep_explain(const acep_pattern* p, const acep_stats* s, const char* planner, int k, double d,
                 int auto_d, char** out_report);

/* Drift-script text in, event CSV out. */
int acep_generate(const char* script_text, char** out_csv);

/* Benchmark config text in, metrics CSV out. */
int acep_bench_run(const char* config_text, char** out_csv);

#ifdef __cplusplus
}
#endif

#endif /* ACEP_H */

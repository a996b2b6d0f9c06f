/* graminfer - grammar inference for DSL snippets via LLM prompting with an
 * LALR(1) validation engine.
 *
 * C API over the shared library. All functions are thread-safe; a gi_grammar
 * is immutable once compiled and may be parsed from multiple threads.
 * Strings returned through out-parameters are heap-allocated and must be
 * released with gi_free(). Out-parameters may be NULL if the caller does not
 * want that value.
 */
#ifndef GRAMINFER_H
#define GRAMINFER_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gi_status {
  GI_OK = 0,
  GI_USAGE_ERROR = 1,     /* bad arguments or configuration */
  GI_DATA_ERROR = 2,      /* unreadable or malformed input data */
  GI_TRANSPORT_ERROR = 3, /* LLM transport / transcript failure */
  GI_INTERNAL_ERROR = 4,  /* unexpected failure, or metrics mismatch */
  GI_GRAMMAR_INVALID = 5, /* grammar failed to compile */
  GI_PARSE_FAILED = 6     /* input did not parse under the grammar */
} gi_status;

/* Opaque compiled grammar handle. */
typedef struct gi_grammar gi_grammar;

void gi_free(char* s);

const char* gi_version(void);

/* Compiles grammar notation. On success *out is a new handle. On failure
 * returns GI_GRAMMAR_INVALID and *out_error carries the rendered message. */
gi_status gi_grammar_compile(const char* source_utf8, gi_grammar** out, char** out_error);

void gi_grammar_destroy(gi_grammar* g);

/* Shift/reduce conflicts resolved during table construction. */
size_t gi_grammar_warning_count(const gi_grammar* g);
gi_status gi_grammar_warning(const gi_grammar* g, size_t index, char** out_warning);

/* Parses input under a compiled grammar. On success *out_tree receives an
 * indented tree dump. On failure returns GI_PARSE_FAILED and *out_error the
 * rendered parse error. */
gi_status gi_grammar_parse(const gi_grammar* g, const char* input_utf8, char** out_tree,
                           char** out_error);

/* Runs the full inference pipeline. config_json keys:
 *   eval, fsl, out        - file paths (required)
 *   few_shot              - bool, default true
 *   max_iterations        - int, default 10
 *   top_k                 - int, default 3
 *   similarity_threshold  - number, default 0.5
 *   mode                  - "live" | "record" | "replay", default "live"
 *   transcript            - transcript path (required for record/replay)
 *   model, base_url, api_key_env, templates, deterministic - optional
 * On success *out_metrics_json receives the metrics block. */
gi_status gi_run(const char* config_json, char** out_metrics_json, char** out_error);

/* Recomputes metrics from a report document and compares with its embedded
 * metrics block. Returns GI_OK when consistent (*out_diff = "OK"),
 * GI_INTERNAL_ERROR on mismatch (*out_diff = field-level diff), or
 * GI_DATA_ERROR when the document is malformed. */
gi_status gi_metrics_verify(const char* report_json, char** out_diff, char** out_error);

#ifdef __cplusplus
}
#endif

#endif /* GRAMINFER_H */

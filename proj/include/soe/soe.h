#ifndef SOE_H
#define SOE_H

/* Batch interface to the staged-construction engine.  A run is created from
 * a config file or config text, optionally adjusted with key/value options,
 * executed once, and queried for its JSON report or written out as report
 * files.  All functions are thread-compatible per handle; a handle is not
 * thread-safe. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct soe_run soe_run;

/* Exit-status semantics shared by soe_run_execute and the CLI. */
#define SOE_EXIT_PASS 0
#define SOE_EXIT_ERROR 1
#define SOE_EXIT_BOUND_FAIL 2
#define SOE_EXIT_BUDGET 3

/* Returns NULL on failure and writes a diagnostic into err (if nonnull,
 * truncated to err_len). */
soe_run* soe_run_create_from_file(const char* path, char* err, size_t err_len);
soe_run* soe_run_create_from_text(const char* text, int is_json, char* err, size_t err_len);

/* Applies a config override before execution; returns 0 on success, nonzero
 * on an unknown key or bad value (see soe_run_error). */
int soe_run_set_option(soe_run* run, const char* key, const char* value);

/* Validates and executes the configured pipeline; returns one of the
 * SOE_EXIT codes.  Idempotent: later calls return the stored status. */
int soe_run_execute(soe_run* run);

/* JSON report of the executed run; owned by the handle, valid until
 * destroy.  NULL before execution or after an unreported error. */
const char* soe_run_report_json(soe_run* run);

/* Writes report.json plus the CSV ledgers into dir (which must exist);
 * returns 0 on success. */
int soe_run_write_outputs(soe_run* run, const char* dir);

/* Last error text for this handle, or an empty string. */
const char* soe_run_error(const soe_run* run);

void soe_run_destroy(soe_run* run);

#ifdef __cplusplus
}
#endif

#endif /* SOE_H */

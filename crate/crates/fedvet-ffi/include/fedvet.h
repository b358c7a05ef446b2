#ifndef FEDVET_H
#define FEDVET_H

/* This header is generated by cbindgen from crates/fedvet-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every FFI call.
 */
typedef enum FedvetStatus {
  FEDVET_STATUS_OK = 0,
  FEDVET_STATUS_NULL_POINTER = 1,
  FEDVET_STATUS_INVALID_ARGUMENT = 2,
  FEDVET_STATUS_RUNTIME_ERROR = 3,
  FEDVET_STATUS_BUFFER_TOO_SMALL = 4,
} FedvetStatus;

/**
 * Opaque experiment handle: a parsed configuration plus, after
 * `fedvet_experiment_run`, the collected reports.
 */
typedef struct FedvetExperiment FedvetExperiment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the underlying library, as a static NUL-terminated string.
 */
const char *fedvet_version(void);

/**
 * Copies the most recent error message for this thread into `buffer` and
 * returns the number of bytes the full message needs, including the NUL
 * terminator. A zero return means no error has been recorded.
 */
uintptr_t fedvet_last_error(char *buffer, uintptr_t capacity);

/**
 * Trust score of one opinion row against the consensus row: +10 per
 * matching position, -10 per mismatch, floored at 1. Both arrays hold
 * `len` entries of 0 or 1.
 */
enum FedvetStatus fedvet_trust_score(const uint8_t *consensus,
                                     const uint8_t *individual,
                                     uintptr_t len,
                                     uint32_t *out_score);

/**
 * Final per-validator influence for an `n` x `n` opinion matrix
 * (row-major, 0/1), its consensus row, and ζ. The accepted set is taken
 * from the consensus row. Writes `n` values summing to 1 into `out`.
 */
enum FedvetStatus fedvet_influence(const uint8_t *opinions,
                                   const uint8_t *consensus,
                                   uintptr_t n,
                                   uintptr_t zeta,
                                   double *out);

/**
 * Runs one seeded Snowball consensus instance over `n` initial opinions
 * (0/1). Writes the network decision, the polling rounds used, and
 * whether every node terminated.
 */
enum FedvetStatus fedvet_run_consensus(uintptr_t n,
                                       uintptr_t quorum_k,
                                       uint32_t alpha,
                                       uint32_t beta,
                                       uint32_t max_rounds,
                                       uint64_t seed,
                                       const uint8_t *opinions,
                                       uint8_t *out_decision,
                                       uint32_t *out_rounds,
                                       uint8_t *out_converged);

/**
 * Parses the same TOML document the CLI consumes and returns a handle,
 * or null (see `fedvet_last_error`) when parsing or validation fails.
 */
struct FedvetExperiment *fedvet_experiment_new(const char *config_toml);

/**
 * Runs every sweep point of the handle's configuration, collecting one
 * JSON line per round report and the full summary CSV.
 */
enum FedvetStatus fedvet_experiment_run(struct FedvetExperiment *handle);

/**
 * Number of round reports collected by the last run.
 */
uintptr_t fedvet_experiment_report_count(const struct FedvetExperiment *handle);

/**
 * Copies one round report as a NUL-terminated JSON line. `written`
 * receives the required buffer size, including the terminator.
 */
enum FedvetStatus fedvet_experiment_report_json(const struct FedvetExperiment *handle,
                                                uintptr_t index,
                                                char *buffer,
                                                uintptr_t capacity,
                                                uintptr_t *written);

/**
 * Copies the full summary CSV (comment line, header, data rows) as a
 * NUL-terminated string.
 */
enum FedvetStatus fedvet_experiment_summary_csv(const struct FedvetExperiment *handle,
                                                char *buffer,
                                                uintptr_t capacity,
                                                uintptr_t *written);

/**
 * Releases a handle created by `fedvet_experiment_new`. Null is allowed.
 */
void fedvet_experiment_free(struct FedvetExperiment *handle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEDVET_H */

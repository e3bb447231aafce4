#ifndef MLEACH_SIM_H
#define MLEACH_SIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_UTF8 = 2,
  MS_STATUS_CONFIG_NOT_FOUND = 3,
  MS_STATUS_CONFIG_IO = 4,
  MS_STATUS_CONFIG_PARSE = 5,
  MS_STATUS_CONFIG_INVALID = 6,
  MS_STATUS_UNKNOWN_PROTOCOL = 7,
  MS_STATUS_EXPORT = 8,
  MS_STATUS_OUT_OF_RANGE = 9,
  MS_STATUS_PANIC = 10,
} MsStatus;

// Values accepted by the `protocol` argument of [`ms_run`].
typedef enum MsProtocol {
  MS_PROTOCOL_MLEACH = 0,
  MS_PROTOCOL_DSDV = 1,
} MsProtocol;

// A scenario. Validation (and random base-station placement) happens at run time.
typedef struct MsConfig MsConfig;

// Metrics and audit counters of one finished run.
typedef struct MsRun MsRun;

// Headline numbers of a finished run. `first_death_s` is NaN when no node died.
typedef struct MsSummary {
  size_t node_count;
  double avg_energy_per_node_j;
  double max_energy_per_node_j;
  double steady_throughput_pps;
  double first_death_s;
  uint64_t packets_at_bs;
  uint64_t dropped_filtered;
  uint64_t dropped_unreachable;
  uint64_t dropped_dead;
  uint64_t data_packets_generated;
  uint64_t readings_generated;
  uint64_t audit_violations;
} MsSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer stays
// valid until the next `ms_*` call on the same thread.
const char *ms_last_error(void);

// Built-in default scenario. Never NULL.
struct MsConfig *ms_config_default(void);

// Parses `key = value` config text.
//
// # Safety
// `text` must be NUL-terminated; `out` must be writable.
enum MsStatus ms_config_parse(const char *text, struct MsConfig **out);

// Reads and parses a config file.
//
// # Safety
// `path` must be NUL-terminated; `out` must be writable.
enum MsStatus ms_config_load(const char *path, struct MsConfig **out);

// # Safety
// `cfg` must come from this library and not have been freed.
enum MsStatus ms_config_set_seed(struct MsConfig *cfg, uint64_t seed);

// Checks every invariant without running anything.
//
// # Safety
// `cfg` must come from this library and not have been freed.
enum MsStatus ms_config_validate(const struct MsConfig *cfg);

// # Safety
// `cfg` must be NULL or come from this library; it is invalid afterwards.
void ms_config_free(struct MsConfig *cfg);

// Validates `cfg` and runs one full simulation with `protocol` (an [`MsProtocol`]).
//
// # Safety
// `cfg` must come from this library; `out` must be writable.
enum MsStatus ms_run(const struct MsConfig *cfg, uint32_t protocol, struct MsRun **out);

// # Safety
// `run` must come from [`ms_run`]; `out` must be writable.
enum MsStatus ms_run_summary(const struct MsRun *run, struct MsSummary *out);

// Number of once-per-second energy samples; 0 for a NULL handle.
//
// # Safety
// `run` must be NULL or come from [`ms_run`].
size_t ms_run_energy_len(const struct MsRun *run);

// Sample `i` of the cumulative network energy series.
//
// # Safety
// `run` must come from [`ms_run`]; `t_s` and `total_j` must be writable.
enum MsStatus ms_run_energy_at(const struct MsRun *run, size_t i, double *t_s, double *total_j);

// Number of one-second throughput buckets; 0 for a NULL handle.
//
// # Safety
// `run` must be NULL or come from [`ms_run`].
size_t ms_run_throughput_len(const struct MsRun *run);

// Packets received by the base station during second `i`.
//
// # Safety
// `run` must come from [`ms_run`]; `packets` must be writable.
enum MsStatus ms_run_throughput_at(const struct MsRun *run, size_t i, uint64_t *packets);

// Writes the run's CSV files into `dir`, creating it if needed.
//
// # Safety
// `run` must come from [`ms_run`]; `dir` must be NUL-terminated.
enum MsStatus ms_run_export_csv(const struct MsRun *run, const char *dir);

// # Safety
// `run` must be NULL or come from [`ms_run`]; it is invalid afterwards.
void ms_run_free(struct MsRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MLEACH_SIM_H */

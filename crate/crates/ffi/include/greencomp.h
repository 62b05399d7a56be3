#ifndef GREENCOMP_H
#define GREENCOMP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GcStatus {
  GC_STATUS_OK = 0,
  GC_STATUS_NULL_POINTER = 1,
  GC_STATUS_INVALID_ARGUMENT = 2,
  GC_STATUS_PARSE = 3,
  GC_STATUS_IO = 4,
  GC_STATUS_OUT_OF_RANGE = 5,
  GC_STATUS_INTERNAL = 6,
} GcStatus;

// Scenario configuration handle.
typedef struct GcConfig GcConfig;

// Monte Carlo result handle.
typedef struct GcResult GcResult;

// Mean values for one simulated hour. Undefined ratios are NaN.
typedef struct GcHour {
  uint32_t hour;
  double throughput_bps;
  double grid_w;
  double solar_w;
  double demand_w;
  double conventional_w;
  double savings_pct;
  double savings_conv_pct;
  double ee_bits_per_j;
  double eci_j_per_bit;
} GcHour;

// Run-level totals with standard errors where they exist.
typedef struct GcTotals {
  double grid_wh;
  double grid_wh_stderr;
  double solar_wh;
  double demand_wh;
  double shared_wh;
  double line_loss_wh;
  double throughput_bps;
  double savings_pct;
  double ee_bits_per_j;
  double ee_bits_per_j_stderr;
  double eci_j_per_bit;
  uint32_t undefined_ee_hours;
} GcTotals;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (always NUL
// terminated when `len > 0`) and returns the full message length.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t gc_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *gc_version(void);

// # Safety
// `out` must be a valid pointer to a handle slot.
enum GcStatus gc_config_default(struct GcConfig **out);

// Loads a `key = value` scenario file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid handle slot.
enum GcStatus gc_config_load(const char *path, struct GcConfig **out);

// Parses scenario text; relative profile paths resolve against the
// working directory.
//
// # Safety
// `config_text` must be a NUL-terminated string and `out` a valid handle slot.
enum GcStatus gc_config_parse(const char *config_text, struct GcConfig **out);

// Sets one configuration key using the scenario file syntax. The handle
// is left unchanged when the new value is rejected.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
enum GcStatus gc_config_set(struct GcConfig *cfg, const char *key, const char *value);

// Writes the configuration as scenario text into `buf` (NUL terminated
// when `len > 0`) and returns the full text length.
//
// # Safety
// `cfg` must be a live handle; `buf` null or `len` writable bytes.
size_t gc_config_to_string(const struct GcConfig *cfg, char *buf, size_t len);

// # Safety
// `cfg` must be null or a handle from this library not yet freed.
void gc_config_free(struct GcConfig *cfg);

// Runs the Monte Carlo simulation for `cfg`.
//
// # Safety
// `cfg` must be a live handle and `out` a valid handle slot.
enum GcStatus gc_run(const struct GcConfig *cfg, struct GcResult **out);

// Number of simulated hours in `res`, or 0 for a null handle.
//
// # Safety
// `res` must be null or a live handle.
size_t gc_result_hours(const struct GcResult *res);

// # Safety
// `res` must be a live handle and `out` valid for writes.
enum GcStatus gc_result_hour(const struct GcResult *res, size_t index, struct GcHour *out);

// # Safety
// `res` must be a live handle and `out` valid for writes.
enum GcStatus gc_result_totals(const struct GcResult *res, struct GcTotals *out);

// # Safety
// `res` must be null or a handle from this library not yet freed.
void gc_result_free(struct GcResult *res);

// Base station input power in watts at `load` in [0, 1] with default
// hardware parameters; a load of 0 means the station sleeps.
//
// # Safety
// `out_w` must be valid for writes.
enum GcStatus gc_bs_input_power(double load, double *out_w);

// Path loss in dB at `distance_m` with default channel parameters.
//
// # Safety
// `out_db` must be valid for writes.
enum GcStatus gc_path_loss_db(double distance_m, double *out_db);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GREENCOMP_H */

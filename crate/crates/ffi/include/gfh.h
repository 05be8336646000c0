#ifndef GFH_H
#define GFH_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the values match the exit codes of the `gfh` binary.
 */
typedef enum GfhStatus {
  GFH_STATUS_OK = 0,
  GFH_STATUS_VERDICT_FAILED = 1,
  GFH_STATUS_INVALID_INPUT = 2,
  GFH_STATUS_THEOREM_ALARM = 3,
  GFH_STATUS_IO = 4,
  GFH_STATUS_NUMERICAL = 5,
  GFH_STATUS_NULL_POINTER = 6,
  GFH_STATUS_PANIC = 7,
} GfhStatus;

/**
 * Opaque handle on one engine run.
 */
typedef struct GfhRun GfhRun;

/**
 * Opaque scene handle.
 */
typedef struct GfhScene GfhScene;

typedef struct GfhStatistics {
  /**
   * Number of finite orbit representatives.
   */
  size_t finite;
  double beta_max;
  double beta_tot;
  /**
   * Homology count `|q| + 2K`.
   */
  uint64_t homology_count;
  /**
   * 1 if the pairing was resolved uniquely.
   */
  uint8_t exact;
} GfhStatistics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *gfh_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gfh_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void gfh_string_free(char *s);

/**
 * Parses and validates a TOML scene.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum GfhStatus gfh_scene_parse(const char *text, struct GfhScene **out);

/**
 * Loads a scene file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum GfhStatus gfh_scene_load(const char *path, struct GfhScene **out);

/**
 * Serializes a scene back to TOML.
 *
 * # Safety
 * `scene` must be a live handle; `out` must be writable.
 */
enum GfhStatus gfh_scene_to_toml(const struct GfhScene *scene, char **out);

/**
 * # Safety
 * `scene` must be null or a handle from this library not yet freed.
 */
void gfh_scene_free(struct GfhScene *scene);

/**
 * Runs the engine on a scene over `field` (`"q"`, `"f5"`, ...), or over
 * the scene's first field when `field` is null.
 *
 * # Safety
 * `scene` must be a live handle; `field` null or NUL-terminated; `out`
 * writable.
 */
enum GfhStatus gfh_run(const struct GfhScene *scene, const char *field, struct GfhRun **out);

/**
 * # Safety
 * `run` must be null or a handle from this library not yet freed.
 */
void gfh_run_free(struct GfhRun *run);

/**
 * # Safety
 * `run` must be a live handle; `out` writable.
 */
enum GfhStatus gfh_run_statistics(const struct GfhRun *run, struct GfhStatistics *out);

/**
 * Spectral invariant `c_k` for any integer k; needs an exact resolution.
 *
 * # Safety
 * `run` must be a live handle; `out` writable.
 */
enum GfhStatus gfh_run_spectral_invariant(const struct GfhRun *run, int64_t k, double *out);

/**
 * Barcode document as JSON.
 *
 * # Safety
 * `run` must be a live handle; `out` writable.
 */
enum GfhStatus gfh_run_barcode_json(const struct GfhRun *run, char **out);

/**
 * Barcode drawn over actions `[lo, hi]` as SVG.
 *
 * # Safety
 * `run` must be a live handle; `out` writable.
 */
enum GfhStatus gfh_run_barcode_svg(const struct GfhRun *run, double lo, double hi, char **out);

/**
 * Verdict report as JSON for a comma-separated list of checks (null for
 * the defaults). Returns `VerdictFailed` with the report still written when
 * a check fails.
 *
 * # Safety
 * `scene` must be a live handle; `checks` null or NUL-terminated; `out`
 * writable.
 */
enum GfhStatus gfh_verify(const struct GfhScene *scene,
                          const char *checks,
                          uint64_t seed,
                          char **out);

/**
 * Replays a saved barcode (bare or as a document) through the checks that
 * need no scene; a bar of length at least 1 raises `TheoremAlarm`.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` writable.
 */
enum GfhStatus gfh_verify_barcode(const char *json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GFH_H */

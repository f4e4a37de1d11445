/* C interface to the forge workload synthesis library. */

#ifndef FORGE_H
#define FORGE_H

/* Generated by cbindgen from the forge-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Anything but Ok leaves the out
 * parameters untouched; forge_last_error() describes the failure.
 */
typedef enum ForgeStatus {
  ForgeStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  ForgeStatus_NullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  ForgeStatus_InvalidUtf8 = 2,
  /**
   * Input value or structure rejected by validation.
   */
  ForgeStatus_InvalidArgument = 3,
  /**
   * Named algorithm, vertex, or edge does not exist.
   */
  ForgeStatus_NotFound = 4,
  /**
   * The request cannot be satisfied (infeasible spec or target).
   */
  ForgeStatus_Infeasible = 5,
  /**
   * Malformed JSON or program text.
   */
  ForgeStatus_ParseError = 6,
  /**
   * Underlying file or stream error.
   */
  ForgeStatus_IoError = 7,
  /**
   * Internal panic was caught at the boundary.
   */
  ForgeStatus_Panic = 8,
} ForgeStatus;

/**
 * Algorithm registry handle.
 */
typedef struct ForgeBank ForgeBank;

/**
 * Workload graph handle.
 */
typedef struct ForgeGraph ForgeGraph;

/**
 * Complexity profile handle.
 */
typedef struct ForgeProfile ForgeProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; never freed.
 */
const char *forge_version(void);

/**
 * Message of the most recent failure on this thread, or an empty
 * string. Owned by the library; valid until the next failing call on
 * the same thread. Do not free.
 */
const char *forge_last_error(void);

/**
 * Frees a string returned through a `char **` out parameter.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library, or null.
 */
void forge_string_free(char *s);

/**
 * Creates the built-in algorithm bank. Free with forge_bank_free.
 */
struct ForgeBank *forge_bank_builtin(void);

/**
 * Parses a bank from its JSON form. On Ok, `*out` owns the bank.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ForgeStatus forge_bank_from_json(const char *json,
                                      struct ForgeBank **out);

/**
 * # Safety
 * `bank` must come from this library, or be null.
 */
void forge_bank_free(struct ForgeBank *bank);

/**
 * Parses a graph from its JSON form. On Ok, `*out` owns the graph.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ForgeStatus forge_graph_from_json(const char *json,
                                       struct ForgeGraph **out);

/**
 * Serializes a graph to JSON. Free `*out` with forge_string_free.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum ForgeStatus forge_graph_to_json(const struct ForgeGraph *graph,
                                     char **out);

/**
 * # Safety
 * `graph` must come from this library, or be null.
 */
void forge_graph_free(struct ForgeGraph *graph);

/**
 * Samples a workload graph from a JSON spec using `bank`.
 *
 * # Safety
 * `spec_json` must be NUL-terminated; `bank` live; `out` writable.
 */
enum ForgeStatus forge_generate(const char *spec_json,
                                const struct ForgeBank *bank,
                                struct ForgeGraph **out);

/**
 * Parses a program listing into a workload graph.
 *
 * # Safety
 * `text` must be NUL-terminated; `bank` live; `out` writable.
 */
enum ForgeStatus forge_scan_program(const char *text,
                                    const struct ForgeBank *bank,
                                    struct ForgeGraph **out);

/**
 * Computes the computation table and communication matrix of a graph.
 *
 * # Safety
 * `graph` and `bank` must be live handles; `out` writable.
 */
enum ForgeStatus forge_profile(const struct ForgeGraph *graph,
                               const struct ForgeBank *bank,
                               struct ForgeProfile **out);

/**
 * As forge_profile, additionally carrying per-unit level statistics.
 *
 * # Safety
 * `graph` and `bank` must be live handles; `out` writable.
 */
enum ForgeStatus forge_extract_profile(const struct ForgeGraph *graph,
                                       const struct ForgeBank *bank,
                                       struct ForgeProfile **out);

/**
 * Serializes a profile to JSON. Free `*out` with forge_string_free.
 *
 * # Safety
 * `profile` must be a live handle; `out` writable.
 */
enum ForgeStatus forge_profile_to_json(const struct ForgeProfile *profile,
                                       char **out);

/**
 * Parses a profile from its JSON form. On Ok, `*out` owns the profile.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` writable.
 */
enum ForgeStatus forge_profile_from_json(const char *json,
                                         struct ForgeProfile **out);

/**
 * # Safety
 * `profile` must come from this library, or be null.
 */
void forge_profile_free(struct ForgeProfile *profile);

/**
 * Synthesizes a structurally fresh graph whose extracted profile hits
 * the target's complexity rows and matrix cells within `tol`.
 *
 * # Safety
 * `profile` and `bank` must be live handles; `out` writable.
 */
enum ForgeStatus forge_clone(const struct ForgeProfile *profile,
                             const struct ForgeBank *bank,
                             uint64_t seed,
                             double tol,
                             struct ForgeGraph **out);

/**
 * Total complexity (external + internal) per vertex, in the graph's
 * canonical vertex order. On Ok, `*out_values` holds `*out_len`
 * doubles; free with forge_f64_free.
 *
 * # Safety
 * `graph` and `bank` must be live handles; out pointers writable.
 */
enum ForgeStatus forge_complexity_vector(const struct ForgeGraph *graph,
                                         const struct ForgeBank *bank,
                                         double **out_values,
                                         uintptr_t *out_len);

/**
 * Frees an array returned through a `double **` out parameter.
 *
 * # Safety
 * `ptr`/`len` must match a previous forge_complexity_vector result.
 */
void forge_f64_free(double *ptr,
                    uintptr_t len);

/**
 * Runs the co-design chain (core types, inter-core traffic, dense
 * partitions, mesh sizes) and returns the plan as JSON. Pass `k < 0`
 * to let the elbow pick the core-type count within `kmax` (clamped to
 * the vertex count). Free `*out_json` with forge_string_free.
 *
 * # Safety
 * `graph` must be a live handle; `out_json` writable.
 */
enum ForgeStatus forge_codesign(const struct ForgeGraph *graph,
                                uintptr_t kmax,
                                int64_t k,
                                double density,
                                uint64_t switch_bytes,
                                uint64_t seed,
                                char **out_json);

/**
 * Runs the loop model of bank algorithm `algo` at problem size `size`
 * and returns its address trace. On Ok, `*out_addrs` holds `*out_len`
 * word addresses; free with forge_u64_free.
 *
 * # Safety
 * `bank` must be a live handle; `algo` NUL-terminated; out pointers
 * writable.
 */
enum ForgeStatus forge_trace(const struct ForgeBank *bank,
                             const char *algo,
                             uint64_t size,
                             uint64_t seed,
                             uint64_t **out_addrs,
                             uintptr_t *out_len);

/**
 * Frees an array returned through a `uint64_t **` out parameter.
 *
 * # Safety
 * `ptr`/`len` must match a previous forge_trace result.
 */
void forge_u64_free(uint64_t *ptr,
                    uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FORGE_H */

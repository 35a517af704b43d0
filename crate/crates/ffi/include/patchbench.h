#ifndef PATCHBENCH_H
#define PATCHBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PbStatus {
  PB_STATUS_OK = 0,
  PB_STATUS_NULL_ARGUMENT = 1,
  PB_STATUS_INVALID_UTF8 = 2,
  PB_STATUS_PARSE_ERROR = 3,
  PB_STATUS_NOT_WELL_FORMED = 4,
  PB_STATUS_SCRIPT_ERROR = 5,
  PB_STATUS_RENDER_ERROR = 6,
  PB_STATUS_DOMAIN_ERROR = 7,
  PB_STATUS_UNKNOWN_BENCHMARK = 8,
  PB_STATUS_PANIC = 9,
} PbStatus;

/**
 * Rendered mono audio.
 */
typedef struct PbBuffer PbBuffer;

/**
 * A patch graph.
 */
typedef struct PbGraph PbGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a `.maxpat` document.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum PbStatus pb_graph_parse_maxpat(const uint8_t *data, size_t len, struct PbGraph **out);

/**
 * Parses a `wavir/1` document.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum PbStatus pb_graph_parse_wavir(const uint8_t *data, size_t len, struct PbGraph **out);

/**
 * Runs a PatchScript program with the given seed and returns the graph it
 * emits.
 *
 * # Safety
 * `source` must be a nul-terminated string and `out` must be writable.
 */
enum PbStatus pb_graph_from_script(const char *source, uint64_t seed, struct PbGraph **out);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `graph` must come from this library and not be used afterwards.
 */
void pb_graph_free(struct PbGraph *graph);

/**
 * Number of nodes, or 0 for null.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t pb_graph_node_count(const struct PbGraph *graph);

/**
 * Number of edges, or 0 for null.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t pb_graph_edge_count(const struct PbGraph *graph);

/**
 * Whether the graph passes validation. False for null. When it does not,
 * the violations are available from [`pb_last_error_message`].
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
bool pb_graph_is_well_formed(const struct PbGraph *graph);

/**
 * Serializes a well-formed graph as `.maxpat` JSON.
 *
 * # Safety
 * `graph` must be a live handle and `out` writable. Free the result with
 * [`pb_string_free`].
 */
enum PbStatus pb_graph_emit_maxpat(const struct PbGraph *graph, char **out);

/**
 * Serializes a well-formed graph as `wavir/1` JSON.
 *
 * # Safety
 * As for [`pb_graph_emit_maxpat`].
 */
enum PbStatus pb_graph_emit_wavir(const struct PbGraph *graph, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void pb_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *pb_last_error_message(void);

/**
 * Unbiased pass@k for `c` correct samples out of `n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PbStatus pb_pass_at_k(uint64_t n, uint64_t c, uint64_t k, double *out);

/**
 * One-sided Wilcoxon signed-rank test of `xs > ys` over `len` pairs.
 * `exact` may be null.
 *
 * # Safety
 * `xs` and `ys` must each hold `len` values; the out pointers must be
 * writable.
 */
enum PbStatus pb_wilcoxon_one_sided(const double *xs,
                                    const double *ys,
                                    size_t len,
                                    double *w_plus,
                                    double *p_value,
                                    bool *exact);

/**
 * Renders a well-formed graph to mono audio. `noise_seed` fixes the
 * output of noise sources.
 *
 * # Safety
 * `graph` must be a live handle and `out` writable.
 */
enum PbStatus pb_render(const struct PbGraph *graph,
                        double duration,
                        uint32_t sample_rate,
                        uint64_t noise_seed,
                        struct PbBuffer **out);

/**
 * Releases a buffer. Null is ignored.
 *
 * # Safety
 * `buffer` must come from this library and not be used afterwards.
 */
void pb_buffer_free(struct PbBuffer *buffer);

/**
 * Number of samples, or 0 for null.
 *
 * # Safety
 * `buffer` must be null or a live handle.
 */
size_t pb_buffer_len(const struct PbBuffer *buffer);

/**
 * Sample rate in Hz, or 0 for null.
 *
 * # Safety
 * `buffer` must be null or a live handle.
 */
uint32_t pb_buffer_sample_rate(const struct PbBuffer *buffer);

/**
 * Pointer to the samples, valid while the buffer lives. Null for null.
 *
 * # Safety
 * `buffer` must be null or a live handle.
 */
const double *pb_buffer_data(const struct PbBuffer *buffer);

/**
 * Judges a render against a benchmark's oracle and writes the verdict as
 * JSON. `benchmark` is an id such as `"am"` or a display name.
 *
 * # Safety
 * `buffer` and `graph` must be live handles, `benchmark` a nul-terminated
 * string and `out` writable. Free the result with [`pb_string_free`].
 */
enum PbStatus pb_judge(const char *benchmark,
                       const struct PbBuffer *buffer,
                       const struct PbGraph *graph,
                       char **out);

/**
 * Library version as a static string.
 */
const char *pb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PATCHBENCH_H */

#ifndef NCSYNC_H
#define NCSYNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define NCS_SCHEME_U_DBS 0

#define NCS_SCHEME_C_DBS 1

#define NCS_SCHEME_C_DBS_NS 2

#define NCS_LOSS_PER_BROADCAST 0

#define NCS_LOSS_PER_RECEIVER 1

typedef enum NcsStatus {
  NCS_STATUS_OK = 0,
  NCS_STATUS_NULL_POINTER = 1,
  NCS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Rejection sampling gave up before finding a connected topology.
   */
  NCS_STATUS_REJECTED = 3,
  NCS_STATUS_DISCONNECTED = 4,
  NCS_STATUS_PARSE_ERROR = 5,
  NCS_STATUS_INTERNAL = 6,
  NCS_STATUS_PANIC = 7,
} NcsStatus;

/**
 * Opaque result of one simulation run.
 */
typedef struct NcsSimResult NcsSimResult;

/**
 * Opaque network topology.
 */
typedef struct NcsTopology NcsTopology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a topology on `n` nodes from `edge_count` pairs laid out as
 * `edges[2*i], edges[2*i+1]`. Duplicate edges are merged.
 *
 * # Safety
 * `edges` must point to `2 * edge_count` readable values (or be null when
 * `edge_count` is 0). `out` must be writable.
 */
enum NcsStatus ncs_topology_from_edges(size_t n,
                                       const size_t *edges,
                                       size_t edge_count,
                                       struct NcsTopology **out);

/**
 * Samples a connected random geometric graph: `n` nodes uniform in the unit
 * square, linked within `radius`, redrawn until connected. Returns
 * `NCS_STATUS_REJECTED` after `max_rejections` disconnected draws.
 *
 * # Safety
 * `out` must be writable.
 */
enum NcsStatus ncs_topology_generate(size_t n,
                                     double radius,
                                     uint64_t seed,
                                     uint32_t max_rejections,
                                     struct NcsTopology **out);

/**
 * Parses a topology from its JSON form `{"n":..,"edges":[[u,v],..]}`.
 *
 * # Safety
 * `json` must be a nul-terminated string. `out` must be writable.
 */
enum NcsStatus ncs_topology_from_json(const char *json, struct NcsTopology **out);

/**
 * Serializes a topology to JSON. Free the string with [`ncs_string_free`].
 *
 * # Safety
 * `t` must be a live handle. `out` must be writable.
 */
enum NcsStatus ncs_topology_to_json(const struct NcsTopology *t, char **out);

/**
 * # Safety
 * `t` must be null or a handle not yet freed.
 */
void ncs_topology_free(struct NcsTopology *t);

/**
 * Node count, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t ncs_topology_node_count(const struct NcsTopology *t);

/**
 * Undirected edge count, or 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t ncs_topology_edge_count(const struct NcsTopology *t);

/**
 * # Safety
 * `t` must be null or a live handle.
 */
bool ncs_topology_is_connected(const struct NcsTopology *t);

/**
 * Mean node degree, or NaN for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
double ncs_topology_average_degree(const struct NcsTopology *t);

/**
 * Runs one synchronization. `scheme` is an `NCS_SCHEME_*` value and `loss`
 * an `NCS_LOSS_*` value. Payloads of `payload_len` bytes are drawn from
 * `seed`. Zero for `payload_len` or `max_slots` selects the default. The
 * result for a given seed matches the `ncsync simulate` command.
 *
 * # Safety
 * `t` must be a live handle. `out` must be writable.
 */
enum NcsStatus ncs_simulate(const struct NcsTopology *t,
                            uint32_t scheme,
                            double pe,
                            uint32_t loss,
                            uint64_t seed,
                            size_t payload_len,
                            uint32_t max_slots,
                            struct NcsSimResult **out);

/**
 * Slots used, or 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
uint32_t ncs_result_slots(const struct NcsSimResult *r);

/**
 * # Safety
 * `r` must be null or a live handle.
 */
bool ncs_result_converged(const struct NcsSimResult *r);

/**
 * Elementary operation count, or 0 for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
uint64_t ncs_result_op_count(const struct NcsSimResult *r);

/**
 * Cyclic turns skipped because the node had nothing useful to send.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
uint32_t ncs_result_skipped_turns(const struct NcsSimResult *r);

/**
 * Per-slot trace as JSON lines. Free the string with [`ncs_string_free`].
 *
 * # Safety
 * `r` must be a live handle. `out` must be writable.
 */
enum NcsStatus ncs_result_trace_json(const struct NcsSimResult *r, char **out);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void ncs_result_free(struct NcsSimResult *r);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void ncs_string_free(char *s);

/**
 * Message for the last failed call on this thread, empty after a success.
 * Valid until the next library call on the same thread.
 */
const char *ncs_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *ncs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCSYNC_H */

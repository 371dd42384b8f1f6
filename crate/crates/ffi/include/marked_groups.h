#ifndef MARKED_GROUPS_H
#define MARKED_GROUPS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum MgStatus {
  MG_STATUS_OK = 0,
  MG_STATUS_NULL_POINTER = 1,
  MG_STATUS_INVALID_UTF8 = 2,
  MG_STATUS_PARSE = 3,
  MG_STATUS_LIBRARY = 4,
  MG_STATUS_PANIC = 5,
} MgStatus;

/**
 * Word-problem answer for `mg_group_decide`.
 */
typedef enum MgDecision {
  MG_DECISION_IDENTITY = 0,
  MG_DECISION_NON_IDENTITY = 1,
  MG_DECISION_UNKNOWN = 2,
} MgDecision;

/**
 * A rooted labeled Cayley ball.
 */
typedef struct MgBall MgBall;

/**
 * A marked group.
 */
typedef struct MgGroup MgGroup;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a successful call.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *mg_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void mg_string_free(char *s);

/**
 * Builds a group from a selector such as `hall:finite:{1,3}`, `free:2` or `bowditch:finite:{1}:4`.
 *
 * # Safety
 * `selector` must be a NUL-terminated string; `out` must be writable.
 */
enum MgStatus mg_group_from_selector(const char *selector, struct MgGroup **out);

/**
 * Releases a group. Null is ignored.
 *
 * # Safety
 * `g` must come from `mg_group_from_selector` and not have been freed.
 */
void mg_group_free(struct MgGroup *g);

/**
 * # Safety
 * `g` must be a live group handle; `out` must be writable.
 */
enum MgStatus mg_group_rank(const struct MgGroup *g, size_t *out);

/**
 * Decides whether `word` (letters `x<i>` / `X<i>`) is the identity.
 *
 * # Safety
 * `g` must be a live group handle, `word` NUL-terminated, `out` writable.
 */
enum MgStatus mg_group_decide(const struct MgGroup *g, const char *word, enum MgDecision *out);

/**
 * Builds the ball of radius `radius`. A `word_budget` of 0 selects the default.
 *
 * # Safety
 * `g` must be a live group handle; `out` must be writable.
 */
enum MgStatus mg_ball_build(const struct MgGroup *g,
                            size_t radius,
                            uint64_t word_budget,
                            struct MgBall **out);

/**
 * Releases a ball. Null is ignored.
 *
 * # Safety
 * `b` must come from `mg_ball_build` and not have been freed.
 */
void mg_ball_free(struct MgBall *b);

/**
 * # Safety
 * `b` must be a live ball handle; `out` must be writable.
 */
enum MgStatus mg_ball_vertex_count(const struct MgBall *b, size_t *out);

/**
 * Number of labeled directed edges, one per vertex and letter with both ends in the ball.
 *
 * # Safety
 * `b` must be a live ball handle; `out` must be writable.
 */
enum MgStatus mg_ball_edge_count(const struct MgBall *b, size_t *out);

/**
 * SHA-256 of the canonical ball signature, as hex.
 *
 * # Safety
 * `b` must be a live ball handle; `out` must be writable.
 */
enum MgStatus mg_ball_fingerprint(const struct MgBall *b, char **out);

/**
 * # Safety
 * `b` must be a live ball handle; `out` must be writable.
 */
enum MgStatus mg_ball_to_json(const struct MgBall *b, char **out);

/**
 * # Safety
 * `a`, `b` must be live group handles; `out` must be writable.
 */
enum MgStatus mg_locally_isomorphic(const struct MgGroup *a,
                                    const struct MgGroup *b,
                                    size_t radius,
                                    uint64_t word_budget,
                                    bool *out);

/**
 * Largest `r <= max_radius` with isomorphic balls; `max_radius` when they all agree.
 *
 * # Safety
 * `a`, `b` must be live group handles; `out` must be writable.
 */
enum MgStatus mg_agreement_radius(const struct MgGroup *a,
                                  const struct MgGroup *b,
                                  size_t max_radius,
                                  uint64_t word_budget,
                                  int64_t *out);

/**
 * Whether both groups kill the same words of length at most `max_len`.
 *
 * # Safety
 * `a`, `b` must be live group handles; `out` must be writable.
 */
enum MgStatus mg_kernel_agreement(const struct MgGroup *a,
                                  const struct MgGroup *b,
                                  size_t max_len,
                                  bool *out);

/**
 * Checks `C'(num/den)` for a presentation in the text format (`rank <n>` line, then
 * one relator per line). Writes a JSON report.
 *
 * # Safety
 * `presentation` must be NUL-terminated; `out` must be writable.
 */
enum MgStatus mg_check_sc(const char *presentation,
                          uint64_t lambda_num,
                          uint64_t lambda_den,
                          char **out);

/**
 * Searches for a `(C, M)` witnessing pair. Writes the outcome as JSON, with a
 * `status` of `Found`, `NonExistent` or `BudgetExceeded`.
 *
 * # Safety
 * `a`, `b` must be live group handles; `out` must be writable.
 */
enum MgStatus mg_qi_search(const struct MgGroup *a,
                           const struct MgGroup *b,
                           uint64_t c,
                           size_t m,
                           uint64_t node_budget,
                           char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARKED_GROUPS_H */

#ifndef UST3D_H
#define UST3D_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Ust3dStatus {
  UST3D_STATUS_OK = 0,
  UST3D_STATUS_NULL_POINTER = 1,
  UST3D_STATUS_INVALID_INPUT = 2,
  UST3D_STATUS_VERTEX_ABSENT = 3,
  UST3D_STATUS_CLIPPED_BALL = 4,
  UST3D_STATUS_THROUGH_BOUNDARY = 5,
  UST3D_STATUS_STEP_CAP_REACHED = 6,
  UST3D_STATUS_NUMERICAL = 7,
  UST3D_STATUS_PARSE = 8,
  UST3D_STATUS_IO = 9,
  UST3D_STATUS_PANIC = 10,
} Ust3dStatus;

/**
 * Opaque tree handle.
 */
typedef struct Ust3dTree Ust3dTree;

typedef struct Ust3dPoint {
  int64_t x;
  int64_t y;
  int64_t z;
} Ust3dPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next `ust3d_*` call on the same thread.
 */
const char *ust3d_last_error_message(void);

/**
 * Static, nul-terminated library version.
 */
const char *ust3d_version(void);

/**
 * Samples the wired UST on the window of radius `radius` with truncation
 * factor `truncation`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum Ust3dStatus ust3d_sample_window(uint64_t radius,
                                     uint64_t truncation,
                                     uint64_t seed,
                                     struct Ust3dTree **out);

/**
 * Samples just enough of the window UST to know `B_U(0, r)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum Ust3dStatus ust3d_sample_ball(uint64_t r,
                                   uint64_t radius,
                                   uint64_t truncation,
                                   uint64_t seed,
                                   struct Ust3dTree **out);

/**
 * # Safety
 * `path` must be a nul-terminated string and `out` valid for writes.
 */
enum Ust3dStatus ust3d_tree_load(const char *path, struct Ust3dTree **out);

/**
 * # Safety
 * `tree` must come from this library; `path` must be nul-terminated.
 */
enum Ust3dStatus ust3d_tree_save(const struct Ust3dTree *tree, const char *path);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `tree` must come from this library and not be used afterwards.
 */
void ust3d_tree_free(struct Ust3dTree *tree);

/**
 * Number of lattice vertices, excluding the wired boundary node.
 *
 * # Safety
 * `tree` must come from this library and `out` be valid for writes.
 */
enum Ust3dStatus ust3d_tree_vertex_count(const struct Ust3dTree *tree, size_t *out);

/**
 * `|B_U(center, r)|`; `clipped` reports whether the ball reaches the
 * unexplored part of the tree, in which case the volume is a lower bound.
 *
 * # Safety
 * `tree` must come from this library; `volume` and `clipped` valid for writes.
 */
enum Ust3dStatus ust3d_tree_ball_volume(const struct Ust3dTree *tree,
                                        struct Ust3dPoint center,
                                        uint64_t r,
                                        size_t *volume,
                                        bool *clipped);

/**
 * Intrinsic distance `d_U(x, y)`.
 *
 * # Safety
 * `tree` must come from this library and `out` be valid for writes.
 */
enum Ust3dStatus ust3d_tree_distance(const struct Ust3dTree *tree,
                                     struct Ust3dPoint x,
                                     struct Ust3dPoint y,
                                     uint64_t *out);

/**
 * Exact return heat kernel `p_n(x, x)`.
 *
 * # Safety
 * `tree` must come from this library and `out` be valid for writes.
 */
enum Ust3dStatus ust3d_heat_kernel_exact(const struct Ust3dTree *tree,
                                         struct Ust3dPoint x,
                                         uint64_t n,
                                         double *out);

/**
 * Length of the loop erasure of a walk from the origin stopped on
 * leaving the Euclidean ball of radius `n`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum Ust3dStatus ust3d_lerw_length(uint64_t n, uint64_t seed, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UST3D_H */

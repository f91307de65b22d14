#ifndef PREPERLAB_H
#define PREPERLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_UTF8 = 2,
  PL_STATUS_PARSE = 3,
  PL_STATUS_PRECONDITION = 4,
  PL_STATUS_OUT_OF_RANGE = 5,
  PL_STATUS_COMPUTATION = 6,
  PL_STATUS_PANIC = 7,
} PlStatus;

// Opaque handle for a map `z^d + c`.
typedef struct PlMap PlMap;

// Opaque handle for the preperiodic portrait of a map.
typedef struct PlPortrait PlPortrait;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next call into this library on the same thread.
const char *pl_last_error(void);

// # Safety
// `s` must be NULL or a string returned by this library and not yet freed.
void pl_string_free(char *s);

// Creates the map `z^d + c` with `c` given as `"a/b"`.
//
// # Safety
// `c` must be a NUL-terminated string and `out` a valid pointer.
enum PlStatus pl_map_new(uint32_t d, const char *c, struct PlMap **out);

// # Safety
// `map` must be NULL or a handle from [`pl_map_new`] not yet freed.
void pl_map_free(struct PlMap *map);

// Naive logarithmic height `h(c)`.
//
// # Safety
// `map` must be a live handle and `out` a valid pointer.
enum PlStatus pl_map_height(const struct PlMap *map, double *out);

// Computes every rational preperiodic point of `map`.
//
// # Safety
// `map` must be a live handle and `out` a valid pointer.
enum PlStatus pl_portrait_compute(const struct PlMap *map, struct PlPortrait **out);

// # Safety
// `portrait` must be NULL or a handle from [`pl_portrait_compute`] not yet freed.
void pl_portrait_free(struct PlPortrait *portrait);

// Number of points in the portrait; 0 for a NULL handle.
//
// # Safety
// `portrait` must be NULL or a live handle.
uintptr_t pl_portrait_len(const struct PlPortrait *portrait);

// Point `i` as `"a/b"` with its tail length and period. The string is owned
// by the portrait and lives as long as the handle.
//
// # Safety
// `portrait` must be a live handle; output pointers must be valid.
enum PlStatus pl_portrait_point(const struct PlPortrait *portrait,
                                uintptr_t i,
                                const char **z,
                                uint32_t *tail,
                                uint32_t *period);

// Portrait as a JSON document; free with [`pl_string_free`].
//
// # Safety
// `portrait` must be a live handle and `out` a valid pointer.
enum PlStatus pl_portrait_json(const struct PlPortrait *portrait, char **out);

// Disk-tree geometry report at the bad prime `p ∤ d` as JSON.
//
// # Safety
// `portrait` must be a live handle and `out` a valid pointer.
enum PlStatus pl_geometry_json(const struct PlPortrait *portrait,
                               uint64_t p,
                               double eps,
                               uint32_t max_level,
                               char **out);

// Ranked hexagons (`kind = 0`) or periodic abc triples (`kind = 1`) as JSON.
//
// # Safety
// `map` and `portrait` must be live handles for the same map and `out` a
// valid pointer.
enum PlStatus pl_tuple_scan_json(const struct PlMap *map,
                                 const struct PlPortrait *portrait,
                                 uint32_t kind,
                                 uint64_t budget,
                                 uint64_t seed,
                                 char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PREPERLAB_H */

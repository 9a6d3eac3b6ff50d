#ifndef EIGENRAY_H
#define EIGENRAY_H

/* Generated by cbindgen from the eigenray-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define ER_OK 0

#define ER_INVALID_ARGUMENT 1

#define ER_PARSE_ERROR 2

#define ER_PRECONDITION_FAILED 3

#define ER_IO_ERROR 4

/**
 * Opaque diagram handle; only ever seen behind a pointer.
 */
typedef struct ErDiagram ErDiagram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the message from the most recent failing call on this thread, or
 * an empty string after a success.  Release with [`er_string_free`].
 *
 * # Safety
 * The returned pointer is owned by the caller.
 */
char *er_last_error(void);

/**
 * Release a string returned by this library.  `s` may be null.
 *
 * # Safety
 * `s` must have come from this library and not have been freed before.
 */
void er_string_free(char *s);

/**
 * Release a diagram handle.  `d` may be null.
 *
 * # Safety
 * `d` must have come from this library and not have been freed before.
 */
void er_diagram_free(struct ErDiagram *d);

/**
 * Parse a diagram from canonical JSON into a fresh handle.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be valid for writes.
 */
int32_t er_diagram_parse_json(const char *json, struct ErDiagram **out);

/**
 * The standard two-node example diagram.
 *
 * # Safety
 * `out` must be valid for writes.
 */
int32_t er_diagram_five_charts(struct ErDiagram **out);

/**
 * Serialize a diagram to canonical pretty-printed JSON.
 *
 * # Safety
 * `d` must be a live handle; `out` must be valid for writes.
 */
int32_t er_diagram_to_json(const struct ErDiagram *d, char **out);

/**
 * Number of multiset elements (nodes) in the diagram.
 *
 * # Safety
 * `d` must be a live handle; `out` must be valid for writes.
 */
int32_t er_diagram_node_count(const struct ErDiagram *d, uintptr_t *out);

/**
 * Remove the node at `(x, y)`, producing a new diagram handle.
 *
 * # Safety
 * Pointer arguments as in [`er_diagram_parse_json`].
 */
int32_t er_diagram_node_removal(const struct ErDiagram *d,
                                const char *x,
                                const char *y,
                                struct ErDiagram **out);

/**
 * Slide the node at `(x, y)` to `(to_x, to_y)` along its eigenline.
 *
 * # Safety
 * Pointer arguments as in [`er_diagram_parse_json`].
 */
int32_t er_diagram_nodal_slide(const struct ErDiagram *d,
                               const char *x,
                               const char *y,
                               const char *to_x,
                               const char *to_y,
                               struct ErDiagram **out);

/**
 * Apply the branch move (ray reversal) at the node `(x, y)`.
 *
 * # Safety
 * Pointer arguments as in [`er_diagram_parse_json`].
 */
int32_t er_diagram_branch_move(const struct ErDiagram *d,
                               const char *x,
                               const char *y,
                               struct ErDiagram **out);

/**
 * Exactness verdict as JSON `{"exact": bool, "base": [x, y] | null}`.
 *
 * # Safety
 * Pointer arguments as in [`er_diagram_to_json`].
 */
int32_t er_diagram_exactness_json(const struct ErDiagram *d, char **out);

/**
 * Seed data as JSON `[{"dir": [x, y], "flux": "p/q"}, ...]`.
 *
 * # Safety
 * Pointer arguments as in [`er_diagram_to_json`].
 */
int32_t er_diagram_seed_json(const struct ErDiagram *d, char **out);

/**
 * Trace an affine geodesic and return the path as JSON.
 *
 * `budget` is a positive rational length bound, as `"p/q"`.
 *
 * # Safety
 * Pointer arguments as in [`er_diagram_parse_json`].
 */
int32_t er_trace_geodesic_json(const struct ErDiagram *d,
                               const char *start_x,
                               const char *start_y,
                               const char *dir_x,
                               const char *dir_y,
                               const char *budget,
                               char **out);

/**
 * Holonomy around a polygonal loop, returned as JSON
 * `{"linear": [[a, b], [c, d]], "translate": [x, y]}`.
 *
 * `vertices_json` is a JSON array of `[x, y]` rational string pairs with at
 * least three entries.
 *
 * # Safety
 * Pointer arguments as in [`er_diagram_parse_json`].
 */
int32_t er_holonomy_json(const struct ErDiagram *d, const char *vertices_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EIGENRAY_H */

#ifndef ELASTIC_SHAPES_H
#define ELASTIC_SHAPES_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum EsMethod {
  ES_METHOD_DP = 0,
  ES_METHOD_EXACT = 1,
} EsMethod;

/**
 * Result codes. Values 2 to 5 match the command-line exit codes.
 */
typedef enum EsStatus {
  ES_STATUS_OK = 0,
  ES_STATUS_NULL_POINTER = 1,
  ES_STATUS_PARSE = 2,
  ES_STATUS_VALIDATION = 3,
  ES_STATUS_NUMERIC = 4,
  ES_STATUS_IO = 5,
  ES_STATUS_BUFFER_TOO_SMALL = 6,
  ES_STATUS_PANIC = 7,
} EsStatus;

/**
 * A polyline in R^d, open or closed.
 */
typedef struct EsCurve EsCurve;

/**
 * Frames sampled along a geodesic.
 */
typedef struct EsGeodesic EsGeodesic;

/**
 * The outcome of registering two curves.
 */
typedef struct EsRegistration EsRegistration;

/**
 * Metric parameters and solver choice.
 * `window` is the DP search window; 0 selects the default.
 */
typedef struct EsMetric {
  double a;
  double b;
  enum EsMethod method;
  size_t window;
} EsMetric;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default metric: `a = 1`, `b = 1/2`, dynamic programming, default window.
 */
struct EsMetric es_metric_default(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *es_version(void);

/**
 * Message of the last failed call on this thread, or null if none.
 * Valid until the next failing call on the same thread.
 */
const char *es_last_error_message(void);

/**
 * Builds a curve from `n_points * dim` row-major coordinates.
 *
 * # Safety
 * `points` must be valid for `n_points * dim` reads; `out` must be writable.
 */
enum EsStatus es_curve_new(const double *points,
                           size_t n_points,
                           size_t dim,
                           bool closed,
                           struct EsCurve **out);

/**
 * Reads a curve from a JSON or CSV file. `closed` overrides the file's
 * closure flag: 0 open, 1 closed, any other value keeps the file's.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EsStatus es_curve_read(const char *path, int32_t closed, struct EsCurve **out);

/**
 * # Safety
 * `curve` is null or a handle from this library not yet freed.
 */
void es_curve_free(struct EsCurve *curve);

/**
 * Vertex count (a closed curve does not repeat its first vertex); 0 for null.
 *
 * # Safety
 * `curve` is null or a live handle.
 */
size_t es_curve_vertex_count(const struct EsCurve *curve);

/**
 * Ambient dimension; 0 for null.
 *
 * # Safety
 * `curve` is null or a live handle.
 */
size_t es_curve_dim(const struct EsCurve *curve);

/**
 * # Safety
 * `curve` is null or a live handle; `out` must be writable.
 */
enum EsStatus es_curve_arc_length(const struct EsCurve *curve, double *out);

/**
 * Copies the vertices row-major into `buf`, which holds `capacity` values.
 * Fails with `BufferTooSmall` if `capacity < vertex_count * dim`.
 *
 * # Safety
 * `curve` is null or a live handle; `buf` must be valid for `capacity` writes.
 */
enum EsStatus es_curve_copy_points(const struct EsCurve *curve, double *buf, size_t capacity);

/**
 * Elastic distance between two curves modulo reparametrization.
 *
 * # Safety
 * Handles are live or null; `metric` and `out` must be valid.
 */
enum EsStatus es_distance(const struct EsCurve *c1,
                          const struct EsCurve *c2,
                          const struct EsMetric *metric,
                          double *out);

/**
 * Registers `c2` against `c1`.
 *
 * # Safety
 * Handles are live or null; `metric` and `out` must be valid.
 */
enum EsStatus es_register(const struct EsCurve *c1,
                          const struct EsCurve *c2,
                          const struct EsMetric *metric,
                          struct EsRegistration **out);

/**
 * # Safety
 * `reg` is null or a live handle.
 */
void es_registration_free(struct EsRegistration *reg);

/**
 * Distance; NaN for null.
 *
 * # Safety
 * `reg` is null or a live handle.
 */
double es_registration_distance(const struct EsRegistration *reg);

/**
 * Maximized registration energy; NaN for null.
 *
 * # Safety
 * `reg` is null or a live handle.
 */
double es_registration_energy(const struct EsRegistration *reg);

/**
 * Start vertex chosen on the second curve for closed curves, -1 otherwise.
 *
 * # Safety
 * `reg` is null or a live handle.
 */
int64_t es_registration_seed_index(const struct EsRegistration *reg);

/**
 * Number of vertices of the piecewise linear reparametrization path.
 *
 * # Safety
 * `reg` is null or a live handle.
 */
size_t es_registration_vertex_count(const struct EsRegistration *reg);

/**
 * Copies the path vertices as interleaved `(x, y)` pairs into `buf`.
 *
 * # Safety
 * `reg` is null or a live handle; `buf` must be valid for `capacity` writes.
 */
enum EsStatus es_registration_copy_path(const struct EsRegistration *reg,
                                        double *buf,
                                        size_t capacity);

/**
 * Symmetric `n × n` distance matrix, written row-major into `out`.
 * Pairs run in parallel on the global thread pool.
 *
 * # Safety
 * `curves` must hold `n` live handles; `out` must be valid for `n * n` writes.
 */
enum EsStatus es_distance_matrix(const struct EsCurve *const *curves,
                                 size_t n,
                                 const struct EsMetric *metric,
                                 double *out);

/**
 * `steps` frames along the geodesic from `c1` to `c2` under `reg`, which
 * must come from [`es_register`] on the same curves and metric.
 *
 * # Safety
 * Handles are live or null; `metric` and `out` must be valid.
 */
enum EsStatus es_geodesic(const struct EsCurve *c1,
                          const struct EsCurve *c2,
                          const struct EsRegistration *reg,
                          const struct EsMetric *metric,
                          size_t steps,
                          struct EsGeodesic **out);

/**
 * # Safety
 * `g` is null or a live handle.
 */
void es_geodesic_free(struct EsGeodesic *g);

/**
 * # Safety
 * `g` is null or a live handle.
 */
size_t es_geodesic_frame_count(const struct EsGeodesic *g);

/**
 * Copy of frame `index` as a new curve handle owned by the caller.
 *
 * # Safety
 * `g` is null or a live handle; `out` must be writable.
 */
enum EsStatus es_geodesic_frame(const struct EsGeodesic *g, size_t index, struct EsCurve **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ELASTIC_SHAPES_H */

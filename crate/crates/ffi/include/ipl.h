#ifndef IPL_H
#define IPL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IplStatus {
  IPL_STATUS_OK = 0,
  IPL_STATUS_NULL_POINTER = 1,
  IPL_STATUS_DIMENSION = 2,
  IPL_STATUS_ASYMMETRIC = 3,
  IPL_STATUS_NOT_POSITIVE_DEFINITE = 4,
  IPL_STATUS_DOMAIN = 5,
  IPL_STATUS_CAP_EXCEEDED = 6,
  IPL_STATUS_NUMERICAL = 7,
  IPL_STATUS_PRECONDITION = 8,
  IPL_STATUS_INPUT = 9,
  IPL_STATUS_BUFFER_TOO_SMALL = 10,
  IPL_STATUS_PANIC = 11,
} IplStatus;

/**
 * Simple graph with an edge orientation.
 */
typedef struct IplGraph IplGraph;

/**
 * Symmetric positive definite matrix.
 */
typedef struct IplMatrix IplMatrix;

/**
 * Laplacian matrix with its ascending eigenvalues.
 */
typedef struct IplSpectrum IplSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`) and returns the full message length in
 * bytes, excluding the terminator. Returns 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ipl_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ipl_version(void);

/**
 * Builds an SPD matrix from `n*n` row-major values.
 *
 * # Safety
 * `data` must point to `n*n` doubles and `out` to writable storage.
 */
enum IplStatus ipl_matrix_new(const double *data, size_t n, struct IplMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from [`ipl_matrix_new`] not yet freed.
 */
void ipl_matrix_free(struct IplMatrix *m);

/**
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum IplStatus ipl_matrix_dim(const struct IplMatrix *m, size_t *out);

/**
 * Builds a graph on `n` vertices from `m` edges given as `2*m` vertex
 * indices. `orientation` holds `m` signs (+1/-1) in the same order and may
 * be null for all +1; an edge `(a, b)` with sign +1 points from `a` to `b`.
 *
 * # Safety
 * `edges` must point to `2*m` values, `orientation` to `m` values or null.
 */
enum IplStatus ipl_graph_new(size_t n,
                             const size_t *edges,
                             size_t m,
                             const int8_t *orientation,
                             struct IplGraph **out);

/**
 * # Safety
 * `g` must be null or a handle from [`ipl_graph_new`] not yet freed.
 */
void ipl_graph_free(struct IplGraph *g);

/**
 * Vertex and edge counts.
 *
 * # Safety
 * `g` must be a live handle; outputs writable.
 */
enum IplStatus ipl_graph_size(const struct IplGraph *g, size_t *n, size_t *m);

/**
 * Endpoints `u < v` and orientation sign of sorted edge `k`.
 *
 * # Safety
 * `g` must be a live handle; outputs writable.
 */
enum IplStatus ipl_graph_edge(const struct IplGraph *g,
                              size_t k,
                              size_t *u,
                              size_t *v,
                              int8_t *sign);

/**
 * Inner product Laplacian of a graph; a null `mv` or `me` means identity.
 *
 * # Safety
 * Handles must be live or null as described; `out` writable.
 */
enum IplStatus ipl_graph_laplacian(const struct IplGraph *g,
                                   const struct IplMatrix *mv,
                                   const struct IplMatrix *me,
                                   struct IplSpectrum **out);

/**
 * # Safety
 * `s` must be null or a handle from [`ipl_graph_laplacian`] not yet freed.
 */
void ipl_spectrum_free(struct IplSpectrum *s);

/**
 * Matrix dimension.
 *
 * # Safety
 * `s` must be a live handle; `out` writable.
 */
enum IplStatus ipl_spectrum_dim(const struct IplSpectrum *s, size_t *out);

/**
 * Copies the ascending eigenvalues into `buf` of capacity `len`.
 *
 * # Safety
 * `s` must be a live handle; `buf` must hold `len` doubles.
 */
enum IplStatus ipl_spectrum_eigenvalues(const struct IplSpectrum *s, double *buf, size_t len);

/**
 * Copies the Laplacian matrix (row-major) into `buf` of capacity `len`.
 *
 * # Safety
 * `s` must be a live handle; `buf` must hold `len` doubles.
 */
enum IplStatus ipl_spectrum_matrix(const struct IplSpectrum *s, double *buf, size_t len);

/**
 * Number of zero eigenvalues.
 *
 * # Safety
 * `s` must be a live handle; `out` writable.
 */
enum IplStatus ipl_spectrum_zero_multiplicity(const struct IplSpectrum *s, size_t *out);

/**
 * Strong conformality `(λmax − λmin)/(λmax + λmin)`.
 *
 * # Safety
 * `m` must be a live handle; `out` writable.
 */
enum IplStatus ipl_strong_conformality(const struct IplMatrix *m, double *out);

/**
 * Exact weak conformality by enumeration; `cap` bounds the dimension
 * unless `force` is nonzero; `threads` of 0 is treated as 1.
 *
 * # Safety
 * `m` must be a live handle; `out` writable.
 */
enum IplStatus ipl_weak_conformality(const struct IplMatrix *m,
                                     size_t cap,
                                     int32_t force,
                                     size_t threads,
                                     double *out);

/**
 * Exact inner product conductance; null inner products mean identity.
 *
 * # Safety
 * Handles must be live or null as described; `out` writable.
 */
enum IplStatus ipl_conductance(const struct IplGraph *g,
                               const struct IplMatrix *mv,
                               const struct IplMatrix *me,
                               double *out);

/**
 * Cheeger check. Writes `λ_2`, the two bounds and whether both hold.
 *
 * # Safety
 * Handles must be live or null as described; outputs writable.
 */
enum IplStatus ipl_verify_cheeger(const struct IplGraph *g,
                                  const struct IplMatrix *mv,
                                  const struct IplMatrix *me,
                                  double *lambda_2,
                                  double *lower,
                                  double *upper,
                                  int32_t *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IPL_H */

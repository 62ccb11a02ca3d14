#ifndef LIZORKIN_H
#define LIZORKIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LzStatus {
  LzStatus_Ok = 0,
  LzStatus_NullPointer = 1,
  LzStatus_InvalidArgument = 2,
  LzStatus_InvalidDomain = 3,
  LzStatus_Resolution = 4,
  LzStatus_Coverage = 5,
  LzStatus_Capability = 6,
  LzStatus_Spec = 7,
  LzStatus_Io = 8,
  LzStatus_Format = 9,
  LzStatus_NoConvergence = 10,
  LzStatus_Geometry = 11,
  LzStatus_Internal = 99,
} LzStatus;

/**
 * A Whitney covering of a domain and its complement.
 */
typedef struct LzCovering LzCovering;

/**
 * A domain.
 */
typedef struct LzDomain LzDomain;

/**
 * Samples of a function on a grid, with an absence mask.
 */
typedef struct LzFunction LzFunction;

/**
 * Called once per grid point inside the domain: `(x, dim, user) -> f(x)`.
 * Null is rejected.
 */
typedef double (*LzScalarFn)(const double *x, uintptr_t dim, void *user);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread (empty after a success).
 *
 * # Safety
 * The pointer stays valid until the next `lz_*` call on the same thread and
 * must not be freed.
 */
const char *lz_last_error(void);

/**
 * Built-in domain by name (`interval`, `square`, `lshape`, `disc`,
 * `slit-square`) or signed-distance file path.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer. The
 * handle written to `out` must be released with [`lz_domain_free`].
 */
enum LzStatus lz_domain_builtin(const char *name, struct LzDomain **out);

/**
 * Spatial dimension of a domain (0 for a null handle).
 *
 * # Safety
 * `dom` must be null or a live handle from [`lz_domain_builtin`].
 */
uintptr_t lz_domain_dim(const struct LzDomain *dom);

/**
 * # Safety
 * `dom` must be null or a handle from [`lz_domain_builtin`] not yet freed.
 */
void lz_domain_free(struct LzDomain *dom);

/**
 * Whitney covering of `dom` and its exterior with constant `cw` (pass 0
 * for the default) down to generation `max_generation`.
 *
 * # Safety
 * `dom` must be a live domain handle and `out` writable. Release the
 * result with [`lz_covering_free`].
 */
enum LzStatus lz_covering_build(const struct LzDomain *dom,
                                double cw,
                                uint32_t max_generation,
                                struct LzCovering **out);

/**
 * Interior and exterior cube counts of a covering.
 *
 * # Safety
 * `cov` must be a live covering handle; `interior` and `exterior` writable.
 */
enum LzStatus lz_covering_cube_count(const struct LzCovering *cov,
                                     uintptr_t *interior,
                                     uintptr_t *exterior);

/**
 * # Safety
 * `cov` must be null or a handle from [`lz_covering_build`] not yet freed.
 */
void lz_covering_free(struct LzCovering *cov);

/**
 * Samples `f` at the cell centers of spacing `h` covering `dom`; points
 * outside the domain are absent.
 *
 * # Safety
 * `dom` must be a live domain handle, `f` a valid function pointer that
 * accepts `user`, and `out` writable. Release the result with
 * [`lz_function_free`].
 */
enum LzStatus lz_function_sample(const struct LzDomain *dom,
                                 double h,
                                 LzScalarFn f,
                                 void *user,
                                 struct LzFunction **out);

/**
 * Reads a sampled-function JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable. Release the
 * result with [`lz_function_free`].
 */
enum LzStatus lz_function_load(const char *path, struct LzFunction **out);

/**
 * Writes a sampled-function JSON file.
 *
 * # Safety
 * `f` must be a live function handle and `path` a NUL-terminated string.
 */
enum LzStatus lz_function_save(const struct LzFunction *f, const char *path);

/**
 * Grid points and present samples of a function.
 *
 * # Safety
 * `f` must be a live function handle; `points` and `present` writable.
 */
enum LzStatus lz_function_size(const struct LzFunction *f, uintptr_t *points, uintptr_t *present);

/**
 * Scalar sample at flat grid index `i`; `present` receives 0 for an absent
 * point (the value is then 0).
 *
 * # Safety
 * `f` must be a live function handle; `value` and `present` writable.
 */
enum LzStatus lz_function_value(const struct LzFunction *f,
                                uintptr_t i,
                                double *value,
                                int32_t *present);

/**
 * # Safety
 * `f` must be null or a function handle not yet freed.
 */
void lz_function_free(struct LzFunction *f);

/**
 * Triebel-Lizorkin norm with its split; `q` and `u` may be infinite.
 *
 * # Safety
 * `f` must be a live function handle; the three outputs writable.
 */
enum LzStatus lz_tl_norm(const struct LzFunction *f,
                         double s,
                         double p,
                         double q,
                         double u,
                         double rho,
                         double *total,
                         double *wkp,
                         double *seminorm);

/**
 * Extension of order `k` (0 to 3) of samples on `dom` to a padded box.
 *
 * # Safety
 * `f` and `dom` must be live handles and `out` writable. Release the
 * result with [`lz_function_free`].
 */
enum LzStatus lz_extend(const struct LzFunction *f,
                        uint32_t k,
                        const struct LzDomain *dom,
                        struct LzFunction **out);

/**
 * Number of Faa di Bruno terms of `D^order (g o f)` for `f: R^d -> R^big_d`.
 *
 * # Safety
 * `order` must point to `d` readable integers and `out` be writable.
 */
enum LzStatus lz_faa_term_count(const uint32_t *order,
                                uintptr_t d,
                                uintptr_t big_d,
                                uintptr_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIZORKIN_H */

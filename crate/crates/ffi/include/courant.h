#ifndef COURANT_H
#define COURANT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CourantStatus {
  COURANT_STATUS_OK = 0,
  /*
   Null pointer, bad UTF-8 or an index out of range.
   */
  COURANT_STATUS_INVALID_ARGUMENT = 1,
  COURANT_STATUS_INVALID_SPEC = 2,
  COURANT_STATUS_INSUFFICIENT_CUTOFF = 3,
  COURANT_STATUS_INSUFFICIENT_SPECTRUM = 4,
  COURANT_STATUS_PRECONDITION = 5,
  COURANT_STATUS_DEGENERATE_INPUT = 6,
  COURANT_STATUS_CONVERGENCE = 7,
  COURANT_STATUS_PARSE = 8,
  COURANT_STATUS_IO = 9,
  /*
   A panic inside the library.
   */
  COURANT_STATUS_INTERNAL = 10,
} CourantStatus;

typedef enum CourantScale {
  COURANT_SCALE_UNIT = 0,
  COURANT_SCALE_PI_SQUARED = 1,
} CourantScale;

typedef struct CourantEigenResult CourantEigenResult;

typedef struct CourantExactSpectrum CourantExactSpectrum;

typedef struct CourantNumericSpectrum CourantNumericSpectrum;

/*
 `n̲`, `n` and `n̄` at one energy.
 */
typedef struct CourantCounts {
  size_t n_lower;
  size_t n_mid;
  size_t n_upper;
  bool is_eigenvalue;
} CourantCounts;

typedef struct CourantMainResult {
  size_t lhs;
  size_t rhs;
  bool holds;
  bool equality;
  bool on_spectrum;
} CourantMainResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static string.
 */
const char *courant_version(void);

/*
 Message of the last failed call on this thread, or null. Valid until the
 next call on the same thread.
 */
const char *courant_last_error(void);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void courant_string_free(char *s);

/*
 Exact spectrum `κ(p1 m² + p2 n²) ≤ κ q_max` of a rectangle; rationals as
 decimal strings such as `"1/4"`.

 # Safety
 String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum CourantStatus courant_exact_spectrum_new(const char *p1,
                                              const char *p2,
                                              enum CourantScale scale,
                                              const char *q_max,
                                              struct CourantExactSpectrum **out);

/*
 # Safety
 `s` must be null or a handle from this library, not used afterwards.
 */
void courant_exact_spectrum_free(struct CourantExactSpectrum *s);

/*
 Number of eigenvalues up to the cutoff, counted with multiplicity.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum CourantStatus courant_exact_spectrum_len(const struct CourantExactSpectrum *s, size_t *out);

/*
 `λ_k` (1-based) as a newly allocated rational string.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum CourantStatus courant_exact_spectrum_kth(const struct CourantExactSpectrum *s,
                                              size_t k,
                                              char **out);

/*
 `λ_k` (1-based) including the scale factor, as a double.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum CourantStatus courant_exact_spectrum_kth_f64(const struct CourantExactSpectrum *s,
                                                  size_t k,
                                                  double *out);

/*
 Counting functions at the rational energy `lambda`, in the spectrum's units.

 # Safety
 `s` must be a live handle; `lambda` NUL-terminated; `out` writable.
 */
enum CourantStatus courant_exact_spectrum_counts(const struct CourantExactSpectrum *s,
                                                 const char *lambda,
                                                 struct CourantCounts *out);

/*
 The spectrum as a newly allocated JSON string.

 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum CourantStatus courant_exact_spectrum_to_json(const struct CourantExactSpectrum *s, char **out);

/*
 Main counting inequality for a domain and `n_subs` disjoint members at a
 rational energy.

 # Safety
 All handles must be live; `subs` must hold `n_subs` handles.
 */
enum CourantStatus courant_check_main_exact(const struct CourantExactSpectrum *domain,
                                            const struct CourantExactSpectrum *const *subs,
                                            size_t n_subs,
                                            const char *lambda,
                                            struct CourantMainResult *out);

/*
 Numeric spectrum from `len` doubles; values within `cluster_tol·max(1,|λ|)`
 of each other count as one eigenvalue.

 # Safety
 `values` must point to `len` doubles; `out` must be writable.
 */
enum CourantStatus courant_numeric_spectrum_new(const double *values,
                                                size_t len,
                                                double cluster_tol,
                                                struct CourantNumericSpectrum **out);

/*
 # Safety
 `s` must be null or a handle from this library, not used afterwards.
 */
void courant_numeric_spectrum_free(struct CourantNumericSpectrum *s);

/*
 # Safety
 `s` must be a live handle; `out` must be writable.
 */
enum CourantStatus courant_numeric_spectrum_counts(const struct CourantNumericSpectrum *s,
                                                   double lambda,
                                                   struct CourantCounts *out);

/*
 # Safety
 All handles must be live; `subs` must hold `n_subs` handles.
 */
enum CourantStatus courant_check_main_numeric(const struct CourantNumericSpectrum *domain,
                                              const struct CourantNumericSpectrum *const *subs,
                                              size_t n_subs,
                                              double lambda,
                                              struct CourantMainResult *out);

/*
 Lowest `k` Dirichlet eigenpairs on a named grid fixture (`"pi-square"`,
 `"sec61-rect"`, `"sec61-halves"`, `"sec62"`, `"L-shape"`); `resolution` 0
 picks the fixture's default.

 # Safety
 `fixture` must be NUL-terminated; `out` must be writable.
 */
enum CourantStatus courant_grid_solve(const char *fixture,
                                      size_t resolution,
                                      size_t k,
                                      double tol,
                                      uint64_t seed,
                                      struct CourantEigenResult **out);

/*
 # Safety
 `r` must be null or a handle from this library, not used afterwards.
 */
void courant_eigen_result_free(struct CourantEigenResult *r);

/*
 Number of eigenpairs and unknowns per eigenvector.

 # Safety
 `r` must be a live handle; outputs must be writable.
 */
enum CourantStatus courant_eigen_result_dims(const struct CourantEigenResult *r,
                                             size_t *pairs,
                                             size_t *unknowns);

/*
 Eigenvalue and residual norm of pair `i` (0-based).

 # Safety
 `r` must be a live handle; outputs must be writable.
 */
enum CourantStatus courant_eigen_result_value(const struct CourantEigenResult *r,
                                              size_t i,
                                              double *value,
                                              double *residual);

/*
 Copies eigenvector `i` into `buf`, which must hold `unknowns` doubles.

 # Safety
 `r` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum CourantStatus courant_eigen_result_vector(const struct CourantEigenResult *r,
                                               size_t i,
                                               double *buf,
                                               size_t len);

/*
 Number of nodal domains of eigenvector `i`.

 # Safety
 `r` must be a live handle; `out` must be writable.
 */
enum CourantStatus courant_eigen_result_nodal_count(const struct CourantEigenResult *r,
                                                    size_t i,
                                                    double zero_tol,
                                                    size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COURANT_H */

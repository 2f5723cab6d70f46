#ifndef REGATTACK_H
#define REGATTACK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/*
 Status codes returned by every function.
 */
typedef enum RaStatus {
  RA_OK = 0,
  RA_ERR_NULL = 1,
  RA_ERR_DIMENSION = 2,
  RA_ERR_INVALID = 3,
  RA_ERR_SINGULAR = 4,
  RA_ERR_NUMERICAL = 5,
  RA_ERR_UNBOUNDED = 6,
  RA_ERR_PARSE = 7,
  RA_ERR_IO = 8,
  RA_ERR_BUFFER = 9,
  RA_ERR_PANIC = 10,
} RaStatus;

/*
 Feature matrix and response.
 */
typedef struct RaDataset RaDataset;

/*
 Clean least-squares fit of a dataset.
 */
typedef struct RaFit RaFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
uintptr_t ra_last_error_message(char *buf, uintptr_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *ra_version(void);

/*
 Builds a dataset from a row-major n×m matrix and n responses.

 # Safety
 `x` must hold n·m doubles, `y` n doubles; `out` must be writable.
 */
enum RaStatus ra_dataset_new(const double *x,
                             uintptr_t n,
                             uintptr_t m,
                             const double *y,
                             struct RaDataset **out);

/*
 Loads a CSV file: header row, first non-date column is the response.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RaStatus ra_dataset_load_csv(const char *path, struct RaDataset **out);

/*
 The seeded 536×7 synthetic market.

 # Safety
 `out` must be writable.
 */
enum RaStatus ra_dataset_synthetic(uint64_t seed, struct RaDataset **out);

/*
 # Safety
 `ds` must be a live dataset handle; `n` and `m` writable.
 */
enum RaStatus ra_dataset_dims(const struct RaDataset *ds, uintptr_t *n, uintptr_t *m);

/*
 # Safety
 `ds` must be null or a handle not freed before.
 */
void ra_dataset_free(struct RaDataset *ds);

/*
 Ordinary least squares on a dataset.

 # Safety
 `ds` must be a live dataset handle; `out` writable.
 */
enum RaStatus ra_fit_ols(const struct RaDataset *ds, struct RaFit **out);

/*
 # Safety
 `fit` must be null or a handle not freed before.
 */
void ra_fit_free(struct RaFit *fit);

/*
 Copies the m clean coefficients into `beta`.

 # Safety
 `fit` must be live; `beta` valid for `len` doubles.
 */
enum RaStatus ra_fit_coefficients(const struct RaFit *fit, double *beta, uintptr_t len);

/*
 # Safety
 `fit` must be live; `sigma` writable.
 */
enum RaStatus ra_fit_sigma_min(const struct RaFit *fit, double *sigma);

/*
 Optimal single poisoning point against coefficient `index` (0-based).
 `maximize` = 0 pushes the coefficient down, anything else pushes it up.
 Writes m features into `x0`, the response into `y0` and the poisoned
 coefficients into `beta`.

 # Safety
 `fit` must be live; `x0` and `beta` valid for `len` doubles; `y0` writable.
 */
enum RaStatus ra_attack_one(const struct RaFit *fit,
                            uintptr_t index,
                            double eta,
                            int32_t maximize,
                            double *x0,
                            double *y0,
                            double *beta,
                            uintptr_t len);

/*
 Multi-coefficient attack: push coefficient `index` to zero, weight
 `lambda` on it and 1 on keeping the others, relaxation order `order`.
 `certified` receives 1 when the relaxation certifies global optimality.

 # Safety
 As for `ra_attack_one`; `certified` writable.
 */
enum RaStatus ra_attack_multi(const struct RaFit *fit,
                              uintptr_t index,
                              double eta,
                              double lambda,
                              uint32_t order,
                              double *x0,
                              double *y0,
                              double *beta,
                              uintptr_t len,
                              int32_t *certified);

/*
 Rank-one attack X → X + c dᵀ lowering coefficient `index`, with budget
 `eta_fraction`·σ_min. Writes n entries of c, m of d and the change in the
 coefficient. Returns RA_ERR_UNBOUNDED when the fraction is at least 1.

 # Safety
 `fit` must be live; `c` valid for `c_len`, `d` for `d_len` doubles;
 `objective` writable.
 */
enum RaStatus ra_attack_rankone(const struct RaFit *fit,
                                uintptr_t index,
                                double eta_fraction,
                                uint64_t seed,
                                double *c,
                                uintptr_t c_len,
                                double *d,
                                uintptr_t d_len,
                                double *objective);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGATTACK_H */

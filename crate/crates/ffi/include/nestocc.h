#ifndef NESTOCC_H
#define NESTOCC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Bits of the regime mask written by [`nestocc_classify`].
#define NESTOCC_REGIME_I (1 << 0)

#define NESTOCC_REGIME_IIA (1 << 1)

#define NESTOCC_REGIME_IIB (1 << 2)

#define NESTOCC_REGIME_IIC (1 << 3)

#define NESTOCC_REGIME_III (1 << 4)

#define NESTOCC_REGIME_IV (1 << 5)

#define NESTOCC_REGIME_FREEZING (1 << 6)

#define NESTOCC_REGIME_OUT_OF_RANGE (1 << 7)

// Kernel selectors for [`nestocc_poisson_kernel`].
#define NESTOCC_KERNEL_PHI 0

#define NESTOCC_KERNEL_M 1

#define NESTOCC_KERNEL_V 2

#define NESTOCC_KERNEL_W 3

#define NESTOCC_KERNEL_PSI 4

// Result codes.
typedef enum NestoccStatus {
  NESTOCC_STATUS_OK = 0,
  NESTOCC_STATUS_NULL_POINTER = 1,
  NESTOCC_STATUS_CONFIG = 2,
  NESTOCC_STATUS_DOMAIN = 3,
  NESTOCC_STATUS_NO_THETA_STAR = 4,
  NESTOCC_STATUS_SLOPE_OUT_OF_RANGE = 5,
  NESTOCC_STATUS_LATTICE = 6,
  NESTOCC_STATUS_MEMORY_BUDGET = 7,
  NESTOCC_STATUS_REFUSED = 8,
  NESTOCC_STATUS_IO = 9,
  NESTOCC_STATUS_PANIC = 10,
} NestoccStatus;

// Opaque environment.
typedef struct NestoccEnv NestoccEnv;

// Opaque spectral profile.
typedef struct NestoccProfile NestoccProfile;

// Opaque materialized tree.
typedef struct NestoccTree NestoccTree;

// Critical constants; absent values are NaN.
typedef struct NestoccCriticalConstants {
  double theta_star;
  double v;
  double theta_sub;
  double a_star;
  double a_c;
  // `+inf` under property A.
  double a_bar;
  double a_bar_minus;
  double slope_at_two;
  double slope_at_zero;
  // 0 for property A, 1 for property B.
  int32_t property_b;
} NestoccCriticalConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL terminated,
// truncated to `len`). Returns the full message length in bytes.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t nestocc_last_error_message(char *buf, size_t len);

// Bernoulli sieve with uniform sticks.
//
// # Safety
// `out` must be valid for writes.
enum NestoccStatus nestocc_env_sieve_uniform(struct NestoccEnv **out);

// Bernoulli sieve with Beta(a, b) sticks.
//
// # Safety
// `out` must be valid for writes.
enum NestoccStatus nestocc_env_sieve_beta(double a, double b, struct NestoccEnv **out);

// Symmetric Dirichlet split into `m` parts.
//
// # Safety
// `out` must be valid for writes.
enum NestoccStatus nestocc_env_dirichlet(size_t m, double alpha, struct NestoccEnv **out);

// Fixed probability vector.
//
// # Safety
// `weights` must be valid for `len` reads; `out` valid for writes.
enum NestoccStatus nestocc_env_deterministic(const double *weights,
                                             size_t len,
                                             struct NestoccEnv **out);

// # Safety
// `env` must come from a `nestocc_env_*` constructor, or be null.
void nestocc_env_free(struct NestoccEnv *env);

// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_env_is_lattice(const struct NestoccEnv *env, bool *out);

// Closed-form profile when available, else a default Monte Carlo grid.
//
// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_profile_new(const struct NestoccEnv *env, struct NestoccProfile **out);

// # Safety
// `p` must come from [`nestocc_profile_new`], or be null.
void nestocc_profile_free(struct NestoccProfile *p);

// `derivative` 0, 1 or 2 selects `lambda`, `lambda'` or `lambda''`.
//
// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_profile_eval(const struct NestoccProfile *p,
                                        int32_t derivative,
                                        double theta,
                                        double *out);

// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_critical_constants(const struct NestoccProfile *p,
                                              struct NestoccCriticalConstants *out);

// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_solve_theta_for_slope(const struct NestoccProfile *p,
                                                 double a,
                                                 double *out);

// `lambda*(a)`.
//
// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_legendre(const struct NestoccProfile *p, double a, double *out);

// `alpha(a)` on `(a_*, a_bar)`.
//
// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_alpha_exponent(const struct NestoccProfile *p, double a, double *out);

// Writes a mask of `NESTOCC_REGIME_*` bits and the solved `theta` (NaN when
// not attainable).
//
// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_classify(const struct NestoccProfile *p,
                                    double a,
                                    uint32_t *mask_out,
                                    double *theta_out);

// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_tree_new(const struct NestoccEnv *env,
                                    size_t depth,
                                    double mass_floor,
                                    uint64_t seed,
                                    struct NestoccTree **out);

// # Safety
// `t` must come from [`nestocc_tree_new`], or be null.
void nestocc_tree_free(struct NestoccTree *t);

// Number of boxes at level `j` and the truncated mass there.
//
// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_tree_level_info(const struct NestoccTree *t,
                                           size_t j,
                                           size_t *boxes_out,
                                           double *residual_out);

// `W_j(theta)`; `approximate_out` flags truncation without an error bound.
//
// # Safety
// Pointers must be valid.
enum NestoccStatus nestocc_tree_martingale(const struct NestoccTree *t,
                                           const struct NestoccProfile *p,
                                           double theta,
                                           size_t j,
                                           double *value_out,
                                           bool *approximate_out);

// Throws `n` balls into the tree and writes `K(1..=k_max)` at level `j`
// into `counts_out`, plus the empty-box count (`UINT64_MAX` when the level
// is truncated).
//
// # Safety
// `counts_out` must be valid for `k_max` writes; other pointers valid.
enum NestoccStatus nestocc_occupancy_tree(const struct NestoccTree *t,
                                          uint64_t n,
                                          uint64_t seed,
                                          size_t j,
                                          size_t k_max,
                                          uint64_t *counts_out,
                                          uint64_t *empty_out);

// Ball-driven allocation of `n` balls down to level `j`; writes
// `K(1..=k_max)` at level `j`.
//
// # Safety
// `counts_out` must be valid for `k_max` writes; `env` valid.
enum NestoccStatus nestocc_occupancy_lazy(const struct NestoccEnv *env,
                                          uint64_t n,
                                          uint64_t seed,
                                          size_t j,
                                          size_t k_max,
                                          uint64_t *counts_out);

// Poisson kernels: `phi_k`, `m`, `v`, `w` and `psi_{l,k}`.
//
// # Safety
// `out` must be valid for writes.
enum NestoccStatus nestocc_poisson_kernel(int32_t kind,
                                          uint32_t l,
                                          uint32_t k,
                                          double x,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NESTOCC_H */

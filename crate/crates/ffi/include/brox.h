#ifndef BROX_H
#define BROX_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum BroxStatus {
  BROX_STATUS_OK = 0,
  BROX_STATUS_NULL_POINTER = 1,
  BROX_STATUS_INVALID_ARGUMENT = 2,
  BROX_STATUS_OUT_OF_DOMAIN = 3,
  // No valley or crossing exists in the current domain.
  BROX_STATUS_NOT_FOUND = 4,
  BROX_STATUS_BUDGET_EXCEEDED = 5,
  // Output buffer too small; the required length was written.
  BROX_STATUS_BUFFER_TOO_SMALL = 6,
  BROX_STATUS_INTERNAL = 7,
} BroxStatus;

// A sampled potential.
typedef struct BroxEnvironment BroxEnvironment;

// A diffusion path on a time grid.
typedef struct BroxPath BroxPath;

// A local-time profile.
typedef struct BroxProfile BroxProfile;

typedef struct BroxExtremum {
  double x;
  // `true` for a maximum.
  bool is_max;
} BroxExtremum;

typedef struct BroxValley {
  double p;
  double m;
  double q;
  double depth;
  double ascent;
  bool ambiguous;
} BroxValley;

typedef struct BroxKsResult {
  double statistic;
  double p_bound;
} BroxKsResult;

// Message for the last failing call on this thread; empty if none.
// The pointer stays valid until the next failing call on the same thread.
const char *brox_last_error(void);

// Sample a two-sided Brownian potential on `[left, right]` with grid `step`.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum BroxStatus brox_environment_sample(uint64_t seed,
                                        uint64_t stream,
                                        double step,
                                        double left,
                                        double right,
                                        struct BroxEnvironment **out);

// Build a potential from knot values; `values[origin]` must be 0.
//
// # Safety
// `values` must point to `len` readable doubles and `out` must be writable.
enum BroxStatus brox_environment_from_values(double step,
                                             size_t origin,
                                             const double *values,
                                             size_t len,
                                             struct BroxEnvironment **out);

// # Safety
// `env` must be null or a handle from this library not yet freed.
void brox_environment_free(struct BroxEnvironment *env);

// Knot values. If `cap` is too small, `*len` receives the needed size and
// the call fails with `BufferTooSmall`.
//
// # Safety
// `env` must be a live handle, `buf` must hold `cap` doubles, `len` must be writable.
enum BroxStatus brox_environment_values(const struct BroxEnvironment *env,
                                        double *buf,
                                        size_t cap,
                                        size_t *len);

// `W(x)` by linear interpolation.
//
// # Safety
// `env` must be a live handle and `out` writable.
enum BroxStatus brox_environment_evaluate(const struct BroxEnvironment *env, double x, double *out);

// Largest barrier crossed going from `x` to `y`.
//
// # Safety
// `env` must be a live handle and `out` writable.
enum BroxStatus brox_barrier(const struct BroxEnvironment *env, double x, double y, double *out);

// All h-extrema in position order.
//
// # Safety
// `env` must be a live handle, `buf` must hold `cap` entries, `len` must be writable.
enum BroxStatus brox_find_h_extrema(const struct BroxEnvironment *env,
                                    double h,
                                    struct BroxExtremum *buf,
                                    size_t cap,
                                    size_t *len);

// The standard h-valley around the origin; `NotFound` if the domain is too narrow.
//
// # Safety
// `env` must be a live handle and `out` writable.
enum BroxStatus brox_standard_valley(const struct BroxEnvironment *env,
                                     double h,
                                     struct BroxValley *out);

// Simulate `X` in the potential `alpha · W` up to time `t` on a driving grid `dt`.
// The environment is extended with fresh Brownian increments if the path leaves it.
//
// # Safety
// `env` must be a live handle and `out` writable.
enum BroxStatus brox_simulate(const struct BroxEnvironment *env,
                              double alpha,
                              uint64_t seed,
                              uint64_t stream,
                              double dt,
                              double t,
                              struct BroxPath **out);

// # Safety
// `path` must be null or a handle from this library not yet freed.
void brox_path_free(struct BroxPath *path);

// Clock times and positions; both buffers use the same length.
//
// # Safety
// `path` must be a live handle, `clock` and `positions` must hold `cap` doubles, `len` must be writable.
enum BroxStatus brox_path_samples(const struct BroxPath *path,
                                  double *clock,
                                  double *positions,
                                  size_t cap,
                                  size_t *len);

// First time the path reaches `x`; `*found` is false if it never does.
//
// # Safety
// `path` must be a live handle; `out` and `found` writable.
enum BroxStatus brox_hitting_time(const struct BroxPath *path, double x, double *out, bool *found);

// Occupation-histogram local time at time `t` with bins of width `bin_width`.
//
// # Safety
// `path` must be a live handle and `out` writable.
enum BroxStatus brox_local_time(const struct BroxPath *path,
                                double bin_width,
                                double t,
                                struct BroxProfile **out);

// # Safety
// `profile` must be null or a handle from this library not yet freed.
void brox_profile_free(struct BroxProfile *profile);

// Bin centers and local-time values.
//
// # Safety
// `profile` must be a live handle, `centers` and `values` must hold `cap` doubles, `len` must be writable.
enum BroxStatus brox_profile_values(const struct BroxProfile *profile,
                                    double *centers,
                                    double *values,
                                    size_t cap,
                                    size_t *len);

// Leftmost bin with the largest local time.
//
// # Safety
// `profile` must be a live handle; `x` and `l` writable.
enum BroxStatus brox_favorite_point(const struct BroxProfile *profile, double *x, double *l);

// One draw of `∫ e^{-R}` for the two-sided 3-d Bessel process `R`, followed
// to level `cutoff` with base step `dt`; `*tail` is the expected omitted mass.
//
// # Safety
// `value` and `tail` must be writable.
enum BroxStatus brox_functional_sample(uint64_t seed,
                                       uint64_t stream,
                                       double dt,
                                       double cutoff,
                                       double *value,
                                       double *tail);

// One draw of `4τ(1) + 4τ̃(1)` from two BESQ(2) hitting times.
//
// # Safety
// `out` must be writable.
enum BroxStatus brox_alias_sample(uint64_t seed,
                                  uint64_t stream,
                                  double dt,
                                  uint64_t max_steps,
                                  double *out);

// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value bound.
//
// # Safety
// `a` and `b` must point to `n` and `m` readable doubles; `out` must be writable.
enum BroxStatus brox_ks_two_sample(const double *a,
                                   size_t n,
                                   const double *b,
                                   size_t m,
                                   struct BroxKsResult *out);

#endif  /* BROX_H */

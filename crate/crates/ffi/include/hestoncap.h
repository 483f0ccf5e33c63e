#ifndef HESTONCAP_H
#define HESTONCAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum HcStatus {
  HC_STATUS_OK = 0,
  // A required pointer argument was null.
  HC_STATUS_NULL_POINTER = 1,
  // Market parameters or constraint bounds were rejected.
  HC_STATUS_INVALID_ARGUMENT = 2,
  // An assumption check failed and the solve was not forced.
  HC_STATUS_ASSUMPTION = 3,
  // The solver or an integrator failed.
  HC_STATUS_SOLVER_FAILURE = 4,
  // The requested time lies outside `[0, T]` or a state is out of domain.
  HC_STATUS_DOMAIN = 5,
  // A Rust panic was caught at the boundary.
  HC_STATUS_PANIC = 6,
} HcStatus;

// Competitor strategy for the welfare loss.
typedef enum HcCompetitor {
  // Merton ratio projected onto the constraint.
  HC_COMPETITOR_CAPPED_MERTON = 0,
  // Unconstrained optimum projected onto the constraint.
  HC_COMPETITOR_CAPPED_UNCONSTRAINED = 1,
} HcCompetitor;

// Opaque validated market.
typedef struct HcMarket HcMarket;

// Opaque solved policy for one market and constraint.
typedef struct HcSolution HcSolution;

// Market parameters in the layout accepted by [`hc_market_new`].
typedef struct HcMarketParams {
  double r;
  double eta;
  double kappa;
  double theta;
  double sigma;
  double rho;
  double z0;
  double b;
  double horizon;
  double v0;
} HcMarketParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parameters of the reference calibration.
struct HcMarketParams hc_market_params_base(void);

// Validates `params` and stores a new market handle in `*out`.
//
// # Safety
// `params` must point to a valid [`HcMarketParams`] and `out` to writable storage.
enum HcStatus hc_market_new(const struct HcMarketParams *params, struct HcMarket **out);

// Releases a market handle; null is ignored.
//
// # Safety
// `market` must be null or a handle from [`hc_market_new`] not yet freed.
void hc_market_free(struct HcMarket *market);

// Unconstrained optimal weight of the market.
//
// # Safety
// `market` must be a live handle and `out` writable.
enum HcStatus hc_market_merton_ratio(const struct HcMarket *market, double *out);

// Solves the constrained problem on `[alpha, beta]`; pass `-INFINITY` or
// `INFINITY` for an open side. With `force` non-zero the assumption checks
// are reported but do not stop the solve.
//
// # Safety
// `market` must be a live handle and `out` writable.
enum HcStatus hc_solve(const struct HcMarket *market,
                       double alpha,
                       double beta,
                       int32_t force,
                       struct HcSolution **out);

// Releases a solution handle; null is ignored.
//
// # Safety
// `solution` must be null or a handle from [`hc_solve`] not yet freed.
void hc_solution_free(struct HcSolution *solution);

// Optimal constrained weight at calendar time `t`.
//
// # Safety
// `solution` must be a live handle and `out` writable.
enum HcStatus hc_solution_weight(const struct HcSolution *solution, double t, double *out);

// Factor loading of the value function at time to maturity `tau`.
//
// # Safety
// `solution` must be a live handle and `out` writable.
enum HcStatus hc_solution_loading(const struct HcSolution *solution, double tau, double *out);

// Optimal expected utility from wealth `v` and factor level `z` at time `t`.
//
// # Safety
// `solution` must be a live handle and `out` writable.
enum HcStatus hc_solution_value(const struct HcSolution *solution,
                                double t,
                                double v,
                                double z,
                                double *out);

// Relative wealth-equivalent loss at time zero of `competitor` (an
// [`HcCompetitor`] value) against the optimum.
//
// # Safety
// `solution` must be a live handle and `out` writable.
enum HcStatus hc_solution_welfare_loss(const struct HcSolution *solution,
                                       int32_t competitor,
                                       double *out);

// Message of the last failed call on this thread, empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *hc_last_error(void);

// Static description of a status code.
const char *hc_status_name(enum HcStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HESTONCAP_H */

/* Copyright 2026 The gatefid Authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef GATEFID_H
#define GATEFID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum GfStatus {
  GF_STATUS_OK = 0,
  GF_STATUS_NULL_POINTER = 1,
  GF_STATUS_INVALID_ARGUMENT = 2,
  GF_STATUS_CONFIG_ERROR = 3,
  GF_STATUS_NUMERICAL_ERROR = 4,
  GF_STATUS_SOLVER_ERROR = 5,
  GF_STATUS_INDEX_OUT_OF_RANGE = 6,
  GF_STATUS_BUFFER_TOO_SMALL = 7,
  GF_STATUS_PANIC = 8,
} GfStatus;

// First-order formula selector for [`gf_budget_compute`].
typedef enum GfFormula {
  GF_FORMULA_PROJECTED = 0,
  GF_FORMULA_HAAR_EXACT = 1,
} GfFormula;

// Per-channel coefficients and the resulting average fidelity.
typedef struct GfBudget GfBudget;

// A gate model together with the current rate of each of its channels.
typedef struct GfModel GfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *gf_version(void);

// Copies the calling thread's last error message into `buf`.
enum GfStatus gf_last_error_message(char *buf, size_t len, size_t *needed);

// Transmon CZ with coupling `lambda` (rad/s) applied for `tau` (s).
enum GfStatus gf_model_cz(double lambda, double tau, struct GfModel **out);

// Rydberg-blockade CZ at Rabi frequency `omega` (rad/s) with the default
// detuning ratio and laser phase.
enum GfStatus gf_model_rydberg_cz(double omega, struct GfModel **out);

enum GfStatus gf_model_cczs(double lambda, double phi, struct GfModel **out);

enum GfStatus gf_model_iswap(double g, double tau, struct GfModel **out);

// Idle register with `n` subsystems of the given level counts.
enum GfStatus gf_model_idle(const size_t *dims, size_t n, double tau, struct GfModel **out);

// Two models run simultaneously; neither input is consumed.
enum GfStatus gf_model_parallel(const struct GfModel *a,
                                const struct GfModel *b,
                                bool pad,
                                struct GfModel **out);

// Loads a gate and channel rates from a TOML configuration file.
enum GfStatus gf_model_from_config(const char *path, struct GfModel **out);

void gf_model_free(struct GfModel *model);

enum GfStatus gf_model_channel_count(const struct GfModel *model, size_t *out);

// Reference time τ of the budget in seconds.
enum GfStatus gf_model_tau(const struct GfModel *model, double *out);

enum GfStatus gf_model_channel_label(const struct GfModel *model,
                                     size_t index,
                                     char *buf,
                                     size_t len,
                                     size_t *needed);

// Sets the rate (s⁻¹) of channel `index`.
enum GfStatus gf_model_set_rate(struct GfModel *model, size_t index, double rate);

// Sets every channel so that Γτ equals `gamma_tau`.
enum GfStatus gf_model_set_gamma_tau(struct GfModel *model, double gamma_tau);

// First-order budget. `abs_tol` ≤ 0 selects the default tolerance.
enum GfStatus gf_budget_compute(const struct GfModel *model,
                                enum GfFormula formula,
                                double abs_tol,
                                struct GfBudget **out);

void gf_budget_free(struct GfBudget *budget);

enum GfStatus gf_budget_len(const struct GfBudget *budget, size_t *out);

// Coefficient c_k and contribution c_k Γ_k τ of entry `index`; either out
// pointer may be NULL.
enum GfStatus gf_budget_entry(const struct GfBudget *budget,
                              size_t index,
                              double *coefficient,
                              double *contribution);

// F̄ = 1 − Σ c_k Γ_k τ.
enum GfStatus gf_budget_fidelity(const struct GfBudget *budget, double *out);

// Exact average fidelity from the master equation. `solver_tol` ≤ 0
// selects the default. When `mc_samples` > 0 a Monte Carlo estimate with
// the given seed is also written to `mc_mean` and `mc_std_error`.
enum GfStatus gf_oracle_fidelity(const struct GfModel *model,
                                 double solver_tol,
                                 size_t mc_samples,
                                 uint64_t seed,
                                 double *fidelity,
                                 double *mc_mean,
                                 double *mc_std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GATEFID_H */

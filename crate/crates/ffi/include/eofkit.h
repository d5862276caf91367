#ifndef EOFKIT_H
#define EOFKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EofStatus {
  EOF_STATUS_OK = 0,
  EOF_STATUS_NULL_POINTER = 1,
  EOF_STATUS_SHAPE = 2,
  EOF_STATUS_DOMAIN = 3,
  EOF_STATUS_PARAMETER = 4,
  EOF_STATUS_UNSUPPORTED = 5,
  EOF_STATUS_DECOMPOSITION = 6,
  EOF_STATUS_SCHEMA = 7,
  EOF_STATUS_IO = 8,
  EOF_STATUS_INVALID_UTF8 = 9,
  EOF_STATUS_PANIC = 10,
} EofStatus;

typedef enum EofGMethod {
  EOF_G_METHOD_DIRECT = 0,
  EOF_G_METHOD_EIGEN = 1,
} EofGMethod;

// Opaque Kraus channel.
typedef struct EofChannel EofChannel;

// Opaque density matrix.
typedef struct EofDensity EofDensity;

// Opaque Hermitian operator.
typedef struct EofOperator EofOperator;

// Search budget; pass NULL for the defaults (16 restarts, seed 0).
typedef struct EofSearchOptions {
  size_t restarts;
  uint64_t seed;
} EofSearchOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `eof_*` call on the same thread.
const char *eof_last_error(void);

// NUL-terminated crate version.
const char *eof_version(void);

// # Safety
// `data` must point to `len` doubles; `out` must be writable.
enum EofStatus eof_density_new(size_t dim_a,
                               size_t dim_b,
                               size_t copies,
                               const double *data,
                               size_t len,
                               struct EofDensity **out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum EofStatus eof_density_from_json(const char *json, struct EofDensity **out);

// # Safety
// `rho` must come from `eof_density_new`/`eof_density_from_json` and not
// have been freed. NULL is ignored.
void eof_density_free(struct EofDensity *rho);

// # Safety
// `data` must point to `len` doubles; `out` must be writable.
enum EofStatus eof_operator_new(size_t dim_a,
                                size_t dim_b,
                                size_t copies,
                                const double *data,
                                size_t len,
                                struct EofOperator **out);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum EofStatus eof_operator_from_json(const char *json, struct EofOperator **out);

// # Safety
// `op` must be a live handle or NULL.
void eof_operator_free(struct EofOperator *op);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum EofStatus eof_channel_from_json(const char *json, struct EofChannel **out);

// Werner-Holevo channel on `C^d`.
//
// # Safety
// `out` must be writable.
enum EofStatus eof_channel_werner_holevo(size_t d, struct EofChannel **out);

// # Safety
// `ch` must be a live handle or NULL.
void eof_channel_free(struct EofChannel *ch);

// Closed-form entanglement of formation of a two-qubit state, in nats.
//
// # Safety
// `rho` must be a live handle; `out` must be writable.
enum EofStatus eof_wootters(const struct EofDensity *rho, double *out);

// Convex-roof upper bound on the entanglement of formation.
//
// # Safety
// `rho` must be a live handle, `opts` NULL or valid, `out` writable.
enum EofStatus eof_roof_value(const struct EofDensity *rho,
                              const struct EofSearchOptions *opts,
                              double *out);

// `E*(X) = max_ψ ⟨ψ|X|ψ⟩ − E(ψ)`.
//
// # Safety
// `x` must be a live handle, `opts` NULL or valid, `out` writable.
enum EofStatus eof_conjugate(const struct EofOperator *x,
                             const struct EofSearchOptions *opts,
                             double *out);

// `g(M) = E*(log M)`; `-INFINITY` when the support of `M` holds no
// product vector.
//
// # Safety
// `m` must be a live handle, `opts` NULL or valid, `out` writable.
enum EofStatus eof_g(const struct EofOperator *m,
                     enum EofGMethod method,
                     const struct EofSearchOptions *opts,
                     double *out);

// `h_p(M)` for `0 < p ≤ 1` and `0 ≤ M ≤ 𝕀`.
//
// # Safety
// `m` must be a live handle, `opts` NULL or valid, `out` writable.
enum EofStatus eof_h_p(const struct EofOperator *m,
                       double p,
                       const struct EofSearchOptions *opts,
                       double *out);

// Maximal output purity `ν_q` (`q ≥ 1`, `q = INFINITY` allowed).
//
// # Safety
// `ch` must be a live handle, `opts` NULL or valid, `out` writable.
enum EofStatus eof_nu_q(const struct EofChannel *ch,
                        double q,
                        const struct EofSearchOptions *opts,
                        double *out);

// `ln ν_q(Λ₁⊗Λ₂) − ln ν_q(Λ₁) − ln ν_q(Λ₂)` written with the sign
// convention of the library: negative when multiplicativity fails.
//
// # Safety
// Handles must be live, `opts` NULL or valid, `out` writable.
enum EofStatus eof_multiplicativity_gap(const struct EofChannel *l1,
                                        const struct EofChannel *l2,
                                        double q,
                                        const struct EofSearchOptions *opts,
                                        double *out);

// `Tr[ρX] − E*(X)`, a lower bound on the entanglement of formation.
//
// # Safety
// Handles must be live, `opts` NULL or valid, `out` writable.
enum EofStatus eof_dual_lower_bound(const struct EofDensity *rho,
                                    const struct EofOperator *x,
                                    const struct EofSearchOptions *opts,
                                    double *out);

// Best dual lower bound found with `‖X‖_∞ ≤ cap`.
//
// # Safety
// `rho` must be a live handle, `opts` NULL or valid, `out` writable.
enum EofStatus eof_dual_estimate(const struct EofDensity *rho,
                                 double cap,
                                 const struct EofSearchOptions *opts,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EOFKIT_H */

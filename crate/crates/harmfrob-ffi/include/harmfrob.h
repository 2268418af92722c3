/* C interface to the harmfrob library: weighted multiple harmonic sums,
 * depth-one p-adic zeta values, adjoint slot values, and finite (mod p)
 * multiple zeta values.
 *
 * Conventions:
 *   - Every function returns hf_status; HF_OK is 0.  No call aborts the
 *     process: arguments are validated up front, and internal failures map
 *     to HF_ERR_INTERNAL.
 *   - A p-adic value is returned as (valuation, abs_precision, digits[]):
 *     digits are base p, little-endian, starting at p^valuation, and the
 *     value is certified modulo p^abs_precision.
 *   - *digits_len == 0 means the value is zero to the certified precision;
 *     abs_precision == INT64_MAX additionally marks an exact zero (then
 *     valuation == INT64_MAX as well).
 *   - Buffer protocol: pass digits == NULL with digits_cap == 0 to probe;
 *     the call returns HF_ERR_BUFFER_TOO_SMALL (or HF_OK for a zero value)
 *     with the required length in *digits_len.
 *   - Composition indices are arrays of uint32_t parts, outermost part
 *     first; parts may be NULL when depth is 0 (the empty index).  Parts
 *     lie in 1..=64, depth <= 16, total weight <= 64.
 *   - Contexts are not thread-safe; use one per thread.
 */

#ifndef HARMFROB_H
#define HARMFROB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hf_status {
  HF_OK = 0,
  HF_ERR_NULL_ARGUMENT = 1,
  HF_ERR_BAD_PRIME = 2,
  HF_ERR_BAD_PARAMETER = 3,
  HF_ERR_BAD_INDEX = 4,
  HF_ERR_BUDGET = 5,
  HF_ERR_BUFFER_TOO_SMALL = 6,
  HF_ERR_INTERNAL = 7
} hf_status;

/* Opaque evaluation context bound to a prime power p^alpha and a target
 * precision (certified p-adic digits). */
typedef struct hf_ctx hf_ctx;

/* Version string of the library; static storage, do not free. */
const char *hf_version(void);

/* Human-readable message for a status code; static storage, do not free. */
const char *hf_status_message(hf_status status);

/* Create a context.  p: odd prime; alpha >= 1 with p^alpha <= 10^6;
 * precision in 1..=200.  On success stores the handle in *out. */
hf_status hf_ctx_new(uint64_t p, uint32_t alpha, int64_t precision,
                     hf_ctx **out);

/* Free a context.  NULL is a no-op. */
void hf_ctx_free(hf_ctx *ctx);

/* Weighted harmonic sum har_{p^alpha}(index) at the context precision. */
hf_status hf_har(hf_ctx *ctx, const uint32_t *parts, size_t depth,
                 int64_t *valuation, int64_t *abs_precision, uint64_t *digits,
                 size_t digits_cap, size_t *digits_len);

/* Depth-one zeta value zeta_{p,alpha}(n), n >= 2, at the context
 * precision. */
hf_status hf_zeta1(hf_ctx *ctx, uint32_t n, int64_t *valuation,
                   int64_t *abs_precision, uint64_t *digits, size_t digits_cap,
                   size_t *digits_len);

/* Adjoint slot value zeta^Ad(b; index) at the context precision.  Requires
 * b + weight(index) <= min(precision + 1, 12); the first call builds an
 * internal table, later calls reuse (and widen) it. */
hf_status hf_adjoint(hf_ctx *ctx, uint32_t b, const uint32_t *parts,
                     size_t depth, int64_t *valuation, int64_t *abs_precision,
                     uint64_t *digits, size_t digits_cap, size_t *digits_len);

/* Finite (mod p) multiple zeta value: the residue of
 * p^{-weight} har_p(index) modulo p.  Standalone; p an odd prime <= 10^5. */
hf_status hf_finite_mzv(uint64_t p, const uint32_t *parts, size_t depth,
                        uint64_t *residue);

/* Exact rational har_m(index), 1 <= m <= 10^6, formatted as
 * "numerator/denominator" and NUL-terminated.  Probe with buf == NULL,
 * buf_cap == 0: the required capacity (including the NUL) is stored in
 * *len and the call returns HF_ERR_BUFFER_TOO_SMALL. */
hf_status hf_har_rational(uint64_t m, const uint32_t *parts, size_t depth,
                          char *buf, size_t buf_cap, size_t *len);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HARMFROB_H */

#![allow(non_camel_case_types)]

//! C ABI for the harmonic/adjoint evaluators: opaque context handles,
//! integer status codes, and caller-provided buffers.  The committed header
//! is `include/harmfrob.h`; the unit tests call every exported function
//! through its C signature and cross-check the values against the core
//! library.
//!
//! Conventions shared by every value-returning call:
//!
//! * a p-adic value comes back as `(valuation, abs_precision, digits[])`
//!   with the digits base `p`, little-endian, starting at `p^valuation`
//!   (the same normal form the cache files use);
//! * `digits_len == 0` means the value is zero to the certified precision;
//!   `abs_precision == INT64_MAX` additionally marks an exact zero;
//! * every function returns `HF_OK` (0) or a nonzero `hf_status`; no call
//!   aborts the process — argument validation happens up front and a panic
//!   backstop maps internal failures to `HF_ERR_INTERNAL`.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use harmfrob::adjoint::{zeta_depth1, AdjointTable};
use harmfrob::arith::PAdic;
use harmfrob::harmonic::{finite_mzv, har_prime_power, har_rational};
use harmfrob::sigma::DEFAULT_MARGIN;
use harmfrob::words::CompositionIndex;

/// Status codes, mirrored verbatim in `include/harmfrob.h`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum hf_status {
    HF_OK = 0,
    HF_ERR_NULL_ARGUMENT = 1,
    HF_ERR_BAD_PRIME = 2,
    HF_ERR_BAD_PARAMETER = 3,
    HF_ERR_BAD_INDEX = 4,
    HF_ERR_BUDGET = 5,
    HF_ERR_BUFFER_TOO_SMALL = 6,
    HF_ERR_INTERNAL = 7,
}

use hf_status::*;

/// Largest allowed prime power `p^alpha` (the evaluation cost is linear in
/// it) and largest prime for the finite residues; both match the
/// command-line guards.
const MAX_PRIME_POWER: u64 = 1_000_000;
const MAX_FINITE_PRIME: u64 = 100_000;
/// Certified digits per value.
const MAX_PRECISION: i64 = 200;
/// Caps on composition indices: parts, depth, and total weight (together
/// with `b` for adjoint slots, whose table cost grows quickly in the total).
const MAX_PART: u32 = 64;
const MAX_DEPTH: usize = 16;
const MAX_WEIGHT: u32 = 64;
const MAX_ADJOINT_TOTAL: u32 = 12;

/// Opaque evaluation context: a fixed `(p, alpha)` and target precision,
/// plus a lazily built (and lazily widened) adjoint table.  Not
/// thread-safe; use one context per thread.
pub struct hf_ctx {
    p: u64,
    alpha: u32,
    precision: i64,
    adjoint: Option<AdjointTable>,
}

fn is_odd_prime(p: u64) -> bool {
    p >= 3 && p % 2 == 1 && (3..p).step_by(2).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Validate and build a composition index from a C array (`parts` may be
/// null only when `depth` is zero; the empty index is the constant 1).
fn read_index(parts: *const u32, depth: usize) -> Result<CompositionIndex, hf_status> {
    if depth == 0 {
        return Ok(CompositionIndex::empty());
    }
    if parts.is_null() {
        return Err(HF_ERR_NULL_ARGUMENT);
    }
    if depth > MAX_DEPTH {
        return Err(HF_ERR_BAD_INDEX);
    }
    let slice = unsafe { std::slice::from_raw_parts(parts, depth) };
    if slice.iter().any(|&n| n == 0 || n > MAX_PART) {
        return Err(HF_ERR_BAD_INDEX);
    }
    if slice.iter().sum::<u32>() > MAX_WEIGHT {
        return Err(HF_ERR_BAD_INDEX);
    }
    Ok(CompositionIndex::new(slice.to_vec()))
}

/// Write a p-adic value into the caller's out-params.  `digits` may be null
/// only when `digits_cap` is zero; on `HF_ERR_BUFFER_TOO_SMALL` the
/// required length is still stored in `*digits_len`.
fn write_padic(
    value: &PAdic,
    valuation: *mut i64,
    abs_precision: *mut i64,
    digits: *mut u64,
    digits_cap: usize,
    digits_len: *mut usize,
) -> hf_status {
    if valuation.is_null() || abs_precision.is_null() || digits_len.is_null() {
        return HF_ERR_NULL_ARGUMENT;
    }
    let ds = value.digits();
    unsafe {
        *digits_len = ds.len();
        if value.is_exact_zero() {
            *valuation = i64::MAX;
            *abs_precision = i64::MAX;
        } else {
            let abs = value.abs_precision().expect("non-exact values carry a precision");
            *abs_precision = abs;
            *valuation = value.valuation().lower_bound().unwrap_or(i64::MAX);
        }
    }
    if ds.is_empty() {
        return HF_OK;
    }
    if digits_cap < ds.len() {
        return HF_ERR_BUFFER_TOO_SMALL;
    }
    if digits.is_null() {
        return HF_ERR_NULL_ARGUMENT;
    }
    unsafe { ptr::copy_nonoverlapping(ds.as_ptr(), digits, ds.len()) };
    HF_OK
}

fn guard<F: FnOnce() -> hf_status + std::panic::UnwindSafe>(f: F) -> hf_status {
    catch_unwind(f).unwrap_or(HF_ERR_INTERNAL)
}

/// Version string of the library, static storage.
#[no_mangle]
pub extern "C" fn hf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Human-readable message for a status code, static storage.
#[no_mangle]
pub extern "C" fn hf_status_message(status: hf_status) -> *const c_char {
    let msg: &'static str = match status {
        HF_OK => "ok\0",
        HF_ERR_NULL_ARGUMENT => "null pointer argument\0",
        HF_ERR_BAD_PRIME => "p must be an odd prime within the supported range\0",
        HF_ERR_BAD_PARAMETER => "parameter out of range\0",
        HF_ERR_BAD_INDEX => "composition index invalid (parts 1..=64, depth <= 16, weight <= 64)\0",
        HF_ERR_BUDGET => "request exceeds the context's precision/weight budget\0",
        HF_ERR_BUFFER_TOO_SMALL => "output buffer too small (required length was stored)\0",
        HF_ERR_INTERNAL => "internal error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Create an evaluation context for `p^alpha` with `precision` certified
/// digits.  Requirements: `p` an odd prime, `p^alpha <= 10^6`,
/// `1 <= precision <= 200`.
#[no_mangle]
pub extern "C" fn hf_ctx_new(
    p: u64,
    alpha: u32,
    precision: i64,
    out: *mut *mut hf_ctx,
) -> hf_status {
    if out.is_null() {
        return HF_ERR_NULL_ARGUMENT;
    }
    if !is_odd_prime(p) {
        return HF_ERR_BAD_PRIME;
    }
    if alpha < 1 || p.checked_pow(alpha).map_or(true, |pa| pa > MAX_PRIME_POWER) {
        return HF_ERR_BAD_PARAMETER;
    }
    if !(1..=MAX_PRECISION).contains(&precision) {
        return HF_ERR_BAD_PARAMETER;
    }
    let ctx = Box::new(hf_ctx { p, alpha, precision, adjoint: None });
    unsafe { *out = Box::into_raw(ctx) };
    HF_OK
}

/// Free a context.  Null is a no-op.
#[no_mangle]
pub extern "C" fn hf_ctx_free(ctx: *mut hf_ctx) {
    if !ctx.is_null() {
        drop(unsafe { Box::from_raw(ctx) });
    }
}

/// The weighted harmonic sum `har_{p^alpha}(index)` at the context's
/// precision.
#[no_mangle]
pub extern "C" fn hf_har(
    ctx: *mut hf_ctx,
    parts: *const u32,
    depth: usize,
    valuation: *mut i64,
    abs_precision: *mut i64,
    digits: *mut u64,
    digits_cap: usize,
    digits_len: *mut usize,
) -> hf_status {
    if ctx.is_null() {
        return HF_ERR_NULL_ARGUMENT;
    }
    let index = match read_index(parts, depth) {
        Ok(i) => i,
        Err(e) => return e,
    };
    let ctx = unsafe { &mut *ctx };
    guard(AssertUnwindSafe(|| {
        let value = har_prime_power(ctx.p, ctx.alpha, &index, ctx.precision)
            .truncate_to(ctx.precision);
        write_padic(&value, valuation, abs_precision, digits, digits_cap, digits_len)
    }))
}

/// The depth-one zeta value `zeta_{p,alpha}(n)`, `n >= 2`, at the context's
/// precision.
#[no_mangle]
pub extern "C" fn hf_zeta1(
    ctx: *mut hf_ctx,
    n: u32,
    valuation: *mut i64,
    abs_precision: *mut i64,
    digits: *mut u64,
    digits_cap: usize,
    digits_len: *mut usize,
) -> hf_status {
    if ctx.is_null() {
        return HF_ERR_NULL_ARGUMENT;
    }
    if !(2..=MAX_WEIGHT).contains(&n) {
        return HF_ERR_BAD_PARAMETER;
    }
    let ctx = unsafe { &mut *ctx };
    guard(AssertUnwindSafe(|| {
        let z = zeta_depth1(ctx.p, ctx.alpha, n, ctx.precision);
        let value = z.value.truncate_to(ctx.precision);
        write_padic(&value, valuation, abs_precision, digits, digits_cap, digits_len)
    }))
}

/// The adjoint slot `zeta^Ad(b; index)` at the context's precision.  The
/// underlying table certifies `cutoff + 1 - margin` digits from expansions
/// truncated at `cutoff = precision + 1`, so the request must satisfy
/// `b + weight(index) <= precision + 1` (and `b + weight <= 12`, the table
/// budget cap); otherwise `HF_ERR_BUDGET`.
#[no_mangle]
pub extern "C" fn hf_adjoint(
    ctx: *mut hf_ctx,
    b: u32,
    parts: *const u32,
    depth: usize,
    valuation: *mut i64,
    abs_precision: *mut i64,
    digits: *mut u64,
    digits_cap: usize,
    digits_len: *mut usize,
) -> hf_status {
    if ctx.is_null() {
        return HF_ERR_NULL_ARGUMENT;
    }
    let index = match read_index(parts, depth) {
        Ok(i) => i,
        Err(e) => return e,
    };
    let total = b + index.weight();
    if total > MAX_ADJOINT_TOTAL {
        return HF_ERR_BUDGET;
    }
    let ctx = unsafe { &mut *ctx };
    let cutoff = (ctx.precision + DEFAULT_MARGIN - 1) as u32;
    if total > cutoff {
        return HF_ERR_BUDGET;
    }
    guard(AssertUnwindSafe(|| {
        let rebuild = match &ctx.adjoint {
            Some(t) => t.max_total() < total,
            None => true,
        };
        if rebuild {
            let max_total = ctx.adjoint.as_ref().map_or(total, |t| t.max_total().max(total));
            ctx.adjoint =
                Some(AdjointTable::build(ctx.p, ctx.alpha, max_total, None, cutoff, DEFAULT_MARGIN));
        }
        let table = ctx.adjoint.as_ref().expect("table built above");
        let value = table
            .entry(b, &index)
            .expect("slot within budget")
            .truncate_to(ctx.precision);
        write_padic(&value, valuation, abs_precision, digits, digits_cap, digits_len)
    }))
}

/// The finite (mod p) multiple zeta value: residue of
/// `p^{-weight} har_p(index)`.  Standalone (no context); `p` must be an odd
/// prime `<= 10^5`.
#[no_mangle]
pub extern "C" fn hf_finite_mzv(
    p: u64,
    parts: *const u32,
    depth: usize,
    residue: *mut u64,
) -> hf_status {
    if residue.is_null() {
        return HF_ERR_NULL_ARGUMENT;
    }
    if !is_odd_prime(p) || p > MAX_FINITE_PRIME {
        return HF_ERR_BAD_PRIME;
    }
    let index = match read_index(parts, depth) {
        Ok(i) => i,
        Err(e) => return e,
    };
    guard(AssertUnwindSafe(|| {
        let r = finite_mzv(p, &index);
        unsafe { *residue = r };
        HF_OK
    }))
}

/// The exact rational value `har_m(index)`, written as `"numer/denom"`
/// (always with the slash) into the caller's byte buffer, NUL-terminated.
/// `m` ranges over `1..=10^6`.  On `HF_ERR_BUFFER_TOO_SMALL` the required
/// capacity (including the NUL) is stored in `*len`.
#[no_mangle]
pub extern "C" fn hf_har_rational(
    m: u64,
    parts: *const u32,
    depth: usize,
    buf: *mut c_char,
    buf_cap: usize,
    len: *mut usize,
) -> hf_status {
    if len.is_null() {
        return HF_ERR_NULL_ARGUMENT;
    }
    if m < 1 || m > MAX_PRIME_POWER {
        return HF_ERR_BAD_PARAMETER;
    }
    let index = match read_index(parts, depth) {
        Ok(i) => i,
        Err(e) => return e,
    };
    guard(AssertUnwindSafe(|| {
        let v = har_rational(m, &index);
        let s = format!("{}/{}", v.numer(), v.denom());
        let needed = s.len() + 1;
        unsafe { *len = needed };
        if buf_cap < needed {
            return HF_ERR_BUFFER_TOO_SMALL;
        }
        if buf.is_null() {
            return HF_ERR_NULL_ARGUMENT;
        }
        unsafe {
            ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
            *buf.add(s.len()) = 0;
        }
        HF_OK
    }))
}

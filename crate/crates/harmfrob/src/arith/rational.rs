//! Exact rational helpers: binomial coefficients with arbitrary integer
//! upper argument, factorials, and p-adic valuations of big integers and
//! rationals.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

/// Exact rational numbers. All finite computations in the crate use this
/// type; p-adic truncation happens only at the [`crate::arith::PAdic`]
/// boundary.
pub type Rational = num_rational::BigRational;

/// `n/d` as a rational. `d` must be nonzero.
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "rational with zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `n` as a rational.
pub fn rat_i64(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}

/// `n!` as a big integer.
pub fn factorial(n: u32) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=u64::from(n) {
        acc *= k;
    }
    acc
}

/// Binomial coefficient `C(n, k)` for nonnegative `n`.
pub fn binom_u64(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Binomial coefficient `C(a, k)` with arbitrary integer upper argument,
/// defined by the falling factorial `a(a-1)...(a-k+1)/k!`. For negative `a`
/// this is `(-1)^k C(-a+k-1, k)`, the coefficient pattern of `(1-x)^a`.
pub fn binom_int(a: i64, k: u32) -> BigInt {
    if a >= 0 {
        let a = a as u64;
        return binom_u64(a, u64::from(k));
    }
    // C(a, k) = (-1)^k C(-a + k - 1, k)
    let top = (-a) as u64 + u64::from(k) - 1;
    let unsigned = binom_u64(top, u64::from(k));
    if k % 2 == 0 {
        unsigned
    } else {
        -unsigned
    }
}

/// Binomial coefficient `C(a, k)` with rational upper argument, via the
/// falling factorial.
pub fn binom_rational(a: &Rational, k: u32) -> Rational {
    let mut acc = Rational::one();
    for i in 0..k {
        acc *= a - rat_i64(i64::from(i));
    }
    acc / Rational::from(factorial(k))
}

/// p-adic valuation of a nonzero `BigUint`.
pub fn vp_biguint(n: &BigUint, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of zero is not finite");
    let p = BigUint::from(p);
    let mut n = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&n, &p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero `BigInt`.
pub fn vp_bigint(n: &BigInt, p: u64) -> i64 {
    vp_biguint(n.magnitude(), p)
}

/// p-adic valuation of a nonzero rational: `v_p(num) - v_p(den)`.
pub fn vp_rational(q: &Rational, p: u64) -> i64 {
    assert!(!q.is_zero(), "valuation of zero is not finite");
    vp_bigint(q.numer(), p) - vp_bigint(q.denom(), p)
}

/// True if `q` is a p-adic integer for every prime, i.e. an integer.
pub fn is_integer(q: &Rational) -> bool {
    q.denom().abs() == BigInt::one()
}

//! p-adic numbers with certified absolute precision.
//!
//! A [`PAdic`] is one of three things:
//!
//! * an exact zero (infinitely many correct digits),
//! * a bounded zero `0 + O(p^abs)` — indistinguishable from zero at the
//!   declared precision, with nothing more known,
//! * a value `p^val * unit + O(p^abs)` with `p` not dividing `unit`,
//!   `unit` reduced modulo `p^(abs-val)`, and `val < abs`, so at least one
//!   certified digit exists and the valuation is exactly known.
//!
//! Precision propagates pessimistically and soundly: addition keeps the
//! smaller absolute precision (re-deriving the valuation from the digits, so
//! cancellation degrades to a bounded zero rather than a lie), while
//! multiplication of `x1 = p^{v1} u1 + O(p^{A1})` by `x2` certifies
//! `min(A1 + v2, A2 + v1)` — equivalently, relative precision is the min of
//! the factors'. Inversion flips the valuation and preserves relative
//! precision. No operation ever reports more digits than these rules give.

use super::rational::{vp_biguint, vp_rational, Rational};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;

/// Errors from partial p-adic operations.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum ArithError {
    /// Inverting a number that is zero at its declared precision: the
    /// inverse has unbounded negative valuation as far as we know.
    #[error("cannot invert {what}: no nonzero digit is certified")]
    InversionOfZero { what: String },
    /// An operation needed more certified digits than remain.
    #[error("precision exhausted: {context}")]
    PrecisionExhausted { context: String },
}

/// What is known about the p-adic valuation of a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    /// The number is exactly zero.
    Infinite,
    /// Zero at declared precision: all we know is `v >= abs`.
    AtLeast(i64),
    /// A nonzero digit is certified; the valuation is exact.
    Exactly(i64),
}

impl Valuation {
    /// True if the valuation is certainly `>= k`.
    pub fn at_least(self, k: i64) -> bool {
        match self {
            Valuation::Infinite => true,
            Valuation::AtLeast(a) => a >= k,
            Valuation::Exactly(v) => v >= k,
        }
    }

    /// The certified lower bound, `None` meaning infinity.
    pub fn lower_bound(self) -> Option<i64> {
        match self {
            Valuation::Infinite => None,
            Valuation::AtLeast(a) => Some(a),
            Valuation::Exactly(v) => Some(v),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Infinite => write!(f, "+inf"),
            Valuation::AtLeast(a) => write!(f, ">={a}"),
            Valuation::Exactly(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum State {
    ExactZero,
    Bounded { abs: i64 },
    Known { val: i64, unit: BigUint, abs: i64 },
}

/// A p-adic number with certified absolute precision. See the module docs
/// for the representation and propagation rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdic {
    p: u64,
    state: State,
}

fn pow_p(p: u64, k: i64) -> BigUint {
    assert!(k >= 0, "negative power of p in modulus");
    BigUint::from(p).pow(u32::try_from(k).expect("p-power exponent overflow"))
}

fn modinv(u: &BigUint, modulus: &BigUint) -> BigUint {
    let u = BigInt::from(u.clone());
    let m = BigInt::from(modulus.clone());
    let ext = u.extended_gcd(&m);
    assert!(ext.gcd.is_one(), "inverse of a non-unit modulo a p-power");
    ext.x.mod_floor(&m).to_biguint().expect("mod_floor is nonnegative")
}

impl PAdic {
    /// The exact zero of `Q_p`.
    pub fn exact_zero(p: u64) -> Self {
        PAdic { p, state: State::ExactZero }
    }

    /// `0 + O(p^abs)`: zero at the declared precision.
    pub fn bounded_zero(p: u64, abs: i64) -> Self {
        PAdic { p, state: State::Bounded { abs } }
    }

    /// `1 + O(p^rel)`.
    pub fn one_to_rel(p: u64, rel: i64) -> Self {
        assert!(rel >= 1, "a known value needs at least one certified digit");
        PAdic { p, state: State::Known { val: 0, unit: BigUint::one(), abs: rel } }
    }

    /// A big integer to absolute precision `abs`.
    pub fn from_bigint(n: &BigInt, p: u64, abs: i64) -> Self {
        if n.is_zero() {
            return Self::exact_zero(p);
        }
        let val = vp_biguint(n.magnitude(), p);
        if val >= abs {
            return Self::bounded_zero(p, abs);
        }
        let modulus = pow_p(p, abs - val);
        let unit_int = n / BigInt::from(pow_p(p, val));
        let unit = unit_int.mod_floor(&BigInt::from(modulus)).to_biguint().unwrap();
        PAdic { p, state: State::Known { val, unit, abs } }
    }

    /// A machine integer to absolute precision `abs`.
    pub fn from_i64(n: i64, p: u64, abs: i64) -> Self {
        Self::from_bigint(&BigInt::from(n), p, abs)
    }

    /// A rational to absolute precision `abs`. The denominator may be
    /// divisible by `p`; the valuation just goes negative.
    pub fn from_rational(q: &Rational, p: u64, abs: i64) -> Self {
        if q.is_zero() {
            return Self::exact_zero(p);
        }
        let val = vp_rational(q, p);
        if val >= abs {
            return Self::bounded_zero(p, abs);
        }
        let rel = abs - val;
        let modulus = pow_p(p, rel);
        let vn = vp_biguint(q.numer().magnitude(), p);
        let vd = vp_biguint(q.denom().magnitude(), p);
        let num_unit = q.numer() / BigInt::from(pow_p(p, vn));
        let den_unit = q.denom() / BigInt::from(pow_p(p, vd));
        let m = BigInt::from(modulus);
        let num_red = num_unit.mod_floor(&m).to_biguint().unwrap();
        let den_red = den_unit.mod_floor(&m).to_biguint().unwrap();
        let unit = (num_red * modinv(&den_red, m.magnitude())).mod_floor(m.magnitude());
        PAdic { p, state: State::Known { val, unit, abs } }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// True for exact zero and for bounded zero: nothing distinguishes the
    /// number from zero at its declared precision.
    pub fn is_zero_at_precision(&self) -> bool {
        !matches!(self.state, State::Known { .. })
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.state, State::ExactZero)
    }

    /// Absolute precision; `None` means exact (infinite precision).
    pub fn abs_precision(&self) -> Option<i64> {
        match &self.state {
            State::ExactZero => None,
            State::Bounded { abs } => Some(*abs),
            State::Known { abs, .. } => Some(*abs),
        }
    }

    pub fn valuation(&self) -> Valuation {
        match &self.state {
            State::ExactZero => Valuation::Infinite,
            State::Bounded { abs } => Valuation::AtLeast(*abs),
            State::Known { val, .. } => Valuation::Exactly(*val),
        }
    }

    /// The unit part's base-p digits, little-endian, padded to the full
    /// relative precision. Empty for (exact or bounded) zero.
    pub fn digits(&self) -> Vec<u64> {
        match &self.state {
            State::ExactZero | State::Bounded { .. } => Vec::new(),
            State::Known { val, unit, abs } => {
                let rel = (abs - val) as usize;
                let p = BigUint::from(self.p);
                let mut digits = Vec::with_capacity(rel);
                let mut u = unit.clone();
                for _ in 0..rel {
                    let (q, r) = u.div_rem(&p);
                    digits.push(r.to_u64().expect("digit fits in u64"));
                    u = q;
                }
                digits
            }
        }
    }

    /// The unit part as a big integer (reduced mod `p^(abs-val)`).
    pub fn unit(&self) -> Option<&BigUint> {
        match &self.state {
            State::Known { unit, .. } => Some(unit),
            _ => None,
        }
    }

    /// The value modulo `p`, for p-adic integers only (valuation >= 0
    /// required, and one certified digit at or below exponent 0).
    pub fn residue_mod_p(&self) -> Result<u64, ArithError> {
        match &self.state {
            State::ExactZero => Ok(0),
            State::Bounded { abs } => {
                if *abs >= 1 {
                    Ok(0)
                } else {
                    Err(ArithError::PrecisionExhausted {
                        context: format!("residue mod p of O({}^{})", self.p, abs),
                    })
                }
            }
            State::Known { val, unit, abs } => {
                assert!(*val >= 0, "residue mod p of a number with negative valuation");
                if *val >= 1 {
                    return Ok(0);
                }
                if *abs < 1 {
                    return Err(ArithError::PrecisionExhausted {
                        context: format!("residue mod p needs absolute precision >= 1, have {abs}"),
                    });
                }
                Ok((unit % BigUint::from(self.p)).to_u64().unwrap())
            }
        }
    }

    /// Cap the absolute precision at `abs`. Exact zero stays exact.
    pub fn truncate_to(&self, abs: i64) -> Self {
        match &self.state {
            State::ExactZero => self.clone(),
            State::Bounded { abs: a } => Self::bounded_zero(self.p, (*a).min(abs)),
            State::Known { val, unit, abs: a } => {
                if *a <= abs {
                    return self.clone();
                }
                if *val >= abs {
                    return Self::bounded_zero(self.p, abs);
                }
                let unit = unit % pow_p(self.p, abs - val);
                PAdic { p: self.p, state: State::Known { val: *val, unit, abs } }
            }
        }
    }

    /// Multiply by `p^k` exactly (no precision loss; `abs` and `val` shift).
    pub fn scale_pow_p(&self, k: i64) -> Self {
        match &self.state {
            State::ExactZero => self.clone(),
            State::Bounded { abs } => Self::bounded_zero(self.p, abs + k),
            State::Known { val, unit, abs } => PAdic {
                p: self.p,
                state: State::Known { val: val + k, unit: unit.clone(), abs: abs + k },
            },
        }
    }

    pub fn neg(&self) -> Self {
        match &self.state {
            State::ExactZero | State::Bounded { .. } => self.clone(),
            State::Known { val, unit, abs } => {
                let modulus = pow_p(self.p, abs - val);
                PAdic {
                    p: self.p,
                    state: State::Known { val: *val, unit: &modulus - unit, abs: *abs },
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mixed primes in p-adic addition");
        let p = self.p;
        match (&self.state, &other.state) {
            (State::ExactZero, _) => other.clone(),
            (_, State::ExactZero) => self.clone(),
            (State::Bounded { abs: a }, State::Bounded { abs: b }) => {
                Self::bounded_zero(p, (*a).min(*b))
            }
            (State::Bounded { abs: a }, State::Known { val, unit, abs })
            | (State::Known { val, unit, abs }, State::Bounded { abs: a }) => {
                let cap = (*a).min(*abs);
                if *val >= cap {
                    return Self::bounded_zero(p, cap);
                }
                let unit = unit % pow_p(p, cap - val);
                PAdic { p, state: State::Known { val: *val, unit, abs: cap } }
            }
            (
                State::Known { val: v1, unit: u1, abs: a1 },
                State::Known { val: v2, unit: u2, abs: a2 },
            ) => {
                let cap = (*a1).min(*a2);
                let vmin = (*v1).min(*v2);
                if vmin >= cap {
                    return Self::bounded_zero(p, cap);
                }
                let modulus = pow_p(p, cap - vmin);
                let t1 = u1 * pow_p(p, v1 - vmin) % &modulus;
                let t2 = u2 * pow_p(p, v2 - vmin) % &modulus;
                let total = (t1 + t2) % &modulus;
                if total.is_zero() {
                    return Self::bounded_zero(p, cap);
                }
                let shift = vp_biguint(&total, p);
                let val = vmin + shift;
                debug_assert!(val < cap);
                let unit = total / pow_p(p, shift);
                PAdic { p, state: State::Known { val, unit, abs: cap } }
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mixed primes in p-adic multiplication");
        let p = self.p;
        match (&self.state, &other.state) {
            (State::ExactZero, _) | (_, State::ExactZero) => Self::exact_zero(p),
            (State::Bounded { abs: a }, State::Bounded { abs: b }) => {
                Self::bounded_zero(p, a + b)
            }
            (State::Bounded { abs: a }, State::Known { val, .. })
            | (State::Known { val, .. }, State::Bounded { abs: a }) => {
                Self::bounded_zero(p, a + val)
            }
            (
                State::Known { val: v1, unit: u1, abs: a1 },
                State::Known { val: v2, unit: u2, abs: a2 },
            ) => {
                let val = v1 + v2;
                let abs = (a1 + v2).min(a2 + v1);
                debug_assert!(val < abs);
                let unit = u1 * u2 % pow_p(p, abs - val);
                PAdic { p, state: State::Known { val, unit, abs } }
            }
        }
    }

    pub fn inv(&self) -> Result<Self, ArithError> {
        match &self.state {
            State::ExactZero => Err(ArithError::InversionOfZero { what: "exact zero".into() }),
            State::Bounded { abs } => Err(ArithError::InversionOfZero {
                what: format!("O({}^{})", self.p, abs),
            }),
            State::Known { val, unit, abs } => {
                let rel = abs - val;
                let modulus = pow_p(self.p, rel);
                let unit = modinv(unit, &modulus);
                Ok(PAdic {
                    p: self.p,
                    state: State::Known { val: -val, unit, abs: rel - val },
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self, ArithError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Integer power. `e = 0` gives `1` at the receiver's relative
    /// precision; negative exponents invert first.
    pub fn pow(&self, e: i64) -> Result<Self, ArithError> {
        if e == 0 {
            let rel = match &self.state {
                State::Known { val, abs, .. } => abs - val,
                _ => 1,
            };
            return Ok(Self::one_to_rel(self.p, rel));
        }
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = base.clone();
        // simple square-and-multiply on the absolute value of e
        let mut k = e.unsigned_abs() - 1;
        let mut sq = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&sq);
            }
            k >>= 1;
            if k > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// Valuation of `self - other`: the standard "how closely do these
    /// agree" measure for tests and defect reports.
    pub fn difference_valuation(&self, other: &Self) -> Valuation {
        self.sub(other).valuation()
    }

    /// True if `self - other` has valuation at least `k`.
    pub fn agrees_to(&self, other: &Self, k: i64) -> bool {
        self.difference_valuation(other).at_least(k)
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.state {
            State::ExactZero => write!(f, "0"),
            State::Bounded { abs } => write!(f, "O({}^{})", self.p, abs),
            State::Known { val, abs, .. } => {
                let digits: Vec<String> =
                    self.digits().iter().map(|d| d.to_string()).collect();
                write!(
                    f,
                    "{}^{} * ({}) + O({}^{})",
                    self.p,
                    val,
                    digits.join(","),
                    self.p,
                    abs
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{rat, rat_i64};
    use proptest::prelude::*;

    #[test]
    fn one_third_at_two() {
        // 1/3 = 11 mod 16 since 3*11 = 33 = 2*16 + 1.
        let x = PAdic::from_rational(&rat(1, 3), 2, 4);
        assert_eq!(x.valuation(), Valuation::Exactly(0));
        assert_eq!(x.unit().unwrap(), &BigUint::from(11u32));
        assert_eq!(x.digits(), vec![1, 1, 0, 1]);
        assert_eq!(x.to_string(), "2^0 * (1,1,0,1) + O(2^4)");
    }

    #[test]
    fn reciprocal_pair_multiplies_to_one() {
        let a = PAdic::from_rational(&rat(8, 3), 2, 8);
        let b = PAdic::from_rational(&rat(3, 8), 2, 8);
        let prod = a.mul(&b);
        // abs = min(8 + (-3), 8 + 3) = 5
        assert_eq!(prod.abs_precision(), Some(5));
        assert_eq!(prod.valuation(), Valuation::Exactly(0));
        assert_eq!(prod.unit().unwrap(), &BigUint::one());
    }

    #[test]
    fn addition_recomputes_valuation_on_cancellation() {
        let x = PAdic::from_i64(25, 5, 10);
        let y = PAdic::from_i64(-20, 5, 10);
        let s = x.add(&y);
        assert_eq!(s.valuation(), Valuation::Exactly(1));
        assert_eq!(s.unit().unwrap(), &BigUint::one());
        assert_eq!(s.abs_precision(), Some(10));

        // total cancellation within precision degrades to a bounded zero
        let a = PAdic::from_i64(7, 5, 3);
        let b = PAdic::from_i64(-7 + 125, 5, 3);
        let z = a.add(&b);
        assert!(z.is_zero_at_precision());
        assert!(!z.is_exact_zero());
        assert_eq!(z.valuation(), Valuation::AtLeast(3));
    }

    #[test]
    fn bounded_zero_caps_precision_in_sums() {
        let x = PAdic::from_i64(7, 5, 4);
        let z = PAdic::bounded_zero(5, 2);
        let s = x.add(&z);
        assert_eq!(s.abs_precision(), Some(2));
        assert_eq!(s.valuation(), Valuation::Exactly(0));
        assert_eq!(s.unit().unwrap(), &BigUint::from(7u32));
    }

    #[test]
    fn inversion_flips_valuation_keeps_relative_precision() {
        let x = PAdic::from_i64(50, 5, 12); // 5^2 * 2, rel = 10
        let inv = x.inv().unwrap();
        assert_eq!(inv.valuation(), Valuation::Exactly(-2));
        assert_eq!(inv.abs_precision(), Some(8)); // 12 - 2*2
        let one = x.mul(&inv);
        assert_eq!(one.valuation(), Valuation::Exactly(0));
        assert_eq!(one.unit().unwrap(), &BigUint::one());

        assert!(PAdic::bounded_zero(5, 3).inv().is_err());
        assert!(PAdic::exact_zero(5).inv().is_err());
    }

    #[test]
    fn multiplication_by_bounded_zero_shifts_bound() {
        let x = PAdic::from_i64(50, 5, 12); // val 2
        let z = PAdic::bounded_zero(5, 3);
        assert_eq!(x.mul(&z).valuation(), Valuation::AtLeast(5));
        assert!(x.mul(&PAdic::exact_zero(5)).is_exact_zero());
    }

    #[test]
    fn powers() {
        let x = PAdic::from_rational(&rat(2, 5), 5, 8);
        let cube = x.pow(3).unwrap();
        assert!(cube.agrees_to(&PAdic::from_rational(&rat(8, 125), 5, 4), 4));
        let back = cube.mul(&x.pow(-3).unwrap());
        assert_eq!(back.valuation(), Valuation::Exactly(0));
        assert_eq!(back.unit().unwrap(), &BigUint::one());
    }

    #[test]
    fn residues() {
        assert_eq!(PAdic::from_i64(12, 5, 6).residue_mod_p().unwrap(), 2);
        assert_eq!(PAdic::from_i64(25, 5, 6).residue_mod_p().unwrap(), 0);
        assert_eq!(PAdic::exact_zero(5).residue_mod_p().unwrap(), 0);
        assert!(PAdic::bounded_zero(5, 0).residue_mod_p().is_err());
    }

    #[test]
    fn truncation() {
        let x = PAdic::from_i64(50, 5, 12);
        let t = x.truncate_to(4);
        assert_eq!(t.abs_precision(), Some(4));
        assert_eq!(t.valuation(), Valuation::Exactly(2));
        assert!(x.truncate_to(2).is_zero_at_precision());
        assert!(PAdic::exact_zero(5).truncate_to(2).is_exact_zero());
    }

    fn arb_rat() -> impl Strategy<Value = Rational> {
        (-2000i64..2000, 1i64..400).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn ring_ops_agree_with_exact_rationals(a in arb_rat(), b in arb_rat(), p in prop::sample::select(vec![2u64, 3, 5, 7, 13])) {
            let abs = 12i64;
            let pa = PAdic::from_rational(&a, p, abs);
            let pb = PAdic::from_rational(&b, p, abs);

            let sum = pa.add(&pb);
            let sum_exact = PAdic::from_rational(&(a.clone() + b.clone()), p, abs);
            let k = sum.abs_precision().unwrap_or(abs).min(abs);
            prop_assert!(sum.agrees_to(&sum_exact, k));

            // the product's certified precision can exceed `abs` when both
            // factors have positive valuation; compare at the oracle's
            let prod = pa.mul(&pb);
            let prod_exact = PAdic::from_rational(&(a.clone() * b.clone()), p, abs);
            let k = prod.abs_precision().unwrap_or(abs).min(abs);
            prop_assert!(prod.agrees_to(&prod_exact, k));
        }

        #[test]
        fn inversion_agrees_with_exact_rationals(a in arb_rat(), p in prop::sample::select(vec![2u64, 3, 5, 7, 13])) {
            prop_assume!(!a.is_zero());
            let abs = 14i64;
            let pa = PAdic::from_rational(&a, p, abs);
            if let Ok(inv) = pa.inv() {
                let inv_exact = PAdic::from_rational(&(Rational::from(rat_i64(1).numer().clone()) / a), p, abs);
                let k = inv.abs_precision().unwrap().min(abs);
                prop_assert!(inv.agrees_to(&inv_exact, k));
            }
        }
    }
}

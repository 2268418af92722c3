//! Power-sum polynomials, iterated chain-sum coefficients, and elimination
//! of nonnegative exponents from strict chain sums.
//!
//! The backbone is Faulhaber's formula in the `B_1 = -1/2` normalization:
//!
//! ```text
//! P_l(m) = sum_{0 <= u < m} u^l = (1/(l+1)) sum_{j=0}^{l} C(l+1, j) B_j m^{l+1-j}
//! ```
//!
//! a polynomial with zero constant term, exact for every `m >= 0`. Iterating
//! it through ascending chains `0 <= n_1 < ... < n_r < m` gives the
//! coefficients `B_b^{(l_r,...,l_1)}` (the coefficient of `m^b`); depth one
//! recovers `B_b^{(l)} = (1/(l+1)) C(l+1, b) B_{l+1-b}`.
//!
//! [`eliminate_positive_powers`] rewrites a strict chain sum whose variables
//! carry mixed-sign exponents as a combination `sum c * m^b * T_m(J)` of
//! powers of the bound and unweighted harmonic sums `T_m(J)` (negative
//! exponents only). It repeatedly sums out the innermost variable that has a
//! nonnegative exponent, using `sum_{a < u < b} u^e = P_e(b) - P_e(a+1)`;
//! the only subtlety is the value `0^0 = 1` at the chain's bottom, handled
//! by an explicit lower-bound flag. The rewriting is exact for every
//! `m >= 1`.

use crate::arith::{bernoulli, binom_u64, rat_i64, Rational};
use crate::words::CompositionIndex;
use num_traits::{One, Pow, Zero};
use std::collections::BTreeMap;

/// A polynomial in one variable `m` with rational coefficients,
/// `coeffs[k]` being the coefficient of `m^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyInM {
    coeffs: Vec<Rational>,
}

impl PolyInM {
    pub fn zero() -> Self {
        PolyInM { coeffs: Vec::new() }
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        let mut p = PolyInM { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// The coefficient of `m^k` (zero beyond the degree).
    pub fn coeff(&self, k: u32) -> Rational {
        self.coeffs.get(k as usize).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero monomials as `(exponent, coefficient)` pairs.
    pub fn monomials(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u32, c))
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_u64(&self, x: u64) -> Rational {
        self.eval_rational(&rat_i64(x as i64))
    }

    pub fn add_scaled(&mut self, other: &PolyInM, by: &Rational) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Rational::zero());
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            self.coeffs[k] += c * by;
        }
        self.trim();
    }
}

/// `P_l(m) = sum_{0 <= u < m} u^l` via Faulhaber's formula. Exact for all
/// `m >= 0`, zero constant term, degree `l + 1`.
pub fn power_sum_poly(l: u32) -> PolyInM {
    let mut coeffs = vec![Rational::zero(); l as usize + 2];
    let scale = Rational::one() / rat_i64(i64::from(l) + 1);
    for j in 0..=l {
        let c = Rational::from(binom_u64(u64::from(l) + 1, u64::from(j))) * bernoulli(j);
        coeffs[(l + 1 - j) as usize] = c * &scale;
    }
    PolyInM::from_coeffs(coeffs)
}

/// The chain-sum polynomial `sum_{0 <= n_1 < ... < n_r < m} prod n_i^{l_i}`
/// in `m`, with `ls` stored outermost first (`l_r, ..., l_1`). The empty
/// list gives the constant 1 (the empty chain).
pub fn chain_power_poly(ls: &[u32]) -> PolyInM {
    let r = ls.len();
    if r == 0 {
        return PolyInM::from_coeffs(vec![Rational::one()]);
    }
    // innermost first: R_1 = P_{l_1}, then R_k = sum of monomial-shifted P's
    let mut poly = power_sum_poly(ls[r - 1]);
    for i in (0..r - 1).rev() {
        let lk = ls[i];
        let mut next = PolyInM::zero();
        for (s, c) in poly.monomials() {
            next.add_scaled(&power_sum_poly(lk + s), c);
        }
        poly = next;
    }
    poly
}

/// The coefficient `B_b^{(l_r,...,l_1)} = [m^b] chain_power_poly`. In
/// particular `B_0` always vanishes (chain sums have no constant term).
pub fn b_coeff(ls: &[u32], b: u32) -> Rational {
    chain_power_poly(ls).coeff(b)
}

/// A strict ascending chain sum with integer exponents:
///
/// ```text
/// sum_{lo <= u_1 < u_2 < ... < u_r < m} prod_i u_i^{e_i}
/// ```
///
/// with `exps` stored **innermost first** (`e_1` first) and `lo` either 0 or
/// 1 (`inner_min_one`). Summands use `0^0 = 1`; a zero variable raised to a
/// negative exponent never occurs in the sums this models, and the brute
/// evaluator drops such terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSumSpec {
    pub exps: Vec<i64>,
    pub inner_min_one: bool,
}

impl ChainSumSpec {
    /// The standard chain with inclusive-at-zero lower bound.
    pub fn strict_chain(exps: Vec<i64>) -> Self {
        ChainSumSpec { exps, inner_min_one: false }
    }

    /// Literal nested evaluation, for cross-checking. `m >= 1`.
    pub fn eval_brute(&self, m: u64) -> Rational {
        fn go(exps: &[i64], level: usize, lo: u64, m: u64) -> Rational {
            if level == exps.len() {
                return Rational::one();
            }
            let e = exps[level];
            let mut acc = Rational::zero();
            for u in lo..m {
                let factor = if u == 0 {
                    match e.cmp(&0) {
                        std::cmp::Ordering::Equal => Rational::one(),
                        _ => continue, // 0^{pos} = 0; 0^{neg} dropped
                    }
                } else {
                    rat_i64(u as i64).pow(e as i32)
                };
                acc += factor * go(exps, level + 1, u + 1, m);
            }
            acc
        }
        assert!(m >= 1, "chain sums are compared for m >= 1");
        let lo = if self.inner_min_one { 1 } else { 0 };
        go(&self.exps, 0, lo, m)
    }
}

/// One term of an eliminated chain sum: `coeff * m^{m_power} * T_m(har)`,
/// where `T_m(J)` is the **unweighted** harmonic sum
/// `sum_{0 < u_1 < ... < u_d < m} prod u_i^{-j_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElimTerm {
    pub coeff: Rational,
    pub m_power: u32,
    pub har: CompositionIndex,
}

/// Rewrite the chain sum with no nonnegative exponents left: the result is
/// a finite combination of `m^b * T_m(J)`, exact for every `m >= 1`.
pub fn eliminate_positive_powers(spec: &ChainSumSpec) -> Vec<ElimTerm> {
    let mut out: BTreeMap<(u32, CompositionIndex), Rational> = BTreeMap::new();
    eliminate_rec(&spec.exps, spec.inner_min_one, &Rational::one(), 0, &mut out);
    out.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((m_power, har), coeff)| ElimTerm { coeff, m_power, har })
        .collect()
}

fn record(
    out: &mut BTreeMap<(u32, CompositionIndex), Rational>,
    m_power: u32,
    har: CompositionIndex,
    coeff: &Rational,
) {
    *out.entry((m_power, har)).or_insert_with(Rational::zero) += coeff;
}

fn eliminate_rec(
    exps: &[i64],
    inner_min_one: bool,
    coeff: &Rational,
    m_power: u32,
    out: &mut BTreeMap<(u32, CompositionIndex), Rational>,
) {
    if coeff.is_zero() {
        return;
    }
    if exps.is_empty() {
        record(out, m_power, CompositionIndex::empty(), coeff);
        return;
    }
    // a negative innermost exponent drops the u = 0 summand outright, so
    // the chain equals its bottom-open version; normalizing now keeps later
    // exponent merges (which may lift the exponent to 0) honest about it
    let inner_min_one = inner_min_one || exps[0] < 0;
    let Some(j) = exps.iter().position(|&e| e >= 0) else {
        // all exponents negative: an unweighted harmonic sum; composition
        // parts are outermost first, exps are innermost first
        let parts: Vec<u32> = exps.iter().rev().map(|&e| (-e) as u32).collect();
        record(out, m_power, CompositionIndex::new(parts), coeff);
        return;
    };
    let e = exps[j] as u32;
    let poly = power_sum_poly(e);
    let last = exps.len() - 1;
    // summing out u_j against its upper neighbour (or the bound m):
    // sum_{.. < u_j < upper} u_j^e = P_e(upper), minus the lower-bound
    // correction handled below
    for (t, c) in poly.monomials() {
        let c = coeff * c;
        let mut new_exps: Vec<i64> = Vec::with_capacity(exps.len() - 1);
        new_exps.extend_from_slice(&exps[..j]);
        new_exps.extend_from_slice(&exps[j + 1..]);
        let new_flag = if j == 0 { true } else { inner_min_one };
        if j == last {
            eliminate_rec(&new_exps, new_flag, &c, m_power + t, out);
        } else {
            new_exps[j] += i64::from(t);
            eliminate_rec(&new_exps, new_flag, &c, m_power, out);
        }
    }
    if j > 0 {
        // subtract P_e(u_{j-1} + 1), expanded binomially onto u_{j-1}
        for (t, c) in poly.monomials() {
            for s in 0..=t {
                let c = -(coeff * c) * Rational::from(binom_u64(u64::from(t), u64::from(s)));
                let mut new_exps: Vec<i64> = Vec::with_capacity(exps.len() - 1);
                new_exps.extend_from_slice(&exps[..j]);
                new_exps.extend_from_slice(&exps[j + 1..]);
                new_exps[j - 1] += i64::from(s);
                eliminate_rec(&new_exps, inner_min_one, &c, m_power, out);
            }
        }
    } else if inner_min_one && e == 0 {
        // the P_e identity counted u_0 = 0 (as 0^0 = 1); remove it, the
        // next variable keeping the at-least-one bound
        eliminate_rec(&exps[1..], true, &-coeff.clone(), m_power, out);
    }
}

//! Sparse truncated noncommutative power series over the two-letter
//! alphabet, generic in the coefficient ring.
//!
//! A series holds a `BTreeMap` from words to coefficients together with a
//! weight cutoff (and optional depth cutoff); every operation truncates to
//! the tightest cutoffs of its inputs, so a coefficient that survives is
//! always the true coefficient of the untruncated computation. For p-adic
//! coefficients, absent words mean exact zero, while "zero at declared
//! precision" coefficients are kept explicitly — pruning them would forget
//! uncertainty.
//!
//! The operations beyond ring arithmetic are the ones the adjoint theory
//! needs: the antipode, the weight scaling `tau`, substitution `e1 -> g`,
//! the conjugate `g^{-1} e1 g`, Ihara composition and its inverse, and the
//! stabilized evaluation of `lim_l f[e0^l w]` with a certified precision.

use crate::arith::{ArithError, PAdic, Rational, Valuation};
use crate::words::word::{Letter, Word};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Coefficient ring operations, with "contextual" constructors: a `PAdic`
/// coefficient carries its prime and precision, so `1` and small integers
/// are manufactured *like* an existing exemplar, with enough precision
/// headroom (64 digits over the exemplar's absolute precision) that they
/// are never the precision bottleneck.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn c_add(&self, other: &Self) -> Self;
    fn c_sub(&self, other: &Self) -> Self;
    fn c_mul(&self, other: &Self) -> Self;
    fn c_neg(&self) -> Self;
    /// True only for coefficients that are *exactly* zero and thus safe to
    /// drop from sparse storage.
    fn is_prunable(&self) -> bool;
    fn one_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn try_c_inv(&self) -> Result<Self, ArithError>;
}

impl Coeff for Rational {
    fn c_add(&self, other: &Self) -> Self {
        self + other
    }
    fn c_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn c_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn c_neg(&self) -> Self {
        -self
    }
    fn is_prunable(&self) -> bool {
        self.is_zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        crate::arith::rat_i64(n)
    }
    fn try_c_inv(&self) -> Result<Self, ArithError> {
        if self.is_zero() {
            return Err(ArithError::InversionOfZero { what: "zero rational".into() });
        }
        Ok(Rational::one() / self)
    }
}

impl Coeff for PAdic {
    fn c_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn c_sub(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn c_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn c_neg(&self) -> Self {
        self.neg()
    }
    fn is_prunable(&self) -> bool {
        self.is_exact_zero()
    }
    fn one_like(&self) -> Self {
        let rel = self.abs_precision().unwrap_or(64).max(1) + 64;
        PAdic::one_to_rel(self.prime(), rel)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        let abs = self.abs_precision().unwrap_or(64) + 64;
        PAdic::from_i64(n, self.prime(), abs)
    }
    fn try_c_inv(&self) -> Result<Self, ArithError> {
        self.inv()
    }
}

fn combine_weight(a: u32, b: u32) -> u32 {
    a.min(b)
}

fn combine_depth(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (None, d) | (d, None) => d,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

/// A truncated noncommutative series. See the module docs.
#[derive(Debug, Clone, PartialEq)]
pub struct NcSeries<C> {
    terms: BTreeMap<Word, C>,
    weight_cutoff: u32,
    depth_cutoff: Option<u32>,
}

impl<C: Coeff> NcSeries<C> {
    pub fn new(weight_cutoff: u32, depth_cutoff: Option<u32>) -> Self {
        NcSeries { terms: BTreeMap::new(), weight_cutoff, depth_cutoff }
    }

    /// The unit series `one * empty-word`.
    pub fn unit(one: C, weight_cutoff: u32, depth_cutoff: Option<u32>) -> Self {
        let mut s = Self::new(weight_cutoff, depth_cutoff);
        s.insert_add(Word::empty(), one);
        s
    }

    /// A single term `c * w`.
    pub fn single(w: Word, c: C, weight_cutoff: u32, depth_cutoff: Option<u32>) -> Self {
        let mut s = Self::new(weight_cutoff, depth_cutoff);
        s.insert_add(w, c);
        s
    }

    pub fn weight_cutoff(&self) -> u32 {
        self.weight_cutoff
    }

    pub fn depth_cutoff(&self) -> Option<u32> {
        self.depth_cutoff
    }

    /// Whether a word survives this series' truncation.
    pub fn admits(&self, w: &Word) -> bool {
        w.weight() <= self.weight_cutoff
            && self.depth_cutoff.map_or(true, |d| w.depth() <= d)
    }

    /// Add `c` to the coefficient of `w`, silently truncating out-of-cutoff
    /// words and pruning exact zeros.
    pub fn insert_add(&mut self, w: Word, c: C) {
        if !self.admits(&w) || c.is_prunable() {
            return;
        }
        match self.terms.remove(&w) {
            None => {
                self.terms.insert(w, c);
            }
            Some(old) => {
                let merged = old.c_add(&c);
                if !merged.is_prunable() {
                    self.terms.insert(w, merged);
                }
            }
        }
    }

    pub fn get(&self, w: &Word) -> Option<&C> {
        self.terms.get(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty_series(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_weight(&self) -> Option<u32> {
        self.terms.keys().map(|w| w.weight()).min()
    }

    pub fn map_coeffs<F: Fn(&Word, &C) -> C>(&self, f: F) -> Self {
        let mut out = Self::new(self.weight_cutoff, self.depth_cutoff);
        for (w, c) in &self.terms {
            out.insert_add(*w, f(w, c));
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::new(
            combine_weight(self.weight_cutoff, other.weight_cutoff),
            combine_depth(self.depth_cutoff, other.depth_cutoff),
        );
        for (w, c) in &self.terms {
            out.insert_add(*w, c.clone());
        }
        for (w, c) in &other.terms {
            out.insert_add(*w, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.negate())
    }

    pub fn negate(&self) -> Self {
        self.map_coeffs(|_, c| c.c_neg())
    }

    pub fn scale(&self, by: &C) -> Self {
        self.map_coeffs(|_, c| c.c_mul(by))
    }

    pub fn scale_i64(&self, by: i64) -> Self {
        match self.terms.values().next() {
            None => self.clone(),
            Some(ex) => self.scale(&ex.from_i64_like(by)),
        }
    }

    fn add_scaled_in_place(&mut self, other: &Self, by: &C) {
        for (w, c) in &other.terms {
            self.insert_add(*w, c.c_mul(by));
        }
    }

    /// Concatenation product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::new(
            combine_weight(self.weight_cutoff, other.weight_cutoff),
            combine_depth(self.depth_cutoff, other.depth_cutoff),
        );
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                if w1.weight() + w2.weight() > out.weight_cutoff {
                    continue;
                }
                out.insert_add(w1.concat(w2), c1.c_mul(c2));
            }
        }
        out
    }

    /// The antipode of the shuffle Hopf algebra's dual side as it acts on
    /// series: `S(f)[w] = (-1)^{|w|} f[reverse(w)]`.
    pub fn antipode(&self) -> Self {
        let mut out = Self::new(self.weight_cutoff, self.depth_cutoff);
        for (w, c) in &self.terms {
            let c = if w.len() % 2 == 0 { c.clone() } else { c.c_neg() };
            out.insert_add(w.reversed(), c);
        }
        out
    }

    /// Scale the weight-`k` part by `lambda^k`.
    pub fn tau_scale(&self, lambda: &C) -> Self {
        let mut powers: Vec<C> = Vec::with_capacity(self.weight_cutoff as usize + 1);
        powers.push(lambda.one_like());
        for k in 1..=self.weight_cutoff as usize {
            powers.push(powers[k - 1].c_mul(lambda));
        }
        self.map_coeffs(|w, c| c.c_mul(&powers[w.weight() as usize]))
    }

    pub fn tau_scale_i64(&self, m: i64) -> Self {
        match self.terms.values().next() {
            None => self.clone(),
            Some(ex) => self.tau_scale(&ex.from_i64_like(m)),
        }
    }

    /// The homogeneous part of weight `k`.
    pub fn pr_weight(&self, k: u32) -> Self {
        let mut out = Self::new(self.weight_cutoff, self.depth_cutoff);
        for (w, c) in &self.terms {
            if w.weight() == k {
                out.insert_add(*w, c.clone());
            }
        }
        out
    }

    /// Tighten the weight cutoff.
    pub fn truncate_weight(&self, k: u32) -> Self {
        let mut out = Self::new(self.weight_cutoff.min(k), self.depth_cutoff);
        for (w, c) in &self.terms {
            out.insert_add(*w, c.clone());
        }
        out
    }

    /// All words re-keyed with `e0` appended on the right (the image of
    /// multiplying by `e0` under substitution maps).
    fn shift_right_e0(&self) -> Self {
        let mut out = Self::new(self.weight_cutoff, self.depth_cutoff);
        for (w, c) in &self.terms {
            out.insert_add(w.push_e0(), c.clone());
        }
        out
    }

    /// Multiplicative inverse via the geometric series; requires an
    /// invertible constant term.
    pub fn inverse(&self) -> Result<Self, ArithError> {
        let c0 = self.get(&Word::empty()).ok_or_else(|| ArithError::InversionOfZero {
            what: "series with vanishing constant term".into(),
        })?;
        let c0_inv = c0.try_c_inv()?;
        let one = c0.one_like();
        let unit = Self::unit(one, self.weight_cutoff, self.depth_cutoff);
        let r = unit.sub(&self.scale(&c0_inv));
        let mut acc = unit.clone();
        let mut pw = unit;
        for _ in 1..=self.weight_cutoff {
            pw = pw.mul(&r);
            if pw.is_empty_series() {
                break;
            }
            acc = acc.add(&pw);
        }
        Ok(acc.scale(&c0_inv))
    }

    /// Substitute `e0 -> e0`, `e1 -> g`, extended multiplicatively over
    /// words and linearly over the series. Prefix images are memoized.
    pub fn substitute_e1(&self, g: &Self, one: &C) -> Self {
        let wc = combine_weight(self.weight_cutoff, g.weight_cutoff);
        let mut memo: HashMap<Word, NcSeries<C>> = HashMap::new();
        memo.insert(Word::empty(), NcSeries::unit(one.clone(), wc, None));
        let mut out = NcSeries::new(wc, None);
        for (w, c) in &self.terms {
            let img = Self::image_under_subst(*w, g, wc, &mut memo);
            out.add_scaled_in_place(&img, c);
        }
        out
    }

    fn image_under_subst(
        w: Word,
        g: &Self,
        wc: u32,
        memo: &mut HashMap<Word, NcSeries<C>>,
    ) -> NcSeries<C> {
        if let Some(hit) = memo.get(&w) {
            return hit.clone();
        }
        let (prefix, last) = w.drop_last().expect("empty word is pre-seeded in the memo");
        let base = Self::image_under_subst(prefix, g, wc, memo);
        let img = match last {
            Letter::E0 => base.shift_right_e0(),
            Letter::E1 => base.mul(g),
        };
        memo.insert(w, img.clone());
        img
    }

    /// The conjugate `self^{-1} * e1 * self`.
    pub fn adjoint_e1(&self, one: &C) -> Result<Self, ArithError> {
        let e1 = Self::single(Word::e1(), one.clone(), self.weight_cutoff, None);
        Ok(self.inverse()?.mul(&e1).mul(self))
    }

    /// Exponential of a series with vanishing constant term.
    pub fn exp(&self, one: &C) -> Self {
        assert!(
            self.get(&Word::empty()).is_none(),
            "exp needs a vanishing constant term"
        );
        let unit = Self::unit(one.clone(), self.weight_cutoff, self.depth_cutoff);
        let mut acc = unit.clone();
        let mut pw = unit;
        for k in 1..=i64::from(self.weight_cutoff) {
            let inv_k = pw
                .terms
                .values()
                .next()
                .map(|ex| ex.from_i64_like(k).try_c_inv().expect("nonzero integer"));
            pw = pw.mul(self);
            let Some(inv_k) = inv_k else { break };
            pw = pw.scale(&inv_k);
            if pw.is_empty_series() {
                break;
            }
            acc = acc.add(&pw);
        }
        acc
    }
}

/// Ihara composition `g . f = g * f(e0, g^{-1} e1 g)`.
pub fn ihara<C: Coeff>(g: &NcSeries<C>, f: &NcSeries<C>, one: &C) -> Result<NcSeries<C>, ArithError> {
    let ad = g.adjoint_e1(one)?;
    Ok(g.mul(&f.substitute_e1(&ad, one)))
}

/// The inverse of `f` for Ihara composition: the series `h` with
/// `ihara(h, f) = 1`, for `f` with constant term 1. Found by weight-graded
/// correction: a weight-`k` perturbation of `h` moves `ihara(h, f)` by the
/// same amount in weight `k` and only in higher weights elsewhere.
pub fn ihara_inverse<C: Coeff>(f: &NcSeries<C>, one: &C) -> Result<NcSeries<C>, ArithError> {
    assert!(
        f.get(&Word::empty()).is_some(),
        "ihara inverse needs an invertible constant term"
    );
    let unit = NcSeries::unit(one.clone(), f.weight_cutoff(), f.depth_cutoff());
    let mut h = unit.clone();
    for k in 1..=f.weight_cutoff() {
        let e = ihara(&h, f, one)?;
        let dk = e.sub(&unit).pr_weight(k);
        if dk.is_empty_series() {
            continue;
        }
        h = h.sub(&dk);
    }
    Ok(h)
}

impl NcSeries<Rational> {
    /// Reduce every coefficient to a p-adic value at absolute precision
    /// `abs`.
    pub fn to_padic(&self, p: u64, abs: i64) -> NcSeries<PAdic> {
        let mut out = NcSeries::new(self.weight_cutoff, self.depth_cutoff);
        for (w, c) in &self.terms {
            out.insert_add(*w, PAdic::from_rational(c, p, abs));
        }
        out
    }
}

/// Per-bidegree valuation lower bounds of a p-adic series: for each
/// `(weight, depth)` with at least one stored coefficient carrying
/// information, the minimum certified lower bound, and whether some
/// coefficient attains it exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationProfile {
    pub entries: BTreeMap<(u32, u32), (i64, bool)>,
}

impl fmt::Display for ValuationProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for ((wt, d), (bound, attained)) in &self.entries {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            let marker = if *attained { "=" } else { ">=" };
            write!(f, "({wt},{d}): v{marker}{bound}")?;
        }
        Ok(())
    }
}

/// Errors from stabilized limit extraction.
#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum LimitError {
    #[error("sequence did not stabilize: {detail}")]
    NotStabilized { detail: String },
    #[error("too few terms to certify a limit: {detail}")]
    TooFewTerms { detail: String },
}

/// A stabilized limit value with its certified absolute precision
/// (`None` = the limit is exact).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct E0Limit {
    pub value: PAdic,
    pub certified_abs: Option<i64>,
    pub inspected: usize,
}

/// Declare the last entry of `seq` to be the limit, certified to the
/// minimum of the last two increments' valuations (capped by the entry's
/// own precision). Errors out if fewer than three entries exist or the
/// increments' valuations strictly deteriorate.
pub fn stabilize(seq: &[PAdic]) -> Result<E0Limit, LimitError> {
    let n = seq.len();
    if n < 3 {
        return Err(LimitError::TooFewTerms {
            detail: format!("need at least 3 entries, have {n}"),
        });
    }
    let last = &seq[n - 1];
    let d_last = last.sub(&seq[n - 2]);
    let d_prev = seq[n - 2].sub(&seq[n - 3]);
    let v_last = d_last.valuation().lower_bound();
    let v_prev = d_prev.valuation().lower_bound();
    match (v_prev, v_last) {
        (Some(vp_), Some(vl)) if vl < vp_ => {
            return Err(LimitError::NotStabilized {
                detail: format!("increment valuations deteriorate ({vp_} then {vl})"),
            });
        }
        (None, Some(vl)) => {
            return Err(LimitError::NotStabilized {
                detail: format!("exact agreement followed by an increment of valuation {vl}"),
            });
        }
        _ => {}
    }
    let mut certified: Option<i64> = last.abs_precision();
    for v in [v_last, v_prev].into_iter().flatten() {
        certified = Some(certified.map_or(v, |c| c.min(v)));
    }
    let value = match certified {
        Some(a) => last.truncate_to(a),
        None => last.clone(),
    };
    Ok(E0Limit { value, certified_abs: certified, inspected: n })
}

impl NcSeries<PAdic> {
    /// Valuation lower bounds per `(weight, depth)` bidegree. Exact-zero
    /// coefficients are unconstrained and skipped; "zero at precision
    /// `abs`" contributes the bound `abs`.
    pub fn valuation_profile(&self) -> ValuationProfile {
        let mut entries: BTreeMap<(u32, u32), (i64, bool)> = BTreeMap::new();
        for (w, c) in &self.terms {
            let (bound, attained) = match c.valuation() {
                Valuation::Infinite => continue,
                Valuation::AtLeast(a) => (a, false),
                Valuation::Exactly(v) => (v, true),
            };
            entries
                .entry((w.weight(), w.depth()))
                .and_modify(|e| {
                    if bound < e.0 {
                        *e = (bound, attained);
                    } else if bound == e.0 {
                        e.1 |= attained;
                    }
                })
                .or_insert((bound, attained));
        }
        ValuationProfile { entries }
    }

    /// The stabilized value of `f[e0^l w]` as `l` grows to the weight
    /// cutoff, with certified precision from the last two increments.
    pub fn limit_e0(&self, w: &Word) -> Result<E0Limit, LimitError> {
        assert!(
            w.weight() <= self.weight_cutoff,
            "limit word already exceeds the weight cutoff"
        );
        let p = match self.terms.values().next() {
            Some(c) => c.prime(),
            None => {
                return Err(LimitError::TooFewTerms { detail: "empty series".into() });
            }
        };
        let lmax = (self.weight_cutoff - w.weight()) as usize;
        let seq: Vec<PAdic> = (0..=lmax)
            .map(|l| {
                self.get(&w.prepend_e0_run(l as u32))
                    .cloned()
                    .unwrap_or_else(|| PAdic::exact_zero(p))
            })
            .collect();
        stabilize(&seq)
    }
}

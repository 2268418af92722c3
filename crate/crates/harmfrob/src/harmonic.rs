//! Weighted multiple harmonic sums and their finite shadows.
//!
//! For a composition index `I = (n_d, ..., n_1)` (outermost part first) the
//! weighted sum is
//!
//! ```text
//! har_m(I) = m^{weight(I)} * sum_{0 < m_1 < ... < m_d < m} prod_i m_i^{-n_i}
//! ```
//!
//! with `n_1` weighting the innermost (smallest) variable. Evaluation is a
//! prefix-sum dynamic program: `S_0 == 1` and
//! `S_j(t) = sum_{0 < u < t} S_{j-1}(u) u^{-n_j}`, giving
//! `har_m(I) = m^{weight} S_d(m)` in `O(d m)` ring operations. The same
//! program runs over exact rationals, over p-adics (with working precision
//! padded so the certified output precision survives the internal
//! divisions), and over `Z/p` for the finite (mod p) values.
//!
//! Two structural facts are load-bearing downstream and tested here: for
//! `m = p^alpha` the weighted sum is a p-adic integer of valuation at least
//! `weight(I)`, and its residue `p^{-weight} har_{p^alpha}(I) mod p` does
//! not depend on `alpha`.

use crate::arith::{binom_int, rat_i64, vp_biguint, PAdic, Rational};
use crate::words::CompositionIndex;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow, Zero};
use std::collections::HashMap;

/// `har_m(I)` as an exact rational.
pub fn har_rational(m: u64, index: &CompositionIndex) -> Rational {
    har_range_rational(m, index).pop().expect("range includes m")
}

/// `har_t(I)` for every `t = 0, ..., m` (entry 0 is a placeholder zero;
/// `har_1` of a nonempty index is 0 because the summation range is empty).
pub fn har_range_rational(m: u64, index: &CompositionIndex) -> Vec<Rational> {
    let parts = index.parts();
    let d = parts.len();
    let len = m as usize + 1;
    // S_j as a running array over t; level j consumes the j-th innermost
    // part, which is parts[d - j] in outermost-first storage.
    let mut level: Vec<Rational> = vec![Rational::one(); len];
    for j in 1..=d {
        let n = parts[d - j];
        let mut next = Vec::with_capacity(len);
        next.push(Rational::zero());
        let mut acc = Rational::zero();
        for t in 1..len {
            let u = t - 1;
            if u >= 1 {
                acc += &level[u] * rat_i64(u as i64).pow(-(n as i32));
            }
            next.push(acc.clone());
        }
        level = next;
    }
    let wt = index.weight();
    (0..len)
        .map(|t| rat_i64(t as i64).pow(wt as i32) * &level[t])
        .collect()
}

/// A table of `har_m(I)` for a fixed `m` and every composition `I` of
/// weight up to `max_weight`, sharing the suffix dynamic programs: the
/// inner array of `(n_d, ..., n_1)` is exactly the array of
/// `(n_{d-1}, ..., n_1)`, so a full sweep costs one array per composition.
pub struct HarTable {
    m: u64,
    max_weight: u32,
    arrays: HashMap<Vec<u32>, Vec<Rational>>,
}

impl HarTable {
    pub fn new(m: u64, max_weight: u32) -> Self {
        HarTable { m, max_weight, arrays: HashMap::new() }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    fn array_for(&mut self, suffix: &[u32]) -> &Vec<Rational> {
        if !self.arrays.contains_key(suffix) {
            let len = self.m as usize + 1;
            let array = if suffix.is_empty() {
                vec![Rational::one(); len]
            } else {
                let n = suffix[0];
                let inner = self.array_for(&suffix[1..]).clone();
                let mut next = Vec::with_capacity(len);
                next.push(Rational::zero());
                let mut acc = Rational::zero();
                for t in 1..len {
                    let u = t - 1;
                    if u >= 1 {
                        acc += &inner[u] * rat_i64(u as i64).pow(-(n as i32));
                    }
                    next.push(acc.clone());
                }
                next
            };
            self.arrays.insert(suffix.to_vec(), array);
        }
        &self.arrays[suffix]
    }

    /// `har_m(I)`, computed once and shared through suffix reuse.
    pub fn get(&mut self, index: &CompositionIndex) -> Rational {
        assert!(
            index.weight() <= self.max_weight,
            "index weight {} exceeds table bound {}",
            index.weight(),
            self.max_weight
        );
        let m = self.m;
        let wt = index.weight();
        let tail = self.array_for(index.parts())[m as usize].clone();
        rat_i64(m as i64).pow(wt as i32) * tail
    }
}

/// `har_m(I)` as a p-adic number certified to absolute precision at least
/// `target_abs`. The dynamic program runs at a padded working precision
/// (`target_abs + 2 * v_p(m) * weight + 4`) because interior divisions by
/// multiples of `p` erode absolute precision.
pub fn har_padic(m: u64, index: &CompositionIndex, p: u64, target_abs: i64) -> PAdic {
    assert!(m >= 1, "har is defined for m >= 1");
    if index.is_empty() {
        return PAdic::from_i64(1, p, target_abs.max(1) + 4);
    }
    if m == 1 {
        return PAdic::exact_zero(p);
    }
    let wt = index.weight() as i64;
    let vm = vp_biguint(&BigUint::from(m), p);
    let parts = index.parts();
    let d = parts.len();
    let len = m as usize + 1;
    // The padding estimate can fall short when the range is rich in high
    // powers of p (erosion compounds across levels), so treat it as a first
    // guess and redo the sweep with more headroom until the tracked output
    // precision actually reaches the target.
    let mut extra = 0i64;
    loop {
        let work = target_abs.max(1) + 2 * vm * wt + 4 + extra;
        let mut level: Vec<PAdic> = vec![PAdic::from_i64(1, p, work); len];
        for j in 1..=d {
            let n = parts[d - j];
            let mut next = Vec::with_capacity(len);
            next.push(PAdic::exact_zero(p));
            let mut acc = PAdic::exact_zero(p);
            for t in 1..len {
                let u = t - 1;
                if u >= 1 {
                    let term = PAdic::from_i64(u as i64, p, work)
                        .pow(-(n as i64))
                        .expect("u >= 1 is invertible");
                    acc = acc.add(&level[u].mul(&term));
                }
                next.push(acc.clone());
            }
            level = next;
        }
        let weight_factor =
            PAdic::from_bigint(&BigInt::from(m).pow(wt as u32), p, wt * vm + work);
        let out = weight_factor.mul(&level[m as usize]);
        if out.abs_precision().map_or(true, |a| a >= target_abs) {
            return out;
        }
        extra = if extra == 0 { 4 } else { extra * 2 };
        assert!(extra <= 1 << 20, "working precision for har_{m} does not stabilize");
    }
}

/// `har_{p^alpha}(I)` certified to at least `target_abs`.
pub fn har_prime_power(p: u64, alpha: u32, index: &CompositionIndex, target_abs: i64) -> PAdic {
    let m = p.checked_pow(alpha).expect("p^alpha fits in u64");
    har_padic(m, index, p, target_abs)
}

/// The finite (mod p) multiple zeta value: the residue
/// `p^{-weight} har_p(I) mod p`, equal to the unweighted sum
/// `sum_{0 < m_1 < ... < m_d < p} prod m_i^{-n_i} mod p`. Requires `p`
/// prime (the interior sums need every `u < p` invertible).
pub fn finite_mzv(p: u64, index: &CompositionIndex) -> u64 {
    assert!(p >= 2, "finite values need a prime modulus");
    assert!(p < 1 << 31, "modulus too large for the u64 arithmetic here");
    let parts = index.parts();
    let d = parts.len();
    let len = p as usize + 1;
    let mut level: Vec<u64> = vec![1; len];
    for j in 1..=d {
        let n = parts[d - j];
        let mut next = Vec::with_capacity(len);
        next.push(0);
        let mut acc = 0u64;
        for t in 1..len {
            let u = t as u64 - 1;
            if u >= 1 {
                let inv = mod_pow(u, p - 2, p);
                let term = mod_pow(inv, u64::from(n), p);
                acc = (acc + level[t - 1] * term) % p;
            }
            next.push(acc);
        }
        level = next;
    }
    level[len - 1]
}

fn mod_pow(mut base: u64, mut e: u64, p: u64) -> u64 {
    base %= p;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// The extension of `har_m` to indices with a formal leading `e0`-block of
/// length `l_f`: distributing `r` extra exponent units over the `d + 1`
/// slots (one virtual outer slot plus the `d` real parts) with generalized
/// binomial weights,
///
/// ```text
/// sum_{r_{d+1} + ... + r_1 = r} C(-l_f, r_{d+1}) prod_i C(-n_i, r_i)
///     har_m(n_d + r_d, ..., n_1 + r_1)
/// ```
///
/// a polynomial in `l_f` of degree at most `r`, returned as coefficients
/// `[c_0, ..., c_r]`.
pub fn har_extended(m: u64, index: &CompositionIndex, r: u32) -> Vec<Rational> {
    let d = index.parts().len();
    let mut out = vec![Rational::zero(); r as usize + 1];
    // enumerate distributions (r_{d+1}, r_d, ..., r_1) of r
    let mut dist = vec![0u32; d + 1];
    distribute(m, index, r, 0, &mut dist, &mut out);
    out
}

fn distribute(
    m: u64,
    index: &CompositionIndex,
    remaining: u32,
    slot: usize,
    dist: &mut Vec<u32>,
    out: &mut Vec<Rational>,
) {
    let d = index.parts().len();
    if slot == d {
        // dist[0] is the virtual outer slot, dist[1..=d] the parts in
        // storage order; the innermost slot absorbs what remains.
        dist[d] = remaining;
        let r_virtual = dist[0];
        let mut coeff = Rational::one();
        let mut parts = Vec::with_capacity(d);
        for i in 0..d {
            let n = index.parts()[i];
            let ri = dist[i + 1];
            coeff *= Rational::from(binom_int(-(i64::from(n)), ri));
            parts.push(n + ri);
        }
        if coeff.is_zero() {
            return;
        }
        let har = har_rational(m, &CompositionIndex::new(parts));
        if har.is_zero() {
            return;
        }
        // C(-l_f, r_virtual) as a polynomial in l_f
        let poly = binom_neg_x_poly(r_virtual);
        for (k, c) in poly.iter().enumerate() {
            out[k] += c * &coeff * &har;
        }
        return;
    }
    for take in 0..=remaining {
        dist[slot] = take;
        distribute(m, index, remaining - take, slot + 1, dist, out);
    }
    dist[slot] = 0;
}

/// `C(-X, k)` expanded as a polynomial in `X`: `prod_{i=0}^{k-1} (-X - i) / k!`.
fn binom_neg_x_poly(k: u32) -> Vec<Rational> {
    let mut poly = vec![Rational::one()];
    for i in 0..i64::from(k) {
        // multiply by (-X - i)
        let mut next = vec![Rational::zero(); poly.len() + 1];
        for (deg, c) in poly.iter().enumerate() {
            next[deg] += c * rat_i64(-i);
            next[deg + 1] += c * rat_i64(-1);
        }
        poly = next;
    }
    let kfact = Rational::from(crate::arith::factorial(k));
    poly.into_iter().map(|c| c / &kfact).collect()
}

/// A memo of `har_{p^alpha}` values at one fixed `(p, alpha)` and working
/// precision, shared by the expansion evaluators and the adjoint-table
/// builder (which request the same indices over and over).
pub struct HarPaCache {
    p: u64,
    alpha: u32,
    abs: i64,
    values: HashMap<CompositionIndex, PAdic>,
}

impl HarPaCache {
    pub fn new(p: u64, alpha: u32, abs: i64) -> Self {
        HarPaCache { p, alpha, abs, values: HashMap::new() }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn abs(&self) -> i64 {
        self.abs
    }

    pub fn get(&mut self, index: &CompositionIndex) -> PAdic {
        if let Some(hit) = self.values.get(index) {
            return hit.clone();
        }
        let v = har_prime_power(self.p, self.alpha, index, self.abs);
        self.values.insert(index.clone(), v.clone());
        v
    }
}

/// Observed data for the alpha-independence of finite residues: for each
/// requested `alpha`, whether `v_p(har_{p^alpha}(I)) >= weight(I)` held,
/// and the residue `p^{-weight} har_{p^alpha}(I) mod p`.
#[derive(Debug, Clone)]
pub struct AlphaIndependence {
    pub p: u64,
    pub index: CompositionIndex,
    pub rows: Vec<(u32, bool, u64)>,
    pub residues_equal: bool,
}

pub fn alpha_independence(p: u64, index: &CompositionIndex, alphas: &[u32]) -> AlphaIndependence {
    let wt = index.weight() as i64;
    let mut rows = Vec::new();
    for &alpha in alphas {
        let val = har_prime_power(p, alpha, index, wt + 2);
        let valuation_ok = val.valuation().at_least(wt);
        let residue = val
            .scale_pow_p(-wt)
            .residue_mod_p()
            .expect("precision wt+2 leaves 2 digits after unweighting");
        rows.push((alpha, valuation_ok, residue));
    }
    let residues_equal = rows.windows(2).all(|w| w[0].2 == w[1].2);
    AlphaIndependence { p, index: index.clone(), rows, residues_equal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn comp(parts: &[u32]) -> CompositionIndex {
        CompositionIndex::new(parts.to_vec())
    }

    /// Brute-force oracle: literal nested summation.
    fn har_brute(m: u64, index: &CompositionIndex) -> Rational {
        let inner_first: Vec<u32> = index.parts().iter().rev().copied().collect();
        fn go(inner_first: &[u32], level: usize, lo: u64, m: u64) -> Rational {
            if level == inner_first.len() {
                return Rational::one();
            }
            let n = inner_first[level];
            let mut acc = Rational::zero();
            for u in lo..m {
                acc += rat_i64(u as i64).pow(-(n as i32))
                    * go(inner_first, level + 1, u + 1, m);
            }
            acc
        }
        rat_i64(m as i64).pow(index.weight() as i32) * go(&inner_first, 0, 1, m)
    }

    #[test]
    fn dp_matches_brute_force() {
        let indices = [
            comp(&[1]),
            comp(&[2]),
            comp(&[1, 1]),
            comp(&[2, 1]),
            comp(&[1, 2]),
            comp(&[3, 1]),
            comp(&[1, 1, 2]),
            comp(&[2, 1, 1]),
        ];
        for m in 1..=12u64 {
            for i in &indices {
                assert_eq!(har_rational(m, i), har_brute(m, i), "m={m}, I=({i})");
            }
        }
    }

    #[test]
    fn pinned_small_values() {
        // har_3(1) = 3(1 + 1/2) = 9/2; har_3(2) = 9(1 + 1/4) = 45/4
        assert_eq!(har_rational(3, &comp(&[1])), rat(9, 2));
        assert_eq!(har_rational(3, &comp(&[2])), rat(45, 4));
        // har_3(1,1) = 9 * (1/(1*2)) = 9/2
        assert_eq!(har_rational(3, &comp(&[1, 1])), rat(9, 2));
        // empty index sums over the empty chain
        assert_eq!(har_rational(7, &CompositionIndex::empty()), rat_i64(1));
        // m = 1 leaves no room for any variable
        assert_eq!(har_rational(1, &comp(&[3, 1])), Rational::zero());
    }

    #[test]
    fn innermost_part_is_the_last_one() {
        // (2,1): inner variable has exponent 1, outer has 2:
        // har_3(2,1) = 27 * 1^{-1} 2^{-2} = 27/4
        assert_eq!(har_rational(3, &comp(&[2, 1])), rat(27, 4));
        // (1,2): inner variable has exponent 2:
        // har_3(1,2) = 27 * 1^{-2} 2^{-1} = 27/2
        assert_eq!(har_rational(3, &comp(&[1, 2])), rat(27, 2));
    }

    #[test]
    fn range_agrees_with_single_evaluations() {
        let i = comp(&[2, 1]);
        let range = har_range_rational(9, &i);
        for m in 1..=9u64 {
            assert_eq!(range[m as usize], har_rational(m, &i));
        }
    }

    #[test]
    fn table_shares_suffixes_and_agrees() {
        let mut table = HarTable::new(8, 6);
        for i in [comp(&[1]), comp(&[2, 1]), comp(&[3, 2, 1]), comp(&[1, 1])] {
            assert_eq!(table.get(&i), har_rational(8, &i), "I=({i})");
        }
    }

    #[test]
    fn stuffle_har_compatibility_example() {
        // har(1) har(1) = 2 har(1,1) + har(2) at every m
        for m in 2..=15u64 {
            let lhs = har_rational(m, &comp(&[1])).pow(2);
            let rhs = rat_i64(2) * har_rational(m, &comp(&[1, 1]))
                + har_rational(m, &comp(&[2]));
            assert_eq!(lhs, rhs, "m={m}");
        }
    }

    #[test]
    fn padic_agrees_with_rational() {
        for (m, p) in [(6u64, 5u64), (25, 5), (9, 3), (8, 2), (10, 7)] {
            for i in [comp(&[2, 1]), comp(&[1, 1]), comp(&[3])] {
                let exact = har_rational(m, &i);
                let padic = har_padic(m, &i, p, 8);
                let a = padic.abs_precision().unwrap_or(8).min(8);
                assert!(
                    padic.agrees_to(&PAdic::from_rational(&exact, p, a), a),
                    "m={m}, p={p}, I=({i})"
                );
                assert!(a >= 8, "certified precision shortfall at m={m}, p={p}, I=({i})");
            }
        }
    }

    #[test]
    fn prime_power_values_have_high_valuation() {
        // v_p(har_{p^alpha}(I)) >= weight(I)
        for (p, alpha) in [(5u64, 1u32), (5, 2), (7, 1), (7, 2), (3, 3), (13, 1)] {
            for i in [comp(&[1]), comp(&[2, 1]), comp(&[1, 1]), comp(&[2, 2])] {
                let wt = i.weight() as i64;
                let v = har_prime_power(p, alpha, &i, wt + 2);
                assert!(
                    v.valuation().at_least(wt),
                    "v_{p}(har_{{p^{alpha}}}({i})) = {}, want >= {wt}",
                    v.valuation()
                );
            }
        }
    }

    #[test]
    fn residues_do_not_depend_on_alpha() {
        for p in [3u64, 5, 7, 11] {
            for i in [comp(&[1]), comp(&[2, 1]), comp(&[1, 1, 1])] {
                let report = alpha_independence(p, &i, &[1, 2, 3]);
                assert!(report.rows.iter().all(|r| r.1), "valuation fact at p={p}, I=({i})");
                assert!(report.residues_equal, "residues differ at p={p}, I=({i})");
            }
        }
    }

    /// Independent finite-value oracle: reduce the exact rational.
    fn finite_from_rational(p: u64, i: &CompositionIndex) -> u64 {
        let exact = har_rational(p, i); // p^{wt} * S_d(p)
        let wt = i.weight() as i64;
        let unweighted = PAdic::from_rational(&exact, p, wt + 2).scale_pow_p(-wt);
        unweighted.residue_mod_p().unwrap()
    }

    #[test]
    fn finite_values_match_exact_reduction() {
        for p in [5u64, 7, 11, 13] {
            for i in [
                comp(&[1]),
                comp(&[2]),
                comp(&[1, 1]),
                comp(&[2, 1]),
                comp(&[1, 2]),
                comp(&[2, 2]),
            ] {
                assert_eq!(
                    finite_mzv(p, &i),
                    finite_from_rational(p, &i),
                    "p={p}, I=({i})"
                );
            }
        }
    }

    #[test]
    fn finite_depth_one_reflection() {
        // sum_{0<u<p} u^{-n} mod p vanishes unless (p-1) | n
        for p in [5u64, 7, 11, 13, 17] {
            for n in 1..=5u32 {
                let v = finite_mzv(p, &comp(&[n]));
                if u64::from(n) % (p - 1) == 0 {
                    assert_eq!(v, p - 1, "p={p}, n={n}");
                } else {
                    assert_eq!(v, 0, "p={p}, n={n}");
                }
            }
        }
    }

    #[test]
    fn extended_har_pinned_example() {
        // m = 3, I = (1), r = 1: the two distributions give
        // C(-l_f,1) har_3(1) + C(-1,1) har_3(2) = -(9/2) l_f - 45/4
        let poly = har_extended(3, &comp(&[1]), 1);
        assert_eq!(poly, vec![rat(-45, 4), rat(-9, 2)]);
        // r = 0 collapses to the plain value
        assert_eq!(har_extended(3, &comp(&[1]), 0), vec![rat(9, 2)]);
    }

    #[test]
    fn extended_har_specializes_to_concatenation() {
        // at l_f = 0 the virtual slot contributes only r_virtual = 0 terms:
        // evaluating the polynomial at 0 must equal the r-distribution over
        // real slots only
        let i = comp(&[2, 1]);
        let poly = har_extended(5, &i, 2);
        let at_zero = poly[0].clone();
        let mut expect = Rational::zero();
        for r2 in 0..=2u32 {
            let r1 = 2 - r2;
            expect += Rational::from(binom_int(-2, r2))
                * Rational::from(binom_int(-1, r1))
                * har_rational(5, &comp(&[2 + r2, 1 + r1]));
        }
        assert_eq!(at_zero, expect);
    }
}

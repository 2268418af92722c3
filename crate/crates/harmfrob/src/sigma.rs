//! Expansion of `har_{p^alpha * m}` over divisibility patterns.
//!
//! Write every index in the chain `0 < m_1 < ... < m_d < p^alpha * m` as
//! `m_i = p^alpha * u_i + r_i` with `0 <= r_i < p^alpha`.  Sorting the chain
//! by which `m_i` are divisible by `p^alpha` (the `r_i = 0` positions) and
//! expanding each non-divisible factor
//!
//! ```text
//! m_i^{-n_i} = (p^alpha u_i + r_i)^{-n_i}
//!            = sum_{l >= 0} C(-n_i, l) (p^alpha)^l u_i^l r_i^{-(n_i + l)}
//! ```
//!
//! turns `har_{p^alpha m}(n_d, ..., n_1)` into a finite-plus-tail combination
//!
//! ```text
//! sum  c * m^delta * har_m(J) * prod_g har_{p^alpha}(K_g)
//! ```
//!
//! with rational `c` free of both `p^alpha` and `m`: the inner chains over
//! the `u_i` are genuine power-sum chains eliminated by
//! [`eliminate_positive_powers`], the tied runs of nonzero remainders
//! reassemble into `har_{p^alpha}` factors, and every explicit power of
//! `p^alpha` cancels against the weight normalisations.  The tail consists of
//! the binomial terms whose `har_{p^alpha}` factors exceed a chosen total
//! weight; since `v_p(har_{p^alpha}(K)) >= weight(K)`, truncating at weight
//! `N` leaves an error of valuation roughly `N` (see `DEFAULT_MARGIN`).
//!
//! Two consumers sit on top of the raw expansion:
//!
//! * [`SigmaExpansion::extract_adjoint`] reads off the terms with no
//!   `har_m` factor and `m`-exponent `weight + b`; these are exactly the
//!   coefficient of the depth-`b` slot in the associated adjoint series,
//!   expressed as a polynomial in `har_{p^alpha}` values.
//! * [`iterate_depth1`] specialises the expansion to depth one and
//!   `m = p^{alpha - alpha0}`, expressing `har_{p^alpha}(n)` through
//!   `har_{p^alpha0}` values — an independent oracle for the composition of
//!   two harmonic actions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;

use crate::arith::{binom_int, vp_bigint, PAdic, Rational};
use crate::harmonic::{har_padic, HarPaCache};
use crate::powersum::{b_coeff, eliminate_positive_powers, ChainSumSpec};
use crate::words::CompositionIndex;

/// Default slack subtracted from truncation-induced precision certificates.
///
/// Dropped tail terms carry `har_{p^alpha}` factors of total weight at least
/// `N + 1`, hence valuation at least `N + 1`; their rational coefficients
/// (products of binomials and Faulhaber coefficients) can contribute a small
/// negative valuation, bounded in practice by 2 for the primes (`p >= 5`)
/// and weights this library targets.
pub const DEFAULT_MARGIN: i64 = 2;

/// One term of the expansion: `coeff * m^{m_power} * har_m(har_m) * prod
/// har_{p^alpha}(K)` over the factors `K` in `har_pa`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaTerm {
    pub coeff: Rational,
    pub m_power: u32,
    pub har_m: CompositionIndex,
    /// Sorted; each entry is the index of one weighted `har_{p^alpha}` factor.
    pub har_pa: Vec<CompositionIndex>,
}

impl SigmaTerm {
    /// Total weight of the `har_{p^alpha}` part, the quantity the cutoff
    /// truncates on.
    pub fn pa_weight(&self) -> u32 {
        self.har_pa.iter().map(|k| k.weight()).sum()
    }
}

impl fmt::Display for SigmaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        if self.m_power > 0 {
            write!(f, " * m^{}", self.m_power)?;
        }
        if !self.har_m.is_empty() {
            write!(f, " * har_m{}", self.har_m)?;
        }
        for k in &self.har_pa {
            write!(f, " * har_pa{k}")?;
        }
        Ok(())
    }
}

/// The truncated expansion of `har_{p^alpha * m}(index)`.
#[derive(Debug, Clone)]
pub struct SigmaExpansion {
    pub index: CompositionIndex,
    /// Terms whose `har_{p^alpha}` factors total more than this weight were
    /// dropped.
    pub weight_cutoff: u32,
    pub terms: Vec<SigmaTerm>,
}

/// Largest valuation `v_p(u)` over `1 <= u < m`; zero when `m <= p`.
///
/// Bounds the denominator valuations a `har_m` factor can contribute when
/// `p` is smaller than `m`.
fn max_vp_below(p: u64, m: u64) -> i64 {
    let mut v = 0i64;
    let mut q = p;
    while q < m {
        v += 1;
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    v
}

fn elim_cached(
    cache: &mut HashMap<(Vec<i64>, bool), Vec<(Rational, u32, CompositionIndex)>>,
    exps: &[i64],
    inner_min_one: bool,
) -> Vec<(Rational, u32, CompositionIndex)> {
    let key = (exps.to_vec(), inner_min_one);
    if let Some(hit) = cache.get(&key) {
        return hit.clone();
    }
    let spec = ChainSumSpec { exps: exps.to_vec(), inner_min_one };
    let out: Vec<_> = eliminate_positive_powers(&spec)
        .into_iter()
        .map(|t| (t.coeff, t.m_power, t.har))
        .collect();
    cache.insert(key, out.clone());
    out
}

/// Expand `har_{p^alpha * m}(index)` into `har_m` and `har_{p^alpha}`
/// contributions, keeping terms whose `har_{p^alpha}` factors have total
/// weight at most `weight_cutoff`.
///
/// The result is exact in `m` (a finite polynomial identity in the formal
/// symbols `m^j`, `har_m(J)`, `har_{p^alpha}(K)`) up to the stated tail.
pub fn expand_sigma(index: &CompositionIndex, weight_cutoff: u32) -> SigmaExpansion {
    let d = index.depth() as usize;
    assert!(d <= 16, "expansion enumerates 2^depth patterns; depth {d} is out of range");
    assert!(
        weight_cutoff >= index.weight(),
        "cutoff {weight_cutoff} below the index weight {}: every term with a \
         fully non-divisible pattern would be dropped",
        index.weight()
    );

    // parts() is outermost-first; var i (0-based, innermost-first) has
    // exponent n[i].
    let n: Vec<u32> = index.parts().iter().rev().copied().collect();
    let wt = index.weight() as i64;

    let mut merged: BTreeMap<(u32, CompositionIndex, Vec<CompositionIndex>), Rational> =
        BTreeMap::new();
    let mut elim_cache = HashMap::new();

    if d == 0 {
        // har_{p^alpha * m}(empty) = 1 = 1 * m^0 * har_m(empty).
        return SigmaExpansion {
            index: index.clone(),
            weight_cutoff,
            terms: vec![SigmaTerm {
                coeff: Rational::from_integer(1.into()),
                m_power: 0,
                har_m: CompositionIndex::empty(),
                har_pa: Vec::new(),
            }],
        };
    }

    // Divisibility patterns: bit i set means var i (innermost-first) has
    // r_i = 0, i.e. p^alpha | m_{i+1}.
    for mask in 0u32..(1u32 << d) {
        let div = |i: usize| mask >> i & 1 == 1;

        // Link i sits between vars i and i+1.  It admits a tie branch
        // (u_i = u_{i+1}) exactly when the upper var is non-divisible:
        //   (div, div)        m_i < m_{i+1}  <=>  u_i < u_{i+1}
        //   (nondiv, div)     likewise strict
        //   (div, nondiv)     <=>  u_i <= u_{i+1}
        //   (nondiv, nondiv)  <=>  u_i < u_{i+1}, or u_i = u_{i+1} and
        //                          r_i < r_{i+1}
        let tieable: Vec<usize> = (0..d - 1).filter(|&i| !div(i + 1)).collect();

        for tie_bits in 0u32..(1u32 << tieable.len()) {
            let mut tied = vec![false; d.max(1) - 1];
            for (j, &link) in tieable.iter().enumerate() {
                if tie_bits >> j & 1 == 1 {
                    tied[link] = true;
                }
            }

            // u-groups: contiguous runs of vars joined by ties, listed
            // innermost-first.  Consecutive groups are strictly ordered.
            let mut u_groups: Vec<Vec<usize>> = vec![vec![0]];
            for i in 1..d {
                if tied[i - 1] {
                    u_groups.last_mut().unwrap().push(i);
                } else {
                    u_groups.push(vec![i]);
                }
            }

            // r-groups: runs of non-divisible vars joined by ties at
            // (nondiv, nondiv) links.  Each run carries a strictly
            // increasing chain 0 < r_{j_1} < ... < r_{j_k} < p^alpha.
            let mut r_groups: Vec<Vec<usize>> = Vec::new();
            for i in 0..d {
                if div(i) {
                    continue;
                }
                let chains = i > 0 && tied[i - 1] && !div(i - 1);
                if chains {
                    r_groups.last_mut().unwrap().push(i);
                } else {
                    r_groups.push(vec![i]);
                }
            }

            let nondiv_vars: Vec<usize> = (0..d).filter(|&i| !div(i)).collect();
            let base_weight: u32 = nondiv_vars.iter().map(|&i| n[i]).sum();
            if base_weight > weight_cutoff {
                continue;
            }

            // Enumerate l-assignments for the non-divisible vars, subject to
            // sum (n_i + l_i) <= weight_cutoff.
            let budget = weight_cutoff - base_weight;
            let mut ls = vec![0u32; nondiv_vars.len()];
            enumerate_ls(&nondiv_vars, budget, 0, &mut ls, &mut |ls| {
                // Binomial coefficient prod C(-n_i, l_i).
                let mut coeff = Rational::from_integer(1.into());
                for (slot, &i) in nondiv_vars.iter().enumerate() {
                    coeff *= Rational::from_integer(binom_int(
                        -(n[i] as i64),
                        ls[slot],
                    ));
                }

                let l_of = |i: usize| -> u32 {
                    let slot = nondiv_vars.iter().position(|&j| j == i).unwrap();
                    ls[slot]
                };

                // har_{p^alpha} factors: one per r-group, parts (n + l) in
                // decreasing var order (the outermost part of the
                // composition is the largest r of the chain).
                let mut har_pa: Vec<CompositionIndex> = r_groups
                    .iter()
                    .map(|grp| {
                        let parts: Vec<u32> =
                            grp.iter().rev().map(|&i| n[i] + l_of(i)).collect();
                        CompositionIndex::new(parts)
                    })
                    .collect();
                har_pa.sort();

                // u-chain over the groups: divisible members contribute
                // u^{-n}, non-divisible ones u^{+l}.
                let exps: Vec<i64> = u_groups
                    .iter()
                    .map(|grp| {
                        grp.iter()
                            .map(|&i| {
                                if div(i) {
                                    -(n[i] as i64)
                                } else {
                                    l_of(i) as i64
                                }
                            })
                            .sum()
                    })
                    .collect();
                // The chain starts at u >= 1 exactly when the innermost var
                // is divisible (m_1 = p^alpha u_1 > 0); otherwise u_1 = 0 is
                // admissible since r_1 >= 1 already makes m_1 positive.
                let inner_min_one = div(0);

                for (c, b, har_m) in elim_cached(&mut elim_cache, &exps, inner_min_one) {
                    let delta = wt + b as i64 - har_m.weight() as i64;
                    assert!(
                        delta >= 0,
                        "m-exponent went negative: weight {wt}, b {b}, \
                         har_m {har_m}"
                    );
                    let key = (delta as u32, har_m, har_pa.clone());
                    let slot = merged.entry(key).or_insert_with(Rational::zero);
                    *slot += &coeff * c;
                }
            });
        }
    }

    let terms: Vec<SigmaTerm> = merged
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((m_power, har_m, har_pa), coeff)| SigmaTerm { coeff, m_power, har_m, har_pa })
        .collect();

    SigmaExpansion { index: index.clone(), weight_cutoff, terms }
}

fn enumerate_ls(
    nondiv_vars: &[usize],
    budget: u32,
    pos: usize,
    ls: &mut Vec<u32>,
    f: &mut impl FnMut(&[u32]),
) {
    if pos == nondiv_vars.len() {
        f(ls);
        return;
    }
    for l in 0..=budget {
        ls[pos] = l;
        enumerate_ls(nondiv_vars, budget - l, pos + 1, ls, f);
    }
    ls[pos] = 0;
}

impl SigmaExpansion {
    /// Evaluate the truncated expansion at concrete `p`, `alpha`, `m`.
    ///
    /// The certified absolute precision accounts for the truncation tail:
    /// dropped terms have valuation at least `weight_cutoff + 1 - margin`
    /// minus the worst denominator contribution a `har_m` factor can make
    /// (`weight(index) * max_{u<m} v_p(u)`, zero whenever `m <= p`).
    pub fn evaluate(&self, p: u64, alpha: u32, m: u64, margin: i64) -> PAdic {
        assert!(m >= 1, "evaluation needs m >= 1");
        let n_cut = self.weight_cutoff as i64;
        let certified =
            n_cut + 1 - margin - self.index.weight() as i64 * max_vp_below(p, m);
        let work = n_cut + 6 + self.index.weight() as i64 * max_vp_below(p, m);

        let mut pa_cache = HarPaCache::new(p, alpha, work);
        let mut m_cache: HashMap<CompositionIndex, PAdic> = HashMap::new();

        let mut acc = PAdic::exact_zero(p);
        for term in &self.terms {
            let mut val = PAdic::from_rational(&term.coeff, p, work);
            if term.m_power > 0 {
                let mp = num_bigint::BigInt::from(m).pow(term.m_power);
                let v = vp_bigint(&mp, p);
                val = val.mul(&PAdic::from_bigint(&mp, p, work + v));
            }
            if !term.har_m.is_empty() {
                let hm = m_cache
                    .entry(term.har_m.clone())
                    .or_insert_with(|| har_padic(m, &term.har_m, p, work));
                val = val.mul(hm);
            }
            for k in &term.har_pa {
                val = val.mul(&pa_cache.get(k));
            }
            acc = acc.add(&val);
        }
        acc.truncate_to(certified)
    }
}

/// The coefficient of one slot of the adjoint series, as a rational
/// combination of products of `har_{p^alpha}` values.
///
/// Extracted from a [`SigmaExpansion`]: the terms carrying no `har_m` factor
/// and `m`-exponent `weight(index) + b` are precisely the depth-`b` slot of
/// the limit of `m^{-weight} har_{p^alpha m}` as a series in `m`.
#[derive(Debug, Clone)]
pub struct AdjointCombination {
    pub b: u32,
    pub index: CompositionIndex,
    pub weight_cutoff: u32,
    pub terms: Vec<(Rational, Vec<CompositionIndex>)>,
}

impl AdjointCombination {
    /// Numeric value of the slot at concrete `(p, alpha)`.
    pub fn evaluate(&self, p: u64, alpha: u32, margin: i64) -> PAdic {
        let n_cut = self.weight_cutoff as i64;
        let certified = n_cut + 1 - margin;
        let work = n_cut + 6;
        let mut pa_cache = HarPaCache::new(p, alpha, work);
        self.evaluate_with(p, &mut pa_cache).truncate_to(certified)
    }

    /// Same, but reusing a caller-owned `har_{p^alpha}` cache (no final
    /// truncation: the caller owns the certificate bookkeeping).
    pub fn evaluate_with(&self, p: u64, pa_cache: &mut HarPaCache) -> PAdic {
        let mut acc = PAdic::exact_zero(p);
        for (coeff, factors) in &self.terms {
            let mut val = PAdic::from_rational(coeff, p, pa_cache.abs());
            for k in factors {
                val = val.mul(&pa_cache.get(k));
            }
            acc = acc.add(&val);
        }
        acc
    }
}

impl SigmaExpansion {
    /// Extract the depth-`b` adjoint slot: terms with no `har_m` factor and
    /// `m`-exponent `weight(index) + b`.
    pub fn extract_adjoint(&self, b: u32) -> AdjointCombination {
        let want = self.index.weight() + b;
        let terms: Vec<(Rational, Vec<CompositionIndex>)> = self
            .terms
            .iter()
            .filter(|t| t.har_m.is_empty() && t.m_power == want)
            .map(|t| (t.coeff.clone(), t.har_pa.clone()))
            .collect();
        AdjointCombination {
            b,
            index: self.index.clone(),
            weight_cutoff: self.weight_cutoff,
            terms,
        }
    }

    /// Largest `b` for which the truncated expansion can still contain the
    /// full depth-`b` slot.
    pub fn max_slot(&self) -> u32 {
        self.terms
            .iter()
            .filter(|t| t.har_m.is_empty())
            .map(|t| t.m_power - self.index.weight().min(t.m_power))
            .max()
            .unwrap_or(0)
    }
}

/// Express `har_{p^alpha}(n)` through `har_{p^alpha0}` values, `alpha0 |
/// alpha`, by iterating the depth-one expansion:
///
/// ```text
/// har_{p^alpha}(n) = sum_{b >= 1} (p^{alpha(n+b)} - 1) / (p^{alpha0(n+b)} - 1)
///                    * sum_{l >= b-1} C(-n, l) B_b^{(l)} har_{p^alpha0}(n + l)
/// ```
///
/// where `B_b^{(l)}` is the coefficient of `m^b` in the power-sum polynomial
/// `P_l`.  At `alpha = alpha0` the geometric factor is 1 and the right side
/// collapses, term by term, to the expansion of `har_{p^alpha0 * 1}` — a
/// pure rearrangement.  For proper divisors this is an independent route to
/// `har_{p^alpha}` that never computes a chain longer than `p^alpha0`.
///
/// Terms with `n + l > weight_cutoff` are dropped; the result is certified to
/// absolute precision `weight_cutoff + 1 - margin`.
pub fn iterate_depth1(
    n: u32,
    p: u64,
    alpha0: u32,
    alpha: u32,
    weight_cutoff: u32,
    margin: i64,
) -> PAdic {
    assert!(n >= 1, "depth-one index must be at least 1");
    assert!(alpha0 >= 1 && alpha % alpha0 == 0, "alpha0 must divide alpha");
    assert!(weight_cutoff >= n, "cutoff below the index weight");
    let k = alpha / alpha0;
    let n_cut = weight_cutoff as i64;
    let certified = n_cut + 1 - margin;
    let work = n_cut + 6;

    let mut pa_cache = HarPaCache::new(p, alpha0, work);
    let p_big = num_bigint::BigInt::from(p);

    let mut acc = PAdic::exact_zero(p);
    for b in 1..=(weight_cutoff - n + 1) {
        // geo = 1 + p^{alpha0(n+b)} + ... + p^{(k-1) alpha0 (n+b)}
        let step = p_big.pow(alpha0 * (n + b));
        let mut geo = num_bigint::BigInt::from(0);
        let mut pw = num_bigint::BigInt::from(1);
        for _ in 0..k {
            geo += &pw;
            pw *= &step;
        }
        let geo_val = vp_bigint(&geo, p);
        let geo_p = PAdic::from_bigint(&geo, p, work + geo_val);

        let mut inner = PAdic::exact_zero(p);
        for l in (b - 1)..=(weight_cutoff - n) {
            let c = Rational::from_integer(binom_int(-(n as i64), l)) * b_coeff(&[l], b);
            if c.is_zero() {
                continue;
            }
            let har = pa_cache.get(&CompositionIndex::new(vec![n + l]));
            inner = inner.add(&PAdic::from_rational(&c, p, work).mul(&har));
        }
        acc = acc.add(&geo_p.mul(&inner));
    }
    acc.truncate_to(certified)
}

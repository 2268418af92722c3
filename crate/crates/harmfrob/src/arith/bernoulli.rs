//! Bernoulli numbers in the `B_1 = -1/2` normalization.
//!
//! The normalization is forced by the closed sums we use them in: with
//! `B_1 = -1/2` the power-sum polynomial `P_l(m) = sum_{0 <= u < m} u^l`
//! is exactly `(1/(l+1)) sum_j C(l+1, j) B_j m^{l+1-j}`, with the summation
//! range genuinely below `m`. The generating function is `t/(e^t - 1)`.

use super::rational::{binom_u64, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::cell::RefCell;

thread_local! {
    static CACHE: RefCell<Vec<Rational>> = const { RefCell::new(Vec::new()) };
}

/// The Bernoulli number `B_l`, memoized per thread.
///
/// Computed from the recurrence `sum_{j=0}^{m} C(m+1, j) B_j = 0` for
/// `m >= 1`, which pins `B_0 = 1`, `B_1 = -1/2`, and `B_odd = 0` beyond 1.
pub fn bernoulli(l: u32) -> Rational {
    CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        if cache.is_empty() {
            cache.push(Rational::one());
        }
        while cache.len() <= l as usize {
            let m = cache.len() as u64; // computing B_m
            let mut acc = Rational::zero();
            for (j, bj) in cache.iter().enumerate() {
                acc += Rational::from(binom_u64(m + 1, j as u64)) * bj;
            }
            let bm = -acc / Rational::from(BigInt::from(m + 1));
            cache.push(bm);
        }
        cache[l as usize].clone()
    })
}

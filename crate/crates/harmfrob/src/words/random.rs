//! Seeded random words and series for the verification harness.
//!
//! The identity families are checked on random group-like elements: those
//! are built as exponentials of random Lie elements (random linear
//! combinations of iterated bracket trees in `e0`, `e1`), which makes every
//! shuffle relation hold exactly — a property the harness then perturbs to
//! confirm its checks have teeth.

use crate::arith::{rat, rat_i64, Rational};
use crate::words::series::NcSeries;
use crate::words::word::{Letter, Word};
use rand::Rng;

/// A uniformly random word of the given length.
pub fn random_word<R: Rng>(rng: &mut R, len: usize) -> Word {
    let mut w = Word::empty();
    for _ in 0..len {
        w = w.push(if rng.gen_bool(0.5) { Letter::E0 } else { Letter::E1 });
    }
    w
}

/// A sparse random series with small rational coefficients: `terms` words
/// of weight between 1 and the cutoff.
pub fn random_series<R: Rng>(rng: &mut R, weight_cutoff: u32, terms: usize) -> NcSeries<Rational> {
    let mut s = NcSeries::new(weight_cutoff, None);
    for _ in 0..terms {
        let len = rng.gen_range(1..=weight_cutoff as usize);
        let num = rng.gen_range(-6i64..=6);
        let den = rng.gen_range(1i64..=4);
        s.insert_add(random_word(rng, len), rat(num, den));
    }
    s
}

/// A random Lie element: a small linear combination of iterated brackets
/// `[x, [y, [...]]]` of the letters, so its exponential is group-like.
pub fn random_primitive<R: Rng>(
    rng: &mut R,
    weight_cutoff: u32,
    brackets: usize,
) -> NcSeries<Rational> {
    let one = rat_i64(1);
    let letter = |l: Letter| {
        NcSeries::single(Word::empty().push(l), one.clone(), weight_cutoff, None)
    };
    let mut acc = NcSeries::new(weight_cutoff, None);
    for _ in 0..brackets {
        // right-nested bracket of random length
        let len = rng.gen_range(1..=weight_cutoff.min(4) as usize);
        let mut elt = letter(if rng.gen_bool(0.5) { Letter::E0 } else { Letter::E1 });
        for _ in 1..len {
            let next = letter(if rng.gen_bool(0.5) { Letter::E0 } else { Letter::E1 });
            // [next, elt] = next*elt - elt*next
            elt = next.mul(&elt).sub(&elt.mul(&next));
        }
        let num = rng.gen_range(-4i64..=4);
        let den = rng.gen_range(1i64..=3);
        acc = acc.add(&elt.scale(&rat(num, den)));
    }
    acc
}

/// A random group-like series (constant term 1, shuffle relations exact):
/// the exponential of [`random_primitive`].
pub fn random_grouplike<R: Rng>(
    rng: &mut R,
    weight_cutoff: u32,
    brackets: usize,
) -> NcSeries<Rational> {
    random_primitive(rng, weight_cutoff, brackets).exp(&rat_i64(1))
}

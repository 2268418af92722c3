//! Weighted multiple harmonic sums, p-adic multiple zeta values, and the
//! adjoint relations between them, computed with certified p-adic precision.
//!
//! The layers build on each other roughly bottom-up:
//!
//! * [`arith`] — exact rationals, Bernoulli numbers, generalized binomials,
//!   and a p-adic number type that tracks absolute precision through every
//!   operation.
//! * [`words`] — words in the two letters `e0`, `e1`, composition indices,
//!   truncated noncommutative power series, and the Hopf-algebra operations
//!   on them (shuffle, quasi-shuffle, antipode, Ihara composition).
//! * [`harmonic`] — the prefix-sum evaluator for weighted multiple harmonic
//!   sums `har_m`, their finite (mod p) shadows, and the extension of `har`
//!   to trailing-`e0` words as polynomials in a formal leading-block length.
//! * [`powersum`] — Faulhaber polynomials, the `B_b^{l_r,...,l_1}` chain-sum
//!   coefficients, and elimination of nonnegative exponents from strict
//!   chain sums.
//! * [`sigma`] — the divisibility-pattern expansion of `har_{p^α m}` into
//!   `har_m` and `har_{p^α}` pieces, adjoint-coefficient extraction, and the
//!   depth-one change-of-exponent iteration.
//! * [`adjoint`] — depth-one p-adic zeta values, tables of adjoint
//!   coefficients, their resummation back to `har_{p^α}`, the Λ-adic
//!   packaging, and the harmonic composition action.
//! * [`relations`] — a harness that evaluates the identity families
//!   numerically and reports pass/fail with certified defect valuations.
//! * [`store`] — the on-disk value cache and run configuration shared by the
//!   command-line interface.
//!
//! Numbers are exact (`BigRational`) wherever a computation is finite, and
//! p-adic with explicit absolute precision wherever a series has to be
//! truncated. Nothing in the crate ever reports more precision than the
//! propagation rules justify.

pub mod arith;
pub mod words;
pub mod harmonic;
pub mod powersum;
pub mod sigma;
pub mod adjoint;
pub mod relations;
pub mod store;

pub use arith::{PAdic, Rational, Valuation};
pub use words::{CompositionIndex, NcSeries, Word};

//! Exact and p-adic arithmetic primitives.
//!
//! Everything in the higher layers funnels through this module: exact
//! rational helpers (factorials, binomials with arbitrary integer upper
//! argument, p-adic valuations of rationals), the Bernoulli numbers in the
//! `B_1 = -1/2` normalization, and [`PAdic`], a p-adic number carrying a
//! certified absolute precision.

mod bernoulli;
mod padic;
mod rational;

pub use bernoulli::bernoulli;
pub use padic::{ArithError, PAdic, Valuation};
pub use rational::{
    binom_int, binom_rational, binom_u64, factorial, is_integer, rat, rat_i64, vp_bigint,
    vp_biguint, vp_rational, Rational,
};

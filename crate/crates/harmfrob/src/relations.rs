//! Relation checks, run as data and reported as machine-readable records.
//!
//! Every check in this module follows the same discipline: assemble the
//! identity under test as a signed combination of *atoms* (harmonic values,
//! adjoint table entries, Bernoulli-type coefficients, binomials, depth-one
//! zeta values), evaluate the combination p-adically, and report the
//! certified valuation of the defect against a requested threshold.  The
//! [`Report`] records never assert in the mathematical sense: a check whose
//! identity fails under the recorded sign conventions still produces a
//! report, with the defect valuation as data.  Callers (the CLI `verify`
//! subcommand, the acceptance suite) decide which reports gate.
//!
//! Two infrastructural points keep the reports reproducible:
//!
//! * all randomized checks draw from a caller-seeded ChaCha stream, and
//! * checks execute sequentially, so the only nondeterministic field of a
//!   report is its `millis` timing, which consumers normalize away.
//!
//! The expensive shared resource is the adjoint coefficient table; a
//! [`RelationsContext`] owns one table per `(p, alpha)` together with the
//! memo tables for arbitrary-word adjoint coefficients and for
//! `har_{p^alpha}` values, so a suite of checks pays the build cost once.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Serialize, Serializer};
use serde_json::json;

use crate::adjoint::{zeta_depth1, AdjointTable};
use crate::arith::{binom_int, rat_i64, PAdic, Rational, Valuation};
use crate::harmonic::{finite_mzv, har_padic, HarPaCache};
use crate::powersum::b_coeff;
use crate::sigma::expand_sigma;
use crate::words::{
    ihara, ihara_inverse, random_grouplike, shuffle_words, stuffle_compositions,
    CompositionIndex, NcSeries, Word,
};

/// What is known about the p-adic size of a check's defect.
///
/// `ExactZero` means the defect vanished in exact arithmetic (every atom
/// cancelled structurally, with no precision bound involved).  `AtLeast(v)`
/// is a certified lower bound on the valuation.  `Unevaluated` marks checks
/// that never reached a numeric verdict (inadmissible parameters).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectValuation {
    ExactZero,
    AtLeast(i64),
    Unevaluated,
}

impl DefectValuation {
    pub fn passes(&self, threshold: i64) -> bool {
        match self {
            DefectValuation::ExactZero => true,
            DefectValuation::AtLeast(v) => *v >= threshold,
            DefectValuation::Unevaluated => false,
        }
    }

    pub fn from_valuation(v: Valuation) -> Self {
        match v {
            Valuation::Infinite => DefectValuation::ExactZero,
            Valuation::AtLeast(a) => DefectValuation::AtLeast(a),
            Valuation::Exactly(a) => DefectValuation::AtLeast(a),
        }
    }

    /// The weaker of two verdicts: the defect of a multi-part check is only
    /// as good as its worst part.
    pub fn min_with(self, other: DefectValuation) -> DefectValuation {
        use DefectValuation::*;
        match (self, other) {
            (Unevaluated, _) | (_, Unevaluated) => Unevaluated,
            (ExactZero, x) | (x, ExactZero) => x,
            (AtLeast(a), AtLeast(b)) => AtLeast(a.min(b)),
        }
    }
}

impl Serialize for DefectValuation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DefectValuation::ExactZero => s.serialize_str("exact-zero"),
            DefectValuation::AtLeast(v) => s.serialize_i64(*v),
            DefectValuation::Unevaluated => s.serialize_none(),
        }
    }
}

/// One check's outcome.  `pass` holds exactly when the check's criterion is
/// met: for identity checks, defect valuation at least `threshold`; for
/// residue checks, all residues matching; for the norm suite, all margins
/// nonnegative.  `threshold` never exceeds the certified precision of the
/// atoms that entered the evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub params: serde_json::Value,
    pub defect_valuation: DefectValuation,
    pub threshold: i64,
    pub pass: bool,
    pub millis: u64,
}

impl Report {
    fn parameter_error(name: &str, params: serde_json::Value, started: Instant) -> Report {
        Report {
            name: name.to_string(),
            params,
            defect_valuation: DefectValuation::Unevaluated,
            threshold: 0,
            pass: false,
            millis: started.elapsed().as_millis() as u64,
        }
    }
}

/// A single evaluable factor of an identity term.
///
/// Rational atoms (`BCoeff`, `Binomial`) multiply exactly; the rest evaluate
/// to p-adic numbers through the context's caches.
#[derive(Debug, Clone)]
pub enum Atom {
    /// `har_{p^alpha}(I)`.
    HarPrimePower { index: CompositionIndex },
    /// `har_m(I)` at an explicit upper bound `m`.
    HarUpper { m: u64, index: CompositionIndex },
    /// Adjoint table entry `Ad[e0^b e1 w(I)]`.
    AdjointEntry { b: u32, index: CompositionIndex },
    /// Adjoint coefficient at an arbitrary word, reduced through shuffle
    /// vanishing.
    AdWord { word: Word },
    /// Multi-upper-index Bernoulli coefficient `B_b^{l_r,...,l_1}`.
    BCoeff { ls: Vec<u32>, b: u32 },
    /// Binomial `C(top, k)` with integer (possibly negative) top.
    Binomial { top: i64, k: u32 },
    /// Depth-one zeta value by its Bernoulli series.
    ZetaDepth1 { n: u32 },
}

/// An identity presented as data: `sum_i c_i * prod_j atom_{ij} = 0`, to be
/// certified to `requested_abs` p-adic digits (clamped to what the atoms'
/// precision supports).
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: String,
    pub params: serde_json::Value,
    pub terms: Vec<(Rational, Vec<Atom>)>,
    pub requested_abs: i64,
}

/// Shared evaluation state for a family of checks at one `(p, alpha)`: the
/// adjoint table (the expensive build), the arbitrary-word adjoint memo, and
/// the `har_{p^alpha}` cache.
pub struct RelationsContext {
    table: AdjointTable,
    ad_memo: HashMap<Word, PAdic>,
    har_cache: HarPaCache,
}

impl RelationsContext {
    pub fn build(
        p: u64,
        alpha: u32,
        table_weight: u32,
        table_depth: Option<u32>,
        expansion_cutoff: u32,
        margin: i64,
    ) -> Self {
        let table = AdjointTable::build(p, alpha, table_weight, table_depth, expansion_cutoff, margin);
        let har_cache = HarPaCache::new(p, alpha, expansion_cutoff as i64 + 6);
        RelationsContext { table, ad_memo: HashMap::new(), har_cache }
    }

    /// The default budget used by the standard verification suite: weight 8,
    /// depth 2, certified to `p^9`.
    pub fn standard(p: u64, alpha: u32) -> Self {
        RelationsContext::build(p, alpha, 8, Some(2), 10, 2)
    }

    pub fn p(&self) -> u64 {
        self.table.p()
    }

    pub fn alpha(&self) -> u32 {
        self.table.alpha()
    }

    pub fn table(&self) -> &AdjointTable {
        &self.table
    }

    /// Absolute precision to which every table atom is certified.
    pub fn certified_abs(&self) -> i64 {
        self.table.certified_abs()
    }

    fn ad_word_value(&mut self, w: &Word) -> PAdic {
        self.table.ad_word(w, &mut self.ad_memo)
    }

    fn eval_padic_atom(&mut self, atom: &Atom) -> PAdic {
        let p = self.p();
        match atom {
            Atom::HarPrimePower { index } => self.har_cache.get(index),
            Atom::HarUpper { m, index } => har_padic(*m, index, p, self.har_cache.abs()),
            Atom::AdjointEntry { b, index } => self
                .table
                .entry(*b, index)
                .unwrap_or_else(|| {
                    panic!(
                        "table (weight budget {}) has no entry at (b={b}, {index:?}); \
                         validate parameters before building the check",
                        self.table.max_total()
                    )
                })
                .clone(),
            Atom::AdWord { word } => self.ad_word_value(word),
            Atom::ZetaDepth1 { n } => {
                let target = self.certified_abs();
                zeta_depth1(p, self.alpha(), *n, target).value
            }
            Atom::BCoeff { .. } | Atom::Binomial { .. } => {
                unreachable!("rational atoms are folded before p-adic evaluation")
            }
        }
    }

    /// One term: exact rational prefactor times the p-adic product.
    fn eval_term(&mut self, coeff: &Rational, atoms: &[Atom]) -> PAdic {
        let mut rational = coeff.clone();
        let mut padic: Option<PAdic> = None;
        for atom in atoms {
            match atom {
                Atom::BCoeff { ls, b } => rational = &rational * &b_coeff(ls, *b),
                Atom::Binomial { top, k } => {
                    rational = &rational * &Rational::from_integer(binom_int(*top, *k));
                }
                other => {
                    let v = self.eval_padic_atom(other);
                    padic = Some(match padic {
                        None => v,
                        Some(acc) => acc.mul(&v),
                    });
                }
            }
        }
        if rational.is_zero() {
            return PAdic::exact_zero(self.p());
        }
        let scalar = PAdic::from_rational(&rational, self.p(), self.har_cache.abs());
        match padic {
            None => scalar,
            Some(acc) => acc.mul(&scalar),
        }
    }
}

/// Evaluate an identity-as-data check: sum the terms, read off the defect.
/// Terms built solely from rational atoms accumulate in exact arithmetic,
/// so identities that cancel structurally report an exact-zero defect.
pub fn evaluate_identity(ctx: &mut RelationsContext, check: &IdentityCheck) -> Report {
    let started = Instant::now();
    let rational_only = |atoms: &[Atom]| {
        atoms.iter().all(|a| matches!(a, Atom::BCoeff { .. } | Atom::Binomial { .. }))
    };
    let mut exact = Rational::zero();
    let mut defect = PAdic::exact_zero(ctx.p());
    for (c, atoms) in &check.terms {
        if rational_only(atoms) {
            let mut v = c.clone();
            for atom in atoms {
                match atom {
                    Atom::BCoeff { ls, b } => v = &v * &b_coeff(ls, *b),
                    Atom::Binomial { top, k } => {
                        v = &v * &Rational::from_integer(binom_int(*top, *k));
                    }
                    _ => unreachable!(),
                }
            }
            exact = &exact + &v;
        } else {
            defect = defect.add(&ctx.eval_term(c, atoms));
        }
    }
    if !exact.is_zero() {
        defect = defect.add(&PAdic::from_rational(&exact, ctx.p(), ctx.har_cache.abs()));
    }
    let threshold = match defect.abs_precision() {
        None => check.requested_abs,
        Some(a) => check.requested_abs.min(a),
    };
    let dv = DefectValuation::from_valuation(defect.valuation());
    Report {
        name: check.name.clone(),
        params: check.params.clone(),
        defect_valuation: dv,
        threshold,
        pass: dv.passes(threshold),
        millis: started.elapsed().as_millis() as u64,
    }
}

// ---------------------------------------------------------------------------
// Adjoint quasi-shuffle.
// ---------------------------------------------------------------------------

/// Quasi-shuffle of adjoint coefficients in the index letters: for depth-one
/// factors `(n1)` and `(n2)`,
///
/// ```text
/// sum_{J in (n1)*(n2)} Ad[e0^b e1 w(J)]
///     = sum_{b'+b''=b} Ad[e0^{b'} e1 e0^{n1-1} e1] * Ad[e0^{b''} e1 e0^{n2-1} e1],
/// ```
///
/// the left side running over the quasi-shuffle `(n2,n1) + (n1,n2) +
/// (n1+n2)`.  The right side pairs the first factor with `n1` and the second
/// with `n2`; the variant pairing both factors with `n1` is also evaluated
/// and recorded in the params (for `n1 != n2` it is a genuinely different —
/// and numerically false — statement, distinguishable once the threshold
/// exceeds `2 v_p(zeta(odd))`).
///
/// At `b = 0` both sides vanish termwise (the `b = 0` slot of the expansion
/// is empty), so the check degenerates to an exact-zero tautology.
pub fn check_adjoint_stuffle(
    ctx: &mut RelationsContext,
    b: u32,
    n1: u32,
    n2: u32,
    requested_abs: i64,
) -> Report {
    let started = Instant::now();
    let name = "adjoint-stuffle";
    let base_params = json!({
        "p": ctx.p(),
        "alpha": ctx.alpha(),
        "b": b,
        "n1": n1,
        "n2": n2,
        "requested": requested_abs,
    });
    if n1 == 0 || n2 == 0 {
        let mut params = base_params;
        params["error"] = json!("index parts must be positive");
        return Report::parameter_error(name, params, started);
    }
    if b + n1 + n2 > ctx.table().max_total() {
        let mut params = base_params;
        params["error"] = json!(format!(
            "b + n1 + n2 = {} exceeds the table weight budget {}",
            b + n1 + n2,
            ctx.table().max_total()
        ));
        return Report::parameter_error(name, params, started);
    }

    let rhs_terms = |m1: u32, m2: u32| -> Vec<(Rational, Vec<Atom>)> {
        (0..=b)
            .map(|b1| {
                (
                    rat_i64(-1),
                    vec![
                        Atom::AdjointEntry { b: b1, index: CompositionIndex::new(vec![m1]) },
                        Atom::AdjointEntry { b: b - b1, index: CompositionIndex::new(vec![m2]) },
                    ],
                )
            })
            .collect()
    };
    let mut terms: Vec<(Rational, Vec<Atom>)> = Vec::new();
    for (index, mult) in
        stuffle_compositions(&CompositionIndex::new(vec![n1]), &CompositionIndex::new(vec![n2]))
    {
        terms.push((rat_i64(mult), vec![Atom::AdjointEntry { b, index }]));
    }
    terms.extend(rhs_terms(n1, n2));
    let check = IdentityCheck {
        name: name.to_string(),
        params: base_params.clone(),
        terms,
        requested_abs,
    };
    let mut report = evaluate_identity(ctx, &check);

    // The same left side against the repeated-argument right side, recorded
    // as data next to the main verdict.
    if n1 != n2 {
        let mut alt_terms: Vec<(Rational, Vec<Atom>)> = Vec::new();
        for (index, mult) in stuffle_compositions(
            &CompositionIndex::new(vec![n1]),
            &CompositionIndex::new(vec![n2]),
        ) {
            alt_terms.push((rat_i64(mult), vec![Atom::AdjointEntry { b, index }]));
        }
        alt_terms.extend(rhs_terms(n1, n1));
        let alt = evaluate_identity(
            ctx,
            &IdentityCheck {
                name: format!("{name}/repeated-argument"),
                params: json!({}),
                terms: alt_terms,
                requested_abs,
            },
        );
        report.params["repeated_argument_rhs"] = json!({
            "defect_valuation": alt.defect_valuation,
            "threshold": alt.threshold,
            "pass": alt.pass,
        });
    }
    report.millis = started.elapsed().as_millis() as u64;
    report
}

// ---------------------------------------------------------------------------
// Regularized shuffle displays.
// ---------------------------------------------------------------------------

/// A finite rational combination of words.
type Lin = BTreeMap<Word, Rational>;

fn lin_add(lin: &mut Lin, w: Word, c: Rational) {
    if c.is_zero() {
        return;
    }
    let entry = lin.entry(w).or_insert_with(Rational::zero);
    *entry = &*entry + &c;
    if entry.is_zero() {
        lin.remove(&w);
    }
}

fn lin_single(w: Word) -> Lin {
    let mut out = Lin::new();
    lin_add(&mut out, w, rat_i64(1));
    out
}

fn lin_scale(lin: &Lin, c: &Rational) -> Lin {
    let mut out = Lin::new();
    for (w, a) in lin {
        lin_add(&mut out, *w, a * c);
    }
    out
}

fn sh_words(a: &Word, b: &Word) -> Lin {
    let mut out = Lin::new();
    for (w, mult) in shuffle_words(*a, *b) {
        lin_add(&mut out, w, rat_i64(mult));
    }
    out
}

fn sh_lin(a: &Lin, b: &Lin) -> Lin {
    let mut out = Lin::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            let c = ca * cb;
            for (w, mult) in shuffle_words(*wa, *wb) {
                lin_add(&mut out, w, &c * &rat_i64(mult));
            }
        }
    }
    out
}

fn concat_right(a: &Lin, w2: &Word) -> Lin {
    let mut out = Lin::new();
    for (w, c) in a {
        lin_add(&mut out, w.concat(w2), c.clone());
    }
    out
}

/// Per-block geometric shift: each block `e0^{n-1} e1` of an `e1`-ending
/// word becomes `sum_k c_{n,k} e0^{n-1+k} e1`, with `c_{n,k} = C(-n,k)`
/// under the `plus` convention (the block divided by `(1+e0)^n`) and
/// `c_{n,k} = C(n+k-1,k)` under the alternate sign.  Truncated to total
/// weight `cap`.
fn shift_star(w: &Word, plus: bool, cap: u32) -> Lin {
    let comp = w
        .to_composition()
        .expect("the shift applies to e1-ending (or empty) words");
    let parts = comp.parts();
    let tail_min: Vec<u32> = {
        let mut acc = vec![0u32; parts.len() + 1];
        for i in (0..parts.len()).rev() {
            acc[i] = acc[i + 1] + parts[i];
        }
        acc
    };
    let mut acc: Vec<(Rational, Word)> = vec![(rat_i64(1), Word::empty())];
    for (i, &n) in parts.iter().enumerate() {
        let mut next: Vec<(Rational, Word)> = Vec::new();
        for (c, prefix) in &acc {
            let mut k = 0u32;
            while prefix.weight() + n + k + tail_min[i + 1] <= cap {
                let coeff = if plus {
                    binom_int(-i64::from(n), k)
                } else {
                    binom_int(i64::from(n + k) - 1, k)
                };
                let block = CompositionIndex::new(vec![n + k]).word();
                next.push((c * &Rational::from_integer(coeff), prefix.concat(&block)));
                k += 1;
            }
        }
        acc = next;
    }
    let mut out = Lin::new();
    for (c, w) in acc {
        lin_add(&mut out, w, c);
    }
    out
}

/// Block reversal with the weight-parity sign: `w(n_d,...,n_1)` goes to
/// `(-1)^{weight} w(n_1,...,n_d)`.  The sign is dropped when `signed` is
/// false (an alternate convention the variant sweep exercises).
fn s_y(w: &Word, signed: bool) -> (Rational, Word) {
    if w.is_empty() {
        return (rat_i64(1), Word::empty());
    }
    let comp = w.to_composition().expect("block reversal needs an e1-ending word");
    let sign = if signed && w.weight() % 2 == 1 { -1 } else { 1 };
    (rat_i64(sign), comp.reversed().word())
}

/// Which functional instantiates `h` in a display.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Functional {
    /// `h(u)` graded by `Lambda^{|u|-1}`, evaluated as the adjoint
    /// coefficient `Ad[u]` (the constant depth-parity twist cancels from
    /// both sides of every display and is omitted).
    Adjoint,
    /// `h(u)` graded by `Lambda^{|u|}`, evaluated as `har_{p^alpha}(I(u))`.
    Harmonic,
}

impl Functional {
    fn label(self) -> &'static str {
        match self {
            Functional::Adjoint => "adjoint",
            Functional::Harmonic => "harmonic",
        }
    }
}

/// Group a combination by word weight and evaluate each graded piece.
fn eval_graded(
    ctx: &mut RelationsContext,
    lhs: &Lin,
    rhs: &Lin,
    functional: Functional,
    cap: u32,
) -> BTreeMap<u32, PAdic> {
    let mut degrees: BTreeMap<u32, PAdic> = BTreeMap::new();
    let p = ctx.p();
    let work = ctx.har_cache.abs();
    let accumulate = |ctx: &mut RelationsContext,
                          degrees: &mut BTreeMap<u32, PAdic>,
                          lin: &Lin,
                          sign: i64| {
        for (w, c) in lin {
            if w.weight() > cap {
                continue;
            }
            let h = match functional {
                Functional::Adjoint => ctx.ad_word_value(w),
                Functional::Harmonic => {
                    let idx = w
                        .to_composition()
                        .expect("shuffles of e1-ending words end in e1");
                    ctx.har_cache.get(&idx)
                }
            };
            let scaled = h.mul(&PAdic::from_rational(&(c * &rat_i64(sign)), p, work));
            let slot = degrees.entry(w.weight()).or_insert_with(|| PAdic::exact_zero(p));
            *slot = slot.add(&scaled);
        }
    };
    accumulate(ctx, &mut degrees, lhs, 1);
    accumulate(ctx, &mut degrees, rhs, -1);
    degrees
}

struct DisplayInstance {
    display: u8,
    flags: serde_json::Value,
    lhs: Lin,
    rhs: Lin,
}

/// The three rewriting displays for the shuffle relations with the divergent
/// letter `e1` regularized away, each assembled under explicit sign
/// conventions:
///
/// ```text
/// (1)  h((e0^{n-1} e1 w) sh w') = h(w sh (-1)^n shift(e0^{n-1} e1 w'))
/// (2)  h(w sh w')              = h(shift(S_Y(w) w'))
/// (3)  h(u w sh w')            = h(w sh shift(S_Y(u) w'))
/// ```
///
/// with `shift` the per-block geometric shift and `S_Y` the signed block
/// reversal.  Display 3 is instantiated with `u = e0^{n-1} e1 w` and inner
/// word empty.  The flag axes are: the `(-1)^n` prefactor of display 1, the
/// shift's binomial sign, the reversal sign, and whether the shift applies
/// to the whole concatenation or only to the reversed factor.
fn build_displays(w: &Word, w2: &Word, n: u32, cap: u32) -> Vec<DisplayInstance> {
    let nword = CompositionIndex::new(vec![n]).word();
    let mut out = Vec::new();

    for &shift_plus in &[true, false] {
        let shift_label = if shift_plus { "plus" } else { "minus" };
        for &signed in &[true, false] {
            // Display 1: prefix rule. The `signed` axis is the `(-1)^n` factor.
            let lhs = sh_words(&nword.concat(w), w2);
            let shifted = shift_star(&nword.concat(w2), shift_plus, cap);
            let mut rhs = sh_lin(&lin_single(*w), &shifted);
            if signed && n % 2 == 1 {
                rhs = lin_scale(&rhs, &rat_i64(-1));
            }
            out.push(DisplayInstance {
                display: 1,
                flags: json!({"shift": shift_label, "sign": if signed { "printed" } else { "off" }}),
                lhs,
                rhs,
            });
        }
    }

    for display in [2u8, 3u8] {
        let reversal_arg = match display {
            2 => *w,
            _ => nword.concat(w),
        };
        for &shift_plus in &[true, false] {
            let shift_label = if shift_plus { "plus" } else { "minus" };
            for &sy_signed in &[true, false] {
                for &whole in &[true, false] {
                    let (c, rev) = s_y(&reversal_arg, sy_signed);
                    let inner = if whole {
                        shift_star(&rev.concat(w2), shift_plus, cap)
                    } else {
                        concat_right(&shift_star(&rev, shift_plus, cap), w2)
                    };
                    let inner = lin_scale(&inner, &c);
                    let lhs = sh_words(&reversal_arg, w2);
                    let rhs = inner;
                    out.push(DisplayInstance {
                        display,
                        flags: json!({
                            "shift": shift_label,
                            "reversal_sign": if sy_signed { "printed" } else { "off" },
                            "shift_scope": if whole { "whole" } else { "reversed-factor" },
                        }),
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    out
}

/// Evaluate the three regularized shuffle displays at `(w, w2, n)` under
/// both functionals and the full sign-convention sweep, one graded piece per
/// word weight.
///
/// The gating criterion is display 1 under the printed conventions
/// (`shift: plus`, `sign: printed`) instantiated on the adjoint functional:
/// that display defines the scheme the adjoint series is a point of, and
/// for words containing the bare divergent letter its left side is a
/// genuine shuffle combination (termwise zero on the adjoint side), so the
/// content sits in the shifted right side — the graded pieces beyond the
/// left side's weight must each vanish.
///
/// Everything else is recorded as data in the params.  The recorded sweep
/// shows the displays are *paired with* functionals rather than
/// interchangeable: the reversal display (2) holds on the harmonic
/// functional at convergent words but fails termwise on the adjoint one
/// (its base degree compares a vanishing shuffle image against a single
/// adjoint coefficient), and narrowing the shift to the reversed factor
/// breaks display 3 at zeta(3) level, which pins the whole-concatenation
/// scope as the correct reading.
pub fn check_dmr_shuffle(
    ctx: &mut RelationsContext,
    w: &Word,
    w2: &Word,
    n: u32,
    requested_abs: i64,
) -> Report {
    let started = Instant::now();
    let name = "dmr-shuffle";
    let mut params = json!({
        "p": ctx.p(),
        "alpha": ctx.alpha(),
        "w": w.to_string(),
        "w2": w2.to_string(),
        "n": n,
        "requested": requested_abs,
        "gating": "display 1, printed conventions, adjoint functional",
    });
    let admissible = |u: &Word| u.is_empty() || u.ends_with_e1();
    if n == 0 || !admissible(w) || !admissible(w2) {
        params["error"] = json!(
            "inadmissible instance: both words must be empty or end in e1, and n >= 1"
        );
        return Report::parameter_error(name, params, started);
    }
    if let Some(dmax) = ctx.table().max_depth() {
        let depth_needed = 1 + w.depth() + w2.depth();
        if depth_needed > dmax + 1 {
            params["error"] = json!(format!(
                "instance needs adjoint entries of depth {}, table holds depth <= {}",
                depth_needed - 1,
                dmax
            ));
            return Report::parameter_error(name, params, started);
        }
    }
    // `Ad[u]` at an e1-ending word needs the table entry at
    // `(leading run, rest)`, total weight `|u| - 1`.
    let cap = ctx.table().max_total() + 1;
    let threshold = requested_abs.min(ctx.certified_abs());

    let mut primary: Option<DefectValuation> = None;
    let mut outcomes = Vec::new();
    for inst in build_displays(w, w2, n, cap) {
        for functional in [Functional::Adjoint, Functional::Harmonic] {
            let degrees = eval_graded(ctx, &inst.lhs, &inst.rhs, functional, cap);
            let mut per_weight = serde_json::Map::new();
            let mut min_defect = DefectValuation::ExactZero;
            for (s, diff) in &degrees {
                let dv = DefectValuation::from_valuation(diff.valuation());
                per_weight.insert(s.to_string(), serde_json::to_value(dv).unwrap());
                min_defect = min_defect.min_with(dv);
            }
            let pass = min_defect.passes(threshold);
            let is_primary = inst.display == 1
                && functional == Functional::Adjoint
                && inst.flags["shift"] == "plus"
                && inst.flags["sign"] == "printed";
            if is_primary {
                primary = Some(min_defect);
            }
            outcomes.push(json!({
                "display": inst.display,
                "flags": inst.flags,
                "functional": functional.label(),
                "per_weight": per_weight,
                "min_defect": min_defect,
                "pass": pass,
            }));
        }
    }
    params["outcomes"] = json!(outcomes);
    params["weight_cap"] = json!(cap);
    let primary = primary.expect("the printed display-1 variant is always evaluated");
    Report {
        name: name.to_string(),
        params,
        defect_valuation: primary,
        threshold,
        pass: primary.passes(threshold),
        millis: started.elapsed().as_millis() as u64,
    }
}

// ---------------------------------------------------------------------------
// Expansion cross-check.
// ---------------------------------------------------------------------------

/// Evaluate the composite-level expansion of `har_{p^alpha m}(I)` at
/// concrete `m = 1..m_max` and compare against the directly computed value.
/// The truncated expansion certifies the defect only up to its weight
/// cutoff, which is chosen from the requested precision.
pub fn check_expansion(
    p: u64,
    alpha: u32,
    index: &CompositionIndex,
    m_max: u64,
    requested_abs: i64,
) -> Report {
    let started = Instant::now();
    let name = "sigma-expansion";
    let mut params = json!({
        "p": p,
        "alpha": alpha,
        "index": format!("{index:?}"),
        "m_max": m_max,
        "requested": requested_abs,
    });
    if index.is_empty() || m_max == 0 {
        params["error"] = json!("needs a nonempty index and m_max >= 1");
        return Report::parameter_error(name, params, started);
    }
    // Dropped tail terms cost `cutoff + 1 - margin` digits, m-divisibility
    // can cost `weight * v_p(m!)`-style corrections handled inside
    // `evaluate`; leave headroom above the request.
    let margin = 2i64;
    let cutoff = (index.weight() as i64 + requested_abs + margin + 2) as u32;
    let expansion = expand_sigma(index, cutoff);
    let pa = p.pow(alpha);

    let mut per_m = Vec::new();
    let mut defect = DefectValuation::ExactZero;
    let mut threshold = requested_abs;
    for m in 1..=m_max {
        let lhs = expansion.evaluate(p, alpha, m, margin);
        let work = lhs.abs_precision().unwrap_or(cutoff as i64) + 4;
        let rhs = har_padic(pa * m, index, p, work);
        let diff = lhs.sub(&rhs);
        let dv = DefectValuation::from_valuation(diff.valuation());
        if let Some(a) = diff.abs_precision() {
            threshold = threshold.min(a);
        }
        per_m.push(json!({"m": m, "defect": dv}));
        defect = defect.min_with(dv);
    }
    params["per_m"] = json!(per_m);
    params["weight_cutoff"] = json!(cutoff);
    Report {
        name: name.to_string(),
        params,
        defect_valuation: defect,
        threshold,
        pass: defect.passes(threshold),
        millis: started.elapsed().as_millis() as u64,
    }
}

// ---------------------------------------------------------------------------
// Norm estimates for the Ihara composition.
// ---------------------------------------------------------------------------

/// Certified valuation lower bounds per `(weight, depth)` bidegree, with the
/// attained flag, pulled out of a series.
fn profile_entries(f: &NcSeries<PAdic>) -> BTreeMap<(u32, u32), (i64, bool)> {
    f.valuation_profile().entries
}

/// For each bidegree of `h`, the margin by which the norm inequality
/// `N(h) <= N(a) N(b)` holds: the certified bound of `h` minus the smallest
/// split sum of attained bounds of `a` and `b`.  (The product norm's
/// coefficient dominates its largest term, so a nonnegative margin at every
/// bidegree confirms the coefficientwise inequality.)
fn submultiplicativity_margin(
    h: &BTreeMap<(u32, u32), (i64, bool)>,
    a: &BTreeMap<(u32, u32), (i64, bool)>,
    b: &BTreeMap<(u32, u32), (i64, bool)>,
) -> Option<i64> {
    let mut margin: Option<i64> = None;
    for (&(s, d), &(hb, _)) in h {
        let mut best_split: Option<i64> = None;
        for (&(s1, d1), &(v1, att1)) in a {
            if s1 > s || d1 > d || !att1 {
                continue;
            }
            if let Some(&(v2, att2)) = b.get(&(s - s1, d - d1)) {
                if att2 {
                    best_split = Some(best_split.map_or(v1 + v2, |x: i64| x.min(v1 + v2)));
                }
            }
        }
        if let Some(split) = best_split {
            let m = hb - split;
            margin = Some(margin.map_or(m, |x| x.min(m)));
        }
    }
    margin
}

/// Random group-like series over `Q`, pushed into `Z_p` at working precision.
fn random_padic_grouplike(
    rng: &mut ChaCha12Rng,
    p: u64,
    weight_cutoff: u32,
    work: i64,
) -> NcSeries<PAdic> {
    let rational = random_grouplike(rng, weight_cutoff, 3);
    let mut out = NcSeries::new(rational.weight_cutoff(), rational.depth_cutoff());
    for (w, c) in rational.iter() {
        out.insert_add(*w, PAdic::from_rational(c, p, work));
    }
    out
}

/// Norm and contraction suite for the Ihara composition, over random
/// group-like series:
///
/// * submultiplicativity `N(a o b) <= N(a) N(b)` per bidegree;
/// * the twisted map `psi(f) = g o tau(p) f` contracts at rate `p^s` in
///   weight `s`: differences gain `s` digits per weight;
/// * iterating `psi` from two different seeds reaches the same fixed point.
///
/// Margins are reported as data: `defect_valuation` is the least margin over
/// all three phases (so the check passes exactly when every margin is
/// nonnegative), with the per-phase numbers in the params.
pub fn check_contraction_suite(p: u64, trials: u32, weight_cutoff: u32, seed: u64) -> Report {
    let started = Instant::now();
    let name = "ihara-contraction";
    let mut params = json!({
        "p": p,
        "trials": trials,
        "weight_cutoff": weight_cutoff,
        "seed": seed,
        "metric": "least margin over submultiplicativity, weight-s gain, fixed-point agreement",
    });
    let work = 24i64;
    let one = PAdic::from_i64(1, p, work);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut submult: Option<i64> = None;
    let mut gain: Option<i64> = None;
    let g = random_padic_grouplike(&mut rng, p, weight_cutoff, work);
    let psi = |f: &NcSeries<PAdic>| -> NcSeries<PAdic> {
        ihara(&g, &f.tau_scale_i64(p as i64), &one).expect("composition of group-like series")
    };
    for _ in 0..trials {
        let f = random_padic_grouplike(&mut rng, p, weight_cutoff, work);
        let f2 = random_padic_grouplike(&mut rng, p, weight_cutoff, work);

        let h = ihara(&f2, &f, &one).expect("composition of group-like series");
        if let Some(m) =
            submultiplicativity_margin(&profile_entries(&h), &profile_entries(&f2), &profile_entries(&f))
        {
            submult = Some(submult.map_or(m, |x| x.min(m)));
        }

        let inv2 = ihara_inverse(&f2, &one).expect("group-like series invert");
        let before = ihara(&inv2, &f, &one).expect("composition of group-like series");
        let pf = psi(&f);
        let pf2 = psi(&f2);
        let pinv2 = ihara_inverse(&pf2, &one).expect("group-like series invert");
        let after: NcSeries<PAdic> = ihara(&pinv2, &pf, &one).expect("composition of group-like series");
        let after_profile = profile_entries(&after);
        for (&(s, d), &(vb, attained)) in &profile_entries(&before) {
            if s == 0 || !attained {
                continue;
            }
            let va = after_profile
                .get(&(s, d))
                .map(|&(v, _)| v)
                .unwrap_or(work);
            let m = va - (vb + s as i64);
            gain = Some(gain.map_or(m, |x| x.min(m)));
        }
    }

    // Fixed point: iterate from the unit and from a random group-like seed;
    // each step deepens the agreement between the orbits by at least one
    // digit at every positive weight, starting from the seeds' own distance
    // (which can be negative: a random rational coefficient may have p in
    // its denominator).
    let iters = 10i64;
    let mut x1 = NcSeries::<PAdic>::single(Word::empty(), one.clone(), weight_cutoff, None);
    let mut x2 = random_padic_grouplike(&mut rng, p, weight_cutoff, work);
    let min_positive_weight_valuation = |series: &NcSeries<PAdic>| -> Option<i64> {
        let mut least: Option<i64> = None;
        for (&(s, _), &(v, _)) in &profile_entries(series) {
            if s == 0 {
                continue;
            }
            least = Some(least.map_or(v, |x: i64| x.min(v)));
        }
        least
    };
    let initial = min_positive_weight_valuation(&x1.sub(&x2)).unwrap_or(0);
    for _ in 0..iters {
        x1 = psi(&x1);
        x2 = psi(&x2);
    }
    let fp_val = min_positive_weight_valuation(&x1.sub(&x2));
    let fp_required = (initial + iters).min(work - 4);
    let fp_margin = fp_val.unwrap_or(work) - fp_required;

    let overall = [submult, gain, Some(fp_margin)]
        .into_iter()
        .flatten()
        .min()
        .unwrap_or(0);
    params["submultiplicativity_margin"] = json!(submult);
    params["weight_gain_margin"] = json!(gain);
    params["fixed_point_agreement"] = json!(fp_val);
    params["fixed_point_initial_distance"] = json!(initial);
    params["fixed_point_required"] = json!(fp_required);
    Report {
        name: name.to_string(),
        params,
        defect_valuation: DefectValuation::AtLeast(overall),
        threshold: 0,
        pass: overall >= 0,
        millis: started.elapsed().as_millis() as u64,
    }
}

// ---------------------------------------------------------------------------
// Finite (mod p) values and the depth-one shape.
// ---------------------------------------------------------------------------

fn primes_up_to(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut sieve = vec![true; (limit + 1) as usize];
    for q in 2..=limit {
        if sieve[q as usize] {
            out.push(q);
            let mut t = q * q;
            while t <= limit {
                sieve[t as usize] = false;
                t += q;
            }
        }
    }
    out
}

/// The depth-one finite values `sum_{0<m<p} m^{-n} mod p`: zero exactly when
/// `p - 1` does not divide `n`, and `-1` when it does.  Cross-checked
/// against the p-adic engine (`p^{-n} har_p(n) mod p`) for small primes, and
/// supplemented by the depth-two value at `(1,1)`, which vanishes for
/// `p >= 5`.
pub fn check_finite_depth1(p_limit: u64, n: u32) -> Report {
    let started = Instant::now();
    let name = "finite-depth1";
    let mut params = json!({
        "p_limit": p_limit,
        "n": n,
    });
    if n == 0 || p_limit < 3 {
        params["error"] = json!("needs n >= 1 and a prime range reaching 3");
        return Report::parameter_error(name, params, started);
    }
    let index = CompositionIndex::new(vec![n]);
    let mut mismatches = Vec::new();
    let mut checked = 0u64;
    for p in primes_up_to(p_limit) {
        if p == 2 {
            continue;
        }
        let r = finite_mzv(p, &index);
        let expected = if u64::from(n) % (p - 1) == 0 { p - 1 } else { 0 };
        checked += 1;
        if r != expected {
            mismatches.push(json!({"p": p, "residue": r, "expected": expected}));
        }
        if p <= 50 {
            let hv = har_padic(p, &index, p, i64::from(n) + 3);
            let engine = hv
                .scale_pow_p(-i64::from(n))
                .residue_mod_p()
                .expect("depth-one har_p is a p-adic integer after unweighting");
            if engine != r {
                mismatches.push(json!({"p": p, "engine_residue": engine, "direct": r}));
            }
        }
    }
    let depth2_index = CompositionIndex::new(vec![1, 1]);
    let mut depth2 = Vec::new();
    for p in [5u64, 7, 11, 13] {
        if p > p_limit {
            continue;
        }
        let r = finite_mzv(p, &depth2_index);
        depth2.push(json!({"p": p, "residue": r}));
        if r != 0 {
            mismatches.push(json!({"p": p, "index": "(1,1)", "residue": r, "expected": 0}));
        }
    }
    params["primes_checked"] = json!(checked);
    params["depth2_11"] = json!(depth2);
    params["mismatches"] = json!(mismatches);
    let pass = mismatches.is_empty();
    Report {
        name: name.to_string(),
        params,
        defect_valuation: if pass { DefectValuation::ExactZero } else { DefectValuation::AtLeast(0) },
        threshold: 1,
        pass,
        millis: started.elapsed().as_millis() as u64,
    }
}

/// Depth-one shape comparison mod p: the finite value `p^{-n} har_p(n) mod p`
/// against the reduction of `(1 + (-1)^n) zeta_p(n) p^{-n}`.  For odd `n`
/// the zeta side vanishes by its sign factor; for even `n` the zeta value
/// itself vanishes.  Either way the finite residue must agree — which pins
/// the extra digit of valuation `har_p(n)` carries beyond its weight.
pub fn check_kz_shape(n: u32, primes: &[u64]) -> Report {
    let started = Instant::now();
    let name = "kz-shape";
    let mut params = json!({
        "n": n,
        "primes": primes,
    });
    if n < 2 {
        params["error"] = json!("needs n >= 2");
        return Report::parameter_error(name, params, started);
    }
    let index = CompositionIndex::new(vec![n]);
    let mut rows = Vec::new();
    let mut mismatches = 0u64;
    for &p in primes {
        if p <= u64::from(n) + 2 {
            rows.push(json!({"p": p, "skipped": "needs p > n + 2"}));
            continue;
        }
        let finite = finite_mzv(p, &index);
        let zeta_res = if n % 2 == 1 {
            0
        } else {
            let z = zeta_depth1(p, 1, n, i64::from(n) + 2);
            z.value
                .scale_pow_p(-i64::from(n))
                .mul(&PAdic::from_i64(2, p, 4))
                .residue_mod_p()
                .expect("certified past the weight")
        };
        if finite != zeta_res {
            mismatches += 1;
        }
        rows.push(json!({"p": p, "finite": finite, "zeta_side": zeta_res}));
    }
    params["rows"] = json!(rows);
    let pass = mismatches == 0;
    Report {
        name: name.to_string(),
        params,
        defect_valuation: if pass { DefectValuation::ExactZero } else { DefectValuation::AtLeast(0) },
        threshold: 1,
        pass,
        millis: started.elapsed().as_millis() as u64,
    }
}

// ---------------------------------------------------------------------------
// Suites.
// ---------------------------------------------------------------------------

/// Integer overrides for suite parameters, parsed by the CLI from repeated
/// `--params key=value` flags.  Unknown keys are rejected.
pub type SuiteParams = BTreeMap<String, i64>;

fn param(params: &SuiteParams, key: &str, default: i64) -> i64 {
    params.get(key).copied().unwrap_or(default)
}

/// Named verification suites.  `default` is the full sweep; `quick` is a
/// seconds-scale subset over a smaller adjoint table (used by the
/// determinism tests); `finite` and `contraction` isolate the cheap
/// residue/norm families.
pub fn suite_names() -> &'static [&'static str] {
    &["default", "quick", "finite", "contraction"]
}

/// Run a named suite.  Checks execute sequentially in a fixed order; given
/// the same name, seed, and params the reports are identical except for
/// timings.
pub fn run_suite(name: &str, seed: u64, params: &SuiteParams) -> Result<Vec<Report>, String> {
    for key in params.keys() {
        if !["trials", "weight_cutoff", "p_limit", "m_max"].contains(&key.as_str()) {
            return Err(format!("unknown suite parameter {key}"));
        }
    }
    let e1 = Word::e1();
    let w21 = CompositionIndex::new(vec![2]).word();
    let mut out = Vec::new();
    match name {
        "default" => {
            let mut ctx5 = RelationsContext::standard(5, 1);
            out.push(check_adjoint_stuffle(&mut ctx5, 0, 1, 1, 5));
            out.push(check_adjoint_stuffle(&mut ctx5, 3, 1, 2, 7));
            out.push(check_adjoint_stuffle(&mut ctx5, 2, 2, 2, 6));
            out.push(check_dmr_shuffle(&mut ctx5, &Word::empty(), &e1, 2, 5));
            out.push(check_dmr_shuffle(&mut ctx5, &w21, &w21, 2, 5));
            drop(ctx5);
            let mut ctx7 = RelationsContext::build(7, 1, 6, Some(2), 8, 2);
            out.push(check_adjoint_stuffle(&mut ctx7, 2, 1, 2, 5));
            drop(ctx7);
            let m_max = param(params, "m_max", 8) as u64;
            out.push(check_expansion(5, 1, &CompositionIndex::new(vec![2]), m_max, 6));
            out.push(check_expansion(5, 1, &CompositionIndex::new(vec![2, 1]), m_max.min(6), 5));
            out.push(check_expansion(7, 2, &CompositionIndex::new(vec![3]), m_max.min(5), 6));
            out.push(check_contraction_suite(
                5,
                param(params, "trials", 8) as u32,
                param(params, "weight_cutoff", 6) as u32,
                seed,
            ));
            let p_limit = param(params, "p_limit", 200) as u64;
            for n in [2u32, 3, 4, 6] {
                out.push(check_finite_depth1(p_limit, n));
            }
            out.push(check_kz_shape(3, &[7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]));
        }
        "quick" => {
            let mut ctx = RelationsContext::build(5, 1, 5, Some(2), 7, 2);
            out.push(check_adjoint_stuffle(&mut ctx, 1, 1, 2, 4));
            out.push(check_dmr_shuffle(&mut ctx, &Word::empty(), &e1, 2, 4));
            drop(ctx);
            out.push(check_expansion(5, 1, &CompositionIndex::new(vec![2]), param(params, "m_max", 4) as u64, 5));
            out.push(check_contraction_suite(
                5,
                param(params, "trials", 3) as u32,
                param(params, "weight_cutoff", 5) as u32,
                seed,
            ));
            out.push(check_finite_depth1(param(params, "p_limit", 60) as u64, 2));
            out.push(check_kz_shape(3, &[7, 11]));
        }
        "finite" => {
            let p_limit = param(params, "p_limit", 200) as u64;
            for n in [2u32, 3, 4, 6] {
                out.push(check_finite_depth1(p_limit, n));
            }
            out.push(check_kz_shape(3, &[7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]));
        }
        "contraction" => {
            out.push(check_contraction_suite(
                5,
                param(params, "trials", 20) as u32,
                param(params, "weight_cutoff", 7) as u32,
                seed,
            ));
        }
        other => return Err(format!("unknown suite {other:?} (expected one of {:?})", suite_names())),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_ctx() -> RelationsContext {
        RelationsContext::build(5, 1, 6, Some(2), 8, 2)
    }

    #[test]
    fn defect_valuation_serialization_forms() {
        assert_eq!(serde_json::to_value(DefectValuation::ExactZero).unwrap(), json!("exact-zero"));
        assert_eq!(serde_json::to_value(DefectValuation::AtLeast(7)).unwrap(), json!(7));
        assert_eq!(
            serde_json::to_value(DefectValuation::Unevaluated).unwrap(),
            serde_json::Value::Null
        );
        let r = Report {
            name: "x".into(),
            params: json!({}),
            defect_valuation: DefectValuation::AtLeast(3),
            threshold: 3,
            pass: true,
            millis: 12,
        };
        let v = serde_json::to_value(&r).unwrap();
        for key in ["name", "params", "defect_valuation", "threshold", "pass", "millis"] {
            assert!(v.get(key).is_some(), "missing field {key}");
        }
    }

    #[test]
    fn stuffle_b0_is_an_exact_tautology() {
        let mut ctx = small_ctx();
        let r = check_adjoint_stuffle(&mut ctx, 0, 1, 1, 4);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.defect_valuation, DefectValuation::ExactZero);
    }

    #[test]
    fn stuffle_depth_one_pairs() {
        let mut ctx = RelationsContext::build(7, 1, 6, Some(2), 8, 2);
        let r = check_adjoint_stuffle(&mut ctx, 2, 1, 2, 5);
        assert!(r.pass, "{r:?}");
        let r = check_adjoint_stuffle(&mut ctx, 1, 2, 3, 5);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn stuffle_distinguishes_partner_weights() {
        // At (b, n1, n2) = (3, 1, 2) the correct right side carries
        // zeta(3)^2 (valuation 6 at p = 5); pairing both factors with n1
        // instead leaves that product unmatched, so the repeated-argument
        // variant must fail once the threshold exceeds 6.
        let mut ctx = small_ctx();
        let r = check_adjoint_stuffle(&mut ctx, 3, 1, 2, 7);
        assert!(r.pass, "{r:?}");
        let alt = &r.params["repeated_argument_rhs"];
        assert_eq!(alt["pass"], json!(false), "{r:?}");
        assert_eq!(alt["defect_valuation"], json!(6), "{r:?}");
    }

    #[test]
    fn stuffle_budget_violation_reports_parameter_error() {
        let mut ctx = small_ctx();
        let r = check_adjoint_stuffle(&mut ctx, 5, 2, 2, 5);
        assert!(!r.pass);
        assert_eq!(r.defect_valuation, DefectValuation::Unevaluated);
        assert!(r.params["error"].as_str().unwrap().contains("budget"));
    }

    #[test]
    fn dmr_divergent_letter_prefix_display_holds() {
        let mut ctx = small_ctx();
        let r = check_dmr_shuffle(&mut ctx, &Word::empty(), &Word::e1(), 2, 4);
        assert!(r.pass, "{}", serde_json::to_string_pretty(&r.params).unwrap());
        // The gating display vanishes to the full table precision.
        assert_eq!(r.defect_valuation, DefectValuation::AtLeast(7), "{r:?}");

        let find = |display: u64, functional: &str, scope: &str| {
            r.params["outcomes"]
                .as_array()
                .unwrap()
                .iter()
                .find(|o| {
                    o["display"] == json!(display)
                        && o["functional"] == json!(functional)
                        && o["flags"]["shift"] == json!("plus")
                        && (display == 1 || o["flags"]["shift_scope"] == json!(scope))
                        && (display == 1 || o["flags"]["reversal_sign"] == json!("printed"))
                })
                .unwrap()
                .clone()
        };
        // Scope convention: shifting only the reversed factor (instead of
        // the whole concatenation) leaves an unmatched zeta(3)-level term.
        let narrowed = find(3, "adjoint", "reversed-factor");
        assert_eq!(narrowed["pass"], json!(false), "{narrowed}");
        assert_eq!(narrowed["min_defect"], json!(3), "{narrowed}");
        let whole = find(3, "adjoint", "whole");
        assert_eq!(whole["pass"], json!(true), "{whole}");
        // The plain harmonic functional does not absorb the bare divergent
        // letter: the reversal display misses it by an unweighted har(2).
        let har2 = find(2, "harmonic", "whole");
        assert_eq!(har2["pass"], json!(false), "{har2}");
        assert_eq!(har2["min_defect"], json!(3), "{har2}");
    }

    #[test]
    fn dmr_convergent_instance_holds() {
        let mut ctx = small_ctx();
        let w = CompositionIndex::new(vec![2]).word();
        let r = check_dmr_shuffle(&mut ctx, &w, &w, 2, 4);
        assert!(r.pass, "{}", serde_json::to_string_pretty(&r.params).unwrap());

        let find = |display: u64, functional: &str| {
            r.params["outcomes"]
                .as_array()
                .unwrap()
                .iter()
                .find(|o| {
                    o["display"] == json!(display)
                        && o["functional"] == json!(functional)
                        && o["flags"]["shift"] == json!("plus")
                        && (display == 1
                            || (o["flags"]["shift_scope"] == json!("whole")
                                && o["flags"]["reversal_sign"] == json!("printed")))
                })
                .unwrap()
                .clone()
        };
        // The reversal display under the printed conventions holds on the
        // harmonic functional at convergent words: it is the series-side
        // counterpart of the prefix display.
        let har = find(2, "harmonic");
        assert_eq!(har["pass"], json!(true), "{har}");
        // The adjoint functional satisfies the prefix display but not the
        // reversal display termwise: the base degree of the latter compares
        // a vanishing shuffle image against Ad[e0 e1 e0 e1] = -2 zeta(3).
        let ad = find(2, "adjoint");
        assert_eq!(ad["pass"], json!(false), "{ad}");
        assert_eq!(ad["min_defect"], json!(3), "{ad}");
    }

    #[test]
    fn dmr_inadmissible_words_report_parameter_error() {
        let mut ctx = small_ctx();
        let r = check_dmr_shuffle(&mut ctx, &Word::e0(), &Word::e1(), 2, 4);
        assert!(!r.pass);
        assert_eq!(r.defect_valuation, DefectValuation::Unevaluated);
        assert!(r.params["error"].as_str().unwrap().contains("inadmissible"));
    }

    #[test]
    fn expansion_matches_direct_values() {
        let r = check_expansion(5, 1, &CompositionIndex::new(vec![2]), 6, 6);
        assert!(r.pass, "{r:?}");
        let r = check_expansion(5, 1, &CompositionIndex::new(vec![2, 1]), 4, 5);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn contraction_suite_margins_are_nonnegative() {
        let r = check_contraction_suite(5, 3, 5, 42);
        assert!(r.pass, "{}", serde_json::to_string_pretty(&r.params).unwrap());
        assert!(r.defect_valuation.passes(0));
    }

    #[test]
    fn finite_depth1_residue_pattern() {
        for n in [2u32, 3, 4] {
            let r = check_finite_depth1(60, n);
            assert!(r.pass, "n={n}: {}", serde_json::to_string_pretty(&r.params).unwrap());
        }
    }

    #[test]
    fn kz_shape_depth_one() {
        let r = check_kz_shape(3, &[7, 11, 13]);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn atom_evaluator_crosses_table_and_zeta_series() {
        // Ad[e0 e1 e0 e1] = C(-2,1) zeta(3), assembled entirely through the
        // atom path (table entry on one side, binomial times the Bernoulli
        // series on the other).
        let mut ctx = small_ctx();
        let check = IdentityCheck {
            name: "closed-form-atom".into(),
            params: json!({}),
            terms: vec![
                (rat_i64(1), vec![Atom::AdjointEntry { b: 1, index: CompositionIndex::new(vec![2]) }]),
                (rat_i64(-1), vec![Atom::Binomial { top: -2, k: 1 }, Atom::ZetaDepth1 { n: 3 }]),
            ],
            requested_abs: 5,
        };
        let r = evaluate_identity(&mut ctx, &check);
        assert!(r.pass, "{r:?}");

        // A pure-rational identity cancels exactly: the depth-two Bernoulli
        // coefficients quasi-shuffle.
        let (l1, l2, b) = (2u32, 3u32, 4u32);
        let mut terms: Vec<(Rational, Vec<Atom>)> = vec![
            (rat_i64(1), vec![Atom::BCoeff { ls: vec![l1 + l2], b }]),
            (rat_i64(1), vec![Atom::BCoeff { ls: vec![l2, l1], b }]),
            (rat_i64(1), vec![Atom::BCoeff { ls: vec![l1, l2], b }]),
        ];
        for b1 in 0..=b {
            terms.push((
                rat_i64(-1),
                vec![Atom::BCoeff { ls: vec![l1], b: b1 }, Atom::BCoeff { ls: vec![l2], b: b - b1 }],
            ));
        }
        let r = evaluate_identity(
            &mut ctx,
            &IdentityCheck { name: "b-coeff-stuffle".into(), params: json!({}), terms, requested_abs: 5 },
        );
        assert!(r.pass, "{r:?}");
        assert_eq!(r.defect_valuation, DefectValuation::ExactZero);
    }

    #[test]
    fn quick_suite_is_deterministic() {
        let strip = |reports: &[Report]| -> String {
            let mut v = serde_json::to_value(reports).unwrap();
            for r in v.as_array_mut().unwrap() {
                r["millis"] = json!(0);
            }
            serde_json::to_string(&v).unwrap()
        };
        let a = run_suite("quick", 42, &SuiteParams::new()).unwrap();
        let b = run_suite("quick", 42, &SuiteParams::new()).unwrap();
        assert!(a.iter().all(|r| r.pass), "{}", strip(&a));
        assert_eq!(strip(&a), strip(&b));
        assert!(run_suite("nope", 0, &SuiteParams::new()).is_err());
        let mut bad = SuiteParams::new();
        bad.insert("bogus".into(), 1);
        assert!(run_suite("quick", 0, &bad).is_err());
    }
}

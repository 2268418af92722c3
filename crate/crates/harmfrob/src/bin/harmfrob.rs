//! Command-line driver: compute weighted harmonic sums, depth-one p-adic
//! zeta values, finite multiple zeta residues, adjoint coefficient tables,
//! and Σ-expansions; run verification suites; maintain the value cache.
//!
//! Configuration resolves command-line flags first, then `HARMFROB_`-prefixed
//! environment variables (`HARMFROB_CACHE_DIR`, `HARMFROB_PRECISION`), then
//! built-in defaults.  Exit status: 0 on success, 1 when a verification check
//! fails (or a runtime error occurs), 2 on usage errors.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use harmfrob::adjoint::{compositions_up_to, zeta_depth1, AdjointTable};
use harmfrob::arith::{PAdic, Valuation};
use harmfrob::harmonic::{finite_mzv, har_prime_power};
use harmfrob::relations::{
    check_expansion, run_suite, suite_names, DefectValuation, Report, SuiteParams,
};
use harmfrob::sigma::{expand_sigma, DEFAULT_MARGIN};
use harmfrob::store::{parse_index_str, CacheKey, CacheStore, OutputFormat};
use harmfrob::words::CompositionIndex;

/// Direct-summation guard: `p^alpha` beyond this is not desk-scale.
const MAX_PRIME_POWER: u64 = 1_000_000;
/// Adjoint tables re-expand many harmonic sums; keep the modulus smaller.
const MAX_TABLE_PRIME_POWER: u64 = 20_000;
const MAX_FINITE_PRIME: u64 = 100_000;

#[derive(Parser)]
#[command(
    name = "harmfrob",
    version,
    about = "Weighted multiple harmonic sums, p-adic multiple zeta values, and their adjoint relations",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format: csv, json, or text (default: inferred from --out
    /// extension, else text).
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutputFormat>,

    /// Write the result to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Directory holding the persistent value cache.
    #[arg(long, global = true, env = "HARMFROB_CACHE_DIR", value_name = "DIR")]
    cache_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a weighted harmonic sum har_{p^alpha}(index) as a p-adic value.
    Har(HarArgs),
    /// Tabulate finite multiple zeta residues for all primes up to a bound.
    FiniteMzv(FiniteMzvArgs),
    /// Evaluate the depth-one p-adic zeta value zeta_{p,alpha}(n) by its
    /// Bernoulli series.
    Zeta1(Zeta1Args),
    /// Build and export an adjoint coefficient table.
    Adjoint(AdjointArgs),
    /// Expand har_{p^alpha * m} over har_m and har_{p^alpha} contributions.
    ExpandSigma(ExpandSigmaArgs),
    /// Run a named verification suite and report pass/fail per check.
    Verify(VerifyArgs),
    /// Compact the cache: drop superseded records and rewrite files sorted.
    CacheGc,
}

#[derive(Args)]
struct HarArgs {
    /// Odd prime modulus base.
    #[arg(long)]
    p: u64,
    /// Prime-power exponent: the sum runs to p^alpha - 1.
    #[arg(long, default_value_t = 1)]
    alpha: u32,
    /// Composition n_d,...,n_1, outermost part first.
    #[arg(long, value_parser = parse_index_cli)]
    index: CompositionIndex,
    /// Absolute p-adic precision to certify.
    #[arg(long, env = "HARMFROB_PRECISION", default_value_t = 8)]
    prec: i64,
}

#[derive(Args)]
struct FiniteMzvArgs {
    /// Composition n_d,...,n_1, outermost part first.
    #[arg(long, value_parser = parse_index_cli)]
    index: CompositionIndex,
    /// Largest prime to include.
    #[arg(long)]
    pmax: u64,
}

#[derive(Args)]
struct Zeta1Args {
    /// Odd prime.
    #[arg(long)]
    p: u64,
    /// Prime-power exponent of the underlying harmonic sums.
    #[arg(long, default_value_t = 1)]
    alpha: u32,
    /// Zeta argument, at least 2.
    #[arg(long)]
    n: u32,
    /// Absolute p-adic precision to certify.
    #[arg(long, env = "HARMFROB_PRECISION", default_value_t = 10)]
    prec: i64,
}

#[derive(Args)]
struct AdjointArgs {
    /// Odd prime.
    #[arg(long)]
    p: u64,
    /// Prime-power exponent.
    #[arg(long, default_value_t = 1)]
    alpha: u32,
    /// Budget on b + weight(index) for the table entries.
    #[arg(long, default_value_t = 6)]
    weight: u32,
    /// Optional depth cap on the entry indices.
    #[arg(long)]
    depth: Option<u32>,
    /// Absolute p-adic precision to certify.
    #[arg(long, env = "HARMFROB_PRECISION", default_value_t = 6)]
    prec: i64,
    /// Export a single entry: its shift exponent (needs --index too).
    #[arg(long)]
    b: Option<u32>,
    /// Export a single entry: its composition (needs --b too).
    #[arg(long, value_parser = parse_index_cli)]
    index: Option<CompositionIndex>,
}

#[derive(Args)]
struct ExpandSigmaArgs {
    /// Composition n_d,...,n_1, outermost part first.
    #[arg(long, value_parser = parse_index_cli)]
    index: CompositionIndex,
    /// Drop terms whose har_{p^alpha} factors exceed this total weight.
    #[arg(long, default_value_t = 6)]
    weight_cutoff: u32,
    /// Evaluate numerically at this odd prime (needs --mmax too).
    #[arg(long)]
    p: Option<u64>,
    /// Prime-power exponent for numeric evaluation.
    #[arg(long, default_value_t = 1)]
    alpha: u32,
    /// Check the evaluation against exact har_{p^alpha * m} for m up to this.
    #[arg(long)]
    mmax: Option<u64>,
    /// Absolute p-adic precision to certify in numeric mode.
    #[arg(long, env = "HARMFROB_PRECISION", default_value_t = 6)]
    prec: i64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name: default, quick, finite, or contraction.
    #[arg(long, default_value = "default")]
    suite: String,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override a suite parameter, e.g. --param trials=20.  May repeat.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

enum CmdError {
    /// Bad arguments or argument combinations: exit 2.
    Usage(String),
    /// Runtime failure (I/O and similar): exit 1.
    Run(String),
}

struct CmdOutput {
    /// Where the main artifact goes: --out file, or stdout.
    body: String,
    /// Printed to stdout when the body went to a file.
    console: Option<String>,
    /// True when every check the command ran passed.
    checks_passed: bool,
}

impl CmdOutput {
    fn plain(body: String) -> Self {
        CmdOutput { body, console: None, checks_passed: true }
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn parse_index_cli(s: &str) -> Result<CompositionIndex, String> {
    parse_index_str(s)
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CmdError> {
    Err(CmdError::Usage(msg.into()))
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Validate `(p, alpha)` for direct-summation commands and return `p^alpha`.
fn checked_prime_power(p: u64, alpha: u32, limit: u64) -> Result<u64, CmdError> {
    if !is_prime(p) || p == 2 {
        return usage(format!("--p must be an odd prime, got {p}"));
    }
    if alpha == 0 {
        return usage("--alpha must be at least 1");
    }
    match p.checked_pow(alpha) {
        Some(m) if m <= limit => Ok(m),
        _ => usage(format!("p^alpha = {p}^{alpha} exceeds the supported bound {limit}")),
    }
}

fn checked_precision(prec: i64) -> Result<i64, CmdError> {
    if (1..=200).contains(&prec) {
        Ok(prec)
    } else {
        usage(format!("--prec must be between 1 and 200, got {prec}"))
    }
}

/// The precision/valuation/digit triple every output format shares; the
/// field semantics match the cache record layout.
fn value_fields(x: &PAdic) -> (i64, Option<i64>, Vec<u64>) {
    match (x.valuation(), x.abs_precision()) {
        (Valuation::Infinite, _) => (0, None, Vec::new()),
        (Valuation::AtLeast(depth), _) => (0, Some(depth), Vec::new()),
        (Valuation::Exactly(val), Some(abs)) => (abs - val, Some(val), x.digits()),
        (Valuation::Exactly(_), None) => unreachable!("known values have finite precision"),
    }
}

/// Human-readable p-adic expansion, e.g. `2*5^3 + 4*5^5 + O(5^9)`.
fn padic_text(x: &PAdic) -> String {
    let p = x.prime();
    match (x.valuation(), x.abs_precision()) {
        (Valuation::Infinite, _) => "0 (exact)".to_string(),
        (Valuation::AtLeast(depth), _) => format!("0 + O({p}^{depth})"),
        (Valuation::Exactly(val), Some(abs)) => {
            let mut parts = Vec::new();
            for (i, &d) in x.digits().iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let e = val + i as i64;
                parts.push(match e {
                    0 => format!("{d}"),
                    1 => format!("{d}*{p}"),
                    _ => format!("{d}*{p}^{e}"),
                });
            }
            format!("{} + O({p}^{abs})", parts.join(" + "))
        }
        (Valuation::Exactly(_), None) => unreachable!("known values have finite precision"),
    }
}

fn padic_json(x: &PAdic) -> serde_json::Value {
    let (rel, valuation, digits) = value_fields(x);
    json!({
        "rel_precision": rel,
        "valuation": valuation.map_or(json!("inf"), |v| json!(v)),
        "digits": digits,
        "text": padic_text(x),
    })
}

/// CSV field for a composition; quoted because parts are comma-separated.
fn csv_index(index: &CompositionIndex) -> String {
    if index.is_empty() {
        "-".to_string()
    } else {
        let joined: Vec<String> = index.parts().iter().map(|n| n.to_string()).collect();
        format!("\"{}\"", joined.join(","))
    }
}

fn csv_value(x: &PAdic) -> String {
    let (rel, valuation, digits) = value_fields(x);
    let val = valuation.map_or("inf".to_string(), |v| v.to_string());
    let digit_field = if digits.is_empty() {
        "-".to_string()
    } else {
        let joined: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
        format!("\"{}\"", joined.join(","))
    };
    format!("{rel},{val},{digit_field}")
}

fn index_display(index: &CompositionIndex) -> String {
    if index.is_empty() {
        "()".to_string()
    } else {
        let joined: Vec<String> = index.parts().iter().map(|n| n.to_string()).collect();
        format!("({})", joined.join(","))
    }
}

fn open_store(dir: &Option<PathBuf>) -> Result<Option<CacheStore>, CmdError> {
    match dir {
        None => Ok(None),
        Some(d) => CacheStore::open(d)
            .map(Some)
            .map_err(|e| CmdError::Run(format!("cannot open cache directory {}: {e}", d.display()))),
    }
}

fn cache_get(
    store: &Option<CacheStore>,
    key: &CacheKey,
    min_abs: i64,
) -> Result<Option<PAdic>, CmdError> {
    match store {
        None => Ok(None),
        Some(s) => s.get(key, min_abs).map_err(|e| CmdError::Run(format!("cache read: {e}"))),
    }
}

fn cache_put(store: &Option<CacheStore>, key: &CacheKey, value: &PAdic) -> Result<(), CmdError> {
    if let Some(s) = store {
        s.put(key, value).map_err(|e| CmdError::Run(format!("cache write: {e}")))?;
    }
    Ok(())
}

fn cmd_har(a: &HarArgs, store: &Option<CacheStore>, format: OutputFormat) -> Result<CmdOutput, CmdError> {
    checked_prime_power(a.p, a.alpha, MAX_PRIME_POWER)?;
    let prec = checked_precision(a.prec)?;
    let key = CacheKey::har(a.p, a.alpha, a.index.clone());
    let value = match cache_get(store, &key, prec)? {
        Some(hit) => hit,
        None => {
            let computed = har_prime_power(a.p, a.alpha, &a.index, prec).truncate_to(prec);
            cache_put(store, &key, &computed)?;
            computed
        }
    };
    let body = match format {
        OutputFormat::Csv => format!(
            "index,p,alpha,rel_precision,valuation,digits\n{},{},{},{}\n",
            csv_index(&a.index),
            a.p,
            a.alpha,
            csv_value(&value)
        ),
        OutputFormat::Json => {
            let mut obj = padic_json(&value);
            let map = obj.as_object_mut().expect("padic_json yields an object");
            map.insert("index".into(), json!(a.index.parts()));
            map.insert("p".into(), json!(a.p));
            map.insert("alpha".into(), json!(a.alpha));
            format!("{}\n", serde_json::to_string_pretty(&obj).expect("serialize"))
        }
        OutputFormat::Text => format!(
            "har_{{{}^{}}}{} = {}\n",
            a.p,
            a.alpha,
            index_display(&a.index),
            padic_text(&value)
        ),
    };
    Ok(CmdOutput::plain(body))
}

fn cmd_finite_mzv(a: &FiniteMzvArgs, format: OutputFormat) -> Result<CmdOutput, CmdError> {
    if a.pmax < 2 {
        return usage("--pmax must be at least 2");
    }
    if a.pmax > MAX_FINITE_PRIME {
        return usage(format!("--pmax beyond {MAX_FINITE_PRIME} is not desk-scale"));
    }
    if a.index.is_empty() {
        return usage("--index must have at least one part");
    }
    let rows: Vec<(u64, u64)> = (2..=a.pmax)
        .filter(|&p| is_prime(p))
        .map(|p| (p, finite_mzv(p, &a.index)))
        .collect();
    let body = match format {
        OutputFormat::Csv => {
            let mut out = String::from("index,p,residue\n");
            for (p, residue) in &rows {
                let _ = writeln!(out, "{},{p},{residue}", csv_index(&a.index));
            }
            out
        }
        OutputFormat::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|(p, residue)| json!({"index": a.index.parts(), "p": p, "residue": residue}))
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&items).expect("serialize"))
        }
        OutputFormat::Text => {
            let mut out = format!("finite multiple zeta residues for index {}\n", index_display(&a.index));
            for (p, residue) in &rows {
                let _ = writeln!(out, "p = {p:>6}: {residue}");
            }
            out
        }
    };
    Ok(CmdOutput::plain(body))
}

fn cmd_zeta1(a: &Zeta1Args, format: OutputFormat) -> Result<CmdOutput, CmdError> {
    checked_prime_power(a.p, a.alpha, MAX_PRIME_POWER)?;
    let prec = checked_precision(a.prec)?;
    if a.n < 2 {
        return usage("--n must be at least 2 (the depth-one series needs n - 1 >= 1)");
    }
    let z = zeta_depth1(a.p, a.alpha, a.n, prec);
    let value = z.value.truncate_to(prec);
    let body = match format {
        OutputFormat::Csv => format!(
            "index,p,alpha,rel_precision,valuation,digits,truncation_l\n{},{},{},{},{}\n",
            a.n,
            a.p,
            a.alpha,
            csv_value(&value),
            z.truncation_l
        ),
        OutputFormat::Json => {
            let mut obj = padic_json(&value);
            let map = obj.as_object_mut().expect("padic_json yields an object");
            map.insert("n".into(), json!(a.n));
            map.insert("p".into(), json!(a.p));
            map.insert("alpha".into(), json!(a.alpha));
            map.insert("truncation_l".into(), json!(z.truncation_l));
            format!("{}\n", serde_json::to_string_pretty(&obj).expect("serialize"))
        }
        OutputFormat::Text => format!(
            "zeta_{{{},{}}}({}) = {}   [series truncated at l = {}]\n",
            a.p,
            a.alpha,
            a.n,
            padic_text(&value),
            z.truncation_l
        ),
    };
    Ok(CmdOutput::plain(body))
}

fn cmd_adjoint(
    a: &AdjointArgs,
    store: &Option<CacheStore>,
    format: OutputFormat,
) -> Result<CmdOutput, CmdError> {
    checked_prime_power(a.p, a.alpha, MAX_TABLE_PRIME_POWER)?;
    let prec = checked_precision(a.prec)?;
    if a.weight == 0 || a.weight > 12 {
        return usage("--weight must be between 1 and 12");
    }
    let pairs: Vec<(u32, CompositionIndex)> = match (&a.b, &a.index) {
        (Some(b), Some(index)) => {
            if *b + index.weight() > a.weight {
                return usage(format!(
                    "entry (b={b}, index={}) exceeds the --weight budget {}",
                    index_display(index),
                    a.weight
                ));
            }
            if a.depth.is_some_and(|cap| index.depth() > cap) {
                return usage("the requested entry is deeper than --depth allows");
            }
            vec![(*b, index.clone())]
        }
        (None, None) => {
            let mut pairs = Vec::new();
            for index in compositions_up_to(a.weight, a.depth) {
                for b in 0..=(a.weight - index.weight()) {
                    pairs.push((b, index.clone()));
                }
            }
            pairs
        }
        _ => return usage("single-entry export needs both --b and --index"),
    };

    let mut values: Vec<Option<PAdic>> = Vec::with_capacity(pairs.len());
    for (b, index) in &pairs {
        let key = CacheKey::adjoint(a.p, a.alpha, *b, index.clone());
        values.push(cache_get(store, &key, prec)?);
    }
    if values.iter().any(|v| v.is_none()) {
        let margin = DEFAULT_MARGIN;
        let cutoff = u32::try_from(prec + margin - 1).expect("precision fits in u32");
        let table = AdjointTable::build(a.p, a.alpha, a.weight, a.depth, cutoff, margin);
        for ((b, index), slot) in pairs.iter().zip(values.iter_mut()) {
            if slot.is_none() {
                let entry = table
                    .entry(*b, index)
                    .expect("every in-budget slot is materialized")
                    .truncate_to(prec);
                let key = CacheKey::adjoint(a.p, a.alpha, *b, index.clone());
                cache_put(store, &key, &entry)?;
                *slot = Some(entry);
            }
        }
    }

    let body = match format {
        OutputFormat::Csv => {
            let mut out = String::from("index,p,alpha,b,rel_precision,valuation,digits\n");
            for ((b, index), value) in pairs.iter().zip(&values) {
                let value = value.as_ref().expect("filled above");
                let _ = writeln!(
                    out,
                    "{},{},{},{b},{}",
                    csv_index(index),
                    a.p,
                    a.alpha,
                    csv_value(value)
                );
            }
            out
        }
        OutputFormat::Json => {
            let items: Vec<serde_json::Value> = pairs
                .iter()
                .zip(&values)
                .map(|((b, index), value)| {
                    let mut obj = padic_json(value.as_ref().expect("filled above"));
                    let map = obj.as_object_mut().expect("object");
                    map.insert("index".into(), json!(index.parts()));
                    map.insert("p".into(), json!(a.p));
                    map.insert("alpha".into(), json!(a.alpha));
                    map.insert("b".into(), json!(b));
                    obj
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&items).expect("serialize"))
        }
        OutputFormat::Text => {
            let mut out = format!(
                "adjoint coefficients, p = {}, alpha = {}, b + weight <= {}\n",
                a.p, a.alpha, a.weight
            );
            for ((b, index), value) in pairs.iter().zip(&values) {
                let value = value.as_ref().expect("filled above");
                let _ = writeln!(out, "b = {b}, index = {:<10} {}", index_display(index), padic_text(value));
            }
            out
        }
    };
    Ok(CmdOutput::plain(body))
}

fn cmd_expand_sigma(a: &ExpandSigmaArgs, format: OutputFormat) -> Result<CmdOutput, CmdError> {
    if a.index.is_empty() {
        return usage("--index must have at least one part");
    }
    if a.weight_cutoff == 0 || a.weight_cutoff > 14 {
        return usage("--weight-cutoff must be between 1 and 14");
    }
    match (a.p, a.mmax) {
        (Some(p), Some(mmax)) => {
            checked_prime_power(p, a.alpha, MAX_TABLE_PRIME_POWER)?;
            let prec = checked_precision(a.prec)?;
            if mmax < 2 {
                return usage("--mmax must be at least 2");
            }
            if p.pow(a.alpha).saturating_mul(mmax) > MAX_PRIME_POWER {
                return usage("p^alpha * mmax exceeds the direct-summation bound");
            }
            let report = check_expansion(p, a.alpha, &a.index, mmax, prec);
            let checks_passed = report.pass;
            let body = match format {
                OutputFormat::Json => {
                    format!("{}\n", serde_json::to_string_pretty(&report).expect("serialize"))
                }
                _ => report_line(&report),
            };
            Ok(CmdOutput { body, console: None, checks_passed })
        }
        (None, None) => {
            let expansion = expand_sigma(&a.index, a.weight_cutoff);
            let body = match format {
                OutputFormat::Csv => {
                    let mut out =
                        String::from("index,coefficient,m_power,har_m,har_pa_factors\n");
                    for term in &expansion.terms {
                        let factors: Vec<String> = term
                            .har_pa
                            .iter()
                            .map(|k| {
                                let parts: Vec<String> =
                                    k.parts().iter().map(|n| n.to_string()).collect();
                                parts.join(",")
                            })
                            .collect();
                        let factor_field = if factors.is_empty() {
                            "-".to_string()
                        } else {
                            format!("\"{}\"", factors.join(" | "))
                        };
                        let har_m = if term.har_m.is_empty() {
                            "-".to_string()
                        } else {
                            csv_index(&term.har_m)
                        };
                        let _ = writeln!(
                            out,
                            "{},{},{},{har_m},{factor_field}",
                            csv_index(&a.index),
                            term.coeff,
                            term.m_power
                        );
                    }
                    out
                }
                OutputFormat::Json => {
                    let items: Vec<serde_json::Value> = expansion
                        .terms
                        .iter()
                        .map(|term| {
                            json!({
                                "coefficient": term.coeff.to_string(),
                                "m_power": term.m_power,
                                "har_m": term.har_m.parts(),
                                "har_pa_factors": term.har_pa.iter().map(|k| k.parts().to_vec()).collect::<Vec<_>>(),
                            })
                        })
                        .collect();
                    let obj = json!({
                        "index": a.index.parts(),
                        "weight_cutoff": a.weight_cutoff,
                        "terms": items,
                    });
                    format!("{}\n", serde_json::to_string_pretty(&obj).expect("serialize"))
                }
                OutputFormat::Text => {
                    let mut out = format!(
                        "har_{{p^alpha * m}}{} expanded, har_{{p^alpha}} weight cutoff {}\n",
                        index_display(&a.index),
                        a.weight_cutoff
                    );
                    for term in &expansion.terms {
                        let _ = writeln!(out, "  {term}");
                    }
                    out
                }
            };
            Ok(CmdOutput::plain(body))
        }
        _ => usage("numeric evaluation needs both --p and --mmax (symbolic mode takes neither)"),
    }
}

fn defect_text(d: &DefectValuation) -> String {
    match d {
        DefectValuation::ExactZero => "exact zero".to_string(),
        DefectValuation::AtLeast(v) => format!(">= {v}"),
        DefectValuation::Unevaluated => "unevaluated".to_string(),
    }
}

/// One deterministic summary line per report (no timing, so reruns match).
fn report_line(report: &Report) -> String {
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    format!(
        "{verdict} {} (defect {}, threshold {})\n",
        report.name,
        defect_text(&report.defect_valuation),
        report.threshold
    )
}

fn cmd_verify(
    a: &VerifyArgs,
    format: OutputFormat,
    to_file: bool,
) -> Result<CmdOutput, CmdError> {
    let mut params = SuiteParams::new();
    for raw in &a.params {
        let Some((key, value)) = raw.split_once('=') else {
            return usage(format!("--param expects KEY=VALUE, got `{raw}`"));
        };
        let value: i64 = value
            .parse()
            .map_err(|_| CmdError::Usage(format!("--param {key} needs an integer, got `{value}`")))?;
        params.insert(key.to_string(), value);
    }
    let reports = run_suite(&a.suite, a.seed, &params).map_err(|e| {
        CmdError::Usage(format!("{e}; available suites: {}", suite_names().join(", ")))
    })?;
    let checks_passed = reports.iter().all(|r| r.pass);
    let mut text = String::new();
    for report in &reports {
        text.push_str(&report_line(report));
    }
    let _ = writeln!(
        text,
        "{}: {} of {} checks passed",
        a.suite,
        reports.iter().filter(|r| r.pass).count(),
        reports.len()
    );
    let json_body = || {
        let obj = json!({
            "suite": a.suite,
            "seed": a.seed,
            "params": params,
            "all_passed": checks_passed,
            "reports": reports,
        });
        format!("{}\n", serde_json::to_string_pretty(&obj).expect("serialize"))
    };
    let (body, console) = if to_file {
        (json_body(), Some(text))
    } else if format == OutputFormat::Json {
        (json_body(), None)
    } else {
        (text, None)
    };
    Ok(CmdOutput { body, console, checks_passed })
}

fn cmd_cache_gc(store: &Option<CacheStore>, format: OutputFormat) -> Result<CmdOutput, CmdError> {
    let Some(store) = store else {
        return usage("cache-gc needs --cache-dir (or HARMFROB_CACHE_DIR)");
    };
    let stats = store.gc().map_err(|e| CmdError::Run(format!("cache-gc: {e}")))?;
    let body = match format {
        OutputFormat::Json => {
            format!("{}\n", serde_json::to_string_pretty(&stats).expect("serialize"))
        }
        _ => format!("cache-gc in {}: {stats}\n", store.dir().display()),
    };
    Ok(CmdOutput::plain(body))
}

fn resolve_format(flag: Option<OutputFormat>, out: &Option<PathBuf>) -> OutputFormat {
    if let Some(f) = flag {
        return f;
    }
    match out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        _ => OutputFormat::Text,
    }
}

fn run(cli: &Cli) -> Result<CmdOutput, CmdError> {
    let format = resolve_format(cli.format, &cli.out);
    let store = open_store(&cli.cache_dir)?;
    match &cli.command {
        Command::Har(a) => cmd_har(a, &store, format),
        Command::FiniteMzv(a) => cmd_finite_mzv(a, format),
        Command::Zeta1(a) => cmd_zeta1(a, format),
        Command::Adjoint(a) => cmd_adjoint(a, &store, format),
        Command::ExpandSigma(a) => cmd_expand_sigma(a, format),
        Command::Verify(a) => cmd_verify(a, format, cli.out.is_some()),
        Command::CacheGc => cmd_cache_gc(&store, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, output.body.as_bytes()) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                    if let Some(console) = &output.console {
                        print!("{console}");
                    }
                }
                None => print!("{}", output.body),
            }
            if output.checks_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CmdError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

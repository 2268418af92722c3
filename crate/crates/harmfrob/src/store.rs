//! Persistent cache for computed p-adic values, plus run configuration.
//!
//! Computing a weighted harmonic sum `har_{p^alpha}(n_d,...,n_1)` to high
//! precision, or a full adjoint-coefficient table, costs far more than
//! re-reading the result from disk.  This module stores such values in
//! plain-text, append-only cache files so that repeated runs are warm and
//! byte-reproducible.
//!
//! # Record format
//!
//! One record per line, pipe-separated:
//!
//! ```text
//! version|kind|p|alpha|index|b|rel_precision|valuation|digits
//! ```
//!
//! * `kind` is `har` (a weighted harmonic sum) or `adjoint` (a coefficient
//!   from an adjoint table, keyed additionally by the shift exponent `b`);
//! * `index` is the composition `n_d,...,n_1`, outermost part first, or `-`
//!   for the empty index;
//! * `b` is `-` for `har` records;
//! * `valuation` is the exponent of the leading digit, `inf` for a value
//!   known to be exactly zero;
//! * `digits` are the base-`p` digits of the unit part, little-endian,
//!   comma-separated, padded to `rel_precision` entries; `-` when the value
//!   has no certified digits (exact or bounded zero).
//!
//! A record round-trips to a bit-identical [`PAdic`]: the three value states
//! map to `rel_precision > 0` (known digits), `rel_precision = 0` with a
//! finite valuation (zero to that depth), and `rel_precision = 0` with
//! valuation `inf` (exact zero).
//!
//! # Files, keys, and concurrency
//!
//! Each `(kind, p)` pair owns one append-only file, `<kind>-p<p>.cache`, in
//! the cache directory.  The canonical key of a record is
//! `(kind, p, alpha, index, b, rel_precision)`; records that carry digits
//! are unique per canonical key, so the same value cached at two precisions
//! occupies two records and [`CacheStore::get`] returns the most precise one
//! that meets the request.  Zero records all have `rel_precision = 0`, so
//! among them the valuation field doubles as the distinguishing component
//! (a deeper bounded zero is a strictly better record).
//!
//! Writers take an exclusive `flock` on the file, re-check for a duplicate,
//! and append the whole line with a single write, so concurrent puts of
//! distinct keys both land intact.  Readers take a shared lock.  Lines whose
//! version field is not [`FORMAT_VERSION`] are skipped with a warning;
//! [`CacheStore::gc`] rewrites each file deterministically, keeping only the
//! best record per logical key in sorted order.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Read as _, Seek as _, SeekFrom, Write as _};
use std::os::unix::io::AsRawFd;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{PAdic, Valuation};
use crate::words::CompositionIndex;

/// Version stamp written into every record line.
pub const FORMAT_VERSION: u32 = 1;

/// What kind of value a cache record holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CacheKind {
    /// A weighted harmonic sum `har_{p^alpha}(index)`.
    Har,
    /// An adjoint-table coefficient at shift exponent `b` and `index`.
    Adjoint,
}

impl CacheKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheKind::Har => "har",
            CacheKind::Adjoint => "adjoint",
        }
    }
}

impl FromStr for CacheKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "har" => Ok(CacheKind::Har),
            "adjoint" => Ok(CacheKind::Adjoint),
            other => Err(format!("unknown cache kind `{other}`")),
        }
    }
}

/// Logical identity of a cached value (everything but the precision).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheKey {
    pub kind: CacheKind,
    pub p: u64,
    pub alpha: u32,
    pub index: CompositionIndex,
    /// Shift exponent; `Some` exactly when `kind` is [`CacheKind::Adjoint`].
    pub b: Option<u32>,
}

impl CacheKey {
    /// Key for a weighted harmonic sum `har_{p^alpha}(index)`.
    pub fn har(p: u64, alpha: u32, index: CompositionIndex) -> Self {
        assert!(alpha >= 1, "prime-power exponent must be at least 1");
        CacheKey { kind: CacheKind::Har, p, alpha, index, b: None }
    }

    /// Key for an adjoint coefficient at shift exponent `b`.
    pub fn adjoint(p: u64, alpha: u32, b: u32, index: CompositionIndex) -> Self {
        assert!(alpha >= 1, "prime-power exponent must be at least 1");
        CacheKey { kind: CacheKind::Adjoint, p, alpha, index, b: Some(b) }
    }

    fn check_shape(&self) {
        match self.kind {
            CacheKind::Har => {
                assert!(self.b.is_none(), "har keys carry no shift exponent")
            }
            CacheKind::Adjoint => {
                assert!(self.b.is_some(), "adjoint keys need a shift exponent")
            }
        }
    }
}

/// Render a composition as the canonical `n_d,...,n_1` field (`-` if empty).
pub fn index_to_str(index: &CompositionIndex) -> String {
    if index.is_empty() {
        "-".to_string()
    } else {
        let parts: Vec<String> = index.parts().iter().map(|n| n.to_string()).collect();
        parts.join(",")
    }
}

/// Parse the canonical index field; accepts `-` or `` for the empty index.
pub fn parse_index_str(s: &str) -> Result<CompositionIndex, String> {
    let s = s.trim();
    if s.is_empty() || s == "-" {
        return Ok(CompositionIndex::empty());
    }
    let mut parts = Vec::new();
    for piece in s.split(',') {
        let n: u32 = piece
            .trim()
            .parse()
            .map_err(|_| format!("index part `{piece}` is not a positive integer"))?;
        if n == 0 {
            return Err("index parts must be at least 1".to_string());
        }
        parts.push(n);
    }
    Ok(CompositionIndex::new(parts))
}

/// Why a cache line failed to parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordParseError {
    /// The line's version field differs from [`FORMAT_VERSION`]; readers
    /// skip such lines rather than failing.
    VersionMismatch { found: String },
    /// The line is not a well-formed record of the current version.
    Malformed(String),
}

impl fmt::Display for RecordParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordParseError::VersionMismatch { found } => {
                write!(f, "record version `{found}` is not {FORMAT_VERSION}")
            }
            RecordParseError::Malformed(msg) => write!(f, "malformed record: {msg}"),
        }
    }
}

/// One parsed cache line.  Field order mirrors the on-disk layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheRecord {
    pub kind: CacheKind,
    pub p: u64,
    pub alpha: u32,
    /// Composition parts, outermost first.
    pub index: Vec<u32>,
    pub b: Option<u32>,
    /// Number of certified base-p digits (0 for exact and bounded zeros).
    pub rel_precision: i64,
    /// Valuation of the value; `None` encodes `inf` (exact zero).  For a
    /// bounded zero this is the certified depth of the zero.
    pub valuation: Option<i64>,
    /// Base-p digits of the unit part, little-endian, `rel_precision` many.
    pub digits: Vec<u64>,
    pub format_version: u32,
}

impl CacheRecord {
    /// Encode a value under a key.  The value's prime must match the key's.
    pub fn from_value(key: &CacheKey, value: &PAdic) -> Self {
        key.check_shape();
        assert!(
            value.prime() == key.p,
            "value lives over p = {} but the key says p = {}",
            value.prime(),
            key.p
        );
        let (rel_precision, valuation) = match (value.valuation(), value.abs_precision()) {
            (Valuation::Infinite, _) => (0, None),
            (Valuation::AtLeast(depth), _) => (0, Some(depth)),
            (Valuation::Exactly(val), Some(abs)) => (abs - val, Some(val)),
            (Valuation::Exactly(_), None) => unreachable!("known values have finite precision"),
        };
        CacheRecord {
            kind: key.kind,
            p: key.p,
            alpha: key.alpha,
            index: key.index.parts().to_vec(),
            b: key.b,
            rel_precision,
            valuation,
            digits: value.digits(),
            format_version: FORMAT_VERSION,
        }
    }

    /// Reconstruct the stored value, bit-identical to what was encoded.
    pub fn to_padic(&self) -> PAdic {
        match (self.rel_precision, self.valuation) {
            (0, None) => PAdic::exact_zero(self.p),
            (0, Some(depth)) => PAdic::bounded_zero(self.p, depth),
            (rel, Some(val)) => {
                let mut unit = BigUint::zero();
                for &d in self.digits.iter().rev() {
                    unit = unit * BigUint::from(self.p) + BigUint::from(d);
                }
                PAdic::from_bigint(&BigInt::from(unit), self.p, rel).scale_pow_p(val)
            }
            (_, None) => unreachable!("records with digits carry a valuation"),
        }
    }

    /// The key this record answers to.
    pub fn key(&self) -> CacheKey {
        CacheKey {
            kind: self.kind,
            p: self.p,
            alpha: self.alpha,
            index: CompositionIndex::new(self.index.clone()),
            b: self.b,
        }
    }

    /// Absolute precision of the stored value; `None` means exact.
    pub fn abs_precision(&self) -> Option<i64> {
        match (self.rel_precision, self.valuation) {
            (0, None) => None,
            (0, Some(depth)) => Some(depth),
            (rel, Some(val)) => Some(val + rel),
            (_, None) => unreachable!("records with digits carry a valuation"),
        }
    }

    fn logical_key(&self) -> (CacheKind, u64, u32, Vec<u32>, Option<u32>) {
        (self.kind, self.p, self.alpha, self.index.clone(), self.b)
    }

    /// Canonical key: logical key plus `rel_precision`, with the valuation
    /// standing in for the precision among zero records (see module docs).
    fn canonical_key(&self) -> (CacheKind, u64, u32, Vec<u32>, Option<u32>, i64, Option<i64>) {
        let zero_depth = if self.rel_precision == 0 { self.valuation } else { None };
        (
            self.kind,
            self.p,
            self.alpha,
            self.index.clone(),
            self.b,
            self.rel_precision,
            zero_depth,
        )
    }

    /// Serialize as one cache line (no trailing newline).
    pub fn to_line(&self) -> String {
        let index = if self.index.is_empty() {
            "-".to_string()
        } else {
            self.index.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
        };
        let b = self.b.map_or("-".to_string(), |b| b.to_string());
        let valuation = self.valuation.map_or("inf".to_string(), |v| v.to_string());
        let digits = if self.digits.is_empty() {
            "-".to_string()
        } else {
            self.digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
        };
        format!(
            "{}|{}|{}|{}|{}|{}|{}|{}|{}",
            self.format_version,
            self.kind.as_str(),
            self.p,
            self.alpha,
            index,
            b,
            self.rel_precision,
            valuation,
            digits
        )
    }

    /// Parse one cache line.
    pub fn parse_line(line: &str) -> Result<Self, RecordParseError> {
        let bad = |msg: &str| RecordParseError::Malformed(msg.to_string());
        let fields: Vec<&str> = line.trim_end_matches('\n').split('|').collect();
        if fields.is_empty() || fields[0].is_empty() {
            return Err(bad("empty line"));
        }
        if fields[0] != FORMAT_VERSION.to_string() {
            if fields[0].chars().all(|c| c.is_ascii_digit()) {
                return Err(RecordParseError::VersionMismatch { found: fields[0].to_string() });
            }
            return Err(bad("line does not start with a version field"));
        }
        if fields.len() != 9 {
            return Err(bad(&format!("expected 9 fields, found {}", fields.len())));
        }
        let kind: CacheKind = fields[1].parse().map_err(|e: String| bad(&e))?;
        let p: u64 = fields[2].parse().map_err(|_| bad("prime field"))?;
        if p < 2 {
            return Err(bad("prime field must be at least 2"));
        }
        let alpha: u32 = fields[3].parse().map_err(|_| bad("alpha field"))?;
        if alpha == 0 {
            return Err(bad("alpha field must be at least 1"));
        }
        let index = parse_index_str(fields[4])
            .map_err(|e| bad(&e))?
            .parts()
            .to_vec();
        let b: Option<u32> = match (kind, fields[5]) {
            (CacheKind::Har, "-") => None,
            (CacheKind::Har, _) => return Err(bad("har records carry no shift exponent")),
            (CacheKind::Adjoint, "-") => {
                return Err(bad("adjoint records need a shift exponent"))
            }
            (CacheKind::Adjoint, s) => {
                Some(s.parse().map_err(|_| bad("shift exponent field"))?)
            }
        };
        let rel_precision: i64 = fields[6].parse().map_err(|_| bad("rel_precision field"))?;
        if rel_precision < 0 {
            return Err(bad("rel_precision must be nonnegative"));
        }
        let valuation: Option<i64> = if fields[7] == "inf" {
            None
        } else {
            Some(fields[7].parse().map_err(|_| bad("valuation field"))?)
        };
        let digits: Vec<u64> = if fields[8] == "-" {
            Vec::new()
        } else {
            fields[8]
                .split(',')
                .map(|d| d.parse::<u64>().map_err(|_| bad("digit field")))
                .collect::<Result<_, _>>()?
        };
        if rel_precision == 0 && !digits.is_empty() {
            return Err(bad("zero records carry no digits"));
        }
        if rel_precision > 0 {
            if valuation.is_none() {
                return Err(bad("records with digits need a finite valuation"));
            }
            if digits.len() as i64 != rel_precision {
                return Err(bad("digit count must equal rel_precision"));
            }
            if digits.iter().any(|&d| d >= p) {
                return Err(bad("digits must be base-p"));
            }
            if digits[0] == 0 {
                return Err(bad("leading digit of a unit part cannot vanish"));
            }
        }
        Ok(CacheRecord {
            kind,
            p,
            alpha,
            index,
            b,
            rel_precision,
            valuation,
            digits,
            format_version: FORMAT_VERSION,
        })
    }

    /// Deterministic within-file ordering used by [`CacheStore::gc`].
    fn sort_key(&self) -> (u32, Vec<u32>, i64, i64, i64) {
        (
            self.alpha,
            self.index.clone(),
            self.b.map_or(-1, |b| b as i64),
            self.rel_precision,
            self.valuation.unwrap_or(i64::MAX),
        )
    }
}

/// Outcome of a [`CacheStore::put`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PutOutcome {
    /// A new record line was appended.
    Inserted,
    /// An identical record already existed; the file was not touched.
    AlreadyPresent,
}

/// Statistics from one [`CacheStore::gc`] pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GcStats {
    /// Cache files rewritten.
    pub files: usize,
    /// Records kept (best per logical key).
    pub kept: usize,
    /// Valid records dropped because a more precise record exists.
    pub dropped_superseded: usize,
    /// Lines dropped because their version field is foreign.
    pub dropped_foreign_version: usize,
    /// Lines dropped because they do not parse.
    pub dropped_malformed: usize,
}

impl fmt::Display for GcStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} file(s): kept {}, dropped {} superseded, {} foreign-version, {} malformed",
            self.files,
            self.kept,
            self.dropped_superseded,
            self.dropped_foreign_version,
            self.dropped_malformed
        )
    }
}

fn flock(file: &File, exclusive: bool) -> io::Result<()> {
    let op = if exclusive { libc::LOCK_EX } else { libc::LOCK_SH };
    let rc = unsafe { libc::flock(file.as_raw_fd(), op) };
    if rc == 0 {
        Ok(())
    } else {
        Err(io::Error::last_os_error())
    }
}

/// A directory of append-only cache files, one per `(kind, p)`.
#[derive(Debug, Clone)]
pub struct CacheStore {
    dir: PathBuf,
}

impl CacheStore {
    /// Open (creating if necessary) the cache directory.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(CacheStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// The file holding all records of one kind at one prime.
    pub fn file_for(&self, kind: CacheKind, p: u64) -> PathBuf {
        self.dir.join(format!("{}-p{}.cache", kind.as_str(), p))
    }

    /// Store a value.  Appends one line under an exclusive lock unless an
    /// identical record is already present (idempotent for warm reruns).
    /// Two conflicting records with digits under the same canonical key
    /// indicate corruption and are refused.
    pub fn put(&self, key: &CacheKey, value: &PAdic) -> io::Result<PutOutcome> {
        key.check_shape();
        let record = CacheRecord::from_value(key, value);
        let path = self.file_for(key.kind, key.p);
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;
        flock(&file, true)?;
        let mut contents = String::new();
        file.seek(SeekFrom::Start(0))?;
        file.read_to_string(&mut contents)?;
        for line in contents.lines().filter(|l| !l.trim().is_empty()) {
            match CacheRecord::parse_line(line) {
                Ok(existing) => {
                    if existing == record {
                        return Ok(PutOutcome::AlreadyPresent);
                    }
                    if existing.canonical_key() == record.canonical_key() {
                        return Err(io::Error::new(
                            io::ErrorKind::InvalidData,
                            format!(
                                "cache file {} holds a conflicting record for `{}`",
                                path.display(),
                                record.to_line()
                            ),
                        ));
                    }
                }
                Err(_) => continue,
            }
        }
        let mut line = record.to_line();
        line.push('\n');
        file.write_all(line.as_bytes())?;
        file.flush()?;
        Ok(PutOutcome::Inserted)
    }

    /// Retrieve the most precise record for the key, provided it certifies
    /// at least `min_abs` absolute precision; otherwise a miss.  Lines with
    /// a foreign version field are skipped with a warning on stderr.
    pub fn get(&self, key: &CacheKey, min_abs: i64) -> io::Result<Option<PAdic>> {
        key.check_shape();
        let path = self.file_for(key.kind, key.p);
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        flock(&file, false)?;
        let mut contents = String::new();
        (&file).read_to_string(&mut contents)?;
        let wanted = (
            key.kind,
            key.p,
            key.alpha,
            key.index.parts().to_vec(),
            key.b,
        );
        let mut best: Option<CacheRecord> = None;
        for line in contents.lines().filter(|l| !l.trim().is_empty()) {
            match CacheRecord::parse_line(line) {
                Ok(record) => {
                    if record.logical_key() != wanted {
                        continue;
                    }
                    let better = match &best {
                        None => true,
                        Some(current) => {
                            more_precise(record.abs_precision(), current.abs_precision())
                        }
                    };
                    if better {
                        best = Some(record);
                    }
                }
                Err(RecordParseError::VersionMismatch { found }) => {
                    eprintln!(
                        "warning: skipping version-{found} record in {} (this build reads version {FORMAT_VERSION})",
                        path.display()
                    );
                }
                Err(RecordParseError::Malformed(msg)) => {
                    eprintln!("warning: skipping malformed record in {}: {msg}", path.display());
                }
            }
        }
        match best {
            Some(record) if record.abs_precision().map_or(true, |abs| abs >= min_abs) => {
                Ok(Some(record.to_padic()))
            }
            _ => Ok(None),
        }
    }

    /// Rewrite every cache file deterministically: drop foreign-version and
    /// malformed lines, keep only the most precise record per logical key,
    /// and sort the survivors.  Running gc twice in a row is a no-op.
    pub fn gc(&self) -> io::Result<GcStats> {
        let mut stats = GcStats::default();
        let mut paths: Vec<PathBuf> = fs::read_dir(&self.dir)?
            .collect::<io::Result<Vec<_>>>()?
            .into_iter()
            .map(|entry| entry.path())
            .filter(|path| {
                path.extension().map_or(false, |ext| ext == "cache") && path.is_file()
            })
            .collect();
        paths.sort();
        for path in paths {
            let file = OpenOptions::new().read(true).open(&path)?;
            flock(&file, true)?;
            let mut contents = String::new();
            (&file).read_to_string(&mut contents)?;
            let mut best: BTreeMap<Vec<u8>, CacheRecord> = BTreeMap::new();
            for line in contents.lines().filter(|l| !l.trim().is_empty()) {
                match CacheRecord::parse_line(line) {
                    Ok(record) => {
                        let logical = format!("{:?}", record.logical_key()).into_bytes();
                        match best.get(&logical) {
                            Some(current)
                                if !more_precise(
                                    record.abs_precision(),
                                    current.abs_precision(),
                                ) =>
                            {
                                stats.dropped_superseded += 1;
                            }
                            Some(_) => {
                                stats.dropped_superseded += 1;
                                best.insert(logical, record);
                            }
                            None => {
                                best.insert(logical, record);
                            }
                        }
                    }
                    Err(RecordParseError::VersionMismatch { .. }) => {
                        stats.dropped_foreign_version += 1;
                    }
                    Err(RecordParseError::Malformed(_)) => {
                        stats.dropped_malformed += 1;
                    }
                }
            }
            let mut records: Vec<CacheRecord> = best.into_values().collect();
            records.sort_by_key(|r| r.sort_key());
            let mut out = String::new();
            for record in &records {
                out.push_str(&record.to_line());
                out.push('\n');
            }
            stats.kept += records.len();
            let tmp = path.with_extension("cache.tmp");
            let mut tmp_file = File::create(&tmp)?;
            tmp_file.write_all(out.as_bytes())?;
            tmp_file.sync_all()?;
            fs::rename(&tmp, &path)?;
            stats.files += 1;
        }
        Ok(stats)
    }
}

/// Is precision `a` strictly better than `b`?  `None` (exact) beats all.
fn more_precise(a: Option<i64>, b: Option<i64>) -> bool {
    match (a, b) {
        (None, None) => false,
        (None, Some(_)) => true,
        (Some(_), None) => false,
        (Some(x), Some(y)) => x > y,
    }
}

/// Output formats the command-line tools can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OutputFormat {
    Csv,
    Json,
    Text,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            other => Err(format!("unknown output format `{other}` (expected csv, json, or text)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Text => "text",
        };
        write!(f, "{s}")
    }
}

/// Settings shared by the command-line tools: which primes and prime-power
/// exponents to sweep, how far to expand, how much precision to certify,
/// where the cache lives, and how to print.  Command-line flags override the
/// `HARMFROB_`-prefixed environment (the binary wires that priority up via
/// its argument parser); this struct just holds the resolved values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub primes: Vec<u64>,
    pub alphas: Vec<u32>,
    pub weight_cutoff: u32,
    pub depth_cutoff: u32,
    /// Target absolute precision `K >= 1` (powers of `p`).
    pub precision: i64,
    pub cache_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            primes: vec![5, 7],
            alphas: vec![1],
            weight_cutoff: 8,
            depth_cutoff: 3,
            precision: 8,
            cache_dir: None,
            format: OutputFormat::Text,
            seed: 0,
        }
    }
}

fn is_small_prime(n: u64) -> bool {
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

impl RunConfig {
    /// Check the invariants the computational routines rely on.
    pub fn validate(&self) -> Result<(), String> {
        if self.precision < 1 {
            return Err(format!("target precision must be at least 1, got {}", self.precision));
        }
        if self.primes.is_empty() {
            return Err("at least one prime is required".to_string());
        }
        for &p in &self.primes {
            if !is_small_prime(p) {
                return Err(format!("{p} is not prime"));
            }
            if p == 2 {
                return Err("the prime 2 is outside the supported range (odd primes only)"
                    .to_string());
            }
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|&a| a == 0) {
            return Err("prime-power exponents must be a nonempty list of integers >= 1"
                .to_string());
        }
        if self.weight_cutoff == 0 {
            return Err("weight cutoff must be at least 1".to_string());
        }
        Ok(())
    }
}

//! Words in two letters, composition indices, and the two combinatorial
//! products (shuffle on words, quasi-shuffle on compositions).
//!
//! Conventions used everywhere downstream:
//!
//! * A composition index is stored **outermost first**: `(n_d, ..., n_1)`
//!   with `n_1` governing the innermost (smallest) summation variable of a
//!   harmonic sum. The CLI string `"n_d,...,n_1"` lists parts in storage
//!   order.
//! * The word of a composition is `e0^{n_d-1} e1 ... e0^{n_1-1} e1`, read
//!   left to right, so words of compositions always end in `e1`.

use std::collections::HashMap;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// One of the two letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    E0,
    E1,
}

/// A word in `e0`, `e1` of length at most 31, packed into a bit string
/// (bit `i` set means letter `i` is `e1`). The derived ordering is graded:
/// shorter words come first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    len: u8,
    bits: u32,
}

pub const MAX_WORD_LEN: u8 = 31;

impl Word {
    pub fn empty() -> Self {
        Word { len: 0, bits: 0 }
    }

    pub fn e0() -> Self {
        Word { len: 1, bits: 0 }
    }

    pub fn e1() -> Self {
        Word { len: 1, bits: 1 }
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut w = Word::empty();
        for &l in letters {
            w = w.push(l);
        }
        w
    }

    /// Parse `"e0e1e0"` or the compact digit form `"010"`. The empty string
    /// is the empty word.
    pub fn parse(s: &str) -> Result<Self, String> {
        let stripped: String = s.chars().filter(|c| *c != 'e' && !c.is_whitespace()).collect();
        let mut w = Word::empty();
        for c in stripped.chars() {
            match c {
                '0' => w = w.push(Letter::E0),
                '1' => w = w.push(Letter::E1),
                _ => return Err(format!("unexpected character {c:?} in word {s:?}")),
            }
        }
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Weight is just the length.
    pub fn weight(&self) -> u32 {
        u32::from(self.len)
    }

    /// Number of `e1` letters.
    pub fn depth(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn letter(&self, i: usize) -> Letter {
        assert!(i < self.len(), "letter index {i} out of range for word of length {}", self.len);
        if self.bits >> i & 1 == 1 {
            Letter::E1
        } else {
            Letter::E0
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.len()).map(move |i| self.letter(i))
    }

    /// Append a letter on the right.
    pub fn push(&self, l: Letter) -> Self {
        assert!(self.len < MAX_WORD_LEN, "word length cap exceeded");
        let bit = match l {
            Letter::E0 => 0,
            Letter::E1 => 1,
        };
        Word { len: self.len + 1, bits: self.bits | bit << self.len }
    }

    pub fn push_e0(&self) -> Self {
        self.push(Letter::E0)
    }

    pub fn push_e1(&self) -> Self {
        self.push(Letter::E1)
    }

    pub fn concat(&self, other: &Word) -> Self {
        assert!(
            self.len + other.len <= MAX_WORD_LEN,
            "word length cap exceeded in concatenation"
        );
        Word { len: self.len + other.len, bits: self.bits | other.bits << self.len }
    }

    /// Split off the last letter.
    pub fn drop_last(&self) -> Option<(Word, Letter)> {
        if self.is_empty() {
            return None;
        }
        let l = self.letter(self.len() - 1);
        let w = Word { len: self.len - 1, bits: self.bits & !(1 << (self.len - 1)) };
        Some((w, l))
    }

    /// Split off the first letter.
    pub fn drop_first(&self) -> Option<(Letter, Word)> {
        if self.is_empty() {
            return None;
        }
        let l = self.letter(0);
        let w = Word { len: self.len - 1, bits: self.bits >> 1 };
        Some((l, w))
    }

    /// The contiguous subword `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Word {
        assert!(start <= end && end <= self.len(), "word slice out of range");
        let len = (end - start) as u8;
        let mask = if len == 0 { 0 } else { (1u32 << len) - 1 };
        Word { len, bits: self.bits >> start & mask }
    }

    pub fn reversed(&self) -> Self {
        let mut w = Word::empty();
        for i in (0..self.len()).rev() {
            w = w.push(self.letter(i));
        }
        w
    }

    /// `e0^k` prepended on the left.
    pub fn prepend_e0_run(&self, k: u32) -> Self {
        assert!(u32::from(self.len) + k <= u32::from(MAX_WORD_LEN), "word length cap exceeded");
        Word { len: self.len + k as u8, bits: self.bits << k }
    }

    /// Length of the maximal `e0` prefix.
    pub fn leading_e0_run(&self) -> usize {
        let mut k = 0;
        while k < self.len() && self.letter(k) == Letter::E0 {
            k += 1;
        }
        k
    }

    pub fn ends_with_e1(&self) -> bool {
        self.len > 0 && self.bits >> (self.len - 1) & 1 == 1
    }

    /// The composition whose word this is, if the word is empty or ends in
    /// `e1`. Words with trailing `e0` have no composition.
    pub fn to_composition(&self) -> Option<CompositionIndex> {
        if !self.is_empty() && !self.ends_with_e1() {
            return None;
        }
        let mut parts = Vec::new();
        let mut run = 0u32;
        for l in self.letters() {
            match l {
                Letter::E0 => run += 1,
                Letter::E1 => {
                    parts.push(run + 1);
                    run = 0;
                }
            }
        }
        Some(CompositionIndex { parts })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for l in self.letters() {
            match l {
                Letter::E0 => write!(f, "e0")?,
                Letter::E1 => write!(f, "e1")?,
            }
        }
        Ok(())
    }
}

/// A composition index `(n_d, ..., n_1)`, outermost part first, all parts
/// at least 1. The empty composition indexes the empty harmonic sum (whose
/// value is 1).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompositionIndex {
    parts: Vec<u32>,
}

impl CompositionIndex {
    pub fn new(parts: Vec<u32>) -> Self {
        assert!(parts.iter().all(|&n| n >= 1), "composition parts must be at least 1");
        CompositionIndex { parts }
    }

    pub fn empty() -> Self {
        CompositionIndex { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn depth(&self) -> u32 {
        self.parts.len() as u32
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// The innermost part `n_1` (last in storage order).
    pub fn innermost(&self) -> Option<u32> {
        self.parts.last().copied()
    }

    /// Split off the innermost part: `(n_d,...,n_2), n_1`.
    pub fn split_innermost(&self) -> Option<(CompositionIndex, u32)> {
        let (&last, rest) = self.parts.split_last()?;
        Some((CompositionIndex { parts: rest.to_vec() }, last))
    }

    /// Split off the outermost part: `n_d, (n_{d-1},...,n_1)`.
    pub fn split_outermost(&self) -> Option<(u32, CompositionIndex)> {
        let (&first, rest) = self.parts.split_first()?;
        Some((first, CompositionIndex { parts: rest.to_vec() }))
    }

    /// Append a new innermost part.
    pub fn push_innermost(&self, n: u32) -> Self {
        assert!(n >= 1, "composition parts must be at least 1");
        let mut parts = self.parts.clone();
        parts.push(n);
        CompositionIndex { parts }
    }

    /// Parts in reversed order (innermost becomes outermost).
    pub fn reversed(&self) -> Self {
        let mut parts = self.parts.clone();
        parts.reverse();
        CompositionIndex { parts }
    }

    /// The word `e0^{n_d-1} e1 ... e0^{n_1-1} e1`.
    pub fn word(&self) -> Word {
        let mut w = Word::empty();
        for &n in &self.parts {
            for _ in 1..n {
                w = w.push_e0();
            }
            w = w.push_e1();
        }
        w
    }
}

impl fmt::Display for CompositionIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "()");
        }
        let strs: Vec<String> = self.parts.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", strs.join(","))
    }
}

impl FromStr for CompositionIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "()" {
            return Ok(CompositionIndex::empty());
        }
        let mut parts = Vec::new();
        for piece in s.split(',') {
            let n: u32 = piece
                .trim()
                .parse()
                .map_err(|_| format!("bad composition part {piece:?} in {s:?}"))?;
            if n == 0 {
                return Err(format!("composition part must be at least 1 in {s:?}"));
            }
            parts.push(n);
        }
        Ok(CompositionIndex { parts })
    }
}

/// Shuffle product of two words as a multiset of words with integer
/// multiplicities.
pub fn shuffle_words(w1: Word, w2: Word) -> BTreeMap<Word, i64> {
    fn go(
        w1: Word,
        w2: Word,
        memo: &mut HashMap<(Word, Word), BTreeMap<Word, i64>>,
    ) -> BTreeMap<Word, i64> {
        if w1.is_empty() {
            return BTreeMap::from([(w2, 1)]);
        }
        if w2.is_empty() {
            return BTreeMap::from([(w1, 1)]);
        }
        if let Some(hit) = memo.get(&(w1, w2)) {
            return hit.clone();
        }
        let (u1, x1) = w1.drop_last().unwrap();
        let (u2, x2) = w2.drop_last().unwrap();
        let mut out: BTreeMap<Word, i64> = BTreeMap::new();
        for (w, c) in go(u1, w2, memo) {
            *out.entry(w.push(x1)).or_insert(0) += c;
        }
        for (w, c) in go(w1, u2, memo) {
            *out.entry(w.push(x2)).or_insert(0) += c;
        }
        memo.insert((w1, w2), out.clone());
        out
    }
    assert!(
        w1.len() + w2.len() <= MAX_WORD_LEN as usize,
        "shuffle product exceeds word length cap"
    );
    go(w1, w2, &mut HashMap::new())
}

/// Quasi-shuffle (stuffle) product of two composition indices. The
/// recursion peels innermost parts: with `(A,a)` meaning "A with innermost
/// part a",
///
/// ```text
/// (A,a) * (B,b) = ((A * (B,b)), a) + (((A,a) * B), b) + ((A * B), a+b)
/// ```
///
/// which matches merging two ascending summation chains and splitting on
/// whether the two innermost variables are distinct or collide.
pub fn stuffle_compositions(
    i1: &CompositionIndex,
    i2: &CompositionIndex,
) -> BTreeMap<CompositionIndex, i64> {
    if i1.is_empty() {
        return BTreeMap::from([(i2.clone(), 1)]);
    }
    if i2.is_empty() {
        return BTreeMap::from([(i1.clone(), 1)]);
    }
    let (a_rest, a) = i1.split_innermost().unwrap();
    let (b_rest, b) = i2.split_innermost().unwrap();
    let mut out: BTreeMap<CompositionIndex, i64> = BTreeMap::new();
    for (k, c) in stuffle_compositions(&a_rest, i2) {
        *out.entry(k.push_innermost(a)).or_insert(0) += c;
    }
    for (k, c) in stuffle_compositions(i1, &b_rest) {
        *out.entry(k.push_innermost(b)).or_insert(0) += c;
    }
    for (k, c) in stuffle_compositions(&a_rest, &b_rest) {
        *out.entry(k.push_innermost(a + b)).or_insert(0) += c;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(parts: &[u32]) -> CompositionIndex {
        CompositionIndex::new(parts.to_vec())
    }

    #[test]
    fn word_basics() {
        let w = Word::parse("e0e1e0e0e1").unwrap();
        assert_eq!(w.len(), 5);
        assert_eq!(w.weight(), 5);
        assert_eq!(w.depth(), 2);
        assert_eq!(w.to_string(), "e0e1e0e0e1");
        assert_eq!(w.reversed().to_string(), "e1e0e0e1e0");
        assert_eq!(w.leading_e0_run(), 1);
        assert!(w.ends_with_e1());
        assert_eq!(w.slice(1, 4).to_string(), "e1e0e0");
        assert_eq!(Word::parse("01001").unwrap(), w);
        assert_eq!(w.drop_first().unwrap(), (Letter::E0, Word::parse("1001").unwrap()));
        assert_eq!(w.drop_last().unwrap(), (Word::parse("0100").unwrap(), Letter::E1));
        assert_eq!(w.prepend_e0_run(2).to_string(), "e0e0e0e1e0e0e1");
    }

    #[test]
    fn ordering_is_graded() {
        let mut words = vec![
            Word::parse("e1e1").unwrap(),
            Word::parse("e0").unwrap(),
            Word::empty(),
            Word::parse("e0e0e0").unwrap(),
            Word::parse("e1").unwrap(),
        ];
        words.sort();
        let lens: Vec<usize> = words.iter().map(|w| w.len()).collect();
        assert_eq!(lens, vec![0, 1, 1, 2, 3]);
    }

    #[test]
    fn composition_word_round_trip() {
        let i = comp(&[3, 1, 2]);
        assert_eq!(i.weight(), 6);
        assert_eq!(i.depth(), 3);
        assert_eq!(i.word().to_string(), "e0e0e1e1e0e1");
        assert_eq!(i.word().to_composition().unwrap(), i);
        assert_eq!(i.to_string(), "3,1,2");
        assert_eq!("3,1,2".parse::<CompositionIndex>().unwrap(), i);
        assert_eq!("".parse::<CompositionIndex>().unwrap(), CompositionIndex::empty());
        assert_eq!(CompositionIndex::empty().word(), Word::empty());
        assert!(Word::parse("e1e0").unwrap().to_composition().is_none());
        assert!("0,1".parse::<CompositionIndex>().is_err());
    }

    #[test]
    fn innermost_is_last_stored_part() {
        let i = comp(&[3, 1, 2]);
        assert_eq!(i.innermost(), Some(2));
        let (rest, inner) = i.split_innermost().unwrap();
        assert_eq!((rest, inner), (comp(&[3, 1]), 2));
        let (outer, rest) = comp(&[3, 1, 2]).split_outermost().unwrap();
        assert_eq!((outer, rest), (3, comp(&[1, 2])));
    }

    /// Independent shuffle oracle: enumerate which positions of the result
    /// receive letters of `w1` (a subset of size `|w1|`), preserving order
    /// in both arguments.
    fn shuffle_oracle(w1: Word, w2: Word) -> BTreeMap<Word, i64> {
        let n = w1.len() + w2.len();
        let mut out: BTreeMap<Word, i64> = BTreeMap::new();
        // iterate over bitmasks of [0, n) with exactly |w1| bits set
        for mask in 0u32..1 << n {
            if mask.count_ones() as usize != w1.len() {
                continue;
            }
            let mut from1 = w1.letters();
            let mut from2 = w2.letters();
            let mut w = Word::empty();
            for pos in 0..n {
                let l = if mask >> pos & 1 == 1 {
                    from1.next().unwrap()
                } else {
                    from2.next().unwrap()
                };
                w = w.push(l);
            }
            *out.entry(w).or_insert(0) += 1;
        }
        out
    }

    #[test]
    fn shuffle_agrees_with_position_enumeration() {
        // exhaustive over all pairs with |w1| + |w2| <= 8
        for len1 in 0..=8usize {
            for bits1 in 0u32..1 << len1 {
                let w1 = Word { len: len1 as u8, bits: bits1 };
                for len2 in 0..=8 - len1 {
                    for bits2 in 0u32..1 << len2 {
                        let w2 = Word { len: len2 as u8, bits: bits2 };
                        assert_eq!(
                            shuffle_words(w1, w2),
                            shuffle_oracle(w1, w2),
                            "shuffle mismatch at {w1} x {w2}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn shuffle_well_known_example() {
        // e1 sh e1 = 2 e1e1; e0 sh e1 = e0e1 + e1e0
        assert_eq!(
            shuffle_words(Word::e1(), Word::e1()),
            BTreeMap::from([(Word::parse("e1e1").unwrap(), 2)])
        );
        assert_eq!(
            shuffle_words(Word::e0(), Word::e1()),
            BTreeMap::from([
                (Word::parse("e0e1").unwrap(), 1),
                (Word::parse("e1e0").unwrap(), 1)
            ])
        );
    }

    /// Independent stuffle oracle: enumerate monotone overlapping merges.
    /// A result of depth `r` arises from choosing which slots receive parts
    /// of `i1` and which receive parts of `i2` (each slot at least one,
    /// orders preserved, slots ascending from innermost).
    fn stuffle_oracle(
        i1: &CompositionIndex,
        i2: &CompositionIndex,
    ) -> BTreeMap<CompositionIndex, i64> {
        let a: Vec<u32> = i1.parts().iter().rev().copied().collect(); // innermost first
        let b: Vec<u32> = i2.parts().iter().rev().copied().collect();
        let (d1, d2) = (a.len(), b.len());
        let mut out: BTreeMap<CompositionIndex, i64> = BTreeMap::new();
        let rmin = d1.max(d2);
        for r in rmin..=d1 + d2 {
            for mask1 in 0u32..1 << r {
                if mask1.count_ones() as usize != d1 {
                    continue;
                }
                for mask2 in 0u32..1 << r {
                    if mask2.count_ones() as usize != d2 {
                        continue;
                    }
                    if mask1 | mask2 != (1 << r) - 1 {
                        continue;
                    }
                    let mut ai = a.iter();
                    let mut bi = b.iter();
                    let mut inner_first = Vec::with_capacity(r);
                    for slot in 0..r {
                        let mut part = 0u32;
                        if mask1 >> slot & 1 == 1 {
                            part += ai.next().unwrap();
                        }
                        if mask2 >> slot & 1 == 1 {
                            part += bi.next().unwrap();
                        }
                        inner_first.push(part);
                    }
                    inner_first.reverse();
                    *out.entry(CompositionIndex::new(inner_first)).or_insert(0) += 1;
                }
            }
        }
        out
    }

    #[test]
    fn stuffle_agrees_with_merge_enumeration() {
        // exhaustive over compositions with weight(i1) + weight(i2) <= 8
        let mut all: Vec<CompositionIndex> = vec![CompositionIndex::empty()];
        for w in 1..=7u32 {
            // compositions of w: one per bitmask of w-1 separators
            for mask in 0u32..1 << (w - 1) {
                let mut parts = Vec::new();
                let mut run = 1u32;
                for i in 0..w - 1 {
                    if mask >> i & 1 == 1 {
                        parts.push(run);
                        run = 1;
                    } else {
                        run += 1;
                    }
                }
                parts.push(run);
                all.push(CompositionIndex::new(parts));
            }
        }
        for i1 in &all {
            for i2 in &all {
                if i1.weight() + i2.weight() > 8 {
                    continue;
                }
                assert_eq!(
                    stuffle_compositions(i1, i2),
                    stuffle_oracle(i1, i2),
                    "stuffle mismatch at ({i1}) * ({i2})"
                );
            }
        }
    }

    #[test]
    fn stuffle_well_known_example() {
        // (1) * (1) = 2 (1,1) + (2)
        assert_eq!(
            stuffle_compositions(&comp(&[1]), &comp(&[1])),
            BTreeMap::from([(comp(&[1, 1]), 2), (comp(&[2]), 1)])
        );
        // (2) * (1) = (2,1) + (1,2) + (3)
        assert_eq!(
            stuffle_compositions(&comp(&[2]), &comp(&[1])),
            BTreeMap::from([(comp(&[2, 1]), 1), (comp(&[1, 2]), 1), (comp(&[3]), 1)])
        );
    }
}

//! Double braid words and their rightmost subexpressions.
//!
//! A double braid word on `n` strands is a sequence of nonzero letters
//! `i ∈ {±1, …, ±(n−1)}`. Positive ("red") letters act on a permutation from
//! the right; negative ("blue") letters act from the left through `|i|`.
//!
//! Scanning a word right to left with Demazure quotients produces the
//! rightmost subexpression of a permutation `u` inside the word
//! ([`compute_pds`]). Crossings where the quotient stalls are *solid*; they
//! carry bridges, chart parameters and quiver vertices. Bumping a single
//! solid crossing to a Demazure product instead yields the companion
//! sequence ([`compute_aps`]) that classifies solid crossings into mutable
//! and frozen ones and determines which cluster variables divide each grid
//! minor ([`order_table`]).

use crate::perm::{Permutation, Side};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Errors from word construction, subexpression computation and diagram
/// import.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum BraidError {
    #[error("letter {letter} is not a valid strand letter for n = {n} (need 1 ≤ |letter| ≤ {})", n.saturating_sub(1))]
    BadLetter { letter: i64, n: usize },
    #[error("rank mismatch: permutation lives in S_{perm_n}, word in S_{word_n}")]
    RankMismatch { perm_n: usize, word_n: usize },
    #[error("pair is not admissible: {u} is not below the Demazure product of the word")]
    NotAdmissible { u: String },
    #[error("crossing index {index} is out of range 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("crossing {index} is hollow; this operation needs a solid crossing")]
    HollowCrossing { index: usize },
    #[error("cannot parse braid word from {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("row lengths {rows:?} do not describe a Young diagram inside a {k}×{cols} rectangle")]
    BadShape { rows: Vec<usize>, k: usize, cols: usize },
    #[error("dot pattern violates the closure rule at row {row}, column {col}: a box with a dot above it and a dot to its left must carry a dot")]
    NotClosed { row: usize, col: usize },
    #[error("dot pattern is inconsistent: the empty boxes do not match the hollow crossings of the induced pair")]
    InconsistentDots,
}

/// A double braid word: `n` strands and letters in `±1..=±(n−1)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DoubleBraidWord {
    n: usize,
    letters: Vec<i32>,
}

impl fmt::Debug for DoubleBraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "β[n={}]({})", self.n, self)
    }
}

impl fmt::Display for DoubleBraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .letters
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",");
        write!(f, "{body}")
    }
}

impl DoubleBraidWord {
    /// Builds a word, validating every letter against the strand count.
    pub fn new(n: usize, letters: Vec<i32>) -> Result<Self, BraidError> {
        if n == 0 {
            return Err(BraidError::Parse {
                input: String::new(),
                reason: "strand count must be positive".to_string(),
            });
        }
        for &l in &letters {
            if l == 0 || l.unsigned_abs() as usize >= n {
                return Err(BraidError::BadLetter {
                    letter: l as i64,
                    n,
                });
            }
        }
        Ok(DoubleBraidWord { n, letters })
    }

    /// Parses a comma/whitespace separated list of signed letters, e.g.
    /// `-2,1,2,1,-1`. An empty string is the empty word.
    pub fn parse(n: usize, s: &str) -> Result<Self, BraidError> {
        let mut letters = Vec::new();
        for tok in s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let l: i32 = tok.parse().map_err(|_| BraidError::Parse {
                input: s.to_string(),
                reason: format!("bad letter {tok:?}"),
            })?;
            letters.push(l);
        }
        Self::new(n, letters)
    }

    /// Number of strands.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Word length.
    pub fn m(&self) -> usize {
        self.letters.len()
    }

    /// All letters, position `c` (1-based) at index `c − 1`.
    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    /// Letter at 1-based position `c`.
    pub fn letter(&self, c: usize) -> i32 {
        assert!(c >= 1 && c <= self.m(), "letter index {c} out of range");
        self.letters[c - 1]
    }

    /// True when every letter is positive.
    pub fn is_all_red(&self) -> bool {
        self.letters.iter().all(|&l| l > 0)
    }

    /// The Demazure product of the word: blue letters multiply in on the
    /// left (rightmost first), red letters on the right (leftmost first).
    /// A pair `(u, word)` is admissible exactly when `u` is Bruhat-below
    /// this permutation.
    pub fn demazure_product(&self) -> Permutation {
        let mut w = Permutation::identity(self.n);
        for &l in self.letters.iter().rev() {
            if l < 0 {
                w = w.demazure_product((-l) as usize, Side::Right);
            }
        }
        for &l in &self.letters {
            if l > 0 {
                w = w.demazure_product(l as usize, Side::Right);
            }
        }
        w
    }

    /// An all-red word with the same attached data, obtained by repeatedly
    /// commuting the leftmost blue letter to the front (adjacent
    /// opposite-sign swaps) and flipping its sign there. The permutation `u`
    /// of a pair is unchanged by these rewrites.
    pub fn all_red_form(&self) -> DoubleBraidWord {
        let mut letters = self.letters.clone();
        loop {
            let Some(pos) = letters.iter().position(|&l| l < 0) else {
                break;
            };
            let l = letters.remove(pos);
            letters.insert(0, -l);
        }
        DoubleBraidWord {
            n: self.n,
            letters,
        }
    }

    /// The word with letter at 1-based position `c` removed.
    pub fn without_letter(&self, c: usize) -> DoubleBraidWord {
        assert!(c >= 1 && c <= self.m(), "letter index {c} out of range");
        let mut letters = self.letters.clone();
        letters.remove(c - 1);
        DoubleBraidWord {
            n: self.n,
            letters,
        }
    }

    /// The word with `extra` appended on the right.
    pub fn with_appended(&self, extra: &[i32]) -> Result<DoubleBraidWord, BraidError> {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(extra);
        DoubleBraidWord::new(self.n, letters)
    }
}

/// Extends `(u, word)` by appending red ascents of `u` on the right until
/// the permutation reaches the longest element. Each appended crossing is
/// hollow for the extended pair, so the solid crossings, cycles, and quiver
/// are unchanged; this reduction is used by the sink-recurrence search.
pub fn extend_to_longest(
    u: &Permutation,
    word: &DoubleBraidWord,
) -> Result<(Permutation, DoubleBraidWord), BraidError> {
    if u.n() != word.n() {
        return Err(BraidError::RankMismatch {
            perm_n: u.n(),
            word_n: word.n(),
        });
    }
    let n = u.n();
    let mut v = u.clone();
    let mut extra = Vec::new();
    while v != Permutation::longest(n) {
        let i = (1..n)
            .find(|&i| v.apply(i) < v.apply(i + 1))
            .expect("non-longest permutation has a right ascent");
        extra.push(i as i32);
        v = v.mult_right_s(i);
    }
    Ok((v, word.with_appended(&extra)?))
}

/// The rightmost subexpression of `u` inside a double braid word.
///
/// `seq[c]` is the permutation after the letters at positions `> c` have
/// been folded in from the right (so `seq[m] = u` and `seq[0] = id`).
/// Crossing `c` is *solid* when folding in letter `c` leaves the
/// permutation unchanged, *hollow* when it strictly shortens it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubexpressionRecord {
    word: DoubleBraidWord,
    u: Permutation,
    seq: Vec<Permutation>,
    solid: Vec<bool>,
}

impl SubexpressionRecord {
    pub fn word(&self) -> &DoubleBraidWord {
        &self.word
    }

    pub fn u(&self) -> &Permutation {
        &self.u
    }

    pub fn n(&self) -> usize {
        self.word.n()
    }

    pub fn m(&self) -> usize {
        self.word.m()
    }

    /// The permutation at slice `c ∈ 0..=m`.
    pub fn u_at(&self, c: usize) -> &Permutation {
        &self.seq[c]
    }

    /// Whether crossing `c ∈ 1..=m` is solid.
    pub fn is_solid(&self, c: usize) -> bool {
        assert!(c >= 1 && c <= self.m(), "crossing index {c} out of range");
        self.solid[c]
    }

    /// Solid crossing indices, ascending.
    pub fn solid_indices(&self) -> Vec<usize> {
        (1..=self.m()).filter(|&c| self.solid[c]).collect()
    }

    /// Hollow crossing indices, ascending.
    pub fn hollow_indices(&self) -> Vec<usize> {
        (1..=self.m()).filter(|&c| !self.solid[c]).collect()
    }

    pub fn num_solid(&self) -> usize {
        self.solid.iter().filter(|&&s| s).count()
    }
}

/// Folds letter `l` into `w` on the matching side with the given Demazure
/// operation (`true` = product, `false` = quotient).
fn fold_letter(w: &Permutation, l: i32, product: bool) -> Permutation {
    let (i, side) = if l > 0 {
        (l as usize, Side::Right)
    } else {
        ((-l) as usize, Side::Left)
    };
    if product {
        w.demazure_product(i, side)
    } else {
        w.demazure_quotient(i, side)
    }
}

/// Computes the rightmost subexpression of `u` in `word` by scanning right
/// to left with Demazure quotients. Fails with [`BraidError::NotAdmissible`]
/// when the quotients do not reach the identity.
pub fn compute_pds(
    u: &Permutation,
    word: &DoubleBraidWord,
) -> Result<SubexpressionRecord, BraidError> {
    if u.n() != word.n() {
        return Err(BraidError::RankMismatch {
            perm_n: u.n(),
            word_n: word.n(),
        });
    }
    let m = word.m();
    let mut seq = vec![Permutation::identity(word.n()); m + 1];
    let mut solid = vec![false; m + 1];
    seq[m] = u.clone();
    for c in (1..=m).rev() {
        let next = fold_letter(&seq[c], word.letter(c), false);
        solid[c] = next == seq[c];
        seq[c - 1] = next;
    }
    if !seq[0].is_identity() {
        return Err(BraidError::NotAdmissible {
            u: u.one_line_string(),
        });
    }
    Ok(SubexpressionRecord {
        word: word.clone(),
        u: u.clone(),
        seq,
        solid,
    })
}

/// The companion sequence of a solid crossing `d`: identical to the
/// rightmost subexpression above `d`, bumped to a Demazure product at `d`,
/// and continued with quotients below. Crossing `d` is *mutable* when the
/// sequence still reaches the identity, *frozen* otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlmostPositiveSequence {
    d: usize,
    seq: Vec<Permutation>,
    mutable: bool,
}

impl AlmostPositiveSequence {
    pub fn d(&self) -> usize {
        self.d
    }

    /// The bumped permutation at slice `c ∈ 0..=m`.
    pub fn v_at(&self, c: usize) -> &Permutation {
        &self.seq[c]
    }

    pub fn is_mutable(&self) -> bool {
        self.mutable
    }
}

/// Computes the bumped companion sequence at solid crossing `d` from a
/// finished subexpression record.
pub fn compute_aps_from_record(
    record: &SubexpressionRecord,
    d: usize,
) -> Result<AlmostPositiveSequence, BraidError> {
    let m = record.m();
    if d == 0 || d > m {
        return Err(BraidError::IndexOutOfRange { index: d, m });
    }
    if !record.is_solid(d) {
        return Err(BraidError::HollowCrossing { index: d });
    }
    let mut seq = record.seq.clone();
    seq[d - 1] = fold_letter(&seq[d], record.word.letter(d), true);
    for c in (1..d).rev() {
        seq[c - 1] = fold_letter(&seq[c], record.word.letter(c), false);
    }
    let mutable = seq[0].is_identity();
    Ok(AlmostPositiveSequence { d, seq, mutable })
}

/// Convenience wrapper computing the subexpression first.
pub fn compute_aps(
    u: &Permutation,
    word: &DoubleBraidWord,
    d: usize,
) -> Result<AlmostPositiveSequence, BraidError> {
    let record = compute_pds(u, word)?;
    compute_aps_from_record(&record, d)
}

/// Splits the solid crossings of a record into `(mutable, frozen)`.
pub fn mutable_and_frozen(
    record: &SubexpressionRecord,
) -> Result<(Vec<usize>, Vec<usize>), BraidError> {
    let mut mutable = Vec::new();
    let mut frozen = Vec::new();
    for d in record.solid_indices() {
        if compute_aps_from_record(record, d)?.is_mutable() {
            mutable.push(d);
        } else {
            frozen.push(d);
        }
    }
    Ok((mutable, frozen))
}

/// Bitmask of the values in the first `h` positions of `w`.
fn position_prefix_mask(w: &Permutation, h: usize) -> u32 {
    let mut mask = 0u32;
    for p in 1..=h {
        mask |= 1 << (w.apply(p) - 1);
    }
    mask
}

/// Bitmask of the positions of `w` holding values `≤ k`.
fn value_prefix_mask(w: &Permutation, k: usize) -> u32 {
    let mut mask = 0u32;
    for p in 1..=w.n() {
        if w.apply(p) <= k {
            mask |= 1 << (p - 1);
        }
    }
    mask
}

/// Vanishing orders of every grid minor along every solid-crossing
/// hypersurface.
///
/// `ord(d, c, h)` is `1` when the cluster variable of solid crossing `d`
/// divides the grid minor at slice `c` and level `h` (`h > 0` compares value
/// prefixes of the two fellow-traveler permutations, `h < 0` position
/// prefixes through the inverses), and `0` otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderTable {
    n: usize,
    m: usize,
    letters: Vec<i32>,
    solid: Vec<usize>,
    mutable: Vec<bool>,
    /// For each solid `d`: row-major `(m+1) × (2n−1)` zero/one table, slice
    /// `c` and signed level `h` at flat index `c·(2n−1) + (h + n − 1)`.
    ord: BTreeMap<usize, Vec<u8>>,
}

impl OrderTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Letter at 1-based position `c` of the underlying word.
    pub fn letter(&self, c: usize) -> i32 {
        self.letters[c - 1]
    }

    /// Solid crossing indices, ascending.
    pub fn solid_indices(&self) -> &[usize] {
        &self.solid
    }

    /// Mutability flags parallel to [`Self::solid_indices`].
    pub fn mutable_flags(&self) -> &[bool] {
        &self.mutable
    }

    /// Mutable solid crossings, ascending.
    pub fn mutable_indices(&self) -> Vec<usize> {
        self.solid
            .iter()
            .zip(&self.mutable)
            .filter(|(_, &m)| m)
            .map(|(&d, _)| d)
            .collect()
    }

    /// Frozen solid crossings, ascending.
    pub fn frozen_indices(&self) -> Vec<usize> {
        self.solid
            .iter()
            .zip(&self.mutable)
            .filter(|(_, &m)| !m)
            .map(|(&d, _)| d)
            .collect()
    }

    pub fn is_solid(&self, d: usize) -> bool {
        self.solid.binary_search(&d).is_ok()
    }

    /// Vanishing order of the grid minor at `(c, h)` along the hypersurface
    /// of solid crossing `d`. Levels `h = 0, ±n` address the constant
    /// boundary minors and give `0`.
    pub fn ord(&self, d: usize, c: usize, h: i32) -> i64 {
        assert!(c <= self.m, "slice {c} out of range");
        assert!(
            h.unsigned_abs() as usize <= self.n,
            "level {h} out of range for n = {}",
            self.n
        );
        if h == 0 || h.unsigned_abs() as usize == self.n {
            return 0;
        }
        let row = self
            .ord
            .get(&d)
            .unwrap_or_else(|| panic!("crossing {d} is not solid"));
        let width = 2 * self.n - 1;
        i64::from(row[c * width + (h + self.n as i32 - 1) as usize])
    }

    /// Vanishing order of the chamber minor of solid crossing `c` (the grid
    /// minor immediately left of its bridge) along the hypersurface of solid
    /// crossing `d`.
    pub fn chamber_ord(&self, d: usize, c: usize) -> i64 {
        self.ord(d, c - 1, self.letters[c - 1])
    }

    /// The chamber-minor exponent matrix `M[ci][di] = chamber_ord(d, c)`
    /// over solid crossings. It is unitriangular: `M[c][d] = 0` unless
    /// `c ≤ d`, and `M[d][d] = 1`.
    pub fn chamber_order_matrix(&self) -> Vec<Vec<i64>> {
        self.solid
            .iter()
            .map(|&c| self.solid.iter().map(|&d| self.chamber_ord(d, c)).collect())
            .collect()
    }
}

/// Builds the order table of a pair from its subexpression record.
pub fn order_table(record: &SubexpressionRecord) -> Result<OrderTable, BraidError> {
    let n = record.n();
    let m = record.m();
    assert!(n <= 31, "strand count too large for prefix masks");
    let width = 2 * n - 1;
    let solid = record.solid_indices();
    let mut mutable = Vec::with_capacity(solid.len());
    let mut ord = BTreeMap::new();
    for &d in &solid {
        let aps = compute_aps_from_record(record, d)?;
        mutable.push(aps.is_mutable());
        let mut row = vec![0u8; (m + 1) * width];
        // Above d the bumped sequence agrees with the subexpression, so all
        // orders vanish; only slices c < d need comparing.
        for c in 0..d {
            let u_c = record.u_at(c);
            let v_c = aps.v_at(c);
            for h in 1..n {
                if position_prefix_mask(u_c, h) != position_prefix_mask(v_c, h) {
                    row[c * width + (h + n - 1)] = 1;
                }
                if value_prefix_mask(u_c, h) != value_prefix_mask(v_c, h) {
                    row[c * width + (n - 1 - h)] = 1;
                }
            }
        }
        ord.insert(d, row);
    }
    Ok(OrderTable {
        n,
        m,
        letters: record.word().letters().to_vec(),
        solid,
        mutable,
        ord,
    })
}

/// A dotted Young diagram inside a `k × cols` rectangle, subject to the
/// closure rule: a box with a dotted box above it in its column and a dotted
/// box to its left in its row must itself carry a dot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeDiagram {
    k: usize,
    cols: usize,
    rows: Vec<usize>,
    dots: Vec<Vec<bool>>,
}

impl LeDiagram {
    /// Validates the shape (weakly decreasing rows inside the rectangle) and
    /// the closure rule.
    pub fn new(
        k: usize,
        cols: usize,
        rows: Vec<usize>,
        dots: Vec<Vec<bool>>,
    ) -> Result<Self, BraidError> {
        let shape_err = BraidError::BadShape {
            rows: rows.clone(),
            k,
            cols,
        };
        if k == 0 || cols == 0 || rows.len() > k {
            return Err(shape_err);
        }
        for (r, &len) in rows.iter().enumerate() {
            if len > cols || (r > 0 && len > rows[r - 1]) {
                return Err(shape_err);
            }
        }
        if dots.len() != rows.len() || dots.iter().zip(&rows).any(|(d, &len)| d.len() != len) {
            return Err(shape_err);
        }
        let diag = LeDiagram {
            k,
            cols,
            rows,
            dots,
        };
        for (r, row) in diag.dots.iter().enumerate() {
            for (c, &dotted) in row.iter().enumerate() {
                if dotted {
                    continue;
                }
                let above = (0..r).any(|r2| diag.dots[r2].get(c) == Some(&true));
                let left = (0..c).any(|c2| row[c2]);
                if above && left {
                    return Err(BraidError::NotClosed {
                        row: r + 1,
                        col: c + 1,
                    });
                }
            }
        }
        Ok(diag)
    }

    /// Parses rows of `+` (dot) and `.` (empty), one line per row, inside a
    /// `k × cols` rectangle.
    pub fn parse(text: &str, k: usize, cols: usize) -> Result<Self, BraidError> {
        let mut rows = Vec::new();
        let mut dots = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let mut row = Vec::new();
            for ch in line.chars() {
                match ch {
                    '+' => row.push(true),
                    '.' => row.push(false),
                    c if c.is_whitespace() => {}
                    _ => {
                        return Err(BraidError::Parse {
                            input: text.to_string(),
                            reason: format!("unexpected character {ch:?} (want '+' or '.')"),
                        })
                    }
                }
            }
            rows.push(row.len());
            dots.push(row);
        }
        Self::new(k, cols, rows, dots)
    }

    /// Strand count of the induced pair.
    pub fn n(&self) -> usize {
        self.k + self.cols
    }

    /// Number of boxes.
    pub fn size(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Boxes in word order: anti-diagonals from the bottom-right of the
    /// shape towards the top-left corner, top row first within each
    /// anti-diagonal. Returns 1-based `(row, col)` pairs.
    fn boxes_in_word_order(&self) -> Vec<(usize, usize)> {
        let mut boxes = Vec::with_capacity(self.size());
        let max_s = self.rows.len() + self.rows.iter().copied().max().unwrap_or(0);
        for s in (2..=max_s).rev() {
            for r in 1..=self.rows.len() {
                let Some(c) = s.checked_sub(r) else { continue };
                if c >= 1 && c <= self.rows[r - 1] {
                    boxes.push((r, c));
                }
            }
        }
        boxes
    }

    /// Letter of box `(row, col)`.
    fn box_letter(&self, row: usize, col: usize) -> usize {
        self.k - row + col
    }

    /// Converts the diagram to a pair `(u, word)`: the word spells a reduced
    /// expression (one positive letter per box), and the empty boxes are
    /// exactly the hollow crossings of the pair.
    pub fn to_pair(&self) -> Result<(Permutation, DoubleBraidWord), BraidError> {
        let n = self.n();
        let boxes = self.boxes_in_word_order();
        let mut letters = Vec::with_capacity(boxes.len());
        let mut w = Permutation::identity(n);
        let mut u = Permutation::identity(n);
        let mut empty_positions = Vec::new();
        for (pos, &(r, c)) in boxes.iter().enumerate() {
            let i = self.box_letter(r, c);
            letters.push(i as i32);
            w = w.mult_right_s(i);
            if !self.dots[r - 1][c - 1] {
                u = u.mult_right_s(i);
                empty_positions.push(pos + 1);
            }
        }
        debug_assert_eq!(w.length(), self.size(), "box word must be reduced");
        let word = DoubleBraidWord::new(n, letters)?;
        let record = compute_pds(&u, &word)?;
        if record.hollow_indices() != empty_positions {
            return Err(BraidError::InconsistentDots);
        }
        Ok((u, word))
    }
}

/// Converts a dotted Young diagram to its pair `(u, word)`.
pub fn le_diagram_to_pair(
    diagram: &LeDiagram,
) -> Result<(Permutation, DoubleBraidWord), BraidError> {
    diagram.to_pair()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(n: usize, letters: &[i32]) -> DoubleBraidWord {
        DoubleBraidWord::new(n, letters.to_vec()).unwrap()
    }

    fn perm(images: &[usize]) -> Permutation {
        Permutation::from_one_line(images.to_vec()).unwrap()
    }

    #[test]
    fn construction_and_parse() {
        let w = DoubleBraidWord::parse(3, "-2, 1, 2, 1, -1").unwrap();
        assert_eq!(w.letters(), &[-2, 1, 2, 1, -1]);
        assert_eq!(w.m(), 5);
        assert_eq!(w.to_string(), "-2,1,2,1,-1");
        assert_eq!(DoubleBraidWord::parse(3, "").unwrap().m(), 0);
        assert!(matches!(
            DoubleBraidWord::new(3, vec![3]),
            Err(BraidError::BadLetter { .. })
        ));
        assert!(matches!(
            DoubleBraidWord::new(3, vec![0]),
            Err(BraidError::BadLetter { .. })
        ));
        assert!(DoubleBraidWord::parse(3, "1,x").is_err());
    }

    #[test]
    fn demazure_product_of_word() {
        // Blue letters fold in on the left, red on the right; for the
        // five-letter running example the product is the longest element.
        let w = word(3, &[-2, 1, 2, 1, -1]);
        assert_eq!(w.demazure_product(), Permutation::longest(3));
        // A single red letter.
        assert_eq!(
            word(3, &[2]).demazure_product(),
            Permutation::adjacent_transposition(3, 2)
        );
        // Repeated letters saturate.
        assert_eq!(
            word(2, &[1, 1, -1]).demazure_product(),
            Permutation::longest(2)
        );
    }

    /// Admissibility must agree with Bruhat domination of the Demazure
    /// product of the word (checked exhaustively for n = 3, m ≤ 4).
    #[test]
    fn admissible_iff_below_demazure_product() {
        let n = 3;
        let perms = Permutation::all(n);
        for m in 0..=4 {
            let letters = [1i32, 2, -1, -2];
            let mut idx = vec![0usize; m];
            loop {
                let w = word(n, &idx.iter().map(|&i| letters[i]).collect::<Vec<_>>());
                let pi = w.demazure_product();
                for u in &perms {
                    assert_eq!(
                        compute_pds(u, &w).is_ok(),
                        u.bruhat_leq(&pi),
                        "admissibility mismatch for u={u}, word={w}"
                    );
                }
                // Next word in the mixed-radix enumeration.
                let mut k = 0;
                while k < m {
                    idx[k] += 1;
                    if idx[k] < letters.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
        }
    }

    #[test]
    fn rightmost_subexpression_running_example() {
        // u = s2, word = (-2, 1, 2, 1, -1) on three strands: the scan stalls
        // at crossings 1, 2, 4, 5 and shortens only at crossing 3.
        let u = perm(&[1, 3, 2]);
        let w = word(3, &[-2, 1, 2, 1, -1]);
        let record = compute_pds(&u, &w).unwrap();
        let id = Permutation::identity(3);
        let s2 = perm(&[1, 3, 2]);
        assert_eq!(
            (0..=5).map(|c| record.u_at(c).clone()).collect::<Vec<_>>(),
            vec![id.clone(), id.clone(), id, s2.clone(), s2.clone(), s2]
        );
        assert_eq!(record.solid_indices(), vec![1, 2, 4, 5]);
        assert_eq!(record.hollow_indices(), vec![3]);
    }

    #[test]
    fn rightmost_subexpression_grassmannian_example() {
        // u = s3, word = (3, 2, 1, 4, 3, 2, 3, 4) on five strands: only
        // crossing 7 is hollow.
        let u = perm(&[1, 2, 4, 3, 5]);
        let w = word(5, &[3, 2, 1, 4, 3, 2, 3, 4]);
        let record = compute_pds(&u, &w).unwrap();
        assert_eq!(record.hollow_indices(), vec![7]);
        assert_eq!(record.num_solid(), 7);
    }

    #[test]
    fn not_admissible_is_detected() {
        let u = perm(&[2, 1, 3]);
        let w = word(3, &[2]);
        assert!(matches!(
            compute_pds(&u, &w),
            Err(BraidError::NotAdmissible { .. })
        ));
    }

    #[test]
    fn solid_count_matches_length_defect() {
        // |solid| = m − ℓ(u) whenever the pair is admissible (n = 3, m ≤ 4
        // exhaustively).
        let n = 3;
        let perms = Permutation::all(n);
        let letters = [1i32, 2, -1, -2];
        for m in 0..=4 {
            let mut idx = vec![0usize; m];
            loop {
                let w = word(n, &idx.iter().map(|&i| letters[i]).collect::<Vec<_>>());
                for u in &perms {
                    if let Ok(record) = compute_pds(u, &w) {
                        assert_eq!(record.num_solid(), m - u.length());
                        // The hollow letters, folded in left to right on
                        // their sides, rebuild u.
                        let mut rebuilt = Permutation::identity(n);
                        for c in record.hollow_indices() {
                            let l = w.letter(c);
                            rebuilt = if l > 0 {
                                rebuilt.mult_right_s(l as usize)
                            } else {
                                rebuilt.mult_left_s((-l) as usize)
                            };
                        }
                        assert_eq!(&rebuilt, record.u());
                    }
                }
                let mut k = 0;
                while k < m {
                    idx[k] += 1;
                    if idx[k] < letters.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
        }
    }

    #[test]
    fn bumped_sequences_running_example() {
        // For u = s2, word = (-2, 1, 2, 1, -1): crossings 4, 5 are mutable
        // and crossings 1, 2 are frozen.
        let u = perm(&[1, 3, 2]);
        let w = word(3, &[-2, 1, 2, 1, -1]);
        let record = compute_pds(&u, &w).unwrap();
        let (mutable, frozen) = mutable_and_frozen(&record).unwrap();
        assert_eq!(mutable, vec![4, 5]);
        assert_eq!(frozen, vec![1, 2]);
        // Spot-check the bumped sequence at d = 5: the product step lifts
        // s2 to s1s2, and the quotients then wind back down to the identity.
        let aps = compute_aps_from_record(&record, 5).unwrap();
        assert_eq!(aps.v_at(4), &perm(&[2, 3, 1]));
        assert_eq!(aps.v_at(3), &perm(&[2, 3, 1]));
        assert_eq!(aps.v_at(2), &perm(&[2, 1, 3]));
        assert!(aps.v_at(1).is_identity());
        assert!(aps.v_at(0).is_identity());
        assert!(aps.is_mutable());
        // Hollow crossings reject the bump.
        assert!(matches!(
            compute_aps_from_record(&record, 3),
            Err(BraidError::HollowCrossing { index: 3 })
        ));
        assert!(matches!(
            compute_aps_from_record(&record, 9),
            Err(BraidError::IndexOutOfRange { index: 9, .. })
        ));
    }

    #[test]
    fn bumped_sequence_agrees_above_the_bump() {
        let u = perm(&[1, 2, 4, 3, 5]);
        let w = word(5, &[3, 2, 1, 4, 3, 2, 3, 4]);
        let record = compute_pds(&u, &w).unwrap();
        for d in record.solid_indices() {
            let aps = compute_aps_from_record(&record, d).unwrap();
            for c in d..=record.m() {
                assert_eq!(aps.v_at(c), record.u_at(c));
            }
            // The bump strictly lengthens slice d−1.
            assert!(aps.v_at(d - 1).length() > record.u_at(d - 1).length());
        }
    }

    #[test]
    fn order_table_running_example() {
        let u = perm(&[1, 3, 2]);
        let w = word(3, &[-2, 1, 2, 1, -1]);
        let record = compute_pds(&u, &w).unwrap();
        let table = order_table(&record).unwrap();
        assert_eq!(table.solid_indices(), &[1, 2, 4, 5]);
        assert_eq!(table.mutable_indices(), vec![4, 5]);
        assert_eq!(table.frozen_indices(), vec![1, 2]);
        // Chamber exponents: rows = chamber minors, columns = variables.
        let m = table.chamber_order_matrix();
        for (ci, row) in m.iter().enumerate() {
            for (di, &v) in row.iter().enumerate() {
                if ci == di {
                    assert_eq!(v, 1, "unit diagonal");
                } else if ci > di {
                    assert_eq!(v, 0, "upper triangular");
                } else {
                    assert!(v >= 0);
                }
            }
        }
        // The chamber minor of crossing 4 lies inside both later disks:
        // its exponent row is (0, 0, 1, 1) — it equals x4·x5.
        assert_eq!(m[2], vec![0, 0, 1, 1]);
    }

    #[test]
    fn order_table_unitriangular_small_sweep() {
        let n = 3;
        let perms = Permutation::all(n);
        let letters = [1i32, 2, -1, -2];
        for m in 1..=4 {
            let mut idx = vec![0usize; m];
            loop {
                let w = word(n, &idx.iter().map(|&i| letters[i]).collect::<Vec<_>>());
                for u in &perms {
                    if let Ok(record) = compute_pds(u, &w) {
                        let table = order_table(&record).unwrap();
                        let mat = table.chamber_order_matrix();
                        for (ci, row) in mat.iter().enumerate() {
                            for (di, &v) in row.iter().enumerate() {
                                match ci.cmp(&di) {
                                    std::cmp::Ordering::Equal => assert_eq!(v, 1),
                                    std::cmp::Ordering::Greater => assert_eq!(v, 0),
                                    std::cmp::Ordering::Less => assert!(v >= 0),
                                }
                            }
                        }
                    }
                }
                let mut k = 0;
                while k < m {
                    idx[k] += 1;
                    if idx[k] < letters.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
        }
    }

    #[test]
    fn all_red_form_moves_blues_to_front() {
        let w = word(3, &[-2, 1, 2, 1, -1]);
        let red = w.all_red_form();
        assert!(red.is_all_red());
        assert_eq!(red.m(), w.m());
        assert_eq!(red.letters(), &[1, 2, 1, 2, 1]);
        // The attached permutation data survives: same solid count.
        let u = perm(&[1, 3, 2]);
        let r1 = compute_pds(&u, &w).unwrap();
        let r2 = compute_pds(&u, &red).unwrap();
        assert_eq!(r1.num_solid(), r2.num_solid());
    }

    #[test]
    fn extend_to_longest_appends_hollow_ascents() {
        let u = perm(&[1, 3, 2]);
        let w = word(3, &[-2, 1, 2, 1, -1]);
        let (w0, longer) = extend_to_longest(&u, &w).unwrap();
        assert_eq!(w0, Permutation::longest(3));
        assert_eq!(&longer.letters()[..5], w.letters());
        let record = compute_pds(&w0, &longer).unwrap();
        // Original slices and solidity are untouched; appended crossings are
        // hollow.
        let original = compute_pds(&u, &w).unwrap();
        for c in 0..=w.m() {
            assert_eq!(record.u_at(c), original.u_at(c));
        }
        for c in 1..=w.m() {
            assert_eq!(record.is_solid(c), original.is_solid(c));
        }
        for c in w.m() + 1..=longer.m() {
            assert!(!record.is_solid(c));
        }
    }

    #[test]
    fn diagram_shape_and_closure_validation() {
        // Increasing row lengths are rejected.
        assert!(matches!(
            LeDiagram::new(2, 2, vec![1, 2], vec![vec![true], vec![true, true]]),
            Err(BraidError::BadShape { .. })
        ));
        // Closure violation: dot above and dot left force a dot.
        let bad = LeDiagram::parse("++\n+.", 2, 2);
        assert!(matches!(bad, Err(BraidError::NotClosed { row: 2, col: 2 })));
        // A valid diagram parses.
        let good = LeDiagram::parse("+.\n+", 2, 2).unwrap();
        assert_eq!(good.size(), 3);
    }

    #[test]
    fn diagram_pair_small_example() {
        // Shape (2,1) in a 2×2 rectangle with a single dot in the corner
        // box: the word reads anti-diagonals from the far end, and the
        // hollow crossings are exactly the empty boxes.
        let diag = LeDiagram::parse("+.\n.", 2, 2).unwrap();
        let (u, w) = diag.to_pair().unwrap();
        assert_eq!(w.letters(), &[3, 1, 2]);
        assert_eq!(u, perm(&[2, 1, 4, 3]));
        let record = compute_pds(&u, &w).unwrap();
        assert_eq!(record.hollow_indices(), vec![1, 2]);
        // The full product is the expected permutation with a single
        // descent at the rectangle width.
        let mut w_full = Permutation::identity(4);
        for &l in w.letters() {
            w_full = w_full.mult_right_s(l as usize);
        }
        assert_eq!(w_full, perm(&[2, 4, 1, 3]));
        assert_eq!(w_full.length(), diag.size());
    }

    #[test]
    fn diagram_extremes() {
        // All boxes dotted: u = id, every crossing solid.
        let full = LeDiagram::parse("++\n++", 2, 2).unwrap();
        let (u, w) = full.to_pair().unwrap();
        assert!(u.is_identity());
        let record = compute_pds(&u, &w).unwrap();
        assert_eq!(record.num_solid(), 4);
        // No dots: u is the full product, every crossing hollow.
        let empty = LeDiagram::parse("..\n..", 2, 2).unwrap();
        let (u, w) = empty.to_pair().unwrap();
        assert_eq!(u.length(), 4);
        let record = compute_pds(&u, &w).unwrap();
        assert_eq!(record.num_solid(), 0);
    }
}

//! Exact permutation algebra for the symmetric group `S_n`.
//!
//! Permutations are stored in one-line notation with 1-based images.
//! Composition follows the convention `(x ∘ y)(i) = x(y(i))`, so one-line
//! images compose by `z.images[i] = x.images[y.images[i] - 1]`.
//!
//! Besides the group operations this module provides the inversion length,
//! Bruhat order, Demazure product/quotient, deterministic reduced words, and
//! the signed permutation matrices used by the matrix layer.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Errors from construction and parsing of permutations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("one-line images {0:?} are not a bijection on 1..=n")]
    NotBijection(Vec<usize>),
    #[error("cannot parse permutation from {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// Which side a simple reflection acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A permutation of `{1, …, n}` in one-line notation.
///
/// Immutable after construction; all operations return fresh values.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    /// `images[i - 1] = w(i)`, with values in `1..=n`.
    images: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.one_line_string())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.one_line_string())
    }
}

impl Permutation {
    /// The identity of `S_n`.
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n).collect(),
        }
    }

    /// The longest element `w₀`, mapping `i ↦ n + 1 − i`.
    pub fn longest(n: usize) -> Self {
        Permutation {
            images: (1..=n).rev().collect(),
        }
    }

    /// The adjacent transposition `s_i` swapping `i` and `i + 1`.
    ///
    /// Panics unless `1 ≤ i < n`.
    pub fn adjacent_transposition(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i < n, "s_{i} is not a simple reflection in S_{n}");
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(i - 1, i);
        Permutation { images }
    }

    /// Builds a permutation from one-line images, validating bijectivity.
    pub fn from_one_line(images: Vec<usize>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v == 0 || v > n || seen[v - 1] {
                return Err(PermError::NotBijection(images));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation { images })
    }

    /// Rank `n` of the ambient symmetric group.
    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// Applies the permutation: `w(i)` with `i` 1-based.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// One-line images as a slice (`images[i-1] = w(i)`).
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    /// Composition `(self ∘ y)(i) = self(y(i))`. Panics on rank mismatch.
    pub fn compose(&self, y: &Permutation) -> Permutation {
        assert_eq!(
            self.n(),
            y.n(),
            "rank mismatch: cannot compose S_{} with S_{}",
            self.n(),
            y.n()
        );
        Permutation {
            images: y.images.iter().map(|&i| self.images[i - 1]).collect(),
        }
    }

    /// Group inverse.
    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.n()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v - 1] = i + 1;
        }
        Permutation { images }
    }

    /// Right multiplication `w·s_i` (swaps the one-line entries at positions
    /// `i`, `i+1`).
    pub fn mult_right_s(&self, i: usize) -> Permutation {
        assert!(i >= 1 && i < self.n(), "s_{i} out of range");
        let mut images = self.images.clone();
        images.swap(i - 1, i);
        Permutation { images }
    }

    /// Left multiplication `s_i·w` (swaps the values `i`, `i+1`).
    pub fn mult_left_s(&self, i: usize) -> Permutation {
        assert!(i >= 1 && i < self.n(), "s_{i} out of range");
        let images = self
            .images
            .iter()
            .map(|&v| {
                if v == i {
                    i + 1
                } else if v == i + 1 {
                    i
                } else {
                    v
                }
            })
            .collect();
        Permutation { images }
    }

    /// Coxeter length = number of inversions.
    pub fn length(&self) -> usize {
        let mut len = 0;
        for a in 0..self.n() {
            for b in (a + 1)..self.n() {
                if self.images[a] > self.images[b] {
                    len += 1;
                }
            }
        }
        len
    }

    /// Bruhat order via the rank criterion: `u ≤ w` iff for all `i, j`,
    /// `#{a ≤ j : u(a) ≥ i} ≤ #{a ≤ j : w(a) ≥ i}`.
    pub fn bruhat_leq(&self, w: &Permutation) -> bool {
        assert_eq!(self.n(), w.n(), "rank mismatch in Bruhat comparison");
        let n = self.n();
        // rank[j][i] would be O(n^2) memory; n is tiny, fold incrementally.
        // count_u[i-1] = #{a ≤ j : u(a) ≥ i}, updated as j grows.
        let mut count_u = vec![0usize; n + 1];
        let mut count_w = vec![0usize; n + 1];
        for j in 1..=n {
            let uj = self.images[j - 1];
            let wj = w.images[j - 1];
            for i in 1..=n {
                if uj >= i {
                    count_u[i] += 1;
                }
                if wj >= i {
                    count_w[i] += 1;
                }
            }
            for i in 1..=n {
                if count_u[i] > count_w[i] {
                    return false;
                }
            }
        }
        true
    }

    /// `s_i` applied on `side`; used by the Demazure operations.
    fn times_s(&self, i: usize, side: Side) -> Permutation {
        match side {
            Side::Left => self.mult_left_s(i),
            Side::Right => self.mult_right_s(i),
        }
    }

    /// Demazure product: the longer of `w` and `s_i·w` (resp. `w·s_i`).
    pub fn demazure_product(&self, i: usize, side: Side) -> Permutation {
        let other = self.times_s(i, side);
        if other.length() > self.length() {
            other
        } else {
            self.clone()
        }
    }

    /// Demazure quotient: the shorter of `w` and `s_i·w` (resp. `w·s_i`).
    pub fn demazure_quotient(&self, i: usize, side: Side) -> Permutation {
        let other = self.times_s(i, side);
        if other.length() < self.length() {
            other
        } else {
            self.clone()
        }
    }

    /// Right descents: `{i : w(i) > w(i+1)}`.
    pub fn right_descents(&self) -> Vec<usize> {
        (1..self.n())
            .filter(|&i| self.images[i - 1] > self.images[i])
            .collect()
    }

    /// Deterministic reduced word: repeatedly strips the smallest right
    /// descent. The stripped letters, reversed, give a reduced word
    /// `w = s_{i_1} ⋯ s_{i_ℓ}`.
    pub fn reduced_word(&self) -> Vec<usize> {
        let mut w = self.clone();
        let mut rev = Vec::with_capacity(w.length());
        loop {
            let Some(&i) = w.right_descents().first() else {
                break;
            };
            rev.push(i);
            w = w.mult_right_s(i);
        }
        rev.reverse();
        rev
    }

    /// The signed matrix `ẇ` with `(ẇ)_{i,j} = (−1)^{#{a<j : w(a)>w(j)}}`
    /// at `i = w(j)` and `0` elsewhere.
    pub fn signed_matrix(&self) -> SignedPermMatrix {
        let n = self.n();
        let mut entries = vec![0i64; n * n];
        for j in 1..=n {
            let wj = self.images[j - 1];
            let inversions_into_j = (1..j).filter(|&a| self.images[a - 1] > wj).count();
            let sign = if inversions_into_j % 2 == 0 { 1 } else { -1 };
            entries[(wj - 1) * n + (j - 1)] = sign;
        }
        SignedPermMatrix { n, entries }
    }

    /// All `n!` permutations of `S_n`, in lexicographic one-line order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut images: Vec<usize> = (1..=n).collect();
        loop {
            out.push(Permutation {
                images: images.clone(),
            });
            // Next lexicographic permutation.
            let Some(k) = (0..n.saturating_sub(1)).rev().find(|&k| images[k] < images[k + 1])
            else {
                break;
            };
            let l = (k + 1..n).rev().find(|&l| images[l] > images[k]).unwrap();
            images.swap(k, l);
            images[k + 1..].reverse();
        }
        out
    }

    /// One-line comma-separated rendering, e.g. `2,1,3`.
    pub fn one_line_string(&self) -> String {
        self.images
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses one-line notation `2,1,3` (commas and/or whitespace).
    pub fn parse_one_line(s: &str) -> Result<Self, PermError> {
        let tokens: Vec<&str> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(PermError::Parse {
                input: s.to_string(),
                reason: "empty input".to_string(),
            });
        }
        let mut images = Vec::with_capacity(tokens.len());
        for t in tokens {
            let v: usize = t.parse().map_err(|_| PermError::Parse {
                input: s.to_string(),
                reason: format!("bad integer {t:?}"),
            })?;
            images.push(v);
        }
        Self::from_one_line(images)
    }

    /// Parses a word in simple reflections, e.g. `s2 s1` or `s2*s1`, or `id`;
    /// the product is taken left to right (`s2 s1` means `s_2 ∘ s_1`).
    pub fn parse_word(s: &str, n: usize) -> Result<Self, PermError> {
        let body = s.trim();
        if body == "id" || body == "e" {
            return Ok(Self::identity(n));
        }
        let mut w = Self::identity(n);
        for tok in body
            .split(|c: char| c.is_whitespace() || c == '*' || c == ',')
            .filter(|t| !t.is_empty())
        {
            let idx_str = tok.strip_prefix('s').unwrap_or(tok);
            let i: usize = idx_str.parse().map_err(|_| PermError::Parse {
                input: s.to_string(),
                reason: format!("bad reflection token {tok:?}"),
            })?;
            if i == 0 || i >= n {
                return Err(PermError::Parse {
                    input: s.to_string(),
                    reason: format!("s_{i} is not a simple reflection in S_{n}"),
                });
            }
            w = w.mult_right_s(i);
        }
        Ok(w)
    }
}

/// The index involution `i* = n − i`, so that `s_i w₀ = w₀ s_{i*}`.
pub fn star_index(n: usize, i: usize) -> usize {
    assert!(i >= 1 && i < n, "index {i} out of range for S_{n}");
    n - i
}

/// A signed permutation matrix `ẇ` with entries in `{−1, 0, 1}` and
/// determinant `+1`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SignedPermMatrix {
    n: usize,
    /// Row-major `n × n` entries.
    entries: Vec<i64>,
}

impl SignedPermMatrix {
    pub fn identity(n: usize) -> Self {
        Permutation::identity(n).signed_matrix()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at 0-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.n + col]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|r| self.entries[r * self.n..(r + 1) * self.n].to_vec())
            .collect()
    }

    /// Matrix product. Panics on rank mismatch.
    pub fn mul(&self, other: &SignedPermMatrix) -> SignedPermMatrix {
        assert_eq!(self.n, other.n, "rank mismatch in matrix product");
        let n = self.n;
        let mut entries = vec![0i64; n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entries[r * n + k];
                if a == 0 {
                    continue;
                }
                for c in 0..n {
                    entries[r * n + c] += a * other.entries[k * n + c];
                }
            }
        }
        SignedPermMatrix { n, entries }
    }

    /// Determinant (for a signed permutation matrix: product of nonzero
    /// entries times the sign of the underlying permutation).
    pub fn det(&self) -> i64 {
        let n = self.n;
        let mut perm = vec![0usize; n];
        let mut product = 1i64;
        for col in 0..n {
            let row = (0..n)
                .find(|&r| self.entries[r * n + col] != 0)
                .expect("column of zeros in signed permutation matrix");
            perm[col] = row + 1;
            product *= self.entries[row * n + col];
        }
        let w = Permutation::from_one_line(perm).expect("not a permutation matrix");
        let parity = if w.length() % 2 == 0 { 1 } else { -1 };
        product * parity
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: usize, i: usize) -> Permutation {
        Permutation::adjacent_transposition(n, i)
    }

    #[test]
    fn composition_convention() {
        // z = x ∘ y acts by z(i) = x(y(i)).
        let s1 = s(3, 1);
        let s2 = s(3, 2);
        let z = s1.compose(&s2);
        assert_eq!(z.images(), &[2, 3, 1]);
        for i in 1..=3 {
            assert_eq!(z.apply(i), s1.apply(s2.apply(i)));
        }
        // Identity cases.
        assert_eq!(Permutation::identity(3).compose(&s1), s1);
        let w0 = Permutation::longest(4);
        assert!(w0.compose(&w0).is_identity());
    }

    #[test]
    fn length_and_longest() {
        assert_eq!(Permutation::longest(4).length(), 6);
        assert_eq!(Permutation::identity(5).length(), 0);
        assert_eq!(s(3, 1).length(), 1);
    }

    #[test]
    fn left_right_multiplication() {
        let w = Permutation::from_one_line(vec![3, 1, 2]).unwrap();
        // w·s_1 swaps positions 1, 2.
        assert_eq!(w.mult_right_s(1).images(), &[1, 3, 2]);
        // s_1·w swaps values 1, 2.
        assert_eq!(w.mult_left_s(1).images(), &[3, 2, 1]);
        assert_eq!(w.mult_right_s(1), w.compose(&s(3, 1)));
        assert_eq!(w.mult_left_s(1), s(3, 1).compose(&w));
    }

    #[test]
    fn bruhat_basics() {
        let n = 4;
        let id = Permutation::identity(n);
        for w in Permutation::all(n) {
            assert!(id.bruhat_leq(&w), "id ≤ {w}");
            assert!(w.bruhat_leq(&Permutation::longest(n)), "{w} ≤ w0");
            assert!(w.bruhat_leq(&w));
        }
    }

    /// Independent Bruhat oracle: u ≤ w iff some reduced word of w contains a
    /// subword multiplying to u. Checked by dynamic programming over one
    /// reduced word (the subword property is independent of the choice).
    fn bruhat_subword_oracle(u: &Permutation, w: &Permutation) -> bool {
        let word = w.reduced_word();
        let n = u.n();
        let mut reachable = std::collections::HashSet::new();
        reachable.insert(Permutation::identity(n));
        for &i in &word {
            let mut next = reachable.clone();
            for v in &reachable {
                let vs = v.mult_right_s(i);
                if vs.length() > v.length() {
                    next.insert(vs);
                }
            }
            reachable = next;
        }
        reachable.contains(u)
    }

    #[test]
    fn bruhat_matches_subword_characterization_s4() {
        let all = Permutation::all(4);
        for u in &all {
            for w in &all {
                assert_eq!(
                    u.bruhat_leq(w),
                    bruhat_subword_oracle(u, w),
                    "Bruhat mismatch for u={u}, w={w}"
                );
            }
        }
    }

    #[test]
    fn bruhat_spec_example() {
        // u = s_2 against w = s_3 s_2 s_1 s_4 s_3 s_2 s_3 s_4 in S_5.
        let n = 5;
        let w = [3usize, 2, 1, 4, 3, 2, 3, 4]
            .iter()
            .fold(Permutation::identity(n), |acc, &i| acc.mult_right_s(i));
        assert!(s(n, 2).bruhat_leq(&w));
    }

    #[test]
    fn demazure_product_and_quotient() {
        // s * s = s.
        let s1 = s(2, 1);
        assert_eq!(s1.demazure_product(1, Side::Right), s1);
        assert_eq!(s1.demazure_product(1, Side::Left), s1);
        // Quotient at the identity stays put.
        let id = Permutation::identity(3);
        assert_eq!(id.demazure_quotient(1, Side::Left), id);
        assert_eq!(id.demazure_quotient(2, Side::Right), id);
        // s1 s2 ◁ s2 = s1 (length-comparison oracle).
        let w = s(3, 1).compose(&s(3, 2));
        assert_eq!(w.demazure_quotient(2, Side::Right), s(3, 1));
    }

    #[test]
    fn demazure_quotient_idempotent_s4() {
        for w in Permutation::all(4) {
            for i in 1..4 {
                for side in [Side::Left, Side::Right] {
                    let q = w.demazure_quotient(i, side);
                    assert_eq!(q.demazure_quotient(i, side), q);
                    let p = w.demazure_product(i, side);
                    assert_eq!(p.demazure_product(i, side), p);
                }
            }
        }
    }

    #[test]
    fn signed_matrix_formula() {
        // ṡ_1 in S_2 is [[0, −1], [1, 0]].
        let m = s(2, 1).signed_matrix();
        assert_eq!(m.rows(), vec![vec![0, -1], vec![1, 0]]);
        assert_eq!(Permutation::identity(3).signed_matrix().rows()[0], vec![1, 0, 0]);
        for w in Permutation::all(4) {
            assert_eq!(w.signed_matrix().det(), 1, "det ẇ = 1 for w={w}");
        }
    }

    #[test]
    fn signed_matrix_multiplicative_on_reduced_products_s4() {
        let all = Permutation::all(4);
        for v in &all {
            for w in &all {
                let vw = v.compose(w);
                if vw.length() == v.length() + w.length() {
                    assert_eq!(
                        vw.signed_matrix(),
                        v.signed_matrix().mul(&w.signed_matrix()),
                        "ẇ multiplicativity fails for v={v}, w={w}"
                    );
                }
            }
        }
    }

    #[test]
    fn reduced_word_roundtrip_s4() {
        for w in Permutation::all(4) {
            let word = w.reduced_word();
            assert_eq!(word.len(), w.length());
            let rebuilt = word
                .iter()
                .fold(Permutation::identity(4), |acc, &i| acc.mult_right_s(i));
            assert_eq!(rebuilt, w);
        }
    }

    #[test]
    fn star_identity() {
        assert_eq!(star_index(5, 1), 4);
        for n in 2..=5 {
            let w0 = Permutation::longest(n);
            for i in 1..n {
                // s_i w₀ = w₀ s_{i*}
                assert_eq!(
                    s(n, i).compose(&w0),
                    w0.compose(&s(n, star_index(n, i))),
                    "star identity fails at n={n}, i={i}"
                );
            }
        }
    }

    #[test]
    fn parse_forms() {
        assert_eq!(
            Permutation::parse_one_line("2,1,3").unwrap().images(),
            &[2, 1, 3]
        );
        assert_eq!(
            Permutation::parse_word("s2 s1", 3).unwrap(),
            s(3, 2).compose(&s(3, 1))
        );
        assert!(Permutation::parse_one_line("2,2,3").is_err());
        assert!(Permutation::parse_word("s7", 3).is_err());
    }

    #[test]
    #[should_panic(expected = "rank mismatch")]
    fn compose_rank_mismatch_panics() {
        let _ = s(3, 1).compose(&s(4, 1));
    }

    #[test]
    fn inverse_and_all() {
        assert_eq!(Permutation::all(4).len(), 24);
        for w in Permutation::all(4) {
            assert!(w.compose(&w.inverse()).is_identity());
            assert_eq!(w.inverse().length(), w.length());
        }
    }
}

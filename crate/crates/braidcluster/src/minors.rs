//! Exact symbolic layer: integer Laurent polynomials, polynomial matrices,
//! the torus chart of a pair, grid and chamber minors, and cluster
//! variables.
//!
//! The chart assigns one symbol `t_c` to every solid crossing and walks a
//! matrix product right to left: the rightmost matrix is the signed
//! permutation matrix of `w₀u`, red letters multiply a parabolic generator
//! in on the right, blue letters multiply the inverse of the mirrored
//! generator in on the left, and hollow crossings carry parameter `0`.
//! Grid minors are row/column-set minors of the slice matrices; the chamber
//! minor of a solid crossing is the grid minor immediately left of its
//! bridge. Cluster variables are the alternating products of chamber minors
//! determined by inverting the unitriangular exponent matrix of the order
//! table; all divisions are exact integer Laurent-polynomial divisions.

use crate::braid::{OrderTable, SubexpressionRecord};
use crate::perm::Permutation;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Errors from the symbolic layer.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MinorError {
    #[error("division is not exact: {context}")]
    InexactDivision { context: String },
    #[error("variable count mismatch: {left} vs {right}")]
    VarMismatch { left: usize, right: usize },
    #[error("matrix is not upper unitriangular at row {row}")]
    NotUnitriangular { row: usize },
    #[error("chart slice {c} fails its rank pattern: {reason}")]
    CellRank { c: usize, reason: String },
    #[error("grid minor at slice {c}, level {h} vanishes identically")]
    ZeroGridMinor { c: usize, h: i32 },
}

/// A multivariate Laurent polynomial with integer coefficients.
///
/// Terms are keyed by exponent vectors of fixed length `nvars` in
/// lexicographic order; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<i32>, i64>,
}

impl fmt::Debug for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("t{i}")).collect();
        write!(f, "{}", self.to_string_with(&names))
    }
}

impl LaurentPolynomial {
    pub fn zero(nvars: usize) -> Self {
        LaurentPolynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1)
    }

    pub fn constant(nvars: usize, value: i64) -> Self {
        let mut terms = BTreeMap::new();
        if value != 0 {
            terms.insert(vec![0; nvars], value);
        }
        LaurentPolynomial { nvars, terms }
    }

    /// The variable with 0-based slot `idx`.
    pub fn variable(nvars: usize, idx: usize) -> Self {
        assert!(idx < nvars, "variable slot {idx} out of range");
        let mut exps = vec![0; nvars];
        exps[idx] = 1;
        Self::monomial(nvars, exps, 1)
    }

    pub fn monomial(nvars: usize, exps: Vec<i32>, coeff: i64) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut terms = BTreeMap::new();
        if coeff != 0 {
            terms.insert(exps, coeff);
        }
        LaurentPolynomial { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&vec![0; self.nvars]) == Some(&1)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates `(exponents, coefficient)` in ascending lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &i64)> {
        self.terms.iter()
    }

    /// The constant coefficient.
    pub fn constant_term(&self) -> i64 {
        self.terms.get(&vec![0; self.nvars]).copied().unwrap_or(0)
    }

    /// 0-based slots of variables that actually occur.
    pub fn support_vars(&self) -> BTreeSet<usize> {
        let mut vars = BTreeSet::new();
        for exps in self.terms.keys() {
            for (k, &e) in exps.iter().enumerate() {
                if e != 0 {
                    vars.insert(k);
                }
            }
        }
        vars
    }

    fn check_vars(&self, other: &Self) -> Result<(), MinorError> {
        if self.nvars != other.nvars {
            return Err(MinorError::VarMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_vars(other).expect("variable count mismatch");
        let mut terms = self.terms.clone();
        for (exps, &coeff) in &other.terms {
            let entry = terms.entry(exps.clone()).or_insert(0);
            *entry = entry.checked_add(coeff).expect("coefficient overflow");
            if *entry == 0 {
                terms.remove(exps);
            }
        }
        LaurentPolynomial {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn neg(&self) -> Self {
        LaurentPolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, &c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, factor: i64) -> Self {
        if factor == 0 {
            return Self::zero(self.nvars);
        }
        LaurentPolynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| (e.clone(), c.checked_mul(factor).expect("coefficient overflow")))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_vars(other).expect("variable count mismatch");
        let mut terms: BTreeMap<Vec<i32>, i64> = BTreeMap::new();
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let exps: Vec<i32> = ea
                    .iter()
                    .zip(eb)
                    .map(|(&x, &y)| x.checked_add(y).expect("exponent overflow"))
                    .collect();
                let entry = terms.entry(exps.clone()).or_insert(0);
                *entry = entry
                    .checked_add(ca.checked_mul(cb).expect("coefficient overflow"))
                    .expect("coefficient overflow");
                if *entry == 0 {
                    terms.remove(&exps);
                }
            }
        }
        LaurentPolynomial {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..exp {
            out = out.mul(self);
        }
        out
    }

    /// Exact division in the Laurent ring. Fails when `self` is not a
    /// multiple of `divisor`.
    ///
    /// The quotient's exponents are confined to the coordinatewise box
    /// spanned by the Newton polytopes of the operands; stepping outside the
    /// box, or a coefficient that does not divide, certifies inexactness.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self, MinorError> {
        self.check_vars(divisor)?;
        let inexact = |context: &str| MinorError::InexactDivision {
            context: context.to_string(),
        };
        if divisor.is_zero() {
            return Err(inexact("division by zero"));
        }
        if self.is_zero() {
            return Ok(Self::zero(self.nvars));
        }
        // Coordinatewise exponent box for the quotient.
        let coord_bounds = |p: &Self| -> (Vec<i32>, Vec<i32>) {
            let mut lo = vec![i32::MAX; p.nvars];
            let mut hi = vec![i32::MIN; p.nvars];
            for exps in p.terms.keys() {
                for k in 0..p.nvars {
                    lo[k] = lo[k].min(exps[k]);
                    hi[k] = hi[k].max(exps[k]);
                }
            }
            (lo, hi)
        };
        let (self_lo, self_hi) = coord_bounds(self);
        let (div_lo, div_hi) = coord_bounds(divisor);
        let box_lo: Vec<i32> = self_lo.iter().zip(&div_lo).map(|(a, b)| a - b).collect();
        let box_hi: Vec<i32> = self_hi.iter().zip(&div_hi).map(|(a, b)| a - b).collect();

        let (lead_exps, &lead_coeff) = divisor.terms.iter().next_back().unwrap();
        let mut remainder = self.clone();
        let mut quotient = Self::zero(self.nvars);
        while !remainder.is_zero() {
            let (r_exps, &r_coeff) = remainder.terms.iter().next_back().unwrap();
            if r_coeff % lead_coeff != 0 {
                return Err(inexact("leading coefficient does not divide"));
            }
            let t_exps: Vec<i32> = r_exps.iter().zip(lead_exps).map(|(a, b)| a - b).collect();
            if t_exps
                .iter()
                .zip(box_lo.iter().zip(&box_hi))
                .any(|(&e, (&lo, &hi))| e < lo || e > hi)
            {
                return Err(inexact("quotient walks outside its exponent box"));
            }
            let t = Self::monomial(self.nvars, t_exps, r_coeff / lead_coeff);
            remainder = remainder.sub(&t.mul(divisor));
            quotient = quotient.add(&t);
        }
        Ok(quotient)
    }

    /// The coefficient of the lexicographically smallest monomial.
    pub fn trailing_coefficient(&self) -> i64 {
        self.terms.iter().next().map(|(_, &c)| c).unwrap_or(0)
    }

    /// Flips the overall sign so the trailing coefficient is positive.
    /// Returns the normalized polynomial and whether a flip happened.
    pub fn sign_normalized(&self) -> (Self, bool) {
        if self.trailing_coefficient() < 0 {
            (self.neg(), true)
        } else {
            (self.clone(), false)
        }
    }

    /// Evaluates at a point modulo a prime. Negative exponents use modular
    /// inverses, so every coordinate must be nonzero mod `p`.
    pub fn eval_mod(&self, point: &[u64], p: u64) -> u64 {
        assert_eq!(point.len(), self.nvars);
        let mut acc: u64 = 0;
        for (exps, &coeff) in &self.terms {
            let mut term: u64 = coeff.rem_euclid(p as i64) as u64;
            for (k, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = if e > 0 {
                    point[k] % p
                } else {
                    mod_inverse(point[k] % p, p)
                };
                term = mul_mod(term, pow_mod(base, e.unsigned_abs() as u64, p), p);
            }
            acc = (acc + term) % p;
        }
        acc
    }

    /// Substitutes `images[k]` for variable `k`, returning a fraction
    /// `(numerator, denominator)` whose denominator collects the images of
    /// negatively-powered variables.
    pub fn substitute(&self, images: &[Self]) -> (Self, Self) {
        assert_eq!(images.len(), self.nvars);
        let target_vars = images
            .first()
            .map(|p| p.nvars)
            .unwrap_or(self.nvars);
        // Common denominator exponents per variable.
        let mut den_exp = vec![0u32; self.nvars];
        for exps in self.terms.keys() {
            for (k, &e) in exps.iter().enumerate() {
                if e < 0 {
                    den_exp[k] = den_exp[k].max(e.unsigned_abs());
                }
            }
        }
        let mut den = Self::one(target_vars);
        for (k, &e) in den_exp.iter().enumerate() {
            if e > 0 {
                den = den.mul(&images[k].pow(e));
            }
        }
        let mut num = Self::zero(target_vars);
        for (exps, &coeff) in &self.terms {
            let mut term = Self::constant(target_vars, coeff);
            for (k, &e) in exps.iter().enumerate() {
                let lifted = e + den_exp[k] as i32;
                debug_assert!(lifted >= 0);
                if lifted > 0 {
                    term = term.mul(&images[k].pow(lifted as u32));
                }
            }
            num = num.add(&term);
        }
        (num, den)
    }

    /// Renders with the given variable names, terms in descending
    /// lexicographic order, e.g. `t1*t4 + 1`.
    pub fn to_string_with(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (exps, &coeff)) in self.terms.iter().rev().enumerate() {
            let mut factors = Vec::new();
            for (k, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[k].clone()),
                    _ => factors.push(format!("{}^{}", names[k], e)),
                }
            }
            let magnitude = coeff.abs();
            let body = if factors.is_empty() {
                magnitude.to_string()
            } else if magnitude == 1 {
                factors.join("*")
            } else {
                format!("{}*{}", magnitude, factors.join("*"))
            };
            if idx == 0 {
                if coeff < 0 {
                    out.push('-');
                }
            } else if coeff < 0 {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&body);
        }
        out
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "no inverse of 0");
    pow_mod(a, p - 2, p)
}

/// A square matrix of Laurent polynomials.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PolyMatrix {
    n: usize,
    nvars: usize,
    /// Row-major entries.
    entries: Vec<LaurentPolynomial>,
}

impl PolyMatrix {
    pub fn identity(n: usize, nvars: usize) -> Self {
        let mut entries = vec![LaurentPolynomial::zero(nvars); n * n];
        for i in 0..n {
            entries[i * n + i] = LaurentPolynomial::one(nvars);
        }
        PolyMatrix { n, nvars, entries }
    }

    /// Lifts a signed permutation matrix to constants.
    pub fn from_signed(m: &crate::perm::SignedPermMatrix, nvars: usize) -> Self {
        let n = m.n();
        let entries = (0..n * n)
            .map(|idx| LaurentPolynomial::constant(nvars, m.entry(idx / n, idx % n)))
            .collect();
        PolyMatrix { n, nvars, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Entry at 0-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> &LaurentPolynomial {
        &self.entries[row * self.n + col]
    }

    pub fn set_entry(&mut self, row: usize, col: usize, value: LaurentPolynomial) {
        assert_eq!(value.nvars(), self.nvars);
        self.entries[row * self.n + col] = value;
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.n, other.n, "size mismatch");
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let n = self.n;
        let mut entries = vec![LaurentPolynomial::zero(self.nvars); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.entry(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let b = other.entry(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    entries[r * n + c] = entries[r * n + c].add(&a.mul(b));
                }
            }
        }
        PolyMatrix {
            n,
            nvars: self.nvars,
            entries,
        }
    }

    /// Determinant of the square submatrix on `rows × cols` (0-based,
    /// strictly increasing), by dynamic programming over column subsets.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> LaurentPolynomial {
        assert_eq!(rows.len(), cols.len(), "minor must be square");
        let k = rows.len();
        assert!(k <= 20, "minor too large");
        if k == 0 {
            return LaurentPolynomial::one(self.nvars);
        }
        // dp[mask] = det of the first popcount(mask) rows on columns `mask`.
        let mut dp: Vec<Option<LaurentPolynomial>> = vec![None; 1 << k];
        dp[0] = Some(LaurentPolynomial::one(self.nvars));
        for mask in 1usize..(1 << k) {
            let r = mask.count_ones() as usize - 1;
            let mut acc = LaurentPolynomial::zero(self.nvars);
            // Expand along the last row of the submatrix; the column's rank
            // within the mask determines the sign.
            let mut col_rank = 0usize;
            for b in 0..k {
                if mask & (1 << b) == 0 {
                    continue;
                }
                let entry = self.entry(rows[r], cols[b]);
                if !entry.is_zero() {
                    let sub = dp[mask & !(1 << b)]
                        .as_ref()
                        .expect("subset determinants fill in popcount order")
                        .clone();
                    let term = entry.mul(&sub);
                    let positive = (r + col_rank) % 2 == 0;
                    acc = if positive { acc.add(&term) } else { acc.sub(&term) };
                }
                col_rank += 1;
            }
            dp[mask] = Some(acc);
        }
        dp[(1 << k) - 1].take().unwrap()
    }

    pub fn det(&self) -> LaurentPolynomial {
        let all: Vec<usize> = (0..self.n).collect();
        self.minor(&all, &all)
    }

    /// Evaluates every entry at a point modulo a prime.
    pub fn eval_mod(&self, point: &[u64], p: u64) -> Vec<Vec<u64>> {
        (0..self.n)
            .map(|r| {
                (0..self.n)
                    .map(|c| self.entry(r, c).eval_mod(point, p))
                    .collect()
            })
            .collect()
    }

    /// Symbolic rank by fraction-free elimination. Rows are first scaled by
    /// monomials to clear negative exponents (harmless for rank).
    pub fn rank_symbolic(&self) -> usize {
        let mut rows: Vec<Vec<LaurentPolynomial>> = (0..self.n)
            .map(|r| {
                let mut lift = vec![0i32; self.nvars];
                for c in 0..self.n {
                    for exps in self.entry(r, c).terms.keys() {
                        for (k, &e) in exps.iter().enumerate() {
                            if e < 0 {
                                lift[k] = lift[k].max(-e);
                            }
                        }
                    }
                }
                let scale = LaurentPolynomial::monomial(self.nvars, lift, 1);
                (0..self.n).map(|c| self.entry(r, c).mul(&scale)).collect()
            })
            .collect();
        let n = self.n;
        let mut rank = 0;
        let mut prev_pivot = LaurentPolynomial::one(self.nvars);
        let mut col = 0;
        while rank < n && col < n {
            let Some(pivot_row) = (rank..n).find(|&r| !rows[r][col].is_zero()) else {
                col += 1;
                continue;
            };
            rows.swap(rank, pivot_row);
            let pivot = rows[rank][col].clone();
            for r in rank + 1..n {
                for c2 in col + 1..n {
                    let num = rows[r][c2].mul(&pivot).sub(&rows[r][col].mul(&rows[rank][c2]));
                    rows[r][c2] = num
                        .div_exact(&prev_pivot)
                        .expect("fraction-free elimination divides exactly");
                }
                rows[r][col] = LaurentPolynomial::zero(self.nvars);
            }
            prev_pivot = pivot;
            rank += 1;
            col += 1;
        }
        rank
    }
}

/// The elementary braid-letter matrix acting on slice matrices.
///
/// For a red letter `i > 0` this is the right factor: the identity with the
/// 2×2 block `[[t, −1], [1, 0]]` at rows/columns `(i, i+1)`. For a blue
/// letter `i < 0` it is the left factor: the identity with the block
/// `[[0, −1], [1, t]]` at the mirrored index `n − |i|`. Pass `None` for a
/// hollow crossing (`t = 0`).
pub fn braid_letter_matrix(
    n: usize,
    nvars: usize,
    letter: i32,
    t_slot: Option<usize>,
) -> PolyMatrix {
    assert!(letter != 0 && (letter.unsigned_abs() as usize) < n);
    let t = match t_slot {
        Some(idx) => LaurentPolynomial::variable(nvars, idx),
        None => LaurentPolynomial::zero(nvars),
    };
    let mut m = PolyMatrix::identity(n, nvars);
    if letter > 0 {
        let i = letter as usize - 1;
        m.set_entry(i, i, t);
        m.set_entry(i, i + 1, LaurentPolynomial::constant(nvars, -1));
        m.set_entry(i + 1, i, LaurentPolynomial::one(nvars));
        m.set_entry(i + 1, i + 1, LaurentPolynomial::zero(nvars));
    } else {
        let i = n - letter.unsigned_abs() as usize - 1;
        m.set_entry(i, i, LaurentPolynomial::zero(nvars));
        m.set_entry(i, i + 1, LaurentPolynomial::constant(nvars, -1));
        m.set_entry(i + 1, i, LaurentPolynomial::one(nvars));
        m.set_entry(i + 1, i + 1, t);
    }
    m
}

/// The symbolic torus chart of a pair: slice matrices with one symbol per
/// solid crossing.
#[derive(Clone, Debug)]
pub struct TorusChart {
    record: SubexpressionRecord,
    z: Vec<PolyMatrix>,
    names: Vec<String>,
}

impl TorusChart {
    pub fn record(&self) -> &SubexpressionRecord {
        &self.record
    }

    pub fn n(&self) -> usize {
        self.record.n()
    }

    pub fn m(&self) -> usize {
        self.record.m()
    }

    /// Number of symbol slots (one per word position; hollow slots unused).
    pub fn nvars(&self) -> usize {
        self.record.m()
    }

    /// Symbol names `t1..tm` (indexed by crossing).
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// The slice matrix at `c ∈ 0..=m`.
    pub fn z_at(&self, c: usize) -> &PolyMatrix {
        &self.z[c]
    }

    /// Grid minor at slice `c` and signed level `h`: for `h > 0` the minor
    /// on rows `w₀u₍c₎{1..h}` and columns `{1..h}`; for `h < 0` the minor on
    /// the bottom `|h|` rows and the columns holding values `≤ |h|` in
    /// `u₍c₎`. Levels `0` and `±n` give the constant `1`.
    pub fn grid_minor(&self, c: usize, h: i32) -> LaurentPolynomial {
        let n = self.n();
        assert!(c <= self.m(), "slice {c} out of range");
        assert!(h.unsigned_abs() as usize <= n, "level {h} out of range");
        if h == 0 {
            return LaurentPolynomial::one(self.nvars());
        }
        if h.unsigned_abs() as usize == n {
            // The full determinant; always the constant 1 for these charts,
            // but compute it honestly.
            return self.z[c].det();
        }
        let u_c = self.record.u_at(c);
        let w0 = Permutation::longest(n);
        let (rows, cols): (Vec<usize>, Vec<usize>) = if h > 0 {
            let k = h as usize;
            let mut rows: Vec<usize> = (1..=k).map(|p| w0.apply(u_c.apply(p)) - 1).collect();
            rows.sort_unstable();
            (rows, (0..k).collect())
        } else {
            let k = (-h) as usize;
            let rows: Vec<usize> = (n - k..n).collect();
            let mut cols: Vec<usize> = (1..=n).filter(|&p| u_c.apply(p) <= k).map(|p| p - 1).collect();
            cols.sort_unstable();
            (rows, cols)
        };
        self.z[c].minor(&rows, &cols)
    }

    /// Chamber minor of crossing `c`: the grid minor immediately left of
    /// its bridge, at slice `c − 1` and the letter's signed level.
    pub fn chamber_minor(&self, c: usize) -> LaurentPolynomial {
        assert!(c >= 1 && c <= self.m());
        self.grid_minor(c - 1, self.record.word().letter(c))
    }

    /// Checks that every slice matrix generically lies in its rank cell:
    /// lower-left corner ranks match the pattern of `w₀u₍c₎`. Ranks are
    /// bounded below at random points modulo a large prime; with `strict`
    /// the upper bounds are certified by fraction-free symbolic elimination.
    pub fn verify_cell_membership(&self, strict: bool, seed: u64) -> Result<(), MinorError> {
        const P: u64 = (1 << 61) - 1;
        let n = self.n();
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = || {
            // SplitMix64 steps; only used to pick evaluation points.
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        };
        for c in 0..=self.m() {
            let w = Permutation::longest(n).compose(self.record.u_at(c));
            // Expected rank of the lower-left corner at (i, j):
            // #{a ≤ j : w(a) ≥ i}.
            let expected = |i: usize, j: usize| (1..=j).filter(|&a| w.apply(a) >= i).count();
            let mut best: Vec<Vec<usize>> = vec![vec![0; n + 1]; n + 2];
            for _ in 0..2 {
                let point: Vec<u64> = (0..self.nvars()).map(|_| next() % (P - 2) + 1).collect();
                let vals = self.z[c].eval_mod(&point, P);
                for i in 1..=n {
                    for j in 1..=n {
                        let sub: Vec<Vec<u64>> = (i - 1..n)
                            .map(|r| vals[r][0..j].to_vec())
                            .collect();
                        let r = rank_mod(sub, P);
                        best[i][j] = best[i][j].max(r);
                    }
                }
            }
            for i in 1..=n {
                for j in 1..=n {
                    let want = expected(i, j);
                    if best[i][j] > want {
                        return Err(MinorError::CellRank {
                            c,
                            reason: format!(
                                "corner ({i},{j}) has rank {} > expected {want}",
                                best[i][j]
                            ),
                        });
                    }
                    if best[i][j] < want {
                        if !strict {
                            return Err(MinorError::CellRank {
                                c,
                                reason: format!(
                                    "corner ({i},{j}) has rank {} < expected {want} at sampled points",
                                    best[i][j]
                                ),
                            });
                        }
                        // Certify symbolically before failing.
                        let rows: Vec<usize> = (i - 1..n).collect();
                        let cols: Vec<usize> = (0..j).collect();
                        let mut sub =
                            PolyMatrix::identity(rows.len().max(cols.len()), self.nvars());
                        // Embed the rectangular corner in a square matrix
                        // padded with zero rows/columns; padding cannot
                        // raise the rank.
                        let dim = rows.len().max(cols.len());
                        for (ri, &r) in rows.iter().enumerate() {
                            for ci in 0..dim {
                                let v = if ci < cols.len() {
                                    self.z[c].entry(r, cols[ci]).clone()
                                } else {
                                    LaurentPolynomial::zero(self.nvars())
                                };
                                sub.set_entry(ri, ci, v);
                            }
                        }
                        for ri in rows.len()..dim {
                            for ci in 0..dim {
                                sub.set_entry(ri, ci, LaurentPolynomial::zero(self.nvars()));
                            }
                        }
                        if sub.rank_symbolic() != want {
                            return Err(MinorError::CellRank {
                                c,
                                reason: format!(
                                    "corner ({i},{j}) has symbolic rank {} ≠ expected {want}",
                                    sub.rank_symbolic()
                                ),
                            });
                        }
                    }
                }
            }
            if strict {
                // Grid minors along the diagonal of the pattern must be
                // nonzero polynomials.
                for h in 1..n as i32 {
                    for sign in [1, -1] {
                        if self.grid_minor(c, sign * h).is_zero() {
                            return Err(MinorError::ZeroGridMinor { c, h: sign * h });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The companion minor of the level-`|i|` grid minor at a crossing: the
    /// same minor with the letter's index pair swapped in the column set
    /// (red) or row set (blue). Crossing the letter replaces exactly one
    /// column/row, so the minor one slice to the left decomposes as
    /// `Δ_{c−1} = t_c · Δ_c + companion` (with `t_c = 0` at a hollow
    /// crossing).
    fn companion_minor(&self, c: usize) -> LaurentPolynomial {
        let n = self.n();
        let letter = self.record.word().letter(c);
        let i = letter.unsigned_abs() as usize;
        // Row/column sets are read one slice to the left: identical to
        // slice c at a solid crossing, index-pair-swapped at a hollow one.
        let u_left = self.record.u_at(c - 1);
        let w0 = Permutation::longest(n);
        if letter > 0 {
            // Columns {1..i−1, i+1}.
            let mut rows: Vec<usize> = (1..=i).map(|p| w0.apply(u_left.apply(p)) - 1).collect();
            rows.sort_unstable();
            let mut cols: Vec<usize> = (0..i - 1).collect();
            cols.push(i);
            self.z[c].minor(&rows, &cols)
        } else {
            // Rows {n−i, n−i+2..n}.
            let mut rows: Vec<usize> = vec![n - i - 1];
            rows.extend(n - i + 1..=n - 1);
            let mut cols: Vec<usize> = (1..=n)
                .filter(|&p| u_left.apply(p) <= i)
                .map(|p| p - 1)
                .collect();
            cols.sort_unstable();
            self.z[c].minor(&rows, &cols)
        }
    }

    /// Verifies the step identities tying consecutive slice matrices
    /// together:
    ///
    /// * full determinants and boundary minors are 1;
    /// * same-color grid minors at levels `≠ |i|` never change across a
    ///   crossing, and opposite-color minors never change across a hollow
    ///   crossing;
    /// * at level `|i|` the minor decomposes across the crossing as
    ///   `Δ_{c−1,±|i|} = t_c · Δ_{c,±|i|} + companion`, where the companion
    ///   swaps the letter's index pair into the column (red) or row (blue)
    ///   set, and `t_c = 0` at hollow crossings;
    /// * at a hollow crossing the level-`|i|` minors additionally satisfy
    ///   the three-term identity
    ///   `Δ_{c−1,|i|} · Δ_{c,|i|} = Δ_{c,|i|−1} · Δ_{c,|i|+1}` (same color).
    ///
    /// (At a solid crossing the opposite-color minors may pick up a
    /// nontrivial cluster-monomial factor; their consistency is covered by
    /// [`verify_minor_factorization`].)
    pub fn verify_minor_identities(&self) -> Result<(), MinorError> {
        let n = self.n();
        let fail = |context: String| MinorError::InexactDivision { context };
        for c in 0..=self.m() {
            if !self.z[c].det().is_one() {
                return Err(fail(format!("det of slice {c} is not 1")));
            }
            if !self.grid_minor(c, 0).is_one() {
                return Err(fail(format!("boundary minor at slice {c} is not 1")));
            }
        }
        for c in 1..=self.m() {
            let letter = self.record.word().letter(c);
            let red = letter > 0;
            let i = letter.unsigned_abs() as i32;
            // Levels of the same color as the letter, and of the opposite
            // color.
            let same = |h: i32| if red { h } else { -h };
            let opposite = |h: i32| if red { -h } else { h };
            for h in 1..n as i32 {
                if h != i && self.grid_minor(c - 1, same(h)) != self.grid_minor(c, same(h)) {
                    return Err(fail(format!(
                        "step {c}: same-color minor at level {h} changed"
                    )));
                }
            }
            let companion = self.companion_minor(c);
            let transported = if self.record.is_solid(c) {
                let t_c = LaurentPolynomial::variable(self.nvars(), c - 1);
                t_c.mul(&self.grid_minor(c, same(i))).add(&companion)
            } else {
                companion
            };
            if self.grid_minor(c - 1, same(i)) != transported {
                return Err(fail(format!(
                    "step {c}: level-{i} minor does not decompose across the crossing"
                )));
            }
            if !self.record.is_solid(c) {
                for h in 1..n as i32 {
                    if self.grid_minor(c - 1, opposite(h)) != self.grid_minor(c, opposite(h)) {
                        return Err(fail(format!(
                            "hollow step {c}: opposite-color minor at level {h} changed"
                        )));
                    }
                }
                let lhs = self.grid_minor(c - 1, same(i)).mul(&self.grid_minor(c, same(i)));
                let rhs = self
                    .grid_minor(c, same(i - 1))
                    .mul(&self.grid_minor(c, same(i + 1)));
                if lhs != rhs {
                    return Err(fail(format!(
                        "hollow step {c}: three-term minor identity fails"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Verifies the cross-color product relations pairing each positive
    /// level with its partner under the slice permutation: at every slice
    /// `c`, for `a ∈ [1..n]` and `b = −u₍c₎(a)`,
    ///
    /// ```text
    /// Δ_{c,a} · Δ_{c,b+1} = Δ_{c,b} · Δ_{c,a−1},
    /// ```
    ///
    /// with levels `0` and `±n` denoting the constant `1`. These hold
    /// exactly (no sign correction) in this crate's conventions.
    pub fn verify_short_relations(&self) -> Result<(), MinorError> {
        for c in 0..=self.m() {
            let u_c = self.record.u_at(c);
            for a in 1..=self.n() {
                let b = -(u_c.apply(a) as i32);
                let lhs = self.grid_minor(c, a as i32).mul(&self.grid_minor(c, b + 1));
                let rhs = self.grid_minor(c, b).mul(&self.grid_minor(c, a as i32 - 1));
                if lhs != rhs {
                    return Err(MinorError::InexactDivision {
                        context: format!(
                            "short relation fails at slice {c}, level pair ({a}, {b})"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Verifies the exchange identity of a mutation swap with rightmost
/// crossing `d`: with `j` the level of the letter at `d−1` of the old word
/// and `primed` the post-move grid minor `Δ′_{d−1,j}` rewritten in the old
/// symbols,
///
/// ```text
/// Δ_{d−1,j} · Δ′_{d−1,j} = Δ_{d,j} · Δ_{d−2,j} + Δ_{d−1,j−1} · Δ_{d−1,j+1}.
/// ```
pub fn verify_swap_exchange(
    old: &TorusChart,
    primed: &LaurentPolynomial,
    d: usize,
) -> Result<(), MinorError> {
    let j = old.record().word().letter(d - 1);
    let lhs = old.grid_minor(d - 1, j).mul(primed);
    let rhs = old
        .grid_minor(d, j)
        .mul(&old.grid_minor(d - 2, j))
        .add(&old.grid_minor(d - 1, j - 1).mul(&old.grid_minor(d - 1, j + 1)));
    if lhs != rhs {
        return Err(MinorError::InexactDivision {
            context: format!("swap exchange identity fails at crossing {d}"),
        });
    }
    Ok(())
}

/// Verifies the exchange identity of a mutation braid rewrite with
/// rightmost crossing `d`: with `i` the outer and `j` the middle level of
/// the old window and `primed` the post-move grid minor `Δ′_{d−1,j}`
/// rewritten in the old symbols,
///
/// ```text
/// Δ_{d−1,i} · Δ′_{d−1,j} = Δ_{d,i} · Δ_{d−3,j} + Δ_{d,j} · Δ_{d−3,i}.
/// ```
pub fn verify_triple_exchange(
    old: &TorusChart,
    primed: &LaurentPolynomial,
    d: usize,
) -> Result<(), MinorError> {
    let i = old.record().word().letter(d);
    let j = old.record().word().letter(d - 1);
    let lhs = old.grid_minor(d - 1, i).mul(primed);
    let rhs = old
        .grid_minor(d, i)
        .mul(&old.grid_minor(d - 3, j))
        .add(&old.grid_minor(d, j).mul(&old.grid_minor(d - 3, i)));
    if lhs != rhs {
        return Err(MinorError::InexactDivision {
            context: format!("braid exchange identity fails at crossing {d}"),
        });
    }
    Ok(())
}

/// Gaussian elimination rank over `F_p`.
fn rank_mod(mut m: Vec<Vec<u64>>, p: u64) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| m[r][c] % p != 0) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = mod_inverse(m[rank][c], p);
        for c2 in c..cols {
            m[rank][c2] = mul_mod(m[rank][c2], inv, p);
        }
        for r in 0..rows {
            if r != rank && m[r][c] % p != 0 {
                let f = m[r][c];
                for c2 in c..cols {
                    let sub = mul_mod(f, m[rank][c2], p);
                    m[r][c2] = (m[r][c2] + p - sub) % p;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Builds the symbolic chart of a pair: `Z_m` is the signed matrix of
/// `w₀u`, red letters multiply [`braid_letter_matrix`] in on the right,
/// blue letters on the left; solid crossings carry the symbol `t_c`,
/// hollow crossings carry `0`.
pub fn build_chart(record: &SubexpressionRecord) -> TorusChart {
    let n = record.n();
    let m = record.m();
    let nvars = m;
    let w0u = Permutation::longest(n).compose(record.u());
    let mut z = vec![PolyMatrix::identity(n, nvars); m + 1];
    z[m] = PolyMatrix::from_signed(&w0u.signed_matrix(), nvars);
    for c in (1..=m).rev() {
        let letter = record.word().letter(c);
        let slot = if record.is_solid(c) { Some(c - 1) } else { None };
        let gen = braid_letter_matrix(n, nvars, letter, slot);
        z[c - 1] = if letter > 0 {
            z[c].mul(&gen)
        } else {
            gen.mul(&z[c])
        };
    }
    let names = (1..=m).map(|c| format!("t{c}")).collect();
    TorusChart {
        record: record.clone(),
        z,
        names,
    }
}

/// Inverse of an upper unitriangular integer matrix.
pub fn inverse_unitriangular(m: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, MinorError> {
    let s = m.len();
    for (r, row) in m.iter().enumerate() {
        if row.len() != s || row[r] != 1 || row[..r].iter().any(|&v| v != 0) {
            return Err(MinorError::NotUnitriangular { row: r });
        }
    }
    let mut inv = vec![vec![0i64; s]; s];
    for j in 0..s {
        // Solve M·x = e_j by back substitution.
        let mut x = vec![0i64; s];
        for i in (0..s).rev() {
            let mut v = if i == j { 1 } else { 0 };
            for k in i + 1..s {
                v -= m[i][k] * x[k];
            }
            x[i] = v;
        }
        for i in 0..s {
            inv[i][j] = x[i];
        }
    }
    Ok(inv)
}

/// The cluster variables of a chart: one Laurent polynomial per solid
/// crossing, labeled by crossing index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterVariables {
    labels: Vec<usize>,
    mutable: Vec<bool>,
    polys: Vec<LaurentPolynomial>,
}

impl ClusterVariables {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn mutable_flags(&self) -> &[bool] {
        &self.mutable
    }

    pub fn polys(&self) -> &[LaurentPolynomial] {
        &self.polys
    }

    pub fn get(&self, label: usize) -> Option<&LaurentPolynomial> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|i| &self.polys[i])
    }
}

/// Computes the cluster variables of a chart from its order table: the
/// chamber-minor exponent matrix is upper unitriangular, and each variable
/// is the corresponding alternating product of chamber minors, evaluated by
/// exact division.
pub fn cluster_variables(
    chart: &TorusChart,
    table: &OrderTable,
) -> Result<ClusterVariables, MinorError> {
    let solid = table.solid_indices().to_vec();
    let exponents = inverse_unitriangular(&table.chamber_order_matrix())?;
    let chambers: Vec<LaurentPolynomial> =
        solid.iter().map(|&c| chart.chamber_minor(c)).collect();
    let mut polys = Vec::with_capacity(solid.len());
    for (di, &d) in solid.iter().enumerate() {
        let mut num = LaurentPolynomial::one(chart.nvars());
        let mut den = LaurentPolynomial::one(chart.nvars());
        for (ci, chamber) in chambers.iter().enumerate() {
            let e = exponents[di][ci];
            match e.cmp(&0) {
                std::cmp::Ordering::Greater => num = num.mul(&chamber.pow(e as u32)),
                std::cmp::Ordering::Less => den = den.mul(&chamber.pow((-e) as u32)),
                std::cmp::Ordering::Equal => {}
            }
        }
        let x = num.div_exact(&den).map_err(|_| MinorError::InexactDivision {
            context: format!("cluster variable at crossing {d} is not a Laurent polynomial"),
        })?;
        polys.push(x);
    }
    Ok(ClusterVariables {
        labels: solid,
        mutable: table.mutable_flags().to_vec(),
        polys,
    })
}

/// Verifies that every grid minor factors, up to sign, as the product of
/// cluster variables dictated by the order table. Returns the first failing
/// position.
pub fn verify_minor_factorization(
    chart: &TorusChart,
    table: &OrderTable,
    vars: &ClusterVariables,
) -> Result<(), MinorError> {
    let n = chart.n() as i32;
    for c in 0..=chart.m() {
        for h in (-n + 1)..n {
            if h == 0 {
                continue;
            }
            let minor = chart.grid_minor(c, h);
            let mut product = LaurentPolynomial::one(chart.nvars());
            for (i, &d) in vars.labels().iter().enumerate() {
                let e = table.ord(d, c, h);
                if e > 0 {
                    product = product.mul(&vars.polys()[i].pow(e as u32));
                }
            }
            if minor != product && minor != product.neg() {
                return Err(MinorError::InexactDivision {
                    context: format!(
                        "grid minor at slice {c}, level {h} does not factor as its cluster monomial"
                    ),
                });
            }
        }
    }
    Ok(())
}

/// Mutates the cluster variable at `label`: computes the exchange binomial
/// from the matrix `b` (rows/columns ordered as `labels`) and divides by
/// the old variable. Exactness of the division is the regularity check.
pub fn exchange_variable(
    vars: &ClusterVariables,
    labels: &[usize],
    b: &[Vec<i64>],
    label: usize,
) -> Result<LaurentPolynomial, MinorError> {
    let nvars = vars
        .polys()
        .first()
        .map(|p| p.nvars())
        .expect("nonempty cluster");
    let d = labels
        .iter()
        .position(|&l| l == label)
        .expect("label present");
    let mut incoming = LaurentPolynomial::one(nvars);
    let mut outgoing = LaurentPolynomial::one(nvars);
    for (c, row) in b.iter().enumerate() {
        let e = row[d];
        let x_c = vars.get(labels[c]).expect("variable present");
        match e.cmp(&0) {
            std::cmp::Ordering::Greater => incoming = incoming.mul(&x_c.pow(e as u32)),
            std::cmp::Ordering::Less => outgoing = outgoing.mul(&x_c.pow((-e) as u32)),
            std::cmp::Ordering::Equal => {}
        }
    }
    let binomial = incoming.add(&outgoing);
    let x_d = vars.get(label).expect("label present");
    binomial.div_exact(x_d).map_err(|_| MinorError::InexactDivision {
        context: format!("exchange at crossing {label} is not regular"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::{compute_pds, order_table, DoubleBraidWord};

    fn poly(nvars: usize, terms: &[(&[i32], i64)]) -> LaurentPolynomial {
        let mut acc = LaurentPolynomial::zero(nvars);
        for (exps, coeff) in terms {
            acc = acc.add(&LaurentPolynomial::monomial(nvars, exps.to_vec(), *coeff));
        }
        acc
    }

    #[test]
    fn arithmetic_basics() {
        let x = LaurentPolynomial::variable(2, 0);
        let y = LaurentPolynomial::variable(2, 1);
        let p = x.add(&y).mul(&x.sub(&y));
        assert_eq!(p, poly(2, &[(&[2, 0], 1), (&[0, 2], -1)]));
        assert_eq!(p.num_terms(), 2);
        assert!(LaurentPolynomial::zero(2).is_zero());
        assert_eq!(x.pow(3), poly(2, &[(&[3, 0], 1)]));
        // Laurent monomials.
        let inv = LaurentPolynomial::monomial(2, vec![-1, 0], 1);
        assert!(x.mul(&inv).is_one());
    }

    #[test]
    fn exact_division() {
        let x = LaurentPolynomial::variable(2, 0);
        let y = LaurentPolynomial::variable(2, 1);
        let p = x.pow(2).sub(&y.pow(2));
        let q = p.div_exact(&x.sub(&y)).unwrap();
        assert_eq!(q, x.add(&y));
        // Division by a Laurent monomial.
        let m = LaurentPolynomial::monomial(2, vec![1, -1], 2);
        let p2 = m.mul(&q);
        assert_eq!(p2.div_exact(&m).unwrap(), q);
        // Inexact cases fail (not loop).
        assert!(x.add(&y).div_exact(&x.add(&LaurentPolynomial::one(2))).is_err());
        assert!(LaurentPolynomial::one(2).div_exact(&x.add(&y)).is_err());
        assert!(poly(2, &[(&[1, 0], 2)])
            .div_exact(&poly(2, &[(&[1, 0], 3)]))
            .is_err());
        // 0 / p = 0.
        assert!(LaurentPolynomial::zero(2).div_exact(&x).unwrap().is_zero());
    }

    #[test]
    fn division_random_products_roundtrip() {
        // (a·b) / b = a for a batch of deterministic pseudo-random pairs.
        let mut state = 0x12345678u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as i64
        };
        for _ in 0..50 {
            let mut a = LaurentPolynomial::zero(3);
            let mut b = LaurentPolynomial::zero(3);
            for _ in 0..4 {
                let e = |r: i64| ((r % 5) - 2) as i32;
                a = a.add(&LaurentPolynomial::monomial(
                    3,
                    vec![e(next()), e(next()), e(next())],
                    (next() % 7) - 3,
                ));
                b = b.add(&LaurentPolynomial::monomial(
                    3,
                    vec![e(next()), e(next()), e(next())],
                    (next() % 7) - 3,
                ));
            }
            if a.is_zero() || b.is_zero() {
                continue;
            }
            assert_eq!(a.mul(&b).div_exact(&b).unwrap(), a);
        }
    }

    #[test]
    fn rendering() {
        let p = poly(4, &[(&[1, 0, 0, 1], 1), (&[0, 0, 0, 0], 1)]);
        assert_eq!(p.to_string(), "t1*t4 + 1");
        let q = poly(2, &[(&[2, -1], -3), (&[0, 0], 1)]);
        assert_eq!(q.to_string(), "-3*t1^2*t2^-1 + 1");
        assert_eq!(LaurentPolynomial::zero(1).to_string(), "0");
    }

    #[test]
    fn eval_mod_matches_symbolic() {
        let p = poly(2, &[(&[2, -1], 5), (&[0, 0], -3)]);
        // p(2, 3) = 5·4/3 − 3 mod 101: 4·inverse(3) = 4·34 = 136 = 35;
        // 5·35 = 175 = 74; 74 − 3 = 71.
        assert_eq!(p.eval_mod(&[2, 3], 101), 71);
    }

    #[test]
    fn minor_determinants() {
        // Vandermonde in three variables.
        let v = |i: usize| LaurentPolynomial::variable(3, i);
        let mut m = PolyMatrix::identity(3, 3);
        for r in 0..3 {
            m.set_entry(r, 0, LaurentPolynomial::one(3));
            m.set_entry(r, 1, v(r));
            m.set_entry(r, 2, v(r).mul(&v(r)));
        }
        let det = m.det();
        let expect = v(1)
            .sub(&v(0))
            .mul(&v(2).sub(&v(0)))
            .mul(&v(2).sub(&v(1)));
        assert_eq!(det, expect);
        // 1×1 and empty minors.
        assert_eq!(m.minor(&[1], &[1]), v(1));
        assert!(m.minor(&[], &[]).is_one());
        // Rank of the Vandermonde matrix is full; after zeroing a row it
        // drops.
        assert_eq!(m.rank_symbolic(), 3);
        let mut m2 = m.clone();
        for c in 0..3 {
            m2.set_entry(2, c, LaurentPolynomial::zero(3));
        }
        assert_eq!(m2.rank_symbolic(), 2);
    }

    #[test]
    fn unitriangular_inverse() {
        let m = vec![vec![1, 2, 3], vec![0, 1, -1], vec![0, 0, 1]];
        let inv = inverse_unitriangular(&m).unwrap();
        // Multiply back.
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0;
                for k in 0..3 {
                    v += m[i][k] * inv[k][j];
                }
                assert_eq!(v, i64::from(i == j));
            }
        }
        assert!(inverse_unitriangular(&[vec![1, 0], vec![1, 1]]).is_err());
    }

    /// The running example: u = s2, word = (−2, 1, 2, 1, −1) on three
    /// strands. The slice matrices, chamber minors, and cluster variables
    /// below were computed by hand from the recursion rules and locked in.
    fn running_chart() -> (TorusChart, OrderTable) {
        let u = Permutation::from_one_line(vec![1, 3, 2]).unwrap();
        let w = DoubleBraidWord::new(3, vec![-2, 1, 2, 1, -1]).unwrap();
        let record = compute_pds(&u, &w).unwrap();
        let table = order_table(&record).unwrap();
        (build_chart(&record), table)
    }

    #[test]
    fn chart_running_example_slices() {
        let (chart, _) = running_chart();
        let e = |exps: &[i32], c: i64| LaurentPolynomial::monomial(5, exps.to_vec(), c);
        let zero = LaurentPolynomial::zero(5);
        // Z at the right end is the signed matrix of w0·u.
        let z5 = chart.z_at(5);
        assert_eq!(z5.entry(0, 1), &e(&[0, 0, 0, 0, 0], -1));
        assert_eq!(z5.entry(2, 0), &e(&[0, 0, 0, 0, 0], 1));
        assert_eq!(z5.entry(0, 0), &zero);
        // Z at the left end, row by row:
        // [ t2·t4,            −t4,      1   ]
        // [ −t2 − t1·t2·t4,   1 + t1·t4, −t1 ]
        // [ t2·t4·t5 − 1,     −t4·t5,   t5  ]
        let z0 = chart.z_at(0);
        assert_eq!(z0.entry(0, 0), &e(&[0, 1, 0, 1, 0], 1));
        assert_eq!(z0.entry(0, 1), &e(&[0, 0, 0, 1, 0], -1));
        assert_eq!(z0.entry(0, 2), &LaurentPolynomial::one(5));
        assert_eq!(
            z0.entry(1, 0),
            &e(&[0, 1, 0, 0, 0], -1).add(&e(&[1, 1, 0, 1, 0], -1))
        );
        assert_eq!(
            z0.entry(1, 1),
            &LaurentPolynomial::one(5).add(&e(&[1, 0, 0, 1, 0], 1))
        );
        assert_eq!(z0.entry(1, 2), &e(&[1, 0, 0, 0, 0], -1));
        assert_eq!(
            z0.entry(2, 0),
            &e(&[0, 1, 0, 1, 1], 1).add(&LaurentPolynomial::constant(5, -1))
        );
        assert_eq!(z0.entry(2, 1), &e(&[0, 0, 0, 1, 1], -1));
        assert_eq!(z0.entry(2, 2), &e(&[0, 0, 0, 0, 1], 1));
    }

    #[test]
    fn chamber_minors_running_example() {
        let (chart, _) = running_chart();
        let names: Vec<String> = (1..=5).map(|i| format!("t{i}")).collect();
        let show = |p: LaurentPolynomial| p.to_string_with(&names);
        assert_eq!(show(chart.chamber_minor(1)), "t1*t4 + 1");
        assert_eq!(show(chart.chamber_minor(2)), "t2*t4*t5 - 1");
        assert_eq!(show(chart.chamber_minor(4)), "t4*t5");
        assert_eq!(show(chart.chamber_minor(5)), "t5");
    }

    #[test]
    fn cluster_variables_running_example() {
        let (chart, table) = running_chart();
        let vars = cluster_variables(&chart, &table).unwrap();
        assert_eq!(vars.labels(), &[1, 2, 4, 5]);
        assert_eq!(vars.mutable_flags(), &[false, false, true, true]);
        let expected = [
            ("t1*t4 + 1", 1usize),
            ("t2*t4*t5 - 1", 2),
            ("t4", 4),
            ("t5", 5),
        ];
        for (text, label) in expected {
            assert_eq!(vars.get(label).unwrap().to_string(), text, "x{label}");
        }
        // The symbols that occur are exactly the solid slots.
        let mut support = BTreeSet::new();
        for p in vars.polys() {
            support.extend(p.support_vars());
        }
        assert_eq!(support.into_iter().collect::<Vec<_>>(), vec![0, 1, 3, 4]);
        // The chamber minor of crossing 4 factors as x4·x5.
        assert_eq!(
            chart.chamber_minor(4),
            vars.get(4).unwrap().mul(vars.get(5).unwrap())
        );
    }

    #[test]
    fn minor_identities_and_factorization_running_example() {
        let (chart, table) = running_chart();
        chart.verify_minor_identities().unwrap();
        let vars = cluster_variables(&chart, &table).unwrap();
        verify_minor_factorization(&chart, &table, &vars).unwrap();
        chart.verify_cell_membership(true, 7).unwrap();
    }

    #[test]
    fn chart_identities_small_sweep() {
        // Every admissible pair with n = 3, m ≤ 3: identities, cluster
        // variables, and factorization all hold.
        let n = 3;
        let perms = Permutation::all(n);
        let letters = [1i32, 2, -1, -2];
        for m in 0..=3 {
            let mut idx = vec![0usize; m];
            loop {
                let w =
                    DoubleBraidWord::new(n, idx.iter().map(|&i| letters[i]).collect()).unwrap();
                for u in &perms {
                    if let Ok(record) = compute_pds(u, &w) {
                        let chart = build_chart(&record);
                        chart.verify_minor_identities().unwrap_or_else(|e| {
                            panic!("identities fail for u={u}, word={w}: {e}")
                        });
                        let table = order_table(&record).unwrap();
                        let vars = cluster_variables(&chart, &table).unwrap_or_else(|e| {
                            panic!("variables fail for u={u}, word={w}: {e}")
                        });
                        verify_minor_factorization(&chart, &table, &vars).unwrap_or_else(|e| {
                            panic!("factorization fails for u={u}, word={w}: {e}")
                        });
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
    fn substitution_fraction() {
        // Substituting x ↦ a+b, y ↦ a into x·y⁻¹ + 1 gives
        // ((a+b) + a)/a.
        let p = poly(2, &[(&[1, -1], 1), (&[0, 0], 1)]);
        let a = LaurentPolynomial::variable(2, 0);
        let b = LaurentPolynomial::variable(2, 1);
        let (num, den) = p.substitute(&[a.add(&b), a.clone()]);
        assert_eq!(den, a);
        assert_eq!(num, a.add(&b).add(&a));
    }
}

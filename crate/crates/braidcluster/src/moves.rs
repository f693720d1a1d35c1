//! Local rewriting moves on double braid words and their quiver effects.
//!
//! Five moves rewrite a word without changing the variety its pair presents:
//! swapping adjacent letters of opposite colors ([`MoveKind::OppositeSwap`]),
//! swapping adjacent same-color letters whose levels are at least two apart
//! ([`MoveKind::DistantSwap`]), the braid rewrite `x y x → y x y` within one
//! color ([`MoveKind::BraidTriple`]), trading the last letter across the
//! longest element ([`MoveKind::TailFlip`]), and flipping the color of the
//! first letter ([`MoveKind::HeadFlip`]).
//!
//! Applying a move reports its [`MoveEffect`] on the labeled quiver. Two
//! shapes mutate the quiver at the rightmost crossing of their window: an
//! opposite-color swap whose two bridges ride the same pair of wires with
//! both crossings solid, and a braid rewrite with all three crossings solid.
//! The braid rewrite additionally trades the labels of the two left window
//! crossings, following the same companion-key matching that governs its
//! non-mutation form. Every other move merely relabels the solid crossings,
//! leaves everything unchanged, or — for the head flip — preserves exactly
//! the mutable subquiver. [`verify_invariance`] checks the predicted effect against a
//! from-scratch quiver computation, [`transport_parameters`] carries the
//! torus-chart symbols across a move, and [`certify_sink_recurrence`] steers
//! the moves to produce a certificate that the mutable quiver is
//! sink-recurrent, checkable by [`crate::quiver::check_certificate`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{
    compute_aps_from_record, compute_pds, extend_to_longest, order_table, BraidError,
    DoubleBraidWord, SubexpressionRecord,
};
use crate::cycles::{all_cycles, CycleError};
use crate::minors::{
    build_chart, verify_swap_exchange, verify_triple_exchange, LaurentPolynomial, MinorError,
};
use crate::perm::Permutation;
use crate::quiver::{quiver_from_cycles, IceQuiver, QuiverError, SinkCertificate};

/// Errors raised while classifying, applying, or verifying moves.
#[derive(Debug, Error)]
pub enum MoveError {
    #[error("move not applicable: {reason}")]
    Inapplicable { reason: String },
    #[error("rotation unavailable: {reason}")]
    RotationUnavailable { reason: String },
    #[error("steering failed: {reason}")]
    ReductionFailure { reason: String },
    #[error("relabeling is ambiguous: {reason}")]
    AmbiguousRelabel { reason: String },
    #[error("quiver after the move does not match the predicted effect")]
    VerificationFailure {
        expected: Box<IceQuiver>,
        actual: Box<IceQuiver>,
    },
    #[error("substituted chart disagrees at slice {slice}, entry ({row}, {col})")]
    TransportMismatch { slice: usize, row: usize, col: usize },
    #[error("order-table minimum rule fails at solid crossing {e}: {lhs} ≠ {rhs}")]
    OrdMinFailure { e: usize, lhs: i64, rhs: i64 },
    #[error(transparent)]
    Braid(#[from] BraidError),
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Minor(#[from] MinorError),
}

/// The five local rewrites of a double braid word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveKind {
    /// Swap two adjacent letters of opposite colors.
    OppositeSwap,
    /// Swap two adjacent letters of one color with levels at distance ≥ 2.
    DistantSwap,
    /// Rewrite `x y x` as `y x y` within one color, levels at distance 1.
    BraidTriple,
    /// Replace the last letter `a` by `−sign(a)·(n−|a|)`; needs the base
    /// permutation to be the longest element.
    TailFlip,
    /// Flip the color of the first letter.
    HeadFlip,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MoveKind::OppositeSwap => "opposite-swap",
            MoveKind::DistantSwap => "distant-swap",
            MoveKind::BraidTriple => "braid-triple",
            MoveKind::TailFlip => "tail-flip",
            MoveKind::HeadFlip => "head-flip",
        };
        write!(f, "{name}")
    }
}

/// A move anchored at a specific crossing of a specific word, classified by
/// its effect on the quiver.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveInstance {
    pub kind: MoveKind,
    /// Rightmost crossing of the rewritten window.
    pub d: usize,
    /// Opposite-color swaps only: the two bridges sit on the same pair of
    /// wires at the right wall of the window.
    pub special: bool,
    /// Every crossing in the window is solid.
    pub fully_solid: bool,
    /// The move mutates the quiver at `d` instead of relabeling it.
    pub mutation: bool,
}

impl MoveInstance {
    /// The rewritten window `(l, r]`: letters `l+1..=r` change, the walls
    /// `l` and `r` and everything outside stay put.
    pub fn window(&self) -> (usize, usize) {
        match self.kind {
            MoveKind::OppositeSwap | MoveKind::DistantSwap => (self.d - 2, self.d),
            MoveKind::BraidTriple => (self.d - 3, self.d),
            MoveKind::TailFlip | MoveKind::HeadFlip => (self.d - 1, self.d),
        }
    }
}

impl fmt::Display for MoveInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at crossing {}", self.kind, self.d)?;
        if self.mutation {
            write!(f, " (mutation)")?;
        } else if self.special {
            write!(f, " (special)")?;
        }
        Ok(())
    }
}

/// How a move acts on the labeled quiver of the pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum MoveEffect {
    /// The quiver mutates at crossing `d` and is then carried along the
    /// bijection `alpha` of solid crossings. A mutation swap keeps every
    /// label in place; a mutation braid rewrite trades the labels of the
    /// two left window crossings `d−2` and `d−1`.
    Mutation {
        d: usize,
        #[serde(with = "pair_list")]
        alpha: BTreeMap<usize, usize>,
    },
    /// The quiver is carried along the bijection `alpha` of solid crossings.
    Relabel {
        #[serde(with = "pair_list")]
        alpha: BTreeMap<usize, usize>,
    },
    /// Solid set, vanishing orders, and quiver are unchanged bitwise.
    Unchanged,
    /// The mutable subquiver is unchanged; rows of frozen vertices may move.
    MutablePart,
}

/// Serializes a relabeling as a list of `[from, to]` pairs, which survives
/// the internally tagged representation of [`MoveEffect`].
mod pair_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<usize, usize>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        map.iter()
            .map(|(&c, &t)| (c, t))
            .collect::<Vec<_>>()
            .serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<usize, usize>, D::Error> {
        Ok(Vec::<(usize, usize)>::deserialize(de)?.into_iter().collect())
    }
}

/// The result of applying a move: the rewritten word's record and the
/// effect on the quiver.
#[derive(Clone, Debug, Serialize)]
pub struct MoveOutcome {
    pub instance: MoveInstance,
    pub record: SubexpressionRecord,
    pub effect: MoveEffect,
}

/// Classifies the move of the given kind anchored at crossing `d`, or
/// explains why it does not apply.
pub fn instance_at(
    record: &SubexpressionRecord,
    kind: MoveKind,
    d: usize,
) -> Result<MoveInstance, MoveError> {
    let m = record.m();
    let n = record.n();
    let word = record.word();
    let fail = |reason: String| Err(MoveError::Inapplicable { reason });
    if d == 0 || d > m {
        return fail(format!("crossing {d} out of range for {m} letters"));
    }
    match kind {
        MoveKind::OppositeSwap => {
            if d < 2 {
                return fail("an adjacent swap needs a letter to the left".into());
            }
            let a = word.letter(d - 1);
            let b = word.letter(d);
            if a.signum() == b.signum() {
                return fail(format!("letters at {} and {d} share a color", d - 1));
            }
            let red = a.max(b) as usize;
            let blue = (-a.min(b)) as usize;
            let wall = record.u_at(d);
            let (x, y) = (wall.apply(red), wall.apply(red + 1));
            let special = (x == blue && y == blue + 1) || (x == blue + 1 && y == blue);
            let fully_solid = record.is_solid(d - 1) && record.is_solid(d);
            Ok(MoveInstance {
                kind,
                d,
                special,
                fully_solid,
                mutation: special && fully_solid,
            })
        }
        MoveKind::DistantSwap => {
            if d < 2 {
                return fail("an adjacent swap needs a letter to the left".into());
            }
            let a = word.letter(d - 1);
            let b = word.letter(d);
            if a.signum() != b.signum() {
                return fail(format!("letters at {} and {d} have opposite colors", d - 1));
            }
            if a.unsigned_abs().abs_diff(b.unsigned_abs()) <= 1 {
                return fail(format!(
                    "levels {} and {} are too close to commute",
                    a.abs(),
                    b.abs()
                ));
            }
            let fully_solid = record.is_solid(d - 1) && record.is_solid(d);
            Ok(MoveInstance {
                kind,
                d,
                special: false,
                fully_solid,
                mutation: false,
            })
        }
        MoveKind::BraidTriple => {
            if d < 3 {
                return fail("a braid rewrite needs two letters to the left".into());
            }
            let x = word.letter(d - 2);
            let y = word.letter(d - 1);
            let z = word.letter(d);
            if x != z {
                return fail(format!("letters at {} and {d} differ", d - 2));
            }
            if x.signum() != y.signum() {
                return fail(format!("letters at {} and {} have opposite colors", d - 2, d - 1));
            }
            if x.unsigned_abs().abs_diff(y.unsigned_abs()) != 1 {
                return fail(format!(
                    "levels {} and {} are not adjacent",
                    x.abs(),
                    y.abs()
                ));
            }
            let fully_solid =
                record.is_solid(d - 2) && record.is_solid(d - 1) && record.is_solid(d);
            Ok(MoveInstance {
                kind,
                d,
                special: false,
                fully_solid,
                mutation: fully_solid,
            })
        }
        MoveKind::TailFlip => {
            if d != m {
                return fail(format!("the tail flip acts on the last crossing, not {d}"));
            }
            if *record.u() != Permutation::longest(n) {
                return fail("the base permutation is not the longest element".into());
            }
            Ok(MoveInstance {
                kind,
                d,
                special: false,
                fully_solid: record.is_solid(d),
                mutation: false,
            })
        }
        MoveKind::HeadFlip => {
            if d != 1 {
                return fail(format!("the head flip acts on the first crossing, not {d}"));
            }
            Ok(MoveInstance {
                kind,
                d,
                special: false,
                fully_solid: record.is_solid(1),
                mutation: false,
            })
        }
    }
}

/// All moves applicable to the word of `record`, ordered by rightmost
/// crossing and then by kind.
pub fn enumerate_applicable(record: &SubexpressionRecord) -> Vec<MoveInstance> {
    let kinds = [
        MoveKind::OppositeSwap,
        MoveKind::DistantSwap,
        MoveKind::BraidTriple,
        MoveKind::TailFlip,
        MoveKind::HeadFlip,
    ];
    let mut out = Vec::new();
    for d in 1..=record.m() {
        for kind in kinds {
            if let Ok(mv) = instance_at(record, kind, d) {
                out.push(mv);
            }
        }
    }
    out
}

/// Applies a move: rewrites the word, recomputes the subexpression record,
/// and derives the effect on the quiver.
pub fn apply(record: &SubexpressionRecord, mv: &MoveInstance) -> Result<MoveOutcome, MoveError> {
    let fresh = instance_at(record, mv.kind, mv.d)?;
    if fresh != *mv {
        return Err(MoveError::Inapplicable {
            reason: format!("stale instance: the word now classifies the move as {fresh:?}"),
        });
    }
    let d = mv.d;
    let n = record.n();
    let mut letters = record.word().letters().to_vec();
    match mv.kind {
        MoveKind::OppositeSwap | MoveKind::DistantSwap => letters.swap(d - 2, d - 1),
        MoveKind::BraidTriple => {
            let (x, y) = (letters[d - 3], letters[d - 2]);
            letters[d - 3] = y;
            letters[d - 2] = x;
            letters[d - 1] = y;
        }
        MoveKind::TailFlip => {
            let a = letters[d - 1];
            letters[d - 1] = -a.signum() * (n as i32 - a.abs());
        }
        MoveKind::HeadFlip => letters[0] = -letters[0],
    }
    let word = DoubleBraidWord::new(n, letters)?;
    let new_record = compute_pds(record.u(), &word)?;
    let effect = classify_effect(record, &new_record, mv)?;
    Ok(MoveOutcome {
        instance: mv.clone(),
        record: new_record,
        effect,
    })
}

/// Derives the quiver effect of an applied move from the two records.
fn classify_effect(
    old: &SubexpressionRecord,
    new: &SubexpressionRecord,
    mv: &MoveInstance,
) -> Result<MoveEffect, MoveError> {
    let d = mv.d;
    match mv.kind {
        MoveKind::TailFlip => {
            for c in 0..=old.m() {
                assert_eq!(
                    old.u_at(c),
                    new.u_at(c),
                    "tail flip changed the permutation sequence at slice {c}"
                );
            }
            assert_eq!(
                old.solid_indices(),
                new.solid_indices(),
                "tail flip changed the solid set"
            );
            Ok(MoveEffect::Unchanged)
        }
        MoveKind::HeadFlip => {
            assert_eq!(
                old.solid_indices(),
                new.solid_indices(),
                "head flip changed the solid set"
            );
            Ok(MoveEffect::MutablePart)
        }
        MoveKind::OppositeSwap | MoveKind::DistantSwap => {
            if mv.mutation {
                assert_eq!(
                    old.solid_indices(),
                    new.solid_indices(),
                    "mutation swap at {d} changed the solid set"
                );
                // A mutation swap keeps every companion key in place, so
                // the relabeling is the identity on the solid set.
                let alpha = old.solid_indices().into_iter().map(|c| (c, c)).collect();
                Ok(MoveEffect::Mutation { d, alpha })
            } else if mv.special {
                // Solid statuses stay in place: the left crossing remains
                // solid and the right one hollow on both sides of the swap.
                assert_eq!(
                    old.solid_indices(),
                    new.solid_indices(),
                    "special swap at {d} changed the solid set"
                );
                let alpha = old.solid_indices().into_iter().map(|c| (c, c)).collect();
                Ok(MoveEffect::Relabel { alpha })
            } else {
                Ok(MoveEffect::Relabel {
                    alpha: swap_travel_alpha(old, new, d),
                })
            }
        }
        MoveKind::BraidTriple => {
            if mv.mutation {
                assert_eq!(
                    old.solid_indices(),
                    new.solid_indices(),
                    "mutation braid rewrite at {d} changed the solid set"
                );
                // The quiver mutates at `d`, and the window crossings are
                // rematched by their companion keys like in the hollow case.
                // A fully solid wall is an ascent staircase, which forces the
                // keys of the two left crossings to trade places.
                let alpha = braid_window_alpha(old, new, d)?;
                debug_assert!(
                    alpha.iter().all(|(&c, &t)| {
                        if c == d - 2 {
                            t == d - 1
                        } else if c == d - 1 {
                            t == d - 2
                        } else {
                            t == c
                        }
                    }),
                    "mutation braid rewrite at {d} produced an unexpected relabeling {alpha:?}"
                );
                Ok(MoveEffect::Mutation { d, alpha })
            } else {
                Ok(MoveEffect::Relabel {
                    alpha: braid_window_alpha(old, new, d)?,
                })
            }
        }
    }
}

/// For a plain adjacent swap the solid statuses travel with the letters:
/// crossings `d−1` and `d` trade places, everything else stays.
fn swap_travel_alpha(
    old: &SubexpressionRecord,
    new: &SubexpressionRecord,
    d: usize,
) -> BTreeMap<usize, usize> {
    let mut alpha = BTreeMap::new();
    for c in old.solid_indices() {
        let target = if c == d - 1 {
            d
        } else if c == d {
            d - 1
        } else {
            c
        };
        alpha.insert(c, target);
    }
    let image: BTreeSet<usize> = alpha.values().copied().collect();
    let target: BTreeSet<usize> = new.solid_indices().into_iter().collect();
    assert_eq!(
        image, target,
        "solid statuses did not travel with the swapped letters at crossing {d}"
    );
    alpha
}

/// For a braid rewrite that is not fully solid, the window crossings are
/// rematched by the tails of their cycles at the left wall: two solid
/// crossings correspond exactly when their companion sequences agree on
/// slice `d−3`, where the two words coincide again.
fn braid_window_alpha(
    old: &SubexpressionRecord,
    new: &SubexpressionRecord,
    d: usize,
) -> Result<BTreeMap<usize, usize>, MoveError> {
    let window = [d - 2, d - 1, d];
    let mut alpha = BTreeMap::new();
    for c in old.solid_indices() {
        if !window.contains(&c) {
            assert!(
                new.is_solid(c),
                "solid status at crossing {c} changed outside the rewrite window"
            );
            alpha.insert(c, c);
        }
    }
    let old_in: Vec<usize> = window.iter().copied().filter(|&c| old.is_solid(c)).collect();
    let new_in: Vec<usize> = window.iter().copied().filter(|&c| new.is_solid(c)).collect();
    if old_in.len() != new_in.len() {
        return Err(MoveError::AmbiguousRelabel {
            reason: format!(
                "window solid sets {old_in:?} and {new_in:?} have different sizes at crossing {d}"
            ),
        });
    }
    let wall = d - 3;
    let old_keys = wall_tails(old, &old_in, wall)?;
    let new_keys = wall_tails(new, &new_in, wall)?;
    for (idx, key) in old_keys.iter().enumerate() {
        let hits: Vec<usize> = new_keys
            .iter()
            .enumerate()
            .filter(|(_, k)| *k == key)
            .map(|(j, _)| j)
            .collect();
        if hits.len() != 1 {
            return Err(MoveError::AmbiguousRelabel {
                reason: format!(
                    "cycle tail of crossing {} matches {} rewritten crossings",
                    old_in[idx],
                    hits.len()
                ),
            });
        }
        alpha.insert(old_in[idx], new_in[hits[0]]);
    }
    let image: BTreeSet<usize> = alpha.values().copied().collect();
    if image.len() != alpha.len() {
        return Err(MoveError::AmbiguousRelabel {
            reason: format!("two crossings in the window of {d} share one cycle tail"),
        });
    }
    Ok(alpha)
}

/// Companion-sequence permutations at the given wall slice.
fn wall_tails(
    record: &SubexpressionRecord,
    crossings: &[usize],
    wall: usize,
) -> Result<Vec<Permutation>, MoveError> {
    crossings
        .iter()
        .map(|&c| Ok(compute_aps_from_record(record, c)?.v_at(wall).clone()))
        .collect()
}

/// Carries a quiver along a bijection of its labels; labels missing from
/// `alpha` stay put.
pub fn relabel_quiver(
    q: &IceQuiver,
    alpha: &BTreeMap<usize, usize>,
) -> Result<IceQuiver, QuiverError> {
    let relabeled: Vec<usize> = q
        .labels()
        .iter()
        .map(|l| alpha.get(l).copied().unwrap_or(*l))
        .collect();
    let mut order: Vec<usize> = (0..relabeled.len()).collect();
    order.sort_by_key(|&i| relabeled[i]);
    let labels: Vec<usize> = order.iter().map(|&i| relabeled[i]).collect();
    let mutable: Vec<bool> = order.iter().map(|&i| q.mutable_flags()[i]).collect();
    let b: Vec<Vec<i64>> = order
        .iter()
        .map(|&i| order.iter().map(|&j| q.matrix()[i][j]).collect())
        .collect();
    IceQuiver::new(labels, mutable, b)
}

/// Replays a sequence of move effects on a quiver.
pub fn replay_effects(q: &IceQuiver, effects: &[MoveEffect]) -> Result<IceQuiver, MoveError> {
    let mut cur = q.clone();
    for effect in effects {
        cur = match effect {
            MoveEffect::Mutation { d, alpha } => relabel_quiver(&cur.mutate(*d)?, alpha)?,
            MoveEffect::Relabel { alpha } => relabel_quiver(&cur, alpha)?,
            MoveEffect::Unchanged | MoveEffect::MutablePart => cur,
        };
    }
    Ok(cur)
}

/// A verified move: the quiver recomputed from scratch on the rewritten
/// word matches the predicted effect.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub instance: MoveInstance,
    pub effect: MoveEffect,
    pub word_before: Vec<i32>,
    pub word_after: Vec<i32>,
    /// Human-readable summary of what was compared.
    pub detail: String,
}

/// Applies the move and checks the predicted effect against a from-scratch
/// quiver computation on the rewritten word.
pub fn verify_invariance(
    record: &SubexpressionRecord,
    mv: &MoveInstance,
) -> Result<InvarianceReport, MoveError> {
    let out = apply(record, mv)?;
    let q_old = quiver_from_cycles(&all_cycles(record)?);
    let q_new = quiver_from_cycles(&all_cycles(&out.record)?);
    let detail = match &out.effect {
        MoveEffect::Mutation { d, alpha } => {
            let expected = relabel_quiver(&q_old.mutate(*d)?, alpha)?;
            if q_new != expected {
                return Err(MoveError::VerificationFailure {
                    expected: Box::new(expected),
                    actual: Box::new(q_new),
                });
            }
            format!("quiver agrees with mutation at crossing {d} followed by {alpha:?}")
        }
        MoveEffect::Relabel { alpha } => {
            let expected = relabel_quiver(&q_old, alpha)?;
            if q_new != expected {
                return Err(MoveError::VerificationFailure {
                    expected: Box::new(expected),
                    actual: Box::new(q_new),
                });
            }
            "quiver agrees after relabeling the solid crossings".to_string()
        }
        MoveEffect::Unchanged => {
            if q_new != q_old {
                return Err(MoveError::VerificationFailure {
                    expected: Box::new(q_old),
                    actual: Box::new(q_new),
                });
            }
            let t_old = order_table(record)?;
            let t_new = order_table(&out.record)?;
            assert_eq!(t_old.solid_indices(), t_new.solid_indices());
            assert_eq!(t_old.mutable_flags(), t_new.mutable_flags());
            let n = record.n() as i32;
            let mut cells = 0usize;
            for &dd in t_old.solid_indices() {
                for c in 0..=record.m() {
                    for h in (1 - n)..n {
                        assert_eq!(
                            t_old.ord(dd, c, h),
                            t_new.ord(dd, c, h),
                            "vanishing order moved at (d = {dd}, c = {c}, h = {h})"
                        );
                        cells += 1;
                    }
                }
            }
            format!("quiver, solid set, and {cells} vanishing orders are unchanged")
        }
        MoveEffect::MutablePart => {
            let (m_old, m_new) = (q_old.mutable_part(), q_new.mutable_part());
            if m_new != m_old {
                return Err(MoveError::VerificationFailure {
                    expected: Box::new(m_old),
                    actual: Box::new(m_new),
                });
            }
            assert_eq!(q_old.labels(), q_new.labels());
            assert_eq!(q_old.mutable_flags(), q_new.mutable_flags());
            "mutable subquiver matches; frozen rows may differ".to_string()
        }
    };
    Ok(InvarianceReport {
        instance: out.instance,
        effect: out.effect,
        word_before: record.word().letters().to_vec(),
        word_after: out.record.word().letters().to_vec(),
        detail,
    })
}

/// How the chart symbols of the rewritten word are expressed in the chart
/// symbols of the original word.
///
/// `images[c−1]` is the polynomial (in the old symbols) substituted for the
/// symbol of new crossing `c`; hollow slots carry the zero polynomial. The
/// map is `exact` when the nonzero images line up with the new solid set —
/// then substituting it into the new slice matrices reproduces the old ones
/// on every slice outside the window (checked by [`verify_transport`]). A
/// head flip keeps all symbols but re-gauges slice `0`; `gauge_ratio =
/// Some((i, j))` records that matching the two charts rescales the leading
/// symbol by the ratio of gauge entries `i` and `j`.
#[derive(Clone, Debug, Serialize)]
pub struct TransportMap {
    /// The rewritten window `(l, r]`.
    pub window: (usize, usize),
    pub images: Vec<LaurentPolynomial>,
    pub gauge_ratio: Option<(usize, usize)>,
    pub exact: bool,
}

/// Expresses the rewritten word's chart symbols in the original ones.
pub fn transport_parameters(
    record: &SubexpressionRecord,
    mv: &MoveInstance,
) -> Result<TransportMap, MoveError> {
    let out = apply(record, mv)?;
    let m = record.m();
    let d = mv.d;
    let old_sym = |c: usize| -> LaurentPolynomial {
        if record.is_solid(c) {
            LaurentPolynomial::variable(m, c - 1)
        } else {
            LaurentPolynomial::zero(m)
        }
    };
    let mut images: Vec<LaurentPolynomial> = (1..=m).map(old_sym).collect();
    match mv.kind {
        MoveKind::OppositeSwap | MoveKind::DistantSwap => {
            // Symbols travel with their letters.
            images[d - 2] = old_sym(d);
            images[d - 1] = old_sym(d - 1);
        }
        MoveKind::BraidTriple => {
            images[d - 3] = old_sym(d);
            images[d - 2] = old_sym(d - 2).mul(&old_sym(d)).sub(&old_sym(d - 1));
            images[d - 1] = old_sym(d - 2);
        }
        MoveKind::TailFlip | MoveKind::HeadFlip => {}
    }
    let gauge_ratio = if mv.kind == MoveKind::HeadFlip {
        let level = record.word().letter(1).unsigned_abs() as usize;
        let star = record.n() - level;
        Some((star + 1, star))
    } else {
        None
    };
    let exact = (1..=m).all(|c| out.record.is_solid(c) == !images[c - 1].is_zero());
    Ok(TransportMap {
        window: mv.window(),
        images,
        gauge_ratio,
        exact,
    })
}

/// Builds the charts on both sides of a move and, when the transport map is
/// exact, checks that substituting it into the rewritten chart reproduces
/// the original slice matrices on the walls and outside the window. Slice
/// `0` is skipped when the move re-gauges it.
pub fn verify_transport(
    record: &SubexpressionRecord,
    mv: &MoveInstance,
) -> Result<String, MoveError> {
    let tm = transport_parameters(record, mv)?;
    if !tm.exact {
        return Ok("no polynomial transport: the solid pattern is not reproduced".into());
    }
    let out = apply(record, mv)?;
    let old_chart = build_chart(record);
    let new_chart = build_chart(&out.record);
    let (l, r) = tm.window;
    let n = record.n();
    let mut slices = 0usize;
    for c in (0..=record.m()).filter(|&c| c <= l || c >= r) {
        if tm.gauge_ratio.is_some() && c == 0 {
            continue;
        }
        let zo = old_chart.z_at(c);
        let zn = new_chart.z_at(c);
        for row in 0..n {
            for col in 0..n {
                let (num, den) = zn.entry(row, col).substitute(&tm.images);
                if !den.is_one() || num != *zo.entry(row, col) {
                    return Err(MoveError::TransportMismatch {
                        slice: c,
                        row,
                        col,
                    });
                }
            }
        }
        slices += 1;
    }
    Ok(format!(
        "substituted chart matches on all {slices} slices outside the window"
    ))
}

/// The relative order of the three wires crossing a braid-rewrite window,
/// read at its right wall, as a pattern in the symmetric group on three
/// letters (1-based ranks). The identity pattern `[1, 2, 3]` occurs exactly
/// when the window is fully solid.
pub fn braid_triple_pattern(
    record: &SubexpressionRecord,
    d: usize,
) -> Result<[usize; 3], MoveError> {
    instance_at(record, MoveKind::BraidTriple, d)?;
    let x = record.word().letter(d);
    let y = record.word().letter(d - 1);
    let j = x.unsigned_abs().min(y.unsigned_abs()) as usize;
    let wall = record.u_at(d);
    let vals = if x > 0 {
        [wall.apply(j), wall.apply(j + 1), wall.apply(j + 2)]
    } else {
        let inv = wall.inverse();
        [inv.apply(j), inv.apply(j + 1), inv.apply(j + 2)]
    };
    let mut rank = [0usize; 3];
    for (i, v) in vals.iter().enumerate() {
        rank[i] = 1 + vals.iter().filter(|w| *w < v).count();
    }
    Ok(rank)
}

/// The outcome of rotating the first letter to the end of the word.
#[derive(Clone, Debug, Serialize)]
pub struct ConjugationOutcome {
    pub record: SubexpressionRecord,
    pub moves: Vec<MoveInstance>,
    pub effects: Vec<MoveEffect>,
}

/// Rotates the first letter of a word on the longest element to the end,
/// flipped across it: `(a, β) → (β, sign(a)·(n−|a|))`. Requires every
/// letter after the first to be red. The accumulated effects, replayed on
/// the original quiver, reproduce the rotated quiver's mutable part.
pub fn conjugation_move(record: &SubexpressionRecord) -> Result<ConjugationOutcome, MoveError> {
    let n = record.n();
    let m = record.m();
    if *record.u() != Permutation::longest(n) {
        return Err(MoveError::RotationUnavailable {
            reason: "the base permutation must be the longest element".into(),
        });
    }
    if m == 0 {
        return Err(MoveError::Inapplicable {
            reason: "the word is empty".into(),
        });
    }
    if record.word().letters()[1..].iter().any(|&l| l < 0) {
        return Err(MoveError::Inapplicable {
            reason: "every letter after the first must be red".into(),
        });
    }
    fn step(
        cur: &mut SubexpressionRecord,
        kind: MoveKind,
        d: usize,
        moves: &mut Vec<MoveInstance>,
        effects: &mut Vec<MoveEffect>,
    ) -> Result<(), MoveError> {
        let mv = instance_at(cur, kind, d)?;
        let out = apply(cur, &mv)?;
        moves.push(out.instance);
        effects.push(out.effect);
        *cur = out.record;
        Ok(())
    }
    let mut cur = record.clone();
    let mut moves = Vec::new();
    let mut effects = Vec::new();
    if cur.word().letter(1) > 0 {
        step(&mut cur, MoveKind::HeadFlip, 1, &mut moves, &mut effects)?;
    }
    for d in 2..=m {
        step(&mut cur, MoveKind::OppositeSwap, d, &mut moves, &mut effects)?;
    }
    step(&mut cur, MoveKind::TailFlip, m, &mut moves, &mut effects)?;
    Ok(ConjugationOutcome {
        record: cur,
        moves,
        effects,
    })
}

/// Tracks a word through a sequence of moves, keeping the map from current
/// solid labels back to the original ones and the list of quiver mutations
/// (in original labels, chronological order).
struct Rewriter {
    record: SubexpressionRecord,
    to_orig: BTreeMap<usize, usize>,
    mutations: Vec<usize>,
}

impl Rewriter {
    fn new(record: SubexpressionRecord) -> Self {
        let to_orig = record.solid_indices().into_iter().map(|c| (c, c)).collect();
        Rewriter {
            record,
            to_orig,
            mutations: Vec::new(),
        }
    }

    fn m(&self) -> usize {
        self.record.m()
    }

    fn letters(&self) -> &[i32] {
        self.record.word().letters()
    }

    fn apply_move(&mut self, kind: MoveKind, d: usize) -> Result<(), MoveError> {
        let mv = instance_at(&self.record, kind, d)?;
        let out = apply(&self.record, &mv)?;
        match &out.effect {
            MoveEffect::Mutation { d, alpha } => {
                let orig = *self
                    .to_orig
                    .get(d)
                    .expect("mutation happens at a tracked solid crossing");
                self.mutations.push(orig);
                let mut next = BTreeMap::new();
                for (&cur, &orig) in &self.to_orig {
                    let moved = alpha.get(&cur).copied().unwrap_or(cur);
                    next.insert(moved, orig);
                }
                assert_eq!(
                    next.len(),
                    self.to_orig.len(),
                    "mutation relabeling collided tracked crossings"
                );
                self.to_orig = next;
            }
            MoveEffect::Relabel { alpha } => {
                let mut next = BTreeMap::new();
                for (&cur, &orig) in &self.to_orig {
                    let moved = alpha.get(&cur).copied().unwrap_or(cur);
                    next.insert(moved, orig);
                }
                assert_eq!(
                    next.len(),
                    self.to_orig.len(),
                    "label bijection collapsed two crossings"
                );
                self.to_orig = next;
            }
            MoveEffect::Unchanged | MoveEffect::MutablePart => {}
        }
        self.record = out.record;
        Ok(())
    }

    /// Drops the first `k` letters, shifting crossings down by `k`. The
    /// caller guarantees the shorter pair stays admissible.
    fn drop_front(&mut self, k: usize) -> Result<(), MoveError> {
        let n = self.record.n();
        let letters = self.letters()[k..].to_vec();
        let word = DoubleBraidWord::new(n, letters)?;
        let u = self.record.u().clone();
        self.record = compute_pds(&u, &word)?;
        let mut next = BTreeMap::new();
        for (&cur, &orig) in &self.to_orig {
            if cur > k {
                next.insert(cur - k, orig);
            }
        }
        self.to_orig = next;
        Ok(())
    }
}

/// One full rotation on an all-red word over the longest element: the first
/// letter leaves the front, crosses the word as a blue letter, and lands at
/// the end flipped.
fn rotate_front(rw: &mut Rewriter) -> Result<(), MoveError> {
    let m = rw.m();
    rw.apply_move(MoveKind::HeadFlip, 1)?;
    for d in 2..=m {
        rw.apply_move(MoveKind::OppositeSwap, d)?;
    }
    rw.apply_move(MoveKind::TailFlip, m)
}

/// Steers the reduced all-red window `lo..=hi` (a reduced word for some `v`
/// with right descent `a`) so that its last letter becomes `a`, using only
/// distant swaps and braid rewrites inside the window.
fn force_last(rw: &mut Rewriter, lo: usize, hi: usize, a: usize) -> Result<(), MoveError> {
    let b = rw.letters()[hi - 1].unsigned_abs() as usize;
    if b == a {
        return Ok(());
    }
    if hi <= lo {
        return Err(MoveError::ReductionFailure {
            reason: format!("cannot steer the single crossing {hi} toward level {a}"),
        });
    }
    if a.abs_diff(b) > 1 {
        force_last(rw, lo, hi - 1, a)?;
        rw.apply_move(MoveKind::DistantSwap, hi)
    } else {
        if hi - lo + 1 < 3 {
            return Err(MoveError::ReductionFailure {
                reason: format!("window ({lo}, {hi}] too short to braid toward level {a}"),
            });
        }
        force_last(rw, lo, hi - 1, a)?;
        force_last(rw, lo, hi - 2, b)?;
        rw.apply_move(MoveKind::BraidTriple, hi)
    }
}

/// Leftmost position carrying the same letter as its right neighbor.
fn find_adjacent_double(letters: &[i32]) -> Option<usize> {
    (0..letters.len().saturating_sub(1))
        .find(|&p| letters[p] == letters[p + 1])
        .map(|p| p + 1)
}

/// Length of the shortest non-reduced prefix of an all-red word, if any.
fn minimal_nonreduced_prefix(letters: &[i32], n: usize) -> Option<usize> {
    let mut v = Permutation::identity(n);
    for (idx, &l) in letters.iter().enumerate() {
        let a = l.unsigned_abs() as usize;
        if v.apply(a) > v.apply(a + 1) {
            return Some(idx + 1);
        }
        v = v.mult_right_s(a);
    }
    None
}

/// Relabels every mutation and sink in a certificate.
fn remap_certificate(cert: &SinkCertificate, f: &dyn Fn(usize) -> usize) -> SinkCertificate {
    match cert {
        SinkCertificate::Isolated => SinkCertificate::Isolated,
        SinkCertificate::Sink {
            mutations,
            sink,
            without_sink,
            without_inflow,
        } => SinkCertificate::Sink {
            mutations: mutations.iter().map(|&v| f(v)).collect(),
            sink: f(*sink),
            without_sink: Box::new(remap_certificate(without_sink, f)),
            without_inflow: Box::new(remap_certificate(without_inflow, f)),
        },
    }
}

/// Produces a sink-recurrence certificate for the mutable quiver of a pair
/// by steering the word with moves instead of searching the mutation class.
///
/// The strategy: extend the base permutation to the longest element with
/// hollow crossings, turn every letter red, then repeatedly rotate a
/// doubled letter to the front and flip its first copy blue. The doubled
/// front `(−a, a, …)` always solidifies its first crossing; either the
/// second crossing is hollow — then the leading letter drops without
/// changing the mutable quiver — or it is a mutable sink, splitting the
/// problem into two strictly shorter words. Every relabeling and mutation
/// along the way is tracked back to the original crossing labels, so the
/// returned certificate replays against the original quiver via
/// [`crate::quiver::check_certificate`].
pub fn certify_sink_recurrence(
    record: &SubexpressionRecord,
) -> Result<SinkCertificate, MoveError> {
    let entry = quiver_from_cycles(&all_cycles(record)?);
    if !entry.has_mutable_arrows() {
        return Ok(SinkCertificate::Isolated);
    }
    let (w0, extended) = extend_to_longest(record.u(), record.word())?;
    let ext = compute_pds(&w0, &extended)?;
    #[cfg(debug_assertions)]
    {
        let q_ext = quiver_from_cycles(&all_cycles(&ext)?);
        assert_eq!(
            q_ext, entry,
            "extending the base permutation changed the quiver"
        );
    }
    let mut rw = Rewriter::new(ext);
    // Turn every letter red: walk each blue letter to the front and flip it.
    loop {
        let Some(p) = rw.letters().iter().position(|&l| l < 0) else {
            break;
        };
        let p = p + 1;
        for d in (2..=p).rev() {
            rw.apply_move(MoveKind::OppositeSwap, d)?;
        }
        rw.apply_move(MoveKind::HeadFlip, 1)?;
    }
    let mut guard = rw.m() + 8;
    loop {
        guard = guard.checked_sub(1).ok_or_else(|| MoveError::ReductionFailure {
            reason: "steering loop exceeded its budget".into(),
        })?;
        let p = match find_adjacent_double(rw.letters()) {
            Some(p) => p,
            None => {
                let Some(k) = minimal_nonreduced_prefix(rw.letters(), rw.record.n()) else {
                    return Err(MoveError::ReductionFailure {
                        reason: "word is reduced but its quiver still has arrows".into(),
                    });
                };
                let a = rw.letters()[k - 1].unsigned_abs() as usize;
                force_last(&mut rw, 1, k - 1, a)?;
                k - 1
            }
        };
        for _ in 0..p - 1 {
            rotate_front(&mut rw)?;
        }
        rw.apply_move(MoveKind::HeadFlip, 1)?;
        if !rw.record.is_solid(1) {
            return Err(MoveError::ReductionFailure {
                reason: "leading crossing failed to solidify after the flip".into(),
            });
        }
        if !rw.record.is_solid(2) {
            // The doubled letter collapses: dropping the front letter keeps
            // the mutable quiver, with labels shifted down by one.
            #[cfg(debug_assertions)]
            let q_before = quiver_from_cycles(&all_cycles(&rw.record)?).mutable_part();
            rw.drop_front(1)?;
            #[cfg(debug_assertions)]
            {
                let q_after = quiver_from_cycles(&all_cycles(&rw.record)?).mutable_part();
                let shift: BTreeMap<usize, usize> =
                    q_before.labels().iter().map(|&l| (l, l - 1)).collect();
                assert_eq!(
                    relabel_quiver(&q_before, &shift)?,
                    q_after,
                    "dropping the collapsed front letter changed the mutable quiver"
                );
            }
            continue;
        }
        // Both leading crossings solid: the second is a mutable sink.
        let sink = *rw.to_orig.get(&2).expect("crossing 2 is solid, hence tracked");
        let u = rw.record.u().clone();
        let n = rw.record.n();
        let letters = rw.letters().to_vec();
        let rec1 = compute_pds(&u, &DoubleBraidWord::new(n, letters[1..].to_vec())?)?;
        let rec2 = compute_pds(&u, &DoubleBraidWord::new(n, letters[2..].to_vec())?)?;
        #[cfg(debug_assertions)]
        {
            let q_cur = quiver_from_cycles(&all_cycles(&rw.record)?).mutable_part();
            assert!(
                q_cur.is_mutable_sink(2),
                "second crossing is not a sink after steering"
            );
            let q1 = quiver_from_cycles(&all_cycles(&rec1)?).mutable_part();
            let rest1 = q_cur.without(&[2]);
            let shift1: BTreeMap<usize, usize> =
                rest1.labels().iter().map(|&l| (l, l - 1)).collect();
            assert_eq!(
                relabel_quiver(&rest1, &shift1)?,
                q1,
                "dropping the front letter did not remove exactly the sink"
            );
            let q2 = quiver_from_cycles(&all_cycles(&rec2)?).mutable_part();
            let mut dropped = q_cur.in_neighbors(2);
            dropped.push(2);
            let rest2 = q_cur.without(&dropped);
            let shift2: BTreeMap<usize, usize> =
                rest2.labels().iter().map(|&l| (l, l - 2)).collect();
            assert_eq!(
                relabel_quiver(&rest2, &shift2)?,
                q2,
                "dropping the doubled front did not remove the sink and its inflow"
            );
        }
        let cert1 = certify_sink_recurrence(&rec1)?;
        let cert2 = certify_sink_recurrence(&rec2)?;
        let child1 = remap_certificate(&cert1, &|c| rw.to_orig[&(c + 1)]);
        let child2 = remap_certificate(&cert2, &|c| rw.to_orig[&(c + 2)]);
        return Ok(SinkCertificate::Sink {
            mutations: rw.mutations.clone(),
            sink,
            without_sink: Box::new(child1),
            without_inflow: Box::new(child2),
        });
    }
}

//! Relative cycles of a pair.
//!
//! Every solid crossing `d` spawns a family of *monotone multicurves*, one
//! per slice `c ≤ d − 1`: the bridge of `d` seeds a single curve between
//! its two dots, and the family propagates leftward. Hollow crossings move
//! dots (carrying curve data along by dot identity); solid crossings may
//! *cut* the unique curve that spans their bridge into two pieces attached
//! to the bridge dots. While the curves evolve, a cyclic *circle* of walk
//! items records the boundary of the swept surface: bridge traversals and
//! wire traces stitched together by cut surgery. When the last curve dies
//! the circle closes into a cycle of graph edges (the crossing is
//! *mutable*); otherwise the leftover curves reach the marked points and
//! the circle falls apart into disjoint arcs (*frozen*).
//!
//! The module also provides the sigma swap of a curve on a permutation's
//! dot diagram (whose iterate along a propagation reproduces the bumped
//! subexpression sequences), disk membership of projection faces, and the
//! intersection pairing of cycles on the ribbon surface.

use crate::braid::SubexpressionRecord;
use crate::graph3d::{build_graph, PlabicGraph};
use crate::perm::Permutation;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CycleError {
    #[error("crossing {crossing} is not solid")]
    NotSolid { crossing: usize },
    #[error("curve invariant broken at crossing {crossing}: {reason}")]
    BadSurgery { crossing: usize, reason: String },
}

/// A monotone curve between two dots `a ≺ b`, recorded by the set of dots
/// strictly inside the open box that lie below it.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Curve {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub below: BTreeSet<(usize, usize)>,
}

impl Curve {
    pub fn new(a: (usize, usize), b: (usize, usize), below: BTreeSet<(usize, usize)>) -> Self {
        assert!(a.0 < b.0 && a.1 < b.1, "endpoints must be ≺-comparable");
        for &q in &below {
            assert!(
                a.0 < q.0 && q.0 < b.0 && a.1 < q.1 && q.1 < b.1,
                "below-dots must lie strictly inside the box"
            );
        }
        Curve { a, b, below }
    }

    fn inside(&self, q: (usize, usize)) -> bool {
        self.a.0 < q.0 && q.0 < self.b.0 && self.a.1 < q.1 && q.1 < self.b.1
    }

    /// The curve has a point at height `y_p` with `x ≥ x_p`.
    pub fn passes_weakly_right(&self, p: (usize, usize)) -> bool {
        if p == self.a || p == self.b {
            return true;
        }
        if p.1 <= self.a.1 || p.1 >= self.b.1 {
            // Distinct dots occupy distinct rows, so a non-endpoint at the
            // boundary height cannot occur; outside heights fail.
            return false;
        }
        if self.inside(p) {
            return !self.below.contains(&p);
        }
        p.0 <= self.a.0
    }

    /// The curve has a point at height `y_p` with `x ≤ x_p`.
    pub fn passes_weakly_left(&self, p: (usize, usize)) -> bool {
        if p == self.a || p == self.b {
            return true;
        }
        if p.1 <= self.a.1 || p.1 >= self.b.1 {
            return false;
        }
        if self.inside(p) {
            return self.below.contains(&p);
        }
        p.0 >= self.b.0
    }

    /// The curve has a point at column `x_p` with `y ≥ y_p`.
    pub fn passes_weakly_above(&self, p: (usize, usize)) -> bool {
        if p == self.a || p == self.b {
            return true;
        }
        if p.0 <= self.a.0 || p.0 >= self.b.0 {
            return false;
        }
        if self.inside(p) {
            return self.below.contains(&p);
        }
        p.1 <= self.a.1
    }

    /// The curve has a point at column `x_p` with `y ≤ y_p`.
    pub fn passes_weakly_below(&self, p: (usize, usize)) -> bool {
        if p == self.a || p == self.b {
            return true;
        }
        if p.0 <= self.a.0 || p.0 >= self.b.0 {
            return false;
        }
        if self.inside(p) {
            return !self.below.contains(&p);
        }
        p.1 >= self.b.1
    }
}

/// A multicurve: the curves of one cycle family on one slice.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Multicurve {
    pub curves: Vec<Curve>,
}

/// The sigma swap of a single curve on the dot diagram of `w`: the lower
/// staircase of below-dots and the upper staircase of above-dots, together
/// with the endpoints, are replaced by their "shifted" counterparts,
/// producing a new permutation diagram.
pub fn sigma_swap_curve(curve: &Curve, w: &Permutation) -> Permutation {
    let n = w.n();
    let dots: BTreeSet<(usize, usize)> = (1..=n).map(|p| (p, w.apply(p))).collect();
    assert!(dots.contains(&curve.a) && dots.contains(&curve.b), "endpoints must be dots");
    let inside: Vec<(usize, usize)> = dots
        .iter()
        .copied()
        .filter(|&q| curve.inside(q))
        .collect();
    for q in &curve.below {
        assert!(dots.contains(q), "below-set must consist of dots");
    }
    let below: Vec<(usize, usize)> = inside
        .iter()
        .copied()
        .filter(|q| curve.below.contains(q))
        .collect();
    let above: Vec<(usize, usize)> = inside
        .iter()
        .copied()
        .filter(|q| !curve.below.contains(q))
        .collect();
    // Lower chain: below-dots with no other below-dot weakly up-left.
    let mut lower: Vec<(usize, usize)> = below
        .iter()
        .copied()
        .filter(|&p| {
            !below
                .iter()
                .any(|&q| q != p && q.0 <= p.0 && q.1 >= p.1)
        })
        .collect();
    lower.sort_unstable();
    // Upper chain: above-dots with no other above-dot weakly down-right.
    let mut upper: Vec<(usize, usize)> = above
        .iter()
        .copied()
        .filter(|&p| {
            !above
                .iter()
                .any(|&q| q != p && q.0 >= p.0 && q.1 <= p.1)
        })
        .collect();
    upper.sort_unstable();

    let mut removed: BTreeSet<(usize, usize)> = BTreeSet::new();
    removed.insert(curve.a);
    removed.insert(curve.b);
    removed.extend(lower.iter().copied());
    removed.extend(upper.iter().copied());
    let mut added: BTreeSet<(usize, usize)> = BTreeSet::new();
    // Lower side: consecutive pairs of A, P₁, …, P_k, B contribute
    // (x of next, y of previous).
    let mut lo = vec![curve.a];
    lo.extend(lower.iter().copied());
    lo.push(curve.b);
    for pair in lo.windows(2) {
        added.insert((pair[1].0, pair[0].1));
    }
    // Upper side: (x of previous, y of next).
    let mut up = vec![curve.a];
    up.extend(upper.iter().copied());
    up.push(curve.b);
    for pair in up.windows(2) {
        added.insert((pair[0].0, pair[1].1));
    }
    let mut new_dots: BTreeSet<(usize, usize)> = dots.difference(&removed).copied().collect();
    new_dots.extend(added);
    let mut images = vec![0usize; n];
    for (x, y) in new_dots {
        assert!(images[x - 1] == 0, "sigma swap must keep one dot per column");
        images[x - 1] = y;
    }
    Permutation::from_one_line(images).expect("sigma swap yields a permutation")
}

/// The sigma swap of a multicurve: curves applied innermost-last in
/// canonical order.
pub fn sigma_swap(curves: &Multicurve, w: &Permutation) -> Permutation {
    let mut sorted = curves.curves.clone();
    sorted.sort();
    let mut acc = w.clone();
    for curve in sorted.iter().rev() {
        acc = sigma_swap_curve(curve, &acc);
    }
    acc
}

/// One step of a cycle walk on the wire graph.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Step {
    pub edge: usize,
    /// Traversal from `v1` to `v2` (left to right on wires, `≺`-upward on
    /// bridges).
    pub forward: bool,
}

/// The realized boundary of one cycle family.
#[derive(Clone, Debug)]
pub struct RelativeCycle {
    /// The owning solid crossing.
    pub d: usize,
    pub mutable: bool,
    /// One closed walk when mutable; one or more endpoint-to-endpoint arcs
    /// when frozen (arcs start and end at marked points).
    pub walks: Vec<Vec<Step>>,
    /// Multicurve snapshots by slice, `0..=d−1`.
    pub multicurves: Vec<Multicurve>,
    /// Net signed traversals of each bridge (upward minus downward).
    pub bridge_signed: BTreeMap<usize, i64>,
}

impl RelativeCycle {
    /// Face membership of the red projection face between columns `h` and
    /// `h+1` at slice `c` (for `h ≥ 1`), or of the blue projection face
    /// between rows `|h|` and `|h|+1` (for `h ≤ −1`).
    pub fn disk_contains(&self, c: usize, h: i32) -> bool {
        if c >= self.multicurves.len() {
            return false;
        }
        let curves = &self.multicurves[c].curves;
        if h > 0 {
            let h = h as usize;
            curves.iter().any(|g| g.a.0 <= h && h < g.b.0)
        } else {
            let h = (-h) as usize;
            curves.iter().any(|g| g.a.1 <= h && h < g.b.1)
        }
    }
}

/// All the cycles of a pair, together with the wire graph they walk on.
#[derive(Clone, Debug)]
pub struct CycleSystem {
    pub graph: PlabicGraph,
    pub labels: Vec<usize>,
    pub cycles: Vec<RelativeCycle>,
}

impl CycleSystem {
    pub fn cycle(&self, d: usize) -> Option<&RelativeCycle> {
        self.labels
            .iter()
            .position(|&l| l == d)
            .map(|i| &self.cycles[i])
    }
}

// ---------------------------------------------------------------------
// Propagation machinery.
// ---------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum End {
    A,
    B,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Anchor {
    /// A bridge endpoint; `start` selects the `≺`-smaller side.
    Bridge { crossing: usize, start: bool },
    Marked { wire: usize },
}

#[derive(Clone, Debug)]
struct TraceState {
    wire: usize,
    created: Anchor,
    died: Option<Anchor>,
    /// The curve endpoint this trace follows while alive.
    following: Option<(usize, End)>,
    /// Traversed left-to-right in the walk (A-type) or right-to-left.
    a_type: bool,
}

#[derive(Clone, Copy, Debug)]
enum Item {
    Bridge { crossing: usize, upward: bool },
    Trace(usize),
    Placeholder { curve: usize },
}

struct Propagation<'a> {
    record: &'a SubexpressionRecord,
    graph: &'a PlabicGraph,
    curves: BTreeMap<usize, Curve>,
    next_id: usize,
    circle: Vec<Item>,
    traces: Vec<TraceState>,
}

impl<'a> Propagation<'a> {
    fn wire_of(&self, slice: usize, dot: (usize, usize)) -> usize {
        self.graph
            .wires
            .iter()
            .position(|w| w.slices[slice] == dot)
            .expect("every dot lies on a wire")
    }

    fn trace_following(&mut self, key: (usize, End)) -> usize {
        self.traces
            .iter()
            .position(|t| t.following == Some(key))
            .expect("every live curve endpoint has a trace")
    }

    fn start(record: &'a SubexpressionRecord, graph: &'a PlabicGraph, d: usize) -> Self {
        let letter = record.word().letter(d);
        let i = letter.unsigned_abs() as usize;
        let u_d = record.u_at(d);
        let (a, b) = if letter > 0 {
            ((i, u_d.apply(i)), (i + 1, u_d.apply(i + 1)))
        } else {
            (
                (u_d.inverse().apply(i), i),
                (u_d.inverse().apply(i + 1), i + 1),
            )
        };
        let curve = Curve::new(a, b, BTreeSet::new());
        let mut prop = Propagation {
            record,
            graph,
            curves: BTreeMap::new(),
            next_id: 1,
            circle: Vec::new(),
            traces: Vec::new(),
        };
        prop.curves.insert(0, curve);
        let wire_a = prop.wire_of(d - 1, a);
        let wire_b = prop.wire_of(d - 1, b);
        prop.traces.push(TraceState {
            wire: wire_b,
            created: Anchor::Bridge { crossing: d, start: false },
            died: None,
            following: Some((0, End::B)),
            a_type: false,
        });
        prop.traces.push(TraceState {
            wire: wire_a,
            created: Anchor::Bridge { crossing: d, start: true },
            died: None,
            following: Some((0, End::A)),
            a_type: true,
        });
        prop.circle = vec![
            Item::Bridge { crossing: d, upward: true },
            Item::Trace(0),
            Item::Placeholder { curve: 0 },
            Item::Trace(1),
        ];
        prop
    }

    /// Crosses hollow crossing `r`, moving two dots and carrying every
    /// curve's data along by dot identity.
    fn hollow_step(&mut self, r: usize) {
        let letter = self.record.word().letter(r);
        let i = letter.unsigned_abs() as usize;
        let u_r = self.record.u_at(r);
        // The two moved dots: old position -> new position.
        let (from1, from2) = if letter > 0 {
            ((i, u_r.apply(i)), (i + 1, u_r.apply(i + 1)))
        } else {
            (
                (u_r.inverse().apply(i), i),
                (u_r.inverse().apply(i + 1), i + 1),
            )
        };
        let (to1, to2) = if letter > 0 {
            ((from2.0, from1.1), (from1.0, from2.1))
        } else {
            ((from1.0, from2.1), (from2.0, from1.1))
        };
        let shift = |q: (usize, usize)| {
            if q == from1 {
                to1
            } else if q == from2 {
                to2
            } else {
                q
            }
        };
        let unshift = |q: (usize, usize)| {
            if q == to1 {
                from1
            } else if q == to2 {
                from2
            } else {
                q
            }
        };
        // New dot configuration.
        let u_left = self.record.u_at(r - 1);
        let n = self.record.n();
        let new_dots: Vec<(usize, usize)> = (1..=n).map(|p| (p, u_left.apply(p))).collect();
        for curve in self.curves.values_mut() {
            let old = curve.clone();
            let a = shift(old.a);
            let b = shift(old.b);
            debug_assert!(a.0 < b.0 && a.1 < b.1, "hollow motion keeps endpoints ordered");
            let mut below = BTreeSet::new();
            for &q_new in &new_dots {
                if !(a.0 < q_new.0 && q_new.0 < b.0 && a.1 < q_new.1 && q_new.1 < b.1) {
                    continue;
                }
                let q_old = unshift(q_new);
                let is_below = if old.inside(q_old) {
                    old.below.contains(&q_old)
                } else {
                    // Entering dot: classify by the side it comes from.
                    let from_right = q_old.0 >= old.b.0;
                    let from_left = q_old.0 <= old.a.0;
                    let from_bottom = q_old.1 <= old.a.1;
                    let from_top = q_old.1 >= old.b.1;
                    let below_side = from_right || from_bottom;
                    let above_side = from_left || from_top;
                    assert!(
                        below_side != above_side,
                        "entering dot must come from one side: {q_old:?} into {a:?}..{b:?}"
                    );
                    below_side
                };
                if is_below {
                    below.insert(q_new);
                }
            }
            *curve = Curve { a, b, below };
        }
    }

    /// Crosses solid crossing `r`, cutting the curve that spans its bridge
    /// (if any) and splicing the boundary circle.
    fn solid_step(&mut self, r: usize) -> Result<(), CycleError> {
        let letter = self.record.word().letter(r);
        let i = letter.unsigned_abs() as usize;
        let u_r = self.record.u_at(r);
        let (d1, d2) = if letter > 0 {
            ((i, u_r.apply(i)), (i + 1, u_r.apply(i + 1)))
        } else {
            (
                (u_r.inverse().apply(i), i),
                (u_r.inverse().apply(i + 1), i + 1),
            )
        };
        let cut: Vec<usize> = self
            .curves
            .iter()
            .filter(|(_, g)| {
                if letter > 0 {
                    g.passes_weakly_right(d1) && g.passes_weakly_left(d2)
                } else {
                    g.passes_weakly_above(d1) && g.passes_weakly_below(d2)
                }
            })
            .map(|(&id, _)| id)
            .collect();
        if cut.len() > 1 {
            return Err(CycleError::BadSurgery {
                crossing: r,
                reason: format!("{} curves spanning one bridge", cut.len()),
            });
        }
        let Some(&g_id) = cut.first() else {
            return Ok(());
        };
        let g = self.curves.remove(&g_id).unwrap();
        if !(g.a.0 <= d1.0 && g.a.1 <= d1.1 && d2.0 <= g.b.0 && d2.1 <= g.b.1) {
            return Err(CycleError::BadSurgery {
                crossing: r,
                reason: format!("bridge dots {d1:?},{d2:?} escape the box {:?}..{:?}", g.a, g.b),
            });
        }
        let deg1 = g.a == d1;
        let deg2 = g.b == d2;
        let mut replacement: Vec<Item> = Vec::new();
        // Upper piece (d2 .. B), traversed B → d2 right after the old
        // B-side trace.
        if deg2 {
            let t = self.trace_following((g_id, End::B));
            self.traces[t].died = Some(Anchor::Bridge { crossing: r, start: false });
            self.traces[t].following = None;
        } else {
            let id2 = self.next_id;
            self.next_id += 1;
            let below2: BTreeSet<(usize, usize)> = g
                .below
                .iter()
                .copied()
                .filter(|&q| d2.0 < q.0 && q.0 < g.b.0 && d2.1 < q.1 && q.1 < g.b.1)
                .collect();
            self.curves.insert(id2, Curve::new(d2, g.b, below2));
            let t = self.trace_following((g_id, End::B));
            self.traces[t].following = Some((id2, End::B));
            replacement.push(Item::Placeholder { curve: id2 });
            let new_t = self.traces.len();
            self.traces.push(TraceState {
                wire: self.wire_of(r, d2),
                created: Anchor::Bridge { crossing: r, start: false },
                died: None,
                following: Some((id2, End::A)),
                a_type: true,
            });
            replacement.push(Item::Trace(new_t));
        }
        replacement.push(Item::Bridge { crossing: r, upward: false });
        // Lower piece (A .. d1), traversed d1 → A just before the old
        // A-side trace.
        if deg1 {
            let t = self.trace_following((g_id, End::A));
            self.traces[t].died = Some(Anchor::Bridge { crossing: r, start: true });
            self.traces[t].following = None;
        } else {
            let id1 = self.next_id;
            self.next_id += 1;
            let below1: BTreeSet<(usize, usize)> = g
                .below
                .iter()
                .copied()
                .filter(|&q| g.a.0 < q.0 && q.0 < d1.0 && g.a.1 < q.1 && q.1 < d1.1)
                .collect();
            self.curves.insert(id1, Curve::new(g.a, d1, below1));
            let t = self.trace_following((g_id, End::A));
            self.traces[t].following = Some((id1, End::A));
            let new_t = self.traces.len();
            self.traces.push(TraceState {
                wire: self.wire_of(r, d1),
                created: Anchor::Bridge { crossing: r, start: true },
                died: None,
                following: Some((id1, End::B)),
                a_type: false,
            });
            replacement.push(Item::Trace(new_t));
            replacement.push(Item::Placeholder { curve: id1 });
        }
        let pos = self
            .circle
            .iter()
            .position(|it| matches!(it, Item::Placeholder { curve } if *curve == g_id))
            .expect("cut curve has a placeholder");
        self.circle.splice(pos..=pos, replacement);
        Ok(())
    }

    fn snapshot(&self) -> Multicurve {
        let mut curves: Vec<Curve> = self.curves.values().cloned().collect();
        curves.sort();
        Multicurve { curves }
    }

    /// Ends the propagation at slice 0: kills surviving traces at their
    /// marked points and splits the circle into walks.
    fn finish(mut self) -> Result<(bool, Vec<Vec<Step>>), CycleError> {
        let mutable = self.curves.is_empty();
        let survivors: Vec<usize> = self.curves.keys().copied().collect();
        for id in survivors {
            for end in [End::A, End::B] {
                let t = self.trace_following((id, end));
                let wire = self.traces[t].wire;
                self.traces[t].died = Some(Anchor::Marked { wire });
                self.traces[t].following = None;
            }
        }
        // Split the cyclic item list at placeholders.
        let mut segments: Vec<Vec<Item>> = Vec::new();
        if self.curves.is_empty() {
            segments.push(self.circle.clone());
        } else {
            // Rotate so the list starts right after a placeholder.
            let first = self
                .circle
                .iter()
                .position(|it| matches!(it, Item::Placeholder { .. }))
                .expect("frozen cycles retain placeholders");
            let rotated: Vec<Item> = self.circle[first + 1..]
                .iter()
                .chain(self.circle[..=first].iter())
                .copied()
                .collect();
            let mut current = Vec::new();
            for it in rotated {
                if matches!(it, Item::Placeholder { .. }) {
                    segments.push(std::mem::take(&mut current));
                } else {
                    current.push(it);
                }
            }
            assert!(current.is_empty(), "circle ends at a placeholder after rotation");
        }

        let anchor_vertex = |anchor: Anchor| -> usize {
            match anchor {
                Anchor::Bridge { crossing, start } => {
                    let b = &self.graph.bridges[&crossing];
                    if start {
                        b.s1
                    } else {
                        b.s2
                    }
                }
                Anchor::Marked { wire } => self.graph.wires[wire].vertex_ids[0],
            }
        };
        let mut walks = Vec::new();
        for segment in segments {
            let mut steps: Vec<Step> = Vec::new();
            let mut cursor: Option<usize> = None;
            for it in segment {
                let (from, to, mut piece) = match it {
                    Item::Bridge { crossing, upward } => {
                        let b = &self.graph.bridges[&crossing];
                        let (from, to) = if upward { (b.s1, b.s2) } else { (b.s2, b.s1) };
                        (from, to, vec![Step { edge: b.edge, forward: upward }])
                    }
                    Item::Trace(t) => {
                        let tr = &self.traces[t];
                        let created = anchor_vertex(tr.created);
                        let died = anchor_vertex(tr.died.expect("trace has died by slice 0"));
                        let wire = &self.graph.wires[tr.wire];
                        let pos = |v: usize| {
                            wire.vertex_ids
                                .iter()
                                .position(|&x| x == v)
                                .expect("anchor vertex lies on the trace's wire")
                        };
                        let (pc, pd) = (pos(created), pos(died));
                        assert!(pd <= pc, "traces sweep leftward");
                        let mut piece: Vec<Step> = (pd..pc)
                            .map(|i| Step { edge: wire.edge_ids[i], forward: true })
                            .collect();
                        let (from, to) = if tr.a_type {
                            (died, created)
                        } else {
                            piece.reverse();
                            for s in &mut piece {
                                s.forward = false;
                            }
                            (created, died)
                        };
                        (from, to, piece)
                    }
                    Item::Placeholder { .. } => unreachable!("placeholders removed"),
                };
                if let Some(at) = cursor {
                    assert_eq!(at, from, "walk items must be contiguous");
                }
                cursor = Some(to);
                steps.append(&mut piece);
            }
            if mutable {
                // Closed: the final vertex matches the initial one.
                let first = steps.first().expect("nonempty walk");
                let e = &self.graph.edges[first.edge];
                let start = if first.forward { e.v1 } else { e.v2 };
                assert_eq!(cursor, Some(start), "mutable cycle closes up");
            }
            walks.push(steps);
        }
        Ok((mutable, walks))
    }
}

/// Propagates the cycle family of solid crossing `d` and realizes its
/// boundary walks.
pub fn cycle_of(
    record: &SubexpressionRecord,
    graph: &PlabicGraph,
    d: usize,
) -> Result<RelativeCycle, CycleError> {
    if !record.is_solid(d) {
        return Err(CycleError::NotSolid { crossing: d });
    }
    let mut prop = Propagation::start(record, graph, d);
    let mut multicurves = vec![Multicurve::default(); d];
    multicurves[d - 1] = prop.snapshot();
    for r in (1..d).rev() {
        if record.is_solid(r) {
            prop.solid_step(r)?;
        } else {
            prop.hollow_step(r);
        }
        multicurves[r - 1] = prop.snapshot();
    }
    let mut bridge_signed: BTreeMap<usize, i64> = BTreeMap::new();
    let (mutable, walks) = {
        // Count bridge traversals from the circle before it is consumed.
        for it in &prop.circle {
            if let Item::Bridge { crossing, upward } = it {
                *bridge_signed.entry(*crossing).or_insert(0) += if *upward { 1 } else { -1 };
            }
        }
        prop.finish()?
    };
    Ok(RelativeCycle {
        d,
        mutable,
        walks,
        multicurves,
        bridge_signed,
    })
}

/// Builds the wire graph and all cycle families of a pair.
pub fn all_cycles(record: &SubexpressionRecord) -> Result<CycleSystem, CycleError> {
    let graph = build_graph(record);
    let labels = record.solid_indices();
    let mut cycles = Vec::with_capacity(labels.len());
    for &d in &labels {
        cycles.push(cycle_of(record, &graph, d)?);
    }
    Ok(CycleSystem { graph, labels, cycles })
}

/// The matrix of net signed bridge traversals: rows and columns indexed by
/// the solid crossings, entry `(c, r)` counting how often cycle `c`
/// crosses bridge `r` upward minus downward.
pub fn bridge_pairing_matrix(sys: &CycleSystem) -> Vec<Vec<i64>> {
    sys.cycles
        .iter()
        .map(|cy| {
            sys.labels
                .iter()
                .map(|r| cy.bridge_signed.get(r).copied().unwrap_or(0))
                .collect()
        })
        .collect()
}

/// Sign convention of the intersection pairing, calibrated once so that the
/// cycle quiver matches the half-arrow quiver; with this sign, an admissible
/// pair whose word starts with the two solid letters `(-i, i)` has its
/// second crossing as a sink (see the quiver module's tests).
pub const INTERSECTION_SIGN: i64 = -1;

/// The intersection number of two cycles on the ribbon surface. At least
/// one of the two should be a closed cycle; the result is antisymmetric
/// and zero on identical labels.
pub fn intersection_number(
    graph: &PlabicGraph,
    c1: &RelativeCycle,
    c2: &RelativeCycle,
) -> i64 {
    if c1.d == c2.d {
        return 0;
    }
    // Direction of each used edge per cycle (cycles are simple: each edge
    // used at most once).
    let usage = |cy: &RelativeCycle| -> BTreeMap<usize, bool> {
        let mut map = BTreeMap::new();
        for walk in &cy.walks {
            for s in walk {
                let prev = map.insert(s.edge, s.forward);
                assert!(prev.is_none(), "cycles are simple");
            }
        }
        map
    };
    let u1 = usage(c1);
    let u2 = usage(c2);
    let shared: BTreeSet<usize> = u1.keys().filter(|e| u2.contains_key(e)).copied().collect();
    if shared.is_empty() {
        return 0;
    }
    // Successor maps: for each cycle, at each vertex the pairing of its
    // two incident used edges.
    let edges_at = |map: &BTreeMap<usize, bool>| -> BTreeMap<usize, Vec<usize>> {
        let mut at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &e in map.keys() {
            at.entry(graph.edges[e].v1).or_default().push(e);
            at.entry(graph.edges[e].v2).or_default().push(e);
        }
        at
    };
    let at1 = edges_at(&u1);
    let at2 = edges_at(&u2);

    let rotations = graph.rotations();
    // Walk each maximal shared component.
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut total = 0i64;
    for &start in &shared {
        if seen.contains(&start) {
            continue;
        }
        // Extend to a maximal shared path (or detect a closed component).
        let mut comp = vec![start];
        seen.insert(start);
        let mut closed = false;
        'grow: for dir in [0, 1] {
            let mut e = start;
            let mut v = if dir == 0 {
                graph.edges[start].v1
            } else {
                graph.edges[start].v2
            };
            loop {
                // The shared continuation at v, if any.
                let next = [&at1, &at2]
                    .iter()
                    .map(|at| {
                        at.get(&v)
                            .into_iter()
                            .flatten()
                            .copied()
                            .find(|&f| f != e && shared.contains(&f))
                    })
                    .collect::<Vec<_>>();
                let (Some(f1), Some(f2)) = (next[0], next[1]) else {
                    break;
                };
                if f1 != f2 {
                    break;
                }
                if f1 == start {
                    closed = true;
                    break 'grow;
                }
                seen.insert(f1);
                if dir == 0 {
                    comp.insert(0, f1);
                } else {
                    comp.push(f1);
                }
                v = if graph.edges[f1].v1 == v {
                    graph.edges[f1].v2
                } else {
                    graph.edges[f1].v1
                };
                e = f1;
            }
        }
        if closed {
            continue;
        }
        // Path endpoints: the vertices of the extremal edges not shared
        // with the path's interior.
        let path_vertices = |comp: &[usize]| -> (usize, usize) {
            if comp.len() == 1 {
                (graph.edges[comp[0]].v1, graph.edges[comp[0]].v2)
            } else {
                let end_vertex = |e: usize, inner: usize| {
                    let (a, b) = (graph.edges[e].v1, graph.edges[e].v2);
                    let (ia, ib) = (graph.edges[inner].v1, graph.edges[inner].v2);
                    if a == ia || a == ib {
                        b
                    } else {
                        a
                    }
                };
                (
                    end_vertex(comp[0], comp[1]),
                    end_vertex(comp[comp.len() - 1], comp[comp.len() - 2]),
                )
            }
        };
        let (v_start, v_end) = path_vertices(&comp);
        // Branches of each cycle at an endpoint.
        let branch = |at: &BTreeMap<usize, Vec<usize>>, v: usize, shared_edge: usize| -> usize {
            *at[&v]
                .iter()
                .find(|&&f| f != shared_edge)
                .expect("cycle branches off the shared path at its end")
        };
        let side = |v: usize, shared_edge: usize, b1: usize, b2: usize| -> i64 {
            let rot = &rotations[v];
            assert_eq!(rot.len(), 3, "shared paths end at degree-3 vertices");
            let pos = |e: usize| rot.iter().position(|&(f, _)| f == e).unwrap();
            let (ps, p1, p2) = (pos(shared_edge), pos(b1), pos(b2));
            // +1 when (shared, branch1, branch2) is counterclockwise.
            if (p1 + 3 - ps) % 3 == 1 && (p2 + 3 - ps) % 3 == 2 {
                1
            } else {
                assert!((p2 + 3 - ps) % 3 == 1 && (p1 + 3 - ps) % 3 == 2);
                -1
            }
        };
        let s_start = side(
            v_start,
            comp[0],
            branch(&at1, v_start, comp[0]),
            branch(&at2, v_start, comp[0]),
        );
        let s_end = side(
            v_end,
            comp[comp.len() - 1],
            branch(&at1, v_end, comp[comp.len() - 1]),
            branch(&at2, v_end, comp[comp.len() - 1]),
        );
        if s_start != s_end {
            continue;
        }
        // Parallel or antiparallel traversal along the path: compare the
        // two cycles' directions on the first shared edge.
        let tau = if u1[&comp[0]] == u2[&comp[0]] { 1 } else { -1 };
        total += INTERSECTION_SIGN * s_start * tau;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::{compute_aps_from_record, compute_pds, order_table, DoubleBraidWord};

    fn running_record() -> SubexpressionRecord {
        let u = Permutation::from_one_line(vec![1, 3, 2]).unwrap();
        let w = DoubleBraidWord::new(3, vec![-2, 1, 2, 1, -1]).unwrap();
        compute_pds(&u, &w).unwrap()
    }

    #[test]
    fn side_predicates() {
        // Curve from (1,1) to (4,4) with (2,3) below and (3,2) above.
        let mut below = BTreeSet::new();
        below.insert((2, 3));
        let g = Curve::new((1, 1), (4, 4), below);
        // Below dot: curve passes left of it and above it.
        assert!(!g.passes_weakly_right((2, 3)));
        assert!(g.passes_weakly_left((2, 3)));
        assert!(g.passes_weakly_above((2, 3)));
        assert!(!g.passes_weakly_below((2, 3)));
        // Above dot: the reverse.
        assert!(g.passes_weakly_right((3, 2)));
        assert!(!g.passes_weakly_left((3, 2)));
        assert!(!g.passes_weakly_above((3, 2)));
        assert!(g.passes_weakly_below((3, 2)));
        // Endpoints satisfy every weak predicate.
        for p in [(1, 1), (4, 4)] {
            assert!(g.passes_weakly_right(p));
            assert!(g.passes_weakly_left(p));
            assert!(g.passes_weakly_above(p));
            assert!(g.passes_weakly_below(p));
        }
        // Out-of-band heights and columns fail.
        assert!(!g.passes_weakly_right((2, 5)));
        assert!(!g.passes_weakly_above((5, 2)));
        // In-band but outside the box.
        assert!(g.passes_weakly_right((1, 2))); // hypothetical point left of box
        assert!(!g.passes_weakly_left((1, 2)));
    }

    #[test]
    fn sigma_swap_bare_curve_is_transposition() {
        // No dots inside the box: the swap exchanges the two endpoint
        // columns' values.
        let w = Permutation::identity(3);
        let g = Curve::new((1, 1), (2, 2), BTreeSet::new());
        let swapped = sigma_swap_curve(&g, &w);
        assert_eq!(swapped, Permutation::from_one_line(vec![2, 1, 3]).unwrap());
        // Wider box with one dot below.
        let w2 = Permutation::from_one_line(vec![1, 2, 3]).unwrap();
        let mut below = BTreeSet::new();
        below.insert((2, 2));
        let g2 = Curve::new((1, 1), (3, 3), below);
        // Dots (1,1),(2,2),(3,3); below chain P = (2,2): new dots
        // lower: (2,1),(3,2); upper: none inside: (1,3).
        let swapped2 = sigma_swap_curve(&g2, &w2);
        assert_eq!(
            swapped2,
            Permutation::from_one_line(vec![3, 1, 2]).unwrap()
        );
    }

    #[test]
    fn mutable_flags_and_closures_running_example() {
        let record = running_record();
        let sys = all_cycles(&record).unwrap();
        assert_eq!(sys.labels, vec![1, 2, 4, 5]);
        let flags: Vec<bool> = sys.cycles.iter().map(|c| c.mutable).collect();
        assert_eq!(flags, vec![false, false, true, true]);
        for cy in &sys.cycles {
            if cy.mutable {
                assert_eq!(cy.walks.len(), 1);
            } else {
                assert!(!cy.walks.is_empty());
            }
        }
    }

    #[test]
    fn sigma_swap_matches_bumped_sequences_running_example() {
        let record = running_record();
        let sys = all_cycles(&record).unwrap();
        for cy in &sys.cycles {
            let aps = compute_aps_from_record(&record, cy.d).unwrap();
            for c in 0..cy.d {
                let got = sigma_swap(&cy.multicurves[c], record.u_at(c));
                assert_eq!(
                    &got,
                    aps.v_at(c),
                    "cycle {} slice {c}: sigma swap vs bumped sequence",
                    cy.d
                );
            }
        }
    }

    #[test]
    fn disk_membership_matches_order_table_running_example() {
        let record = running_record();
        let table = order_table(&record).unwrap();
        let sys = all_cycles(&record).unwrap();
        let n = record.n() as i32;
        for cy in &sys.cycles {
            for c in 0..cy.d {
                for h in 1..n {
                    for sign in [1i32, -1] {
                        let got = cy.disk_contains(c, sign * h) as i64;
                        let want = table.ord(cy.d, c, sign * h);
                        assert_eq!(
                            got, want,
                            "cycle {} slice {c} level {}",
                            cy.d,
                            sign * h
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn bridge_pairing_unitriangular_running_example() {
        let record = running_record();
        let sys = all_cycles(&record).unwrap();
        let m = bridge_pairing_matrix(&sys);
        for (i, row) in m.iter().enumerate() {
            assert_eq!(row[i], 1, "own bridge crossed once upward");
            for (j, &v) in row.iter().enumerate() {
                if j > i {
                    assert_eq!(v, 0, "no bridges to the right of the owner");
                }
            }
        }
    }

    #[test]
    fn oracle_sweep_small() {
        // Exhaustive n = 3 words up to length 5: sigma swap ≡ bumped
        // sequences, disk membership ≡ order table, bridge pairing
        // unitriangular, mutability consistent.
        let n = 3;
        let perms = Permutation::all(n);
        let letters = [1i32, 2, -1, -2];
        for m in 1..=5usize {
            let mut idx = vec![0usize; m];
            loop {
                let w =
                    DoubleBraidWord::new(n, idx.iter().map(|&i| letters[i]).collect()).unwrap();
                for u in &perms {
                    let Ok(record) = compute_pds(u, &w) else { continue };
                    let table = order_table(&record).unwrap();
                    let sys = all_cycles(&record).unwrap_or_else(|e| {
                        panic!("cycles fail for u={u}, word={w}: {e}")
                    });
                    let mutable = table.mutable_flags();
                    for (cy, &flag) in sys.cycles.iter().zip(mutable) {
                        assert_eq!(cy.mutable, flag, "u={u}, word={w}, d={}", cy.d);
                        let aps = compute_aps_from_record(&record, cy.d).unwrap();
                        for c in 0..cy.d {
                            assert_eq!(
                                &sigma_swap(&cy.multicurves[c], record.u_at(c)),
                                aps.v_at(c),
                                "sigma swap: u={u}, word={w}, d={}, c={c}",
                                cy.d
                            );
                            for h in 1..n as i32 {
                                for sign in [1, -1] {
                                    assert_eq!(
                                        cy.disk_contains(c, sign * h) as i64,
                                        table.ord(cy.d, c, sign * h),
                                        "disk: u={u}, word={w}, d={}, c={c}, h={}",
                                        cy.d,
                                        sign * h
                                    );
                                }
                            }
                        }
                    }
                    let bp = bridge_pairing_matrix(&sys);
                    for (i, row) in bp.iter().enumerate() {
                        assert_eq!(row[i], 1, "u={u}, word={w}");
                        for &v in &row[i + 1..] {
                            assert_eq!(v, 0, "u={u}, word={w}");
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
    fn intersection_pairing_running_example() {
        let record = running_record();
        let sys = all_cycles(&record).unwrap();
        let pair = |c: usize, d: usize| {
            intersection_number(&sys.graph, sys.cycle(c).unwrap(), sys.cycle(d).unwrap())
        };
        // The two mutable cycles bound adjacent disks and do not cross.
        assert_eq!(pair(4, 5), 0);
        assert_eq!(pair(4, 4), 0);
        // Frozen-mutable pairings: cycle 2 meets both mutable cycles with
        // one sign, cycle 1 meets cycle 4 with the opposite sign and
        // avoids cycle 5 entirely.
        let a = pair(2, 4);
        assert_eq!(a.abs(), 1);
        assert_eq!(pair(2, 5), a);
        assert_eq!(pair(1, 4), -a);
        assert_eq!(pair(1, 5), 0);
        // Antisymmetry.
        for (c, d) in [(2, 4), (2, 5), (1, 4), (4, 5)] {
            assert_eq!(pair(c, d), -pair(d, c));
        }
    }
}

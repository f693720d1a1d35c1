//! Ice quivers attached to admissible pairs.
//!
//! The exchange matrix is built in two independent ways: from signed
//! intersection numbers of the relative cycles on the ribbon surface
//! ([`quiver_from_cycles`]), and from half-arrow counts read off the
//! vanishing-order table of the grid minors ([`quiver_from_half_arrows`]).
//! The two constructions must agree entry by entry; the tests compare them
//! exhaustively over small inputs.
//!
//! The module also provides quiver mutation, sink-recurrence certificates
//! with an independent checker, the really-full-rank test for the exchange
//! matrix, and the planar face quiver of a trimmed wire graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::OrderTable;
use crate::cycles::{intersection_number, CycleSystem};
use crate::graph3d::{Color, HalfEdge, PlabicGraph, VertexKind};

/// Errors for quiver construction and mutation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QuiverError {
    #[error("vertex {label} is frozen and cannot be mutated")]
    FrozenVertex { label: usize },
    #[error("no vertex with label {label}")]
    UnknownLabel { label: usize },
    #[error("net half-arrow count from {from} to {to} is {net}, which is odd")]
    OddHalfArrowSum { from: usize, to: usize, net: i64 },
    #[error("malformed quiver: {reason}")]
    Malformed { reason: String },
}

/// A quiver with frozen vertices, stored as a signed adjacency matrix.
///
/// `b[c][d]` is the number of arrows from vertex `c` to vertex `d`, counted
/// with sign (`b[c][d] = -b[d][c]`). Arrows between two frozen vertices are
/// not tracked; those entries are identically zero. Vertices carry stable
/// `labels` (crossing indices for quivers of pairs); mutation and vertex
/// deletion never renumber them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IceQuiver {
    labels: Vec<usize>,
    mutable: Vec<bool>,
    b: Vec<Vec<i64>>,
}

/// Serde mirror used to re-validate freshly parsed quivers.
#[derive(Deserialize)]
struct RawIceQuiver {
    labels: Vec<usize>,
    mutable: Vec<bool>,
    b: Vec<Vec<i64>>,
}

impl<'de> Deserialize<'de> for IceQuiver {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = RawIceQuiver::deserialize(deserializer)?;
        IceQuiver::new(raw.labels, raw.mutable, raw.b).map_err(serde::de::Error::custom)
    }
}

impl IceQuiver {
    /// Validates and wraps an adjacency matrix: sizes must agree, labels
    /// must be strictly increasing, entries must be antisymmetric whenever
    /// at least one endpoint is mutable, and zero on frozen pairs.
    pub fn new(
        labels: Vec<usize>,
        mutable: Vec<bool>,
        b: Vec<Vec<i64>>,
    ) -> Result<Self, QuiverError> {
        let k = labels.len();
        let fail = |reason: String| Err(QuiverError::Malformed { reason });
        if mutable.len() != k || b.len() != k || b.iter().any(|row| row.len() != k) {
            return fail(format!("inconsistent sizes for {k} labels"));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!("labels {labels:?} are not strictly increasing"));
        }
        for i in 0..k {
            for j in 0..k {
                if !mutable[i] && !mutable[j] {
                    if b[i][j] != 0 {
                        return fail(format!(
                            "entry ({}, {}) connects two frozen vertices",
                            labels[i], labels[j]
                        ));
                    }
                } else if b[i][j] != -b[j][i] {
                    return fail(format!(
                        "entries ({}, {}) and ({}, {}) are not antisymmetric",
                        labels[i], labels[j], labels[j], labels[i]
                    ));
                }
            }
        }
        Ok(IceQuiver { labels, mutable, b })
    }

    /// Number of vertices.
    pub fn size(&self) -> usize {
        self.labels.len()
    }

    /// Vertex labels, strictly increasing.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Mutability flags parallel to [`Self::labels`].
    pub fn mutable_flags(&self) -> &[bool] {
        &self.mutable
    }

    /// Labels of the mutable vertices.
    pub fn mutable_labels(&self) -> Vec<usize> {
        self.iter_idx()
            .filter(|&i| self.mutable[i])
            .map(|i| self.labels[i])
            .collect()
    }

    /// Labels of the frozen vertices.
    pub fn frozen_labels(&self) -> Vec<usize> {
        self.iter_idx()
            .filter(|&i| !self.mutable[i])
            .map(|i| self.labels[i])
            .collect()
    }

    fn iter_idx(&self) -> std::ops::Range<usize> {
        0..self.labels.len()
    }

    /// Index of a label.
    pub fn index_of(&self, label: usize) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    /// Whether the vertex with the given label is mutable. Panics on an
    /// unknown label.
    pub fn is_mutable(&self, label: usize) -> bool {
        let i = self.index_of(label).expect("known label");
        self.mutable[i]
    }

    /// Signed arrow count from `from` to `to`. Panics on unknown labels.
    pub fn entry(&self, from: usize, to: usize) -> i64 {
        let i = self.index_of(from).expect("known label");
        let j = self.index_of(to).expect("known label");
        self.b[i][j]
    }

    /// The raw signed adjacency matrix in label order.
    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.b
    }

    /// Fomin–Zelevinsky mutation at the vertex with the given label.
    pub fn mutate(&self, label: usize) -> Result<IceQuiver, QuiverError> {
        let k = self
            .index_of(label)
            .ok_or(QuiverError::UnknownLabel { label })?;
        if !self.mutable[k] {
            return Err(QuiverError::FrozenVertex { label });
        }
        let n = self.size();
        let mut b = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                if !self.mutable[i] && !self.mutable[j] {
                    continue;
                }
                b[i][j] = if i == k || j == k {
                    -self.b[i][j]
                } else {
                    self.b[i][j] + self.b[i][k].signum() * (self.b[i][k] * self.b[k][j]).max(0)
                };
            }
        }
        Ok(IceQuiver {
            labels: self.labels.clone(),
            mutable: self.mutable.clone(),
            b,
        })
    }

    /// The restriction to the mutable vertices.
    pub fn mutable_part(&self) -> IceQuiver {
        self.restrict(|i| self.mutable[i])
    }

    /// Deletes the vertices with the given labels. Unknown labels are
    /// ignored.
    pub fn without(&self, labels: &[usize]) -> IceQuiver {
        let drop: BTreeSet<usize> = labels.iter().copied().collect();
        self.restrict(|i| !drop.contains(&self.labels[i]))
    }

    fn restrict(&self, keep: impl Fn(usize) -> bool) -> IceQuiver {
        let idx: Vec<usize> = self.iter_idx().filter(|&i| keep(i)).collect();
        IceQuiver {
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            mutable: idx.iter().map(|&i| self.mutable[i]).collect(),
            b: idx
                .iter()
                .map(|&i| idx.iter().map(|&j| self.b[i][j]).collect())
                .collect(),
        }
    }

    /// Whether any arrow connects two mutable vertices.
    pub fn has_mutable_arrows(&self) -> bool {
        self.iter_idx().any(|i| {
            self.mutable[i]
                && self
                    .iter_idx()
                    .any(|j| self.mutable[j] && self.b[i][j] != 0)
        })
    }

    /// Whether the vertex is mutable and no arrow leaves it towards another
    /// mutable vertex. Returns `false` on unknown labels.
    pub fn is_mutable_sink(&self, label: usize) -> bool {
        match self.index_of(label) {
            Some(d) => {
                self.mutable[d]
                    && self
                        .iter_idx()
                        .all(|c| !self.mutable[c] || self.b[c][d] >= 0)
            }
            None => false,
        }
    }

    /// Labels of all mutable sinks.
    pub fn mutable_sinks(&self) -> Vec<usize> {
        self.iter_idx()
            .filter(|&d| self.mutable[d] && self.is_mutable_sink(self.labels[d]))
            .map(|d| self.labels[d])
            .collect()
    }

    /// Labels of the mutable vertices with an arrow into the given vertex.
    pub fn in_neighbors(&self, label: usize) -> Vec<usize> {
        let d = self.index_of(label).expect("known label");
        self.iter_idx()
            .filter(|&c| self.mutable[c] && self.b[c][d] > 0)
            .map(|c| self.labels[c])
            .collect()
    }

    /// The extended exchange matrix: one row per vertex, one column per
    /// mutable vertex, in label order.
    pub fn exchange_matrix(&self) -> Vec<Vec<i64>> {
        let cols: Vec<usize> = self.iter_idx().filter(|&j| self.mutable[j]).collect();
        self.iter_idx()
            .map(|i| cols.iter().map(|&j| self.b[i][j]).collect())
            .collect()
    }

    /// Graphviz rendering: frozen vertices are boxed, multiple arrows carry
    /// a multiplicity label.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph quiver {\n  rankdir=LR;\n");
        for i in self.iter_idx() {
            let shape = if self.mutable[i] { "ellipse" } else { "box" };
            out.push_str(&format!(
                "  v{} [label=\"{}\", shape={}];\n",
                self.labels[i], self.labels[i], shape
            ));
        }
        for i in self.iter_idx() {
            for j in self.iter_idx() {
                if self.b[i][j] > 0 {
                    let attr = if self.b[i][j] > 1 {
                        format!(" [label=\"{}\"]", self.b[i][j])
                    } else {
                        String::new()
                    };
                    out.push_str(&format!(
                        "  v{} -> v{}{};\n",
                        self.labels[i], self.labels[j], attr
                    ));
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// Serializes to JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("quiver serializes")
    }

    /// Parses from JSON, re-validating all invariants.
    pub fn from_json(text: &str) -> Result<IceQuiver, QuiverError> {
        serde_json::from_str(text).map_err(|e| QuiverError::Malformed {
            reason: e.to_string(),
        })
    }
}

/// Builds the ice quiver of a pair from the signed intersection numbers of
/// its relative cycles: `b[c][d]` counts the crossings of cycle `c` through
/// cycle `d` on the ribbon surface, with orientation signs.
pub fn quiver_from_cycles(sys: &CycleSystem) -> IceQuiver {
    let k = sys.labels.len();
    let mutable: Vec<bool> = sys.cycles.iter().map(|c| c.mutable).collect();
    let mut b = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j || (!mutable[i] && !mutable[j]) {
                continue;
            }
            b[i][j] = intersection_number(&sys.graph, &sys.cycles[i], &sys.cycles[j]);
        }
    }
    IceQuiver::new(sys.labels.clone(), mutable, b)
        .expect("intersection numbers are antisymmetric")
}

/// The four grid faces around a bridge: `West`/`East` at the bridge level to
/// its left and right, `North`/`South` one level up and down.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BridgeFace {
    West,
    East,
    North,
    South,
}

use BridgeFace::{East, North, South, West};

/// Half-arrow pattern contributed by one positive bridge, as ordered face
/// pairs `(X, Y)`: each pair contributes one half-arrow `c → c'` for every
/// cycle `c` whose disk covers face `X` and every `c'` covering face `Y`.
///
/// The pattern lists, at both bridge endpoints, the three incident corners
/// in the cyclic order opposite to the ribbon rotation, with consecutive
/// corners paired. Negative bridges contribute the reversed pairs, because
/// their endpoint colors are swapped.
const POSITIVE_BRIDGE_HALF_ARROWS: [(BridgeFace, BridgeFace); 6] = [
    (East, West),
    (West, South),
    (South, East),
    (North, East),
    (East, West),
    (West, North),
];

/// Builds the ice quiver of a pair from its vanishing-order table: around
/// every solid bridge, half-arrows are drawn between the cycles covering
/// adjacent grid faces, and the total is halved.
pub fn quiver_from_half_arrows(table: &OrderTable) -> Result<IceQuiver, QuiverError> {
    let solid = table.solid_indices().to_vec();
    let k = solid.len();
    let mutable = table.mutable_flags().to_vec();
    let mut half = vec![vec![0i64; k]; k];
    for &r in &solid {
        let letter = table.letter(r);
        let positive = letter > 0;
        let level = i32::from(letter.unsigned_abs() as u16);
        let sign: i32 = if positive { 1 } else { -1 };
        // Grid face addressed by each corner; `West`/`East` are split by the
        // bridge, `North`/`South` span it unchanged.
        let face = |f: BridgeFace| -> (usize, i32) {
            match f {
                West => (r - 1, sign * level),
                East => (r, sign * level),
                North => (r, sign * (level + 1)),
                South => (r, sign * (level - 1)),
            }
        };
        #[cfg(debug_assertions)]
        for f in [North, South] {
            let (_, h) = face(f);
            for &d in &solid {
                debug_assert_eq!(
                    table.ord(d, r - 1, h),
                    table.ord(d, r, h),
                    "level {h} is not split at bridge {r}"
                );
            }
        }
        let covering = |f: BridgeFace| -> Vec<usize> {
            let (c, h) = face(f);
            (0..k).filter(|&i| table.ord(solid[i], c, h) == 1).collect()
        };
        let cover = [
            covering(West),
            covering(East),
            covering(North),
            covering(South),
        ];
        let of = |f: BridgeFace| -> &Vec<usize> {
            match f {
                West => &cover[0],
                East => &cover[1],
                North => &cover[2],
                South => &cover[3],
            }
        };
        for &(x, y) in &POSITIVE_BRIDGE_HALF_ARROWS {
            let (from, to) = if positive { (x, y) } else { (y, x) };
            for &a in of(from) {
                for &b in of(to) {
                    if a != b {
                        half[a][b] += 1;
                    }
                }
            }
        }
    }
    let mut b = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i == j || (!mutable[i] && !mutable[j]) {
                continue;
            }
            let net = half[i][j] - half[j][i];
            if net.rem_euclid(2) != 0 {
                return Err(QuiverError::OddHalfArrowSum {
                    from: solid[i],
                    to: solid[j],
                    net,
                });
            }
            b[i][j] = net / 2;
        }
    }
    IceQuiver::new(solid, mutable, b)
}

// ---------------------------------------------------------------------
// Really full rank.
// ---------------------------------------------------------------------

/// Diagonalizes an integer matrix by unimodular row and column operations
/// and returns the diagonal entries (unsorted, without the divisibility
/// normalization). The product of their absolute values is invariant, which
/// is all the rank test needs.
fn diagonal_invariants(mut a: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pivot: smallest nonzero entry in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0
                    && pivot.is_none_or(|(pi, pj)| a[i][j].abs() < a[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break;
        };
        a.swap(t, pi);
        for row in &mut a {
            row.swap(t, pj);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t] != 0 {
                    let q = a[i][t].div_euclid(a[t][t]);
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                    if a[i][t] != 0 {
                        a.swap(t, i);
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if a[t][j] != 0 {
                    let q = a[t][j].div_euclid(a[t][t]);
                    for row in a.iter_mut().take(rows).skip(t) {
                        row[j] -= q * row[t];
                    }
                    if a[t][j] != 0 {
                        for row in &mut a {
                            row.swap(t, j);
                        }
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        diag.push(a[t][t]);
        t += 1;
    }
    diag
}

/// Whether the columns of the extended exchange matrix span a direct
/// summand of the ambient lattice: the matrix has full column rank and the
/// greatest common divisor of its maximal minors is one. Quivers without
/// mutable vertices pass vacuously.
pub fn really_full_rank(q: &IceQuiver) -> bool {
    let m = q.exchange_matrix();
    let cols = m.first().map_or(0, Vec::len);
    if cols == 0 {
        return true;
    }
    let a: Vec<Vec<i128>> = m
        .iter()
        .map(|row| row.iter().map(|&x| i128::from(x)).collect())
        .collect();
    let diag = diagonal_invariants(a);
    diag.len() == cols && diag.iter().all(|&d| d.abs() == 1)
}

// ---------------------------------------------------------------------
// Sink recurrence.
// ---------------------------------------------------------------------

/// A recursive witness that a quiver is sink-recurrent. `Isolated` asserts
/// the quiver has no arrows between mutable vertices. `Sink` applies the
/// recorded mutations, exhibits a mutable sink, and recurses into the
/// quiver without the sink and the quiver without the sink and all vertices
/// with arrows into it. All vertices are referenced by label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SinkCertificate {
    Isolated,
    Sink {
        mutations: Vec<usize>,
        sink: usize,
        without_sink: Box<SinkCertificate>,
        without_inflow: Box<SinkCertificate>,
    },
}

impl SinkCertificate {
    /// Number of `Sink` nodes in the certificate tree.
    pub fn node_count(&self) -> usize {
        match self {
            SinkCertificate::Isolated => 0,
            SinkCertificate::Sink {
                without_sink,
                without_inflow,
                ..
            } => 1 + without_sink.node_count() + without_inflow.node_count(),
        }
    }
}

/// Replays a sink-recurrence certificate against a quiver, verifying every
/// claim. Only the mutable part matters; frozen vertices are dropped first.
pub fn check_certificate(q: &IceQuiver, cert: &SinkCertificate) -> Result<(), String> {
    fn go(q: &IceQuiver, cert: &SinkCertificate) -> Result<(), String> {
        match cert {
            SinkCertificate::Isolated => {
                if q.has_mutable_arrows() {
                    Err(format!(
                        "vertices {:?} still carry arrows but the certificate claims isolation",
                        q.labels()
                    ))
                } else {
                    Ok(())
                }
            }
            SinkCertificate::Sink {
                mutations,
                sink,
                without_sink,
                without_inflow,
            } => {
                let mut cur = q.clone();
                for &v in mutations {
                    cur = cur.mutate(v).map_err(|e| e.to_string())?;
                }
                if !cur.is_mutable_sink(*sink) {
                    return Err(format!(
                        "vertex {sink} is not a mutable sink after mutations {mutations:?}"
                    ));
                }
                go(&cur.without(&[*sink]), without_sink)?;
                let mut drop = cur.in_neighbors(*sink);
                drop.push(*sink);
                go(&cur.without(&drop), without_inflow)
            }
        }
    }
    go(&q.mutable_part(), cert)
}

/// Outcome of the bounded sink-recurrence search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SinkSearch {
    Certified(SinkCertificate),
    Unknown,
}

/// Searches for a sink-recurrence certificate by breadth-first exploration
/// of the mutation class, spending at most `budget` quiver expansions
/// across the whole recursion. `Unknown` means the budget ran out or the
/// reachable class contains no usable sink, not that the quiver fails to be
/// sink-recurrent.
pub fn is_sink_recurrent(q: &IceQuiver, budget: usize) -> SinkSearch {
    let mut budget = budget;
    match search(&q.mutable_part(), &mut budget) {
        Some(cert) => SinkSearch::Certified(cert),
        None => SinkSearch::Unknown,
    }
}

fn search(q: &IceQuiver, budget: &mut usize) -> Option<SinkCertificate> {
    if !q.has_mutable_arrows() {
        return Some(SinkCertificate::Isolated);
    }
    let mut visited: BTreeSet<Vec<Vec<i64>>> = BTreeSet::new();
    let mut queue: VecDeque<(IceQuiver, Vec<usize>)> = VecDeque::new();
    visited.insert(q.matrix().to_vec());
    queue.push_back((q.clone(), Vec::new()));
    while let Some((cur, path)) = queue.pop_front() {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        for s in cur.mutable_sinks() {
            let Some(without_sink) = search(&cur.without(&[s]), budget) else {
                continue;
            };
            let mut drop = cur.in_neighbors(s);
            drop.push(s);
            let Some(without_inflow) = search(&cur.without(&drop), budget) else {
                continue;
            };
            return Some(SinkCertificate::Sink {
                mutations: path,
                sink: s,
                without_sink: Box::new(without_sink),
                without_inflow: Box::new(without_inflow),
            });
        }
        for v in cur.mutable_labels() {
            let next = cur.mutate(v).expect("mutable label");
            if visited.insert(next.matrix().to_vec()) {
                let mut longer = path.clone();
                longer.push(v);
                queue.push_back((next, longer));
            }
        }
    }
    None
}

// ---------------------------------------------------------------------
// Planar face quiver.
// ---------------------------------------------------------------------

/// Arrow orientation of the face quiver relative to the bicolored edges:
/// each arrow runs into the face containing the white-to-black half-edge
/// from the face on its other side. Calibrated once against the cycle
/// quiver (see the dotted-diagram tests).
const FACE_ARROW_FROM_WHITE_TO_BLACK_SIDE: bool = false;

/// Face walks of the fence drawing inside the disk. The drawing embeds the
/// wire graph of an all-positive word in the plane; the disk boundary
/// passes through the marked left endpoints in row order, so regions that
/// touch the boundary close along boundary arcs instead of merging into
/// one outer face. Loose right ends dangle inside their face and are
/// walked in both directions.
fn disk_face_walks(g: &PlabicGraph) -> Result<Vec<Vec<HalfEdge>>, QuiverError> {
    if g.letters.iter().any(|&l| l < 0) {
        return Err(QuiverError::Malformed {
            reason: "disk faces are defined for all-positive words only".into(),
        });
    }
    // Planar rotations: the stored surface rotations run clockwise at black
    // vertices and counterclockwise elsewhere; reversing the black ones
    // makes the handedness uniform.
    let mut rot = g.rotations();
    for (v, vert) in g.vertices.iter().enumerate() {
        if vert.color == Some(Color::Black) {
            rot[v].reverse();
        }
    }
    // The boundary circle visits the marked endpoints by ascending row.
    let mut marked: Vec<usize> = (0..g.vertices.len())
        .filter(|&v| matches!(g.vertices[v].kind, VertexKind::Marked { .. }))
        .collect();
    marked.sort_by_key(|&v| g.vertices[v].y);
    let next_marked: BTreeMap<usize, usize> = marked
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, marked[(i + 1) % marked.len()]))
        .collect();
    let next = |h: HalfEdge| -> HalfEdge {
        let e = &g.edges[h.edge];
        let (head, end_at_head) = if h.forward { (e.v2, 1u8) } else { (e.v1, 0u8) };
        if let Some(&w) = next_marked.get(&head) {
            // Cross the boundary arc and re-enter at the next marked point.
            let &[(e2, end2)] = &rot[w][..] else {
                panic!("marked vertices have one incident edge");
            };
            return HalfEdge {
                edge: e2,
                forward: end2 == 0,
            };
        }
        let idx = rot[head]
            .iter()
            .position(|&(e2, k)| e2 == h.edge && k == end_at_head)
            .expect("incident edge listed in rotation");
        let (e2, end2) = rot[head][(idx + 1) % rot[head].len()];
        HalfEdge {
            edge: e2,
            forward: end2 == 0,
        }
    };
    let mut seen = vec![[false, false]; g.edges.len()];
    let mut faces = Vec::new();
    for e in 0..g.edges.len() {
        for fwd in [true, false] {
            if seen[e][fwd as usize] {
                continue;
            }
            let start = HalfEdge { edge: e, forward: fwd };
            let mut walk = Vec::new();
            let mut h = start;
            loop {
                seen[h.edge][h.forward as usize] = true;
                walk.push(h);
                h = next(h);
                if h == start {
                    break;
                }
            }
            faces.push(walk);
        }
    }
    Ok(faces)
}

/// Result of matching relative cycles to the faces of a planar wire graph.
#[derive(Clone, Debug)]
pub struct FaceQuiverReport {
    /// The planar-dual quiver on the matched faces.
    pub quiver: IceQuiver,
    /// Face index assigned to each crossing label.
    pub face_of_cycle: BTreeMap<usize, usize>,
    /// The unique face not claimed by any cycle.
    pub boundary_face: usize,
    /// Whether the cycles matched the face walks with reversed orientation.
    pub reversed: bool,
}

/// Matches every relative cycle of an all-positive pair to the disk face
/// of the fence drawing it traverses and builds the planar-dual quiver:
/// one arrow per bicolored edge between the two adjacent faces, skipping
/// the boundary face and frozen pairs. Fails when the word has negative
/// letters or the cycles do not biject onto the non-boundary faces.
pub fn planar_face_quiver(sys: &CycleSystem) -> Result<FaceQuiverReport, QuiverError> {
    let g = &sys.graph;
    let malformed = |reason: String| QuiverError::Malformed { reason };
    let faces = disk_face_walks(g)?;
    let mut face_of: BTreeMap<(usize, bool), usize> = BTreeMap::new();
    for (fi, walk) in faces.iter().enumerate() {
        for h in walk {
            face_of.insert((h.edge, h.forward), fi);
        }
    }
    let face_sets: Vec<BTreeSet<(usize, bool)>> = faces
        .iter()
        .map(|walk| walk.iter().map(|h| (h.edge, h.forward)).collect())
        .collect();

    // Match each cycle to the face containing its directed half-edges. All
    // cycles must traverse their faces with one common orientation; try
    // both and keep the first that yields a bijection.
    let cycle_steps: Vec<Vec<(usize, bool)>> = sys
        .cycles
        .iter()
        .map(|cy| {
            cy.walks
                .iter()
                .flat_map(|walk| walk.iter().map(|s| (s.edge, s.forward)))
                .collect()
        })
        .collect();
    let matches_face = |ix: usize, rev: bool| -> Option<usize> {
        let steps = &cycle_steps[ix];
        let &(e0, f0) = steps.first()?;
        let fi = *face_of.get(&(e0, f0 != rev))?;
        let all_in = steps
            .iter()
            .all(|&(e, fwd)| face_sets[fi].contains(&(e, fwd != rev)));
        // Closed cycles must use the whole face walk; boundary arcs also
        // admit turnback steps at marked vertices.
        let exact_ok = !sys.cycles[ix].mutable || faces[fi].len() == steps.len();
        (all_in && exact_ok).then_some(fi)
    };
    let try_orientation = |rev: bool| -> Option<BTreeMap<usize, usize>> {
        let mut claimed: BTreeMap<usize, usize> = BTreeMap::new();
        for ix in 0..sys.cycles.len() {
            let fi = matches_face(ix, rev)?;
            if claimed.insert(fi, sys.labels[ix]).is_some() {
                return None;
            }
        }
        Some(claimed)
    };
    let (claimed, reversed) = match (try_orientation(false), try_orientation(true)) {
        (Some(c), _) => (c, false),
        (None, Some(c)) => (c, true),
        (None, None) => {
            return Err(malformed(
                "relative cycles do not simultaneously traverse distinct faces".into(),
            ));
        }
    };
    let face_of_cycle: BTreeMap<usize, usize> =
        claimed.iter().map(|(&f, &l)| (l, f)).collect();
    let unmatched: Vec<usize> = (0..faces.len())
        .filter(|fi| !claimed.contains_key(fi))
        .collect();
    let [boundary_face] = unmatched[..] else {
        return Err(malformed(format!(
            "expected exactly one unmatched face, found {unmatched:?}"
        )));
    };

    // Planar-dual arrows, one per bicolored edge of the trimmed graph.
    let k = sys.labels.len();
    let mutable: Vec<bool> = sys.cycles.iter().map(|c| c.mutable).collect();
    let idx_of_label: BTreeMap<usize, usize> = sys
        .labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i))
        .collect();
    let mut b = vec![vec![0i64; k]; k];
    let mut push_arrow = |white_side: HalfEdge| {
        let f1 = face_of[&(white_side.edge, white_side.forward)];
        let f2 = face_of[&(white_side.edge, !white_side.forward)];
        if f1 == f2 || f1 == boundary_face || f2 == boundary_face {
            return;
        }
        let a = idx_of_label[&claimed[&f1]];
        let c = idx_of_label[&claimed[&f2]];
        if !mutable[a] && !mutable[c] {
            return;
        }
        if FACE_ARROW_FROM_WHITE_TO_BLACK_SIDE {
            b[a][c] += 1;
            b[c][a] -= 1;
        } else {
            b[a][c] -= 1;
            b[c][a] += 1;
        }
    };
    for info in g.bridges.values() {
        let e = info.edge;
        let (v1, v2) = (g.edges[e].v1, g.edges[e].v2);
        match (g.vertices[v1].color, g.vertices[v2].color) {
            (Some(Color::White), Some(Color::Black)) => push_arrow(HalfEdge {
                edge: e,
                forward: true,
            }),
            (Some(Color::Black), Some(Color::White)) => push_arrow(HalfEdge {
                edge: e,
                forward: false,
            }),
            other => {
                return Err(malformed(format!(
                    "bridge {} has endpoint colors {other:?}",
                    info.crossing
                )));
            }
        }
    }
    for wire in &g.wires {
        let colored: Vec<usize> = (0..wire.vertex_ids.len())
            .filter(|&i| g.vertices[wire.vertex_ids[i]].color.is_some())
            .collect();
        for pair in colored.windows(2) {
            let (a, c) = (pair[0], pair[1]);
            let (va, vc) = (wire.vertex_ids[a], wire.vertex_ids[c]);
            let first = wire.edge_ids[a];
            let last = wire.edge_ids[c - 1];
            match (g.vertices[va].color, g.vertices[vc].color) {
                (Some(Color::White), Some(Color::Black)) => push_arrow(HalfEdge {
                    edge: first,
                    forward: g.edges[first].v1 == va,
                }),
                (Some(Color::Black), Some(Color::White)) => push_arrow(HalfEdge {
                    edge: last,
                    forward: g.edges[last].v1 == vc,
                }),
                _ => {}
            }
        }
    }
    let quiver = IceQuiver::new(sys.labels.clone(), mutable, b)
        .expect("face arrows are antisymmetric");
    Ok(FaceQuiverReport {
        quiver,
        face_of_cycle,
        boundary_face,
        reversed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::{compute_pds, order_table, DoubleBraidWord, LeDiagram, SubexpressionRecord};
    use crate::cycles::all_cycles;
    use crate::perm::Permutation;

    fn record(u: &[usize], n: usize, letters: &[i32]) -> SubexpressionRecord {
        let u = Permutation::from_one_line(u.to_vec()).unwrap();
        let word = DoubleBraidWord::new(n, letters.to_vec()).unwrap();
        compute_pds(&u, &word).unwrap()
    }

    fn both_quivers(u: &[usize], n: usize, letters: &[i32]) -> (IceQuiver, IceQuiver) {
        let rec = record(u, n, letters);
        let sys = all_cycles(&rec).unwrap();
        let table = order_table(&rec).unwrap();
        (
            quiver_from_cycles(&sys),
            quiver_from_half_arrows(&table).unwrap(),
        )
    }

    /// All letters for rank `n`: `±1, …, ±(n−1)`.
    fn alphabet(n: usize) -> Vec<i32> {
        (1..n as i32).flat_map(|i| [i, -i]).collect()
    }

    fn words(n: usize, len: usize) -> Vec<Vec<i32>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    alphabet(n).into_iter().map(move |l| {
                        let mut w2 = w.clone();
                        w2.push(l);
                        w2
                    })
                })
                .collect();
        }
        out
    }

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut items: Vec<usize> = (1..=n).collect();
        permute(&mut items, 0, &mut out);
        out
    }

    fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, out);
            items.swap(k, i);
        }
    }

    /// The worked example: `u = s₂`, word `(-2, 1, 2, 1, -1)` on three
    /// strands. Both constructions give arrows `1 → 4`, `4 → 2`, `5 → 2`
    /// and no arrow between the mutable pair `4, 5`.
    #[test]
    fn running_example_quiver_exact() {
        let (qc, qh) = both_quivers(&[1, 3, 2], 3, &[-2, 1, 2, 1, -1]);
        assert_eq!(qc, qh);
        assert_eq!(qc.labels(), &[1, 2, 4, 5]);
        assert_eq!(qc.mutable_flags(), &[false, false, true, true]);
        let expected = vec![
            vec![0, 0, 1, 0],
            vec![0, 0, -1, -1],
            vec![-1, 1, 0, 0],
            vec![0, 1, 0, 0],
        ];
        assert_eq!(qc.matrix(), &expected[..]);
        assert_eq!(qc.entry(4, 5), 0);
        assert_eq!(qc.mutable_labels(), vec![4, 5]);
        assert_eq!(qc.frozen_labels(), vec![1, 2]);
    }

    /// Words on the longest element that start with two solid crossings
    /// `(-i, i)` or `(i, i)` make the second crossing a mutable sink, with
    /// every incoming arrow simple.
    #[test]
    fn leading_double_letter_makes_second_crossing_a_sink() {
        let mut sinks_checked = 0usize;
        for (n, w0) in [(2usize, vec![2usize, 1]), (3, vec![3, 2, 1])] {
            for first_negative in [true, false] {
                for i in 1..n as i32 {
                    for tail in words(n, 3) {
                        let mut letters = vec![if first_negative { -i } else { i }, i];
                        letters.extend(&tail);
                        let w = DoubleBraidWord::new(n, letters.clone()).unwrap();
                        let u = Permutation::from_one_line(w0.clone()).unwrap();
                        let Ok(rec) = compute_pds(&u, &w) else {
                            continue;
                        };
                        if !rec.is_solid(1) || !rec.is_solid(2) {
                            continue;
                        }
                        let table = order_table(&rec).unwrap();
                        let q = quiver_from_half_arrows(&table).unwrap();
                        if !q.is_mutable(2) {
                            continue;
                        }
                        assert!(
                            q.is_mutable_sink(2),
                            "crossing 2 is not a sink for u = w0, word = {letters:?}:\n{:?}",
                            q.matrix()
                        );
                        for c in q.mutable_labels() {
                            let inbound = q.entry(c, 2);
                            assert!(
                                inbound == 0 || inbound == 1,
                                "arrow {c} → 2 has multiplicity {inbound} for word {letters:?}"
                            );
                        }
                        sinks_checked += 1;
                    }
                }
            }
        }
        assert!(sinks_checked > 50, "only {sinks_checked} sink instances");
    }

    /// All-positive words on the longest element starting `(i, i, …)` with
    /// the second crossing hollow: the first crossing is a frozen isolated
    /// vertex.
    #[test]
    fn hollow_second_crossing_isolates_first_vertex() {
        let mut checked = 0usize;
        for (n, w0) in [(2usize, vec![2usize, 1]), (3, vec![3, 2, 1])] {
            for i in 1..n as i32 {
                for len in 0..=4 {
                    for tail in words(n, len) {
                        if tail.iter().any(|&l| l < 0) {
                            continue;
                        }
                        let mut letters = vec![i, i];
                        letters.extend(&tail);
                        let w = DoubleBraidWord::new(n, letters.clone()).unwrap();
                        let u = Permutation::from_one_line(w0.clone()).unwrap();
                        let Ok(rec) = compute_pds(&u, &w) else {
                            continue;
                        };
                        if !rec.is_solid(1) || rec.is_solid(2) {
                            continue;
                        }
                        let table = order_table(&rec).unwrap();
                        let q = quiver_from_half_arrows(&table).unwrap();
                        assert!(!q.is_mutable(1), "crossing 1 should be frozen");
                        for &c in q.labels() {
                            assert_eq!(
                                q.entry(1, c),
                                0,
                                "vertex 1 is not isolated for word {letters:?}"
                            );
                        }
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 4, "only {checked} hollow instances");
    }

    /// `u = id`, word `(1, 1)` on two strands: a single arrow from the
    /// mutable crossing 2 to the frozen crossing 1.
    #[test]
    fn single_arrow_pair_exact() {
        let (qc, qh) = both_quivers(&[1, 2], 2, &[1, 1]);
        assert_eq!(qc, qh);
        assert_eq!(qc.labels(), &[1, 2]);
        assert_eq!(qc.mutable_flags(), &[false, true]);
        assert_eq!(qc.matrix(), &[vec![0, -1], vec![1, 0]][..]);
    }

    #[test]
    fn mutation_is_involutive_and_checks_labels() {
        let (q, _) = both_quivers(&[1, 3, 2], 3, &[-2, 1, 2, 1, -1]);
        for label in q.mutable_labels() {
            let once = q.mutate(label).unwrap();
            assert_ne!(once, q, "mutation at {label} must change arrows");
            assert_eq!(once.mutate(label).unwrap(), q);
        }
        assert_eq!(
            q.mutate(1),
            Err(QuiverError::FrozenVertex { label: 1 }),
        );
        assert_eq!(
            q.mutate(3),
            Err(QuiverError::UnknownLabel { label: 3 }),
        );
    }

    /// Mutating the cycle classes (`v_d ↦ -v_d`, `v_c ↦ v_c + [⟨v_c, v_d⟩]₊
    /// v_d`) and recomputing the pairing matrix agrees with matrix mutation.
    #[test]
    fn vector_mutation_matches_matrix_mutation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22026);
        for _ in 0..200 {
            let k = rng.gen_range(2..=6);
            let mut s = vec![vec![0i64; k]; k];
            for i in 0..k {
                for j in 0..i {
                    let v = rng.gen_range(-4..=4);
                    s[j][i] = v;
                    s[i][j] = -v;
                }
            }
            let d = rng.gen_range(0..k);
            // Matrix mutation.
            let labels: Vec<usize> = (1..=k).collect();
            let q = IceQuiver::new(labels.clone(), vec![true; k], s.clone()).unwrap();
            let mutated = q.mutate(d + 1).unwrap();
            // Vector mutation: new classes in terms of the old basis, then
            // the pairing matrix transforms by congruence.
            let mut m = vec![vec![0i64; k]; k];
            for (c, row) in m.iter_mut().enumerate() {
                if c == d {
                    row[d] = -1;
                } else {
                    row[c] = 1;
                    row[d] = s[c][d].max(0);
                }
            }
            let mut gram = vec![vec![0i64; k]; k];
            for i in 0..k {
                for j in 0..k {
                    let mut acc = 0;
                    for a in 0..k {
                        for b in 0..k {
                            acc += m[i][a] * s[a][b] * m[j][b];
                        }
                    }
                    gram[i][j] = acc;
                }
            }
            assert_eq!(mutated.matrix(), &gram[..]);
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let (q, _) = both_quivers(&[1, 3, 2], 3, &[-2, 1, 2, 1, -1]);
        let parsed = IceQuiver::from_json(&q.to_json()).unwrap();
        assert_eq!(parsed, q);
        // A non-antisymmetric matrix must be rejected on parse.
        let bad = r#"{"labels": [1, 2], "mutable": [true, true], "b": [[0, 1], [1, 0]]}"#;
        assert!(matches!(
            IceQuiver::from_json(bad),
            Err(QuiverError::Malformed { .. })
        ));
    }

    #[test]
    fn dot_rendering_marks_frozen_and_multiplicity() {
        let q = IceQuiver::new(
            vec![1, 2],
            vec![false, true],
            vec![vec![0, 2], vec![-2, 0]],
        )
        .unwrap();
        let dot = q.to_dot();
        assert!(dot.contains("v1 [label=\"1\", shape=box]"));
        assert!(dot.contains("v2 [label=\"2\", shape=ellipse]"));
        assert!(dot.contains("v1 -> v2 [label=\"2\"]"));
    }

    #[test]
    fn exchange_matrices_are_really_full_rank() {
        // Swept pairs all produce really-full-rank exchange matrices, and
        // mutation preserves the property.
        let mut checked = 0usize;
        for len in 0..=4 {
            for word in words(3, len) {
                let w = DoubleBraidWord::new(3, word).unwrap();
                for u in all_perms(3) {
                    let u = Permutation::from_one_line(u).unwrap();
                    let Ok(rec) = compute_pds(&u, &w) else {
                        continue;
                    };
                    let table = order_table(&rec).unwrap();
                    let q = quiver_from_half_arrows(&table).unwrap();
                    assert!(really_full_rank(&q), "not really full rank");
                    checked += 1;
                }
            }
        }
        assert!(checked > 300, "sweep covered only {checked} pairs");
        let (q, _) = both_quivers(&[1, 3, 2], 3, &[-2, 1, 2, 1, -1]);
        let mutated = q.mutate(4).unwrap().mutate(5).unwrap();
        assert!(really_full_rank(&mutated));
        // Handcrafted failures: a mutable vertex with no arrows at all, and
        // a doubled arrow whose lattice has index two.
        let zero = IceQuiver::new(vec![1], vec![true], vec![vec![0]]).unwrap();
        assert!(!really_full_rank(&zero));
        let doubled = IceQuiver::new(
            vec![1, 2],
            vec![true, true],
            vec![vec![0, 2], vec![-2, 0]],
        )
        .unwrap();
        assert!(!really_full_rank(&doubled));
        // No mutable vertices: vacuously full rank.
        let frozen_only =
            IceQuiver::new(vec![1, 2], vec![false, false], vec![vec![0, 0], vec![0, 0]])
                .unwrap();
        assert!(really_full_rank(&frozen_only));
    }

    #[test]
    fn sink_search_certifies_path_quiver() {
        // Oriented path 1 → 2 → 3.
        let q = IceQuiver::new(
            vec![1, 2, 3],
            vec![true; 3],
            vec![vec![0, 1, 0], vec![-1, 0, 1], vec![0, -1, 0]],
        )
        .unwrap();
        let SinkSearch::Certified(cert) = is_sink_recurrent(&q, 1000) else {
            panic!("path quiver should certify");
        };
        check_certificate(&q, &cert).unwrap();
        assert!(cert.node_count() >= 1);
        // A tampered certificate must be rejected.
        if let SinkCertificate::Sink { sink, .. } = &cert {
            let mut bad = cert.clone();
            if let SinkCertificate::Sink { sink: s, .. } = &mut bad {
                *s = if *sink == 1 { 2 } else { 1 };
            }
            assert!(check_certificate(&q, &bad).is_err());
        }
        // Certificates round-trip through JSON.
        let text = serde_json::to_string(&cert).unwrap();
        let back: SinkCertificate = serde_json::from_str(&text).unwrap();
        check_certificate(&q, &back).unwrap();
    }

    #[test]
    fn sink_search_gives_up_on_cyclic_double_arrows() {
        // The mutation class of this quiver never contains a sink.
        let q = IceQuiver::new(
            vec![1, 2, 3],
            vec![true; 3],
            vec![vec![0, 2, -2], vec![-2, 0, 2], vec![2, -2, 0]],
        )
        .unwrap();
        assert_eq!(is_sink_recurrent(&q, 10_000), SinkSearch::Unknown);
    }

    /// Swept pair quivers always admit a sink-recurrence certificate.
    #[test]
    fn swept_quivers_are_sink_recurrent() {
        let mut checked = 0usize;
        for len in 0..=4 {
            for word in words(3, len) {
                let w = DoubleBraidWord::new(3, word.clone()).unwrap();
                for u in all_perms(3) {
                    let u = Permutation::from_one_line(u).unwrap();
                    let Ok(rec) = compute_pds(&u, &w) else {
                        continue;
                    };
                    let table = order_table(&rec).unwrap();
                    let q = quiver_from_half_arrows(&table).unwrap();
                    let SinkSearch::Certified(cert) = is_sink_recurrent(&q, 20_000) else {
                        panic!("no certificate for u = {u}, word = {word:?}");
                    };
                    check_certificate(&q, &cert).unwrap();
                    checked += 1;
                }
            }
        }
        assert!(checked > 300, "sweep covered only {checked} pairs");
    }

    /// Dotted Young diagrams: the cycles fill all faces but one, and the
    /// planar-dual quiver equals the intersection quiver.
    #[test]
    fn le_diagram_face_quiver_matches_cycle_quiver() {
        let cases: [(&str, usize, usize); 4] = [
            ("++\n++", 2, 2),
            (".+\n++", 2, 2),
            ("+.\n.+", 2, 2),
            ("++.\n++", 2, 3),
        ];
        for (text, k, cols) in cases {
            let diagram = LeDiagram::parse(text, k, cols).unwrap();
            let (u, word) = diagram.to_pair().unwrap();
            let rec = compute_pds(&u, &word).unwrap();
            let sys = all_cycles(&rec).unwrap();
            let report = planar_face_quiver(&sys).unwrap();
            let qc = quiver_from_cycles(&sys);
            assert_eq!(
                report.quiver, qc,
                "face quiver differs from cycle quiver for {text:?}"
            );
            assert_eq!(report.face_of_cycle.len(), sys.labels.len());
        }
    }

    #[test]
    fn dual_agreement_sweep() {
        let full = std::env::var("BRAID_SWEEP").as_deref() == Ok("full");
        let max_len = if full { 5 } else { 4 };
        let mut checked = 0usize;
        for n in 2..=3 {
            for len in 0..=max_len {
                for word in words(n, len) {
                    let w = DoubleBraidWord::new(n, word.clone()).unwrap();
                    for u in all_perms(n) {
                        let u = Permutation::from_one_line(u).unwrap();
                        let Ok(rec) = compute_pds(&u, &w) else {
                            continue;
                        };
                        let sys = all_cycles(&rec).unwrap();
                        let table = order_table(&rec).unwrap();
                        let qc = quiver_from_cycles(&sys);
                        let qh = quiver_from_half_arrows(&table).unwrap();
                        assert_eq!(
                            qc, qh,
                            "construction mismatch for u = {u}, word = {word:?}"
                        );
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 500, "sweep covered only {checked} pairs");
    }
}

//! The three-dimensional wire-and-bridge graph of a pair.
//!
//! Each strand of the word becomes a *wire*: a polyline through the slices
//! `c = 0..m` whose dot at slice `c` is `(x, y) = (p, u₍c₎(p))`. Crossing a
//! hollow red letter `i` swaps the dots in columns `(i, i+1)`; crossing a
//! hollow blue letter `−j` swaps the dots in rows `(j, j+1)`; solid
//! crossings leave dots in place and instead attach a *bridge* between the
//! two wires at the letter's index pair. Wires end at *marked points* on
//! the left (`t = 0`, the identity diagonal) and loose ends on the right
//! (`t = m`), which [`PlabicGraph::trim`] removes.
//!
//! Bridge endpoints carry colors: a red bridge runs from a black vertex on
//! the lower-column wire to a white vertex on the higher column; a blue
//! bridge runs from white on the lower row to black on the higher row.
//! Each vertex also carries a cyclic (counterclockwise) order of its
//! incident edges — at red bridge endpoints `(bridge, right wire, left
//! wire)`, at blue endpoints `(bridge, left wire, right wire)` — which
//! turns the graph into a ribbon graph with well-defined faces and genus.

use crate::braid::SubexpressionRecord;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Endpoint color of a bridge.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Color {
    Black,
    White,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum VertexKind {
    /// Left end of a wire, at `t = 0`.
    Marked { strand: usize },
    /// Loose right end of a wire, at `t = m` (removed by trimming).
    RightEnd { wire: usize },
    /// The `≺`-smaller endpoint of the bridge at a solid crossing.
    BridgeStart { crossing: usize },
    /// The `≺`-larger endpoint.
    BridgeEnd { crossing: usize },
}

/// A graph vertex, positioned at column `x`, row `y`, and doubled time
/// `t2` (slices sit at even `t2 = 2c`, bridges at odd `t2 = 2c − 1`).
#[derive(Clone, Debug, Serialize)]
pub struct Vertex {
    pub kind: VertexKind,
    pub wire: usize,
    pub x: usize,
    pub y: usize,
    pub t2: i64,
    pub color: Option<Color>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum EdgeKind {
    /// A run of wire between two consecutive vertices on it.
    Wire,
    /// The bridge of a solid crossing (`red` records the letter's color).
    Bridge { crossing: usize, red: bool },
}

/// An edge; `v1` is the left end of a wire run, or the `≺`-smaller
/// endpoint of a bridge. `path` is the polyline `(x, y, t2)` for
/// rendering, including bends at hollow crossings.
#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub v1: usize,
    pub v2: usize,
    pub path: Vec<(usize, usize, i64)>,
}

/// One wire: its dot at every slice and its vertices in time order.
#[derive(Clone, Debug, Serialize)]
pub struct Wire {
    /// 1-based strand label; the wire starts at marked point
    /// `(strand, strand)`.
    pub strand: usize,
    /// `(x, y)` at slice `c` for `c = 0..=m`.
    pub slices: Vec<(usize, usize)>,
    /// Vertex ids in increasing `t2`.
    pub vertex_ids: Vec<usize>,
    /// `edge_ids[i]` joins `vertex_ids[i]` to `vertex_ids[i + 1]`.
    pub edge_ids: Vec<usize>,
}

/// The bridge of a solid crossing.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BridgeInfo {
    pub crossing: usize,
    pub red: bool,
    /// Vertex id of the `≺`-smaller endpoint on the lower-index wire side.
    pub s1: usize,
    pub s2: usize,
    pub edge: usize,
    /// Wire ids of the two endpoints.
    pub wire1: usize,
    pub wire2: usize,
}

/// A directed edge traversal: along `edge` from `v1` to `v2` when
/// `forward`, else from `v2` to `v1`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct HalfEdge {
    pub edge: usize,
    pub forward: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlabicGraph {
    pub n: usize,
    pub m: usize,
    pub letters: Vec<i32>,
    pub solid: Vec<bool>,
    pub wires: Vec<Wire>,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub bridges: BTreeMap<usize, BridgeInfo>,
    pub trimmed: bool,
}

/// Which coordinate pair a two-dimensional view keeps.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Projection {
    /// `(t, x)`: time and column.
    Red,
    /// `(t, y)`: time and row.
    Blue,
}

/// Builds the untrimmed graph of a pair.
pub fn build_graph(record: &SubexpressionRecord) -> PlabicGraph {
    let n = record.n();
    let m = record.m();
    // Track every wire's dot rightward from the identity diagonal.
    let mut tracks: Vec<Vec<(usize, usize)>> = (1..=n).map(|k| vec![(k, k)]).collect();
    for c in 1..=m {
        let letter = record.word().letter(c);
        let i = letter.unsigned_abs() as usize;
        for k in 0..n {
            let (x, y) = *tracks[k].last().unwrap();
            let moved = if record.is_solid(c) {
                (x, y)
            } else if letter > 0 {
                // Hollow red: dots in columns i, i+1 trade columns.
                if x == i {
                    (i + 1, y)
                } else if x == i + 1 {
                    (i, y)
                } else {
                    (x, y)
                }
            } else {
                // Hollow blue: dots in rows i, i+1 trade rows.
                if y == i {
                    (x, i + 1)
                } else if y == i + 1 {
                    (x, i)
                } else {
                    (x, y)
                }
            };
            tracks[k].push(moved);
        }
        // The dots at slice c must realize the slice permutation.
        debug_assert!(
            (0..n).all(|k| {
                let (x, y) = tracks[k][c];
                record.u_at(c).apply(x) == y
            }),
            "wire tracks must follow the slice permutations"
        );
    }

    // Attachment events per wire: (t2, pending vertex).
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut events: Vec<Vec<(i64, usize)>> = vec![Vec::new(); n];
    let mut bridge_meta: BTreeMap<usize, (bool, usize, usize)> = BTreeMap::new();
    let wire_at = |tracks: &Vec<Vec<(usize, usize)>>, c: usize, x: usize, y: usize| -> usize {
        (0..n)
            .find(|&k| tracks[k][c] == (x, y))
            .expect("a wire passes through every dot")
    };
    for k in 0..n {
        events[k].push((0, vertices.len()));
        vertices.push(Vertex {
            kind: VertexKind::Marked { strand: k + 1 },
            wire: k,
            x: k + 1,
            y: k + 1,
            t2: 0,
        color: None,
        });
    }
    for c in 1..=m {
        if !record.is_solid(c) {
            continue;
        }
        let letter = record.word().letter(c);
        let red = letter > 0;
        let i = letter.unsigned_abs() as usize;
        let u_c = record.u_at(c);
        // The two dots the bridge joins, in `≺` order.
        let (d1, d2) = if red {
            ((i, u_c.apply(i)), (i + 1, u_c.apply(i + 1)))
        } else {
            let p1 = u_c.inverse().apply(i);
            let p2 = u_c.inverse().apply(i + 1);
            ((p1, i), (p2, i + 1))
        };
        let (c1, c2) = if red {
            (Color::Black, Color::White)
        } else {
            (Color::White, Color::Black)
        };
        let t2 = 2 * c as i64 - 1;
        let k1 = wire_at(&tracks, c, d1.0, d1.1);
        let k2 = wire_at(&tracks, c, d2.0, d2.1);
        let s1 = vertices.len();
        events[k1].push((t2, s1));
        vertices.push(Vertex {
            kind: VertexKind::BridgeStart { crossing: c },
            wire: k1,
            x: d1.0,
            y: d1.1,
            t2,
            color: Some(c1),
        });
        let s2 = vertices.len();
        events[k2].push((t2, s2));
        vertices.push(Vertex {
            kind: VertexKind::BridgeEnd { crossing: c },
            wire: k2,
            x: d2.0,
            y: d2.1,
            t2,
            color: Some(c2),
        });
        bridge_meta.insert(c, (red, s1, s2));
    }
    for k in 0..n {
        let (x, y) = tracks[k][m];
        events[k].push((2 * m as i64, vertices.len()));
        vertices.push(Vertex {
            kind: VertexKind::RightEnd { wire: k },
            wire: k,
            x,
            y,
            t2: 2 * m as i64,
            color: None,
        });
    }

    // Wire edges between consecutive events, with hollow bends recorded.
    let mut edges: Vec<Edge> = Vec::new();
    let mut wires: Vec<Wire> = Vec::new();
    for k in 0..n {
        events[k].sort_by_key(|&(t2, _)| t2);
        let mut edge_ids = Vec::new();
        for w in events[k].windows(2) {
            let (t2a, va) = w[0];
            let (t2b, vb) = w[1];
            let mut path = vec![(vertices[va].x, vertices[va].y, t2a)];
            // Bends where the track moves strictly inside (t2a, t2b).
            for c in 1..=m {
                let t2c = 2 * c as i64 - 1;
                if t2c <= t2a || t2c >= t2b {
                    continue;
                }
                if tracks[k][c - 1] != tracks[k][c] {
                    let (xr, yr) = tracks[k][c];
                    let (xl, yl) = tracks[k][c - 1];
                    path.push((xr, yr, t2c));
                    path.push((xl, yl, t2c));
                }
            }
            path.push((vertices[vb].x, vertices[vb].y, t2b));
            edge_ids.push(edges.len());
            edges.push(Edge {
                kind: EdgeKind::Wire,
                v1: va,
                v2: vb,
                path,
            });
        }
        wires.push(Wire {
            strand: k + 1,
            slices: tracks[k].clone(),
            vertex_ids: events[k].iter().map(|&(_, v)| v).collect(),
            edge_ids,
        });
    }
    // Bridge edges.
    let mut bridges = BTreeMap::new();
    for (&c, &(red, s1, s2)) in &bridge_meta {
        let edge = edges.len();
        edges.push(Edge {
            kind: EdgeKind::Bridge { crossing: c, red },
            v1: s1,
            v2: s2,
            path: vec![
                (vertices[s1].x, vertices[s1].y, vertices[s1].t2),
                (vertices[s2].x, vertices[s2].y, vertices[s2].t2),
            ],
        });
        bridges.insert(
            c,
            BridgeInfo {
                crossing: c,
                red,
                s1,
                s2,
                edge,
                wire1: vertices[s1].wire,
                wire2: vertices[s2].wire,
            },
        );
    }

    PlabicGraph {
        n,
        m,
        letters: record.word().letters().to_vec(),
        solid: (1..=m).map(|c| record.is_solid(c)).collect(),
        wires,
        vertices,
        edges,
        bridges,
        trimmed: false,
    }
}

impl PlabicGraph {
    pub fn is_solid(&self, c: usize) -> bool {
        self.solid[c - 1]
    }

    /// Degree of a vertex.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.v1 == v || e.v2 == v).count()
    }

    /// Removes the loose right ends of all wires (and their trailing wire
    /// runs), renumbering vertices and edges.
    pub fn trim(&self) -> PlabicGraph {
        let keep_v: Vec<bool> = self
            .vertices
            .iter()
            .map(|v| !matches!(v.kind, VertexKind::RightEnd { .. }))
            .collect();
        let mut v_map = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if keep_v[i] {
                v_map[i] = vertices.len();
                vertices.push(v.clone());
            }
        }
        let mut e_map = vec![usize::MAX; self.edges.len()];
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if keep_v[e.v1] && keep_v[e.v2] {
                e_map[i] = edges.len();
                let mut e2 = e.clone();
                e2.v1 = v_map[e.v1];
                e2.v2 = v_map[e.v2];
                edges.push(e2);
            }
        }
        let wires = self
            .wires
            .iter()
            .map(|w| {
                let vertex_ids: Vec<usize> = w
                    .vertex_ids
                    .iter()
                    .filter(|&&v| keep_v[v])
                    .map(|&v| v_map[v])
                    .collect();
                let edge_ids: Vec<usize> = w
                    .edge_ids
                    .iter()
                    .filter(|&&e| e_map[e] != usize::MAX)
                    .map(|&e| e_map[e])
                    .collect();
                Wire {
                    strand: w.strand,
                    slices: w.slices.clone(),
                    vertex_ids,
                    edge_ids,
                }
            })
            .collect();
        let bridges = self
            .bridges
            .iter()
            .map(|(&c, b)| {
                (
                    c,
                    BridgeInfo {
                        crossing: b.crossing,
                        red: b.red,
                        s1: v_map[b.s1],
                        s2: v_map[b.s2],
                        edge: e_map[b.edge],
                        wire1: b.wire1,
                        wire2: b.wire2,
                    },
                )
            })
            .collect();
        PlabicGraph {
            n: self.n,
            m: self.m,
            letters: self.letters.clone(),
            solid: self.solid.clone(),
            wires,
            vertices,
            edges,
            bridges,
            trimmed: true,
        }
    }

    /// The counterclockwise cyclic order of `(edge, end)` pairs at each
    /// vertex, where `end` is 0 at `v1` and 1 at `v2`. Bridge endpoints
    /// order their edges `(bridge, right wire, left wire)` when the bridge
    /// is red and `(bridge, left wire, right wire)` when blue; other
    /// vertices have at most one edge.
    pub fn rotations(&self) -> Vec<Vec<(usize, u8)>> {
        let mut rot: Vec<Vec<(usize, u8)>> = vec![Vec::new(); self.vertices.len()];
        for (v, vert) in self.vertices.iter().enumerate() {
            let mut bridge = None;
            let mut left = None;
            let mut right = None;
            for (ei, e) in self.edges.iter().enumerate() {
                let end = if e.v1 == v {
                    0u8
                } else if e.v2 == v {
                    1u8
                } else {
                    continue;
                };
                match e.kind {
                    EdgeKind::Bridge { .. } => bridge = Some((ei, end)),
                    EdgeKind::Wire => {
                        // A wire edge with v at its left end leaves to the
                        // right.
                        if end == 0 {
                            right = Some((ei, end));
                        } else {
                            left = Some((ei, end));
                        }
                    }
                }
            }
            let red = match vert.kind {
                VertexKind::BridgeStart { crossing } | VertexKind::BridgeEnd { crossing } => {
                    self.bridges[&crossing].red
                }
                _ => {
                    rot[v] = [left, right, bridge].into_iter().flatten().collect();
                    continue;
                }
            };
            let order = if red {
                [bridge, right, left]
            } else {
                [bridge, left, right]
            };
            rot[v] = order.into_iter().flatten().collect();
        }
        rot
    }

    /// The faces of the ribbon structure, each a closed walk of directed
    /// edges. The successor of a half-edge is obtained at its head by
    /// stepping counterclockwise past the incoming edge.
    pub fn face_walks(&self) -> Vec<Vec<HalfEdge>> {
        let rot = self.rotations();
        let index_at = |v: usize, edge: usize, end: u8| -> usize {
            rot[v]
                .iter()
                .position(|&(e, k)| e == edge && k == end)
                .expect("incident edge listed in rotation")
        };
        let next = |h: HalfEdge| -> HalfEdge {
            let e = &self.edges[h.edge];
            let (head, end_at_head) = if h.forward { (e.v2, 1u8) } else { (e.v1, 0u8) };
            let idx = index_at(head, h.edge, end_at_head);
            let (e2, end2) = rot[head][(idx + 1) % rot[head].len()];
            HalfEdge {
                edge: e2,
                forward: end2 == 0,
            }
        };
        let mut seen = vec![[false, false]; self.edges.len()];
        let mut faces = Vec::new();
        for e in 0..self.edges.len() {
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
        faces
    }

    /// Connected components as sorted vertex lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut Vec<usize>, mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        for e in &self.edges {
            let (ra, rb) = (find(&mut parent, e.v1), find(&mut parent, e.v2));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.vertices.len() {
            groups.entry(find(&mut parent, v)).or_default().push(v);
        }
        groups.into_values().collect()
    }

    /// Genus of each connected component, from the Euler formula
    /// `V − E + F = 2 − 2g` applied per component.
    pub fn genus_per_component(&self) -> Vec<usize> {
        let comps = self.components();
        let mut comp_of = vec![0usize; self.vertices.len()];
        for (ci, comp) in comps.iter().enumerate() {
            for &v in comp {
                comp_of[v] = ci;
            }
        }
        let mut e_count = vec![0i64; comps.len()];
        for e in &self.edges {
            e_count[comp_of[e.v1]] += 1;
        }
        let mut f_count = vec![0i64; comps.len()];
        for face in self.face_walks() {
            f_count[comp_of[self.edges[face[0].edge].v1]] += 1;
        }
        comps
            .iter()
            .enumerate()
            .map(|(ci, comp)| {
                let v = comp.len() as i64;
                // An isolated vertex is a sphere with one face.
                let f = if e_count[ci] == 0 { 1 } else { f_count[ci] };
                let chi = v - e_count[ci] + f;
                assert!(chi <= 2 && chi % 2 == 0, "Euler characteristic {chi}");
                ((2 - chi) / 2) as usize
            })
            .collect()
    }

    /// True when every component has genus zero.
    pub fn is_planar(&self) -> bool {
        self.genus_per_component().iter().all(|&g| g == 0)
    }

    /// Two-dimensional SVG rendering of the chosen projection.
    pub fn to_svg(&self, projection: Projection) -> String {
        let sx = 36.0; // pixels per unit of t2
        let sy = 64.0; // pixels per row
        let margin = 48.0;
        let coord = |x: usize, y: usize, t2: i64| -> (f64, f64) {
            let level = match projection {
                Projection::Red => x,
                Projection::Blue => y,
            };
            (
                margin + t2 as f64 * sx,
                margin + (self.n - level) as f64 * sy,
            )
        };
        let width = margin * 2.0 + (2 * self.m) as f64 * sx;
        let height = margin * 2.0 + (self.n - 1) as f64 * sy;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
        );
        let axis = match projection {
            Projection::Red => "column",
            Projection::Blue => "row",
        };
        let _ = writeln!(
            s,
            "  <title>wire diagram ({axis} view), word {}</title>",
            self.letters
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        for e in &self.edges {
            let pts: Vec<String> = e
                .path
                .iter()
                .map(|&(x, y, t2)| {
                    let (px, py) = coord(x, y, t2);
                    format!("{px:.1},{py:.1}")
                })
                .collect();
            let (stroke, width) = match e.kind {
                EdgeKind::Wire => ("#888888", 1.5),
                EdgeKind::Bridge { red: true, .. } => ("#cc2222", 2.5),
                EdgeKind::Bridge { red: false, .. } => ("#2244cc", 2.5),
            };
            let _ = writeln!(
                s,
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
                pts.join(" ")
            );
        }
        for v in &self.vertices {
            let (px, py) = coord(v.x, v.y, v.t2);
            match (v.kind, v.color) {
                (VertexKind::Marked { strand }, _) => {
                    let _ = writeln!(
                        s,
                        "  <rect x=\"{:.1}\" y=\"{:.1}\" width=\"8\" height=\"8\" fill=\"#333333\"/>",
                        px - 4.0,
                        py - 4.0
                    );
                    let _ = writeln!(
                        s,
                        "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{}</text>",
                        px - 8.0,
                        py + 4.0,
                        strand
                    );
                }
                (_, Some(color)) => {
                    let fill = match color {
                        Color::Black => "#000000",
                        Color::White => "#ffffff",
                    };
                    let _ = writeln!(
                        s,
                        "  <circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"5\" fill=\"{fill}\" stroke=\"#000000\" stroke-width=\"1.5\"/>"
                    );
                }
                _ => {
                    let _ = writeln!(
                        s,
                        "  <circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"3\" fill=\"#888888\"/>"
                    );
                }
            }
        }
        for b in self.bridges.values() {
            let v = &self.vertices[b.s1];
            let (px, py) = coord(v.x, v.y, v.t2);
            let _ = writeln!(
                s,
                "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"#555555\">{}</text>",
                px + 6.0,
                py - 6.0,
                b.crossing
            );
        }
        s.push_str("</svg>\n");
        s
    }

    /// Graphviz rendering of the combinatorial graph.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph wires {\n  node [shape=circle];\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let (label, shape, fill) = match (v.kind, v.color) {
                (VertexKind::Marked { strand }, _) => {
                    (format!("m{strand}"), "square", "#dddddd")
                }
                (VertexKind::RightEnd { wire }, _) => (format!("r{}", wire + 1), "point", "#dddddd"),
                (VertexKind::BridgeStart { crossing }, c) => (
                    format!("b{crossing}s"),
                    "circle",
                    if c == Some(Color::Black) { "#000000" } else { "#ffffff" },
                ),
                (VertexKind::BridgeEnd { crossing }, c) => (
                    format!("b{crossing}e"),
                    "circle",
                    if c == Some(Color::Black) { "#000000" } else { "#ffffff" },
                ),
            };
            let fontcolor = if fill == "#000000" { "white" } else { "black" };
            let _ = writeln!(
                s,
                "  v{i} [label=\"{label}\" shape={shape} style=filled fillcolor=\"{fill}\" fontcolor={fontcolor}];"
            );
        }
        for e in &self.edges {
            let attr = match e.kind {
                EdgeKind::Wire => String::from("color=gray"),
                EdgeKind::Bridge { crossing, red } => format!(
                    "color={} label=\"{crossing}\"",
                    if red { "red" } else { "blue" }
                ),
            };
            let _ = writeln!(s, "  v{} -- v{} [{attr}];", e.v1, e.v2);
        }
        s.push_str("}\n");
        s
    }

    /// JSON rendering of the full structure.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }
}

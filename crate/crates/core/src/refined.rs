//! The 2-skeleton of the lattice subdivided along its intersection with a
//! surface.
//!
//! Each lattice edge is cut at the points where the surface crosses it, and
//! each square is cut by the arcs of the intersection curves lying in it.
//! Faces are found by walking counterclockwise around the square and turning
//! into every arc met on the way; closed arcs not touching the square's
//! boundary become holes of the face containing them.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::curves::{ch, LatticeSkeleton, Skeleton, SkeletonPath};
use crate::error::{Error, Result};
use crate::geometry::{floor_int, point_in_polygon, signed_area2, Point3, Rat};
use crate::lattice::{add, Cell, Chain, HasDim, LatticeChain};
use crate::mesh::Side;

/// A point where the surface crosses a lattice edge, in lattice units.
#[derive(Clone, Debug)]
pub struct HitInfo {
    pub edge: Cell,
    pub point: Point3,
    pub triangle: usize,
}

impl HitInfo {
    pub fn param(&self) -> &Rat {
        &self.point[self.edge.edge_axis().unwrap().index()]
    }
}

/// A piece of an intersection curve inside one square. Open arcs run from
/// hit `start` to hit `end`; closed arcs have neither.
#[derive(Clone, Debug)]
pub struct ArcInfo {
    pub square: Cell,
    pub curve: usize,
    pub start: Option<usize>,
    pub end: Option<usize>,
    /// Polyline in lattice units; for open arcs the first and last points
    /// are the hit points, for closed arcs the closing segment is implied.
    pub points: Vec<Point3>,
    /// Mesh triangles crossed, in order.
    pub triangles: Vec<usize>,
    /// Mesh edges crossed: `(from triangle, to triangle, mesh edge)`.
    pub crossings: Vec<(usize, usize, (usize, usize))>,
    /// Length in world units.
    pub length: f64,
}

impl ArcInfo {
    pub fn is_closed(&self) -> bool {
        self.start.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RVertex {
    Lattice([i64; 3]),
    Hit(usize),
    /// Base point of a closed arc.
    Loop(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum REdge {
    /// Piece `piece` of a lattice edge, counted from its anchor.
    LatticePiece { edge: Cell, piece: u32 },
    Arc(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RFace {
    pub square: Cell,
    pub idx: u32,
}

impl HasDim for REdge {
    fn cell_dim(&self) -> usize {
        1
    }
}

impl HasDim for RFace {
    fn cell_dim(&self) -> usize {
        2
    }
}

pub type RefinedChain1 = Chain<REdge>;
pub type RefinedChain2 = Chain<RFace>;

#[derive(Clone, Debug)]
pub struct FaceData {
    /// Outer boundary cycle first, then holes.
    pub cycles: Vec<Vec<(REdge, i8)>>,
    pub side: Side,
}

#[derive(Clone, Debug)]
pub struct SquareSub {
    pub faces: Vec<FaceData>,
}

#[derive(Clone, Debug)]
pub struct RefinedComplex {
    pub hits: Vec<HitInfo>,
    pub arcs: Vec<ArcInfo>,
    /// Hits on each lattice edge in increasing order along the edge.
    pub edge_hits: BTreeMap<Cell, Vec<usize>>,
    pub squares: BTreeMap<Cell, SquareSub>,
    /// For each arc, the faces having it with coefficient +1 and -1.
    pub arc_faces: Vec<(RFace, RFace)>,
    x_lines: HashMap<[i64; 2], Vec<Rat>>,
}

/// A point on the boundary of a square, in counterclockwise order.
#[derive(Clone, Debug)]
enum Pos {
    Corner([i64; 3]),
    Hit(usize),
}

impl RefinedComplex {
    pub fn build(hits: Vec<HitInfo>, arcs: Vec<ArcInfo>) -> Result<RefinedComplex> {
        let mut edge_hits: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
        for (i, h) in hits.iter().enumerate() {
            edge_hits.entry(h.edge).or_default().push(i);
        }
        for list in edge_hits.values_mut() {
            list.sort_by(|&a, &b| hits[a].param().cmp(hits[b].param()));
            for w in list.windows(2) {
                if hits[w[0]].param() == hits[w[1]].param() {
                    return Err(Error::GeneralPosition(format!(
                        "two surface crossings coincide on lattice edge {}",
                        hits[w[0]].edge
                    )));
                }
            }
        }
        let mut x_lines: HashMap<[i64; 2], Vec<Rat>> = HashMap::new();
        for h in &hits {
            if h.edge.edge_axis() == Some(crate::lattice::Axis::X) {
                x_lines
                    .entry([h.edge.anchor[1], h.edge.anchor[2]])
                    .or_default()
                    .push(h.point[0].clone());
            }
        }
        let mut cx = RefinedComplex {
            hits,
            arcs,
            edge_hits,
            squares: BTreeMap::new(),
            arc_faces: Vec::new(),
            x_lines,
        };
        let mut by_square: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
        for (i, a) in cx.arcs.iter().enumerate() {
            by_square.entry(a.square).or_default().push(i);
        }
        let mut squares = BTreeMap::new();
        for (sq, arc_ids) in &by_square {
            squares.insert(*sq, cx.subdivide(*sq, arc_ids)?);
        }
        cx.squares = squares;
        let mut plus: Vec<Option<RFace>> = vec![None; cx.arcs.len()];
        let mut minus: Vec<Option<RFace>> = vec![None; cx.arcs.len()];
        for (sq, sub) in &cx.squares {
            for (idx, f) in sub.faces.iter().enumerate() {
                let face = RFace { square: *sq, idx: idx as u32 };
                for (e, s) in f.cycles.iter().flatten() {
                    if let REdge::Arc(a) = e {
                        let slot = if *s > 0 { &mut plus[*a] } else { &mut minus[*a] };
                        if slot.replace(face).is_some() {
                            return Err(Error::Verification(format!("arc {a} bounds a face twice")));
                        }
                    }
                }
            }
        }
        cx.arc_faces = plus
            .into_iter()
            .zip(minus)
            .enumerate()
            .map(|(a, (p, m))| match (p, m) {
                (Some(p), Some(m)) => Ok((p, m)),
                _ => Err(Error::Verification(format!("arc {a} does not separate two faces"))),
            })
            .collect::<Result<_>>()?;
        Ok(cx)
    }

    /// Side of a lattice vertex: parity of surface crossings on the ray in
    /// the +x direction along its lattice line.
    pub fn vertex_side(&self, p: [i64; 3]) -> Side {
        let x = Rat::from_integer(p[0].into());
        let n = self
            .x_lines
            .get(&[p[1], p[2]])
            .map_or(0, |v| v.iter().filter(|t| **t > x).count());
        if n % 2 == 1 {
            Side::Interior
        } else {
            Side::Exterior
        }
    }

    fn plane_coords(sq: Cell, p: &Point3) -> (Rat, Rat) {
        let (a, b) = sq.square_frame().unwrap();
        (p[a.index()].clone(), p[b.index()].clone())
    }

    fn subdivide(&self, sq: Cell, arc_ids: &[usize]) -> Result<SquareSub> {
        let (a, b) = sq.square_frame().unwrap();
        let p = sq.anchor;
        let corners = sq.square_corners().unwrap();
        // Boundary edges in counterclockwise order with their direction.
        let sides = [
            (Cell::edge(p, a), 1i8),
            (Cell::edge(add(p, a.unit()), b), 1),
            (Cell::edge(add(p, b.unit()), a), -1),
            (Cell::edge(p, b), -1),
        ];
        let mut pos: Vec<Pos> = Vec::new();
        let mut seg: Vec<(REdge, i8)> = Vec::new();
        for (k, (edge, dir)) in sides.iter().enumerate() {
            pos.push(Pos::Corner(corners[k]));
            let hs = self.edge_hits.get(edge).cloned().unwrap_or_default();
            let m = hs.len() as u32;
            if *dir > 0 {
                for (i, h) in hs.iter().enumerate() {
                    seg.push((REdge::LatticePiece { edge: *edge, piece: i as u32 }, 1));
                    pos.push(Pos::Hit(*h));
                }
                seg.push((REdge::LatticePiece { edge: *edge, piece: m }, 1));
            } else {
                for (i, h) in hs.iter().enumerate().rev() {
                    seg.push((REdge::LatticePiece { edge: *edge, piece: i as u32 + 1 }, -1));
                    pos.push(Pos::Hit(*h));
                }
                seg.push((REdge::LatticePiece { edge: *edge, piece: 0 }, -1));
            }
        }
        let np = pos.len();
        let hit_pos: HashMap<usize, usize> = pos
            .iter()
            .enumerate()
            .filter_map(|(i, q)| match q {
                Pos::Hit(h) => Some((*h, i)),
                Pos::Corner(_) => None,
            })
            .collect();
        // chord[i] = (arc, other end, sign of traversal from i).
        let mut chord: Vec<Option<(usize, usize, i8)>> = vec![None; np];
        let mut loops = Vec::new();
        for &ai in arc_ids {
            let arc = &self.arcs[ai];
            match (arc.start, arc.end) {
                (Some(s), Some(e)) => {
                    let (i, j) = match (hit_pos.get(&s), hit_pos.get(&e)) {
                        (Some(&i), Some(&j)) => (i, j),
                        _ => {
                            return Err(Error::Verification(format!(
                                "arc {ai} ends off the boundary of square {sq}"
                            )))
                        }
                    };
                    if chord[i].is_some() || chord[j].is_some() || i == j {
                        return Err(Error::Verification(format!(
                            "two arcs share a crossing point in square {sq}"
                        )));
                    }
                    chord[i] = Some((ai, j, 1));
                    chord[j] = Some((ai, i, -1));
                }
                _ => loops.push(ai),
            }
        }
        if let Some(i) = (0..np).find(|&i| matches!(pos[i], Pos::Hit(_)) && chord[i].is_none()) {
            return Err(Error::Verification(format!(
                "crossing at boundary position {i} of square {sq} has no arc"
            )));
        }
        let point2 = |q: &Pos| -> (Rat, Rat) {
            match q {
                Pos::Corner(c) => (
                    Rat::from_integer(c[a.index()].into()),
                    Rat::from_integer(c[b.index()].into()),
                ),
                Pos::Hit(h) => Self::plane_coords(sq, &self.hits[*h].point),
            }
        };
        // Trace faces cut out by chords.
        let mut seg_face = vec![usize::MAX; np];
        let mut faces: Vec<(Vec<(REdge, i8)>, Vec<(Rat, Rat)>, bool)> = Vec::new();
        for start in 0..np {
            if seg_face[start] != usize::MAX {
                continue;
            }
            let fi = faces.len();
            let mut cycle = Vec::new();
            let mut poly = Vec::new();
            let mut has_corner = false;
            let mut cur = start;
            loop {
                seg_face[cur] = fi;
                if matches!(pos[cur], Pos::Corner(_)) {
                    has_corner = true;
                }
                poly.push(point2(&pos[cur]));
                cycle.push(seg[cur]);
                let q = (cur + 1) % np;
                cur = match chord[q] {
                    Some((ai, r, s)) => {
                        poly.push(point2(&pos[q]));
                        let pts = &self.arcs[ai].points;
                        let inner = &pts[1..pts.len() - 1];
                        if s > 0 {
                            poly.extend(inner.iter().map(|x| Self::plane_coords(sq, x)));
                        } else {
                            poly.extend(inner.iter().rev().map(|x| Self::plane_coords(sq, x)));
                        }
                        cycle.push((REdge::Arc(ai), s));
                        r
                    }
                    None => q,
                };
                if cur == start {
                    break;
                }
                if seg_face[cur] != usize::MAX {
                    return Err(Error::Verification(format!("face tracing failed in square {sq}")));
                }
            }
            faces.push((cycle, poly, has_corner));
        }
        // Closed arcs: nesting and the region containing each.
        let loop_polys: Vec<Vec<(Rat, Rat)>> = loops
            .iter()
            .map(|&ai| self.arcs[ai].points.iter().map(|x| Self::plane_coords(sq, x)).collect())
            .collect();
        let nchord = faces.len();
        let mut parent: Vec<usize> = Vec::with_capacity(loops.len());
        for (li, lp) in loop_polys.iter().enumerate() {
            let probe = (&lp[0].0, &lp[0].1);
            let containing: Vec<usize> = (0..loops.len())
                .filter(|&o| o != li && point_in_polygon(probe, &loop_polys[o]))
                .collect();
            // The innermost container is contained in all the others.
            let inner = containing.iter().copied().find(|&o| {
                let q = (&loop_polys[o][0].0, &loop_polys[o][0].1);
                containing
                    .iter()
                    .all(|&o2| o2 == o || point_in_polygon(q, &loop_polys[o2]))
            });
            parent.push(match inner {
                Some(o) => nchord + o,
                None => (0..nchord)
                    .find(|&f| point_in_polygon(probe, &faces[f].1))
                    .ok_or_else(|| {
                        Error::Verification(format!("closed arc in square {sq} lies in no face"))
                    })?,
            });
        }
        let mut cycles: Vec<Vec<Vec<(REdge, i8)>>> = faces.iter().map(|f| vec![f.0.clone()]).collect();
        for (li, &ai) in loops.iter().enumerate() {
            let ccw = signed_area2(&loop_polys[li]) > Rat::from_integer(0.into());
            let s: i8 = if ccw { 1 } else { -1 };
            cycles.push(vec![vec![(REdge::Arc(ai), s)]]);
        }
        for (li, &ai) in loops.iter().enumerate() {
            let ccw = signed_area2(&loop_polys[li]) > Rat::from_integer(0.into());
            let s: i8 = if ccw { -1 } else { 1 };
            cycles[parent[li]].push(vec![(REdge::Arc(ai), s)]);
        }
        // Sides: faces touching a corner take the corner's side; crossing an
        // arc switches sides.
        let nf = cycles.len();
        let mut side: Vec<Option<Side>> = vec![None; nf];
        let mut queue = VecDeque::new();
        for (fi, f) in faces.iter().enumerate() {
            if f.2 {
                let c = (0..np)
                    .filter(|&i| seg_face[i] == fi)
                    .find_map(|i| match pos[i] {
                        Pos::Corner(c) => Some(c),
                        Pos::Hit(_) => None,
                    })
                    .unwrap();
                side[fi] = Some(self.vertex_side(c));
                queue.push_back(fi);
            }
        }
        let mut arc_to_faces: HashMap<usize, Vec<usize>> = HashMap::new();
        for (fi, cs) in cycles.iter().enumerate() {
            for (e, _) in cs.iter().flatten() {
                if let REdge::Arc(a) = e {
                    arc_to_faces.entry(*a).or_default().push(fi);
                }
            }
        }
        while let Some(fi) = queue.pop_front() {
            let s = side[fi].unwrap();
            for (e, _) in cycles[fi].iter().flatten() {
                if let REdge::Arc(a) = e {
                    for &g in &arc_to_faces[a] {
                        if g == fi {
                            continue;
                        }
                        match side[g] {
                            None => {
                                side[g] = Some(s.other());
                                queue.push_back(g);
                            }
                            Some(t) if t == s => {
                                return Err(Error::Verification(format!(
                                    "inconsistent sides across arc {a} in square {sq}"
                                )))
                            }
                            Some(_) => {}
                        }
                    }
                }
            }
        }
        let faces = cycles
            .into_iter()
            .zip(side)
            .map(|(cycles, s)| FaceData {
                cycles,
                side: s.expect("every face is reached from a corner face"),
            })
            .collect();
        Ok(SquareSub { faces })
    }

    /// Number of pieces a lattice edge is cut into.
    pub fn pieces(&self, edge: &Cell) -> u32 {
        self.edge_hits.get(edge).map_or(0, |v| v.len() as u32) + 1
    }

    pub fn faces_of(&self, sq: &Cell) -> Vec<RFace> {
        let n = self.squares.get(sq).map_or(1, |s| s.faces.len());
        (0..n as u32).map(|idx| RFace { square: *sq, idx }).collect()
    }

    pub fn face_data(&self, f: &RFace) -> Option<&FaceData> {
        self.squares.get(&f.square).and_then(|s| s.faces.get(f.idx as usize))
    }

    pub fn face_side(&self, f: &RFace) -> Side {
        match self.face_data(f) {
            Some(d) => d.side,
            None => self.vertex_side(f.square.anchor),
        }
    }

    /// Oriented boundary of a refined face.
    pub fn face_boundary(&self, f: &RFace) -> Result<Vec<(REdge, i64)>> {
        if let Some(d) = self.face_data(f) {
            return Ok(d.cycles.iter().flatten().map(|(e, s)| (*e, *s as i64)).collect());
        }
        if f.idx != 0 || f.square.dim() != 2 {
            return Err(Error::Domain(format!("no refined face {f:?}")));
        }
        let mut out = Vec::new();
        for (e, s) in f.square.boundary_terms() {
            for piece in 0..self.pieces(&e) {
                out.push((REdge::LatticePiece { edge: e, piece }, s));
            }
        }
        Ok(out)
    }

    pub fn boundary2(&self, c: &RefinedChain2) -> Result<RefinedChain1> {
        let mut out = Chain::zero(1);
        for (f, k) in c.iter() {
            for (e, s) in self.face_boundary(f)? {
                out.add_term(e, s * k);
            }
        }
        Ok(out)
    }

    /// Image of a lattice 1-chain: each edge becomes the sum of its pieces.
    pub fn push_edges(&self, c: &LatticeChain) -> RefinedChain1 {
        let mut out = Chain::zero(1);
        for (e, k) in c.iter() {
            for piece in 0..self.pieces(e) {
                out.add_term(REdge::LatticePiece { edge: *e, piece }, k);
            }
        }
        out
    }

    /// Image of a lattice 2-chain: each square becomes the sum of its faces.
    pub fn push_squares(&self, c: &LatticeChain) -> RefinedChain2 {
        let mut out = Chain::zero(2);
        for (sq, k) in c.iter() {
            for f in self.faces_of(sq) {
                out.add_term(f, k);
            }
        }
        out
    }

    /// Number of refined faces whose boundary contains `e`.
    pub fn incidence_count(&self, e: &REdge) -> Result<usize> {
        match e {
            REdge::Arc(a) => {
                if *a >= self.arcs.len() {
                    return Err(Error::Domain(format!("no arc {a}")));
                }
                let (p, m) = self.arc_faces[*a];
                Ok(if p == m { 1 } else { 2 })
            }
            REdge::LatticePiece { edge, piece } => {
                if edge.dim() != 1 || *piece >= self.pieces(edge) {
                    return Err(Error::Domain(format!("no lattice piece {edge} #{piece}")));
                }
                let mut n = 0;
                for sq in edge.cofaces() {
                    for f in self.faces_of(&sq) {
                        if self.face_boundary(&f)?.iter().any(|(x, s)| x == e && *s != 0) {
                            n += 1;
                        }
                    }
                }
                Ok(n)
            }
        }
    }

    /// The refined path traced by a lattice path.
    pub fn map_lattice_path(
        &self,
        path: &SkeletonPath<[i64; 3], Cell>,
    ) -> SkeletonPath<RVertex, REdge> {
        let mut vertices = vec![RVertex::Lattice(path.vertices[0])];
        let mut edges = Vec::new();
        for (i, (e, s)) in path.edges.iter().enumerate() {
            let hs = self.edge_hits.get(e).cloned().unwrap_or_default();
            let n = hs.len() as u32;
            if *s > 0 {
                for piece in 0..=n {
                    edges.push((REdge::LatticePiece { edge: *e, piece }, 1));
                    vertices.push(if piece < n {
                        RVertex::Hit(hs[piece as usize])
                    } else {
                        RVertex::Lattice(path.vertices[i + 1])
                    });
                }
            } else {
                for piece in (0..=n).rev() {
                    edges.push((REdge::LatticePiece { edge: *e, piece }, -1));
                    vertices.push(if piece > 0 {
                        RVertex::Hit(hs[piece as usize - 1])
                    } else {
                        RVertex::Lattice(path.vertices[i + 1])
                    });
                }
            }
        }
        SkeletonPath {
            vertices,
            edges,
            closed: path.closed,
        }
    }

    /// Naturality of `ch` under the inclusion of the lattice 1-skeleton.
    pub fn pushforward_check(&self, path: &SkeletonPath<[i64; 3], Cell>) -> bool {
        let mapped = self.map_lattice_path(path);
        let lhs = ch(&mapped);
        let rhs = self.push_edges(&ch(path));
        let connected = SkeletonPath::from_edges(self, mapped.vertices[0], mapped.edges.clone())
            .map(|p| p.vertices == mapped.vertices)
            .unwrap_or(false);
        connected && lhs == rhs && LatticeSkeleton.endpoints(&path.edges[0].0).is_some()
    }

    /// Lattice 1-chain obtained by collapsing a refined chain that is
    /// constant along the pieces of every lattice edge and has no arcs.
    pub fn collapse_edges(&self, c: &RefinedChain1) -> Result<LatticeChain> {
        let mut out: BTreeMap<Cell, i64> = BTreeMap::new();
        for (e, k) in c.iter() {
            match e {
                REdge::Arc(a) => {
                    return Err(Error::Verification(format!("chain still uses arc {a}")))
                }
                REdge::LatticePiece { edge, .. } => {
                    let prev = out.insert(*edge, k);
                    if prev.is_some() && prev != Some(k) {
                        return Err(Error::Verification(format!(
                            "chain is not constant along lattice edge {edge}"
                        )));
                    }
                }
            }
        }
        for (edge, k) in &out {
            for piece in 0..self.pieces(edge) {
                if c.coeff(&REdge::LatticePiece { edge: *edge, piece }) != *k {
                    return Err(Error::Verification(format!(
                        "chain is not constant along lattice edge {edge}"
                    )));
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Exact refined point for a vertex, in lattice units.
    pub fn vertex_point(&self, v: &RVertex) -> Point3 {
        match v {
            RVertex::Lattice(p) => [
                Rat::from_integer(p[0].into()),
                Rat::from_integer(p[1].into()),
                Rat::from_integer(p[2].into()),
            ],
            RVertex::Hit(h) => self.hits[*h].point.clone(),
            RVertex::Loop(a) => self.arcs[*a].points[0].clone(),
        }
    }

    /// The square containing a point strictly inside the plane region.
    pub fn square_at(axis_plane: crate::lattice::Axis, k: i64, p: &Point3) -> Cell {
        let b = axis_plane.next();
        let c = b.next();
        let mut anchor = [0; 3];
        anchor[axis_plane.index()] = k;
        anchor[b.index()] = floor_int(&p[b.index()]);
        anchor[c.index()] = floor_int(&p[c.index()]);
        Cell::square(anchor, b, c)
    }
}

impl Skeleton for RefinedComplex {
    type Vertex = RVertex;
    type Edge = REdge;

    fn endpoints(&self, e: &REdge) -> Option<(RVertex, RVertex)> {
        match e {
            REdge::Arc(a) => {
                let arc = self.arcs.get(*a)?;
                match (arc.start, arc.end) {
                    (Some(s), Some(t)) => Some((RVertex::Hit(s), RVertex::Hit(t))),
                    _ => Some((RVertex::Loop(*a), RVertex::Loop(*a))),
                }
            }
            REdge::LatticePiece { edge, piece } => {
                let axis = edge.edge_axis()?;
                let hs = self.edge_hits.get(edge).map(|v| v.as_slice()).unwrap_or(&[]);
                let n = hs.len() as u32;
                if *piece > n {
                    return None;
                }
                let tail = if *piece == 0 {
                    RVertex::Lattice(edge.anchor)
                } else {
                    RVertex::Hit(hs[*piece as usize - 1])
                };
                let head = if *piece == n {
                    RVertex::Lattice(add(edge.anchor, axis.unit()))
                } else {
                    RVertex::Hit(hs[*piece as usize])
                };
                Some((tail, head))
            }
        }
    }
}

pub fn refined_edge_line(e: &REdge) -> String {
    match e {
        REdge::LatticePiece { edge, piece } => format!("{} #{piece}", edge.to_line()),
        REdge::Arc(a) => format!("arc #{a}"),
    }
}

pub fn write_refined_chain2(c: &RefinedChain2) -> String {
    let mut s = String::new();
    for (f, k) in c.iter() {
        writeln!(s, "{} #{} {}", f.square.to_line(), f.idx, k).unwrap();
    }
    s
}

pub fn write_refined_chain1(c: &RefinedChain1) -> String {
    let mut s = String::new();
    for (e, k) in c.iter() {
        writeln!(s, "{} {}", refined_edge_line(e), k).unwrap();
    }
    s
}

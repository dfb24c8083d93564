//! Curves on 1-skeleta and their associated cellular 1-chains.
//!
//! Paths are stored combinatorially as sequences of signed edges. The
//! coefficient of an edge in the associated chain is the net number of times
//! the path traverses it, which for cellular curves is the degree of the path
//! composed with the collapse onto that edge.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lattice::{add, Axis, Cell, Chain, LatticeChain};

/// A 1-dimensional cell complex: oriented edges with tail and head vertices.
pub trait Skeleton {
    type Vertex: Ord + Clone + fmt::Debug;
    type Edge: Ord + Clone + fmt::Debug;

    /// `(tail, head)` of an edge, or `None` if the edge is not in the complex.
    fn endpoints(&self, e: &Self::Edge) -> Option<(Self::Vertex, Self::Vertex)>;
}

/// The 1-skeleton of the infinite unit lattice.
#[derive(Clone, Copy, Debug, Default)]
pub struct LatticeSkeleton;

impl Skeleton for LatticeSkeleton {
    type Vertex = [i64; 3];
    type Edge = Cell;

    fn endpoints(&self, e: &Cell) -> Option<([i64; 3], [i64; 3])> {
        let a = e.edge_axis()?;
        Some((e.anchor, add(e.anchor, a.unit())))
    }
}

/// A path in a 1-skeleton. `edges[i]` runs from `vertices[i]` to
/// `vertices[i + 1]`; the sign says whether the edge is traversed along its
/// orientation (+1) or against it (-1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonPath<V, E> {
    pub vertices: Vec<V>,
    pub edges: Vec<(E, i8)>,
    pub closed: bool,
}

impl<V: Ord + Clone + fmt::Debug, E: Ord + Clone + fmt::Debug> SkeletonPath<V, E> {
    /// Build a path from a start vertex and signed edges, checking adjacency.
    pub fn from_edges<S>(sk: &S, start: V, edges: Vec<(E, i8)>) -> Result<Self>
    where
        S: Skeleton<Vertex = V, Edge = E>,
    {
        let mut vertices = vec![start];
        for (e, s) in &edges {
            let (t, h) = sk
                .endpoints(e)
                .ok_or_else(|| Error::Domain(format!("edge {e:?} not in the complex")))?;
            let (from, to) = if *s > 0 { (t, h) } else { (h, t) };
            if *vertices.last().unwrap() != from {
                return Err(Error::Domain(format!(
                    "path is not connected at edge {e:?}: expected start {:?}",
                    vertices.last().unwrap()
                )));
            }
            vertices.push(to);
        }
        let closed = !edges.is_empty() && vertices.first() == vertices.last();
        Ok(SkeletonPath {
            vertices,
            edges,
            closed,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Vertices visited, without repeating the closing vertex.
    pub fn distinct_stops(&self) -> &[V] {
        if self.closed {
            &self.vertices[..self.vertices.len() - 1]
        } else {
            &self.vertices
        }
    }

    /// True if no vertex is visited twice (apart from closing up).
    pub fn is_embedded(&self) -> bool {
        let stops = self.distinct_stops();
        let set: BTreeSet<&V> = stops.iter().collect();
        set.len() == stops.len()
    }

    pub fn reversed(&self) -> Self {
        SkeletonPath {
            vertices: self.vertices.iter().rev().cloned().collect(),
            edges: self.edges.iter().rev().map(|(e, s)| (e.clone(), -s)).collect(),
            closed: self.closed,
        }
    }

    /// Concatenate two paths meeting at an endpoint.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.vertices.last() != other.vertices.first() {
            return Err(Error::Domain("paths do not meet".into()));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().skip(1).cloned());
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().cloned());
        let closed = !edges.is_empty() && vertices.first() == vertices.last();
        Ok(SkeletonPath {
            vertices,
            edges,
            closed,
        })
    }

    /// Sub-path covering edges `from..to`.
    pub fn slice(&self, from: usize, to: usize) -> Self {
        let vertices = self.vertices[from..=to].to_vec();
        let edges = self.edges[from..to].to_vec();
        let closed = !edges.is_empty() && vertices.first() == vertices.last();
        SkeletonPath {
            vertices,
            edges,
            closed,
        }
    }
}

/// Net signed number of traversals of `edge` by `path`.
pub fn winding_coefficient<S: Skeleton>(
    sk: &S,
    path: &SkeletonPath<S::Vertex, S::Edge>,
    edge: &S::Edge,
) -> Result<i64> {
    if sk.endpoints(edge).is_none() {
        return Err(Error::Domain(format!("edge {edge:?} not in the complex")));
    }
    Ok(path
        .edges
        .iter()
        .filter(|(e, _)| e == edge)
        .map(|(_, s)| *s as i64)
        .sum())
}

/// The cellular 1-chain associated with a path.
pub fn ch<V, E: Ord + Clone>(path: &SkeletonPath<V, E>) -> Chain<E> {
    let mut out = Chain::zero(1);
    for (e, s) in &path.edges {
        out.add_term(e.clone(), *s as i64);
    }
    out
}

/// Boundary of a 1-chain on a skeleton, as a map vertex -> coefficient.
pub fn chain_boundary<S: Skeleton>(
    sk: &S,
    c: &Chain<S::Edge>,
) -> Result<BTreeMap<S::Vertex, i64>> {
    let mut out = BTreeMap::new();
    for (e, k) in c.iter() {
        let (t, h) = sk
            .endpoints(e)
            .ok_or_else(|| Error::Domain(format!("edge {e:?} not in the complex")))?;
        *out.entry(h).or_insert(0) += k;
        *out.entry(t).or_insert(0) -= k;
    }
    out.retain(|_, v| *v != 0);
    Ok(out)
}

pub fn is_cycle<S: Skeleton>(sk: &S, c: &Chain<S::Edge>) -> Result<bool> {
    Ok(chain_boundary(sk, c)?.is_empty())
}

/// Split a 1-cycle into embedded closed curves whose chains sum to it with
/// no cancellation between pieces.
///
/// Walks from the smallest supported edge along edges of matching sign,
/// always taking the smallest available edge, until a vertex repeats; the
/// loop so closed is removed and the walk resumes from where it was.
pub fn decompose_cycle<S: Skeleton>(
    sk: &S,
    alpha: &Chain<S::Edge>,
) -> Result<Vec<SkeletonPath<S::Vertex, S::Edge>>> {
    if !is_cycle(sk, alpha)? {
        return Err(Error::Domain("not a cycle".into()));
    }
    let mut rest = alpha.clone();
    // Outgoing oriented edges per vertex: (edge, sign) with sign * edge
    // leaving the vertex.
    let mut out_edges: BTreeMap<S::Vertex, BTreeSet<(S::Edge, i8)>> = BTreeMap::new();
    for (e, k) in alpha.iter() {
        let (t, h) = sk.endpoints(e).unwrap();
        if k > 0 {
            out_edges.entry(t).or_default().insert((e.clone(), 1));
        } else {
            out_edges.entry(h).or_default().insert((e.clone(), -1));
        }
    }
    let mut loops = Vec::new();
    let mut walk_v: Vec<S::Vertex> = Vec::new();
    let mut walk_e: Vec<(S::Edge, i8)> = Vec::new();
    while !rest.is_zero() {
        if walk_v.is_empty() {
            let (e, k) = rest.iter().next().map(|(e, k)| (e.clone(), k)).unwrap();
            let (t, h) = sk.endpoints(&e).unwrap();
            walk_v.push(if k > 0 { t } else { h });
        }
        let x = walk_v.last().unwrap().clone();
        let next = out_edges
            .get(&x)
            .and_then(|set| set.iter().next().cloned())
            .ok_or_else(|| Error::Verification("cycle walk got stuck".into()))?;
        let (e, s) = next;
        // Consume one unit of this edge.
        rest.add_term(e.clone(), -(s as i64));
        if rest.coeff(&e) == 0 {
            out_edges.get_mut(&x).unwrap().remove(&(e.clone(), s));
        }
        let (t, h) = sk.endpoints(&e).unwrap();
        let y = if s > 0 { h } else { t };
        walk_e.push((e, s));
        if let Some(pos) = walk_v.iter().position(|v| *v == y) {
            let mut vertices: Vec<S::Vertex> = walk_v.drain(pos..).collect();
            vertices.push(y.clone());
            let edges: Vec<(S::Edge, i8)> = walk_e.drain(pos..).collect();
            loops.push(normalize_loop(SkeletonPath {
                vertices,
                edges,
                closed: true,
            }));
            if pos > 0 {
                walk_v.push(y);
            }
        } else {
            walk_v.push(y);
        }
    }
    Ok(loops)
}

/// Rotate a closed path so that it starts at its smallest vertex.
pub fn normalize_loop<V: Ord + Clone + fmt::Debug, E: Ord + Clone + fmt::Debug>(
    p: SkeletonPath<V, E>,
) -> SkeletonPath<V, E> {
    if !p.closed || p.edges.is_empty() {
        return p;
    }
    let n = p.edges.len();
    let start = (0..n).min_by(|&i, &j| p.vertices[i].cmp(&p.vertices[j])).unwrap();
    let mut vertices: Vec<V> = (0..n).map(|i| p.vertices[(start + i) % n].clone()).collect();
    vertices.push(vertices[0].clone());
    let edges = (0..n).map(|i| p.edges[(start + i) % n].clone()).collect();
    SkeletonPath {
        vertices,
        edges,
        closed: true,
    }
}

/// One step of a lattice word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub axis: Axis,
    pub positive: bool,
}

impl Letter {
    pub fn new(axis: Axis, positive: bool) -> Letter {
        Letter { axis, positive }
    }

    pub fn inverse(self) -> Letter {
        Letter::new(self.axis, !self.positive)
    }

    pub fn step(self) -> [i64; 3] {
        let mut v = [0; 3];
        v[self.axis.index()] = if self.positive { 1 } else { -1 };
        v
    }

    pub fn sign(self) -> i64 {
        if self.positive {
            1
        } else {
            -1
        }
    }

    /// Serialized form: uppercase for the positive direction.
    pub fn to_char(self) -> char {
        let c = self.axis.letter();
        if self.positive {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Result<Letter> {
        let axis = match c.to_ascii_lowercase() {
            'x' => Axis::X,
            'y' => Axis::Y,
            'z' => Axis::Z,
            _ => return Err(Error::Parse(format!("bad letter {c:?}"))),
        };
        Ok(Letter::new(axis, c.is_ascii_uppercase()))
    }

    /// The lattice edge traversed when stepping from `p`, with its sign.
    pub fn edge_from(self, p: [i64; 3]) -> (Cell, i8) {
        if self.positive {
            (Cell::edge(p, self.axis), 1)
        } else {
            (Cell::edge(add(p, self.step()), self.axis), -1)
        }
    }
}

/// A closed edge path on the lattice stored as a word from a base vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeLoop {
    pub base: [i64; 3],
    pub word: Vec<Letter>,
}

impl LatticeLoop {
    pub fn new(base: [i64; 3], word: Vec<Letter>) -> Result<LatticeLoop> {
        let l = LatticeLoop { base, word };
        if l.displacement() != [0, 0, 0] {
            return Err(Error::Domain("open path".into()));
        }
        Ok(l)
    }

    pub fn displacement(&self) -> [i64; 3] {
        self.word.iter().fold([0; 3], |p, l| add(p, l.step()))
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Vertices visited, starting and ending at the base.
    pub fn vertices(&self) -> Vec<[i64; 3]> {
        let mut p = self.base;
        let mut out = vec![p];
        for l in &self.word {
            p = add(p, l.step());
            out.push(p);
        }
        out
    }

    pub fn to_path(&self) -> SkeletonPath<[i64; 3], Cell> {
        let mut p = self.base;
        let mut edges = Vec::with_capacity(self.word.len());
        for l in &self.word {
            edges.push(l.edge_from(p));
            p = add(p, l.step());
        }
        SkeletonPath {
            vertices: self.vertices(),
            edges,
            closed: !self.word.is_empty(),
        }
    }

    pub fn chain(&self) -> LatticeChain {
        ch(&self.to_path())
    }

    /// Read a closed lattice path back as a word.
    pub fn from_path(p: &SkeletonPath<[i64; 3], Cell>) -> Result<LatticeLoop> {
        let base = *p.vertices.first().ok_or_else(|| Error::Domain("empty path".into()))?;
        let word = p
            .edges
            .iter()
            .map(|(e, s)| {
                let axis = e
                    .edge_axis()
                    .ok_or_else(|| Error::Domain(format!("{e} is not an edge")))?;
                Ok(Letter::new(axis, *s > 0))
            })
            .collect::<Result<Vec<_>>>()?;
        LatticeLoop::new(base, word)
    }
}

impl fmt::Display for LatticeLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = self.base;
        write!(f, "{x} {y} {z} : ")?;
        for l in &self.word {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for LatticeLoop {
    type Err = Error;

    fn from_str(s: &str) -> Result<LatticeLoop> {
        let (head, word) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("loop needs `base : word`, got {s:?}")))?;
        let base: Vec<i64> = head
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad coordinate {t:?}"))))
            .collect::<Result<_>>()?;
        if base.len() != 3 {
            return Err(Error::Parse("loop base needs three coordinates".into()));
        }
        let word = word
            .trim()
            .chars()
            .map(Letter::from_char)
            .collect::<Result<Vec<_>>>()?;
        LatticeLoop::new([base[0], base[1], base[2]], word)
    }
}

/// Parse a word like `XYxy` (uppercase positive).
pub fn word(s: &str) -> Vec<Letter> {
    s.chars().map(|c| Letter::from_char(c).expect("bad letter")).collect()
}

//! Cells and integer chains of the unit cubical lattice.
//!
//! The lattice is conceptually infinite: cells are addressed by the integer
//! coordinates of their minimal corner plus the set of axes they span, and
//! chains are sparse maps from cells to nonzero integer coefficients. Cells
//! are expressed in lattice units; the physical side length lives on
//! [`Lattice`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num_rational::BigRational;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Axis::ALL[i % 3]
    }

    /// Next axis in the cyclic order x -> y -> z -> x.
    pub fn next(self) -> Axis {
        Axis::from_index(self.index() + 1)
    }

    pub fn unit(self) -> [i64; 3] {
        let mut v = [0; 3];
        v[self.index()] = 1;
        v
    }

    pub fn letter(self) -> char {
        ['x', 'y', 'z'][self.index()]
    }
}

/// Set of axes stored as a 3-bit mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AxisSet(u8);

impl AxisSet {
    pub const EMPTY: AxisSet = AxisSet(0);

    pub fn from_axes(axes: &[Axis]) -> AxisSet {
        AxisSet(axes.iter().fold(0, |m, a| m | (1 << a.index())))
    }

    pub fn contains(self, a: Axis) -> bool {
        self.0 & (1 << a.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn axes(self) -> impl Iterator<Item = Axis> {
        Axis::ALL.into_iter().filter(move |a| self.contains(*a))
    }

    pub fn complement(self) -> AxisSet {
        AxisSet(!self.0 & 0b111)
    }

    pub fn with(self, a: Axis) -> AxisSet {
        AxisSet(self.0 | (1 << a.index()))
    }

    pub fn without(self, a: Axis) -> AxisSet {
        AxisSet(self.0 & !(1 << a.index()))
    }
}

impl fmt::Display for AxisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        for a in self.axes() {
            write!(f, "{}", a.letter())?;
        }
        Ok(())
    }
}

impl FromStr for AxisSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<AxisSet> {
        if s == "-" {
            return Ok(AxisSet::EMPTY);
        }
        let mut set = AxisSet::EMPTY;
        for c in s.chars() {
            let a = match c {
                'x' => Axis::X,
                'y' => Axis::Y,
                'z' => Axis::Z,
                _ => return Err(Error::Parse(format!("bad axis letter {c:?}"))),
            };
            if set.contains(a) {
                return Err(Error::Parse(format!("repeated axis in {s:?}")));
            }
            set = set.with(a);
        }
        Ok(set)
    }
}

/// A cell of the unit cubical lattice: the product of unit intervals along
/// `axes` starting at the integer point `anchor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub anchor: [i64; 3],
    pub axes: AxisSet,
}

impl Cell {
    pub fn new(anchor: [i64; 3], axes: AxisSet) -> Cell {
        Cell { anchor, axes }
    }

    pub fn vertex(p: [i64; 3]) -> Cell {
        Cell::new(p, AxisSet::EMPTY)
    }

    pub fn edge(p: [i64; 3], a: Axis) -> Cell {
        Cell::new(p, AxisSet::from_axes(&[a]))
    }

    pub fn square(p: [i64; 3], a: Axis, b: Axis) -> Cell {
        assert_ne!(a, b, "a square needs two distinct axes");
        Cell::new(p, AxisSet::from_axes(&[a, b]))
    }

    pub fn cube(p: [i64; 3]) -> Cell {
        Cell::new(p, AxisSet::from_axes(&Axis::ALL))
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Axis of an edge.
    pub fn edge_axis(&self) -> Option<Axis> {
        (self.dim() == 1).then(|| self.axes.axes().next().unwrap())
    }

    /// The normal axis of a square.
    pub fn normal_axis(&self) -> Option<Axis> {
        (self.dim() == 2).then(|| self.axes.complement().axes().next().unwrap())
    }

    /// Oriented in-plane axes `(a, b)` of a square: the square is oriented
    /// from `a` towards `b`, with `(a, b, normal)` a cyclic permutation of
    /// `(x, y, z)`.
    pub fn square_frame(&self) -> Option<(Axis, Axis)> {
        let n = self.normal_axis()?;
        Some((n.next(), n.next().next()))
    }

    pub fn shifted(&self, a: Axis, by: i64) -> Cell {
        let mut p = self.anchor;
        p[a.index()] += by;
        Cell::new(p, self.axes)
    }

    /// The four corners of a square in counterclockwise order of its frame.
    pub fn square_corners(&self) -> Option<[[i64; 3]; 4]> {
        let (a, b) = self.square_frame()?;
        let p = self.anchor;
        let pa = add(p, a.unit());
        let pab = add(pa, b.unit());
        let pb = add(p, b.unit());
        Some([p, pa, pab, pb])
    }

    /// The oriented boundary of this cell with coefficients.
    pub fn boundary_terms(&self) -> Vec<(Cell, i64)> {
        match self.dim() {
            0 => Vec::new(),
            1 => {
                let a = self.edge_axis().unwrap();
                vec![
                    (Cell::vertex(add(self.anchor, a.unit())), 1),
                    (Cell::vertex(self.anchor), -1),
                ]
            }
            2 => {
                let (a, b) = self.square_frame().unwrap();
                let p = self.anchor;
                vec![
                    (Cell::edge(p, a), 1),
                    (Cell::edge(add(p, a.unit()), b), 1),
                    (Cell::edge(add(p, b.unit()), a), -1),
                    (Cell::edge(p, b), -1),
                ]
            }
            _ => {
                let p = self.anchor;
                let mut out = Vec::with_capacity(6);
                for k in Axis::ALL {
                    let face = AxisSet::from_axes(&Axis::ALL).without(k);
                    out.push((Cell::new(add(p, k.unit()), face), 1));
                    out.push((Cell::new(p, face), -1));
                }
                out
            }
        }
    }

    /// Cells of dimension `dim + 1` whose boundary contains this cell.
    pub fn cofaces(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for a in self.axes.complement().axes() {
            let axes = self.axes.with(a);
            out.push(Cell::new(self.anchor, axes));
            out.push(Cell::new(sub(self.anchor, a.unit()), axes));
        }
        out
    }

    /// Text form `dim ax ay az axes`.
    pub fn to_line(&self) -> String {
        let [x, y, z] = self.anchor;
        format!("{} {} {} {} {}", self.dim(), x, y, z, self.axes)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

pub fn add(p: [i64; 3], q: [i64; 3]) -> [i64; 3] {
    [p[0] + q[0], p[1] + q[1], p[2] + q[2]]
}

pub fn sub(p: [i64; 3], q: [i64; 3]) -> [i64; 3] {
    [p[0] - q[0], p[1] - q[1], p[2] - q[2]]
}

/// Physical placement of the unit lattice: a point `q` in lattice units sits
/// at `offset + spacing * q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub spacing: BigRational,
    pub offset: [BigRational; 3],
}

/// Sparse integer chain over cells of type `K`, all of one dimension.
///
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chain<K: Ord> {
    dim: usize,
    coeffs: BTreeMap<K, i64>,
}

impl<K: Ord + Clone> Chain<K> {
    pub fn zero(dim: usize) -> Self {
        Chain {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: &K) -> i64 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, k: K, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.coeffs.entry(k.clone()).or_insert(0);
        *e = e.checked_add(c).expect("chain coefficient overflow");
        if *e == 0 {
            self.coeffs.remove(&k);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, i64)> {
        self.coeffs.iter().map(|(k, c)| (k, *c))
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.coeffs.keys()
    }

    pub fn scaled(&self, s: i64) -> Self {
        let mut out = Chain::zero(self.dim);
        for (k, c) in self.iter() {
            out.add_term(k.clone(), c * s);
        }
        out
    }

    /// Restrict to the cells satisfying `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&K) -> bool) -> Self {
        Chain {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// Sum of absolute coefficients.
    pub fn l1(&self) -> u64 {
        self.coeffs.values().map(|c| c.unsigned_abs()).sum()
    }

    /// Largest absolute coefficient, 0 for the zero chain.
    pub fn linf(&self) -> u64 {
        self.coeffs.values().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn norms(&self) -> (u64, u64) {
        (self.l1(), self.linf())
    }
}

impl<K: Ord + Clone> FromIterator<(K, i64)> for Chain<K>
where
    K: HasDim,
{
    fn from_iter<I: IntoIterator<Item = (K, i64)>>(iter: I) -> Self {
        let mut it = iter.into_iter().peekable();
        let dim = it.peek().map(|(k, _)| k.cell_dim()).unwrap_or(0);
        let mut out = Chain::zero(dim);
        for (k, c) in it {
            assert_eq!(k.cell_dim(), dim, "mixed dimensions in chain");
            out.add_term(k, c);
        }
        out
    }
}

/// Cells that know their own dimension.
pub trait HasDim {
    fn cell_dim(&self) -> usize;
}

impl HasDim for Cell {
    fn cell_dim(&self) -> usize {
        self.dim()
    }
}

impl<K: Ord + Clone> AddAssign<&Chain<K>> for Chain<K> {
    fn add_assign(&mut self, rhs: &Chain<K>) {
        if self.is_zero() {
            self.dim = rhs.dim;
        }
        for (k, c) in rhs.iter() {
            self.add_term(k.clone(), c);
        }
    }
}

impl<K: Ord + Clone> Add for &Chain<K> {
    type Output = Chain<K>;

    fn add(self, rhs: &Chain<K>) -> Chain<K> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<K: Ord + Clone> Sub for &Chain<K> {
    type Output = Chain<K>;

    fn sub(self, rhs: &Chain<K>) -> Chain<K> {
        let mut out = self.clone();
        out += &rhs.scaled(-1);
        out
    }
}

impl<K: Ord + Clone> Neg for &Chain<K> {
    type Output = Chain<K>;

    fn neg(self) -> Chain<K> {
        self.scaled(-1)
    }
}

impl<K: Ord + Clone + fmt::Debug> fmt::Debug for Chain<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chain[{}]", self.dim)?;
        f.debug_map().entries(self.coeffs.iter()).finish()
    }
}

pub type LatticeChain = Chain<Cell>;

impl LatticeChain {
    pub fn from_cell(cell: Cell, c: i64) -> LatticeChain {
        let mut out = Chain::zero(cell.dim());
        out.add_term(cell, c);
        out
    }
}

/// Cellular boundary of a lattice chain.
pub fn boundary(c: &LatticeChain) -> Result<LatticeChain> {
    if c.dim() == 0 {
        return Err(Error::Domain("no boundary below dimension 0".into()));
    }
    let mut out = Chain::zero(c.dim() - 1);
    for (cell, k) in c.iter() {
        for (face, s) in cell.boundary_terms() {
            out.add_term(face, s * k);
        }
    }
    Ok(out)
}

/// One cell per line as `dim ax ay az axes coeff`, in lexicographic order.
pub fn write_chain(c: &LatticeChain) -> String {
    let mut s = String::new();
    for (cell, k) in c.iter() {
        s.push_str(&cell.to_line());
        s.push(' ');
        s.push_str(&k.to_string());
        s.push('\n');
    }
    s
}

pub fn parse_cell(fields: &[&str]) -> Result<Cell> {
    if fields.len() != 5 {
        return Err(Error::Parse(format!("cell needs 5 fields, got {fields:?}")));
    }
    let num = |s: &str| {
        s.parse::<i64>()
            .map_err(|_| Error::Parse(format!("bad integer {s:?}")))
    };
    let dim = num(fields[0])? as usize;
    let anchor = [num(fields[1])?, num(fields[2])?, num(fields[3])?];
    let axes: AxisSet = fields[4].parse()?;
    if axes.len() != dim {
        return Err(Error::Parse(format!(
            "cell dimension {dim} does not match axes {axes}"
        )));
    }
    Ok(Cell::new(anchor, axes))
}

/// Parse the format written by [`write_chain`]. `dim` is used for empty input.
pub fn parse_chain(text: &str, dim: usize) -> Result<LatticeChain> {
    let mut out = Chain::zero(dim);
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::Parse(format!("bad chain line {line:?}")));
        }
        let cell = parse_cell(&fields[..5])?;
        if cell.dim() != dim {
            return Err(Error::Parse(format!(
                "cell {cell} has dimension {} in a {dim}-chain",
                cell.dim()
            )));
        }
        let k: i64 = fields[5]
            .parse()
            .map_err(|_| Error::Parse(format!("bad coefficient in {line:?}")))?;
        out.add_term(cell, k);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_cells_in_box(n: i64, dim: usize) -> Vec<Cell> {
        let mut out = Vec::new();
        for mask in 0u8..8 {
            let axes = AxisSet(mask);
            if axes.len() != dim {
                continue;
            }
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        out.push(Cell::new([x, y, z], axes));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn unit_square_boundary() {
        let sq = Cell::square([0, 0, 0], Axis::X, Axis::Y);
        let b = boundary(&LatticeChain::from_cell(sq, 1)).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.iter().all(|(_, c)| c.abs() == 1));
        assert_eq!(b.norms(), (4, 1));
        // x -> y orientation: the bottom x edge is traversed forwards.
        assert_eq!(b.coeff(&Cell::edge([0, 0, 0], Axis::X)), 1);
        assert_eq!(b.coeff(&Cell::edge([0, 0, 0], Axis::Y)), -1);
    }

    #[test]
    fn zero_chain_boundary_is_zero() {
        let z: LatticeChain = Chain::zero(2);
        assert!(boundary(&z).unwrap().is_zero());
    }

    #[test]
    fn dimension_zero_has_no_boundary() {
        let v = LatticeChain::from_cell(Cell::vertex([1, 2, 3]), 1);
        let err = boundary(&v).unwrap_err();
        assert!(err.to_string().contains("no boundary below dimension 0"));
    }

    #[test]
    fn boundary_of_boundary_vanishes_exhaustively_on_small_grids() {
        for dim in 1..=3 {
            for cell in all_cells_in_box(4, dim) {
                let b = boundary(&LatticeChain::from_cell(cell, 1)).unwrap();
                if dim >= 2 {
                    assert!(boundary(&b).unwrap().is_zero(), "dd != 0 on {cell}");
                }
            }
        }
    }

    #[test]
    fn norms_examples() {
        let mut c = Chain::zero(2);
        c.add_term(Cell::square([0, 0, 0], Axis::X, Axis::Y), 3);
        c.add_term(Cell::square([1, 0, 0], Axis::X, Axis::Y), -2);
        assert_eq!(c.norms(), (5, 3));
        assert_eq!(LatticeChain::zero(1).norms(), (0, 0));
    }

    #[test]
    fn cofaces_of_interior_edge() {
        let e = Cell::edge([1, 1, 1], Axis::Z);
        let cof = e.cofaces();
        assert_eq!(cof.len(), 4);
        for sq in cof {
            assert!(sq.boundary_terms().iter().any(|(f, _)| *f == e));
        }
    }

    #[test]
    fn square_frames_are_cyclic() {
        let xy = Cell::square([0, 0, 0], Axis::Y, Axis::X);
        assert_eq!(xy.square_frame(), Some((Axis::X, Axis::Y)));
        let zx = Cell::square([0, 0, 0], Axis::X, Axis::Z);
        assert_eq!(zx.square_frame(), Some((Axis::Z, Axis::X)));
    }

    #[test]
    fn chain_text_roundtrip() {
        let mut c = Chain::zero(2);
        c.add_term(Cell::square([0, -1, 2], Axis::Z, Axis::X), 7);
        c.add_term(Cell::square([3, 0, 0], Axis::Y, Axis::Z), -1);
        let text = write_chain(&c);
        assert_eq!(parse_chain(&text, 2).unwrap(), c);
        assert!(text.lines().next().unwrap().starts_with("2 0 -1 2 xz 7"));
    }
}

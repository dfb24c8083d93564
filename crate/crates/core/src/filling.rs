//! Fillings of 1-cycles by 2-chains.
//!
//! `fill_x1` reduces a closed lattice word to the empty word by cancelling
//! inverse pairs. Moving a letter past a neighbour of another axis sweeps one
//! unit square, and the filling is the signed sum of the squares swept.
//! `fill_refined` extends this to curves on the skeleton subdivided by a
//! surface.

use std::fmt::Write as _;

use std::collections::{BTreeMap, BTreeSet};

use crate::curves::{ch, decompose_cycle, LatticeLoop, LatticeSkeleton, Letter, SkeletonPath};
use crate::refined::{RFace, REdge, RVertex, RefinedChain1, RefinedChain2, RefinedComplex};
use crate::error::{Error, Result};
use crate::lattice::{add, boundary, parse_cell, Cell, Chain, LatticeChain};

/// One step of the word reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    /// Adjacent `l l⁻¹` removed; `at` is the vertex where `l` starts.
    PairCancellation { at: [i64; 3], letter: Letter },
    /// A letter moved one place to the right across `square`, adding
    /// `sign * square` to the filling.
    Transposition { square: Cell, sign: i64 },
    /// The pair brought together by transpositions removed.
    PairElimination { at: [i64; 3], letter: Letter },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FillingResult {
    pub chain: LatticeChain,
    pub multiplicity: u64,
    pub transcript: Vec<Move>,
}

impl FillingResult {
    pub fn empty() -> FillingResult {
        FillingResult {
            chain: Chain::zero(2),
            multiplicity: 0,
            transcript: Vec::new(),
        }
    }

    /// Rebuild the chain from the transcript alone.
    pub fn replay(transcript: &[Move]) -> LatticeChain {
        let mut c = Chain::zero(2);
        for m in transcript {
            if let Move::Transposition { square, sign } = m {
                c.add_term(*square, *sign);
            }
        }
        c
    }

    /// Check that the transcript reproduces the chain and that its boundary
    /// is `target`.
    pub fn verify(&self, target: &LatticeChain) -> Result<()> {
        let replayed = FillingResult::replay(&self.transcript);
        if replayed != self.chain {
            return Err(Error::Verification("transcript does not replay to the chain".into()));
        }
        if &boundary(&replayed)? != target {
            return Err(Error::Verification("boundary of filling differs from the cycle".into()));
        }
        if self.chain.linf() != self.multiplicity {
            return Err(Error::Verification("multiplicity is not the sup norm".into()));
        }
        Ok(())
    }

    /// Chain lines followed by a `transcript` section.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "filling multiplicity {}", self.multiplicity).unwrap();
        s.push_str("chain\n");
        s.push_str(&crate::lattice::write_chain(&self.chain));
        s.push_str("transcript\n");
        for m in &self.transcript {
            match m {
                Move::PairCancellation { at, letter } => {
                    writeln!(s, "cancel {} {} {} {}", at[0], at[1], at[2], letter.to_char())
                }
                Move::Transposition { square, sign } => {
                    writeln!(s, "transpose {} {}", square.to_line(), sign)
                }
                Move::PairElimination { at, letter } => {
                    writeln!(s, "eliminate {} {} {} {}", at[0], at[1], at[2], letter.to_char())
                }
            }
            .unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<FillingResult> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let head = lines.next().ok_or_else(|| Error::Parse("empty filling".into()))?;
        let multiplicity: u64 = head
            .strip_prefix("filling multiplicity ")
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad filling header {head:?}")))?;
        if lines.next() != Some("chain") {
            return Err(Error::Parse("missing chain section".into()));
        }
        let mut chain_text = String::new();
        let mut transcript = Vec::new();
        let mut in_transcript = false;
        for line in lines {
            if line == "transcript" {
                in_transcript = true;
                continue;
            }
            if !in_transcript {
                chain_text.push_str(line);
                chain_text.push('\n');
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let vertex = |f: &[&str]| -> Result<([i64; 3], Letter)> {
                if f.len() != 4 {
                    return Err(Error::Parse(format!("bad move {line:?}")));
                }
                let n = |s: &str| s.parse::<i64>().map_err(|_| Error::Parse(format!("bad integer {s:?}")));
                let c = f[3].chars().next().unwrap_or('?');
                Ok(([n(f[0])?, n(f[1])?, n(f[2])?], Letter::from_char(c)?))
            };
            let m = match f.first() {
                Some(&"cancel") => {
                    let (at, letter) = vertex(&f[1..])?;
                    Move::PairCancellation { at, letter }
                }
                Some(&"eliminate") => {
                    let (at, letter) = vertex(&f[1..])?;
                    Move::PairElimination { at, letter }
                }
                Some(&"transpose") if f.len() == 7 => {
                    let square = parse_cell(&f[1..6])?;
                    let sign = f[6]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad sign in {line:?}")))?;
                    Move::Transposition { square, sign }
                }
                _ => return Err(Error::Parse(format!("bad move {line:?}"))),
            };
            transcript.push(m);
        }
        Ok(FillingResult {
            chain: crate::lattice::parse_chain(&chain_text, 2)?,
            multiplicity,
            transcript,
        })
    }
}

/// Signed square swept when the path `p -a-> -b->` becomes `p -b-> -a->`.
fn swept_square(p: [i64; 3], a: Letter, b: Letter) -> (Cell, i64) {
    let old = LatticeLoop {
        base: p,
        word: vec![a, b, a.inverse(), b.inverse()],
    };
    // The commutator a b a⁻¹ b⁻¹ bounds the square spanned at p by the two
    // steps; its orientation fixes the sign.
    let q = add(p, a.step());
    let r = add(q, b.step());
    let anchor = [
        p[0].min(r[0]),
        p[1].min(r[1]),
        p[2].min(r[2]),
    ];
    let square = Cell::square(anchor, a.axis, b.axis);
    let bd = boundary(&LatticeChain::from_cell(square, 1)).unwrap();
    let c = old.chain();
    let (e, k) = c.iter().next().unwrap();
    (square, k * bd.coeff(e))
}

/// Fill a closed lattice word.
pub fn fill_x1(lp: &LatticeLoop) -> Result<FillingResult> {
    if lp.displacement() != [0, 0, 0] {
        return Err(Error::Domain("open path".into()));
    }
    let mut base = lp.base;
    let mut w = lp.word.clone();
    let mut transcript = Vec::new();
    let mut chain = Chain::zero(2);
    loop {
        cancel_pairs(&mut base, &mut w, &mut transcript);
        if w.is_empty() {
            break;
        }
        let (i, j) = innermost_pair(&w).expect("closed nonempty word has an inverse pair");
        let mut p = base;
        for l in &w[..i] {
            p = add(p, l.step());
        }
        // Move w[i] right until it meets w[j].
        let a = w[i];
        for k in i..j - 1 {
            let b = w[k + 1];
            let (square, sign) = swept_square(p, a, b);
            chain.add_term(square, sign);
            transcript.push(Move::Transposition { square, sign });
            w.swap(k, k + 1);
            p = add(p, b.step());
        }
        transcript.push(Move::PairElimination { at: p, letter: a });
        w.drain(j - 1..=j);
    }
    let multiplicity = chain.linf();
    Ok(FillingResult {
        chain,
        multiplicity,
        transcript,
    })
}

/// Free and cyclic reduction, recording each cancellation.
fn cancel_pairs(base: &mut [i64; 3], w: &mut Vec<Letter>, transcript: &mut Vec<Move>) {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    let mut pos: Vec<[i64; 3]> = Vec::with_capacity(w.len());
    let mut p = *base;
    for &l in w.iter() {
        if out.last() == Some(&l.inverse()) {
            out.pop();
            let at = pos.pop().unwrap();
            transcript.push(Move::PairCancellation { at, letter: l.inverse() });
        } else {
            out.push(l);
            pos.push(p);
        }
        p = add(p, l.step());
    }
    let mut start = 0;
    let mut end = out.len();
    while end - start >= 2 && out[end - 1] == out[start].inverse() {
        transcript.push(Move::PairCancellation {
            at: pos[end - 1],
            letter: out[end - 1],
        });
        *base = add(pos[start], out[start].step());
        start += 1;
        end -= 1;
    }
    *w = out[start..end].to_vec();
}

/// Letter/inverse pair with no letter of the same axis between them, with the
/// shortest gap; leftmost among ties.
fn innermost_pair(w: &[Letter]) -> Option<(usize, usize)> {
    let mut last: [Option<usize>; 3] = [None; 3];
    let mut best: Option<(usize, usize)> = None;
    for (j, l) in w.iter().enumerate() {
        let ax = l.axis.index();
        if let Some(i) = last[ax] {
            if w[i] == l.inverse() && best.map_or(true, |(bi, bj)| j - i < bj - bi) {
                best = Some((i, j));
            }
        }
        last[ax] = Some(j);
    }
    best
}

/// Filling of a closed curve on the refined 1-skeleton.
#[derive(Clone, Debug)]
pub struct RefinedFilling {
    pub chain: RefinedChain2,
    pub multiplicity: u64,
    /// For every arc of the curve, the faces on its smaller side, signed so
    /// that the arc appears in the boundary as in the curve.
    pub caps: Vec<(usize, RefinedChain2)>,
    /// The lattice cycle left after replacing each arc by the rest of its
    /// cap boundary.
    pub remainder: LatticeChain,
    pub lattice_fillings: Vec<FillingResult>,
    /// Number of points of the curve on the lattice 1-skeleton.
    pub skeleton_points: usize,
}

impl RefinedFilling {
    pub fn bound(&self) -> u64 {
        5 * (self.skeleton_points as u64 + 1)
    }

    /// Recompute the boundary from scratch and check the multiplicity bound.
    pub fn verify(&self, rc: &RefinedComplex, target: &RefinedChain1) -> Result<()> {
        if &rc.boundary2(&self.chain)? != target {
            return Err(Error::Verification("boundary of refined filling differs from the curve".into()));
        }
        if self.chain.linf() != self.multiplicity {
            return Err(Error::Verification("recorded multiplicity is wrong".into()));
        }
        if self.multiplicity > self.bound() {
            return Err(Error::Verification(format!(
                "multiplicity {} exceeds {}",
                self.multiplicity,
                self.bound()
            )));
        }
        Ok(())
    }
}

/// Faces of the arc's square reachable from `start` without crossing `arc`.
fn side_region(rc: &RefinedComplex, square_arcs: &[usize], arc: usize, start: RFace) -> BTreeSet<RFace> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(f) = stack.pop() {
        for &b in square_arcs {
            if b == arc {
                continue;
            }
            let (p, m) = rc.arc_faces[b];
            for (x, y) in [(p, m), (m, p)] {
                if x == f && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
    }
    seen
}

/// Fill an embedded closed curve on the refined 1-skeleton. Each arc is
/// capped off by the smaller side of its square; what remains is a lattice
/// cycle, which is split into embedded loops and filled by `fill_x1`.
pub fn fill_refined(rc: &RefinedComplex, omega: &SkeletonPath<RVertex, REdge>) -> Result<RefinedFilling> {
    if !omega.closed || omega.is_empty() {
        return Err(Error::Domain("curve must be closed and nonempty".into()));
    }
    if !omega.is_embedded() {
        return Err(Error::Domain("curve must be embedded".into()));
    }
    let target = ch(omega);
    let skeleton_points = omega
        .distinct_stops()
        .iter()
        .filter(|v| !matches!(v, RVertex::Loop(_)))
        .count();
    let mut by_square: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
    for (i, a) in rc.arcs.iter().enumerate() {
        by_square.entry(a.square).or_default().push(i);
    }
    let mut caps = Vec::new();
    let mut capped = Chain::zero(2);
    for (e, s) in &omega.edges {
        let REdge::Arc(a) = e else { continue };
        let sq = rc.arcs[*a].square;
        let (plus, _) = rc.arc_faces[*a];
        let region = side_region(rc, &by_square[&sq], *a, plus);
        let all = rc.faces_of(&sq);
        let mut cap = Chain::zero(2);
        if 2 * region.len() <= all.len() {
            for f in &region {
                cap.add_term(*f, *s as i64);
            }
        } else {
            for f in all.iter().filter(|f| !region.contains(f)) {
                cap.add_term(*f, -(*s as i64));
            }
        }
        capped += &cap;
        caps.push((*a, cap));
    }
    let rest = &target - &rc.boundary2(&capped)?;
    let remainder = rc.collapse_edges(&rest)?;
    let mut lattice_fill = Chain::zero(2);
    let mut lattice_fillings = Vec::new();
    for piece in decompose_cycle(&LatticeSkeleton, &remainder)? {
        let lp = LatticeLoop::from_path(&piece)?;
        let f = fill_x1(&lp)?;
        f.verify(&lp.chain())?;
        lattice_fill += &f.chain;
        lattice_fillings.push(f);
    }
    let chain = &capped + &rc.push_squares(&lattice_fill);
    let out = RefinedFilling {
        multiplicity: chain.linf(),
        chain,
        caps,
        remainder,
        lattice_fillings,
        skeleton_points,
    };
    out.verify(rc, &target)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::word;
    use crate::lattice::Axis;

    fn check(lp: &LatticeLoop) -> FillingResult {
        let r = fill_x1(lp).unwrap();
        r.verify(&lp.chain()).unwrap();
        assert!(r.multiplicity <= lp.len() as u64);
        r
    }

    #[test]
    fn commutator_fills_one_square() {
        let lp = LatticeLoop::new([0, 0, 0], word("XYxy")).unwrap();
        let r = check(&lp);
        assert_eq!(r.chain.len(), 1);
        assert_eq!(r.multiplicity, 1);
        assert_eq!(r.chain.coeff(&Cell::square([0, 0, 0], Axis::X, Axis::Y)), 1);
    }

    #[test]
    fn empty_word_gives_zero_chain() {
        let lp = LatticeLoop::new([3, 1, 4], vec![]).unwrap();
        let r = check(&lp);
        assert!(r.chain.is_zero());
        assert_eq!(r.multiplicity, 0);
    }

    #[test]
    fn open_word_errors() {
        let lp = LatticeLoop {
            base: [0, 0, 0],
            word: word("XX"),
        };
        assert_eq!(fill_x1(&lp).unwrap_err().to_string(), "open path");
    }

    #[test]
    fn reversed_loop_gives_negated_filling() {
        let lp = LatticeLoop::new([0, 0, 0], word("XXYZxxzy")).unwrap();
        let r = check(&lp);
        let rev = LatticeLoop::from_path(&lp.to_path().reversed()).unwrap();
        let r2 = check(&rev);
        assert_eq!(boundary(&r2.chain).unwrap(), -&boundary(&r.chain).unwrap());
    }

    #[test]
    fn backtracking_words_reduce_without_squares() {
        let lp = LatticeLoop::new([0, 0, 0], word("XYZzyx")).unwrap();
        let r = check(&lp);
        assert!(r.chain.is_zero());
        assert!(r
            .transcript
            .iter()
            .all(|m| matches!(m, Move::PairCancellation { .. })));
    }

    #[test]
    fn rectangle_has_unit_multiplicity() {
        let lp = LatticeLoop::new([0, 0, 0], word("XXXYYxxxyy")).unwrap();
        let r = check(&lp);
        assert_eq!(r.chain.len(), 6);
        assert_eq!(r.multiplicity, 1);
    }

    #[test]
    fn text_roundtrip_and_replay() {
        let lp = LatticeLoop::new([1, 0, -1], word("XYZxyz")).unwrap();
        let r = check(&lp);
        let back = FillingResult::from_text(&r.to_text()).unwrap();
        assert_eq!(back, r);
        back.verify(&lp.chain()).unwrap();
    }

    #[test]
    fn each_step_shortens_the_word() {
        let lp = LatticeLoop::new([0, 0, 0], word("XYXYZxyxyz")).unwrap();
        let r = check(&lp);
        let removals = r
            .transcript
            .iter()
            .filter(|m| !matches!(m, Move::Transposition { .. }))
            .count();
        assert_eq!(2 * removals, lp.len());
    }
}

//! Intersection of a triangulated surface with the lattice 2-skeleton.
//!
//! Coordinates are first mapped to lattice units, where lattice planes are
//! the integer level sets of a coordinate. Every triangle meets a plane in a
//! segment whose endpoints lie on two of its edges; an endpoint is identified
//! by the plane and the mesh edge, which is how segments are stitched into
//! closed curves without any tolerance.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{cross, dist_f64, dot, floor_int, point_f64, snap, to_f64, vsub, Point3, Rat};
use crate::homology::{cadd, Class, HomologyLabeling};
use crate::lattice::{Axis, Cell, Lattice};
use crate::mesh::{format_rational, TorusMesh};
use crate::curves::SkeletonPath;
use crate::refined::{ArcInfo, HitInfo, REdge, RVertex, RefinedComplex};

/// A closed intersection curve of the surface with one lattice plane.
#[derive(Clone, Debug)]
pub struct CurveInfo {
    pub axis: Axis,
    pub level: i64,
    pub arcs: Vec<usize>,
    pub length: f64,
    pub hit_count: usize,
}

#[derive(Clone, Debug)]
pub struct IntersectionData {
    pub lattice: Lattice,
    pub curves: Vec<CurveInfo>,
    pub total_length: f64,
    pub refined: RefinedComplex,
}

impl IntersectionData {
    pub fn hit_count(&self) -> usize {
        self.refined.hits.len()
    }

    /// Physical position of a point given in lattice units.
    pub fn to_world(&self, p: &Point3) -> [f64; 3] {
        let q = point_f64(p);
        let s = to_f64(&self.lattice.spacing);
        let o = point_f64(&self.lattice.offset);
        [o[0] + s * q[0], o[1] + s * q[1], o[2] + s * q[2]]
    }

    /// Curve `ci` traced on the refined 1-skeleton.
    pub fn curve_path(&self, ci: usize) -> SkeletonPath<RVertex, REdge> {
        let arcs = &self.curves[ci].arcs;
        let rc = &self.refined;
        let first = &rc.arcs[arcs[0]];
        let mut vertices = vec![match first.start {
            Some(h) => RVertex::Hit(h),
            None => RVertex::Loop(arcs[0]),
        }];
        let mut edges = Vec::with_capacity(arcs.len());
        for &a in arcs {
            edges.push((REdge::Arc(a), 1));
            vertices.push(match rc.arcs[a].end {
                Some(h) => RVertex::Hit(h),
                None => RVertex::Loop(a),
            });
        }
        SkeletonPath { vertices, edges, closed: true }
    }

    /// Sectioned text report; floats carry 15 significant digits.
    pub fn report(&self) -> String {
        let mut s = String::new();
        s.push_str("[lattice]\n");
        writeln!(s, "spacing {}", format_rational(&self.lattice.spacing)).unwrap();
        let o: Vec<String> = self.lattice.offset.iter().map(format_rational).collect();
        writeln!(s, "offset {}", o.join(" ")).unwrap();
        s.push_str("[summary]\n");
        writeln!(s, "x1_hits {}", self.hit_count()).unwrap();
        writeln!(s, "curves {}", self.curves.len()).unwrap();
        writeln!(s, "arcs {}", self.refined.arcs.len()).unwrap();
        writeln!(s, "subdivided_squares {}", self.refined.squares.len()).unwrap();
        writeln!(s, "x2_length {}", fmt15(self.total_length)).unwrap();
        s.push_str("[hits]\n");
        for h in &self.refined.hits {
            let w = self.to_world(&h.point);
            writeln!(
                s,
                "{} triangle {} at {} {} {}",
                h.edge.to_line(),
                h.triangle,
                fmt15(w[0]),
                fmt15(w[1]),
                fmt15(w[2])
            )
            .unwrap();
        }
        s.push_str("[curves]\n");
        for (i, c) in self.curves.iter().enumerate() {
            writeln!(
                s,
                "curve {i} plane {}={} hits {} arcs {} length {}",
                c.axis.letter(),
                c.level,
                c.hit_count,
                c.arcs.len(),
                fmt15(c.length)
            )
            .unwrap();
        }
        s
    }
}

/// Format with 15 significant digits.
pub fn fmt15(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.14e}")
}

/// Homology label of an arc in the `(e1, e2)` basis: the class of the vertex
/// path homotopic to it, between the representative vertices of its first and
/// last triangles. Closed arcs get their loop class.
pub fn arc_label(mesh: &TorusMesh, lab: &HomologyLabeling, arc: &ArcInfo) -> Result<Class> {
    let mut c = [0, 0];
    for &(from, to, (a, _)) in &arc.crossings {
        c = cadd(c, lab.crossing_label(mesh, from, to, a)?);
    }
    Ok(c)
}

#[derive(Clone, Debug)]
struct Segment {
    tri: usize,
    axis: Axis,
    level: i64,
    from: (usize, usize),
    to: (usize, usize),
    p: Point3,
    q: Point3,
    /// Hits along the segment: (parameter, lattice edge).
    hits: Vec<(Rat, Cell)>,
}

fn ceil_int(x: &Rat) -> i64 {
    let f = floor_int(x);
    if x.is_integer() {
        f
    } else {
        f + 1
    }
}

fn triangle_segments(tri: usize, t: [usize; 3], q: &[Point3]) -> Result<Vec<Segment>> {
    let pts = [&q[t[0]], &q[t[1]], &q[t[2]]];
    let normal = cross(&vsub(pts[1], pts[0]), &vsub(pts[2], pts[0]));
    let mut out = Vec::new();
    for axis in Axis::ALL {
        let ai = axis.index();
        let lo = pts.iter().map(|p| &p[ai]).min().unwrap();
        let hi = pts.iter().map(|p| &p[ai]).max().unwrap();
        for level in ceil_int(lo)..=floor_int(hi) {
            let kr = Rat::from_integer(level.into());
            let mut ends: Vec<((usize, usize), Point3)> = Vec::with_capacity(2);
            for e in 0..3 {
                let (i, j) = (t[e], t[(e + 1) % 3]);
                let (a, b) = (&q[i][ai], &q[j][ai]);
                if (a < &kr) != (b < &kr) {
                    let lambda = (&kr - a) / (b - a);
                    let p = crate::geometry::lerp(&q[i], &q[j], &lambda);
                    ends.push(((i.min(j), i.max(j)), p));
                }
            }
            if ends.len() != 2 {
                return Err(Error::GeneralPosition(format!(
                    "triangle {tri} touches plane {}={level}",
                    axis.letter()
                )));
            }
            // Orient along normal × axis so neighbouring triangles agree.
            let mut dir = [Rat::zero(), Rat::zero(), Rat::zero()];
            dir[ai] = Rat::from_integer(1.into());
            let d = cross(&normal, &dir);
            let (mut s0, mut s1) = (ends[0].clone(), ends[1].clone());
            let sgn = dot(&vsub(&s1.1, &s0.1), &d);
            if sgn.is_zero() {
                return Err(Error::GeneralPosition(format!(
                    "triangle {tri} is tangent to plane {}={level}",
                    axis.letter()
                )));
            }
            if sgn.is_negative() {
                std::mem::swap(&mut s0, &mut s1);
            }
            let mut seg = Segment {
                tri,
                axis,
                level,
                from: s0.0,
                to: s1.0,
                p: s0.1,
                q: s1.1,
                hits: Vec::new(),
            };
            seg.hits = segment_hits(&seg)?;
            out.push(seg);
        }
    }
    Ok(out)
}

/// Crossings of a planar segment with the lattice lines of its plane.
fn segment_hits(seg: &Segment) -> Result<Vec<(Rat, Cell)>> {
    let mut hits = Vec::new();
    let b = seg.axis.next();
    let c = b.next();
    for (cut, along) in [(b, c), (c, b)] {
        let (u0, u1) = (&seg.p[cut.index()], &seg.q[cut.index()]);
        if u0.is_integer() || u1.is_integer() {
            return Err(Error::GeneralPosition(format!(
                "intersection curve in plane {}={} meets a lattice line at a mesh edge (triangle {})",
                seg.axis.letter(),
                seg.level,
                seg.tri
            )));
        }
        let (lo, hi) = if u0 < u1 { (u0, u1) } else { (u1, u0) };
        for j in ceil_int(lo)..=floor_int(hi) {
            let jr = Rat::from_integer(j.into());
            let lambda = (&jr - u0) / (u1 - u0);
            let w = &seg.p[along.index()] + (&seg.q[along.index()] - &seg.p[along.index()]) * &lambda;
            if w.is_integer() {
                return Err(Error::GeneralPosition(format!(
                    "intersection curve passes through a lattice vertex (triangle {})",
                    seg.tri
                )));
            }
            let mut anchor = [0i64; 3];
            anchor[seg.axis.index()] = seg.level;
            anchor[cut.index()] = j;
            anchor[along.index()] = floor_int(&w);
            hits.push((lambda, Cell::edge(anchor, along)));
        }
    }
    hits.sort_by(|x, y| x.0.cmp(&y.0));
    if hits.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::GeneralPosition(format!(
            "intersection curve passes through a lattice vertex (triangle {})",
            seg.tri
        )));
    }
    Ok(hits)
}

/// Map mesh vertices to lattice units, rejecting vertices on lattice planes.
pub fn to_lattice_units(mesh: &TorusMesh, lattice: &Lattice) -> Result<Vec<Point3>> {
    mesh.vertices
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let q: Point3 = [
                (&p[0] - &lattice.offset[0]) / &lattice.spacing,
                (&p[1] - &lattice.offset[1]) / &lattice.spacing,
                (&p[2] - &lattice.offset[2]) / &lattice.spacing,
            ];
            for a in Axis::ALL {
                if q[a.index()].is_integer() {
                    return Err(Error::GeneralPosition(format!(
                        "mesh vertex {i} lies on lattice plane {}={}",
                        a.letter(),
                        q[a.index()]
                    )));
                }
            }
            Ok(q)
        })
        .collect()
}

pub fn intersect_lattice(mesh: &TorusMesh, lattice: &Lattice) -> Result<IntersectionData> {
    if !lattice.spacing.is_positive() {
        return Err(Error::Domain("lattice spacing must be positive".into()));
    }
    let q = to_lattice_units(mesh, lattice)?;
    let per_tri: Vec<Result<Vec<Segment>>> = mesh
        .triangles
        .par_iter()
        .enumerate()
        .map(|(ti, t)| triangle_segments(ti, *t, &q))
        .collect();
    let mut segs = Vec::new();
    for r in per_tri {
        segs.extend(r?);
    }
    let key = |s: &Segment, end: (usize, usize)| (s.axis, s.level, end);
    let mut by_from: HashMap<(Axis, i64, (usize, usize)), usize> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        if by_from.insert(key(s, s.from), i).is_some() {
            return Err(Error::Verification(format!(
                "two curve pieces leave the same point on mesh edge {:?}",
                s.from
            )));
        }
    }
    let mut next = vec![usize::MAX; segs.len()];
    for (i, s) in segs.iter().enumerate() {
        next[i] = *by_from.get(&key(s, s.to)).ok_or_else(|| {
            Error::Verification(format!("intersection curve is open at mesh edge {:?}", s.to))
        })?;
    }
    // Hits are found from both planes through their lattice edge.
    let mut hit_seen: BTreeMap<(Cell, usize), (Point3, u8)> = BTreeMap::new();
    for s in &segs {
        for (lambda, e) in &s.hits {
            let p = crate::geometry::lerp(&s.p, &s.q, lambda);
            let entry = hit_seen.entry((*e, s.tri)).or_insert((p.clone(), 0));
            if entry.0 != p {
                return Err(Error::Verification(format!("inconsistent crossing on {e}")));
            }
            entry.1 += 1;
        }
    }
    let mut hit_id: HashMap<(Cell, usize), usize> = HashMap::new();
    let mut hits = Vec::new();
    for ((e, tri), (p, count)) in hit_seen {
        if count != 2 {
            return Err(Error::Verification(format!(
                "crossing on {e} in triangle {tri} seen {count} times"
            )));
        }
        hit_id.insert((e, tri), hits.len());
        hits.push(HitInfo { edge: e, point: p, triangle: tri });
    }

    let spacing = to_f64(&lattice.spacing);
    let mut order: Vec<usize> = (0..segs.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (&segs[i], &segs[j]);
        (a.axis, a.level, a.from).cmp(&(b.axis, b.level, b.from))
    });
    let mut visited = vec![false; segs.len()];
    let mut curves = Vec::new();
    let mut arcs: Vec<ArcInfo> = Vec::new();
    for &start in &order {
        if visited[start] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            cyc.push(cur);
            cur = next[cur];
        }
        if cur != start {
            return Err(Error::Verification("intersection curves are not disjoint circles".into()));
        }
        let ci = curves.len();
        let s0 = &segs[cyc[0]];
        let first_arc = arcs.len();
        let hit_count: usize = cyc.iter().map(|&i| segs[i].hits.len()).sum();
        if hit_count == 0 {
            let mut points = Vec::new();
            let mut triangles = Vec::new();
            let mut crossings = Vec::new();
            for (k, &i) in cyc.iter().enumerate() {
                let prev = cyc[(k + cyc.len() - 1) % cyc.len()];
                points.push(segs[i].p.clone());
                triangles.push(segs[i].tri);
                crossings.push((segs[prev].tri, segs[i].tri, segs[i].from));
            }
            let mid = midpoint(&s0.p, &s0.q);
            let length = polyline_length(&points, true) * spacing;
            arcs.push(ArcInfo {
                square: RefinedComplex::square_at(s0.axis, s0.level, &mid),
                curve: ci,
                start: None,
                end: None,
                points,
                triangles,
                crossings,
                length,
            });
        } else {
            // Rotate to begin at the first segment carrying a hit.
            let r = cyc.iter().position(|&i| !segs[i].hits.is_empty()).unwrap();
            cyc.rotate_left(r);
            let mut open: Option<ArcInfo> = None;
            let n = cyc.len();
            for step in 0..=n {
                let i = cyc[step % n];
                let s = &segs[i];
                if step > 0 {
                    if let Some(arc) = open.as_mut() {
                        let prev = &segs[cyc[step - 1]];
                        arc.points.push(s.p.clone());
                        arc.crossings.push((prev.tri, s.tri, s.from));
                        arc.triangles.push(s.tri);
                    }
                }
                let limit = if step == n { 1 } else { s.hits.len() };
                for (_, e) in s.hits.iter().take(limit) {
                    let h = hit_id[&(*e, s.tri)];
                    let hp = hits[h].point.clone();
                    if let Some(mut arc) = open.take() {
                        arc.points.push(hp.clone());
                        arc.end = Some(h);
                        let mid = midpoint(&arc.points[0], &arc.points[1]);
                        arc.square = RefinedComplex::square_at(s.axis, s.level, &mid);
                        arc.length = polyline_length(&arc.points, false) * spacing;
                        arcs.push(arc);
                    }
                    if step < n {
                        open = Some(ArcInfo {
                            square: Cell::vertex([0, 0, 0]),
                            curve: ci,
                            start: Some(h),
                            end: None,
                            points: vec![hp],
                            triangles: vec![s.tri],
                            crossings: Vec::new(),
                            length: 0.0,
                        });
                    }
                }
            }
        }
        let arc_ids: Vec<usize> = (first_arc..arcs.len()).collect();
        let length = arc_ids.iter().map(|&a| arcs[a].length).sum();
        curves.push(CurveInfo {
            axis: s0.axis,
            level: s0.level,
            arcs: arc_ids,
            length,
            hit_count,
        });
    }
    let total_length = curves.iter().map(|c| c.length).sum();
    let refined = RefinedComplex::build(hits, arcs)?;
    Ok(IntersectionData {
        lattice: lattice.clone(),
        curves,
        total_length,
        refined,
    })
}

fn midpoint(a: &Point3, b: &Point3) -> Point3 {
    let two = Rat::from_integer(2.into());
    [
        (&a[0] + &b[0]) / &two,
        (&a[1] + &b[1]) / &two,
        (&a[2] + &b[2]) / &two,
    ]
}

fn polyline_length(points: &[Point3], closed: bool) -> f64 {
    let f: Vec<[f64; 3]> = points.iter().map(point_f64).collect();
    let mut l: f64 = f.windows(2).map(|w| dist_f64(w[0], w[1])).sum();
    if closed && f.len() > 1 {
        l += dist_f64(f[f.len() - 1], f[0]);
    }
    l
}

/// Floating-point measurement of `length(X² ∩ T)` and `|X¹ ∩ T|` for the
/// lattice of the given spacing and offset, triangle by triangle without
/// stitching.
pub fn measure_f64(verts: &[[f64; 3]], tris: &[[usize; 3]], spacing: f64, offset: [f64; 3]) -> (f64, usize) {
    let mut length = 0.0;
    let mut hits = 0usize;
    for t in tris {
        let p: Vec<[f64; 3]> = t
            .iter()
            .map(|&i| {
                let v = verts[i];
                [
                    (v[0] - offset[0]) / spacing,
                    (v[1] - offset[1]) / spacing,
                    (v[2] - offset[2]) / spacing,
                ]
            })
            .collect();
        for a in 0..3 {
            let lo = p.iter().map(|x| x[a]).fold(f64::INFINITY, f64::min);
            let hi = p.iter().map(|x| x[a]).fold(f64::NEG_INFINITY, f64::max);
            let mut k = lo.ceil();
            while k <= hi {
                let mut ends = Vec::with_capacity(2);
                for e in 0..3 {
                    let (u, w) = (p[e], p[(e + 1) % 3]);
                    if (u[a] < k) != (w[a] < k) {
                        let l = (k - u[a]) / (w[a] - u[a]);
                        ends.push([
                            u[0] + l * (w[0] - u[0]),
                            u[1] + l * (w[1] - u[1]),
                            u[2] + l * (w[2] - u[2]),
                        ]);
                    }
                }
                if ends.len() == 2 {
                    length += dist_f64(ends[0], ends[1]) * spacing;
                }
                k += 1.0;
            }
            // Lines parallel to axis a: integer points inside the projection.
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let pb: Vec<(f64, f64)> = p.iter().map(|x| (x[b], x[c])).collect();
            let (bl, bh) = (
                pb.iter().map(|x| x.0).fold(f64::INFINITY, f64::min),
                pb.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max),
            );
            let (cl, ch) = (
                pb.iter().map(|x| x.1).fold(f64::INFINITY, f64::min),
                pb.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max),
            );
            let mut i = bl.ceil();
            while i <= bh {
                let mut j = cl.ceil();
                while j <= ch {
                    if inside_tri2(&pb, (i, j)) {
                        hits += 1;
                    }
                    j += 1.0;
                }
                i += 1.0;
            }
        }
    }
    (length, hits)
}

fn inside_tri2(t: &[(f64, f64)], p: (f64, f64)) -> bool {
    let o = |a: (f64, f64), b: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let d = [o(t[0], t[1]), o(t[1], t[2]), o(t[2], t[0])];
    (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0)
}

/// Summary of the offset sampling.
#[derive(Clone, Debug)]
pub struct TranslationStats {
    pub samples: usize,
    pub qualifying: usize,
    /// Estimated integral of `length(X² ∩ (T+s))` over the offset cell and
    /// its standard error.
    pub length_integral: (f64, f64),
    /// Estimated integral of `|X¹ ∩ (T+s)|` over the offset cell and its
    /// standard error.
    pub hits_integral: (f64, f64),
    /// Index of the first qualifying sample.
    pub first: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TranslationResult {
    /// Offset of the lattice; the surface is translated by its negative.
    pub offset: Point3,
    pub length: f64,
    pub hits: usize,
    pub stats: TranslationStats,
    /// Every qualifying offset in sample order, with its length and hits.
    pub qualifying: Vec<(Point3, f64, usize)>,
}

/// Dyadic offset for sample `i` of the stream `seed`, uniform in the cell
/// `[0, spacing)³`.
pub fn sample_offset(seed: u64, i: usize, spacing: f64) -> Point3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let mut v = || snap(rng.gen::<f64>() * spacing, 32);
    [v(), v(), v()]
}

/// Sample lattice offsets until one has `length(X² ∩ T) ≤ 9m` and
/// `|X¹ ∩ T| ≤ 9m²` for lattice spacing `1/m`.
pub fn translation_search(mesh: &TorusMesh, m: f64, samples: usize, seed: u64) -> Result<TranslationResult> {
    if !(m > 0.0) {
        return Err(Error::Domain("m must be positive".into()));
    }
    let spacing = 1.0 / m;
    let verts = mesh.vertices_f64();
    let results: Vec<(Point3, f64, usize)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let off = sample_offset(seed, i, spacing);
            let (l, h) = measure_f64(&verts, &mesh.triangles, spacing, point_f64(&off));
            (off, l, h)
        })
        .collect();
    let n = results.len().max(1) as f64;
    let vol = spacing.powi(3);
    let mean_se = |xs: Vec<f64>| -> (f64, f64) {
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (mean * vol, (var / n).sqrt() * vol)
    };
    let ok = |l: f64, h: usize| l <= 9.0 * m && (h as f64) <= 9.0 * m * m;
    let first = results.iter().position(|(_, l, h)| ok(*l, *h));
    let stats = TranslationStats {
        samples,
        qualifying: results.iter().filter(|(_, l, h)| ok(*l, *h)).count(),
        length_integral: mean_se(results.iter().map(|r| r.1).collect()),
        hits_integral: mean_se(results.iter().map(|r| r.2 as f64).collect()),
        first,
    };
    match first {
        Some(i) => Ok(TranslationResult {
            offset: results[i].0.clone(),
            length: results[i].1,
            hits: results[i].2,
            stats,
            qualifying: results.iter().filter(|(_, l, h)| ok(*l, *h)).cloned().collect(),
        }),
        None => {
            let best = results
                .iter()
                .min_by(|a, b| (a.1 / m + a.2 as f64 / (m * m)).total_cmp(&(b.1 / m + b.2 as f64 / (m * m))));
            Err(Error::Exhausted(format!(
                "no qualifying offset in {samples} samples; best length {} hits {}; \
                 length integral {} ± {}, hits integral {} ± {}",
                best.map_or(f64::NAN, |b| b.1),
                best.map_or(0, |b| b.2),
                fmt15(stats.length_integral.0),
                fmt15(stats.length_integral.1),
                fmt15(stats.hits_integral.0),
                fmt15(stats.hits_integral.1)
            )))
        }
    }
}

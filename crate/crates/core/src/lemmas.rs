//! Exhaustive and randomized property suites for the chain-level identities
//! and filling bounds.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curves::{ch, decompose_cycle, LatticeLoop, LatticeSkeleton, Letter};
use crate::error::{Error, Result};
use crate::filling::{fill_refined, fill_x1};
use crate::geometry::snap;
use crate::intersect::{intersect_lattice, IntersectionData};
use crate::lattice::{boundary, Axis, Cell, Chain, Lattice, LatticeChain};
use crate::mesh::TorusMesh;
use crate::refined::RefinedChain2;

pub const LEMMAS: [&str; 6] = [
    "boundary-squared",
    "ch-additivity",
    "decompose-l1",
    "boundary-norm",
    "fill-x1",
    "fill-refined",
];

#[derive(Clone, Debug)]
pub struct LemmaConfig {
    pub seed: u64,
    /// Longest word in the exhaustive loop enumeration.
    pub max_len: usize,
    /// Random cases per suite.
    pub cases: usize,
    /// Compare fillings against the brute-force optimum.
    pub oracle: bool,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        LemmaConfig { seed: 0, max_len: 12, cases: 1000, oracle: false }
    }
}

#[derive(Clone, Debug)]
pub struct LemmaReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl LemmaReport {
    fn new(name: &'static str) -> LemmaReport {
        LemmaReport { name, cases: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failures.len() < 10 {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "lemma {} cases {} {}",
            self.name,
            self.cases,
            if self.passed() { "PASS" } else { "FAIL" }
        );
        if let Some(f) = self.failures.first() {
            write!(s, " first-failure {f}").unwrap();
        }
        s
    }
}

pub fn run_lemma(name: &str, cfg: &LemmaConfig) -> Result<LemmaReport> {
    match name {
        "boundary-squared" => boundary_squared(cfg),
        "ch-additivity" => ch_additivity(cfg),
        "decompose-l1" => decompose_l1(cfg),
        "boundary-norm" => boundary_norm(cfg),
        "fill-x1" => fill_x1_suite(cfg),
        "fill-refined" => fill_refined_suite(cfg),
        other => Err(Error::Parse(format!(
            "unknown lemma {other:?}; expected one of {}",
            LEMMAS.join(", ")
        ))),
    }
}

fn letters() -> Vec<Letter> {
    let mut out = Vec::new();
    for a in [Axis::X, Axis::Y, Axis::Z] {
        out.push(Letter::new(a, true));
        out.push(Letter::new(a, false));
    }
    out
}

/// A random closed word of length at most `max_len`: a random walk followed
/// by a shuffled return.
pub fn random_closed_word<R: Rng>(rng: &mut R, max_len: usize) -> Vec<Letter> {
    let all = letters();
    let half = rng.gen_range(0..=max_len / 2);
    let mut w: Vec<Letter> = (0..half).map(|_| *all.choose(rng).unwrap()).collect();
    let mut d = [0i64; 3];
    for l in &w {
        let s = l.step();
        (0..3).for_each(|i| d[i] += s[i]);
    }
    let mut back = Vec::new();
    for a in [Axis::X, Axis::Y, Axis::Z] {
        let k = d[a.index()];
        back.extend(std::iter::repeat_n(Letter::new(a, k < 0), k.unsigned_abs() as usize));
    }
    back.shuffle(rng);
    w.extend(back);
    w
}

/// All embedded lattice loops of length at most `max_len` inside
/// `{0..side}³`, one per translation class and orientation.
pub fn exhaustive_embedded_loops(side: i64, max_len: usize) -> Vec<LatticeLoop> {
    let mut out = Vec::new();
    for x in 0..side {
        for y in 0..side {
            for z in 0..side {
                let start = [x, y, z];
                dfs(start, &mut vec![start], &mut Vec::new(), max_len, side, &mut out);
            }
        }
    }
    out
}

fn dfs(
    start: [i64; 3],
    path: &mut Vec<[i64; 3]>,
    word: &mut Vec<Letter>,
    max_len: usize,
    side: i64,
    out: &mut Vec<LatticeLoop>,
) {
    let cur = *path.last().unwrap();
    for l in letters() {
        let s = l.step();
        let q = [cur[0] + s[0], cur[1] + s[1], cur[2] + s[2]];
        if q == start && word.len() >= 3 {
            // One orientation, and only loops touching every lower face.
            if path[1] < *path.last().unwrap() {
                let mut w = word.clone();
                w.push(l);
                let lp = LatticeLoop::new(start, w).unwrap();
                let vs = lp.vertices();
                if (0..3).all(|i| vs.iter().any(|v| v[i] == 0)) {
                    out.push(lp);
                }
            }
            continue;
        }
        let inside = q.iter().all(|&c| c >= 0 && c < side);
        if word.len() + 1 >= max_len || !inside || q <= start || path.contains(&q) {
            continue;
        }
        path.push(q);
        word.push(l);
        dfs(start, path, word, max_len, side, out);
        path.pop();
        word.pop();
    }
}

/// A random embedded loop grown from a unit square by detours: an edge
/// `p -> p+a` becomes `p -> p+b -> p+a+b -> p+a` when both new vertices are
/// unused and inside the grid.
pub fn random_embedded_loop<R: Rng>(rng: &mut R, side: i64, target_len: usize) -> LatticeLoop {
    let all = letters();
    let inside = |p: [i64; 3]| p.iter().all(|&c| c >= 0 && c < side);
    let base = [0; 3].map(|_| rng.gen_range(0..side - 1));
    let mut word: Vec<Letter> = vec![all[0], all[2], all[1], all[3]];
    for _ in 0..200 {
        if word.len() + 2 > target_len {
            break;
        }
        let vs = LatticeLoop::new(base, word.clone()).unwrap().vertices();
        let used: HashSet<[i64; 3]> = vs.iter().cloned().collect();
        let i = rng.gen_range(0..word.len());
        let a = word[i];
        let b = *all.choose(rng).unwrap();
        if b.axis == a.axis {
            continue;
        }
        let (s, t) = (b.step(), a.step());
        let q1 = [0, 1, 2].map(|k| vs[i][k] + s[k]);
        let q2 = [0, 1, 2].map(|k| q1[k] + t[k]);
        if !inside(q1) || !inside(q2) || used.contains(&q1) || used.contains(&q2) {
            continue;
        }
        word.splice(i..=i, [b, a, b.inverse()]);
    }
    LatticeLoop::new(base, word).unwrap()
}

pub fn bounding_box(l: &LatticeLoop) -> ([i64; 3], [i64; 3]) {
    let vs = l.vertices();
    let (mut lo, mut hi) = (vs[0], vs[0]);
    for v in &vs {
        for i in 0..3 {
            lo[i] = lo[i].min(v[i]);
            hi[i] = hi[i].max(v[i]);
        }
    }
    (lo, hi)
}

/// Smallest sup norm of a 2-chain supported in the box `[lo, hi]` with the
/// same boundary as `c0`.
///
/// Such chains are `c0 + ∂D` for 3-chains `D` in the box, and a square's
/// coefficient in `∂D` is `D[below] - D[above]`. A sup-norm bound is thus a
/// system of difference constraints, decided exactly by Bellman-Ford.
pub fn min_linf_filling(c0: &LatticeChain, lo: [i64; 3], hi: [i64; 3]) -> u64 {
    (0..=c0.linf()).find(|&t| feasible(c0, lo, hi, t as i64)).unwrap()
}

fn feasible(c0: &LatticeChain, lo: [i64; 3], hi: [i64; 3], t: i64) -> bool {
    let in_box = |p: [i64; 3]| (0..3).all(|i| p[i] >= lo[i] && p[i] < hi[i]);
    let mut cubes = BTreeMap::new();
    for x in lo[0]..hi[0] {
        for y in lo[1]..hi[1] {
            for z in lo[2]..hi[2] {
                let n = cubes.len() + 1;
                cubes.insert([x, y, z], n);
            }
        }
    }
    // Node 0 is the cube value fixed to zero outside the box.
    let node = |p: [i64; 3]| if in_box(p) { cubes[&p] } else { 0 };
    let mut squares: BTreeSet<Cell> = c0.keys().cloned().collect();
    for &p in cubes.keys() {
        for a in [Axis::X, Axis::Y, Axis::Z] {
            let (b, c) = (a.next(), a.next().next());
            squares.insert(Cell::square(p, b, c));
            squares.insert(Cell::square(p, b, c).shifted(a, 1));
        }
    }
    // (u, v, w) encodes D[v] - D[u] <= w.
    let mut edges = Vec::new();
    for s in &squares {
        let a = s.normal_axis().unwrap();
        let mut below = s.anchor;
        below[a.index()] -= 1;
        let (u, v) = (node(below), node(s.anchor));
        let k = c0.coeff(s);
        if u == 0 && v == 0 {
            if k.abs() > t {
                return false;
            }
            continue;
        }
        edges.push((v, u, t - k));
        edges.push((u, v, t + k));
    }
    let mut dist = vec![0i64; cubes.len() + 1];
    for _ in 0..dist.len() {
        let mut changed = false;
        for &(u, v, w) in &edges {
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

fn grid_cells(side: i64, dim: usize) -> Vec<Cell> {
    let mut out = Vec::new();
    for x in 0..side {
        for y in 0..side {
            for z in 0..side {
                let p = [x, y, z];
                match dim {
                    3 => out.push(Cell::cube(p)),
                    2 => {
                        for a in [Axis::X, Axis::Y, Axis::Z] {
                            out.push(Cell::square(p, a.next(), a.next().next()));
                        }
                    }
                    _ => {
                        for a in [Axis::X, Axis::Y, Axis::Z] {
                            out.push(Cell::edge(p, a));
                        }
                    }
                }
            }
        }
    }
    out
}

fn boundary_squared(cfg: &LemmaConfig) -> Result<LemmaReport> {
    let mut r = LemmaReport::new("boundary-squared");
    for dim in [2, 3] {
        for c in grid_cells(4, dim) {
            let bb = boundary(&boundary(&LatticeChain::from_cell(c, 1))?)?;
            r.check(bb.is_zero(), || format!("cell {}", c.to_line()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..cfg.cases {
        let dim = 2 + i % 2;
        let cells = grid_cells(8, dim);
        let c: LatticeChain = (0..rng.gen_range(1..30))
            .map(|_| (*cells.choose(&mut rng).unwrap(), rng.gen_range(-9..=9)))
            .collect();
        let bb = boundary(&boundary(&c)?)?;
        r.check(bb.is_zero(), || format!("random {dim}-chain {i}"));
    }
    Ok(r)
}

fn ch_additivity(cfg: &LemmaConfig) -> Result<LemmaReport> {
    let mut r = LemmaReport::new("ch-additivity");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while r.cases < cfg.cases {
        let w = random_closed_word(&mut rng, 40);
        if w.is_empty() {
            continue;
        }
        let path = LatticeLoop::new([0; 3].map(|_| rng.gen_range(-5..5)), w)?.to_path();
        let k = rng.gen_range(0..=path.len());
        let (a, b) = (path.slice(0, k), path.slice(k, path.len()));
        let joined = a.concat(&b)?;
        r.check(ch(&path) == &ch(&a) + &ch(&b) && joined.edges == path.edges, || {
            format!("split at {k} of a walk of length {}", path.len())
        });
    }
    Ok(r)
}

fn decompose_l1(cfg: &LemmaConfig) -> Result<LemmaReport> {
    let mut r = LemmaReport::new("decompose-l1");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..cfg.cases {
        // Sums of a few closed walks give cycles with repeated vertices.
        let mut alpha: LatticeChain = Chain::zero(1);
        for _ in 0..rng.gen_range(1..4) {
            let w = random_closed_word(&mut rng, 24);
            alpha += &LatticeLoop::new([0; 3].map(|_| rng.gen_range(-2..2)), w)?.chain();
        }
        let pieces = decompose_cycle(&LatticeSkeleton, &alpha)?;
        let mut sum: LatticeChain = Chain::zero(1);
        let mut l1 = 0;
        let mut embedded = true;
        for p in &pieces {
            let c = ch(p);
            l1 += c.l1();
            sum += &c;
            embedded &= p.is_embedded();
        }
        r.check(sum == alpha && l1 == alpha.l1() && embedded, || format!("random cycle {i}"));
    }
    Ok(r)
}

/// Intersection data for `mesh` at `spacing`, retrying seeded offsets until
/// the lattice is in general position.
pub fn intersect_somewhere(mesh: &TorusMesh, spacing: f64, seed: u64) -> Result<IntersectionData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..50 {
        let lat = Lattice {
            spacing: snap(spacing, 24),
            offset: [0; 3].map(|_| snap(rng.gen::<f64>() * spacing, 30)),
        };
        match intersect_lattice(mesh, &lat) {
            Err(Error::GeneralPosition(_)) => continue,
            other => return other,
        }
    }
    Err(Error::GeneralPosition("no general position offset in 50 tries".into()))
}

/// Meshes and spacings for the refined-complex suites.
pub fn refined_instances() -> Result<Vec<(TorusMesh, f64)>> {
    use crate::generators::*;
    Ok(vec![
        (gen_twisted_cylinder(1, 16)?, 0.03),
        (gen_twisted_cylinder(3, 48)?, 0.1),
        (gen_standard_torus(2.0, 1.0, 24)?, 0.45),
        (gen_flat_rectangular([0.5, 0.5, 0.0], 0.4, 0.15, 0.2)?, 0.09),
        (gen_knot_tube(3, 0.4, 96)?, 0.5),
    ])
}

fn boundary_norm(cfg: &LemmaConfig) -> Result<LemmaReport> {
    let mut r = LemmaReport::new("boundary-norm");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let instances = refined_instances()?;
    let per = cfg.cases.div_ceil(instances.len());
    for (mi, (mesh, spacing)) in instances.iter().enumerate() {
        let data = intersect_somewhere(mesh, *spacing, cfg.seed + mi as u64)?;
        let rc = &data.refined;
        let faces: Vec<_> = rc.squares.keys().flat_map(|sq| rc.faces_of(sq)).collect();
        if faces.is_empty() {
            return Err(Error::Domain(format!("{} has no subdivided squares", mesh.name)));
        }
        for i in 0..per {
            let alpha: RefinedChain2 = (0..rng.gen_range(1..40))
                .map(|_| (*faces.choose(&mut rng).unwrap(), rng.gen_range(-7..=7)))
                .collect();
            let d = rc.boundary2(&alpha)?;
            r.check(d.linf() <= 4 * alpha.linf(), || {
                format!("{} chain {i}: {} > 4 * {}", mesh.name, d.linf(), alpha.linf())
            });
        }
    }
    Ok(r)
}

fn fill_x1_suite(cfg: &LemmaConfig) -> Result<LemmaReport> {
    let mut r = LemmaReport::new("fill-x1");
    for lp in exhaustive_embedded_loops(3, cfg.max_len) {
        let f = fill_x1(&lp)?;
        let target = lp.chain();
        let mut ok = f.verify(&target).is_ok() && f.multiplicity <= target.l1();
        if cfg.oracle {
            let (lo, hi) = bounding_box(&lp);
            ok &= min_linf_filling(&f.chain, lo, hi) <= f.multiplicity;
        }
        r.check(ok, || format!("{lp}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.cases {
        let lp = random_embedded_loop(&mut rng, 6, 40);
        let f = fill_x1(&lp)?;
        let target = lp.chain();
        r.check(f.verify(&target).is_ok() && f.multiplicity <= target.l1(), || format!("{lp}"));
    }
    Ok(r)
}

fn fill_refined_suite(cfg: &LemmaConfig) -> Result<LemmaReport> {
    let mut r = LemmaReport::new("fill-refined");
    for (mi, (mesh, spacing)) in refined_instances()?.iter().enumerate() {
        let data = intersect_somewhere(mesh, *spacing, cfg.seed + mi as u64)?;
        for ci in 0..data.curves.len() {
            let omega = data.curve_path(ci);
            let ok = match fill_refined(&data.refined, &omega) {
                Ok(f) => {
                    f.verify(&data.refined, &ch(&omega)).is_ok()
                        && data.refined.boundary2(&f.chain)? == ch(&omega)
                        && f.multiplicity <= 5 * (data.curves[ci].hit_count as u64 + 1)
                }
                Err(_) => false,
            };
            r.check(ok, || format!("{} curve {ci}", mesh.name));
        }
    }
    Ok(r)
}

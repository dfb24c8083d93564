//! Integer homology of a triangulated torus via a tree-cotree decomposition.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::dist_f64;
use crate::mesh::{MeshLoop, TorusMesh};

pub type Class = [i64; 2];

pub fn cadd(a: Class, b: Class) -> Class {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn cneg(a: Class) -> Class {
    [-a[0], -a[1]]
}

pub fn cscale(a: Class, k: i64) -> Class {
    [a[0] * k, a[1] * k]
}

/// Algebraic intersection form in a fixed basis: `det[a; b]`.
pub fn cdet(a: Class, b: Class) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Row vector times 2x2 matrix given by rows.
fn vecmat(x: Class, m: [Class; 2]) -> Class {
    [x[0] * m[0][0] + x[1] * m[1][0], x[0] * m[0][1] + x[1] * m[1][1]]
}

/// Inverse of a unimodular 2x2 integer matrix.
fn inverse_unimodular(m: [Class; 2]) -> Option<[Class; 2]> {
    let d = cdet(m[0], m[1]);
    if d.abs() != 1 {
        return None;
    }
    Some([[m[1][1] * d, -m[0][1] * d], [-m[1][0] * d, m[0][0] * d]])
}

#[derive(Clone, Debug)]
pub struct HomologyLabeling {
    pub edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    pub in_tree: Vec<bool>,
    pub in_cotree: Vec<bool>,
    pub generators: [usize; 2],
    /// Class in the `(e1, e2)` basis of each edge oriented from its smaller
    /// to its larger endpoint.
    pub signature: Vec<Class>,
    uv_rows: [Class; 2],
    uv_inverse: [Class; 2],
}

impl HomologyLabeling {
    pub fn new(mesh: &TorusMesh) -> Result<HomologyLabeling> {
        let edges = mesh.edge_list();
        let index: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let nv = mesh.vertices.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
        for (i, &(a, b)) in edges.iter().enumerate() {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
        let mut in_tree = vec![false; edges.len()];
        let mut seen = vec![false; nv];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    in_tree[e] = true;
                    queue.push_back(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Mesh("mesh graph is not connected".into()));
        }
        let tri_edges: Vec<[usize; 3]> = mesh
            .triangles
            .iter()
            .map(|t| {
                let f = |a: usize, b: usize| index[&(a.min(b), a.max(b))];
                [f(t[0], t[1]), f(t[1], t[2]), f(t[2], t[0])]
            })
            .collect();
        let mut edge_tris: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
        for (ti, es) in tri_edges.iter().enumerate() {
            for &e in es {
                edge_tris[e].push(ti);
            }
        }
        let nt = mesh.triangles.len();
        let mut in_cotree = vec![false; edges.len()];
        let mut parent_edge = vec![usize::MAX; nt];
        let mut order = Vec::with_capacity(nt);
        let mut tseen = vec![false; nt];
        let mut queue = VecDeque::from([0usize]);
        tseen[0] = true;
        while let Some(t) = queue.pop_front() {
            order.push(t);
            for &e in &tri_edges[t] {
                if in_tree[e] {
                    continue;
                }
                for &u in &edge_tris[e] {
                    if !tseen[u] {
                        tseen[u] = true;
                        in_cotree[e] = true;
                        parent_edge[u] = e;
                        queue.push_back(u);
                    }
                }
            }
        }
        let gens: Vec<usize> = (0..edges.len())
            .filter(|&e| !in_tree[e] && !in_cotree[e])
            .collect();
        if gens.len() != 2 {
            return Err(Error::Mesh(format!(
                "expected 2 homology generators, found {}",
                gens.len()
            )));
        }
        let mut sig = vec![[0i64; 2]; edges.len()];
        sig[gens[0]] = [1, 0];
        sig[gens[1]] = [0, 1];
        let orient = |t: &[usize; 3], k: usize| -> i64 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if a < b {
                1
            } else {
                -1
            }
        };
        for &t in order.iter().skip(1).rev() {
            let p = parent_edge[t];
            let tri = &mesh.triangles[t];
            let mut rest = [0i64; 2];
            let mut sp = 0;
            for k in 0..3 {
                let e = tri_edges[t][k];
                if e == p {
                    sp = orient(tri, k);
                } else {
                    rest = cadd(rest, cscale(sig[e], orient(tri, k)));
                }
            }
            sig[p] = cscale(rest, -sp);
        }
        let mut lab = HomologyLabeling {
            edges,
            index,
            in_tree,
            in_cotree,
            generators: [gens[0], gens[1]],
            signature: sig,
            uv_rows: [mesh.class_u, mesh.class_v],
            uv_inverse: [[1, 0], [0, 1]],
        };
        // Change from the generator basis to the marked basis.
        let m = [lab.raw_loop_class(&mesh.basis[0])?, lab.raw_loop_class(&mesh.basis[1])?];
        let minv = inverse_unimodular(m).ok_or_else(|| {
            Error::Mesh(format!(
                "basis loops have intersection number {}, not ±1",
                cdet(m[0], m[1])
            ))
        })?;
        for s in lab.signature.iter_mut() {
            *s = vecmat(*s, minv);
        }
        lab.uv_inverse = inverse_unimodular(lab.uv_rows).ok_or_else(|| {
            Error::Mesh("classes u and v do not form a basis of H1".into())
        })?;
        Ok(lab)
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Class of the oriented edge `a -> b`, or zero when `a == b`.
    pub fn step(&self, a: usize, b: usize) -> Result<Class> {
        if a == b {
            return Ok([0, 0]);
        }
        let e = self
            .edge_index(a, b)
            .ok_or_else(|| Error::Domain(format!("{a}-{b} is not a mesh edge")))?;
        let s = self.signature[e];
        Ok(if a < b { s } else { cneg(s) })
    }

    fn raw_loop_class(&self, l: &[usize]) -> Result<Class> {
        let mut c = [0, 0];
        for k in 0..l.len() {
            c = cadd(c, self.step(l[k], l[(k + 1) % l.len()])?);
        }
        Ok(c)
    }

    /// Class of a vertex loop in the `(e1, e2)` basis.
    pub fn loop_class_e(&self, l: &[usize]) -> Result<Class> {
        if l.is_empty() {
            return Err(Error::Domain("empty loop".into()));
        }
        self.raw_loop_class(l)
    }

    /// Class of a vertex loop in the `(u, v)` basis.
    pub fn loop_class(&self, l: &[usize]) -> Result<Class> {
        Ok(self.e_to_uv(self.loop_class_e(l)?))
    }

    /// Class of an open vertex path, summed along its edges; closes up to a
    /// loop class when the path is closed.
    pub fn path_class_e(&self, path: &[usize]) -> Result<Class> {
        let mut c = [0, 0];
        for w in path.windows(2) {
            c = cadd(c, self.step(w[0], w[1])?);
        }
        Ok(c)
    }

    pub fn e_to_uv(&self, x: Class) -> Class {
        vecmat(x, self.uv_inverse)
    }

    pub fn uv_to_e(&self, x: Class) -> Class {
        vecmat(x, self.uv_rows)
    }

    /// Label of a curve passing from triangle `from` into triangle `to`
    /// across the mesh edge `{a, b}`. Each triangle is represented by its
    /// first vertex; the curve is homotopic to the vertex path
    /// `rep(from) -> a -> rep(to)` inside the two triangles.
    pub fn crossing_label(
        &self,
        mesh: &TorusMesh,
        from: usize,
        to: usize,
        a: usize,
    ) -> Result<Class> {
        let r0 = mesh.triangles[from][0];
        let r1 = mesh.triangles[to][0];
        Ok(cadd(self.step(r0, a)?, self.step(a, r1)?))
    }
}

/// Result of a shortest-loop search.
#[derive(Clone, Debug)]
pub struct SystoleEstimate {
    pub length: f64,
    pub cycle: MeshLoop,
}

/// Shortest closed edge path in the given `(u, v)` class.
///
/// Any closed edge path with nonzero intersection number against a marked
/// basis loop must pass through one of that loop's vertices, so Dijkstra in
/// the ℤ²-cover is started from those vertices only. `node_budget` caps the
/// number of settled cover vertices.
pub fn systole_in_class(
    mesh: &TorusMesh,
    lab: &HomologyLabeling,
    cls: Class,
    node_budget: usize,
) -> Result<SystoleEstimate> {
    if cls == [0, 0] {
        return Err(Error::Domain("class must be nonzero".into()));
    }
    let target = lab.uv_to_e(cls);
    // In the (e1, e2) basis the basis loop e_i meets target iff the other
    // coordinate is nonzero.
    let (loop_i, _) = [(0usize, target[1]), (1usize, target[0])]
        .into_iter()
        .filter(|&(_, k)| k != 0)
        .min_by_key(|&(i, _)| mesh.basis[i].len())
        .unwrap();
    shortest_closed_walk(mesh, lab, target, &mesh.basis[loop_i], None, None, node_budget)
}

/// Upper bound for the systole of a primitive class: the shortest closed
/// walk whose lift stays within a strip around the line through the target
/// class, twice as wide as the largest jump of a single edge, started from the shortest of the basis loops and
/// `hints` that meets the class.
pub fn systole_estimate(
    mesh: &TorusMesh,
    lab: &HomologyLabeling,
    cls: Class,
    hints: &[MeshLoop],
    node_budget: usize,
) -> Result<SystoleEstimate> {
    if cls == [0, 0] {
        return Err(Error::Domain("class must be nonzero".into()));
    }
    let target = lab.uv_to_e(cls);
    let mut best: Option<&MeshLoop> = None;
    for l in mesh.basis.iter().chain(hints) {
        if l.is_empty() || cdet(lab.loop_class_e(l)?, target) == 0 {
            continue;
        }
        if best.is_none_or(|b| l.len() < b.len()) {
            best = Some(l);
        }
    }
    let starts = best.ok_or_else(|| Error::Domain("no start loop meets the class".into()))?;
    let mut jump = 1;
    for &(a, b) in &lab.edges {
        jump = jump.max(cdet(lab.step(a, b)?, target).abs());
    }
    shortest_closed_walk(mesh, lab, target, starts, None, Some(2 * jump), node_budget)
}

/// Shortest closed edge walk with `(e1, e2)` class `target` through one of
/// `starts`, using only vertices marked in `allowed` when given.
pub fn shortest_closed_walk(
    mesh: &TorusMesh,
    lab: &HomologyLabeling,
    target: Class,
    starts: &[usize],
    allowed: Option<&[bool]>,
    strip: Option<i64>,
    node_budget: usize,
) -> Result<SystoleEstimate> {
    let ok = |v: usize| allowed.is_none_or(|a| a[v]);
    let pts = mesh.vertices_f64();
    let nv = pts.len();
    let mut adj: Vec<Vec<(usize, f64, Class)>> = vec![Vec::new(); nv];
    for &(a, b) in &lab.edges {
        if !ok(a) || !ok(b) {
            continue;
        }
        let w = dist_f64(pts[a], pts[b]);
        let s = lab.step(a, b)?;
        adj[a].push((b, w, s));
        adj[b].push((a, w, cneg(s)));
    }
    let mut starts: Vec<usize> = starts.iter().copied().filter(|&v| ok(v)).collect();
    starts.sort_unstable();
    starts.dedup();

    let mut best: Option<SystoleEstimate> = None;
    let mut settled_total = 0usize;
    for &s in &starts {
        let bound = best.as_ref().map_or(f64::INFINITY, |b| b.length);
        let mut dist: HashMap<(usize, Class), f64> = HashMap::new();
        let mut pred: HashMap<(usize, Class), (usize, Class)> = HashMap::new();
        let mut heap = BinaryHeap::new();
        dist.insert((s, [0, 0]), 0.0);
        heap.push(Reverse((OrdF64(0.0), s, [0i64, 0])));
        while let Some(Reverse((OrdF64(d), v, c))) = heap.pop() {
            if d >= bound {
                break;
            }
            if d > dist[&(v, c)] {
                continue;
            }
            settled_total += 1;
            if settled_total > node_budget {
                return Err(Error::Exhausted(format!(
                    "cover search budget used up; best bound so far {}",
                    best.map_or("none".to_string(), |b| format!("{:.15e}", b.length))
                )));
            }
            if v == s && c == target {
                let mut cycle = vec![v];
                let mut cur = (v, c);
                while let Some(&p) = pred.get(&cur) {
                    cur = p;
                    cycle.push(p.0);
                }
                cycle.pop();
                cycle.reverse();
                best = Some(SystoleEstimate { length: d, cycle });
                break;
            }
            for &(w, len, st) in &adj[v] {
                let nc = cadd(c, st);
                if strip.is_some_and(|k| cdet(nc, target).abs() > k) {
                    continue;
                }
                let nd = d + len;
                let key = (w, nc);
                if nd < *dist.get(&key).unwrap_or(&f64::INFINITY) {
                    dist.insert(key, nd);
                    pred.insert(key, (v, c));
                    heap.push(Reverse((OrdF64(nd), w, nc)));
                }
            }
        }
    }
    best.ok_or_else(|| Error::Exhausted("no loop found in class".into()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::snap;
    use crate::mesh::TorusMesh;

    /// Torus of revolution with an `n x m` grid, e1 the big circle.
    fn revolution(n: usize, m: usize) -> TorusMesh {
        let mut vertices = Vec::new();
        for j in 0..m {
            for i in 0..n {
                let a = i as f64 * std::f64::consts::TAU / n as f64;
                let b = j as f64 * std::f64::consts::TAU / m as f64;
                let r = 3.0 + b.cos();
                vertices.push([snap(r * a.cos(), 20), snap(r * a.sin(), 20), snap(b.sin(), 20)]);
            }
        }
        let id = |i: usize, j: usize| (j % m) * n + (i % n);
        let mut triangles = Vec::new();
        for j in 0..m {
            for i in 0..n {
                triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        TorusMesh {
            vertices,
            triangles,
            basis: [(0..n).map(|i| id(i, 0)).collect(), (0..m).map(|j| id(0, j)).collect()],
            class_u: [0, 1],
            class_v: [1, 0],
            side_u: None,
            core_interior: None,
            core_exterior: None,
            name: "revolution".into(),
            params: vec![],
        }
    }

    #[test]
    fn basis_loops_get_unit_classes() {
        let m = revolution(8, 5);
        m.validate().unwrap();
        let lab = HomologyLabeling::new(&m).unwrap();
        assert_eq!(lab.loop_class_e(&m.basis[0]).unwrap(), [1, 0]);
        assert_eq!(lab.loop_class_e(&m.basis[1]).unwrap(), [0, 1]);
        // u is the meridian e2, v the big circle e1.
        assert_eq!(lab.loop_class(&m.basis[1]).unwrap(), [1, 0]);
        assert_eq!(lab.loop_class(&m.basis[0]).unwrap(), [0, 1]);
    }

    #[test]
    fn triangle_boundary_is_trivial_and_classes_add() {
        let m = revolution(6, 4);
        let lab = HomologyLabeling::new(&m).unwrap();
        for t in &m.triangles {
            assert_eq!(lab.loop_class_e(t).unwrap(), [0, 0]);
        }
        // A parallel copy of e1 on another ring and its reversal.
        let ring: Vec<usize> = (0..6).map(|i| 2 * 6 + i).collect();
        assert_eq!(lab.loop_class_e(&ring).unwrap(), [1, 0]);
        let mut rev = ring.clone();
        rev.reverse();
        assert_eq!(lab.loop_class_e(&rev).unwrap(), [-1, 0]);
        // Diagonal loop (i, i): class e1 + e2 on a square grid.
        let m2 = revolution(5, 5);
        let lab2 = HomologyLabeling::new(&m2).unwrap();
        let diag: Vec<usize> = (0..5).map(|i| i * 5 + i).collect();
        assert_eq!(lab2.loop_class_e(&diag).unwrap(), [1, 1]);
    }

    #[test]
    fn non_basis_marking_is_rejected() {
        let mut m = revolution(6, 4);
        m.basis[1] = m.basis[0].clone();
        assert!(HomologyLabeling::new(&m).is_err());
    }

    #[test]
    fn systole_of_meridian() {
        let m = revolution(24, 12);
        let lab = HomologyLabeling::new(&m).unwrap();
        let s = systole_in_class(&m, &lab, [1, 0], 1_000_000).unwrap();
        // Inner meridian circle of radius 1: the polygon perimeter.
        let poly = 2.0 * 12.0 * (std::f64::consts::PI / 12.0).sin();
        assert!((s.length - poly).abs() < 1e-4, "{}", s.length);
        assert_eq!(lab.loop_class(&s.cycle).unwrap(), [1, 0]);
        // Longitude: shortest ring is the inner equator, radius 2.
        let l = systole_in_class(&m, &lab, [0, 1], 1_000_000).unwrap();
        let inner = 2.0 * 24.0 * 2.0 * (std::f64::consts::PI / 24.0).sin();
        assert!((l.length - inner).abs() < 1e-4, "{}", l.length);
        let two = systole_in_class(&m, &lab, [2, 0], 1_000_000).unwrap();
        assert!(two.length <= 2.0 * s.length + 1e-9);
        assert!(systole_in_class(&m, &lab, [0, 0], 10).is_err());
    }
}

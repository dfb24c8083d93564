//! Certificates for the dichotomy between a short `u` curve on the lattice
//! 2-skeleton and a `v` loop inside a single lattice cube, and the bounds
//! they feed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use num_traits::Zero;

use crate::curves::{ch, chain_boundary, decompose_cycle, SkeletonPath};
use crate::error::{Error, Result};
use crate::filling::fill_refined;
use crate::geometry::{diameter, floor_int, Rat};
use crate::homology::{
    cadd, cdet, cscale, shortest_closed_walk, systole_estimate, Class, HomologyLabeling, SystoleEstimate,
};
use crate::intersect::{arc_label, fmt15, to_lattice_units, IntersectionData};
use crate::lattice::{Chain, Lattice};
use crate::mesh::{format_rational, parse_rational, MeshLoop, TorusMesh};
use crate::refined::{REdge, RFace, RVertex, RefinedChain1, RefinedChain2, RefinedComplex};

/// `(e1, e2)` labels of all arcs.
pub fn arc_labels(mesh: &TorusMesh, lab: &HomologyLabeling, data: &IntersectionData) -> Result<Vec<Class>> {
    data.refined
        .arcs
        .iter()
        .map(|a| arc_label(mesh, lab, a))
        .collect()
}

/// `(u, v)` class of a 1-chain supported on arcs.
pub fn arc_chain_class(lab: &HomologyLabeling, labels: &[Class], c: &RefinedChain1) -> Result<Class> {
    let mut e = [0, 0];
    for (edge, k) in c.iter() {
        match edge {
            REdge::Arc(a) => e = cadd(e, cscale(labels[*a], k)),
            REdge::LatticePiece { edge, .. } => {
                return Err(Error::Verification(format!(
                    "chain leaves the surface along lattice edge {edge}"
                )))
            }
        }
    }
    Ok(lab.e_to_uv(e))
}

/// Length in world units of a chain supported on arcs, counted with
/// multiplicity.
pub fn arc_chain_length(rc: &RefinedComplex, c: &RefinedChain1) -> f64 {
    c.iter()
        .map(|(e, k)| match e {
            REdge::Arc(a) => rc.arcs[*a].length * k.unsigned_abs() as f64,
            REdge::LatticePiece { .. } => 0.0,
        })
        .sum()
}

/// A loop on the mesh inside one closed lattice cube, of class `±v`.
#[derive(Clone, Debug, PartialEq)]
pub struct VWitness {
    pub cube: [i64; 3],
    pub cycle: MeshLoop,
    pub class: Class,
    pub diameter: f64,
}

/// Result of looking for an essential curve in the intersection.
#[derive(Clone, Debug)]
pub enum JFinding {
    Essential { path: SkeletonPath<RVertex, REdge>, class: Class },
    VInCube(VWitness),
}

/// Either a curve of the intersection with nonzero `u`-coefficient, traced on
/// the refined 1-skeleton, or a `v` loop inside one cube.
///
/// Whole intersection curves are tried first, fewest crossings first. When
/// none is essential in the `u` direction, fundamental cycles of the graph
/// formed by all arcs are tried, since curves of different planes meet at
/// the lattice crossings. `candidates` are extra loops checked for lying in
/// one cube before the per-cube search.
pub fn essential_curve_in_j(
    mesh: &TorusMesh,
    lab: &HomologyLabeling,
    data: &IntersectionData,
    candidates: &[MeshLoop],
) -> Result<JFinding> {
    let labels = arc_labels(mesh, lab, data)?;
    let mut best: Option<(usize, f64, usize, Class)> = None;
    for (ci, c) in data.curves.iter().enumerate() {
        let path = data.curve_path(ci);
        let cls = arc_chain_class(lab, &labels, &ch(&path))?;
        if cls[0] != 0 && best.is_none_or(|b| (c.hit_count, c.length) < (b.0, b.1)) {
            best = Some((c.hit_count, c.length, ci, cls));
        }
    }
    if let Some((_, _, ci, class)) = best {
        return Ok(JFinding::Essential { path: data.curve_path(ci), class });
    }
    if let Some((path, class)) = fundamental_essential_cycle(lab, &labels, &data.refined)? {
        return Ok(JFinding::Essential { path, class });
    }
    match find_v_in_cube(mesh, lab, &data.lattice, candidates)? {
        Some(w) => Ok(JFinding::VInCube(w)),
        None => Err(Error::Verification(
            "dichotomy violated: no essential curve in the intersection and no v loop in a cube".into(),
        )),
    }
}

/// Simple cycles of the arc graph closed by non-tree arcs of a BFS forest;
/// returns the first whose class has nonzero `u`-coefficient.
fn fundamental_essential_cycle(
    lab: &HomologyLabeling,
    labels: &[Class],
    rc: &RefinedComplex,
) -> Result<Option<(SkeletonPath<RVertex, REdge>, Class)>> {
    let mut adj: BTreeMap<usize, Vec<(usize, usize, i8)>> = BTreeMap::new();
    for (a, arc) in rc.arcs.iter().enumerate() {
        if let (Some(s), Some(t)) = (arc.start, arc.end) {
            adj.entry(s).or_default().push((t, a, 1));
            adj.entry(t).or_default().push((s, a, -1));
        }
    }
    // parent: vertex -> (parent vertex, arc, sign from parent to vertex)
    let mut parent: BTreeMap<usize, Option<(usize, usize, i8)>> = BTreeMap::new();
    let mut depth: BTreeMap<usize, usize> = BTreeMap::new();
    let mut pot: BTreeMap<usize, Class> = BTreeMap::new();
    let mut tree_arcs = BTreeSet::new();
    let roots: Vec<usize> = adj.keys().copied().collect();
    for r in roots {
        if parent.contains_key(&r) {
            continue;
        }
        parent.insert(r, None);
        depth.insert(r, 0);
        pot.insert(r, [0, 0]);
        let mut queue = VecDeque::from([r]);
        while let Some(x) = queue.pop_front() {
            for &(y, a, s) in &adj[&x] {
                if parent.contains_key(&y) {
                    continue;
                }
                parent.insert(y, Some((x, a, s)));
                depth.insert(y, depth[&x] + 1);
                pot.insert(y, cadd(pot[&x], cscale(labels[a], s as i64)));
                tree_arcs.insert(a);
                queue.push_back(y);
            }
        }
    }
    for (a, arc) in rc.arcs.iter().enumerate() {
        let (Some(s), Some(t)) = (arc.start, arc.end) else { continue };
        if tree_arcs.contains(&a) {
            continue;
        }
        let e = cadd(cadd(pot[&s], labels[a]), cscale(pot[&t], -1));
        let cls = lab.e_to_uv(e);
        if cls[0] == 0 {
            continue;
        }
        // Climb from both ends to the common ancestor.
        let (mut x, mut y) = (s, t);
        let mut up_s = Vec::new();
        let mut up_t = Vec::new();
        while x != y {
            if depth[&x] >= depth[&y] {
                let (p, pa, ps) = parent[&x].unwrap();
                up_s.push((pa, ps, x));
                x = p;
            } else {
                let (p, pa, ps) = parent[&y].unwrap();
                up_t.push((pa, ps, y));
                y = p;
            }
        }
        // ancestor -> s, arc s -> t, t -> ancestor
        let mut vertices = vec![RVertex::Hit(x)];
        let mut edges = Vec::new();
        for &(pa, ps, v) in up_s.iter().rev() {
            edges.push((REdge::Arc(pa), ps));
            vertices.push(RVertex::Hit(v));
        }
        edges.push((REdge::Arc(a), 1));
        vertices.push(RVertex::Hit(t));
        for (k, &(pa, ps, _)) in up_t.iter().enumerate() {
            edges.push((REdge::Arc(pa), -ps));
            let next = up_t.get(k + 1).map_or(x, |n| n.2);
            vertices.push(RVertex::Hit(next));
        }
        return Ok(Some((SkeletonPath { vertices, edges, closed: true }, cls)));
    }
    Ok(None)
}

/// Lattice cube containing each mesh vertex (vertices never lie on planes).
fn vertex_cubes(mesh: &TorusMesh, lattice: &Lattice) -> Result<Vec<[i64; 3]>> {
    Ok(to_lattice_units(mesh, lattice)?
        .iter()
        .map(|q| [floor_int(&q[0]), floor_int(&q[1]), floor_int(&q[2])])
        .collect())
}

fn witness(mesh: &TorusMesh, cube: [i64; 3], cycle: MeshLoop, class: Class) -> VWitness {
    let p = mesh.vertices_f64();
    let pts: Vec<[f64; 3]> = cycle.iter().map(|&v| p[v]).collect();
    VWitness { cube, diameter: diameter(&pts), cycle, class }
}

/// Search every cube for a loop of class `±v` made of mesh edges whose ends
/// both lie in the cube. Returns the witness of smallest diameter.
pub fn find_v_in_cube(
    mesh: &TorusMesh,
    lab: &HomologyLabeling,
    lattice: &Lattice,
    candidates: &[MeshLoop],
) -> Result<Option<VWitness>> {
    let cubes = vertex_cubes(mesh, lattice)?;
    let is_v = |c: Class| c == [0, 1] || c == [0, -1];
    let mut found: Vec<VWitness> = Vec::new();
    for cand in candidates {
        if cand.is_empty() || !cand.iter().all(|&v| cubes[v] == cubes[cand[0]]) {
            continue;
        }
        let cls = lab.loop_class(cand)?;
        if is_v(cls) {
            found.push(witness(mesh, cubes[cand[0]], cand.clone(), cls));
        }
    }
    let mut by_cube: BTreeMap<[i64; 3], Vec<usize>> = BTreeMap::new();
    for (v, c) in cubes.iter().enumerate() {
        by_cube.entry(*c).or_default().push(v);
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); mesh.vertices.len()];
    for &(a, b) in &lab.edges {
        if cubes[a] == cubes[b] {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut comp_seen = vec![false; mesh.vertices.len()];
    for (cube, verts) in &by_cube {
        for &root in verts {
            if comp_seen[root] {
                continue;
            }
            // BFS tree of this component with (u, v) potentials.
            let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
            let mut pot: BTreeMap<usize, Class> = BTreeMap::new();
            let mut order = vec![root];
            comp_seen[root] = true;
            pot.insert(root, [0, 0]);
            let mut k = 0;
            while k < order.len() {
                let x = order[k];
                k += 1;
                for &y in &adj[x] {
                    if !comp_seen[y] {
                        comp_seen[y] = true;
                        parent.insert(y, x);
                        pot.insert(y, cadd(pot[&x], lab.step(x, y)?));
                        order.push(y);
                    }
                }
            }
            let mut crossing: Option<Vec<usize>> = None;
            let mut direct: Option<(Vec<usize>, Class)> = None;
            for &x in &order {
                for &y in &adj[x] {
                    if x > y || parent.get(&y) == Some(&x) || parent.get(&x) == Some(&y) {
                        continue;
                    }
                    let e = cadd(cadd(pot[&x], lab.step(x, y)?), cscale(pot[&y], -1));
                    let cls = lab.e_to_uv(e);
                    if cls == [0, 0] {
                        continue;
                    }
                    let cycle = tree_cycle(&parent, x, y);
                    if is_v(cls) {
                        if direct.as_ref().is_none_or(|d| cycle.len() < d.0.len()) {
                            direct = Some((cycle, cls));
                        }
                    } else if cdet(cls, [0, 1]) != 0
                        && crossing.as_ref().is_none_or(|c| cycle.len() < c.len())
                    {
                        crossing = Some(cycle);
                    }
                }
            }
            if let Some((cycle, cls)) = direct {
                found.push(witness(mesh, *cube, cycle, cls));
            } else if let Some(starts) = crossing {
                let mut allowed = vec![false; mesh.vertices.len()];
                for &v in &order {
                    allowed[v] = true;
                }
                let target = lab.uv_to_e([0, 1]);
                let budget = 64 * order.len() + 4096;
                match shortest_closed_walk(mesh, lab, target, &starts, Some(&allowed), None, budget) {
                    Ok(s) => found.push(witness(mesh, *cube, s.cycle, [0, 1])),
                    Err(Error::Exhausted(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(found.into_iter().min_by(|a, b| {
        a.diameter
            .total_cmp(&b.diameter)
            .then(a.cube.cmp(&b.cube))
            .then(a.cycle.cmp(&b.cycle))
    }))
}

/// Simple cycle formed by the tree paths to `x` and `y` and the edge `x-y`.
fn tree_cycle(parent: &BTreeMap<usize, usize>, x: usize, y: usize) -> Vec<usize> {
    let chain = |mut v: usize| {
        let mut out = vec![v];
        while let Some(&p) = parent.get(&v) {
            out.push(p);
            v = p;
        }
        out
    };
    let (px, py) = (chain(x), chain(y));
    let on_y: BTreeSet<usize> = py.iter().copied().collect();
    let lca_pos = px.iter().position(|v| on_y.contains(v)).unwrap();
    let lca = px[lca_pos];
    // lca .. x, then y .. the child of lca on y's side.
    let mut cycle: Vec<usize> = px[..=lca_pos].iter().rev().copied().collect();
    let mut tail: Vec<usize> = py.iter().take_while(|&&v| v != lca).copied().collect();
    cycle.append(&mut tail);
    cycle
}

/// The short-`u` branch: a filling of an essential intersection curve and
/// the `u` curve read off from its part on the `u` side.
#[derive(Clone, Debug)]
pub struct ShortU {
    pub omega: SkeletonPath<RVertex, REdge>,
    pub omega_class: Class,
    pub filling: RefinedChain2,
    pub c_u: RefinedChain2,
    pub boundary_u: RefinedChain1,
    pub gamma: RefinedChain1,
    pub gamma_class: Class,
    pub gamma_length: f64,
    pub hits: usize,
    pub x2_length: f64,
    pub threshold: f64,
}

pub fn threshold(hits: usize, x2_length: f64) -> f64 {
    20.0 * (hits as f64 + 1.0) * x2_length
}

/// Fill `omega`, keep the faces on the side where `u` bounds, and extract a
/// `u` curve from their boundary. Every identity is checked before return.
pub fn run_cw_pipeline(
    mesh: &TorusMesh,
    lab: &HomologyLabeling,
    data: &IntersectionData,
    omega: SkeletonPath<RVertex, REdge>,
    omega_class: Class,
) -> Result<ShortU> {
    let side_u = mesh
        .side_u
        .ok_or_else(|| Error::Domain("mesh does not say which side u bounds on".into()))?;
    if omega_class[0] == 0 {
        return Err(Error::Domain("curve has no u component".into()));
    }
    let rc = &data.refined;
    let labels = arc_labels(mesh, lab, data)?;
    let filled = fill_refined(rc, &omega)?;
    let c_u: RefinedChain2 = filled
        .chain
        .iter()
        .filter(|(f, _)| rc.face_side(f) == side_u)
        .map(|(f, k)| (*f, k))
        .collect();
    let boundary_u = rc.boundary2(&c_u)?;
    let bu_class = arc_chain_class(lab, &labels, &boundary_u)
        .map_err(|e| Error::Verification(format!("boundary of the u part is not on the surface: {e}")))?;
    if bu_class != [omega_class[0], 0] {
        return Err(Error::Verification(format!(
            "boundary of the u part has class {bu_class:?}, expected ({}, 0)",
            omega_class[0]
        )));
    }
    let hits = data.hit_count();
    if boundary_u.linf() > 20 * (hits as u64 + 1) {
        return Err(Error::Verification(format!(
            "boundary of the u part has multiplicity {} above {}",
            boundary_u.linf(),
            20 * (hits as u64 + 1)
        )));
    }
    let mut gamma = boundary_u.clone();
    let mut gamma_class = bu_class;
    if bu_class[0].abs() != 1 {
        let mut best: Option<(f64, RefinedChain1, Class)> = None;
        for piece in decompose_cycle(rc, &boundary_u)? {
            let c = ch(&piece);
            let cls = arc_chain_class(lab, &labels, &c)?;
            if cls[1] == 0 && cls[0].abs() == 1 {
                let len = arc_chain_length(rc, &c);
                if best.as_ref().is_none_or(|b| len < b.0) {
                    best = Some((len, c, cls));
                }
            }
        }
        if let Some((_, c, cls)) = best {
            gamma = c;
            gamma_class = cls;
        }
    }
    let gamma_length = arc_chain_length(rc, &gamma);
    let t = threshold(hits, data.total_length);
    if gamma_length > t {
        return Err(Error::Verification(format!(
            "u curve of length {gamma_length} exceeds threshold {t}"
        )));
    }
    Ok(ShortU {
        omega,
        omega_class,
        filling: filled.chain,
        c_u,
        boundary_u,
        gamma,
        gamma_class,
        gamma_length,
        hits,
        x2_length: data.total_length,
        threshold: t,
    })
}

#[derive(Clone, Debug)]
pub enum CertificateBody {
    VInCube(VWitness),
    ShortU(ShortU),
}

/// A checked outcome of one pipeline run. The lattice applies to the mesh
/// after multiplying all coordinates by `scale`.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub mesh_name: String,
    pub vertices: usize,
    pub triangles: usize,
    pub seed: u64,
    pub scale: Rat,
    pub lattice: Lattice,
    pub body: CertificateBody,
}

fn face_line(f: &RFace) -> String {
    format!("{} #{}", f.square.to_line(), f.idx)
}

fn edge_line(e: &REdge) -> String {
    crate::refined::refined_edge_line(e)
}

fn parse_index(s: &str) -> Result<u32> {
    s.strip_prefix('#')
        .and_then(|x| x.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad index {s:?}")))
}

fn parse_i64(s: &str) -> Result<i64> {
    s.parse().map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

/// `arc #a` or a lattice cell line followed by `#piece`; returns the edge
/// and the remaining fields.
fn parse_edge<'a>(f: &'a [&'a str]) -> Result<(REdge, &'a [&'a str])> {
    if f.first() == Some(&"arc") && f.len() >= 2 {
        return Ok((REdge::Arc(parse_index(f[1])? as usize), &f[2..]));
    }
    if f.len() < 6 {
        return Err(Error::Parse(format!("bad refined edge {f:?}")));
    }
    let edge = crate::lattice::parse_cell(&f[..5])?;
    if edge.dim() != 1 {
        return Err(Error::Parse(format!("not an edge: {f:?}")));
    }
    Ok((REdge::LatticePiece { edge, piece: parse_index(f[5])? }, &f[6..]))
}

fn parse_face(f: &[&str]) -> Result<(RFace, i64)> {
    if f.len() != 7 {
        return Err(Error::Parse(format!("bad face line {f:?}")));
    }
    let square = crate::lattice::parse_cell(&f[..5])?;
    if square.dim() != 2 {
        return Err(Error::Parse(format!("not a square: {f:?}")));
    }
    Ok((RFace { square, idx: parse_index(f[5])? }, parse_i64(f[6])?))
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self.body {
            CertificateBody::VInCube(_) => "v-in-cube",
            CertificateBody::ShortU(_) => "short-u",
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("exsys-certificate v1\n");
        writeln!(s, "kind {}", self.kind()).unwrap();
        writeln!(s, "mesh {} vertices {} triangles {}", self.mesh_name, self.vertices, self.triangles).unwrap();
        writeln!(s, "seed {}", self.seed).unwrap();
        writeln!(s, "scale {}", format_rational(&self.scale)).unwrap();
        writeln!(s, "spacing {}", format_rational(&self.lattice.spacing)).unwrap();
        let o: Vec<String> = self.lattice.offset.iter().map(format_rational).collect();
        writeln!(s, "offset {}", o.join(" ")).unwrap();
        match &self.body {
            CertificateBody::VInCube(w) => {
                s.push_str("[v-in-cube]\n");
                writeln!(s, "cube {} {} {}", w.cube[0], w.cube[1], w.cube[2]).unwrap();
                writeln!(s, "class {} {}", w.class[0], w.class[1]).unwrap();
                writeln!(s, "diameter {}", fmt15(w.diameter)).unwrap();
                let l: Vec<String> = w.cycle.iter().map(|v| v.to_string()).collect();
                writeln!(s, "loop {}", l.join(" ")).unwrap();
            }
            CertificateBody::ShortU(c) => {
                s.push_str("[short-u]\n");
                writeln!(s, "x1_hits {}", c.hits).unwrap();
                writeln!(s, "x2_length {}", fmt15(c.x2_length)).unwrap();
                writeln!(s, "threshold {}", fmt15(c.threshold)).unwrap();
                writeln!(s, "omega_class {} {}", c.omega_class[0], c.omega_class[1]).unwrap();
                writeln!(s, "gamma_class {} {}", c.gamma_class[0], c.gamma_class[1]).unwrap();
                writeln!(s, "gamma_length {}", fmt15(c.gamma_length)).unwrap();
                s.push_str("[omega]\n");
                match c.omega.vertices[0] {
                    RVertex::Hit(h) => writeln!(s, "start hit {h}").unwrap(),
                    RVertex::Loop(a) => writeln!(s, "start loop {a}").unwrap(),
                    RVertex::Lattice(p) => writeln!(s, "start vertex {} {} {}", p[0], p[1], p[2]).unwrap(),
                }
                for (e, sg) in &c.omega.edges {
                    writeln!(s, "{} {}", edge_line(e), sg).unwrap();
                }
                s.push_str("[filling]\n");
                for (f, k) in c.filling.iter() {
                    writeln!(s, "{} {k}", face_line(f)).unwrap();
                }
                s.push_str("[c_u]\n");
                for (f, k) in c.c_u.iter() {
                    writeln!(s, "{} {k}", face_line(f)).unwrap();
                }
                s.push_str("[gamma]\n");
                for (e, k) in c.gamma.iter() {
                    writeln!(s, "{} {k}", edge_line(e)).unwrap();
                }
            }
        }
        s.push_str("[end]\n");
        s
    }

    /// Parse a certificate. Chains that are derived from others (the
    /// boundary of the `u` part) are not stored and come back empty; the
    /// verifier recomputes them.
    pub fn from_text(text: &str) -> Result<Certificate> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some("exsys-certificate v1") {
            return Err(Error::Parse("missing header `exsys-certificate v1`".into()));
        }
        let mut head: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut section = String::new();
        let mut body: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
        for line in lines {
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].to_string();
                continue;
            }
            let f: Vec<String> = line.split_whitespace().map(String::from).collect();
            if section.is_empty() {
                head.insert(f[0].clone(), f[1..].to_vec());
            } else {
                body.entry(section.clone()).or_default().push(f);
            }
        }
        if !body.contains_key("end") && !text.contains("[end]") {
            return Err(Error::Parse("certificate is truncated (no [end])".into()));
        }
        let get = |k: &str| head.get(k).ok_or_else(|| Error::Parse(format!("missing `{k}`")));
        let mesh = get("mesh")?;
        if mesh.len() != 5 || mesh[1] != "vertices" || mesh[3] != "triangles" {
            return Err(Error::Parse("bad mesh line".into()));
        }
        let offset = get("offset")?;
        if offset.len() != 3 {
            return Err(Error::Parse("offset needs 3 numbers".into()));
        }
        let lattice = Lattice {
            spacing: parse_rational(&get("spacing")?.join(""))?,
            offset: [parse_rational(&offset[0])?, parse_rational(&offset[1])?, parse_rational(&offset[2])?],
        };
        let kind = get("kind")?.join(" ");
        let sec_map = |name: &str| -> Result<BTreeMap<String, Vec<String>>> {
            Ok(body
                .get(name)
                .ok_or_else(|| Error::Parse(format!("missing section [{name}]")))?
                .iter()
                .map(|f| (f[0].clone(), f[1..].to_vec()))
                .collect())
        };
        let rows = |name: &str| body.get(name).cloned().unwrap_or_default();
        let pair = |m: &BTreeMap<String, Vec<String>>, k: &str| -> Result<Class> {
            let v = m.get(k).ok_or_else(|| Error::Parse(format!("missing `{k}`")))?;
            if v.len() != 2 {
                return Err(Error::Parse(format!("`{k}` needs two integers")));
            }
            Ok([parse_i64(&v[0])?, parse_i64(&v[1])?])
        };
        let one = |m: &BTreeMap<String, Vec<String>>, k: &str| -> Result<String> {
            m.get(k)
                .and_then(|v| v.first().cloned())
                .ok_or_else(|| Error::Parse(format!("missing `{k}`")))
        };
        let body = match kind.as_str() {
            "v-in-cube" => {
                let m = sec_map("v-in-cube")?;
                let c = m.get("cube").ok_or_else(|| Error::Parse("missing cube".into()))?;
                if c.len() != 3 {
                    return Err(Error::Parse("cube needs 3 integers".into()));
                }
                let cycle = m
                    .get("loop")
                    .ok_or_else(|| Error::Parse("missing loop".into()))?
                    .iter()
                    .map(|x| x.parse::<usize>().map_err(|_| Error::Parse(format!("bad vertex {x:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                CertificateBody::VInCube(VWitness {
                    cube: [parse_i64(&c[0])?, parse_i64(&c[1])?, parse_i64(&c[2])?],
                    cycle,
                    class: pair(&m, "class")?,
                    diameter: parse_f64(&one(&m, "diameter")?)?,
                })
            }
            "short-u" => {
                let m = sec_map("short-u")?;
                let om = rows("omega");
                let start = om.first().ok_or_else(|| Error::Parse("empty [omega]".into()))?;
                let start_v = match (start.first().map(String::as_str), start.get(1).map(String::as_str)) {
                    (Some("start"), Some("hit")) if start.len() == 3 => RVertex::Hit(parse_i64(&start[2])? as usize),
                    (Some("start"), Some("loop")) if start.len() == 3 => RVertex::Loop(parse_i64(&start[2])? as usize),
                    (Some("start"), Some("vertex")) if start.len() == 5 => RVertex::Lattice([
                        parse_i64(&start[2])?,
                        parse_i64(&start[3])?,
                        parse_i64(&start[4])?,
                    ]),
                    _ => return Err(Error::Parse("bad omega start".into())),
                };
                let mut vertices = vec![start_v];
                let mut edges = Vec::new();
                for f in &om[1..] {
                    let refs: Vec<&str> = f.iter().map(String::as_str).collect();
                    let (e, rest) = parse_edge(&refs)?;
                    if rest.len() != 1 {
                        return Err(Error::Parse(format!("bad omega line {f:?}")));
                    }
                    let sg = parse_i64(rest[0])?;
                    if sg.abs() != 1 {
                        return Err(Error::Parse("omega signs must be ±1".into()));
                    }
                    edges.push((e, sg as i8));
                    // Vertices are filled in by the verifier from the complex.
                    vertices.push(start_v);
                }
                let faces = |name: &str| -> Result<RefinedChain2> {
                    let mut c = Chain::zero(2);
                    for f in rows(name) {
                        let refs: Vec<&str> = f.iter().map(String::as_str).collect();
                        let (face, k) = parse_face(&refs)?;
                        c.add_term(face, k);
                    }
                    Ok(c)
                };
                let mut gamma = Chain::zero(1);
                for f in rows("gamma") {
                    let refs: Vec<&str> = f.iter().map(String::as_str).collect();
                    let (e, rest) = parse_edge(&refs)?;
                    if rest.len() != 1 {
                        return Err(Error::Parse(format!("bad gamma line {f:?}")));
                    }
                    gamma.add_term(e, parse_i64(rest[0])?);
                }
                CertificateBody::ShortU(ShortU {
                    omega: SkeletonPath { vertices, edges, closed: true },
                    omega_class: pair(&m, "omega_class")?,
                    filling: faces("filling")?,
                    c_u: faces("c_u")?,
                    boundary_u: Chain::zero(1),
                    gamma,
                    gamma_class: pair(&m, "gamma_class")?,
                    gamma_length: parse_f64(&one(&m, "gamma_length")?)?,
                    hits: parse_i64(&one(&m, "x1_hits")?)? as usize,
                    x2_length: parse_f64(&one(&m, "x2_length")?)?,
                    threshold: parse_f64(&one(&m, "threshold")?)?,
                })
            }
            other => return Err(Error::Parse(format!("unknown certificate kind {other:?}"))),
        };
        Ok(Certificate {
            mesh_name: mesh[0].clone(),
            vertices: parse_i64(&mesh[2])? as usize,
            triangles: parse_i64(&mesh[4])? as usize,
            seed: parse_i64(&get("seed")?.join(""))? as u64,
            scale: parse_rational(&get("scale")?.join(""))?,
            lattice,
            body,
        })
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

/// Re-check a certificate against the mesh from scratch: the intersection,
/// the labels, every chain identity and every length.
pub fn verify_certificate(mesh: &TorusMesh, cert: &Certificate) -> Result<()> {
    let fail = |m: String| Err(Error::Verification(m));
    if mesh.vertices.len() != cert.vertices || mesh.triangles.len() != cert.triangles {
        return fail("certificate was made for a different mesh".into());
    }
    let scaled = if crate::geometry::is_one(&cert.scale) {
        mesh.clone()
    } else {
        mesh.transformed(&cert.scale, &[Rat::zero(), Rat::zero(), Rat::zero()])
    };
    let lab = HomologyLabeling::new(&scaled)?;
    match &cert.body {
        CertificateBody::VInCube(w) => {
            let n = w.cycle.len();
            if n < 3 {
                return fail("v loop is too short".into());
            }
            let q = to_lattice_units(&scaled, &cert.lattice)?;
            for &v in &w.cycle {
                if v >= q.len() {
                    return fail(format!("v loop uses vertex {v} outside the mesh"));
                }
                for a in 0..3 {
                    let lo = Rat::from_integer(w.cube[a].into());
                    let hi = Rat::from_integer((w.cube[a] + 1).into());
                    if q[v][a] < lo || q[v][a] > hi {
                        return fail(format!("vertex {v} of the v loop leaves cube {:?}", w.cube));
                    }
                }
            }
            for k in 0..n {
                if lab.edge_index(w.cycle[k], w.cycle[(k + 1) % n]).is_none() {
                    return fail(format!("v loop step {k} is not a mesh edge"));
                }
            }
            let cls = lab.loop_class(&w.cycle)?;
            if cls != w.class || !(cls == [0, 1] || cls == [0, -1]) {
                return fail(format!("v loop has class {cls:?}, recorded {:?}", w.class));
            }
            let p = scaled.vertices_f64();
            let pts: Vec<[f64; 3]> = w.cycle.iter().map(|&v| p[v]).collect();
            let d = diameter(&pts);
            if !close(d, w.diameter) {
                return fail(format!("v loop diameter is {d}, recorded {}", w.diameter));
            }
            let diag = 3f64.sqrt() * crate::geometry::to_f64(&cert.lattice.spacing);
            if d > diag * (1.0 + 1e-12) {
                return fail(format!("v loop diameter {d} exceeds cube diagonal {diag}"));
            }
            Ok(())
        }
        CertificateBody::ShortU(c) => {
            let data = crate::intersect::intersect_lattice(&scaled, &cert.lattice)?;
            let rc = &data.refined;
            let side_u = scaled
                .side_u
                .ok_or_else(|| Error::Domain("mesh does not say which side u bounds on".into()))?;
            let omega = SkeletonPath::from_edges(rc, c.omega.vertices[0], c.omega.edges.clone())?;
            if omega.vertices.first() != omega.vertices.last() || !omega.is_embedded() {
                return fail("omega is not an embedded closed curve".into());
            }
            let mut labels = Vec::with_capacity(rc.arcs.len());
            for a in &rc.arcs {
                labels.push(arc_label(&scaled, &lab, a)?);
            }
            let w = ch(&omega);
            let wc = arc_chain_class(&lab, &labels, &w)?;
            if wc != c.omega_class || wc[0] == 0 {
                return fail(format!("omega has class {wc:?}, recorded {:?}", c.omega_class));
            }
            if rc.boundary2(&c.filling)? != w {
                return fail("boundary of the filling is not omega".into());
            }
            let on_x1 = omega
                .distinct_stops()
                .iter()
                .filter(|v| !matches!(v, RVertex::Loop(_)))
                .count() as u64;
            if c.filling.linf() > 5 * (on_x1 + 1) {
                return fail(format!("filling multiplicity {} above {}", c.filling.linf(), 5 * (on_x1 + 1)));
            }
            let expect_u: RefinedChain2 = c
                .filling
                .iter()
                .filter(|(f, _)| rc.face_side(f) == side_u)
                .map(|(f, k)| (*f, k))
                .collect();
            if expect_u != c.c_u {
                return fail("u part is not the filling restricted to the u side".into());
            }
            let bu = rc.boundary2(&c.c_u)?;
            let bc = arc_chain_class(&lab, &labels, &bu)?;
            if bc != [wc[0], 0] {
                return fail(format!("boundary of the u part has class {bc:?}"));
            }
            if data.hit_count() != c.hits || !close(data.total_length, c.x2_length) {
                return fail("intersection counts differ from the recorded ones".into());
            }
            let t = threshold(data.hit_count(), data.total_length);
            if bu.linf() > 20 * (data.hit_count() as u64 + 1) {
                return fail("boundary of the u part exceeds its multiplicity bound".into());
            }
            if !chain_boundary(rc, &c.gamma)?.is_empty() || c.gamma.is_zero() {
                return fail("u curve is not a nonzero cycle".into());
            }
            for (e, _) in c.gamma.iter() {
                if bu.coeff(e) == 0 {
                    return fail(format!("u curve uses {} outside the u boundary", edge_line(e)));
                }
            }
            let gc = arc_chain_class(&lab, &labels, &c.gamma)?;
            if gc != c.gamma_class || gc[1] != 0 || gc[0] == 0 {
                return fail(format!("u curve has class {gc:?}, recorded {:?}", c.gamma_class));
            }
            let len = arc_chain_length(rc, &c.gamma);
            if !close(len, c.gamma_length) || !close(t, c.threshold) {
                return fail("recorded lengths do not match".into());
            }
            if len > t {
                return fail(format!("u curve length {len} exceeds threshold {t}"));
            }
            Ok(())
        }
    }
}

/// Which of the two extrinsic bounds is smaller for a marking.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Winner {
    Thm13,
    ThmA2,
    Tie,
}

impl Winner {
    pub fn name(self) -> &'static str {
        match self {
            Winner::Thm13 => "thm13",
            Winner::ThmA2 => "thmA2",
            Winner::Tie => "tie",
        }
    }
}

/// Predictions for the unit-area flat torus embedded with marking
/// `f = [[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct A3Prediction {
    pub fstar: [i64; 4],
    /// `b^2 + d^2` and `a^2 + c^2`, the squared systoles of `u` and `v`.
    pub su_sq: i64,
    pub sv_sq: i64,
    pub sys_u: f64,
    pub sys_v: f64,
    pub thm13: f64,
    pub thm_a2: f64,
    pub nash: f64,
    pub winner: Winner,
}

pub fn a3_prediction(fstar: [i64; 4]) -> Result<A3Prediction> {
    let [a, b, c, d] = fstar;
    let det = a as i128 * d as i128 - b as i128 * c as i128;
    if det != 1 {
        return Err(Error::Domain(format!("marking matrix has determinant {det}, expected 1")));
    }
    let s = (b as i128).pow(2) + (d as i128).pow(2);
    let v = (a as i128).pow(2) + (c as i128).pow(2);
    let (sf, vf) = (s as f64, v as f64);
    // thm13 beats thmA2 exactly when the smaller of S, V has its cube below
    // the larger.
    let winner = if s.pow(3) == v || v.pow(3) == s {
        Winner::Tie
    } else if s.pow(3) < v || v.pow(3) < s {
        Winner::Thm13
    } else {
        Winner::ThmA2
    };
    let ab = ((a as i128).pow(2) + (b as i128).pow(2)) as f64;
    let cd = ((c as i128).pow(2) + (d as i128).pow(2)) as f64;
    Ok(A3Prediction {
        fstar,
        su_sq: s as i64,
        sv_sq: v as i64,
        sys_u: sf.sqrt(),
        sys_v: vf.sqrt(),
        thm13: sf.powf(-1.0 / 6.0).min(vf.powf(-1.0 / 6.0)),
        thm_a2: sf.powf(-0.5).max(vf.powf(-0.5)),
        nash: ab.powf(-0.5).min(cd.powf(-0.5)),
        winner,
    })
}

pub fn loewner_bound(area: f64) -> f64 {
    2f64.sqrt() * 3f64.powf(-0.25) * area.sqrt()
}

pub fn thm13_bound(sys_u: f64, area: f64) -> f64 {
    sys_u.powf(-1.0 / 3.0) * area.powf(2.0 / 3.0) + area / sys_u
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub sys_u_est: f64,
    pub sys_v_est: f64,
    pub area: f64,
    /// Smallest diameter of a `v` representative found.
    pub extrinsic_upper: f64,
    pub thm13_bound: f64,
    pub thm_a2_bound: f64,
    pub loewner_bound: f64,
    pub a3: Option<A3Prediction>,
}

impl BoundReport {
    pub fn new(sys_u_est: f64, sys_v_est: f64, area: f64, extrinsic_upper: f64) -> BoundReport {
        BoundReport {
            sys_u_est,
            sys_v_est,
            area,
            extrinsic_upper,
            thm13_bound: thm13_bound(sys_u_est, area),
            thm_a2_bound: area / sys_u_est.min(sys_v_est),
            loewner_bound: loewner_bound(area),
            a3: None,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("exsys-bounds v1\n");
        for (k, v) in [
            ("sys_u_est", self.sys_u_est),
            ("sys_v_est", self.sys_v_est),
            ("area", self.area),
            ("extrinsic_upper", self.extrinsic_upper),
            ("thm13_bound", self.thm13_bound),
            ("thmA2_bound", self.thm_a2_bound),
            ("loewner_bound", self.loewner_bound),
        ] {
            writeln!(s, "{k} {}", fmt15(v)).unwrap();
        }
        if let Some(p) = &self.a3 {
            s.push_str("[a3]\n");
            let [a, b, c, d] = p.fstar;
            writeln!(s, "fstar {a} {b} {c} {d}").unwrap();
            writeln!(s, "sys_u_sq {}", p.su_sq).unwrap();
            writeln!(s, "sys_v_sq {}", p.sv_sq).unwrap();
            writeln!(s, "sys_u {}", fmt15(p.sys_u)).unwrap();
            writeln!(s, "sys_v {}", fmt15(p.sys_v)).unwrap();
            writeln!(s, "thm13_prediction {}", fmt15(p.thm13)).unwrap();
            writeln!(s, "thmA2_prediction {}", fmt15(p.thm_a2)).unwrap();
            writeln!(s, "nash_value {}", fmt15(p.nash)).unwrap();
            writeln!(s, "winner {}", p.winner.name()).unwrap();
        }
        s
    }
}

/// Cover-search budget for systole estimates.
pub const SYSTOLE_BUDGET: usize = 20_000_000;

/// Edge-graph estimates of the `u` and `v` systoles. The shorter class is
/// searched first and its loop seeds the other search.
pub fn systole_estimates(mesh: &TorusMesh, lab: &HomologyLabeling) -> Result<(SystoleEstimate, SystoleEstimate)> {
    let sv = systole_estimate(mesh, lab, [0, 1], &[], SYSTOLE_BUDGET)?;
    let su = systole_estimate(mesh, lab, [1, 0], std::slice::from_ref(&sv.cycle), SYSTOLE_BUDGET)?;
    Ok((su, sv))
}

fn loop_diameter(mesh: &TorusMesh, l: &[usize]) -> f64 {
    let p = mesh.vertices_f64();
    diameter(&l.iter().map(|&v| p[v]).collect::<Vec<_>>())
}

/// All bounds for a marked mesh, with the diameter of the shortest `v`
/// loop as the extrinsic upper bound.
pub fn evaluate_bounds(mesh: &TorusMesh, fstar: Option<[i64; 4]>) -> Result<BoundReport> {
    let a3 = fstar.map(a3_prediction).transpose()?;
    let lab = HomologyLabeling::new(mesh)?;
    let (su, sv) = systole_estimates(mesh, &lab)?;
    let mut r = BoundReport::new(su.length, sv.length, mesh.area()?, loop_diameter(mesh, &sv.cycle));
    r.a3 = a3;
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct KnotSharpness {
    pub n: u32,
    pub radius: f64,
    pub linking: i64,
    pub area: f64,
    pub sys_u_est: f64,
    pub sys_v_est: f64,
    pub sys_w_est: f64,
    pub extrinsic_upper: f64,
    /// `extrinsic_upper / (sys_u^{-1/3} area^{2/3})`.
    pub ratio: f64,
}

/// Build the knot tube for `T_{n, n-1}`, check the linking of the two fin
/// edges and measure the sharpness ratio.
pub fn knot_tube_sharpness(n: u32, radius: Option<f64>, res: Option<usize>) -> Result<KnotSharpness> {
    if n < 3 {
        return Err(Error::Domain(format!("need n >= 3, got {n}")));
    }
    let knot = crate::generators::TorusKnot { n };
    let limit = knot.radius_threshold();
    let radius = radius.unwrap_or((0.4f64).min(limit / 2.0));
    if radius >= limit {
        return Err(Error::Domain(format!(
            "tube of radius {radius} self-intersects; use a radius below {limit:.6}"
        )));
    }
    let res = res.unwrap_or(32 * n as usize);
    let mesh = crate::generators::gen_knot_tube(n, radius, res)?;
    let edge = |s: f64| -> Vec<[f64; 3]> {
        (0..res)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / res as f64;
                let (b, nn) = (knot.point(t), knot.normal(t));
                [b[0] + s * nn[0], b[1] + s * nn[1], b[2] + s * nn[2]]
            })
            .collect()
    };
    let linking = crate::linking::linking_number(&edge(radius), &edge(-radius))?;
    let lab = HomologyLabeling::new(&mesh)?;
    let (su, sv) = systole_estimates(&mesh, &lab)?;
    let w = lab.e_to_uv([1, 0]);
    let sw = systole_estimate(&mesh, &lab, w, std::slice::from_ref(&sv.cycle), SYSTOLE_BUDGET)?;
    let area = mesh.area()?;
    let ext = loop_diameter(&mesh, &sv.cycle);
    Ok(KnotSharpness {
        n,
        radius,
        linking,
        area,
        sys_u_est: su.length,
        sys_v_est: sv.length,
        sys_w_est: sw.length,
        extrinsic_upper: ext,
        ratio: ext / (su.length.powf(-1.0 / 3.0) * area.powf(2.0 / 3.0)),
    })
}

/// `x` rounded to `bits` significant binary digits, as an exact rational.
pub fn snap_relative(x: f64, bits: u32) -> Rat {
    let k = bits as i32 - 1 - x.abs().log2().floor() as i32;
    let m = (x * 2f64.powi(k)).round() as i64;
    let m = Rat::from_integer(m.into());
    let p = Rat::from_integer(num_bigint::BigInt::from(2).pow(k.unsigned_abs()));
    if k >= 0 {
        m / p
    } else {
        m * p
    }
}

/// Lattice spacing `1/m` for the normalized surface, rounded down to a
/// dyadic rational so that `m` only grows.
pub fn spacing_for(sys_u: f64) -> (f64, Rat) {
    let m = 1.0 / (1000.0 * (sys_u.powf(-1.0 / 3.0) + 1.0 / sys_u));
    let mut s = snap_relative(1.0 / m, 40);
    if crate::geometry::to_f64(&s) > 1.0 / m {
        s -= snap_relative(1.0 / m, 40) * Rat::new(1.into(), num_bigint::BigInt::from(1u64 << 39));
    }
    (m, s)
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    /// Lattice spacing for the unit-area surface; the theorem's choice when
    /// absent.
    pub spacing: Option<Rat>,
    /// Lattice offset; searched when absent.
    pub offset: Option<[Rat; 3]>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { spacing: None, offset: None, samples: 1000, seed: 0 }
    }
}

/// Everything a pipeline run produced. Lengths in `report` are in the units
/// of the input mesh; `sys_u`, `sys_v` and the certificate refer to the
/// unit-area surface.
#[derive(Clone, Debug)]
pub struct MainResult {
    pub certificate: Certificate,
    pub report: BoundReport,
    pub scale: Rat,
    pub m: f64,
    pub m_eff: f64,
    pub sys_u: f64,
    pub sys_v: f64,
    pub hits: usize,
    pub x2_length: f64,
    /// Whether `sys_u ≥ 20 (hits + 1) length` held for the chosen lattice.
    pub hypothesis: bool,
    pub attempts: usize,
    pub stats: Option<crate::intersect::TranslationStats>,
}

impl MainResult {
    /// Diameter bound the witness must meet on the unit-area surface.
    pub fn witness_bound(&self) -> f64 {
        3f64.sqrt() / self.m_eff
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        writeln!(s, "kind {}", self.certificate.kind()).unwrap();
        writeln!(s, "scale {}", format_rational(&self.scale)).unwrap();
        writeln!(s, "m {}", fmt15(self.m)).unwrap();
        writeln!(s, "m_eff {}", fmt15(self.m_eff)).unwrap();
        writeln!(s, "spacing {}", format_rational(&self.certificate.lattice.spacing)).unwrap();
        writeln!(s, "sys_u_unit {}", fmt15(self.sys_u)).unwrap();
        writeln!(s, "sys_v_unit {}", fmt15(self.sys_v)).unwrap();
        writeln!(s, "x1_hits {}", self.hits).unwrap();
        writeln!(s, "x2_length {}", fmt15(self.x2_length)).unwrap();
        writeln!(s, "threshold {}", fmt15(threshold(self.hits, self.x2_length))).unwrap();
        writeln!(s, "hypothesis {}", self.hypothesis).unwrap();
        writeln!(s, "attempts {}", self.attempts).unwrap();
        if let CertificateBody::VInCube(w) = &self.certificate.body {
            writeln!(s, "witness_diameter {}", fmt15(w.diameter)).unwrap();
            writeln!(s, "witness_bound {}", fmt15(self.witness_bound())).unwrap();
        }
        if let Some(st) = &self.stats {
            writeln!(s, "samples {}", st.samples).unwrap();
            writeln!(s, "qualifying {}", st.qualifying).unwrap();
        }
        s
    }
}

/// Normalize the area, pick the lattice, intersect and run the dichotomy.
/// The certificate is re-verified before it is returned.
pub fn run_main_theorem(mesh: &TorusMesh, cfg: &PipelineConfig) -> Result<MainResult> {
    mesh.validate()?;
    let area = mesh.area()?;
    let scale = snap_relative(1.0 / area.sqrt(), 40);
    let s_f = crate::geometry::to_f64(&scale);
    let unit = mesh.transformed(&scale, &[Rat::zero(), Rat::zero(), Rat::zero()]);
    let lab = HomologyLabeling::new(&unit)?;
    let (su, sv) = systole_estimates(&unit, &lab)?;
    let (m, auto_spacing) = spacing_for(su.length);
    let spacing = cfg.spacing.clone().unwrap_or(auto_spacing);
    if !(spacing > Rat::zero()) {
        return Err(Error::Domain("spacing must be positive".into()));
    }
    let m_eff = 1.0 / crate::geometry::to_f64(&spacing);
    let (offsets, stats) = match &cfg.offset {
        Some(o) => (vec![o.clone()], None),
        None => {
            let r = crate::intersect::translation_search(&unit, m_eff, cfg.samples, cfg.seed)?;
            (r.qualifying.into_iter().map(|q| q.0).collect(), Some(r.stats))
        }
    };
    let mut last_err = None;
    for (attempt, offset) in offsets.into_iter().enumerate() {
        let lattice = Lattice { spacing: spacing.clone(), offset };
        let data = match crate::intersect::intersect_lattice(&unit, &lattice) {
            Ok(d) => d,
            Err(e @ Error::GeneralPosition(_)) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        let body = match essential_curve_in_j(&unit, &lab, &data, std::slice::from_ref(&sv.cycle))? {
            JFinding::VInCube(w) => CertificateBody::VInCube(w),
            JFinding::Essential { path, class } => {
                CertificateBody::ShortU(run_cw_pipeline(&unit, &lab, &data, path, class)?)
            }
        };
        let certificate = Certificate {
            mesh_name: mesh.name.clone(),
            vertices: mesh.vertices.len(),
            triangles: mesh.triangles.len(),
            seed: cfg.seed,
            scale: scale.clone(),
            lattice,
            body,
        };
        verify_certificate(mesh, &certificate)?;
        let mut ext = loop_diameter(&unit, &sv.cycle);
        if let CertificateBody::VInCube(w) = &certificate.body {
            ext = ext.min(w.diameter);
        }
        let report = BoundReport::new(su.length / s_f, sv.length / s_f, area, ext / s_f);
        let hits = data.hit_count();
        return Ok(MainResult {
            certificate,
            report,
            scale,
            m,
            m_eff,
            sys_u: su.length,
            sys_v: sv.length,
            hits,
            x2_length: data.total_length,
            hypothesis: su.length >= threshold(hits, data.total_length),
            attempts: attempt + 1,
            stats,
        });
    }
    Err(last_err.unwrap_or_else(|| Error::Exhausted("no lattice offset to try".into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn twist_and_identity_markings() {
        for n in 0..10i64 {
            let p = a3_prediction([1, 0, n, 1]).unwrap();
            assert_eq!(p.sys_u, 1.0);
            assert_eq!(p.sv_sq, 1 + n * n);
        }
        let id = a3_prediction([1, 0, 0, 1]).unwrap();
        assert_eq!((id.sys_u, id.sys_v, id.thm13, id.thm_a2), (1.0, 1.0, 1.0, 1.0));
        assert_eq!(id.winner, Winner::Tie);
        assert!(a3_prediction([2, 0, 0, 1]).is_err());
    }

    #[test]
    fn crossover_matches_the_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = BTreeSet::new();
        for _ in 0..500 {
            // Products of elementary matrices are unimodular.
            let mut m = [1i64, 0, 0, 1];
            for _ in 0..rng.gen_range(1..6) {
                let k = rng.gen_range(-4..=4);
                m = if rng.gen_bool(0.5) {
                    [m[0] + k * m[2], m[1] + k * m[3], m[2], m[3]]
                } else {
                    [m[0], m[1], m[2] + k * m[0], m[3] + k * m[1]]
                };
            }
            let p = a3_prediction(m).unwrap();
            assert_eq!(p.su_sq, m[1] * m[1] + m[3] * m[3]);
            assert_eq!(p.sv_sq, m[0] * m[0] + m[2] * m[2]);
            let gap = (p.thm13 - p.thm_a2) / p.thm_a2;
            match p.winner {
                Winner::Thm13 => assert!(gap < 0.0, "{m:?}"),
                Winner::ThmA2 => assert!(gap > 0.0, "{m:?}"),
                Winner::Tie => assert!(gap.abs() < 1e-12, "{m:?}"),
            }
            seen.insert(p.winner.name());
        }
        assert_eq!(seen.len(), 3);
    }

    #[test]
    fn loewner_constant() {
        assert!((loewner_bound(1.0) - 1.074569931823542).abs() < 1e-12);
    }

    #[test]
    fn snapping_keeps_forty_bits() {
        for x in [1e-7, 0.3, 1.0, 7.5, 12345.678] {
            let r = crate::geometry::to_f64(&snap_relative(x, 40));
            assert!(((r - x) / x).abs() < 1e-12);
        }
        let (m, s) = spacing_for(8.0);
        assert!(crate::geometry::to_f64(&s) <= 1.0 / m);
    }
}

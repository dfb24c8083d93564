//! Triangulated tori with exact rational coordinates and marked homology.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{cross, dot, point_f64, to_f64, vsub, Point3, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Interior => Side::Exterior,
            Side::Exterior => Side::Interior,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Interior => "interior",
            Side::Exterior => "exterior",
        }
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Side> {
        match s {
            "interior" => Ok(Side::Interior),
            "exterior" => Ok(Side::Exterior),
            _ => Err(Error::Parse(format!("expected interior or exterior, got {s:?}"))),
        }
    }
}

/// A closed loop on the mesh graph given by its vertex cycle; the closing
/// edge from the last vertex back to the first is implied.
pub type MeshLoop = Vec<usize>;

#[derive(Clone, Debug)]
pub struct TorusMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
    pub basis: [MeshLoop; 2],
    /// `u` and `v` in the basis `(e1, e2)`.
    pub class_u: [i64; 2],
    pub class_v: [i64; 2],
    /// Complementary component in which `u` bounds, when known.
    pub side_u: Option<Side>,
    pub core_interior: Option<Vec<Point3>>,
    pub core_exterior: Option<Vec<Point3>>,
    pub name: String,
    pub params: Vec<(String, String)>,
}

/// Parse `p/q`, an integer, or a decimal such as `-1.25e-3` exactly.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let bad = || Error::Parse(format!("bad number {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(p, q));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut n: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        Rat::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rat::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn format_rational(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn parse_point(fields: &[&str]) -> Result<Point3> {
    if fields.len() != 3 {
        return Err(Error::Parse(format!("point needs 3 coordinates, got {fields:?}")));
    }
    Ok([
        parse_rational(fields[0])?,
        parse_rational(fields[1])?,
        parse_rational(fields[2])?,
    ])
}

fn parse_pair(s: &str) -> Result<[i64; 2]> {
    let v: Vec<i64> = s
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad integer {t:?}"))))
        .collect::<Result<_>>()?;
    if v.len() != 2 {
        return Err(Error::Parse(format!("expected two integers, got {s:?}")));
    }
    Ok([v[0], v[1]])
}

fn parse_polyline(s: &str) -> Result<Vec<Point3>> {
    let fields: Vec<&str> = s.split_whitespace().collect();
    if fields.len() % 3 != 0 || fields.is_empty() {
        return Err(Error::Parse("polyline needs coordinate triples".into()));
    }
    fields.chunks(3).map(parse_point).collect()
}

impl TorusMesh {
    pub fn parse(text: &str) -> Result<TorusMesh> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap().trim())
            .filter(|l| !l.is_empty());
        if lines.next() != Some("torus-mesh v1") {
            return Err(Error::Parse("missing `torus-mesh v1` header".into()));
        }
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut basis: [Option<MeshLoop>; 2] = [None, None];
        let mut class_u = None;
        let mut class_v = None;
        let mut side_u = None;
        let mut core_interior = None;
        let mut core_exterior = None;
        let mut name = String::from("unnamed");
        let mut params = Vec::new();
        for line in lines {
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match key {
                "v" => {
                    let f: Vec<&str> = rest.split_whitespace().collect();
                    vertices.push(parse_point(&f)?);
                }
                "f" => {
                    let f: Vec<usize> = rest
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad index {t:?}"))))
                        .collect::<Result<_>>()?;
                    if f.len() != 3 {
                        return Err(Error::Parse(format!("face needs 3 indices: {line:?}")));
                    }
                    triangles.push([f[0], f[1], f[2]]);
                }
                "basis" => {
                    let (which, list) = rest
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("bad basis line {line:?}")))?;
                    let idx = match which.trim() {
                        "e1" => 0,
                        "e2" => 1,
                        w => return Err(Error::Parse(format!("unknown basis loop {w:?}"))),
                    };
                    let l: MeshLoop = list
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad index {t:?}"))))
                        .collect::<Result<_>>()?;
                    basis[idx] = Some(l);
                }
                "class" => {
                    let (which, pair) = rest
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("bad class line {line:?}")))?;
                    match which.trim() {
                        "u" => class_u = Some(parse_pair(pair)?),
                        "v" => class_v = Some(parse_pair(pair)?),
                        w => return Err(Error::Parse(format!("unknown class {w:?}"))),
                    }
                }
                "side" => {
                    let (which, s) = rest
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("bad side line {line:?}")))?;
                    if which.trim() != "u" {
                        return Err(Error::Parse(format!("bad side line {line:?}")));
                    }
                    side_u = Some(s.trim().parse()?);
                }
                "core" => {
                    let (which, poly) = rest
                        .split_once(':')
                        .ok_or_else(|| Error::Parse(format!("bad core line {line:?}")))?;
                    let poly = parse_polyline(poly)?;
                    match which.trim() {
                        "interior" => core_interior = Some(poly),
                        "exterior" => core_exterior = Some(poly),
                        w => return Err(Error::Parse(format!("unknown core {w:?}"))),
                    }
                }
                "name" => name = rest.to_string(),
                "param" => {
                    let (k, v) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                    params.push((k.to_string(), v.trim().to_string()));
                }
                _ => return Err(Error::Parse(format!("unknown line {line:?}"))),
            }
        }
        let [b1, b2] = basis;
        let mesh = TorusMesh {
            vertices,
            triangles,
            basis: [
                b1.ok_or_else(|| Error::Parse("missing basis e1".into()))?,
                b2.ok_or_else(|| Error::Parse("missing basis e2".into()))?,
            ],
            class_u: class_u.ok_or_else(|| Error::Parse("missing class u".into()))?,
            class_v: class_v.ok_or_else(|| Error::Parse("missing class v".into()))?,
            side_u,
            core_interior,
            core_exterior,
            name,
            params,
        };
        Ok(mesh)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("torus-mesh v1\n");
        writeln!(s, "name {}", self.name).unwrap();
        for (k, v) in &self.params {
            writeln!(s, "param {k} {v}").unwrap();
        }
        for p in &self.vertices {
            writeln!(
                s,
                "v {} {} {}",
                format_rational(&p[0]),
                format_rational(&p[1]),
                format_rational(&p[2])
            )
            .unwrap();
        }
        for t in &self.triangles {
            writeln!(s, "f {} {} {}", t[0], t[1], t[2]).unwrap();
        }
        for (i, l) in self.basis.iter().enumerate() {
            let idx: Vec<String> = l.iter().map(|v| v.to_string()).collect();
            writeln!(s, "basis e{}: {}", i + 1, idx.join(" ")).unwrap();
        }
        writeln!(s, "class u: {} {}", self.class_u[0], self.class_u[1]).unwrap();
        writeln!(s, "class v: {} {}", self.class_v[0], self.class_v[1]).unwrap();
        if let Some(side) = self.side_u {
            writeln!(s, "side u: {}", side.name()).unwrap();
        }
        for (label, core) in [("interior", &self.core_interior), ("exterior", &self.core_exterior)] {
            if let Some(c) = core {
                let pts: Vec<String> = c
                    .iter()
                    .flat_map(|p| p.iter().map(format_rational))
                    .collect();
                writeln!(s, "core {label}: {}", pts.join(" ")).unwrap();
            }
        }
        s
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn vertices_f64(&self) -> Vec<[f64; 3]> {
        self.vertices.iter().map(point_f64).collect()
    }

    /// Undirected edges keyed `(min, max)`, each with its two incident
    /// triangles in index order.
    pub fn edge_faces(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut out: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                out.entry((a.min(b), a.max(b))).or_default().push(ti);
            }
        }
        out
    }

    /// Structural checks: indices in range, nondegenerate triangles, closed
    /// and consistently oriented, manifold vertex links, connected, χ = 0,
    /// basis loops are closed edge paths, classes primitive and independent.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if self.triangles.is_empty() {
            return Err(Error::Mesh("no triangles".into()));
        }
        for (ti, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= nv) {
                return Err(Error::Mesh(format!("triangle {ti} has an index out of range")));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Mesh(format!("triangle {ti} repeats a vertex")));
            }
            let n = cross(
                &vsub(&self.vertices[t[1]], &self.vertices[t[0]]),
                &vsub(&self.vertices[t[2]], &self.vertices[t[0]]),
            );
            if n.iter().all(|c| c.is_zero()) {
                return Err(Error::Mesh(format!("degenerate triangle {ti} {t:?}")));
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *directed.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (&(a, b), &c) in &directed {
            if c != 1 {
                return Err(Error::Mesh(format!("edge {a}-{b} is used {c} times in one direction")));
            }
            if !directed.contains_key(&(b, a)) {
                return Err(Error::Mesh(format!("edge {a}-{b} is a boundary edge or misoriented")));
            }
        }
        // Vertex links: the triangles around a vertex form one cycle.
        let mut link: Vec<HashMap<usize, usize>> = vec![HashMap::new(); nv];
        for t in &self.triangles {
            for k in 0..3 {
                link[t[k]].insert(t[(k + 1) % 3], t[(k + 2) % 3]);
            }
        }
        for (v, l) in link.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::Mesh(format!("vertex {v} is not used")));
            }
            let start = *l.keys().next().unwrap();
            let mut cur = start;
            let mut steps = 0;
            loop {
                cur = l[&cur];
                steps += 1;
                if cur == start {
                    break;
                }
                if steps > l.len() {
                    return Err(Error::Mesh(format!("vertex {v} has a broken link")));
                }
            }
            if steps != l.len() {
                return Err(Error::Mesh(format!("vertex {v} is not a manifold point")));
            }
        }
        let edges = self.edge_faces();
        if !self.is_connected() {
            return Err(Error::Mesh("surface is not connected".into()));
        }
        let chi = nv as i64 - edges.len() as i64 + self.triangles.len() as i64;
        if chi != 0 {
            return Err(Error::Mesh(format!("Euler characteristic is {chi}, not 0")));
        }
        for (i, l) in self.basis.iter().enumerate() {
            if l.len() < 3 {
                return Err(Error::Mesh(format!("basis loop e{} is too short", i + 1)));
            }
            for k in 0..l.len() {
                let (a, b) = (l[k], l[(k + 1) % l.len()]);
                if !edges.contains_key(&(a.min(b), a.max(b))) {
                    return Err(Error::Mesh(format!("basis loop e{} uses non-edge {a}-{b}", i + 1)));
                }
            }
        }
        for (label, c) in [("u", self.class_u), ("v", self.class_v)] {
            if c[0].gcd(&c[1]) != 1 {
                return Err(Error::Mesh(format!("class {label} is not primitive")));
            }
        }
        let det = self.class_u[0] * self.class_v[1] - self.class_u[1] * self.class_v[0];
        if det == 0 {
            return Err(Error::Mesh("classes u and v are dependent".into()));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let nv = self.vertices.len();
        let mut adj = vec![Vec::new(); nv];
        for t in &self.triangles {
            for k in 0..3 {
                adj[t[k]].push(t[(k + 1) % 3]);
            }
        }
        let mut seen = vec![false; nv];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Sum of triangle areas. Each squared cross product is exact; only the
    /// square root and the summation are rounded.
    pub fn area(&self) -> Result<f64> {
        let mut total = 0.0;
        for (ti, t) in self.triangles.iter().enumerate() {
            let n = cross(
                &vsub(&self.vertices[t[1]], &self.vertices[t[0]]),
                &vsub(&self.vertices[t[2]], &self.vertices[t[0]]),
            );
            let sq = dot(&n, &n);
            if !sq.is_positive() {
                return Err(Error::Mesh(format!("degenerate triangle {ti} {t:?}")));
            }
            total += to_f64(&sq).sqrt() / 2.0;
        }
        Ok(total)
    }

    /// Length of a vertex loop in ℝ³.
    pub fn loop_length(&self, l: &[usize]) -> f64 {
        let p = self.vertices_f64();
        (0..l.len())
            .map(|k| crate::geometry::dist_f64(p[l[k]], p[l[(k + 1) % l.len()]]))
            .sum()
    }

    /// Apply `p -> s * p + t` to all coordinates, including cores.
    pub fn transformed(&self, s: &Rat, t: &Point3) -> TorusMesh {
        let f = |p: &Point3| -> Point3 {
            [&p[0] * s + &t[0], &p[1] * s + &t[1], &p[2] * s + &t[2]]
        };
        let mut m = self.clone();
        m.vertices = self.vertices.iter().map(f).collect();
        m.core_interior = self.core_interior.as_ref().map(|c| c.iter().map(f).collect());
        m.core_exterior = self.core_exterior.as_ref().map(|c| c.iter().map(f).collect());
        m
    }

    /// Undirected mesh edges in a fixed order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<(usize, usize)> = self.edge_faces().into_keys().collect();
        set.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rat, ratio};

    /// A 3x3 grid on a torus of revolution.
    fn grid_text() -> String {
        let n = 3;
        let mut s = String::from("torus-mesh v1\nname grid\n");
        for j in 0..n {
            for i in 0..n {
                let (a, b) = (i as f64 * 2.0 * std::f64::consts::PI / 3.0, j as f64 * 2.0 * std::f64::consts::PI / 3.0);
                let (x, y, z) = ((3.0 + b.cos()) * a.cos(), (3.0 + b.cos()) * a.sin(), b.sin());
                writeln!(s, "v {x:.6} {y:.6} {z:.6}").unwrap();
            }
        }
        let id = |i: usize, j: usize| (j % n) * n + (i % n);
        for j in 0..n {
            for i in 0..n {
                writeln!(s, "f {} {} {}", id(i, j), id(i + 1, j), id(i + 1, j + 1)).unwrap();
                writeln!(s, "f {} {} {}", id(i, j), id(i + 1, j + 1), id(i, j + 1)).unwrap();
            }
        }
        s.push_str("basis e1: 0 1 2\nbasis e2: 0 3 6\nclass u: 1 0\nclass v: 0 1\nside u: exterior\n");
        s
    }

    #[test]
    fn parse_validate_roundtrip() {
        let m = TorusMesh::parse(&grid_text()).unwrap();
        m.validate().unwrap();
        assert_eq!(m.vertices.len(), 9);
        assert_eq!(m.side_u, Some(Side::Exterior));
        let again = TorusMesh::parse(&m.to_text()).unwrap();
        assert_eq!(again.vertices, m.vertices);
        assert_eq!(again.triangles, m.triangles);
        assert_eq!(again.basis, m.basis);
    }

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse_rational("-1.25").unwrap(), ratio(-5, 4));
        assert_eq!(parse_rational("2.5e-1").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn area_scales_quadratically() {
        let m = TorusMesh::parse(&grid_text()).unwrap();
        let a = m.area().unwrap();
        let m2 = m.transformed(&rat(2), &[rat(0), rat(0), rat(0)]);
        assert!((m2.area().unwrap() / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn broken_meshes_are_rejected() {
        let mut m = TorusMesh::parse(&grid_text()).unwrap();
        m.triangles.pop();
        assert!(m.validate().is_err());

        let mut m = TorusMesh::parse(&grid_text()).unwrap();
        m.triangles[0].swap(0, 1);
        assert!(m.validate().unwrap_err().to_string().contains("edge"));

        let mut m = TorusMesh::parse(&grid_text()).unwrap();
        m.vertices[1] = m.vertices[0].clone();
        m.vertices[4] = m.vertices[0].clone();
        assert!(m.validate().unwrap_err().to_string().contains("degenerate"));

        let mut m = TorusMesh::parse(&grid_text()).unwrap();
        m.class_u = [2, 0];
        assert!(m.validate().unwrap_err().to_string().contains("primitive"));
    }

    #[test]
    fn missing_header_is_a_parse_error() {
        let e = TorusMesh::parse("v 0 0 0\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}

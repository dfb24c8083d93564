//! Parametric torus meshes with marked homology.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{snap, Point3};
use crate::linking::linking_number;
use crate::mesh::{Side, TorusMesh};

/// Coordinates are rounded to multiples of `2^-SNAP_BITS`.
pub const SNAP_BITS: u32 = 36;

fn snap3(p: [f64; 3]) -> Point3 {
    [snap(p[0], SNAP_BITS), snap(p[1], SNAP_BITS), snap(p[2], SNAP_BITS)]
}

/// A `rows x cols` grid glued into a torus. Vertex `(i, j)` has index
/// `i * cols + j`; every quad is split along its `(i, j)-(i+1, j+1)` diagonal.
struct Grid {
    rows: usize,
    cols: usize,
}

impl Grid {
    fn id(&self, i: usize, j: usize) -> usize {
        (i % self.rows) * self.cols + (j % self.cols)
    }

    fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::with_capacity(2 * self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.id(i, j);
                let b = self.id(i + 1, j);
                let c = self.id(i + 1, j + 1);
                let d = self.id(i, j + 1);
                out.push([a, b, c]);
                out.push([a, c, d]);
            }
        }
        out
    }

    fn vertices(&self, f: impl Fn(usize, usize) -> [f64; 3]) -> Vec<Point3> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(snap3(f(i, j)));
            }
        }
        out
    }

    /// Loop along the first index at fixed `j`.
    fn row_loop(&self, j: usize) -> Vec<usize> {
        (0..self.rows).map(|i| self.id(i, j)).collect()
    }

    /// Loop along the second index at fixed `i`.
    fn col_loop(&self, i: usize) -> Vec<usize> {
        (0..self.cols).map(|j| self.id(i, j)).collect()
    }

    /// Monotone staircase from `(0, 0)` going once around the first index
    /// and `turns` times around the second.
    fn staircase(&self, turns: usize) -> Vec<usize> {
        let total = turns * self.cols;
        let mut out = Vec::new();
        let mut j = 0usize;
        for i in 0..self.rows {
            out.push(self.id(i, j));
            let target = (i + 1) * total / self.rows;
            while j < target {
                j += 1;
                out.push(self.id(i, j));
            }
        }
        if out.last() == out.first() && out.len() > 1 {
            out.pop();
        }
        out
    }
}

fn circle_xy(radius: f64, z: f64, n: usize) -> Vec<Point3> {
    (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            snap3([radius * t.cos(), radius * t.sin(), z])
        })
        .collect()
}

/// A rectangle through the z-axis, closing far outside a surface of
/// revolution whose radius is below `reach` and height below `height`.
fn axis_loop(reach: f64, height: f64) -> Vec<Point3> {
    let (b, h) = (2.0 * reach + 1.0, height + 1.0);
    [[0.0, 0.0, -h], [0.0, 0.0, h], [b, 0.0, h], [b, 0.0, -h]]
        .into_iter()
        .map(snap3)
        .collect()
}

fn fmt_f(x: f64) -> String {
    format!("{x:.12}")
}

/// Perimeter of the ellipse with semi-axes `a`, `b` by composite Simpson.
pub fn ellipse_perimeter(a: f64, b: f64) -> f64 {
    let n = 4096;
    let f = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
    let h = TAU / n as f64;
    let mut s = f(0.0) + f(TAU);
    for k in 1..n {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Geometry of the twisted cylinder: a torus of revolution about the z-axis
/// whose meridian is an ellipse of perimeter `L = sqrt(1 + n^2)` centred at
/// radius `1 / (2 pi L)`, so that the surface has area 1.
#[derive(Clone, Copy, Debug)]
pub struct TwistedShape {
    pub length: f64,
    pub core_radius: f64,
    pub radial: f64,
    pub height: f64,
}

impl TwistedShape {
    pub fn new(n: u32) -> TwistedShape {
        let length = (1.0 + (n as f64).powi(2)).sqrt();
        let core_radius = 1.0 / (TAU * length);
        let radial = core_radius / 2.0;
        let (mut lo, mut hi) = (0.0, length);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ellipse_perimeter(radial, mid) < length {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        TwistedShape { length, core_radius, radial, height: 0.5 * (lo + hi) }
    }

    /// Surface area by Pappus: meridian perimeter times the path of its
    /// centroid.
    pub fn area(&self) -> f64 {
        TAU * self.core_radius * ellipse_perimeter(self.radial, self.height)
    }
}

pub const TWISTED_RING: usize = 16;

/// Twisted cylinder with `n` twists. `res` meridian segments, at least
/// `max(8n, 8)`; rounded up to an even number so the innermost ring is a
/// vertex ring.
pub fn gen_twisted_cylinder(n: u32, res: usize) -> Result<TorusMesh> {
    let min = (8 * n as usize).max(8);
    if res < min {
        return Err(Error::Domain(format!("resolution {res} below minimum {min} for n = {n}")));
    }
    let res = res + res % 2;
    let shape = TwistedShape::new(n);
    let grid = Grid { rows: res, cols: TWISTED_RING };
    let vertices = grid.vertices(|i, j| {
        let phi = TAU * i as f64 / res as f64;
        let psi = TAU * j as f64 / TWISTED_RING as f64;
        let rho = shape.core_radius + shape.radial * phi.cos();
        [rho * psi.cos(), rho * psi.sin(), shape.height * phi.sin()]
    });
    let e1 = grid.staircase(n as usize);
    let e2 = grid.col_loop(0);
    Ok(TorusMesh {
        vertices,
        triangles: grid.triangles(),
        basis: [e1, e2],
        class_u: [1, -(n as i64)],
        class_v: [0, 1],
        side_u: Some(Side::Interior),
        core_interior: Some(circle_xy(shape.core_radius, 0.0, 64)),
        core_exterior: Some(axis_loop(shape.core_radius + shape.radial, shape.height)),
        name: "twisted-cylinder".into(),
        params: vec![
            ("n".into(), n.to_string()),
            ("res".into(), res.to_string()),
            ("ring".into(), TWISTED_RING.to_string()),
            ("meridian_length".into(), fmt_f(shape.length)),
            ("core_radius".into(), fmt_f(shape.core_radius)),
            ("semi_axes".into(), format!("{},{}", fmt_f(shape.radial), fmt_f(shape.height))),
            ("analytic_area".into(), fmt_f(shape.area())),
        ],
    })
}

/// Torus of revolution `(sqrt(x^2 + y^2) - R)^2 + z^2 = r^2` with `res`
/// segments around the axis. `u` is the meridian, `v` the longitude.
pub fn gen_standard_torus(big_r: f64, small_r: f64, res: usize) -> Result<TorusMesh> {
    if !(small_r > 0.0 && small_r < big_r) {
        return Err(Error::Domain(format!("need 0 < r < R, got R = {big_r}, r = {small_r}")));
    }
    if res < 6 {
        return Err(Error::Domain(format!("resolution {res} below minimum 6")));
    }
    let cols = ((res as f64 * small_r / big_r).ceil() as usize).max(6);
    let grid = Grid { rows: res, cols };
    let vertices = grid.vertices(|i, j| {
        let theta = TAU * i as f64 / res as f64;
        let phi = TAU * j as f64 / cols as f64;
        let rho = big_r + small_r * phi.cos();
        [rho * theta.cos(), rho * theta.sin(), small_r * phi.sin()]
    });
    Ok(TorusMesh {
        vertices,
        triangles: grid.triangles(),
        basis: [grid.col_loop(0), grid.row_loop(0)],
        class_u: [1, 0],
        class_v: [0, 1],
        side_u: Some(Side::Interior),
        core_interior: Some(circle_xy(big_r, 0.0, 64)),
        core_exterior: Some(axis_loop(big_r + small_r, small_r)),
        name: "standard-torus".into(),
        params: vec![
            ("R".into(), fmt_f(big_r)),
            ("r".into(), fmt_f(small_r)),
            ("res".into(), res.to_string()),
            ("analytic_area".into(), fmt_f(4.0 * PI * PI * big_r * small_r)),
        ],
    })
}

/// Axis-aligned box torus: the square annulus between half-widths `inner`
/// and `outer` around `center`, thickened to `|z - cz| <= half_height`.
/// `u` runs around the square cross-section, `v` around the hole.
pub fn gen_flat_rectangular(
    center: [f64; 3],
    outer: f64,
    inner: f64,
    half_height: f64,
) -> Result<TorusMesh> {
    if !(inner > 0.0 && inner < outer && half_height > 0.0) {
        return Err(Error::Domain("need 0 < inner < outer and half_height > 0".into()));
    }
    let corners = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
    let section = [(outer, half_height), (inner, half_height), (inner, -half_height), (outer, -half_height)];
    let grid = Grid { rows: 4, cols: 4 };
    let vertices = grid.vertices(|i, j| {
        let (r, z) = section[j];
        [center[0] + r * corners[i][0], center[1] + r * corners[i][1], center[2] + z]
    });
    let lo = [center[0] - outer - 1.0, center[1], center[2]];
    let core_interior = corners
        .iter()
        .map(|c| {
            let r = 0.5 * (inner + outer);
            snap3([center[0] + r * c[0], center[1] + r * c[1], center[2]])
        })
        .collect();
    let h = half_height + 1.0;
    let core_exterior = [
        [center[0], center[1], center[2] - h],
        [center[0], center[1], center[2] + h],
        [lo[0], lo[1], center[2] + h],
        [lo[0], lo[1], center[2] - h],
    ]
    .into_iter()
    .map(snap3)
    .collect();
    Ok(TorusMesh {
        vertices,
        triangles: grid.triangles(),
        basis: [grid.col_loop(0), grid.row_loop(0)],
        class_u: [1, 0],
        class_v: [0, 1],
        side_u: Some(Side::Interior),
        core_interior: Some(core_interior),
        core_exterior: Some(core_exterior),
        name: "flat-rectangular".into(),
        params: vec![
            ("center".into(), center.map(fmt_f).join(",")),
            ("outer".into(), fmt_f(outer)),
            ("inner".into(), fmt_f(inner)),
            ("half_height".into(), fmt_f(half_height)),
        ],
    })
}

/// The torus knot `T_{n, n-1}` on the torus `R = 2, r = 1`, with its
/// outward torus normal and binormal `normal x tangent`.
pub struct TorusKnot {
    pub n: u32,
}

impl TorusKnot {
    pub const BIG_R: f64 = 2.0;
    pub const SMALL_R: f64 = 1.0;

    /// Turns around the axis and around the core. The negative second
    /// entry makes the knot the positive torus knot, whose torus framing is
    /// `+n(n-1)`.
    fn pq(&self) -> (f64, f64) {
        (self.n as f64, 1.0 - self.n as f64)
    }

    pub fn point(&self, t: f64) -> [f64; 3] {
        let (p, q) = self.pq();
        let rho = Self::BIG_R + Self::SMALL_R * (q * t).cos();
        [rho * (p * t).cos(), rho * (p * t).sin(), Self::SMALL_R * (q * t).sin()]
    }

    pub fn derivative(&self, t: f64) -> [f64; 3] {
        let (p, q) = self.pq();
        let rho = Self::BIG_R + Self::SMALL_R * (q * t).cos();
        let drho = -Self::SMALL_R * q * (q * t).sin();
        [
            drho * (p * t).cos() - rho * p * (p * t).sin(),
            drho * (p * t).sin() + rho * p * (p * t).cos(),
            Self::SMALL_R * q * (q * t).cos(),
        ]
    }

    pub fn normal(&self, t: f64) -> [f64; 3] {
        let (p, q) = self.pq();
        [(q * t).cos() * (p * t).cos(), (q * t).cos() * (p * t).sin(), (q * t).sin()]
    }

    pub fn binormal(&self, t: f64) -> [f64; 3] {
        let nn = self.normal(t);
        let d = self.derivative(t);
        let c = [
            nn[1] * d[2] - nn[2] * d[1],
            nn[2] * d[0] - nn[0] * d[2],
            nn[0] * d[1] - nn[1] * d[0],
        ];
        let l = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        [c[0] / l, c[1] / l, c[2] / l]
    }

    /// Arc length by composite Simpson.
    pub fn length(&self) -> f64 {
        let n = 20000;
        let f = |t: f64| {
            let d = self.derivative(t);
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
        };
        let h = TAU / n as f64;
        let mut s = f(0.0) + f(TAU);
        for k in 1..n {
            s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    /// Smallest distance between points of the knot at least half a
    /// meridian apart in arc length.
    pub fn strand_distance(&self) -> f64 {
        let samples = 400 * self.n as usize;
        let pts: Vec<[f64; 3]> = (0..samples)
            .map(|k| self.point(TAU * k as f64 / samples as f64))
            .collect();
        let step = self.length() / samples as f64;
        let skip = (PI * Self::SMALL_R / step).ceil() as usize;
        let mut best = f64::INFINITY;
        for a in 0..samples {
            for b in (a + skip)..samples {
                if samples - (b - a) < skip {
                    break;
                }
                let d = crate::geometry::dist_f64(pts[a], pts[b]);
                best = best.min(d);
            }
        }
        best
    }

    /// Largest admissible fin radius: the fin must stay off the torus core
    /// and the push-off `radius / 8` must stay clear of neighbouring
    /// strands, which come within `(1 - radius) * d` near the core.
    pub fn radius_threshold(&self) -> f64 {
        let d = self.strand_distance();
        (4.0 * d / (1.0 + 4.0 * d)).min(Self::SMALL_R)
    }
}

pub const KNOT_SECTION: usize = 8;

/// Thin lens-shaped tube around `T_{n, n-1}`: a fin of half-width `radius`
/// along the torus normal, doubled by a push-off of height `radius / 8`
/// along the binormal. `res` segments along the knot, at least `16n`.
pub fn gen_knot_tube(n: u32, radius: f64, res: usize) -> Result<TorusMesh> {
    if n < 2 {
        return Err(Error::Domain(format!("knot tube needs n >= 2, got {n}")));
    }
    let min = 16 * n as usize;
    if res < min {
        return Err(Error::Domain(format!("resolution {res} below minimum {min} for n = {n}")));
    }
    let knot = TorusKnot { n };
    let threshold = knot.radius_threshold();
    if !(radius > 0.0 && radius < threshold) {
        return Err(Error::Domain(format!(
            "radius {radius} not below embeddedness threshold {threshold:.6}"
        )));
    }
    let eps = radius / 8.0;
    let grid = Grid { rows: res, cols: KNOT_SECTION };
    let frame = |i: usize| {
        let t = TAU * i as f64 / res as f64;
        (knot.point(t), knot.normal(t), knot.binormal(t))
    };
    let at = |b: [f64; 3], nn: [f64; 3], bb: [f64; 3], s: f64, o: f64| {
        [
            b[0] + s * nn[0] + o * bb[0],
            b[1] + s * nn[1] + o * bb[1],
            b[2] + s * nn[2] + o * bb[2],
        ]
    };
    let vertices = grid.vertices(|i, j| {
        let (b, nn, bb) = frame(i);
        let theta = TAU * j as f64 / KNOT_SECTION as f64;
        at(b, nn, bb, radius * theta.cos(), eps * theta.sin().max(0.0))
    });
    let core: Vec<[f64; 3]> = (0..res)
        .map(|i| {
            let (b, nn, bb) = frame(i);
            at(b, nn, bb, 0.0, eps / 2.0)
        })
        .collect();
    let mut mesh = TorusMesh {
        vertices,
        triangles: grid.triangles(),
        basis: [grid.row_loop(0), grid.col_loop(0)],
        class_u: [1, 0],
        class_v: [0, 1],
        side_u: Some(Side::Exterior),
        core_interior: Some(core.iter().map(|p| snap3(*p)).collect()),
        core_exterior: None,
        name: "knot-tube".into(),
        params: vec![
            ("n".into(), n.to_string()),
            ("radius".into(), fmt_f(radius)),
            ("eps".into(), fmt_f(eps)),
            ("res".into(), res.to_string()),
            ("radius_threshold".into(), fmt_f(threshold)),
            ("knot_length".into(), fmt_f(knot.length())),
        ],
    };
    // u = e1 - k e2 must bound outside, so it cannot link the interior core.
    let pts = mesh.vertices_f64();
    let poly = |l: &[usize]| -> Vec<[f64; 3]> { l.iter().map(|&v| pts[v]).collect() };
    let l1 = linking_number(&poly(&mesh.basis[0]), &core)?;
    let l2 = linking_number(&poly(&mesh.basis[1]), &core)?;
    if l2.abs() != 1 {
        return Err(Error::Verification(format!("fiber links the core {l2} times")));
    }
    let k = l1 * l2;
    mesh.class_u = [1, -k];
    mesh.params.push(("framing".into(), k.to_string()));
    Ok(mesh)
}

/// Linking numbers of the basis loops with the core curves:
/// `(core, [lk(e1, core), lk(e2, core)])` for each core present.
pub fn basis_linking(mesh: &TorusMesh) -> Result<Vec<(Side, [i64; 2])>> {
    let pts = mesh.vertices_f64();
    let poly = |l: &[usize]| -> Vec<[f64; 3]> { l.iter().map(|&v| pts[v]).collect() };
    let mut out = Vec::new();
    for (side, core) in [(Side::Interior, &mesh.core_interior), (Side::Exterior, &mesh.core_exterior)] {
        if let Some(c) = core {
            let c: Vec<[f64; 3]> = c.iter().map(crate::geometry::point_f64).collect();
            out.push((
                side,
                [linking_number(&poly(&mesh.basis[0]), &c)?, linking_number(&poly(&mesh.basis[1]), &c)?],
            ));
        }
    }
    Ok(out)
}

/// Check the `side u` marking against the cores: a class that bounds in one
/// component does not link any curve in the other.
pub fn verify_side_marking(mesh: &TorusMesh) -> Result<()> {
    let Some(side_u) = mesh.side_u else {
        return Ok(());
    };
    let dot = |c: [i64; 2], l: [i64; 2]| c[0] * l[0] + c[1] * l[1];
    for (core_side, lk) in basis_linking(mesh)? {
        let (lu, lv) = (dot(mesh.class_u, lk), dot(mesh.class_v, lk));
        // The core on u's bounding side is linked by u but not by v.
        let (zero, unit) = if core_side == side_u { (lv, lu) } else { (lu, lv) };
        if zero != 0 || unit.abs() != 1 {
            return Err(Error::Verification(format!(
                "{} core: lk(u) = {lu}, lk(v) = {lv}",
                core_side.name()
            )));
        }
    }
    Ok(())
}

/// Mesh coarseness relative to a reference length: longest edge over `len`.
pub fn granularity(mesh: &TorusMesh, len: f64) -> f64 {
    let p = mesh.vertices_f64();
    mesh.edge_list()
        .iter()
        .map(|&(a, b)| crate::geometry::dist_f64(p[a], p[b]))
        .fold(0.0, f64::max)
        / len
}

/// Build a mesh from a family name and `key=value` parameters.
pub fn generate(family: &str, params: &[(String, String)]) -> Result<TorusMesh> {
    let get = |k: &str| params.iter().find(|(a, _)| a == k).map(|(_, b)| b.as_str());
    let num = |k: &str, d: f64| -> Result<f64> {
        match get(k) {
            None => Ok(d),
            Some(s) => s.parse().map_err(|_| Error::Parse(format!("bad value for {k}: {s:?}"))),
        }
    };
    let int = |k: &str, d: usize| -> Result<usize> {
        match get(k) {
            None => Ok(d),
            Some(s) => s.parse().map_err(|_| Error::Parse(format!("bad value for {k}: {s:?}"))),
        }
    };
    for (k, _) in params {
        let known: &[&str] = match family {
            "twisted-cylinder" => &["n", "res"],
            "knot-tube" => &["n", "radius", "res"],
            "standard-torus" => &["R", "r", "res"],
            "flat-rectangular" => &["cx", "cy", "cz", "outer", "inner", "half_height"],
            _ => &[],
        };
        if !known.contains(&k.as_str()) {
            return Err(Error::Parse(format!("unknown parameter {k:?} for family {family:?}")));
        }
    }
    match family {
        "twisted-cylinder" => {
            let n = int("n", 1)?;
            gen_twisted_cylinder(n as u32, int("res", (8 * n).max(8))?)
        }
        "knot-tube" => {
            let n = int("n", 3)?;
            gen_knot_tube(n as u32, num("radius", 0.4)?, int("res", 32 * n)?)
        }
        "standard-torus" => gen_standard_torus(num("R", 2.0)?, num("r", 1.0)?, int("res", 48)?),
        "flat-rectangular" => gen_flat_rectangular(
            [num("cx", 0.5)?, num("cy", 0.5)?, num("cz", 0.0)?],
            num("outer", 0.4)?,
            num("inner", 0.15)?,
            num("half_height", 0.2)?,
        ),
        _ => Err(Error::Parse(format!(
            "unknown family {family:?}; expected twisted-cylinder, knot-tube, standard-torus or flat-rectangular"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::HomologyLabeling;

    #[test]
    fn twisted_markings() {
        for n in [0u32, 1, 3, 5] {
            let m = gen_twisted_cylinder(n, (8 * n as usize).max(8)).unwrap();
            m.validate().unwrap();
            let lab = HomologyLabeling::new(&m).unwrap();
            assert_eq!(lab.loop_class(&m.basis[0]).unwrap(), [1, n as i64]);
            assert_eq!(lab.loop_class(&m.basis[1]).unwrap(), [0, 1]);
            // The meridian ring through i = 0, j fixed is u.
            let meridian: Vec<usize> = (0..m.vertices.len() / TWISTED_RING)
                .map(|i| i * TWISTED_RING)
                .collect();
            assert_eq!(lab.loop_class(&meridian).unwrap(), [1, 0]);
            verify_side_marking(&m).unwrap();
        }
    }

    #[test]
    fn twisted_area_is_one() {
        for n in [0u32, 2, 6] {
            let shape = TwistedShape::new(n);
            assert!((shape.area() - 1.0).abs() < 1e-9, "{}", shape.area());
            assert!((ellipse_perimeter(shape.radial, shape.height) - shape.length).abs() < 1e-9);
            let m = gen_twisted_cylinder(n, 64.max(8 * n as usize)).unwrap();
            let a = m.area().unwrap();
            assert!((a - 1.0).abs() < 0.05, "n={n} area {a}");
        }
    }

    #[test]
    fn twisted_rejects_low_resolution() {
        assert!(gen_twisted_cylinder(3, 23).is_err());
    }

    #[test]
    fn standard_torus_markings_and_area() {
        let m = gen_standard_torus(2.0, 1.0, 100).unwrap();
        m.validate().unwrap();
        let lab = HomologyLabeling::new(&m).unwrap();
        assert_eq!(lab.loop_class(&m.basis[0]).unwrap(), [1, 0]);
        assert_eq!(lab.loop_class(&m.basis[1]).unwrap(), [0, 1]);
        verify_side_marking(&m).unwrap();
        assert!(m.triangles.len() >= 10_000 / 2);
        let a = m.area().unwrap();
        let exact = 4.0 * PI * PI * 2.0;
        assert!((a - exact).abs() / exact < 0.01, "{a}");
        assert!(gen_standard_torus(1.0, 1.0, 20).is_err());
    }

    #[test]
    fn flat_rectangular_is_valid() {
        let m = gen_flat_rectangular([0.5, 0.5, 0.0], 0.4, 0.15, 0.2).unwrap();
        m.validate().unwrap();
        assert_eq!(m.vertices.len(), 16);
        assert_eq!(m.triangles.len(), 32);
        verify_side_marking(&m).unwrap();
        // Square annulus top and bottom plus four walls.
        let area = 2.0 * (0.8f64.powi(2) - 0.3f64.powi(2)) + 0.4 * 4.0 * (0.8 + 0.3);
        assert!((m.area().unwrap() - area).abs() < 1e-9);
    }

    #[test]
    fn knot_tube_framing() {
        for n in [2u32, 3, 4] {
            let m = gen_knot_tube(n, 0.4, 32 * n as usize).unwrap();
            m.validate().unwrap();
            let k = n as i64 * (n as i64 - 1);
            assert_eq!(m.class_u[1].abs(), k, "n={n}");
            verify_side_marking(&m).unwrap();
        }
        assert!(gen_knot_tube(3, 1.5, 96).is_err());
        assert!(gen_knot_tube(1, 0.1, 96).is_err());
    }
}

//! Linking numbers of closed polylines.

use crate::error::{Error, Result};

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Projection directions tried in turn; irrational-looking components keep
/// them away from the axis-aligned structure of generated curves.
const DIRECTIONS: [[f64; 3]; 6] = [
    [0.3141592653, 0.2718281828, 0.9135454576],
    [0.8660254037, -0.1414213562, 0.4794255386],
    [-0.5772156649, 0.6931471805, 0.4306765581],
    [0.1234567891, -0.9876543219, 0.0966666666],
    [0.7071067811, 0.5772156649, -0.4082482904],
    [-0.2236067977, -0.3605551275, 0.9055385138],
];

/// Linking number of two disjoint closed polylines (closing segment
/// implied), by signed crossings of `a` over `b` in a generic projection.
pub fn linking_number(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<i64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Domain("linking number needs closed polylines".into()));
    }
    for d in DIRECTIONS {
        if let Some(lk) = crossings(a, b, normalize(d)) {
            return Ok(lk);
        }
    }
    Err(Error::GeneralPosition("every projection direction was degenerate".into()))
}

fn crossings(a: &[[f64; 3]], b: &[[f64; 3]], d: [f64; 3]) -> Option<i64> {
    // Orthonormal frame of the projection plane.
    let helper = if d[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = normalize(cross(d, helper));
    let e2 = cross(d, e1);
    let proj = |p: [f64; 3]| (dot(p, e1), dot(p, e2));
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|p| dot(*p, *p).sqrt())
        .fold(1.0f64, f64::max);
    let eps = 1e-10;
    let mut total = 0i64;
    for i in 0..a.len() {
        let (p0, p1) = (a[i], a[(i + 1) % a.len()]);
        let (u0, u1) = (proj(p0), proj(p1));
        for j in 0..b.len() {
            let (q0, q1) = (b[j], b[(j + 1) % b.len()]);
            let (v0, v1) = (proj(q0), proj(q1));
            let r = (u1.0 - u0.0, u1.1 - u0.1);
            let s = (v1.0 - v0.0, v1.1 - v0.1);
            let den = r.0 * s.1 - r.1 * s.0;
            let w = (v0.0 - u0.0, v0.1 - u0.1);
            let lr = (r.0 * r.0 + r.1 * r.1).sqrt();
            let ls = (s.0 * s.0 + s.1 * s.1).sqrt();
            if den.abs() <= eps * lr * ls {
                // Parallel in projection: degenerate only if collinear and
                // overlapping.
                let off = (w.0 * r.1 - w.1 * r.0).abs();
                if off <= eps * scale * lr {
                    let t0 = (w.0 * r.0 + w.1 * r.1) / (lr * lr);
                    let t1 = ((v1.0 - u0.0) * r.0 + (v1.1 - u0.1) * r.1) / (lr * lr);
                    if t0.max(t1) >= -eps && t0.min(t1) <= 1.0 + eps {
                        return None;
                    }
                }
                continue;
            }
            let t = (w.0 * s.1 - w.1 * s.0) / den;
            let uu = (w.0 * r.1 - w.1 * r.0) / den;
            let near = |x: f64| x.abs() < 1e-9 || (x - 1.0).abs() < 1e-9;
            if near(t) || near(uu) {
                if (-1e-9..=1.0 + 1e-9).contains(&t) && (-1e-9..=1.0 + 1e-9).contains(&uu) {
                    return None;
                }
                continue;
            }
            if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&uu) {
                continue;
            }
            let pa = [
                p0[0] + t * (p1[0] - p0[0]),
                p0[1] + t * (p1[1] - p0[1]),
                p0[2] + t * (p1[2] - p0[2]),
            ];
            let pb = [
                q0[0] + uu * (q1[0] - q0[0]),
                q0[1] + uu * (q1[1] - q0[1]),
                q0[2] + uu * (q1[2] - q0[2]),
            ];
            let ha = dot(pa, d);
            let hb = dot(pb, d);
            if (ha - hb).abs() <= 1e-12 * scale {
                return None;
            }
            if ha > hb {
                let sign = dot(cross(sub(p1, p0), sub(q1, q0)), d);
                total += if sign > 0.0 { 1 } else { -1 };
            }
        }
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn circle(c: [f64; 3], r: f64, e1: [f64; 3], e2: [f64; 3], n: usize) -> Vec<[f64; 3]> {
        (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                [
                    c[0] + r * (t.cos() * e1[0] + t.sin() * e2[0]),
                    c[1] + r * (t.cos() * e1[1] + t.sin() * e2[1]),
                    c[2] + r * (t.cos() * e1[2] + t.sin() * e2[2]),
                ]
            })
            .collect()
    }

    /// Gauss linking integral by midpoint quadrature on subdivided segments.
    fn gauss(a: &[[f64; 3]], b: &[[f64; 3]], sub_n: usize) -> f64 {
        let refine = |p: &[[f64; 3]]| -> Vec<([f64; 3], [f64; 3])> {
            let mut out = Vec::new();
            for i in 0..p.len() {
                let (s, e) = (p[i], p[(i + 1) % p.len()]);
                for k in 0..sub_n {
                    let t0 = k as f64 / sub_n as f64;
                    let t1 = (k + 1) as f64 / sub_n as f64;
                    let x0 = [s[0] + t0 * (e[0] - s[0]), s[1] + t0 * (e[1] - s[1]), s[2] + t0 * (e[2] - s[2])];
                    let x1 = [s[0] + t1 * (e[0] - s[0]), s[1] + t1 * (e[1] - s[1]), s[2] + t1 * (e[2] - s[2])];
                    out.push(([(x0[0] + x1[0]) / 2.0, (x0[1] + x1[1]) / 2.0, (x0[2] + x1[2]) / 2.0], sub(x1, x0)));
                }
            }
            out
        };
        let (ra, rb) = (refine(a), refine(b));
        let mut s = 0.0;
        for (pa, da) in &ra {
            for (pb, db) in &rb {
                let r = sub(*pa, *pb);
                let n = dot(r, r).sqrt();
                s += dot(r, cross(*da, *db)) / (n * n * n);
            }
        }
        s / (2.0 * TAU)
    }

    #[test]
    fn hopf_link_matches_gauss_integral() {
        let a = circle([0.0, 0.0, 0.0], 1.0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 40);
        let b = circle([1.0, 0.0, 0.0], 1.0, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 40);
        let lk = linking_number(&a, &b).unwrap();
        let g = gauss(&a, &b, 4);
        assert_eq!(lk.abs(), 1);
        assert_eq!(lk, g.round() as i64, "gauss {g}");
        assert_eq!(linking_number(&b, &a).unwrap(), lk);
        let mut rev = a.clone();
        rev.reverse();
        assert_eq!(linking_number(&rev, &b).unwrap(), -lk);
    }

    #[test]
    fn unlinked_circles() {
        let a = circle([0.0, 0.0, 0.0], 1.0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 30);
        let b = circle([5.0, 0.0, 0.0], 1.0, [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 30);
        assert_eq!(linking_number(&a, &b).unwrap(), 0);
    }

    #[test]
    fn torus_knot_pushoff_matches_gauss_integral() {
        // A (3,2) torus knot and its push-off along the torus normal link 6 times.
        let (p, q, n) = (3.0, 2.0, 300);
        let curve = |off: f64| -> Vec<[f64; 3]> {
            (0..n)
                .map(|i| {
                    let t = TAU * i as f64 / n as f64;
                    let r = 1.0 + off;
                    let rho = 2.0 + r * (q * t).cos();
                    [rho * (p * t).cos(), rho * (p * t).sin(), r * (q * t).sin()]
                })
                .collect()
        };
        let a = curve(0.0);
        let b = curve(0.3);
        let lk = linking_number(&a, &b).unwrap();
        let g = gauss(&a, &b, 2);
        assert_eq!(lk, g.round() as i64, "gauss {g}");
        assert_eq!(lk.abs(), 6);
    }
}

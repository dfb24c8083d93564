//! Exact rational geometry predicates.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;
pub type Point3 = [Rat; 3];

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Round `x` to the nearest multiple of `2^-bits`, exactly representable.
pub fn snap(x: f64, bits: u32) -> Rat {
    let scale = (1u64 << bits) as f64;
    let n = (x * scale).round() as i64;
    Rat::new(BigInt::from(n), BigInt::from(1u64 << bits))
}

pub fn to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fall back for huge numerators/denominators.
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn point_f64(p: &Point3) -> [f64; 3] {
    [to_f64(&p[0]), to_f64(&p[1]), to_f64(&p[2])]
}

pub fn floor_int(x: &Rat) -> i64 {
    let (q, _) = x.numer().div_mod_floor(x.denom());
    q.to_i64().expect("lattice index out of i64 range")
}

pub fn vsub(a: &Point3, b: &Point3) -> Point3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

pub fn vadd(a: &Point3, b: &Point3) -> Point3 {
    [&a[0] + &b[0], &a[1] + &b[1], &a[2] + &b[2]]
}

pub fn vscale(a: &Point3, s: &Rat) -> Point3 {
    [&a[0] * s, &a[1] * s, &a[2] * s]
}

pub fn dot(a: &Point3, b: &Point3) -> Rat {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

pub fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

pub fn det3(a: &Point3, b: &Point3, c: &Point3) -> Rat {
    dot(a, &cross(b, c))
}

/// Point on segment `a -> b` at parameter `t`.
pub fn lerp(a: &Point3, b: &Point3, t: &Rat) -> Point3 {
    vadd(a, &vscale(&vsub(b, a), t))
}

/// Sign of the 2D orientation of `(a, b, c)`.
pub fn orient2d(a: (&Rat, &Rat), b: (&Rat, &Rat), c: (&Rat, &Rat)) -> Ordering {
    let d = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    d.cmp(&Rat::zero())
}

/// Outcome of shooting a ray at a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayHit {
    Miss,
    Hit,
    /// The ray grazes an edge, a vertex, or the triangle's plane; the caller
    /// should retry with another direction.
    Degenerate,
}

/// Exact ray/triangle crossing test for the open ray `o + t d`, `t > 0`.
pub fn ray_triangle(o: &Point3, d: &Point3, tri: [&Point3; 3]) -> RayHit {
    let [a, b, c] = tri;
    let n = cross(&vsub(b, a), &vsub(c, a));
    let denom = dot(&n, d);
    let num = dot(&n, &vsub(a, o));
    if denom.is_zero() {
        return if num.is_zero() {
            RayHit::Degenerate
        } else {
            RayHit::Miss
        };
    }
    let t_sign = num.signum() * denom.signum();
    if num.is_zero() {
        // Origin lies in the triangle's plane.
        return RayHit::Degenerate;
    }
    if t_sign.is_negative() {
        return RayHit::Miss;
    }
    let (ao, bo, co) = (vsub(a, o), vsub(b, o), vsub(c, o));
    let s = [det3(d, &ao, &bo), det3(d, &bo, &co), det3(d, &co, &ao)];
    let pos = s.iter().filter(|x| x.is_positive()).count();
    let neg = s.iter().filter(|x| x.is_negative()).count();
    if pos == 3 || neg == 3 {
        RayHit::Hit
    } else if pos > 0 && neg > 0 {
        RayHit::Miss
    } else {
        RayHit::Degenerate
    }
}

/// Parity ray casting against a closed triangle mesh. Returns `None` when the
/// ray is not generic for this mesh.
pub fn point_inside(
    p: &Point3,
    dir: &Point3,
    vertices: &[Point3],
    triangles: &[[usize; 3]],
) -> Option<bool> {
    let mut crossings = 0usize;
    for t in triangles {
        match ray_triangle(p, dir, [&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]]) {
            RayHit::Hit => crossings += 1,
            RayHit::Miss => {}
            RayHit::Degenerate => return None,
        }
    }
    Some(crossings % 2 == 1)
}

/// A fixed family of generic ray directions with small rational entries.
pub fn generic_directions() -> Vec<Point3> {
    [
        (7, 3, 2),
        (-5, 11, 4),
        (3, -7, 13),
        (-2, -9, 5),
        (17, 6, -11),
        (1, 19, 23),
        (-13, 4, -29),
    ]
    .iter()
    .map(|&(a, b, c)| [rat(a), rat(b), rat(c)])
    .collect()
}

/// Parity test trying several generic directions until one is not degenerate.
pub fn point_inside_mesh(p: &Point3, vertices: &[Point3], triangles: &[[usize; 3]]) -> Option<bool> {
    generic_directions()
        .iter()
        .find_map(|d| point_inside(p, d, vertices, triangles))
}

/// Exact point-in-polygon test in 2D by crossing parity. `p` must not lie on
/// the polygon boundary.
pub fn point_in_polygon(p: (&Rat, &Rat), poly: &[(Rat, Rat)]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (xi, yi) = (&poly[i].0, &poly[i].1);
        let (xj, yj) = (&poly[(i + 1) % n].0, &poly[(i + 1) % n].1);
        if (yi > p.1) != (yj > p.1) {
            // x coordinate of the edge at height p.1, compared without division
            // sign flips: px < xi + (py - yi)(xj - xi)/(yj - yi)
            let lhs = (p.0 - xi) * (yj - yi);
            let rhs = (p.1 - yi) * (xj - xi);
            let less = if (yj - yi).is_positive() { lhs < rhs } else { lhs > rhs };
            if less {
                inside = !inside;
            }
        }
    }
    inside
}

/// Twice the signed area of a 2D polygon.
pub fn signed_area2(poly: &[(Rat, Rat)]) -> Rat {
    let n = poly.len();
    let mut s = Rat::zero();
    for i in 0..n {
        let (a, b) = (&poly[i], &poly[(i + 1) % n]);
        s += &a.0 * &b.1 - &b.0 * &a.1;
    }
    s
}

pub fn dist_f64(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Largest pairwise distance among the points.
pub fn diameter(points: &[[f64; 3]]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.max(dist_f64(points[i], points[j]));
        }
    }
    best
}

pub fn is_one(x: &Rat) -> bool {
    x.is_one()
}

use exsys::generators::{gen_flat_rectangular, gen_standard_torus, gen_twisted_cylinder};
use exsys::geometry::{rat, ratio, snap, to_f64};
use exsys::homology::HomologyLabeling;
use exsys::intersect::{arc_label, intersect_lattice, measure_f64};
use exsys::lattice::Lattice;
use exsys::mesh::{Side, TorusMesh};
use exsys::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lattice(spacing: f64, offset: [f64; 3]) -> Lattice {
    Lattice {
        spacing: snap(spacing, 20),
        offset: offset.map(|x| snap(x, 30)),
    }
}

/// Parity of crossings of a ray with the mesh in f64, majority over several
/// directions.
fn inside_oracle(p: [f64; 3], verts: &[[f64; 3]], tris: &[[usize; 3]]) -> bool {
    let dirs = [[0.31, 0.52, 0.79], [-0.66, 0.21, 0.43], [0.12, -0.93, 0.37], [0.57, 0.44, -0.69], [-0.2, -0.3, -0.93]];
    let mut votes = 0;
    for d in dirs {
        let mut n = 0;
        for t in tris {
            let (a, b, c) = (verts[t[0]], verts[t[1]], verts[t[2]]);
            let e1 = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let e2 = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
            let h = [d[1] * e2[2] - d[2] * e2[1], d[2] * e2[0] - d[0] * e2[2], d[0] * e2[1] - d[1] * e2[0]];
            let det = e1[0] * h[0] + e1[1] * h[1] + e1[2] * h[2];
            if det.abs() < 1e-300 {
                continue;
            }
            let s = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
            let u = (s[0] * h[0] + s[1] * h[1] + s[2] * h[2]) / det;
            let q = [s[1] * e1[2] - s[2] * e1[1], s[2] * e1[0] - s[0] * e1[2], s[0] * e1[1] - s[1] * e1[0]];
            let v = (d[0] * q[0] + d[1] * q[1] + d[2] * q[2]) / det;
            let t = (e2[0] * q[0] + e2[1] * q[1] + e2[2] * q[2]) / det;
            if u > 0.0 && v > 0.0 && u + v < 1.0 && t > 0.0 {
                n += 1;
            }
        }
        votes += n % 2;
    }
    votes * 2 > dirs.len()
}

fn check_sides(mesh: &TorusMesh, lat: &Lattice) {
    let data = intersect_lattice(mesh, lat).unwrap();
    let verts = mesh.vertices_f64();
    let s = to_f64(&lat.spacing);
    let o = lat.offset.each_ref().map(to_f64);
    let lo: Vec<i64> = (0..3)
        .map(|a| ((verts.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min) - o[a]) / s).floor() as i64 - 1)
        .collect();
    let hi: Vec<i64> = (0..3)
        .map(|a| ((verts.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max) - o[a]) / s).ceil() as i64 + 1)
        .collect();
    let mut interior = 0;
    for x in lo[0]..=hi[0] {
        for y in lo[1]..=hi[1] {
            for z in lo[2]..=hi[2] {
                let w = [o[0] + s * x as f64, o[1] + s * y as f64, o[2] + s * z as f64];
                let expect = inside_oracle(w, &verts, &mesh.triangles);
                let got = data.refined.vertex_side([x, y, z]) == Side::Interior;
                assert_eq!(got, expect, "lattice vertex {x} {y} {z}");
                interior += got as usize;
            }
        }
    }
    assert!(interior > 0, "no interior lattice vertex sampled");
}

#[test]
fn box_torus_meets_one_plane_in_two_circles() {
    let mesh = gen_flat_rectangular([0.5, 0.5, 0.0], 0.4, 0.15, 0.2).unwrap();
    let lat = Lattice { spacing: rat(1), offset: [rat(0), rat(0), rat(0)] };
    let data = intersect_lattice(&mesh, &lat).unwrap();
    assert_eq!(data.curves.len(), 2);
    assert_eq!(data.hit_count(), 0);
    assert!((data.total_length - 4.4).abs() < 1e-9, "{}", data.total_length);
    let mut lengths: Vec<f64> = data.curves.iter().map(|c| c.length).collect();
    lengths.sort_by(f64::total_cmp);
    assert!((lengths[0] - 1.2).abs() < 1e-9 && (lengths[1] - 3.2).abs() < 1e-9);
    let lab = HomologyLabeling::new(&mesh).unwrap();
    for arc in &data.refined.arcs {
        let c = lab.e_to_uv(arc_label(&mesh, &lab, arc).unwrap());
        assert_eq!(c[0], 0);
        assert_eq!(c[1].abs(), 1);
    }
    assert!(data.report().contains("curves 2"));
}

#[test]
fn surface_inside_one_cell_misses_the_skeleton() {
    let mesh = gen_flat_rectangular([0.5, 0.5, 0.5], 0.4, 0.15, 0.2).unwrap();
    let lat = Lattice { spacing: rat(1), offset: [rat(0), rat(0), rat(0)] };
    let data = intersect_lattice(&mesh, &lat).unwrap();
    assert!(data.curves.is_empty());
    assert_eq!(data.hit_count(), 0);
    assert_eq!(data.total_length, 0.0);
}

#[test]
fn vertex_on_plane_is_rejected() {
    let mesh = gen_flat_rectangular([0.5, 0.5, 0.0], 0.4, 0.15, 0.2).unwrap();
    let lat = Lattice { spacing: ratio(1, 10), offset: [rat(0), rat(0), rat(0)] };
    match intersect_lattice(&mesh, &lat) {
        Err(e @ Error::GeneralPosition(_)) => assert_eq!(e.exit_code(), 3),
        other => panic!("expected general position error, got {other:?}"),
    }
}

#[test]
fn plane_through_the_hole_cuts_meridians() {
    let mesh = gen_twisted_cylinder(2, 32).unwrap();
    let lab = HomologyLabeling::new(&mesh).unwrap();
    let lat = lattice(4.0, [0.001, 1.3, 2.1]);
    let data = intersect_lattice(&mesh, &lat).unwrap();
    assert_eq!(data.curves.len(), 2);
    assert_eq!(data.hit_count(), 0);
    for arc in &data.refined.arcs {
        let c = lab.e_to_uv(arc_label(&mesh, &lab, arc).unwrap());
        assert_eq!(c[0].abs(), 1);
        assert_eq!(c[1], 0);
    }
}

#[test]
fn exact_counts_match_floating_measurement() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (mesh, spacing) in [
        (gen_twisted_cylinder(2, 32).unwrap(), 0.05),
        (gen_twisted_cylinder(5, 64).unwrap(), 0.1),
        (gen_standard_torus(2.0, 1.0, 24).unwrap(), 0.7),
    ] {
        let verts = mesh.vertices_f64();
        let mut done = 0;
        for _ in 0..20 {
            let off = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()].map(|x| x * spacing);
            let lat = lattice(spacing, off);
            let data = match intersect_lattice(&mesh, &lat) {
                Ok(d) => d,
                Err(Error::GeneralPosition(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let (l, h) = measure_f64(
                &verts,
                &mesh.triangles,
                to_f64(&lat.spacing),
                lat.offset.each_ref().map(to_f64),
            );
            assert_eq!(data.hit_count(), h);
            assert!((data.total_length - l).abs() <= 1e-9 * l.max(1.0));
            // Every crossing lies on two planes, hence on two curves.
            let per_curve: usize = data.curves.iter().map(|c| c.hit_count).sum();
            assert_eq!(per_curve, 2 * data.hit_count());
            let arcs: usize = data.curves.iter().map(|c| c.arcs.len()).sum();
            assert_eq!(arcs, data.refined.arcs.len());
            done += 1;
            if done == 3 {
                break;
            }
        }
        assert_eq!(done, 3, "general position retries failed for {}", mesh.name);
    }
}

#[test]
fn side_labels_match_ray_casting() {
    check_sides(&gen_standard_torus(2.0, 1.0, 24).unwrap(), &lattice(0.37, [0.011, 0.023, 0.017]));
    check_sides(&gen_flat_rectangular([0.5, 0.5, 0.0], 0.4, 0.15, 0.2).unwrap(), &lattice(0.09, [0.003, 0.001, 0.002]));
}

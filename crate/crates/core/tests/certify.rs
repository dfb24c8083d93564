use exsys::certify::*;
use exsys::generators::{gen_flat_rectangular, gen_standard_torus, gen_twisted_cylinder};
use exsys::geometry::{rat, snap};
use exsys::homology::HomologyLabeling;
use exsys::intersect::intersect_lattice;
use exsys::lattice::Lattice;
use exsys::mesh::TorusMesh;
use exsys::Error;
use num_traits::Zero;

fn lattice(spacing: f64, offset: [f64; 3]) -> Lattice {
    Lattice { spacing: snap(spacing, 20), offset: offset.map(|x| snap(x, 30)) }
}

fn certificate(mesh: &TorusMesh, lat: Lattice, body: CertificateBody) -> Certificate {
    Certificate {
        mesh_name: mesh.name.clone(),
        vertices: mesh.vertices.len(),
        triangles: mesh.triangles.len(),
        seed: 0,
        scale: rat(1),
        lattice: lat,
        body,
    }
}

fn dichotomy(mesh: &TorusMesh, lat: Lattice) -> Certificate {
    let lab = HomologyLabeling::new(mesh).unwrap();
    let data = intersect_lattice(mesh, &lat).unwrap();
    let body = match essential_curve_in_j(mesh, &lab, &data, &[]).unwrap() {
        JFinding::VInCube(w) => CertificateBody::VInCube(w),
        JFinding::Essential { path, class } => {
            CertificateBody::ShortU(run_cw_pipeline(mesh, &lab, &data, path, class).unwrap())
        }
    };
    certificate(mesh, lat, body)
}

fn short_u_instance() -> (TorusMesh, Certificate) {
    let mesh = gen_twisted_cylinder(2, 32).unwrap();
    let c = dichotomy(&mesh, lattice(4.0, [0.001, 1.3, 2.1]));
    (mesh, c)
}

#[test]
fn plane_through_the_hole_gives_short_u() {
    let (mesh, cert) = short_u_instance();
    assert_eq!(cert.kind(), "short-u");
    verify_certificate(&mesh, &cert).unwrap();
    let CertificateBody::ShortU(s) = &cert.body else { unreachable!() };
    assert_eq!(s.omega_class[0].abs(), 1);
    assert_eq!(s.gamma_class, [s.omega_class[0], 0]);
    assert!(s.gamma_length <= s.threshold);
    let text = cert.to_text();
    let back = Certificate::from_text(&text).unwrap();
    verify_certificate(&mesh, &back).unwrap();
    assert_eq!(back.to_text(), text);
}

#[test]
fn tampered_short_u_is_rejected() {
    let (mesh, cert) = short_u_instance();
    let text = cert.to_text();
    for (from, to) in [("gamma_class -1 0", "gamma_class 1 0"), ("gamma_class 1 0", "gamma_class -1 0")] {
        if text.contains(from) {
            let bad = Certificate::from_text(&text.replace(from, to)).unwrap();
            assert!(matches!(verify_certificate(&mesh, &bad), Err(Error::Verification(_))));
        }
    }
    let CertificateBody::ShortU(s) = &cert.body else { unreachable!() };
    let mut doubled = cert.clone();
    if let CertificateBody::ShortU(d) = &mut doubled.body {
        d.filling = s.filling.scaled(2);
    }
    assert!(verify_certificate(&mesh, &doubled).is_err());
    let other = gen_twisted_cylinder(3, 32).unwrap();
    assert!(verify_certificate(&other, &cert).is_err());
    assert!(Certificate::from_text(&text.replace("[end]\n", "")).is_err());
    assert!(matches!(Certificate::from_text("garbage"), Err(Error::Parse(_))));
}

#[test]
fn surface_inside_one_cube_contains_v() {
    let mesh = gen_flat_rectangular([0.5, 0.5, 0.5], 0.4, 0.15, 0.2).unwrap();
    let lat = Lattice { spacing: rat(1), offset: [rat(0), rat(0), rat(0)] };
    let cert = dichotomy(&mesh, lat);
    let CertificateBody::VInCube(w) = &cert.body else { panic!("expected v-in-cube") };
    assert_eq!(w.cube, [0, 0, 0]);
    assert!(w.diameter <= 3f64.sqrt());
    verify_certificate(&mesh, &cert).unwrap();
    let back = Certificate::from_text(&cert.to_text()).unwrap();
    verify_certificate(&mesh, &back).unwrap();

    let mut moved = cert.clone();
    if let CertificateBody::VInCube(w) = &mut moved.body {
        w.cube = [1, 0, 0];
    }
    assert!(verify_certificate(&mesh, &moved).is_err());
    let mut cut = cert.clone();
    if let CertificateBody::VInCube(w) = &mut cut.body {
        w.cycle.pop();
    }
    assert!(verify_certificate(&mesh, &cut).is_err());
}

#[test]
fn longitude_cuts_leave_v_in_a_cube() {
    // One horizontal plane at z = 0.3 cuts two longitudes; the cube above it
    // holds the whole top of the torus.
    let mesh = gen_standard_torus(2.0, 1.0, 24).unwrap();
    let cert = dichotomy(&mesh, lattice(8.0, [-4.013, -4.027, 0.3]));
    assert_eq!(cert.kind(), "v-in-cube");
    verify_certificate(&mesh, &cert).unwrap();
    let CertificateBody::VInCube(w) = &cert.body else { unreachable!() };
    assert_eq!(w.cube[2], 0);
    assert!(w.diameter <= 3f64.sqrt() * 8.0);
}

#[test]
fn main_theorem_witness_and_scaling() {
    let mesh = gen_twisted_cylinder(4, 32).unwrap();
    let cfg = PipelineConfig { seed: 3, samples: 200, ..Default::default() };
    let r = run_main_theorem(&mesh, &cfg).unwrap();
    let CertificateBody::VInCube(w) = &r.certificate.body else { panic!("expected v-in-cube") };
    assert!(r.m_eff >= r.m);
    assert!(w.diameter <= r.witness_bound());
    assert!(w.diameter <= 3f64.sqrt() * 1000.0 * (r.sys_u.powf(-1.0 / 3.0) + 1.0 / r.sys_u));
    for v in [
        r.report.sys_u_est,
        r.report.sys_v_est,
        r.report.area,
        r.report.extrinsic_upper,
        r.report.thm13_bound,
        r.report.thm_a2_bound,
        r.report.loewner_bound,
    ] {
        assert!(v > 0.0);
    }

    let big = mesh.transformed(&rat(7), &[rat(0), rat(0), rat(0)]);
    let r7 = run_main_theorem(&big, &cfg).unwrap();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    assert!(rel(r7.report.extrinsic_upper, 7.0 * r.report.extrinsic_upper) < 1e-9);
    assert!(rel(
        r7.report.thm13_bound / r7.report.extrinsic_upper,
        r.report.thm13_bound / r.report.extrinsic_upper
    ) < 1e-9);
    assert!(rel(
        r7.report.thm_a2_bound / r7.report.extrinsic_upper,
        r.report.thm_a2_bound / r.report.extrinsic_upper
    ) < 1e-9);
    assert_eq!(r7.certificate.kind(), r.certificate.kind());
}

#[test]
fn main_theorem_with_a_fixed_lattice() {
    let mesh = gen_twisted_cylinder(2, 32).unwrap();
    let cfg = PipelineConfig {
        spacing: Some(snap(4.0, 20)),
        offset: Some([0.001, 1.3, 2.1].map(|x| snap(x, 30))),
        samples: 0,
        seed: 0,
    };
    let r = run_main_theorem(&mesh, &cfg).unwrap();
    assert_eq!(r.certificate.kind(), "short-u");
    assert!(!r.hypothesis);
    verify_certificate(&mesh, &r.certificate).unwrap();
    assert!(!r.scale.is_zero());
}

#[test]
fn bounds_on_generated_meshes() {
    let r = evaluate_bounds(&gen_twisted_cylinder(3, 24).unwrap(), Some([1, 0, 3, 1])).unwrap();
    let p = r.a3.as_ref().unwrap();
    assert_eq!((p.su_sq, p.sv_sq), (1, 10));
    assert!(r.sys_v_est < r.sys_u_est);
    let text = r.to_text();
    for key in ["sys_u_est", "sys_v_est", "area", "extrinsic_upper", "thm13_bound", "thmA2_bound", "loewner_bound", "winner thm13"] {
        assert!(text.contains(key), "{key}");
    }
    assert!(evaluate_bounds(&gen_twisted_cylinder(3, 24).unwrap(), Some([1, 1, 1, 1])).is_err());
}

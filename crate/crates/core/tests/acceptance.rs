//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use exsys::certify::{
    a3_prediction, knot_tube_sharpness, run_main_theorem, snap_relative, systole_estimates,
    verify_certificate, Certificate, CertificateBody, KnotSharpness, MainResult, PipelineConfig, Winner,
};
use exsys::curves::ch;
use exsys::filling::fill_refined;
use exsys::generators::{
    gen_flat_rectangular, gen_knot_tube, gen_standard_torus, gen_twisted_cylinder, granularity,
};
use exsys::geometry::{rat, snap};
use exsys::homology::{systole_estimate, HomologyLabeling};
use exsys::intersect::translation_search;
use exsys::lemmas::{intersect_somewhere, run_lemma, LemmaConfig};
use exsys::mesh::TorusMesh;
use exsys::refined::REdge;
use exsys::sweep::{family_mesh, run_sweep, to_csv, SweepConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20240601;
const SAMPLES: usize = 1000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    if el > limit {
        o.pass = false;
    }
    o.detail = format!("{} [{:.1}s of {}s]", o.detail, el.as_secs_f64(), limit.as_secs());
    o
}

fn unit_area(mesh: &TorusMesh) -> TorusMesh {
    let s = snap_relative(1.0 / mesh.area().unwrap().sqrt(), 40);
    mesh.transformed(&s, &[rat(0), rat(0), rat(0)])
}

/// Shared runs: the twisted-cylinder sweep, the knot sweep, and extra runs
/// on fixed lattices.
struct Runs {
    twist: Vec<(u32, MainResult)>,
    knot: Vec<(u32, MainResult)>,
    fixed: Vec<(String, TorusMesh, MainResult)>,
    sharp: Vec<KnotSharpness>,
}

fn sweep(family: &str, range: (u32, u32)) -> Vec<(u32, MainResult)> {
    let cfg = SweepConfig { family: family.into(), range, samples: SAMPLES, seed: SEED, timing: false };
    run_sweep(&cfg)
        .unwrap()
        .into_iter()
        .map(|r| (r.n, r.result.unwrap_or_else(|e| panic!("{family} n={}: {e}", r.n))))
        .collect()
}

fn fixed_runs() -> Vec<(String, TorusMesh, MainResult)> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for n in [1u32, 2, 4, 8] {
        let mesh = gen_twisted_cylinder(n, (8 * n as usize).max(16)).unwrap();
        for spacing in [0.25, 1.0, 4.0] {
            // Through the hole for short-u, elsewhere at random.
            let x = if spacing == 4.0 { 0.001 } else { rng.gen::<f64>() * spacing };
            let cfg = PipelineConfig {
                spacing: Some(snap(spacing, 20)),
                offset: Some([x, rng.gen::<f64>() * spacing, rng.gen::<f64>() * spacing].map(|c| snap(c, 30))),
                samples: 0,
                seed: SEED,
            };
            match run_main_theorem(&mesh, &cfg) {
                Ok(r) => out.push((format!("twist{n}@{spacing}"), mesh.clone(), r)),
                Err(exsys::Error::GeneralPosition(_)) => {}
                Err(e) => panic!("twist{n}@{spacing}: {e}"),
            }
        }
    }
    out
}

fn c1() -> Outcome {
    timed(Duration::from_secs(60), || {
        let cfg = LemmaConfig { seed: SEED, max_len: 12, cases: 1000, oracle: false };
        let mut lines = Vec::new();
        let mut pass = true;
        for name in ["boundary-squared", "ch-additivity", "decompose-l1"] {
            let r = run_lemma(name, &cfg).unwrap();
            pass &= r.passed() && r.cases >= 1000;
            lines.push(format!("{}={}/{}", name, r.cases - r.failures.len(), r.cases));
        }
        outcome(pass, lines.join(" "))
    })
}

fn c2() -> Outcome {
    let cfg = LemmaConfig { seed: SEED, max_len: 12, cases: 1000, oracle: false };
    let r = run_lemma("boundary-norm", &cfg).unwrap();
    outcome(r.passed() && r.cases >= 1000, r.line())
}

fn c3() -> Outcome {
    timed(Duration::from_secs(600), || {
        let cfg = LemmaConfig { seed: SEED, max_len: 12, cases: 1000, oracle: true };
        let r = run_lemma("fill-x1", &cfg).unwrap();
        outcome(r.passed() && r.cases >= 1000 + 1000, r.line())
    })
}

/// Boundary of a refined 2-chain read straight off the face cycles.
fn face_cycle_boundary(
    rc: &exsys::refined::RefinedComplex,
    c: &exsys::refined::RefinedChain2,
) -> BTreeMap<REdge, i64> {
    let mut out = BTreeMap::new();
    for (f, k) in c.iter() {
        let cycles = match rc.face_data(f) {
            Some(d) => d.cycles.iter().flatten().map(|(e, s)| (*e, *s as i64)).collect(),
            None => rc.face_boundary(f).unwrap(),
        };
        for (e, s) in cycles {
            *out.entry(e).or_insert(0) += s * k;
        }
    }
    out.retain(|_, v| *v != 0);
    out
}

fn c4() -> Outcome {
    let mut curves = 0;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut instances: Vec<(String, TorusMesh, f64)> = Vec::new();
    for n in 1..=16u32 {
        let mesh = unit_area(&family_mesh("twisted-cylinder", n).unwrap());
        instances.push((format!("twist{n}"), mesh.clone(), 0.2));
        instances.push((format!("twist{n}"), mesh, 0.05));
    }
    for n in 3..=6u32 {
        let mesh = unit_area(&family_mesh("knot-tube", n).unwrap());
        instances.push((format!("knot{n}"), mesh.clone(), 0.1));
        instances.push((format!("knot{n}"), mesh, 0.03));
    }
    for (i, (name, mesh, spacing)) in instances.iter().enumerate() {
        let data = intersect_somewhere(mesh, *spacing, SEED + i as u64).unwrap();
        for ci in 0..data.curves.len() {
            let omega = data.curve_path(ci);
            let target: BTreeMap<REdge, i64> = ch(&omega).iter().map(|(e, k)| (*e, k)).collect();
            let bound = 5 * (omega.distinct_stops().iter().filter(|v| !matches!(v, exsys::refined::RVertex::Loop(_))).count() as u64 + 1);
            curves += 1;
            match fill_refined(&data.refined, &omega) {
                Ok(f) => {
                    if face_cycle_boundary(&data.refined, &f.chain) != target || f.multiplicity > bound {
                        failures.push(format!("{name}@{spacing} curve {ci}"));
                    }
                    worst = worst.max(f.multiplicity as f64 / bound as f64);
                }
                Err(e) => failures.push(format!("{name}@{spacing} curve {ci}: {e}")),
            }
        }
    }
    outcome(
        failures.is_empty() && curves > 0,
        format!("{curves} curves, worst multiplicity/bound {worst:.3}, failures {:?}", failures.first()),
    )
}

fn c5() -> Outcome {
    timed(Duration::from_secs(900), || {
        let meshes = vec![
            gen_twisted_cylinder(1, 16).unwrap(),
            gen_twisted_cylinder(6, 48).unwrap(),
            gen_standard_torus(2.0, 1.0, 32).unwrap(),
            gen_flat_rectangular([0.5, 0.5, 0.0], 0.4, 0.15, 0.2).unwrap(),
            gen_knot_tube(3, 0.4, 96).unwrap(),
        ];
        let samples = 10_000;
        let mut pass = true;
        let mut parts = Vec::new();
        for (i, mesh) in meshes.iter().enumerate() {
            let unit = unit_area(mesh);
            let m = 6.0;
            let r = translation_search(&unit, m, samples, SEED + i as u64).unwrap();
            let st = &r.stats;
            let frac = st.qualifying as f64 / samples as f64;
            let bin_se = (frac * (1.0 - frac) / samples as f64).sqrt();
            let ok_len = st.length_integral.0 <= 3.0 / (m * m) + 3.0 * st.length_integral.1;
            let ok_hits = st.hits_integral.0 <= 3.0 / m + 3.0 * st.hits_integral.1;
            let ok_frac = frac >= 1.0 / 3.0 - 3.0 * bin_se;
            pass &= ok_len && ok_hits && ok_frac;
            parts.push(format!(
                "{}: len {:.4}/{:.4} hits {:.4}/{:.4} frac {:.3}",
                mesh.name,
                st.length_integral.0,
                3.0 / (m * m),
                st.hits_integral.0,
                3.0 / m,
                frac
            ));
        }
        outcome(pass, parts.join("; "))
    })
}

fn all_results(runs: &Runs) -> Vec<(String, Option<&TorusMesh>, &MainResult)> {
    let mut v: Vec<(String, Option<&TorusMesh>, &MainResult)> = Vec::new();
    v.extend(runs.twist.iter().map(|(n, r)| (format!("twist{n}"), None, r)));
    v.extend(runs.knot.iter().map(|(n, r)| (format!("knot{n}"), None, r)));
    v.extend(runs.fixed.iter().map(|(s, m, r)| (s.clone(), Some(m), r)));
    v
}

fn c6(runs: &Runs) -> Outcome {
    let all = all_results(runs);
    let mut bad = Vec::new();
    let (mut v, mut s) = (0, 0);
    for (name, mesh, r) in &all {
        if r.hypothesis && r.certificate.kind() != "v-in-cube" {
            bad.push(name.clone());
        }
        match r.certificate.kind() {
            "v-in-cube" => v += 1,
            _ => s += 1,
        }
        // Re-verify from the serialized text.
        let back = Certificate::from_text(&r.certificate.to_text()).unwrap();
        let owned;
        let mesh = match mesh {
            Some(m) => *m,
            None => {
                let (fam, n) = if let Some(n) = name.strip_prefix("twist") {
                    ("twisted-cylinder", n)
                } else {
                    ("knot-tube", name.strip_prefix("knot").unwrap())
                };
                owned = family_mesh(fam, n.parse().unwrap()).unwrap();
                &owned
            }
        };
        if verify_certificate(mesh, &back).is_err() {
            bad.push(format!("{name} (re-verify)"));
        }
    }
    outcome(
        bad.is_empty() && all.len() >= 40 && s > 0,
        format!("{} runs: {v} v-in-cube, {s} short-u, violations {bad:?}", all.len()),
    )
}

fn c7(runs: &Runs) -> Outcome {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for (_, r) in runs.twist.iter().chain(&runs.knot) {
        if let CertificateBody::VInCube(w) = &r.certificate.body {
            let su = r.sys_u;
            let bound = 3f64.sqrt() * 1000.0 * (su.powf(-1.0 / 3.0) + 1.0 / su);
            pass &= w.diameter <= bound && w.diameter <= 3f64.sqrt() / r.m_eff && r.m_eff >= r.m;
            worst = worst.max(w.diameter / bound);
            checked += 1;
        }
    }
    outcome(pass && checked > 0, format!("{checked} witnesses, max diameter/bound {worst:.3e}"))
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn c8(runs: &Runs) -> Outcome {
    let ext: Vec<f64> = runs.twist.iter().map(|(_, r)| r.report.extrinsic_upper).collect();
    let ln: Vec<f64> = runs.twist.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let le: Vec<f64> = ext.iter().map(|e| e.ln()).collect();
    let s = slope(&ln, &le);
    let monotone = ext.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    outcome(
        s <= -0.25 && monotone && runs.twist.len() == 32,
        format!("slope {s:.4}, non-increasing within 10% {monotone}, ext(1) {:.4e} ext(32) {:.4e}", ext[0], ext[31]),
    )
}

fn band(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min)
}

fn c9(runs: &Runs) -> Outcome {
    let lk_ok = runs.sharp.iter().all(|k| k.linking == k.n as i64 * (k.n as i64 - 1));
    let per_n = |f: &dyn Fn(&KnotSharpness) -> f64| -> Vec<f64> { runs.sharp.iter().map(|k| f(k) / k.n as f64).collect() };
    let area = band(&per_n(&|k| k.area));
    let sw = band(&per_n(&|k| k.sys_w_est));
    let ratio = band(&runs.sharp.iter().map(|k| k.ratio).collect::<Vec<_>>());
    let lks: Vec<i64> = runs.sharp.iter().map(|k| k.linking).collect();
    outcome(
        lk_ok && area <= 2.0 && sw <= 2.0 && ratio <= 4.0 && runs.sharp.len() == 6,
        format!("lk {lks:?}, area/n band {area:.3}, sys_w/n band {sw:.3}, ratio band {ratio:.3}"),
    )
}

fn c10(runs: &Runs) -> Outcome {
    let ratio = |r: &MainResult| r.report.extrinsic_upper / r.report.thm_a2_bound;
    // K is fitted on the first eight twisted cylinders and must hold everywhere.
    let k = runs.twist.iter().take(8).map(|(_, r)| ratio(r)).fold(0.0, f64::max);
    let worst = runs.twist.iter().chain(&runs.knot).map(|(_, r)| ratio(r)).fold(0.0, f64::max);
    let a2_ok = worst <= k;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut a3_ok = true;
    let mut winners = BTreeMap::new();
    for _ in 0..20 {
        let mut m = [1i64, 0, 0, 1];
        for _ in 0..rng.gen_range(1..5) {
            let t = rng.gen_range(-3..=3);
            m = if rng.gen_bool(0.5) {
                [m[0] + t * m[2], m[1] + t * m[3], m[2], m[3]]
            } else {
                [m[0], m[1], m[2] + t * m[0], m[3] + t * m[1]]
            };
        }
        let [a, b, c, d] = m.map(|x| x as i128);
        let (s, v) = (b * b + d * d, a * a + c * c);
        let p = a3_prediction(m).unwrap();
        let (lo, hi) = (s.min(v), s.max(v));
        let expect = match (lo.pow(3)).cmp(&hi) {
            std::cmp::Ordering::Less => Winner::Thm13,
            std::cmp::Ordering::Equal => Winner::Tie,
            std::cmp::Ordering::Greater => Winner::ThmA2,
        };
        a3_ok &= p.su_sq as i128 == s && p.sv_sq as i128 == v && p.winner == expect;
        a3_ok &= p.sys_u == (s as f64).sqrt() && p.sys_v == (v as f64).sqrt();
        *winners.entry(p.winner.name()).or_insert(0) += 1;
    }
    a3_ok &= a3_prediction([1, 1, 1, 1]).is_err();
    outcome(
        a2_ok && a3_ok,
        format!("fitted K {k:.4e}, worst ratio {worst:.4e}; A3 20 matrices ok {a3_ok}, winners {winners:?}"),
    )
}

fn c11() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for res in [8usize, 16, 32, 64] {
        let mesh = gen_twisted_cylinder(0, res).unwrap();
        let lab = HomologyLabeling::new(&mesh).unwrap();
        let area = mesh.area().unwrap();
        let (su, sv) = systole_estimates(&mesh, &lab).unwrap();
        let mut sys = su.length.min(sv.length);
        for cls in [[1, 1], [1, -1]] {
            sys = sys.min(systole_estimate(&mesh, &lab, cls, &[sv.cycle.clone()], 10_000_000).unwrap().length);
        }
        let h = granularity(&mesh, area.sqrt());
        let bound = 2f64.sqrt() * 3f64.powf(-0.25) * area.sqrt() * (1.0 + h);
        pass &= sys <= bound;
        parts.push(format!("res {res}: {sys:.4} <= {bound:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn c12() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (family, n) in [("twisted-cylinder", 6u32), ("knot-tube", 3)] {
        let a = family_mesh(family, n).unwrap();
        let b = family_mesh(family, n).unwrap();
        pass &= a.to_text() == b.to_text();
        let cfg = PipelineConfig { samples: 300, seed: 99, ..Default::default() };
        let c1 = run_main_theorem(&a, &cfg).unwrap().certificate.to_text();
        let c2 = run_main_theorem(&b, &cfg).unwrap().certificate.to_text();
        pass &= c1 == c2;
        parts.push(format!("{family} certificate {} bytes", c1.len()));
    }
    let cfg = SweepConfig { family: "twisted-cylinder".into(), range: (1, 6), samples: 300, seed: 5, timing: false };
    let x = to_csv(&run_sweep(&cfg).unwrap(), false);
    let y = to_csv(&run_sweep(&cfg).unwrap(), false);
    pass &= x == y;
    parts.push(format!("sweep csv {} bytes", x.len()));
    outcome(pass, parts.join(", "))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |i: u32, name: &'static str, o: Outcome| {
        println!("criterion {i:2} {:<28} {} {}", name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((i, name, o));
    };
    report(1, "chain identities", c1());
    report(2, "boundary sup-norm bound", c2());
    report(3, "lattice loop filling", c3());
    report(4, "refined curve filling", c4());
    report(5, "translation averages", c5());

    let t = Instant::now();
    let runs = Runs {
        twist: sweep("twisted-cylinder", (1, 32)),
        knot: sweep("knot-tube", (3, 8)),
        fixed: fixed_runs(),
        sharp: (3..=8).map(|n| knot_tube_sharpness(n, None, None).unwrap()).collect(),
    };
    let sweep_time = t.elapsed();
    report(6, "dichotomy implication", c6(&runs));
    report(7, "witness diameter bound", c7(&runs));
    let mut o8 = c8(&runs);
    if sweep_time > Duration::from_secs(3600) {
        o8.pass = false;
    }
    o8.detail = format!("{} [sweeps {:.1}s of 3600s]", o8.detail, sweep_time.as_secs_f64());
    report(8, "twist scaling", o8);
    report(9, "knot tube sharpness", c9(&runs));
    report(10, "area over systole and A3", c10(&runs));
    report(11, "Loewner sanity", c11());
    report(12, "determinism", c12());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria pass in {:.1}s",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing criteria: {failed:?}");
        ExitCode::FAILURE
    }
}

//! Parameter sweeps over generated families, one CSV row per instance.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::certify::{run_main_theorem, MainResult, PipelineConfig};
use crate::error::{Error, Result};
use crate::generators::{gen_knot_tube, gen_twisted_cylinder, TorusKnot};
use crate::intersect::fmt15;
use crate::mesh::TorusMesh;

pub const CSV_HEADER: &str =
    "n,area,sys_u_est,sys_v_est,extrinsic_upper,thm13_bound,thmA2_bound,kind,runtime,x1_hits,x2_length,hypothesis,error";

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub family: String,
    pub range: (u32, u32),
    pub samples: usize,
    pub seed: u64,
    /// Write wall time into the `runtime` column; `NA` otherwise.
    pub timing: bool,
}

/// Parse `a..b` or `a..=b` (both inclusive) or a single `n`.
pub fn parse_range(s: &str) -> Result<(u32, u32)> {
    let num = |x: &str| x.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad range {s:?}")));
    if let Some((a, b)) = s.split_once("..") {
        Ok((num(a)?, num(b.trim_start_matches('='))?))
    } else {
        let n = num(s)?;
        Ok((n, n))
    }
}

/// Mesh of the sweep family at parameter `n` with the fixed resolution
/// policy: `max(8n, 8)` rings for twisted cylinders, `32n` for knot tubes.
pub fn family_mesh(family: &str, n: u32) -> Result<TorusMesh> {
    match family {
        "twisted-cylinder" => gen_twisted_cylinder(n, (8 * n as usize).max(8)),
        "knot-tube" => {
            let radius = 0.4f64.min(TorusKnot { n }.radius_threshold() / 2.0);
            gen_knot_tube(n, radius, 32 * n as usize)
        }
        other => Err(Error::Parse(format!(
            "sweep family must be twisted-cylinder or knot-tube, got {other:?}"
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub n: u32,
    pub result: std::result::Result<MainResult, String>,
    pub seconds: f64,
}

impl SweepRow {
    pub fn csv(&self, timing: bool) -> String {
        let runtime = if timing { format!("{:.3}", self.seconds) } else { "NA".into() };
        match &self.result {
            Ok(r) => {
                let b = &r.report;
                let mut s = format!("{}", self.n);
                for v in [b.area, b.sys_u_est, b.sys_v_est, b.extrinsic_upper, b.thm13_bound, b.thm_a2_bound] {
                    write!(s, ",{}", fmt15(v)).unwrap();
                }
                write!(
                    s,
                    ",{},{runtime},{},{},{},",
                    r.certificate.kind(),
                    r.hits,
                    fmt15(r.x2_length),
                    r.hypothesis
                )
                .unwrap();
                s
            }
            Err(e) => format!("{},,,,,,,error,{runtime},,,,\"{}\"", self.n, e.replace('"', "'")),
        }
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    family_mesh(&cfg.family, cfg.range.0.max(3))?;
    let ns: Vec<u32> = (cfg.range.0..=cfg.range.1).collect();
    Ok(ns
        .par_iter()
        .map(|&n| {
            let t = Instant::now();
            let pc = PipelineConfig { samples: cfg.samples, seed: cfg.seed, ..Default::default() };
            let result = family_mesh(&cfg.family, n)
                .and_then(|m| run_main_theorem(&m, &pc))
                .map_err(|e| e.to_string());
            SweepRow { n, result, seconds: t.elapsed().as_secs_f64() }
        })
        .collect())
}

pub fn to_csv(rows: &[SweepRow], timing: bool) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv(timing));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..32").unwrap(), (1, 32));
        assert_eq!(parse_range("3..=8").unwrap(), (3, 8));
        assert_eq!(parse_range("5").unwrap(), (5, 5));
        assert!(parse_range("a..b").is_err());
    }

    #[test]
    fn empty_range_gives_header_only() {
        let cfg = SweepConfig { family: "twisted-cylinder".into(), range: (5, 4), samples: 10, seed: 0, timing: false };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(to_csv(&rows, false), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn failures_stay_in_their_row() {
        let cfg = SweepConfig { family: "knot-tube".into(), range: (1, 1), samples: 10, seed: 0, timing: false };
        let csv = to_csv(&run_sweep(&cfg).unwrap(), false);
        let row = csv.lines().nth(1).unwrap();
        assert!(row.starts_with("1,") && row.contains(",error,NA,"), "{row}");
        let unquoted = row.split('"').next().unwrap();
        assert_eq!(unquoted.matches(',').count(), CSV_HEADER.matches(',').count());
    }
}

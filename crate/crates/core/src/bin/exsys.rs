use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exsys::certify::{
    evaluate_bounds, run_main_theorem, spacing_for, systole_estimates, verify_certificate, Certificate,
    PipelineConfig,
};
use exsys::geometry::Rat;
use exsys::homology::HomologyLabeling;
use exsys::intersect::{intersect_lattice, translation_search};
use exsys::lattice::Lattice;
use exsys::lemmas::{run_lemma, LemmaConfig, LEMMAS};
use exsys::mesh::{parse_rational, TorusMesh};
use exsys::sweep::{parse_range, run_sweep, to_csv, SweepConfig};
use exsys::{Error, Result};

/// Lattice certificates for extrinsic systoles of marked tori.
///
/// Exit codes: 0 ok, 2 parse or invalid input, 3 general position or search
/// exhausted, 4 verification failure, 5 I/O. `EXSYS_THREADS` caps the worker
/// pool.
#[derive(Parser, Debug)]
#[command(name = "exsys", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a marked torus mesh.
    Gen {
        /// twisted-cylinder, knot-tube, standard-torus or flat-rectangular.
        #[arg(long)]
        family: String,
        /// Family parameter as key=value, repeatable (n, res, radius, R, r, ...).
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Output mesh file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Intersect a mesh with a lattice 2-skeleton and report the curves.
    Intersect {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full dichotomy on the unit-area rescaled mesh and write a
    /// verified certificate.
    Pipeline {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Certificate output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bound report output file; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-check a certificate against its mesh from scratch.
    VerifyCertificate { certificate: PathBuf, mesh: PathBuf },
    /// Run the property suites and print one pass/fail line per lemma.
    VerifyLemmas {
        /// One of boundary-squared, ch-additivity, decompose-l1,
        /// boundary-norm, fill-x1, fill-refined, or all.
        #[arg(long, default_value = "all")]
        lemma: String,
        /// Longest loop in the exhaustive enumeration.
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        /// Random cases per suite.
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        /// Compare fillings against the brute-force optimum.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the pipeline over a family and write one CSV row per instance.
    Sweep {
        /// twisted-cylinder or knot-tube.
        #[arg(long)]
        family: String,
        /// Inclusive range such as 1..32.
        #[arg(long)]
        range: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write NA instead of wall time in the runtime column.
        #[arg(long)]
        no_timing: bool,
    },
    /// Evaluate systole estimates and the extrinsic bounds of a mesh.
    Bounds {
        #[arg(long)]
        mesh: PathBuf,
        /// Marking matrix a,b,c,d for the flat-torus predictions.
        #[arg(long, value_name = "A,B,C,D", allow_hyphen_values = true)]
        fstar: Option<String>,
    },
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Lattice spacing, exact decimal or p/q. For `pipeline` it applies to
    /// the unit-area mesh.
    #[arg(long, conflicts_with = "auto_m")]
    spacing: Option<String>,
    /// Spacing from the systole estimate (the default when --spacing is absent).
    #[arg(long)]
    auto_m: bool,
    /// Lattice offset x,y,z; searched when absent.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    offset: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Offsets sampled by the translation search.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

impl LatticeArgs {
    fn spacing(&self) -> Result<Option<Rat>> {
        self.spacing.as_deref().map(parse_rational).transpose()
    }

    fn offset(&self) -> Result<Option<[Rat; 3]>> {
        let Some(s) = &self.offset else { return Ok(None) };
        let parts = s.split(',').map(|x| parse_rational(x.trim())).collect::<Result<Vec<_>>>()?;
        <[Rat; 3]>::try_from(parts)
            .map(Some)
            .map_err(|_| Error::Parse(format!("offset needs three numbers, got {s:?}")))
    }

    fn echo(&self) -> String {
        format!(
            "mesh={} spacing={} offset={} seed={} samples={}",
            self.mesh.display(),
            self.spacing.as_deref().unwrap_or("auto"),
            self.offset.as_deref().unwrap_or("search"),
            self.seed,
            self.samples
        )
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_mesh(path: &Path) -> Result<TorusMesh> {
    let mesh = TorusMesh::parse(&read(path)?)?;
    mesh.validate()?;
    Ok(mesh)
}

fn parse_fstar(s: &str) -> Result<[i64; 4]> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad fstar entry {x:?}"))))
        .collect::<Result<Vec<_>>>()?;
    <[i64; 4]>::try_from(v).map_err(|_| Error::Parse(format!("fstar needs four integers, got {s:?}")))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { family, params, out } => {
            let kv = params
                .iter()
                .map(|p| {
                    p.split_once('=')
                        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                        .ok_or_else(|| Error::Parse(format!("parameter {p:?} is not key=value")))
                })
                .collect::<Result<Vec<_>>>()?;
            let mesh = exsys::generators::generate(&family, &kv)?;
            write_or_print(out.as_deref(), &mesh.to_text())
        }
        Command::Intersect { lattice, out } => {
            let mesh = load_mesh(&lattice.mesh)?;
            let spacing = match lattice.spacing()? {
                Some(s) => s,
                None => {
                    let lab = HomologyLabeling::new(&mesh)?;
                    let (su, _) = systole_estimates(&mesh, &lab)?;
                    spacing_for(su.length).1
                }
            };
            let offset = match lattice.offset()? {
                Some(o) => o,
                None => {
                    let m = 1.0 / exsys::geometry::to_f64(&spacing);
                    translation_search(&mesh, m, lattice.samples, lattice.seed)?.offset
                }
            };
            let data = intersect_lattice(&mesh, &Lattice { spacing, offset })?;
            let text = format!("# exsys intersect {}\n{}", lattice.echo(), data.report());
            write_or_print(out.as_deref(), &text)
        }
        Command::Pipeline { lattice, out, report } => {
            let mesh = load_mesh(&lattice.mesh)?;
            let cfg = PipelineConfig {
                spacing: lattice.spacing()?,
                offset: lattice.offset()?,
                samples: lattice.samples,
                seed: lattice.seed,
            };
            let r = run_main_theorem(&mesh, &cfg)?;
            write_or_print(out.as_deref(), &r.certificate.to_text())?;
            let text = format!("# exsys pipeline {}\n{}{}", lattice.echo(), r.summary(), r.report.to_text());
            write_or_print(report.as_deref(), &text)
        }
        Command::VerifyCertificate { certificate, mesh } => {
            let cert = Certificate::from_text(&read(&certificate)?)?;
            let mesh = TorusMesh::parse(&read(&mesh)?)?;
            verify_certificate(&mesh, &cert)?;
            println!("certificate {} verified", cert.kind());
            Ok(())
        }
        Command::VerifyLemmas { lemma, max_len, cases, oracle, seed } => {
            let cfg = LemmaConfig { seed, max_len, cases, oracle };
            let names: Vec<&str> = if lemma == "all" { LEMMAS.to_vec() } else { vec![lemma.as_str()] };
            println!("# exsys verify-lemmas seed={seed} max_len={max_len} cases={cases} oracle={oracle}");
            let mut failed = 0;
            for name in names {
                let r = run_lemma(name, &cfg)?;
                println!("{}", r.line());
                failed += !r.passed() as usize;
            }
            if failed > 0 {
                return Err(Error::Verification(format!("{failed} lemma suite(s) failed")));
            }
            Ok(())
        }
        Command::Sweep { family, range, samples, seed, out, no_timing } => {
            let cfg = SweepConfig { family, range: parse_range(&range)?, samples, seed, timing: !no_timing };
            let rows = run_sweep(&cfg)?;
            write_or_print(out.as_deref(), &to_csv(&rows, cfg.timing))
        }
        Command::Bounds { mesh, fstar } => {
            let mesh = load_mesh(&mesh)?;
            let fstar = fstar.as_deref().map(parse_fstar).transpose()?;
            print!("{}", evaluate_bounds(&mesh, fstar)?.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("EXSYS_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("exsys: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `kn`: basis dumps, structure-constant tables, cocycle tables and
//! verification suites for Krichever-Novikov type algebras.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.

mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kn_core::exact::parse_ratfunc;
use kn_core::knalgebra::{Op, Parity};
use kn_core::kncohomology::{boundedness_report, cocycle_entries, GeometricCocycle};
use kn_core::verify::{self, Suite, VerifyOptions};
use kn_core::{Algebra, Basis, CocycleSpec, HalfInt, ProjectiveConnection, Rat, Scalar, SurfaceConfig, Window};

use crate::output::{Format, Sink};

#[derive(Parser, Debug)]
#[command(name = "kn", version, about = "Exact Krichever-Novikov algebras on the multi-point sphere")]
struct Cli {
    /// Surface configuration: a JSON file path or inline JSON.
    /// Defaults to the two-point surface I = {0}, O = {inf}.
    #[arg(long, global = true, value_name = "PATH|JSON")]
    config: Option<String>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write to a file instead of stdout.
    #[arg(long, short, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct WindowArg {
    /// Closed degree range, e.g. `-4:4` or `-3/2:5/2`.
    #[arg(long, default_value = "-4:4", allow_hyphen_values = true)]
    window: Window,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Basis elements f^lambda_{n,p} as numerator and denominator in the working coordinate.
    Basis {
        #[arg(long, allow_hyphen_values = true)]
        lambda: HalfInt,
        #[command(flatten)]
        window: WindowArg,
    },
    /// Structure constants of a product on basis pairs of the window.
    Structconst {
        /// One of mult, bracket, super, jordan, d1.
        #[arg(long)]
        op: Op,
        #[arg(long, allow_hyphen_values = true)]
        lambda: HalfInt,
        #[arg(long, allow_hyphen_values = true)]
        nu: HalfInt,
        #[command(flatten)]
        window: WindowArg,
        /// Rescale odd generators by sqrt(2): doubles odd-odd super products.
        #[arg(long)]
        sqrt2_odd: bool,
    },
    /// Values of the geometric cocycle on basis pairs of the window.
    Cocycle {
        /// Cycle coefficients c1,...,cK. Defaults to the separating cycle.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        cycle: Option<Vec<i64>>,
        /// Quadratic differential added to the zero projective connection.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        omega: String,
        #[command(flatten)]
        window: WindowArg,
        /// Divide every value by 12.
        #[arg(long)]
        classical_normalization: bool,
        /// Rescale odd generators by sqrt(2): doubles odd-odd values.
        #[arg(long)]
        sqrt2_odd: bool,
    },
    /// Run invariant suites and print a report.
    Verify {
        /// duality, jacobi, poisson, cocycle, boundedness, rank, oddtrivial or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        window: WindowArg,
        /// Seed for the sampled suites.
        #[arg(long, default_value_t = 0x4b4e)]
        seed: u64,
        /// Number of random cases in the sampled suites.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Nonzero quadratic differential for the connection checks.
        #[arg(long, default_value = "z", allow_hyphen_values = true)]
        omega: String,
    },
}

fn load_config(source: Option<&str>) -> Result<SurfaceConfig> {
    let Some(source) = source else {
        return Ok(SurfaceConfig::classical());
    };
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        fs::read_to_string(source).with_context(|| format!("reading config {source}"))?
    };
    Ok(SurfaceConfig::from_json(&text)?)
}

fn parse_omega(cfg: &SurfaceConfig, text: &str) -> Result<ProjectiveConnection> {
    let func = parse_ratfunc(text).with_context(|| format!("parsing --omega `{text}`"))?;
    let omega = ProjectiveConnection::from_func(func);
    if !omega.omega().is_a_holomorphic(cfg) {
        bail!("--omega `{text}` has a pole away from the marked points");
    }
    Ok(omega)
}

enum Outcome {
    Done,
    Failed,
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = load_config(cli.config.as_deref())?;
    let mut sink = Sink::new(cli.format);
    let outcome = match cli.command {
        Command::Basis { lambda, window } => {
            let basis = Basis::new(cfg);
            sink.basis(&basis.dump(lambda, &window.window)?)?;
            Outcome::Done
        }
        Command::Structconst { op, lambda, nu, window, sqrt2_odd } => {
            let alg = Algebra::new(cfg);
            let w = window.window;
            let table = alg.struct_table(op, lambda, nu, &w)?;
            let odd = kn_core::knalgebra::ODD_WEIGHT;
            let scale = if sqrt2_odd && op == Op::Super && lambda == odd && nu == odd {
                Rat::from_int(2)
            } else {
                Rat::from_int(1)
            };
            let grading = if table.rows.values().all(|e| e.is_zero()) {
                None
            } else {
                Some(alg.grading_report(op, lambda, nu, &w, &w.widen(2))?)
            };
            sink.table(&table, &table.rows(&scale), grading.as_ref())?;
            Outcome::Done
        }
        Command::Cocycle { cycle, omega, window, classical_normalization, sqrt2_odd } => {
            let k = cfg.k();
            let cycle = match cycle {
                Some(c) => kn_core::kncohomology::CycleClass::new(c),
                None => kn_core::kncohomology::CycleClass::separating(k),
            };
            cycle.check_len(k)?;
            let omega = parse_omega(&cfg, &omega)?;
            let alg = Algebra::new(cfg);
            let c = GeometricCocycle::new(&alg, CocycleSpec::new(cycle, omega))?;
            let w = window.window;
            let mut entries = cocycle_entries(&c, k, &w)?;
            let twelve = Rat::from_int(12);
            for e in &mut entries {
                if sqrt2_odd && e.x.parity == Parity::Odd && e.y.parity == Parity::Odd {
                    e.value = e.value.mul_ref(&Rat::from_int(2));
                }
                if classical_normalization {
                    e.value = e.value.div_ref(&twelve);
                }
            }
            let bounds = boundedness_report(&c, k, &w)?;
            sink.cocycle(c.spec(), classical_normalization, sqrt2_odd, &entries, &bounds)?;
            Outcome::Done
        }
        Command::Verify { suite, window, seed, samples, omega } => {
            let suites = Suite::parse_selection(&suite)?;
            let w = window.window;
            if w.is_empty() {
                bail!("verify needs a nonempty window");
            }
            let omega = parse_omega(&cfg, &omega)?;
            if omega.is_zero() {
                bail!("verify needs a nonzero --omega");
            }
            let alg = Algebra::new(cfg);
            let mut opts = VerifyOptions::new(w);
            opts.seed = seed;
            opts.samples = samples;
            opts.omega = omega;
            let report = verify::run(&alg, &suites, &opts)?;
            sink.report(&report)?;
            if report.passed {
                Outcome::Done
            } else {
                Outcome::Failed
            }
        }
    };
    let bytes = sink.finish();
    match &cli.output {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

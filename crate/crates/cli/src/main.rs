//! `thirdorder`: invariants, connection coefficients and self-checks for
//! systems of third-order ODEs given in a small text format.

mod render;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thirdorder_core::oracle::richardson_from;
use thirdorder_core::{
    circles_system, compare, compute_all, compute_connection, fd_invariants, parse_system, trivializability,
    verify_residuals, ConnectionReport, ExprRhs, FdConfig, InvariantReport, JetPoint, NumericReport, OdeSystem,
};

use crate::render::{CheckReport, OracleLine, ResidualLine, VerdictReport};

#[derive(Parser, Debug)]
#[command(
    name = "thirdorder",
    version,
    about = "Differential invariants of third-order ODE systems"
)]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for tensor computations (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// System file, or `-` for standard input.
    input: PathBuf,
}

#[derive(Args, Debug)]
struct OracleOpts {
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-4)]
    step: f64,

    /// Relative tolerance for W2, I2, Hx and H^-1. W3 and I4 use the larger
    /// of this and 1e-4.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print W2, I2, W3, I4, Hx and H^-1.
    Invariants(Input),
    /// Decide point-equivalence to y''' = 0. Exit 0 if trivializable, 1 if not.
    Trivializable(Input),
    /// Print the characteristic connection coefficients.
    Connection(Input),
    /// Verify residual identities and compare with the finite-difference
    /// oracle. Exit 1 if any check fails.
    Check {
        #[command(flatten)]
        input: Input,
        /// Jet point `x,y1..ym,p1..pm,q1..qm`; repeatable. Without it, five
        /// seeded random points in [-1, 1] are used.
        #[arg(long, value_name = "POINT", value_delimiter = ';')]
        at: Vec<String>,
        #[command(flatten)]
        oracle: OracleOpts,
    },
    /// Write the circles system of dimension m in the input format.
    Circles {
        #[arg(long)]
        m: usize,
    },
    /// Evaluate the invariants at a jet point.
    Eval {
        #[command(flatten)]
        input: Input,
        /// Jet point `x,y1..ym,p1..pm,q1..qm`.
        #[arg(long, value_name = "POINT")]
        at: String,
    },
}

fn read_system(input: &Input) -> Result<OdeSystem> {
    let text = if input.input.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        s
    } else {
        std::fs::read_to_string(&input.input).with_context(|| format!("reading {}", input.input.display()))?
    };
    Ok(parse_system(&text)?)
}

fn parse_point(text: &str, m: usize) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("`{}` is not a number", s.trim()))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != 1 + 3 * m {
        bail!(
            "--at needs 1 + 3m = {} values for m = {m}, got {}",
            1 + 3 * m,
            values.len()
        );
    }
    Ok(values)
}

fn emit<T: serde::Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{}", text());
    }
    Ok(())
}

fn random_points(m: usize, n: usize) -> Vec<Vec<f64>> {
    let mut rng = StdRng::seed_from_u64(0x7031);
    (0..n)
        .map(|_| (0..1 + 3 * m).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

fn check(sys: &OdeSystem, at: &[String], opts: &OracleOpts) -> Result<CheckReport> {
    let cfg = FdConfig::new(opts.step, opts.tol)?;
    let m = sys.dim();
    let points = if at.is_empty() {
        random_points(m, 5)
    } else {
        at.iter().map(|s| parse_point(s, m)).collect::<Result<_>>()?
    };
    let residuals = verify_residuals(sys)
        .checks
        .into_iter()
        .map(ResidualLine::from)
        .collect();
    let inv = compute_all(sys);
    let rhs = ExprRhs(sys);
    let mut oracle = Vec::new();
    for flat in points {
        let pt = JetPoint::from_flat(m, &flat)?;
        let sym = inv
            .eval_at(&pt)
            .with_context(|| format!("evaluating the invariants at {flat:?}"))?;
        let coarse = fd_invariants(&rhs, &pt, &cfg)?;
        let fine = fd_invariants(&rhs, &pt, &cfg.with_step(cfg.step / 2.0))?;
        oracle.push(OracleLine::new(
            flat,
            compare(&coarse, &sym, &cfg),
            richardson_from(&coarse, &fine, &sym),
        ));
    }
    Ok(CheckReport { residuals, oracle })
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let json = cli.json;
    match cli.command {
        Command::Invariants(input) => {
            let sys = read_system(&input)?;
            let inv = compute_all(&sys);
            let verdict = trivializability(&sys);
            let report = InvariantReport::new(&inv, verdict.trivializable);
            emit(json, &report, || render::invariants(&inv, verdict.trivializable))?;
        }
        Command::Trivializable(input) => {
            let sys = read_system(&input)?;
            let verdict = trivializability(&sys);
            let report = VerdictReport::from(&verdict);
            emit(json, &report, || render::verdict(&verdict))?;
            return Ok(if verdict.trivializable {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
        Command::Connection(input) => {
            let sys = read_system(&input)?;
            let conn = compute_connection(&sys);
            emit(json, &ConnectionReport::from(&conn), || render::connection(&conn))?;
        }
        Command::Check { input, at, oracle } => {
            let sys = read_system(&input)?;
            let report = check(&sys, &at, &oracle)?;
            let passed = report.passed();
            emit(json, &report, || report.to_text())?;
            return Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Circles { m } => {
            print!("{}", circles_system(m)?.render());
        }
        Command::Eval { input, at } => {
            let sys = read_system(&input)?;
            let flat = parse_point(&at, sys.dim())?;
            let pt = JetPoint::from_flat(sys.dim(), &flat)?;
            let values = render::unsigned_zero(&compute_all(&sys).eval_at(&pt)?);
            let report = NumericReport::new(flat, &values);
            emit(json, &report, || render::numeric(&values))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

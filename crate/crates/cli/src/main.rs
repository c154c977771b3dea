use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use translates::bojanov::{solve_bojanov, BojanovResult, Weight};
use translates::config::ProblemConfig;
use translates::oracle::{grid_extrema, local_lipschitz_estimate, GridExtrema};
use translates::search::linspace;
use translates::solver::{solve_equioscillation, SolveReport};
use translates::truncation::{certify, verify_q, TruncationCertificate, VerifyReport};
use translates::{Error, NodeConfig};

#[derive(Parser)]
#[command(name = "translates", version, about = "Equioscillation points of sums of translates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem configuration (JSON, schema 1).
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to the config's `output` or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the equioscillation point and write the report as JSON.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        multistart: Option<usize>,
    },
    /// Weighted polynomial of least sup norm for the config's weight.
    Bojanov {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        multistart: Option<usize>,
    },
    /// Build a truncation certificate.
    Truncate {
        #[command(flatten)]
        common: Common,
        /// Re-check the certificate on random configurations.
        #[arg(long)]
        verify: bool,
    },
    /// Write `t,F` rows for fixed nodes as CSV.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Comma-separated sorted nodes; overrides the config's `sample.nodes`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        nodes: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Brute-force grid minimax and maximin.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid_budget: Option<u128>,
    },
}

/// Outcome classes and their exit codes.
enum Failure {
    /// Report written but the iteration did not converge.
    NotConverged,
    Error(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = match &e {
            Error::Config { pointer, message } => format!("config error at {pointer}: {message}"),
            other if other.is_structural() => format!("{other} (structural)"),
            other => other.to_string(),
        };
        Failure::Error(msg)
    }
}

fn fail(msg: impl Into<String>) -> Failure {
    Failure::Error(msg.into())
}

fn load(common: &Common) -> Result<ProblemConfig, Failure> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| fail(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = ProblemConfig::from_json_str(&text)?;
    if let Some(seed) = common.seed {
        cfg.solver.seed = seed;
        cfg.grid.seed = seed;
    }
    Ok(cfg)
}

/// Writes through a sibling temporary file so readers never see partial output.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    fs::write(&tmp, bytes).map_err(|e| fail(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| fail(format!("cannot move output to {}: {e}", path.display())))
}

fn emit(common: &Common, cfg: &ProblemConfig, text: String) -> Result<(), Failure> {
    match common.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from)) {
        Some(path) => write_atomic(&path, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| fail(format!("cannot write to stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| fail(format!("cannot serialize output: {e}")))
}

fn summary(report: &SolveReport) {
    eprintln!(
        "{}: nodes {:?}, level {}, spread {:.3e}, {} iterations",
        if report.converged { "converged" } else { "NOT converged" },
        report.nodes.as_slice(),
        report.level,
        report.spread,
        report.iterations
    );
}

fn cmd_solve(common: Common, multistart: Option<usize>) -> Result<(), Failure> {
    let mut cfg = load(&common)?;
    if let Some(k) = multistart {
        cfg.solver.multistart = k;
    }
    let report = solve_equioscillation(&cfg.problem()?, &cfg.solver)?;
    emit(&common, &cfg, to_json(&report)?)?;
    summary(&report);
    if report.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn cmd_bojanov(common: Common, multistart: Option<usize>) -> Result<(), Failure> {
    let mut cfg = load(&common)?;
    if let Some(k) = multistart {
        cfg.solver.multistart = k;
    }
    let weight: Weight = cfg
        .weight
        .clone()
        .ok_or_else(|| Failure::from(Error::Config {
            pointer: "/weight".into(),
            message: "bojanov needs a weight".into(),
        }))?;
    if cfg.kernel()?.name() != "log" {
        return Err(Error::Config {
            pointer: "/kernel/name".into(),
            message: "bojanov uses the log kernel".into(),
        }
        .into());
    }
    let result: BojanovResult = solve_bojanov(&weight, cfg.multiplicities.clone(), cfg.domain, &cfg.solver)?;
    emit(&common, &cfg, to_json(&result)?)?;
    eprintln!(
        "roots {:?}, ‖wT‖ = {}, alternation points {:?}",
        result.roots, result.sup_norm, result.alternation_points
    );
    if result.converged {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

#[derive(Serialize)]
struct TruncateOutput {
    certificate: TruncationCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<VerifyReport>,
}

fn cmd_truncate(common: Common, verify: bool) -> Result<(), Failure> {
    let cfg = load(&common)?;
    let problem = cfg.problem()?;
    let certificate = certify(&problem, &cfg.solver.scan)?;
    let verification = if verify {
        Some(verify_q(&certificate, &problem, cfg.verify_trials, cfg.solver.seed)?)
    } else {
        None
    };
    eprintln!("q = {}, anchors {:?}", certificate.q, certificate.anchors);
    if let Some(v) = &verification {
        eprintln!("verification: {} violations in {} trials", v.violations, v.trials);
    }
    emit(&common, &cfg, to_json(&TruncateOutput { certificate, verification })?)
}

fn format_value(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

fn cmd_sample(
    common: Common,
    nodes: Option<Vec<f64>>,
    from: Option<f64>,
    to: Option<f64>,
    count: Option<usize>,
) -> Result<(), Failure> {
    let cfg = load(&common)?;
    let problem = cfg.problem()?;
    let base = cfg.sample.clone();
    let nodes = nodes
        .or_else(|| base.as_ref().map(|s| s.nodes.clone()))
        .ok_or_else(|| fail("no nodes given (use --nodes or the config's sample.nodes)"))?;
    let nodes = NodeConfig::new(nodes)?;
    problem.check_nodes(&nodes)?;
    let (lo, hi) = match (from, to, &base) {
        (Some(a), Some(b), _) => (a, b),
        (a, b, Some(s)) => (a.unwrap_or(s.t_range.0), b.unwrap_or(s.t_range.1)),
        _ => return Err(fail("no t range given (use --from/--to or sample.t_range)")),
    };
    let count = count
        .or_else(|| base.as_ref().map(|s| s.count))
        .ok_or_else(|| fail("no sample count given"))?;
    if count < 2 {
        return Err(fail(format!("sample count must be at least 2, got {count}")));
    }
    if lo >= hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvertedBounds { lo, hi }.into());
    }
    let mut csv = String::from("t,F\n");
    for t in linspace(lo, hi, count) {
        csv.push_str(&format!("{},{}\n", format_value(t), format_value(problem.value(nodes.as_slice(), t))));
    }
    emit(&common, &cfg, csv)
}

#[derive(Serialize)]
struct OracleOutput {
    #[serde(flatten)]
    extrema: GridExtrema,
    duality_gap: f64,
    lipschitz: f64,
    allowance: f64,
}

fn cmd_oracle(common: Common, grid_budget: Option<u128>) -> Result<(), Failure> {
    let mut cfg = load(&common)?;
    if let Some(b) = grid_budget {
        cfg.grid.budget = b;
    }
    let problem = cfg.problem()?;
    let extrema = grid_extrema(&problem, &cfg.grid)?;
    let centers = [extrema.minimax.config.clone(), extrema.maximin.config.clone()];
    let lipschitz = local_lipschitz_estimate(&problem, &cfg.grid, &centers, 5.0 * extrema.step)?;
    let out = OracleOutput {
        duality_gap: extrema.duality_gap(),
        allowance: lipschitz * extrema.step,
        lipschitz,
        extrema,
    };
    eprintln!(
        "minimax {} at {:?}, maximin {} at {:?}, gap {:.3e}",
        out.extrema.minimax.value,
        out.extrema.minimax.config.as_slice(),
        out.extrema.maximin.value,
        out.extrema.maximin.config.as_slice(),
        out.duality_gap
    );
    emit(&common, &cfg, to_json(&out)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { common, multistart } => cmd_solve(common, multistart),
        Command::Bojanov { common, multistart } => cmd_bojanov(common, multistart),
        Command::Truncate { common, verify } => cmd_truncate(common, verify),
        Command::Sample {
            common,
            nodes,
            from,
            to,
            count,
        } => cmd_sample(common, nodes, from, to, count),
        Command::Oracle { common, grid_budget } => cmd_oracle(common, grid_budget),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotConverged) => ExitCode::from(2),
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dpl::checks::{CHECKS, MATRIX_LIMIT};
use dpl::formats::{emit, Format};
use dpl::runner::{run, summary_lines, write_outputs};
use dpl::{Error, ExperimentConfig, Result};

#[derive(Parser)]
#[command(
    name = "dpl",
    version,
    about = "Dyadic paraproduct laboratory: Haar systems, weights and operator checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pair-set structure, orthonormality, Parseval, averages, projections and Bessel.
    BasisVerify(Common),
    /// A_2^d, A_2^R and A_p^d characteristics of the weight.
    Characteristic(Common),
    /// BMO norms, John-Nirenberg profile and self-improvement of the symbol.
    Bmo(Common),
    /// Weighted operator norm of the configured operator.
    Norm(Common),
    /// Every check that fits the grid.
    VerifySuite(Common),
    /// Operator norms across the power-weight family.
    Scaling(Common),
    /// Product decomposition of f g and the tensor/Wilson paraproduct comparison.
    Decompose(Common),
    /// Lists the available checks.
    Checks,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    /// power:A, cascade:DELTA:SEED[:DECAY], constant:C, random:SEED[:SPREAD] or file:PATH.
    #[arg(long)]
    weight: Option<String>,
    /// log, martingale:SEED, random:SEED or file:PATH.
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated check names; replaces the subcommand's default list.
    #[arg(long)]
    checks: Option<String>,
    /// CHECK=VALUE; repeatable.
    #[arg(long = "cap", value_name = "CHECK=VALUE")]
    caps: Vec<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    operator: Option<String>,
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    p: Option<String>,
    /// KEY=VALUE for any configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Directory for manifest.json, reports and artifacts.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print every report to stdout in this format (json or csv).
    #[arg(long)]
    format: Option<String>,
    /// Lift the 2^16-cell guard.
    #[arg(long)]
    unsafe_size: bool,
    /// Write the operator matrix as OPM1 (norm check).
    #[arg(long)]
    export_matrix: bool,
}

fn default_checks(command: &Command, cfg: &ExperimentConfig) -> Vec<String> {
    let names: &[&str] = match command {
        Command::BasisVerify(_) => &[
            "partition",
            "orthonormality",
            "parseval",
            "averages",
            "projection",
            "bessel",
        ],
        Command::Characteristic(_) => &["a2d", "a2r", "apd"],
        Command::Bmo(_) => &["bmo-d", "bmo-r", "john-nirenberg", "self-improving"],
        Command::Norm(_) => &["norm"],
        Command::Scaling(_) => &["scaling"],
        Command::Decompose(_) => &["decomposition", "tensor-paraproduct"],
        Command::VerifySuite(_) => {
            let fits = cfg.unsafe_size || cfg.cells() <= MATRIX_LIMIT;
            return CHECKS
                .iter()
                .filter(|c| fits || !c.dense)
                .map(|c| c.name.to_string())
                .collect();
        }
        Command::Checks => &[],
    };
    names.iter().map(|s| s.to_string()).collect()
}

fn build_config(command: &Command, args: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            ExperimentConfig::from_text(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let flags = [
        ("dim", &args.dim),
        ("depth", &args.depth),
        ("weight", &args.weight),
        ("symbol", &args.symbol),
        ("f", &args.f),
        ("g", &args.g),
        ("seed", &args.seed),
        ("checks", &args.checks),
        ("method", &args.method),
        ("operator", &args.operator),
        ("alphas", &args.alphas),
        ("samples", &args.samples),
        ("trials", &args.trials),
        ("p", &args.p),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    for pair in &args.sets {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::config(format!("--set expects KEY=VALUE, found `{pair}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    for pair in &args.caps {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::config(format!("--cap expects CHECK=VALUE, found `{pair}`")))?;
        cfg.set(&format!("cap.{}", k.trim()), v.trim())?;
    }
    if let Some(out) = &args.output {
        cfg.output = Some(out.clone());
    }
    cfg.unsafe_size |= args.unsafe_size;
    cfg.export_matrix |= args.export_matrix;
    if cfg.checks.is_empty() && args.checks.is_none() {
        cfg.checks = default_checks(command, &cfg);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(command: &Command, args: &Common) -> Result<bool> {
    let format = args
        .format
        .as_deref()
        .map(str::parse::<Format>)
        .transpose()?;
    let cfg = build_config(command, args)?;
    let outcome = run(&cfg)?;
    if let Some(dir) = &cfg.output {
        write_outputs(&outcome, dir)?;
    }
    match format {
        Some(fmt) => {
            for r in &outcome.runs {
                print!("{}", emit(&r.output.report, fmt));
            }
        }
        None => {
            for line in summary_lines(&outcome) {
                println!("{line}");
            }
            println!(
                "{} config={}",
                if outcome.passed() { "PASS" } else { "FAIL" },
                outcome.config_hash
            );
        }
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::Checks => {
            for c in CHECKS {
                let cap = c
                    .default_cap
                    .map(|v| format!(" (cap {v})"))
                    .unwrap_or_default();
                println!("{:<22} {}{cap}", c.name, c.summary);
            }
            return ExitCode::SUCCESS;
        }
        Command::BasisVerify(a)
        | Command::Characteristic(a)
        | Command::Bmo(a)
        | Command::Norm(a)
        | Command::VerifySuite(a)
        | Command::Scaling(a)
        | Command::Decompose(a) => a.clone(),
    };
    match execute(&cli.command, &args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dpl: {e}");
            ExitCode::from(2)
        }
    }
}

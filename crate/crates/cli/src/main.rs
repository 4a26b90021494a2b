use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use splitsim_cli::{cmd_example1, cmd_orders, cmd_quadcheck, cmd_transport, ExperimentConfig};

/// Operator-splitting experiment driver: reproduces the convergence and
/// splitting-error tables as machine-readable CSV.
#[derive(Parser)]
#[command(name = "splitsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path for the table (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Step sizes, comma separated. Sets the scalar-example dt list; a
    /// single value also sets the transport step.
    #[arg(long, global = true, value_delimiter = ',')]
    dt: Option<Vec<f64>>,

    /// Schemes to run, comma separated (lie,swss,strang,iterative).
    #[arg(long, global = true, value_delimiter = ',')]
    scheme: Option<Vec<String>>,

    /// Iteration cap for iterative tables.
    #[arg(long, global = true)]
    iters: Option<usize>,

    /// Iterative modes, comma separated
    /// (one-sided-a,one-sided-b,alternating).
    #[arg(long, global = true, value_delimiter = ',')]
    mode: Option<Vec<String>>,

    /// Seed for random test operators and polynomials.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Emit whitespace-separated gnuplot data blocks instead of CSV.
    #[arg(long, global = true)]
    gnuplot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar integro-differential example against its closed form.
    Example1,
    /// 1D transport with a memory term against a fine-scale reference.
    Transport,
    /// Observed convergence orders and leading-term fits.
    Orders,
    /// Newton-Cotes exactness and composite-order verification.
    Quadcheck,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(dts) = &cli.dt {
        cfg.dts = dts.clone();
        if dts.len() == 1 {
            cfg.transport.dt = dts[0];
        }
    }
    if let Some(schemes) = &cli.scheme {
        cfg.schemes = schemes.clone();
    }
    if let Some(iters) = cli.iters {
        cfg.iters = iters;
        cfg.transport.iterations = iters;
    }
    if let Some(modes) = &cli.mode {
        cfg.modes = modes.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let report = match &cli.command {
        Command::Example1 => cmd_example1(&cfg),
        Command::Transport => cmd_transport(&cfg),
        Command::Orders => cmd_orders(&cfg),
        Command::Quadcheck => cmd_quadcheck(&cfg),
    };
    let report = match report {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let rendered = if cli.gnuplot {
        report.to_gnuplot()
    } else {
        report.to_csv()
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{rendered}"),
    }

    for line in &report.summary {
        eprintln!("{line}");
    }
    let mut all_pass = true;
    for check in &report.checks {
        let tag = if check.pass { "PASS" } else { "FAIL" };
        eprintln!("[{tag}] {}: {}", check.name, check.detail);
        all_pass &= check.pass;
    }

    if all_pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("one or more hard checks failed");
        ExitCode::from(1)
    }
}

mod commands;
mod config;
mod error;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::CliError;

/// Gravity-mode spectra of a polytropic layer under vacuum.
#[derive(Parser, Debug)]
#[command(name = "gravmodes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    args: Overrides,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues with diagnostics and the finite-difference cross-check.
    Spectrum,
    /// Profiles of one mode.
    Mode,
    /// Exact and first-order upper boundary on a (t, x) grid.
    Surface,
    /// Runs the invariant suite and reports each check.
    Validate,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Flat `key = value` file, applied before the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long = "A", global = true, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    g: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    zplus: Option<String>,
    /// Comma-separated perturbation coefficients.
    #[arg(long = "lambda-series", global = true, allow_hyphen_values = true)]
    lambda_series: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    l: Option<String>,
    #[arg(long, global = true)]
    nmax: Option<String>,
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Wave type, 1 or 2.
    #[arg(long, global = true)]
    kind: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, global = true)]
    samples: Option<String>,
    #[arg(long, global = true)]
    nx: Option<String>,
    #[arg(long, global = true)]
    nt: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    xmax: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    tmax: Option<String>,
    #[arg(long = "oracle-cells", global = true)]
    oracle_cells: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long = "inject-kappa-misuse", global = true, hide = true)]
    inject_kappa_misuse: bool,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("gamma", &self.gamma),
            ("A", &self.a),
            ("g", &self.g),
            ("zplus", &self.zplus),
            ("lambda_series", &self.lambda_series),
            ("l", &self.l),
            ("nmax", &self.nmax),
            ("n", &self.n),
            ("tol", &self.tol),
            ("kind", &self.kind),
            ("eps", &self.eps),
            ("samples", &self.samples),
            ("nx", &self.nx),
            ("nt", &self.nt),
            ("xmax", &self.xmax),
            ("tmax", &self.tmax),
            ("oracle_cells", &self.oracle_cells),
            ("format", &self.format),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

fn build_config(args: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        for (k, v) in config::read_file(path)? {
            cfg.set(&k, &v)?;
        }
    }
    for (k, v) in args.pairs() {
        cfg.set(k, v)?;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = build_config(&cli.args)?;
    if let Some(workers) = cli.args.workers {
        if workers == 0 {
            return Err(CliError::Config("invalid `workers`: must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    }
    let text = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Mode => commands::mode(&cfg)?,
        Command::Surface => commands::surface_cmd(&cfg)?,
        Command::Validate => {
            let opts = validate::Options {
                inject_kappa_misuse: cli.args.inject_kappa_misuse,
            };
            let (text, passed) = validate::run(&cfg, opts)?;
            output::emit(cfg.out.as_deref(), &text)?;
            if !passed {
                return Err(CliError::Validation("one or more checks failed".into()));
            }
            return Ok(());
        }
    };
    output::emit(cfg.out.as_deref(), &text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let is_info = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if is_info { 0 } else { 2 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gravmodes: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

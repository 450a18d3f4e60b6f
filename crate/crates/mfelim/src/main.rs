//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 on runtime
//! failures (I/O, parsing, solver).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use mfelim::experiment::{emit_outputs, parse_config_pairs, run_experiment, ExperimentConfig};
use mfelim::{Error, KernelKind, Method};

#[derive(Parser)]
#[command(
    name = "mfelim",
    version,
    about = "Kernel-SVM backward feature elimination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run elimination methods over seeded trials and write error curves.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// LIBSVM-format dataset.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Kernel: linear | poly | rbf.
    #[arg(long)]
    kernel: Option<String>,
    /// Comma-separated method list, e.g. bmfe-qp-emb,mfe-slack,rfe.
    #[arg(long)]
    methods: Option<String>,
    /// Number of kept trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial seeds advance from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop when this many features remain.
    #[arg(long)]
    stop_at: Option<usize>,
    /// Min-max scale features to [0,1], fit on each trial's training half.
    #[arg(long)]
    scale: bool,
    /// Keep trials whose initial model is not separable.
    #[arg(long)]
    all_trials: bool,
    /// Record per-candidate criterion values in traces.
    #[arg(long)]
    diagnostics: bool,
    /// Treat the dataset as having at least this many features.
    #[arg(long)]
    features: Option<usize>,
}

fn parse_methods(s: &str) -> Result<Vec<Method>, Error> {
    let methods = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(Method::parse)
        .collect::<Result<Vec<_>, _>>()?;
    if methods.is_empty() {
        return Err(Error::InvalidInput(
            "no elimination methods selected".into(),
        ));
    }
    Ok(methods)
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut data: Option<PathBuf> = None;
    let mut kernel: Option<KernelKind> = None;
    let mut methods: Option<Vec<Method>> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut trials = 1usize;
    let mut seed = 0u64;
    let mut stop_at = 1usize;
    let mut scale = false;
    let mut all_trials = false;
    let mut diagnostics = false;
    let mut features = None;
    let mut c_grid = ExperimentConfig::default_c_grid();
    let mut gamma_factors = ExperimentConfig::default_gamma_factors();

    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        for (key, value) in parse_config_pairs(&text)? {
            let bad =
                |what: &str| Error::InvalidInput(format!("config {key}: bad {what} `{value}`"));
            match key.as_str() {
                "data" => data = Some(PathBuf::from(&value)),
                "kernel" => kernel = Some(value.parse()?),
                "methods" => methods = Some(parse_methods(&value)?),
                "trials" => trials = value.parse().map_err(|_| bad("count"))?,
                "seed" => seed = value.parse().map_err(|_| bad("seed"))?,
                "out" => out_dir = Some(PathBuf::from(&value)),
                "stop_at" => stop_at = value.parse().map_err(|_| bad("count"))?,
                "scale" => scale = value.parse().map_err(|_| bad("flag"))?,
                "all_trials" => all_trials = value.parse().map_err(|_| bad("flag"))?,
                "diagnostics" => diagnostics = value.parse().map_err(|_| bad("flag"))?,
                "features" => features = Some(value.parse().map_err(|_| bad("count"))?),
                "c_grid" => {
                    c_grid = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>().map_err(|_| bad("grid")))
                        .collect::<Result<_, _>>()?;
                }
                "gamma_factors" => {
                    gamma_factors = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>().map_err(|_| bad("grid")))
                        .collect::<Result<_, _>>()?;
                }
                other => {
                    return Err(Error::InvalidInput(format!("unknown config key `{other}`")));
                }
            }
        }
    }

    if let Some(d) = &args.data {
        data = Some(d.clone());
    }
    if let Some(k) = &args.kernel {
        kernel = Some(k.parse()?);
    }
    if let Some(m) = &args.methods {
        methods = Some(parse_methods(m)?);
    }
    if let Some(o) = &args.out {
        out_dir = Some(o.clone());
    }
    if let Some(t) = args.trials {
        trials = t;
    }
    if let Some(s) = args.seed {
        seed = s;
    }
    if let Some(k) = args.stop_at {
        stop_at = k;
    }
    if args.scale {
        scale = true;
    }
    if args.all_trials {
        all_trials = true;
    }
    if args.diagnostics {
        diagnostics = true;
    }
    if args.features.is_some() {
        features = args.features;
    }

    let data = data.ok_or_else(|| Error::InvalidInput("missing --data".into()))?;
    let kernel = kernel.ok_or_else(|| Error::InvalidInput("missing --kernel".into()))?;
    let methods = methods.ok_or_else(|| Error::InvalidInput("missing --methods".into()))?;
    let out_dir = out_dir.ok_or_else(|| Error::InvalidInput("missing --out".into()))?;

    let mut cfg = ExperimentConfig::new(data, kernel, methods, out_dir);
    cfg.n_trials = trials;
    cfg.base_seed = seed;
    cfg.stop_at = stop_at;
    cfg.scale = scale;
    cfg.keep_only_separable = !all_trials;
    cfg.diagnostics = diagnostics;
    cfg.n_features_hint = features;
    cfg.c_grid = c_grid;
    cfg.gamma_factors = gamma_factors;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match cli.command {
        Command::Run(args) => {
            let cfg = match build_config(&args) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(1);
                }
            };
            let result = run_experiment(&cfg).and_then(|out| {
                let files = emit_outputs(&out, &cfg)?;
                Ok((out, files))
            });
            match result {
                Ok((out, files)) => {
                    println!(
                        "kept {} trial(s) over {} attempt(s); {} trace(s)",
                        out.trials.len(),
                        out.attempts,
                        out.traces.len()
                    );
                    for trace in &out.traces {
                        let note = trace
                            .termination
                            .as_ref()
                            .map(|r| format!(", terminated early: {r}"))
                            .unwrap_or_default();
                        println!(
                            "  trial {} {}: {} step(s){note}",
                            trace.trial_id,
                            trace.method.name(),
                            trace.steps.len()
                        );
                    }
                    println!("wrote {} file(s) to {}", files.len(), cfg.out_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

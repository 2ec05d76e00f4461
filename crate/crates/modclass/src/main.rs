use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use modclass::{emit_outputs, presets, resolve_workers, run_experiment, selftest, ExperimentConfig, HarnessError, Method};

#[derive(Parser)]
#[command(name = "modclass", version, about = "Bayesian modulation classification for MIMO-OFDM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV and SVG outputs.
    Run(RunArgs),
    /// List the built-in experiment presets.
    Presets,
    /// Run the quick oracle checks.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Name of a built-in preset.
    #[arg(long)]
    preset: Option<String>,
    /// Worker threads (overrides MODCLASS_WORKERS and the config).
    #[arg(long)]
    workers: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Inference method; repeat to run several.
    #[arg(long)]
    method: Vec<Method>,
    /// Trials per modulation and cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Assumed channel length; repeat for several.
    #[arg(long = "l-hat")]
    l_hat: Vec<usize>,
    /// Iterations per run; repeat for several.
    #[arg(long)]
    iterations: Vec<usize>,
    /// SNR in dB; repeat for several.
    #[arg(long, allow_negative_numbers = true)]
    snr: Vec<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> modclass::Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => presets::preset(name)?,
        (None, None) => return Err(HarnessError::Config("pass --config or --preset".into())),
    };
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if !args.method.is_empty() {
        cfg.method = args.method.clone();
    }
    if let Some(t) = args.trials {
        cfg.trials_per_modulation = t;
    }
    if !args.l_hat.is_empty() {
        cfg.l_hat = args.l_hat.clone();
    }
    if !args.iterations.is_empty() {
        cfg.iterations = args.iterations.clone();
    }
    if !args.snr.is_empty() {
        cfg.snr_db = args.snr.clone();
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> modclass::Result<()> {
    let cfg = load(&args)?;
    let workers = resolve_workers(args.workers, &cfg);
    let cells = cfg.cells().len();
    eprintln!(
        "{}: {} cells x {} modulations x {} trials on {workers} workers",
        if cfg.name.is_empty() { "experiment" } else { &cfg.name },
        cells,
        cfg.transmitted_indices().len(),
        cfg.trials_per_modulation
    );
    let start = Instant::now();
    let records = run_experiment(&cfg, workers)?;
    let files = emit_outputs(&records, &cfg, &cfg.output_dir)?;
    let correct = records.iter().filter(|r| r.correct()).count();
    println!(
        "{} trials, {:.1}% correct overall, {:.1} s",
        records.len(),
        100.0 * correct as f64 / records.len() as f64,
        start.elapsed().as_secs_f64()
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("modclass: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::Presets => {
            for (name, description, _) in presets::PRESETS {
                println!("{name:<10} {description}");
            }
            ExitCode::SUCCESS
        }
        Command::Selftest => {
            let results = selftest::run_all();
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
    }
}

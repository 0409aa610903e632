use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use beliefsim::cli_io::{self, FileConfig, Overrides};
use beliefsim::validation::run_validation_suite;
use beliefsim::InfluenceMode;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "beliefsim", version, about = "Simulate interacting belief networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and write time series, histograms, and plots.
    Run(Common),
    /// Run the alpha x beta grid and write per-cell means and heatmaps.
    Sweep(Common),
    /// Run the oracle suite; exits 1 if any check fails.
    Validate {
        /// Also write the report into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat TOML file whose keys are config field names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run seed (`sweep`: base seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Social influence strength (`sweep`: pins the alpha axis to this value).
    #[arg(long)]
    alpha: Option<f64>,
    /// Coherence strength (`sweep`: pins the beta axis to this value).
    #[arg(long)]
    beta: Option<f64>,
    /// Noise standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<InfluenceMode>,
}

fn parse_mode(s: &str) -> Result<InfluenceMode, String> {
    s.parse()
}

impl Common {
    fn load(&self) -> beliefsim::Result<(FileConfig, Overrides)> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let flags = Overrides {
            seed: self.seed,
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma,
            steps: self.steps,
            influence_mode: self.mode,
        };
        Ok((file, flags))
    }
}

fn execute(command: Command) -> beliefsim::Result<bool> {
    match command {
        Command::Run(args) => {
            let (file, flags) = args.load()?;
            let config = cli_io::resolve_run(&file, &flags)?;
            let manifest = cli_io::execute_run(&config, &args.out)?;
            println!("wrote {} files to {}", manifest.files.len(), args.out.display());
            Ok(true)
        }
        Command::Sweep(args) => {
            let (file, flags) = args.load()?;
            let sweep = cli_io::resolve_sweep(&file, &flags)?;
            let env = std::env::var(cli_io::THREADS_ENV).ok();
            let threads = cli_io::sweep_threads(env.as_deref())?;
            let (_, manifest) = cli_io::execute_sweep(&sweep, threads, &args.out, |done, total| {
                if done == total || done % 10 == 0 {
                    eprint!("\r{done}/{total} runs");
                    let _ = std::io::stderr().flush();
                }
            })?;
            eprintln!();
            println!("wrote {} files to {}", manifest.files.len(), args.out.display());
            Ok(true)
        }
        Command::Validate { out } => {
            let report = run_validation_suite()?;
            print!("{}", cli_io::format_report(&report));
            if let Some(dir) = out {
                cli_io::write_validation(&report, &dir)?;
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("beliefsim: {e}");
            ExitCode::from(2)
        }
    }
}

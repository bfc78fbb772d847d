use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dps_cli::{
    read_selection_csv, run_single, run_sweep, select_best, write_artifacts, write_sweep_csv,
    HarnessError, RunConfig, SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "dps",
    about = "Diffusion posterior sampling harness for linear inverse problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single reconstruction from a JSON config
    Run {
        config: PathBuf,
        /// Output directory for result.json, sample.*, trace.csv
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the config's seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a scale x sigma ablation sweep from a JSON sweep spec
    Sweep {
        spec: PathBuf,
        /// Parallel worker bound
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Pick the best (scale, sigma) cell from an aggregate CSV
    Select { aggregate: PathBuf },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let base_dir = config
                .parent()
                .map(|p| p.to_path_buf())
                .unwrap_or_else(|| PathBuf::from("."));
            let result = run_single(&cfg, &base_dir)?;
            write_artifacts(&result, &out)?;
            match &result.record.metrics {
                Some(m) => println!(
                    "seed={} psnr_db={:.6} ssim={:.6} combined={:.6}",
                    result.record.seed, m.psnr_db, m.ssim, m.combined
                ),
                None => println!("seed={} (no metrics)", result.record.seed),
            }
            Ok(())
        }
        Command::Sweep { spec, jobs, out } => {
            let sweep = SweepSpec::from_file(&spec)?;
            let base_dir = spec
                .parent()
                .map(|p| p.to_path_buf())
                .unwrap_or_else(|| PathBuf::from("."));
            let output = run_sweep(&sweep, &base_dir, jobs)?;
            write_sweep_csv(&output, &out)?;
            let ok = output.rows.iter().filter(|r| r.status == "ok").count();
            println!(
                "{} rows ({} ok), {} aggregate cells -> {}",
                output.rows.len(),
                ok,
                output.aggregate.len(),
                out.display()
            );
            Ok(())
        }
        Command::Select { aggregate } => {
            let rows = read_selection_csv(&aggregate)?;
            let (scale, sigma) = select_best(&rows)?;
            println!("scale={scale} sigma={sigma}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

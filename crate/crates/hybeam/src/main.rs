//! Thin CLI over the experiment harness.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hybeam::harness::{
    cmd_bench, cmd_evaluate, cmd_generate, cmd_train, ExperimentConfig, HarnessError, Scale,
};

#[derive(Parser)]
#[command(
    name = "hybeam",
    about = "Hybrid beamforming experiments for multiuser mmWave MIMO with low-resolution phase shifters",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Experiment config file (TOML); overrides --scale.
    #[arg(long, conflicts_with = "scale")]
    config: Option<PathBuf>,
    /// Built-in scale preset.
    #[arg(long, default_value = "desk")]
    scale: Scale,
    /// Override the channel and training seeds.
    #[arg(long)]
    seed: Option<u64>,
    /// Input/output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Trained model checkpoint (needed when the designer list includes
    /// pcnet).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Comma-separated designer subset, e.g. "pcnet,svd,random".
    #[arg(long, value_delimiter = ',')]
    designers: Option<Vec<String>>,
}

impl CommonOpts {
    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::preset(self.scale),
        };
        if let Some(seed) = self.seed {
            cfg.override_seed(seed);
        }
        if let Some(names) = &self.designers {
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            cfg.restrict_designers(&refs)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate train/val/test channel datasets.
    Generate(CommonOpts),
    /// Train the phase classification network.
    Train(CommonOpts),
    /// Sum-rate sweep over the SNR and user grids.
    Evaluate(CommonOpts),
    /// Per-designer construction-time benchmark.
    Bench(CommonOpts),
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Generate(opts) => {
            let cfg = opts.resolve()?;
            let paths = cmd_generate(&cfg, &opts.out)?;
            println!(
                "wrote {}, {}, {}",
                paths.train.display(),
                paths.val.display(),
                paths.test.display()
            );
        }
        Command::Train(opts) => {
            let cfg = opts.resolve()?;
            let model_out = opts
                .model
                .clone()
                .unwrap_or_else(|| opts.out.join("pcnet.pcnw"));
            let history_out = opts.out.join("history.csv");
            let summary = cmd_train(
                &cfg,
                &opts.out.join("train.hbfd"),
                &opts.out.join("val.hbfd"),
                &model_out,
                &history_out,
            )?;
            println!(
                "trained {} epochs; best validation loss {:.6} at epoch {}; model at {}",
                summary.n_epochs,
                summary.best_val_loss,
                summary.best_epoch,
                model_out.display()
            );
        }
        Command::Evaluate(opts) => {
            let cfg = opts.resolve()?;
            let test = opts.out.join("test.hbfd");
            let test_path = test.exists().then_some(test.as_path());
            let out_csv = opts.out.join("results.csv");
            let rows = cmd_evaluate(&cfg, test_path, opts.model.as_deref(), &out_csv)?;
            println!("wrote {} rows to {}", rows.len(), out_csv.display());
        }
        Command::Bench(opts) => {
            let cfg = opts.resolve()?;
            let out_csv = opts.out.join("bench.csv");
            let rows = cmd_bench(&cfg, opts.model.as_deref(), &out_csv)?;
            for r in &rows {
                println!(
                    "{:<14} B={} {:>10.4} ms +- {:.4}",
                    r.designer, r.bits, r.mean_ms, r.std_ms
                );
            }
            println!("wrote {}", out_csv.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

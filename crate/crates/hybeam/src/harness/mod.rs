//! Batch experiment pipeline: dataset generation, training, sum-rate sweeps
//! over SNR and user count, and timing benchmarks.
//!
//! Every command is deterministic for a fixed config seed (benchmark wall
//! times excepted), and every CSV starts with a `# config_hash=...` comment
//! so results can be traced back to the exact configuration.

mod config;

pub use config::{
    ChannelSection, DataSection, DesignerSpec, ExperimentConfig, ExperimentSection,
    PcnetSection, Scale, SystemSection, TrainSection,
};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::baselines::{CrossEntropyDesigner, ExhaustiveDesigner, RandomDesigner, SvdDesigner};
use crate::beamforming::{
    sum_rate, two_stage_beamformer_min_norm, AnalogDesigner, BeamformingError, PhaseAlphabet,
    SystemConfig,
};
use crate::channel::{generate_dataset, load_dataset, save_dataset, Dataset, DatasetIoError};
use crate::numerics::NumericsError;
use crate::pcnet::{self, PcnetDesigner, PcnetError, PcnetModel};
use crate::rng;

/// Substream tags for the three dataset roles.
const ROLE_TRAIN: u64 = 0x7261_1000;
const ROLE_VAL: u64 = 0x7261_1001;
const ROLE_TEST: u64 = 0x7261_1002;
/// Tag mixed with the user count for regenerated sweep datasets.
const ROLE_USER_SWEEP: u64 = 0x7261_2000;
/// Tag for per-(designer, sample) design streams.
const ROLE_DESIGN: u64 = 0x7261_3000;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Bad invocation or configuration; exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Missing or malformed data files; exit code 2.
    #[error("{0}")]
    Data(String),
    /// Numerical failure while computing; exit code 3.
    #[error("{0}")]
    Numerical(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<DatasetIoError> for HarnessError {
    fn from(e: DatasetIoError) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<PcnetError> for HarnessError {
    fn from(e: PcnetError) -> Self {
        match e {
            PcnetError::NonFiniteLoss { .. } => Self::Numerical(e.to_string()),
            PcnetError::Io(_)
            | PcnetError::BadMagic
            | PcnetError::BadVersion(_)
            | PcnetError::Truncated
            | PcnetError::ShapeMismatch(_) => Self::Data(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

impl From<BeamformingError> for HarnessError {
    fn from(e: BeamformingError) -> Self {
        match e {
            BeamformingError::Numerics(NumericsError::Singular { .. })
            | BeamformingError::Numerics(NumericsError::NoConvergence { .. })
            | BeamformingError::ZeroProduct => Self::Numerical(e.to_string()),
            other => Self::Numerical(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Paths produced by [`cmd_generate`].
#[derive(Debug, Clone)]
pub struct GeneratedPaths {
    pub train: PathBuf,
    pub val: PathBuf,
    pub test: PathBuf,
}

/// Generates train/validation/test datasets on disjoint seed substreams.
pub fn cmd_generate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<GeneratedPaths> {
    std::fs::create_dir_all(out_dir)?;
    let base = cfg.to_channel_config()?;
    let roles = [
        ("train.hbfd", ROLE_TRAIN, cfg.data.n_train),
        ("val.hbfd", ROLE_VAL, cfg.data.n_val),
        ("test.hbfd", ROLE_TEST, cfg.data.n_test),
    ];
    let mut paths = Vec::new();
    for (file, role, n) in roles {
        let mut role_cfg = base.clone();
        role_cfg.seed = rng::substream_seed(base.seed, role);
        let dataset = generate_dataset(&role_cfg, n);
        let path = out_dir.join(file);
        save_dataset(&dataset, &path)?;
        paths.push(path);
    }
    let mut it = paths.into_iter();
    Ok(GeneratedPaths {
        train: it.next().unwrap(),
        val: it.next().unwrap(),
        test: it.next().unwrap(),
    })
}

fn check_dataset_dims(cfg: &ExperimentConfig, d: &Dataset, what: &str) -> Result<()> {
    if d.config.n_tx != cfg.channel.n_tx
        || d.config.n_rx != cfg.channel.n_rx
        || d.config.n_users != cfg.channel.n_users
    {
        return Err(HarnessError::Data(format!(
            "{what} dataset is {}x{} with {} users; config says {}x{} with {}",
            d.config.n_rx,
            d.config.n_tx,
            d.config.n_users,
            cfg.channel.n_rx,
            cfg.channel.n_tx,
            cfg.channel.n_users,
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub n_epochs: usize,
}

/// Trains the classification network and writes the checkpoint plus a
/// history CSV (`epoch,train_loss,val_loss`).
pub fn cmd_train(
    cfg: &ExperimentConfig,
    train_path: &Path,
    val_path: &Path,
    model_out: &Path,
    history_out: &Path,
) -> Result<TrainSummary> {
    let train_set = load_dataset(train_path)?;
    let val_set = load_dataset(val_path)?;
    check_dataset_dims(cfg, &train_set, "training")?;
    check_dataset_dims(cfg, &val_set, "validation")?;

    let arch = cfg.pcnet.to_architecture(cfg.channel.n_tx, cfg.channel.n_rx)?;
    let model = PcnetModel::init(arch, cfg.train.seed)?;
    let outcome = pcnet::train(&model, &train_set, &cfg.train.to_train_config(), &val_set)?;

    pcnet::save_model(&outcome.model, model_out)?;
    let mut csv = csv_writer(history_out, cfg)?;
    writeln!(csv, "epoch,train_loss,val_loss")?;
    for row in &outcome.history {
        writeln!(csv, "{},{:e},{:e}", row.epoch, row.train_loss, row.val_loss)?;
    }
    csv.flush()?;

    let best_val_loss = outcome
        .history
        .iter()
        .map(|r| r.val_loss)
        .fold(outcome.initial_val_loss, f64::min);
    Ok(TrainSummary {
        best_epoch: outcome.best_epoch,
        best_val_loss,
        n_epochs: outcome.history.len(),
    })
}

fn build_designers(
    cfg: &ExperimentConfig,
    model_path: Option<&Path>,
) -> Result<Vec<(Box<dyn AnalogDesigner>, u32)>> {
    let mut out: Vec<(Box<dyn AnalogDesigner>, u32)> = Vec::new();
    let mut model: Option<PcnetModel> = None;
    for spec in &cfg.designers {
        spec.validate()?;
        let bits = spec.bits.unwrap_or(cfg.experiment.bits);
        let designer: Box<dyn AnalogDesigner> = match spec.name.as_str() {
            "pcnet" => {
                if model.is_none() {
                    let path = model_path.ok_or_else(|| {
                        HarnessError::Data(
                            "designer 'pcnet' needs a trained model (--model)".into(),
                        )
                    })?;
                    model = Some(pcnet::load_model(path)?);
                }
                let m = model.clone().unwrap();
                if m.arch.n_tx != cfg.channel.n_tx || m.arch.n_rx != cfg.channel.n_rx {
                    return Err(HarnessError::Data(format!(
                        "model is for {}x{} antennas, config says {}x{}",
                        m.arch.n_rx, m.arch.n_tx, cfg.channel.n_rx, cfg.channel.n_tx
                    )));
                }
                Box::new(PcnetDesigner { model: m, bits })
            }
            "svd" => Box::new(SvdDesigner {
                rule: spec.svd_rule()?,
            }),
            "cross-entropy" => Box::new(CrossEntropyDesigner {
                cfg: spec.cross_entropy_config(),
            }),
            "exhaustive" => Box::new(ExhaustiveDesigner),
            "random" => Box::new(RandomDesigner),
            other => {
                return Err(HarnessError::Usage(format!("unknown designer '{other}'")));
            }
        };
        out.push((designer, bits));
    }
    if out.is_empty() {
        return Err(HarnessError::Usage("no designers configured".into()));
    }
    Ok(out)
}

/// One evaluation result row.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub designer: String,
    pub bits: u32,
    pub snr_db: f64,
    pub n_users: usize,
    pub mean_sum_rate: f64,
    pub std_err: f64,
}

/// Mean sum-rate per designer, SNR point and user count.
///
/// Stage-one designs are computed once per (designer, sample) and reused
/// across the SNR grid; the MMSE baseband stage is rebuilt per SNR point.
/// When the user grid asks for a count other than the test file's, a fresh
/// dataset is generated for that count (the analog precoder is square only
/// when the RF chain count equals the user count).
pub fn cmd_evaluate(
    cfg: &ExperimentConfig,
    test_path: Option<&Path>,
    model_path: Option<&Path>,
    out_csv: &Path,
) -> Result<Vec<EvalRow>> {
    let designers = build_designers(cfg, model_path)?;
    let mut rows = Vec::new();

    for &k in &cfg.experiment.user_grid {
        let dataset = if k == cfg.channel.n_users {
            match test_path {
                Some(p) => {
                    let d = load_dataset(p)?;
                    check_dataset_dims(cfg, &d, "test")?;
                    d
                }
                None => regenerate_eval_set(cfg, k)?,
            }
        } else {
            regenerate_eval_set(cfg, k)?
        };
        let n_samples = dataset.samples.len().min(cfg.experiment.n_eval_samples);
        if n_samples == 0 {
            return Err(HarnessError::Data("test dataset is empty".into()));
        }

        for (d_idx, (designer, bits)) in designers.iter().enumerate() {
            let tx_alphabet = PhaseAlphabet::for_array(*bits, cfg.channel.n_tx)
                .map_err(HarnessError::from)?;
            let rx_alphabet = PhaseAlphabet::for_array(*bits, cfg.channel.n_rx)
                .map_err(HarnessError::from)?;
            let mut per_snr: Vec<Vec<f64>> =
                vec![Vec::with_capacity(n_samples); cfg.experiment.snr_grid_db.len()];
            for (s_idx, sample) in dataset.samples.iter().take(n_samples).enumerate() {
                let stream = rng::substream(
                    rng::substream_seed(cfg.channel.seed, ROLE_DESIGN + d_idx as u64),
                    s_idx as u64,
                );
                for (g_idx, &snr_db) in cfg.experiment.snr_grid_db.iter().enumerate() {
                    let noise =
                        SystemConfig::noise_var_for_snr_db(cfg.system.power_total, k, snr_db);
                    let sys = SystemConfig::new(cfg.system.power_total, noise, k)
                        .map_err(HarnessError::from)?;
                    // Designs must not depend on the SNR point: every grid
                    // entry sees an identical design stream.
                    let mut design_stream = stream.clone();
                    let bf = two_stage_beamformer_min_norm(
                        sample,
                        designer.as_ref(),
                        &sys,
                        &tx_alphabet,
                        &rx_alphabet,
                        &mut design_stream,
                    )?;
                    per_snr[g_idx].push(sum_rate(sample, &bf, &sys));
                }
            }
            for (g_idx, &snr_db) in cfg.experiment.snr_grid_db.iter().enumerate() {
                let vals = &per_snr[g_idx];
                let (mean, std_err) = mean_and_std_err(vals);
                rows.push(EvalRow {
                    designer: designer.name(),
                    bits: *bits,
                    snr_db,
                    n_users: k,
                    mean_sum_rate: mean,
                    std_err,
                });
            }
        }
    }

    let mut csv = csv_writer(out_csv, cfg)?;
    writeln!(csv, "designer,B,snr_db,K,mean_sum_rate,std_err")?;
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{:.6},{:.6}",
            r.designer, r.bits, r.snr_db, r.n_users, r.mean_sum_rate, r.std_err
        )?;
    }
    csv.flush()?;
    Ok(rows)
}

fn regenerate_eval_set(cfg: &ExperimentConfig, n_users: usize) -> Result<Dataset> {
    let seed = rng::substream_seed(cfg.channel.seed, ROLE_USER_SWEEP + n_users as u64);
    let channel = cfg.channel.to_channel_config(n_users, seed)?;
    Ok(generate_dataset(&channel, cfg.experiment.n_eval_samples))
}

fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One timing result row.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub designer: String,
    pub bits: u32,
    pub mean_ms: f64,
    pub std_ms: f64,
}

const BENCH_WARMUP: usize = 3;

/// Times the end-to-end beamformer construction (stage one for every user
/// plus the MMSE stage) per channel sample, single-threaded, after a short
/// warmup. The noise variance comes from the first SNR grid point.
pub fn cmd_bench(
    cfg: &ExperimentConfig,
    model_path: Option<&Path>,
    out_csv: &Path,
) -> Result<Vec<BenchRow>> {
    let designers = build_designers(cfg, model_path)?;
    let n_timed = cfg.experiment.n_timed.max(1);
    let k = cfg.channel.n_users;
    let snr_db = cfg.experiment.snr_grid_db[0];
    let noise = SystemConfig::noise_var_for_snr_db(cfg.system.power_total, k, snr_db);
    let sys = SystemConfig::new(cfg.system.power_total, noise, k).map_err(HarnessError::from)?;

    let channel = cfg.to_channel_config()?;
    let dataset = generate_dataset(&channel, BENCH_WARMUP + n_timed);

    let mut rows = Vec::new();
    for (d_idx, (designer, bits)) in designers.iter().enumerate() {
        let tx_alphabet =
            PhaseAlphabet::for_array(*bits, cfg.channel.n_tx).map_err(HarnessError::from)?;
        let rx_alphabet =
            PhaseAlphabet::for_array(*bits, cfg.channel.n_rx).map_err(HarnessError::from)?;
        let mut times_ms = Vec::with_capacity(n_timed);
        for (s_idx, sample) in dataset.samples.iter().enumerate() {
            let mut stream = rng::substream(
                rng::substream_seed(cfg.channel.seed, ROLE_DESIGN + d_idx as u64),
                s_idx as u64,
            );
            let start = Instant::now();
            let bf = two_stage_beamformer_min_norm(
                sample,
                designer.as_ref(),
                &sys,
                &tx_alphabet,
                &rx_alphabet,
                &mut stream,
            )?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            std::hint::black_box(&bf);
            if s_idx >= BENCH_WARMUP {
                times_ms.push(elapsed);
            }
        }
        let n = times_ms.len() as f64;
        let mean = times_ms.iter().sum::<f64>() / n;
        let std = if times_ms.len() > 1 {
            (times_ms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        rows.push(BenchRow {
            designer: designer.name(),
            bits: *bits,
            mean_ms: mean,
            std_ms: std,
        });
    }

    let mut csv = csv_writer(out_csv, cfg)?;
    writeln!(csv, "designer,B,mean_ms,std_ms")?;
    for r in &rows {
        writeln!(csv, "{},{},{:.4},{:.4}", r.designer, r.bits, r.mean_ms, r.std_ms)?;
    }
    csv.flush()?;
    Ok(rows)
}

fn csv_writer(path: &Path, cfg: &ExperimentConfig) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# config_hash={:016x}", cfg.hash())?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_exit_codes() {
        assert_eq!(HarnessError::Usage("x".into()).exit_code(), 1);
        assert_eq!(HarnessError::Data("x".into()).exit_code(), 2);
        assert_eq!(HarnessError::Numerical("x".into()).exit_code(), 3);
    }

    #[test]
    fn mean_and_std_err_basics() {
        let (m, se) = mean_and_std_err(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15);
        assert!((se - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let (m, se) = mean_and_std_err(&[5.0]);
        assert_eq!(m, 5.0);
        assert_eq!(se, 0.0);
    }
}

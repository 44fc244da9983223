//! Experiment configuration: TOML schema, scale presets, provenance hash.
//!
//! Unknown keys anywhere in a config file are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{CrossEntropyConfig, SvdPrecoderRule};
use crate::channel::{ArrayGeometry, ChannelConfig, SpreadConvention};
use crate::pcnet::{NetArchitecture, StageDescriptor, TrainConfig};

use super::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_users: usize,
    pub n_paths: usize,
    pub angle_spread_deg: f64,
    #[serde(default = "default_spacing")]
    pub tx_spacing_over_wavelength: f64,
    #[serde(default = "default_spacing")]
    pub rx_spacing_over_wavelength: f64,
    pub seed: u64,
    #[serde(default)]
    pub per_path_means: bool,
    #[serde(default)]
    pub spread_convention: SpreadConvention,
}

fn default_spacing() -> f64 {
    0.5
}

impl ChannelSection {
    pub fn to_channel_config(&self, n_users: usize, seed: u64) -> Result<ChannelConfig, HarnessError> {
        let build = || -> Result<ChannelConfig, crate::channel::ChannelError> {
            let cfg = ChannelConfig {
                n_tx: self.n_tx,
                n_rx: self.n_rx,
                n_users,
                n_paths: self.n_paths,
                angle_spread_deg: self.angle_spread_deg,
                tx_geometry: ArrayGeometry::new(self.n_tx, self.tx_spacing_over_wavelength)?,
                rx_geometry: ArrayGeometry::new(self.n_rx, self.rx_spacing_over_wavelength)?,
                seed,
                per_path_means: self.per_path_means,
                spread_convention: self.spread_convention,
            };
            cfg.validate()?;
            Ok(cfg)
        };
        build().map_err(|e| HarnessError::Usage(format!("channel config: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub power_total: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Phase-shifter resolution used for evaluation and benchmarks.
    pub bits: u32,
    pub snr_grid_db: Vec<f64>,
    pub user_grid: Vec<usize>,
    pub n_eval_samples: usize,
    pub output_dir: PathBuf,
    #[serde(default = "default_n_timed")]
    pub n_timed: usize,
}

fn default_n_timed() -> usize {
    20
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub n_epochs: usize,
    #[serde(default = "default_beta1")]
    pub adam_beta1: f64,
    #[serde(default = "default_beta2")]
    pub adam_beta2: f64,
    #[serde(default = "default_eps")]
    pub adam_eps: f64,
    pub seed: u64,
    #[serde(default)]
    pub warm_start_epochs: usize,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

impl TrainSection {
    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            n_epochs: self.n_epochs,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_eps: self.adam_eps,
            seed: self.seed,
            warm_start_epochs: self.warm_start_epochs,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PcnetSection {
    /// Hidden width per resolution stage (stage `i` emits `2 + i` bits).
    pub stage_widths: Vec<usize>,
    #[serde(default = "default_n_layers")]
    pub n_layers: usize,
    #[serde(default = "default_dropout")]
    pub dropout_p: f64,
    #[serde(default)]
    pub standardize_input: bool,
    /// Optional skip override as (from, to) layer pairs.
    #[serde(default)]
    pub skips: Option<Vec<(usize, usize)>>,
}

fn default_n_layers() -> usize {
    6
}
fn default_dropout() -> f64 {
    0.3
}

impl PcnetSection {
    pub fn to_architecture(&self, n_tx: usize, n_rx: usize) -> Result<NetArchitecture, HarnessError> {
        let stages = self
            .stage_widths
            .iter()
            .enumerate()
            .map(|(i, &w)| StageDescriptor {
                n_layers: self.n_layers,
                width: w,
                dropout_p: self.dropout_p,
                output_bits: 2 + i as u32,
                skips: self
                    .skips
                    .clone()
                    .unwrap_or_else(|| crate::pcnet::default_skips(self.n_layers)),
            })
            .collect();
        let arch = NetArchitecture {
            n_tx,
            n_rx,
            stages,
            standardize_input: self.standardize_input,
        };
        arch.validate()
            .map_err(|e| HarnessError::Usage(format!("pcnet config: {e}")))?;
        Ok(arch)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DesignerSpec {
    pub name: String,
    /// Resolution override; defaults to the experiment-level `bits`.
    #[serde(default)]
    pub bits: Option<u32>,
    // Cross-entropy parameters.
    #[serde(default)]
    pub n_iters: Option<usize>,
    #[serde(default)]
    pub n_candidates: Option<usize>,
    #[serde(default)]
    pub elite_fraction: Option<f64>,
    #[serde(default)]
    pub smoothing: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// SVD precoder rule: "matched-phase" (default) or "right-singular".
    #[serde(default)]
    pub rule: Option<String>,
}

impl DesignerSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            bits: None,
            n_iters: None,
            n_candidates: None,
            elite_fraction: None,
            smoothing: None,
            seed: None,
            rule: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let ce_params = self.n_iters.is_some()
            || self.n_candidates.is_some()
            || self.elite_fraction.is_some()
            || self.smoothing.is_some();
        match self.name.as_str() {
            "pcnet" | "exhaustive" => {
                if ce_params || self.rule.is_some() || self.seed.is_some() {
                    return Err(HarnessError::Usage(format!(
                        "designer '{}' takes no tuning parameters",
                        self.name
                    )));
                }
            }
            "random" => {
                if ce_params || self.rule.is_some() {
                    return Err(HarnessError::Usage(
                        "designer 'random' only accepts a seed".into(),
                    ));
                }
            }
            "svd" => {
                if ce_params || self.seed.is_some() {
                    return Err(HarnessError::Usage(
                        "designer 'svd' only accepts a rule".into(),
                    ));
                }
                if let Some(rule) = &self.rule {
                    svd_rule_from_str(rule)?;
                }
            }
            "cross-entropy" => {
                if self.rule.is_some() {
                    return Err(HarnessError::Usage(
                        "designer 'cross-entropy' takes no rule".into(),
                    ));
                }
            }
            other => {
                return Err(HarnessError::Usage(format!(
                    "unknown designer '{other}' (expected pcnet, svd, cross-entropy, exhaustive or random)"
                )));
            }
        }
        Ok(())
    }

    pub fn cross_entropy_config(&self) -> CrossEntropyConfig {
        let d = CrossEntropyConfig::default();
        CrossEntropyConfig {
            n_iters: self.n_iters.unwrap_or(d.n_iters),
            n_candidates: self.n_candidates.unwrap_or(d.n_candidates),
            elite_fraction: self.elite_fraction.unwrap_or(d.elite_fraction),
            smoothing: self.smoothing.unwrap_or(d.smoothing),
            seed: self.seed.unwrap_or(d.seed),
        }
    }

    pub fn svd_rule(&self) -> Result<SvdPrecoderRule, HarnessError> {
        match &self.rule {
            None => Ok(SvdPrecoderRule::MatchedPhase),
            Some(r) => svd_rule_from_str(r),
        }
    }
}

fn svd_rule_from_str(rule: &str) -> Result<SvdPrecoderRule, HarnessError> {
    match rule {
        "matched-phase" => Ok(SvdPrecoderRule::MatchedPhase),
        "right-singular" => Ok(SvdPrecoderRule::RightSingular),
        other => Err(HarnessError::Usage(format!(
            "unknown svd rule '{other}' (expected matched-phase or right-singular)"
        ))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelSection,
    pub system: SystemSection,
    pub experiment: ExperimentSection,
    pub data: DataSection,
    pub train: TrainSection,
    pub pcnet: PcnetSection,
    #[serde(default, rename = "designer")]
    pub designers: Vec<DesignerSpec>,
}

/// Built-in scales: `paper` mirrors the reference simulation settings,
/// `desk` fits an afternoon on a desktop CPU, `tiny` is a smoke-test size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
    Tiny,
}

impl std::str::FromStr for Scale {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "desk" => Ok(Self::Desk),
            "tiny" => Ok(Self::Tiny),
            other => Err(format!("unknown scale '{other}' (paper|desk|tiny)")),
        }
    }
}

impl ExperimentConfig {
    pub fn preset(scale: Scale) -> Self {
        match scale {
            Scale::Paper => Self {
                channel: ChannelSection {
                    n_tx: 64,
                    n_rx: 16,
                    n_users: 8,
                    n_paths: 10,
                    angle_spread_deg: 10.0,
                    tx_spacing_over_wavelength: 0.5,
                    rx_spacing_over_wavelength: 0.5,
                    seed: 1,
                    per_path_means: false,
                    spread_convention: SpreadConvention::StdDev,
                },
                system: SystemSection { power_total: 1.0 },
                experiment: ExperimentSection {
                    bits: 2,
                    snr_grid_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
                    user_grid: vec![8],
                    n_eval_samples: 10_000,
                    output_dir: PathBuf::from("out"),
                    n_timed: 100,
                },
                data: DataSection {
                    n_train: 180_000,
                    n_val: 20_000,
                    n_test: 10_000,
                },
                train: TrainSection {
                    learning_rate: 3e-5,
                    batch_size: 256,
                    n_epochs: 50,
                    adam_beta1: 0.9,
                    adam_beta2: 0.999,
                    adam_eps: 1e-8,
                    seed: 1,
                    warm_start_epochs: 0,
                },
                pcnet: PcnetSection {
                    stage_widths: vec![1024, 2048],
                    n_layers: 6,
                    dropout_p: 0.3,
                    standardize_input: false,
                    skips: None,
                },
                designers: vec![
                    DesignerSpec::named("pcnet"),
                    DesignerSpec::named("svd"),
                    DesignerSpec::named("cross-entropy"),
                    DesignerSpec::named("random"),
                ],
            },
            Scale::Desk => Self {
                channel: ChannelSection {
                    n_tx: 16,
                    n_rx: 4,
                    n_users: 2,
                    n_paths: 10,
                    angle_spread_deg: 10.0,
                    tx_spacing_over_wavelength: 0.5,
                    rx_spacing_over_wavelength: 0.5,
                    seed: 1,
                    per_path_means: false,
                    spread_convention: SpreadConvention::StdDev,
                },
                system: SystemSection { power_total: 1.0 },
                experiment: ExperimentSection {
                    bits: 2,
                    snr_grid_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
                    user_grid: vec![2],
                    n_eval_samples: 1000,
                    output_dir: PathBuf::from("out"),
                    n_timed: 50,
                },
                data: DataSection {
                    n_train: 20_000,
                    n_val: 2_000,
                    n_test: 2_000,
                },
                train: TrainSection {
                    learning_rate: 3e-4,
                    batch_size: 256,
                    n_epochs: 10,
                    adam_beta1: 0.9,
                    adam_beta2: 0.999,
                    adam_eps: 1e-8,
                    seed: 1,
                    warm_start_epochs: 0,
                },
                pcnet: PcnetSection {
                    stage_widths: vec![256, 512],
                    n_layers: 6,
                    dropout_p: 0.3,
                    standardize_input: false,
                    skips: None,
                },
                designers: vec![
                    DesignerSpec::named("pcnet"),
                    DesignerSpec::named("svd"),
                    DesignerSpec::named("cross-entropy"),
                    DesignerSpec::named("random"),
                ],
            },
            Scale::Tiny => Self {
                channel: ChannelSection {
                    n_tx: 4,
                    n_rx: 4,
                    n_users: 2,
                    n_paths: 3,
                    angle_spread_deg: 10.0,
                    tx_spacing_over_wavelength: 0.5,
                    rx_spacing_over_wavelength: 0.5,
                    seed: 1,
                    per_path_means: false,
                    spread_convention: SpreadConvention::StdDev,
                },
                system: SystemSection { power_total: 1.0 },
                experiment: ExperimentSection {
                    bits: 2,
                    snr_grid_db: vec![0.0, 10.0],
                    user_grid: vec![2],
                    n_eval_samples: 32,
                    output_dir: PathBuf::from("out"),
                    n_timed: 5,
                },
                data: DataSection {
                    n_train: 64,
                    n_val: 16,
                    n_test: 32,
                },
                train: TrainSection {
                    learning_rate: 1e-3,
                    batch_size: 32,
                    n_epochs: 2,
                    adam_beta1: 0.9,
                    adam_beta2: 0.999,
                    adam_eps: 1e-8,
                    seed: 1,
                    warm_start_epochs: 0,
                },
                pcnet: PcnetSection {
                    stage_widths: vec![32, 32],
                    n_layers: 2,
                    dropout_p: 0.1,
                    standardize_input: false,
                    skips: None,
                },
                designers: vec![
                    DesignerSpec::named("pcnet"),
                    DesignerSpec::named("svd"),
                    DesignerSpec::named("random"),
                    DesignerSpec::named("exhaustive"),
                ],
            },
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| HarnessError::Usage(format!("cannot read config: {e}")))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| HarnessError::Usage(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.to_channel_config()?;
        if !(self.system.power_total > 0.0) {
            return Err(HarnessError::Usage("power_total must be positive".into()));
        }
        if self.experiment.snr_grid_db.is_empty() || self.experiment.user_grid.is_empty() {
            return Err(HarnessError::Usage(
                "snr_grid_db and user_grid must be nonempty".into(),
            ));
        }
        if self.experiment.n_eval_samples == 0 {
            return Err(HarnessError::Usage(
                "n_eval_samples must be at least 1".into(),
            ));
        }
        self.pcnet
            .to_architecture(self.channel.n_tx, self.channel.n_rx)?;
        for d in &self.designers {
            d.validate()?;
        }
        Ok(())
    }

    pub fn to_channel_config(&self) -> Result<ChannelConfig, HarnessError> {
        self.channel
            .to_channel_config(self.channel.n_users, self.channel.seed)
    }

    /// Overrides both the channel and training seeds; used by `--seed`.
    pub fn override_seed(&mut self, seed: u64) {
        self.channel.seed = seed;
        self.train.seed = seed;
    }

    /// Keeps only the named designers, creating default specs for names the
    /// config does not mention; used by `--designers`.
    pub fn restrict_designers(&mut self, names: &[&str]) -> Result<(), HarnessError> {
        let mut selected = Vec::new();
        for name in names {
            let spec = self
                .designers
                .iter()
                .find(|d| d.name == *name)
                .cloned()
                .unwrap_or_else(|| DesignerSpec::named(name));
            spec.validate()?;
            selected.push(spec);
        }
        if selected.is_empty() {
            return Err(HarnessError::Usage("no designers selected".into()));
        }
        self.designers = selected;
        Ok(())
    }

    /// FNV-1a hash of the canonical serialized config, recorded in every
    /// CSV for provenance.
    pub fn hash(&self) -> u64 {
        let text = toml::to_string(self).expect("config serializes");
        let mut hash = 0xcbf2_9ce4_8422_2325u64;
        for b in text.bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x1000_0000_01b3);
        }
        hash
    }
}

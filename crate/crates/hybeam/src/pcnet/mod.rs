//! Phase classification network: a concatenated residual MLP mapping one
//! user's channel to a categorical distribution over the `2^B` phases of
//! every transmit and receive shifter.
//!
//! The first stage consumes the real-encoded channel and emits 2-bit
//! distributions; each later stage consumes the channel together with the
//! previous stage's distributions and emits one resolution higher. Training
//! is unsupervised: the loss is the negated beamforming gain of the
//! softmax-weighted phase mixtures, summed over stages, so sharpening the
//! distributions toward good discrete designs is the only way down.
//! Inference decodes each row by argmax.

mod adam;
mod designer;
mod io;
mod loss;
mod net;
pub mod real;
mod train;

pub use adam::{adam_step, AdamState};
pub use designer::{infer, PcnetDesigner};
pub use io::{load_model, save_model};
pub use loss::{
    backward, backward_batch, batch_total_loss, loss_stage, total_loss, GradientSet,
};
pub use net::{forward, forward_batch, forward_eval, ForwardTrace, Mode, StageTrace};
pub use train::{train, EpochStats, TrainConfig, TrainOutcome};

use real::RMatrix;

use crate::numerics::CMatrix;
use crate::rng;

#[derive(Debug, thiserror::Error)]
pub enum PcnetError {
    #[error("invalid architecture: {0}")]
    BadArchitecture(String),
    #[error("input has {got} features, architecture expects {want}")]
    InputDim { got: usize, want: usize },
    #[error("model has no stage with {0}-bit output")]
    NoSuchStage(u32),
    #[error("channel shape {got} does not match architecture ({want})")]
    ChannelShape { got: String, want: String },
    #[error("non-finite loss {value} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss {
        value: f64,
        epoch: usize,
        batch: usize,
    },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint magic (not a model file)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("checkpoint ends before the declared contents")]
    Truncated,
    #[error("checkpoint does not match the expected architecture: {0}")]
    ShapeMismatch(String),
}

pub type Result<T> = std::result::Result<T, PcnetError>;

/// One resolution stage of the concatenated network.
#[derive(Debug, Clone, PartialEq)]
pub struct StageDescriptor {
    pub n_layers: usize,
    pub width: usize,
    pub dropout_p: f64,
    pub output_bits: u32,
    /// Additive skip connections `(from, to)` between 1-based layer
    /// positions; the stream at `to` receives the (post-skip) stream at
    /// `from`.
    pub skips: Vec<(usize, usize)>,
}

impl StageDescriptor {
    pub fn new(width: usize, output_bits: u32) -> Self {
        Self {
            n_layers: 6,
            width,
            dropout_p: 0.3,
            output_bits,
            skips: default_skips(6),
        }
    }
}

/// Two fused skips: block entry to the midpoint, and that sum to the last
/// layer. Degenerates gracefully for very shallow blocks.
pub fn default_skips(n_layers: usize) -> Vec<(usize, usize)> {
    if n_layers >= 3 {
        let mid = (n_layers + 1) / 2;
        vec![(1, mid), (mid, n_layers)]
    } else if n_layers == 2 {
        vec![(1, 2)]
    } else {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetArchitecture {
    pub n_tx: usize,
    pub n_rx: usize,
    pub stages: Vec<StageDescriptor>,
    /// Standardize each input row to zero mean, unit variance.
    pub standardize_input: bool,
}

impl NetArchitecture {
    /// Stages at widths `stage_widths[0..]`, resolutions 2, 3, ... bits.
    pub fn new(n_tx: usize, n_rx: usize, stage_widths: &[usize]) -> Result<Self> {
        let stages = stage_widths
            .iter()
            .enumerate()
            .map(|(i, &w)| StageDescriptor::new(w, 2 + i as u32))
            .collect();
        let arch = Self {
            n_tx,
            n_rx,
            stages,
            standardize_input: false,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(PcnetError::BadArchitecture(
                "antenna counts must be positive".into(),
            ));
        }
        if self.stages.is_empty() {
            return Err(PcnetError::BadArchitecture("at least one stage".into()));
        }
        for (i, st) in self.stages.iter().enumerate() {
            if st.output_bits != 2 + i as u32 {
                return Err(PcnetError::BadArchitecture(format!(
                    "stage {i} must output {} bits, got {}",
                    2 + i,
                    st.output_bits
                )));
            }
            if st.n_layers == 0 || st.width == 0 {
                return Err(PcnetError::BadArchitecture(format!(
                    "stage {i} needs at least one layer and one neuron"
                )));
            }
            if !(0.0..1.0).contains(&st.dropout_p) {
                return Err(PcnetError::BadArchitecture(format!(
                    "stage {i} dropout {} outside [0, 1)",
                    st.dropout_p
                )));
            }
            if st.output_bits > 16 {
                return Err(PcnetError::BadArchitecture(format!(
                    "stage {i} resolution {} bits is unreasonably large",
                    st.output_bits
                )));
            }
            for &(from, to) in &st.skips {
                if from == 0 || to <= from || to > st.n_layers {
                    return Err(PcnetError::BadArchitecture(format!(
                        "stage {i} skip ({from}, {to}) invalid for {} layers",
                        st.n_layers
                    )));
                }
            }
        }
        Ok(())
    }

    /// Length of the real channel encoding.
    pub fn input_dim(&self) -> usize {
        2 * self.n_tx * self.n_rx
    }

    /// Stage input: the channel encoding, plus for later stages the
    /// previous stage's flattened softmax outputs.
    pub fn stage_input_dim(&self, stage: usize) -> usize {
        if stage == 0 {
            self.input_dim()
        } else {
            self.input_dim() + self.stage_output_dim(stage - 1)
        }
    }

    /// `(N_t + N_r) * 2^B` logits.
    pub fn stage_output_dim(&self, stage: usize) -> usize {
        (self.n_tx + self.n_rx) * (1usize << self.stages[stage].output_bits)
    }

    pub fn stage_with_bits(&self, bits: u32) -> Result<usize> {
        self.stages
            .iter()
            .position(|s| s.output_bits == bits)
            .ok_or(PcnetError::NoSuchStage(bits))
    }
}

/// One dense layer, weight stored output-major (`out_dim x in_dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weight: RMatrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageParams {
    pub layers: Vec<DenseLayer>,
    pub output: DenseLayer,
}

/// All trainable parameters plus the architecture they instantiate.
#[derive(Debug, Clone, PartialEq)]
pub struct PcnetModel {
    pub arch: NetArchitecture,
    pub stages: Vec<StageParams>,
    pub rng_seed: u64,
}

impl PcnetModel {
    /// Glorot-uniform weights (`+-sqrt(6/(fan_in+fan_out))`), zero biases,
    /// drawn in declaration order from a stream seeded by `seed`.
    pub fn init(arch: NetArchitecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut stream = rng::substream(seed, 0);
        let mut stages = Vec::with_capacity(arch.stages.len());
        for (s, desc) in arch.stages.iter().enumerate() {
            let mut layers = Vec::with_capacity(desc.n_layers);
            let mut in_dim = arch.stage_input_dim(s);
            for _ in 0..desc.n_layers {
                layers.push(init_layer(in_dim, desc.width, &mut stream));
                in_dim = desc.width;
            }
            let output = init_layer(desc.width, arch.stage_output_dim(s), &mut stream);
            stages.push(StageParams { layers, output });
        }
        Ok(Self {
            arch,
            stages,
            rng_seed: seed,
        })
    }

    pub fn n_params(&self) -> usize {
        self.tensor_slices()
            .iter()
            .map(|t| t.len())
            .sum()
    }

    /// Every parameter tensor in declaration order: per stage, each hidden
    /// layer's weight then bias, then the output layer's weight and bias.
    pub fn tensor_slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for st in &self.stages {
            for l in &st.layers {
                out.push(l.weight.data.as_slice());
                out.push(l.bias.as_slice());
            }
            out.push(st.output.weight.data.as_slice());
            out.push(st.output.bias.as_slice());
        }
        out
    }

    pub fn tensor_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for st in &mut self.stages {
            for l in &mut st.layers {
                out.push(l.weight.data.as_mut_slice());
                out.push(l.bias.as_mut_slice());
            }
            out.push(st.output.weight.data.as_mut_slice());
            out.push(st.output.bias.as_mut_slice());
        }
        out
    }

    /// Checks that a channel matrix matches the architecture shape.
    pub fn check_channel(&self, h: &CMatrix) -> Result<()> {
        if h.rows() != self.arch.n_rx || h.cols() != self.arch.n_tx {
            return Err(PcnetError::ChannelShape {
                got: format!("{}x{}", h.rows(), h.cols()),
                want: format!("{}x{}", self.arch.n_rx, self.arch.n_tx),
            });
        }
        Ok(())
    }
}

fn init_layer(in_dim: usize, out_dim: usize, stream: &mut rand_chacha::ChaCha8Rng) -> DenseLayer {
    let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let mut weight = RMatrix::zeros(out_dim, in_dim);
    for v in weight.data.iter_mut() {
        *v = (2.0 * rng::uniform_f64(stream) - 1.0) * limit;
    }
    DenseLayer {
        weight,
        bias: vec![0.0; out_dim],
    }
}

/// Real encoding of a channel matrix: all real parts in row-major order,
/// then all imaginary parts.
pub fn encode_input(h: &CMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * h.rows() * h.cols());
    out.extend(h.entries().iter().map(|z| z.re));
    out.extend(h.entries().iter().map(|z| z.im));
    out
}

/// Inverse of [`encode_input`], for tests and tooling.
pub fn decode_input(x: &[f64], n_rx: usize, n_tx: usize) -> CMatrix {
    let half = n_rx * n_tx;
    assert_eq!(x.len(), 2 * half, "encoding length mismatch");
    CMatrix::from_fn(n_rx, n_tx, |r, c| {
        let i = r * n_tx + c;
        num_complex::Complex64::new(x[i], x[half + i])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn encode_real_channel_has_zero_imag_half() {
        let h = CMatrix::from_fn(2, 3, |r, c| Complex64::new((r + c) as f64, 0.0));
        let x = encode_input(&h);
        assert_eq!(x.len(), 12);
        assert!(x[6..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn encode_conjugate_flips_imag_sign_only() {
        let h = CMatrix::from_fn(2, 2, |r, c| Complex64::new(r as f64 + 0.5, c as f64 - 0.3));
        let hc = CMatrix::from_fn(2, 2, |r, c| h.get(r, c).conj());
        let a = encode_input(&h);
        let b = encode_input(&hc);
        assert_eq!(a[..4], b[..4]);
        for i in 4..8 {
            assert_eq!(a[i], -b[i]);
        }
    }

    #[test]
    fn encode_decode_round_trip() {
        let h = CMatrix::from_fn(3, 4, |r, c| {
            Complex64::new(0.1 * r as f64 - 0.7, 1.3 * c as f64 + 0.2)
        });
        let x = encode_input(&h);
        assert_eq!(decode_input(&x, 3, 4), h);
    }

    #[test]
    fn architecture_validation_rejects_bad_stage_order() {
        let mut arch = NetArchitecture::new(4, 4, &[8, 8]).unwrap();
        arch.stages[1].output_bits = 5;
        assert!(matches!(
            arch.validate(),
            Err(PcnetError::BadArchitecture(_))
        ));
    }

    #[test]
    fn default_skip_positions() {
        assert_eq!(default_skips(6), vec![(1, 3), (3, 6)]);
        assert_eq!(default_skips(2), vec![(1, 2)]);
        assert!(default_skips(1).is_empty());
    }

    #[test]
    fn init_is_seed_deterministic() {
        let arch = NetArchitecture::new(4, 4, &[16]).unwrap();
        let a = PcnetModel::init(arch.clone(), 3).unwrap();
        let b = PcnetModel::init(arch, 3).unwrap();
        assert_eq!(a, b);
    }
}

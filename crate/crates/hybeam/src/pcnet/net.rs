//! Forward pass through the concatenated residual stages.

use rand_chacha::ChaCha8Rng;

use super::real::{affine_forward, RMatrix};
use super::{PcnetError, PcnetModel, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Dropout active (inverted scaling), masks recorded for backprop.
    Train,
    /// Dropout is the identity; the pass is a pure function of the input.
    Eval,
}

/// Everything the backward pass needs from one stage.
#[derive(Debug, Clone)]
pub struct StageTrace {
    /// Stage input rows (channel encoding, plus previous-stage softmax for
    /// later stages).
    pub input: RMatrix,
    /// Pre-activations per layer.
    pub preacts: Vec<RMatrix>,
    /// ELU outputs per layer (before dropout).
    pub activations: Vec<RMatrix>,
    /// Dropout masks holding 0 or `1/(1-p)`; empty in eval mode.
    pub masks: Vec<RMatrix>,
    /// Post-dropout, post-skip streams per layer.
    pub streams: Vec<RMatrix>,
    /// Output-layer logits: for each row, `N_t` chunks of `2^B` transmit
    /// logits followed by `N_r` receive chunks.
    pub logits: RMatrix,
    /// Row-chunk softmax of the logits: each chunk sums to 1.
    pub soft: RMatrix,
}

#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub stages: Vec<StageTrace>,
    pub mode: Mode,
    pub batch: usize,
}

/// Runs the first `n_stages` stages on a batch of encoded channels.
pub fn forward_batch(
    model: &PcnetModel,
    x: &RMatrix,
    mode: Mode,
    stream: &mut ChaCha8Rng,
    n_stages: usize,
) -> Result<ForwardTrace> {
    if x.cols != model.arch.input_dim() {
        return Err(PcnetError::InputDim {
            got: x.cols,
            want: model.arch.input_dim(),
        });
    }
    let x = if model.arch.standardize_input {
        standardize_rows(x)
    } else {
        x.clone()
    };
    let mut stages: Vec<StageTrace> = Vec::with_capacity(n_stages);
    for s in 0..n_stages.min(model.stages.len()) {
        let input = if s == 0 {
            x.clone()
        } else {
            concat_cols(&x, &stages[s - 1].soft)
        };
        stages.push(run_stage(model, s, input, mode, stream));
    }
    Ok(ForwardTrace {
        stages,
        mode,
        batch: x.rows,
    })
}

/// Single-sample forward through every stage.
pub fn forward(
    model: &PcnetModel,
    x: &[f64],
    mode: Mode,
    stream: &mut ChaCha8Rng,
) -> Result<ForwardTrace> {
    let row = RMatrix {
        rows: 1,
        cols: x.len(),
        data: x.to_vec(),
    };
    forward_batch(model, &row, mode, stream, model.stages.len())
}

/// Deterministic eval-mode forward; no randomness is consumed.
pub fn forward_eval(model: &PcnetModel, x: &[f64]) -> Result<ForwardTrace> {
    let mut unused = rng::substream(0, 0);
    forward(model, x, Mode::Eval, &mut unused)
}

fn run_stage(
    model: &PcnetModel,
    stage: usize,
    input: RMatrix,
    mode: Mode,
    stream: &mut ChaCha8Rng,
) -> StageTrace {
    let desc = &model.arch.stages[stage];
    let params = &model.stages[stage];
    let n_layers = desc.n_layers;
    let mut preacts = Vec::with_capacity(n_layers);
    let mut activations = Vec::with_capacity(n_layers);
    let mut masks = Vec::with_capacity(if mode == Mode::Train { n_layers } else { 0 });
    let mut streams: Vec<RMatrix> = Vec::with_capacity(n_layers);

    for i in 0..n_layers {
        let layer_in = if i == 0 { &input } else { &streams[i - 1] };
        let z = affine_forward(layer_in, &params.layers[i].weight, &params.layers[i].bias);
        let mut a = z.clone();
        for v in a.data.iter_mut() {
            if *v <= 0.0 {
                *v = v.exp() - 1.0;
            }
        }
        let mut s = match mode {
            Mode::Train => {
                // Inverted dropout: masks drawn serially in row-major order.
                let keep = 1.0 - desc.dropout_p;
                let scale = 1.0 / keep;
                let mut mask = RMatrix::zeros(a.rows, a.cols);
                for v in mask.data.iter_mut() {
                    *v = if rng::uniform_f64(stream) < keep {
                        scale
                    } else {
                        0.0
                    };
                }
                let mut d = a.clone();
                for (dv, mv) in d.data.iter_mut().zip(&mask.data) {
                    *dv *= mv;
                }
                masks.push(mask);
                d
            }
            Mode::Eval => a.clone(),
        };
        for &(from, to) in &desc.skips {
            if to == i + 1 {
                let src = &streams[from - 1];
                for (sv, &fv) in s.data.iter_mut().zip(&src.data) {
                    *sv += fv;
                }
            }
        }
        preacts.push(z);
        activations.push(a);
        streams.push(s);
    }

    let logits = affine_forward(
        &streams[n_layers - 1],
        &params.output.weight,
        &params.output.bias,
    );
    let chunk = 1usize << desc.output_bits;
    let soft = chunk_softmax(&logits, chunk);

    StageTrace {
        input,
        preacts,
        activations,
        masks,
        streams,
        logits,
        soft,
    }
}

/// Row-wise softmax over consecutive chunks of width `chunk`.
pub(super) fn chunk_softmax(logits: &RMatrix, chunk: usize) -> RMatrix {
    debug_assert_eq!(logits.cols % chunk, 0);
    let mut out = logits.clone();
    for r in 0..out.rows {
        let row = out.row_mut(r);
        for group in row.chunks_mut(chunk) {
            let max = group.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in group.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in group.iter_mut() {
                *v /= sum;
            }
        }
    }
    out
}

fn concat_cols(a: &RMatrix, b: &RMatrix) -> RMatrix {
    debug_assert_eq!(a.rows, b.rows);
    let mut out = RMatrix::zeros(a.rows, a.cols + b.cols);
    for r in 0..a.rows {
        out.row_mut(r)[..a.cols].copy_from_slice(a.row(r));
        out.row_mut(r)[a.cols..].copy_from_slice(b.row(r));
    }
    out
}

fn standardize_rows(x: &RMatrix) -> RMatrix {
    let mut out = x.clone();
    for r in 0..out.rows {
        let row = out.row_mut(r);
        let n = row.len() as f64;
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt().max(1e-12);
        for v in row.iter_mut() {
            *v = (*v - mean) / std;
        }
    }
    out
}

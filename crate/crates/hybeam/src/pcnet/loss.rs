//! Unsupervised loss and exact reverse-mode gradients.
//!
//! Per stage and channel, the loss is the negated gain of the
//! softmax-weighted phase mixtures,
//! `-| (P_w p_w)^H H (P_f p_f) |`, where `P_f`/`P_w` are the row-softmaxed
//! logit matrices and `p_f`/`p_w` the alphabet value vectors. The total
//! loss sums the stage terms, so earlier stages receive gradient both from
//! their own term and through the concatenation into later stages.
//!
//! The modulus head is differentiated through the real parameterization:
//! with `z = u + jv` and a real parameter `t`,
//! `d(-|z|)/dt = -Re(conj(z) * dz/dt) / |z|`, taken as 0 at `z = 0`.

use num_complex::Complex64;

use super::real::{affine_backward_input, affine_backward_params, RMatrix};
use super::{
    DenseLayer, ForwardTrace, Mode, NetArchitecture, PcnetError, PcnetModel, Result, StageParams,
};
use crate::beamforming::PhaseAlphabet;
use crate::numerics::CMatrix;

/// Parameter gradients, mirroring [`PcnetModel`]'s tensor layout.
#[derive(Debug, Clone)]
pub struct GradientSet {
    pub stages: Vec<StageParams>,
}

impl GradientSet {
    pub fn zeros_like(model: &PcnetModel) -> Self {
        let stages = model
            .stages
            .iter()
            .map(|st| StageParams {
                layers: st
                    .layers
                    .iter()
                    .map(|l| DenseLayer {
                        weight: RMatrix::zeros(l.weight.rows, l.weight.cols),
                        bias: vec![0.0; l.bias.len()],
                    })
                    .collect(),
                output: DenseLayer {
                    weight: RMatrix::zeros(st.output.weight.rows, st.output.weight.cols),
                    bias: vec![0.0; st.output.bias.len()],
                },
            })
            .collect();
        Self { stages }
    }

    /// Tensors in the same declaration order as
    /// [`PcnetModel::tensor_slices`].
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

    pub fn max_abs(&self) -> f64 {
        self.tensor_slices()
            .iter()
            .flat_map(|t| t.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Alphabet value vectors for a stage: transmit then receive.
fn stage_phase_vectors(arch: &NetArchitecture, stage: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let bits = arch.stages[stage].output_bits;
    let p_f = PhaseAlphabet::for_array(bits, arch.n_tx)
        .expect("validated arch")
        .values();
    let p_w = PhaseAlphabet::for_array(bits, arch.n_rx)
        .expect("validated arch")
        .values();
    (p_f, p_w)
}

struct RowGain {
    z: Complex64,
    /// `H c_f`, length `N_r`.
    g: Vec<Complex64>,
    /// `c_w^H H`, length `N_t`.
    e: Vec<Complex64>,
}

fn row_gain(
    soft_row: &[f64],
    h: &CMatrix,
    n_tx: usize,
    n_rx: usize,
    chunk: usize,
    p_f: &[Complex64],
    p_w: &[Complex64],
) -> RowGain {
    let mut c_f = vec![Complex64::new(0.0, 0.0); n_tx];
    for (j, cf) in c_f.iter_mut().enumerate() {
        let probs = &soft_row[j * chunk..(j + 1) * chunk];
        for (s, &p) in probs.iter().enumerate() {
            *cf += p_f[s] * p;
        }
    }
    let mut c_w = vec![Complex64::new(0.0, 0.0); n_rx];
    for (i, cw) in c_w.iter_mut().enumerate() {
        let probs = &soft_row[(n_tx + i) * chunk..(n_tx + i + 1) * chunk];
        for (s, &p) in probs.iter().enumerate() {
            *cw += p_w[s] * p;
        }
    }
    let mut g = vec![Complex64::new(0.0, 0.0); n_rx];
    for (i, gi) in g.iter_mut().enumerate() {
        for j in 0..n_tx {
            *gi += h.get(i, j) * c_f[j];
        }
    }
    let mut e = vec![Complex64::new(0.0, 0.0); n_tx];
    for (j, ej) in e.iter_mut().enumerate() {
        for i in 0..n_rx {
            *ej += c_w[i].conj() * h.get(i, j);
        }
    }
    let z = c_w
        .iter()
        .zip(&g)
        .map(|(cw, gi)| cw.conj() * gi)
        .fold(Complex64::new(0.0, 0.0), |a, t| a + t);
    RowGain { z, g, e }
}

fn check_trace_stage(trace: &ForwardTrace, stage: usize) -> Result<()> {
    if stage >= trace.stages.len() {
        return Err(PcnetError::ShapeMismatch(format!(
            "trace holds {} stages, stage {} requested",
            trace.stages.len(),
            stage
        )));
    }
    Ok(())
}

/// Loss of one stage for a single-sample trace.
pub fn loss_stage(
    model: &PcnetModel,
    trace: &ForwardTrace,
    h: &CMatrix,
    stage_bits: u32,
) -> Result<f64> {
    let stage = model.arch.stage_with_bits(stage_bits)?;
    check_trace_stage(trace, stage)?;
    model.check_channel(h)?;
    let chunk = 1usize << stage_bits;
    let (p_f, p_w) = stage_phase_vectors(&model.arch, stage);
    let gain = row_gain(
        trace.stages[stage].soft.row(0),
        h,
        model.arch.n_tx,
        model.arch.n_rx,
        chunk,
        &p_f,
        &p_w,
    );
    Ok(-gain.z.norm())
}

/// Sum of the stage losses present in the trace, single sample.
pub fn total_loss(model: &PcnetModel, trace: &ForwardTrace, h: &CMatrix) -> Result<f64> {
    let mut total = 0.0;
    for stage in 0..trace.stages.len() {
        total += loss_stage(model, trace, h, model.arch.stages[stage].output_bits)?;
    }
    Ok(total)
}

/// Mean over the batch of the per-row total loss.
pub fn batch_total_loss(
    model: &PcnetModel,
    trace: &ForwardTrace,
    channels: &[&CMatrix],
) -> Result<f64> {
    if channels.len() != trace.batch {
        return Err(PcnetError::ShapeMismatch(format!(
            "{} channels for a batch of {}",
            channels.len(),
            trace.batch
        )));
    }
    let mut total = 0.0;
    for stage in 0..trace.stages.len() {
        let chunk = 1usize << model.arch.stages[stage].output_bits;
        let (p_f, p_w) = stage_phase_vectors(&model.arch, stage);
        for (r, h) in channels.iter().enumerate() {
            model.check_channel(h)?;
            let gain = row_gain(
                trace.stages[stage].soft.row(r),
                h,
                model.arch.n_tx,
                model.arch.n_rx,
                chunk,
                &p_f,
                &p_w,
            );
            total -= gain.z.norm();
        }
    }
    Ok(total / trace.batch as f64)
}

/// Exact gradients of the batch-mean total loss with respect to every
/// parameter, together with that loss value.
pub fn backward_batch(
    model: &PcnetModel,
    trace: &ForwardTrace,
    channels: &[&CMatrix],
) -> Result<(GradientSet, f64)> {
    if channels.len() != trace.batch {
        return Err(PcnetError::ShapeMismatch(format!(
            "{} channels for a batch of {}",
            channels.len(),
            trace.batch
        )));
    }
    for h in channels {
        model.check_channel(h)?;
    }
    let n = trace.batch;
    let arch = &model.arch;
    let mut grads = GradientSet::zeros_like(model);
    let mut total_loss_acc = 0.0;
    // Gradient flowing into the *previous* stage's softmax through the
    // input concatenation.
    let mut soft_carry: Option<RMatrix> = None;

    for stage in (0..trace.stages.len()).rev() {
        let st = &trace.stages[stage];
        let desc = &arch.stages[stage];
        let params = &model.stages[stage];
        let gstage = &mut grads.stages[stage];
        let chunk = 1usize << desc.output_bits;
        let out_dim = arch.stage_output_dim(stage);
        let (p_f, p_w) = stage_phase_vectors(arch, stage);

        // d loss / d soft: own loss term plus any carry from the next stage.
        let mut d_soft = soft_carry.take().unwrap_or_else(|| RMatrix::zeros(n, out_dim));
        let inv_n = 1.0 / n as f64;
        for (r, h) in channels.iter().enumerate() {
            let gain = row_gain(st.soft.row(r), h, arch.n_tx, arch.n_rx, chunk, &p_f, &p_w);
            let modulus = gain.z.norm();
            total_loss_acc -= modulus * inv_n;
            if modulus == 0.0 {
                continue; // subgradient choice at the kink
            }
            let coef = -inv_n / modulus;
            let zc = gain.z.conj();
            let row = d_soft.row_mut(r);
            for j in 0..arch.n_tx {
                let base = zc * gain.e[j];
                for (s, &pf) in p_f.iter().enumerate() {
                    row[j * chunk + s] += coef * (base * pf).re;
                }
            }
            for i in 0..arch.n_rx {
                let base = zc * gain.g[i];
                for (s, &pw) in p_w.iter().enumerate() {
                    row[(arch.n_tx + i) * chunk + s] += coef * (base * pw.conj()).re;
                }
            }
        }

        // Softmax backward, chunk by chunk.
        let mut d_logits = RMatrix::zeros(n, out_dim);
        for r in 0..n {
            let p = st.soft.row(r);
            let dp = d_soft.row(r);
            let dl = d_logits.row_mut(r);
            for c0 in (0..out_dim).step_by(chunk) {
                let mut dot = 0.0;
                for s in 0..chunk {
                    dot += dp[c0 + s] * p[c0 + s];
                }
                for s in 0..chunk {
                    dl[c0 + s] = p[c0 + s] * (dp[c0 + s] - dot);
                }
            }
        }

        // Output layer.
        let last_stream = &st.streams[desc.n_layers - 1];
        affine_backward_params(
            &d_logits,
            last_stream,
            &mut gstage.output.weight,
            &mut gstage.output.bias,
        );
        let d_last = affine_backward_input(&d_logits, &params.output.weight);

        // Hidden layers, newest first; skips route stream gradients back to
        // their sources.
        let mut d_streams: Vec<RMatrix> = (0..desc.n_layers)
            .map(|i| RMatrix::zeros(n, params.layers[i].weight.rows))
            .collect();
        d_streams[desc.n_layers - 1] = d_last;
        let mut d_block_input = None;
        for i in (0..desc.n_layers).rev() {
            for &(from, to) in &desc.skips {
                if to == i + 1 {
                    let (head, tail) = d_streams.split_at_mut(i);
                    let src = &tail[0];
                    let dst = &mut head[from - 1];
                    for (d, &s) in dst.data.iter_mut().zip(&src.data) {
                        *d += s;
                    }
                }
            }
            let mut d_z = d_streams[i].clone();
            if trace.mode == Mode::Train {
                for (v, &m) in d_z.data.iter_mut().zip(&st.masks[i].data) {
                    *v *= m;
                }
            }
            // ELU': 1 for z > 0, else exp(z) = activation + 1.
            for ((v, &z), &a) in d_z
                .data
                .iter_mut()
                .zip(&st.preacts[i].data)
                .zip(&st.activations[i].data)
            {
                if z <= 0.0 {
                    *v *= a + 1.0;
                }
            }
            let layer_in = if i == 0 { &st.input } else { &st.streams[i - 1] };
            let glayer = &mut gstage.layers[i];
            affine_backward_params(&d_z, layer_in, &mut glayer.weight, &mut glayer.bias);
            let d_in = affine_backward_input(&d_z, &params.layers[i].weight);
            if i > 0 {
                for (d, &s) in d_streams[i - 1].data.iter_mut().zip(&d_in.data) {
                    *d += s;
                }
            } else {
                d_block_input = Some(d_in);
            }
        }

        // Route the concatenated-input gradient to the previous stage's
        // softmax columns; the raw channel portion is a constant.
        if stage > 0 {
            let d_in = d_block_input.expect("at least one layer");
            let x_dim = arch.input_dim();
            let prev_dim = arch.stage_output_dim(stage - 1);
            let mut carry = RMatrix::zeros(n, prev_dim);
            for r in 0..n {
                carry
                    .row_mut(r)
                    .copy_from_slice(&d_in.row(r)[x_dim..x_dim + prev_dim]);
            }
            soft_carry = Some(carry);
        }
    }

    Ok((grads, total_loss_acc))
}

/// Single-sample gradients of the total loss.
pub fn backward(
    model: &PcnetModel,
    trace: &ForwardTrace,
    h: &CMatrix,
) -> Result<(GradientSet, f64)> {
    backward_batch(model, trace, &[h])
}

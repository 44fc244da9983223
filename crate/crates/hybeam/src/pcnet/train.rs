//! Minibatch training over per-user channel rows.
//!
//! Every channel sample contributes one row per user: the network is shared
//! across users and maps a single user's matrix to that user's design.
//! Shuffling, dropout and initialization all derive from the config seed,
//! so a fixed seed reproduces the history bit for bit.

use super::real::RMatrix;
use super::{
    adam_step, backward_batch, batch_total_loss, encode_input, forward_batch, AdamState,
    ForwardTrace, Mode, PcnetError, PcnetModel, Result,
};
use crate::channel::Dataset;
use crate::numerics::CMatrix;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub n_epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Epochs during which only the first stage's loss term trains the
    /// network (0 = joint from the start).
    pub warm_start_epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-5,
            batch_size: 256,
            n_epochs: 10,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            warm_start_epochs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters at the best validation loss seen (including the initial
    /// model as the baseline).
    pub model: PcnetModel,
    pub history: Vec<EpochStats>,
    /// Epoch of the returned checkpoint; 0 means the initial model.
    pub best_epoch: usize,
    pub initial_val_loss: f64,
}

struct RowSet {
    inputs: RMatrix,
    /// (sample, user) behind each row.
    origin: Vec<(usize, usize)>,
}

fn collect_rows(model: &PcnetModel, data: &Dataset) -> Result<RowSet> {
    let mut rows = Vec::new();
    let mut origin = Vec::new();
    for (si, sample) in data.samples.iter().enumerate() {
        for (ui, h) in sample.per_user.iter().enumerate() {
            model.check_channel(h)?;
            rows.push(encode_input(h));
            origin.push((si, ui));
        }
    }
    if rows.is_empty() {
        return Err(PcnetError::EmptyDataset);
    }
    Ok(RowSet {
        inputs: RMatrix::from_rows(rows),
        origin,
    })
}

fn gather_batch(rows: &RowSet, idx: &[usize]) -> RMatrix {
    let cols = rows.inputs.cols;
    let mut out = RMatrix::zeros(idx.len(), cols);
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).copy_from_slice(rows.inputs.row(i));
    }
    out
}

fn gather_channels<'d>(data: &'d Dataset, rows: &RowSet, idx: &[usize]) -> Vec<&'d CMatrix> {
    idx.iter()
        .map(|&i| {
            let (si, ui) = rows.origin[i];
            &data.samples[si].per_user[ui]
        })
        .collect()
}

/// Mean total loss over a dataset in eval mode.
pub fn validation_loss(model: &PcnetModel, data: &Dataset, batch_size: usize) -> Result<f64> {
    let rows = collect_rows(model, data)?;
    let n = rows.origin.len();
    let mut unused = rng::substream(0, 0);
    let mut total = 0.0;
    let mut start = 0;
    while start < n {
        let end = (start + batch_size).min(n);
        let idx: Vec<usize> = (start..end).collect();
        let batch = gather_batch(&rows, &idx);
        let channels = gather_channels(data, &rows, &idx);
        let trace = forward_batch(model, &batch, Mode::Eval, &mut unused, model.stages.len())?;
        total += batch_total_loss(model, &trace, &channels)? * idx.len() as f64;
        start = end;
    }
    Ok(total / n as f64)
}

/// Trains with Adam, recording one history row per epoch and returning the
/// best-validation checkpoint.
pub fn train(
    model: &PcnetModel,
    train_set: &Dataset,
    cfg: &TrainConfig,
    validation: &Dataset,
) -> Result<TrainOutcome> {
    let mut model = model.clone();
    let rows = collect_rows(&model, train_set)?;
    let n_rows = rows.origin.len();
    let batch_size = cfg.batch_size.max(1);

    let mut stream = rng::substream(cfg.seed, 1);
    let mut adam = AdamState::new(&model);

    let initial_val_loss = validation_loss(&model, validation, batch_size)?;
    let mut best_val = initial_val_loss;
    let mut best_model = model.clone();
    let mut best_epoch = 0usize;
    let mut history = Vec::with_capacity(cfg.n_epochs);

    let mut order: Vec<usize> = (0..n_rows).collect();
    for epoch in 1..=cfg.n_epochs {
        // Fisher-Yates from the training stream.
        for i in (1..n_rows).rev() {
            let j = rng::uniform_index(&mut stream, i + 1);
            order.swap(i, j);
        }
        let active_stages = if epoch <= cfg.warm_start_epochs {
            1
        } else {
            model.stages.len()
        };

        let mut loss_sum = 0.0;
        for (batch_no, idx) in order.chunks(batch_size).enumerate() {
            let batch = gather_batch(&rows, idx);
            let channels = gather_channels(train_set, &rows, idx);
            let trace: ForwardTrace =
                forward_batch(&model, &batch, Mode::Train, &mut stream, active_stages)?;
            let (grads, loss) = backward_batch(&model, &trace, &channels)?;
            if !loss.is_finite() {
                return Err(PcnetError::NonFiniteLoss {
                    value: loss,
                    epoch,
                    batch: batch_no,
                });
            }
            loss_sum += loss * idx.len() as f64;
            adam_step(&mut model, &grads, &mut adam, cfg);
        }
        let train_loss = loss_sum / n_rows as f64;
        let val_loss = validation_loss(&model, validation, batch_size)?;
        if !val_loss.is_finite() {
            return Err(PcnetError::NonFiniteLoss {
                value: val_loss,
                epoch,
                batch: usize::MAX,
            });
        }
        if val_loss < best_val {
            best_val = val_loss;
            best_model = model.clone();
            best_epoch = epoch;
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
        });
    }

    Ok(TrainOutcome {
        model: best_model,
        history,
        best_epoch,
        initial_val_loss,
    })
}

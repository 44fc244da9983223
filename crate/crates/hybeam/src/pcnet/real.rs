//! Real-valued batched matrix kernels for network training and inference.
//!
//! All kernels are bit-deterministic regardless of thread count: a parallel
//! kernel assigns each output row to exactly one worker and reduces it
//! sequentially in a fixed order.

use rayon::prelude::*;

/// Work threshold (multiply-adds) below which kernels stay single-threaded.
const PAR_THRESHOLD: usize = 1 << 15;

/// Dense row-major f64 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * cols);
        for r in &rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: n,
            cols,
            data,
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }
}

/// Unrolled dot product; vectorizes well at opt-level 3.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = i * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Affine map of every input row: `out[r] = weight * in[r] + bias`, with
/// `weight` stored output-major (`out_dim x in_dim`).
pub fn affine_forward(input: &RMatrix, weight: &RMatrix, bias: &[f64]) -> RMatrix {
    assert_eq!(input.cols, weight.cols, "input dim mismatch");
    assert_eq!(weight.rows, bias.len(), "bias dim mismatch");
    let out_dim = weight.rows;
    let mut out = RMatrix::zeros(input.rows, out_dim);
    let work = input.rows * input.cols * out_dim;
    let run_row = |r: usize, dst: &mut [f64]| {
        let x = input.row(r);
        for (o, slot) in dst.iter_mut().enumerate() {
            *slot = dot(x, weight.row(o)) + bias[o];
        }
    };
    if work < PAR_THRESHOLD || input.rows == 1 {
        for r in 0..input.rows {
            let mut tmp = vec![0.0; out_dim];
            run_row(r, &mut tmp);
            out.row_mut(r).copy_from_slice(&tmp);
        }
    } else {
        out.data
            .par_chunks_mut(out_dim)
            .enumerate()
            .for_each(|(r, dst)| run_row(r, dst));
    }
    out
}

/// Input gradient: `d_input[r] = d_out[r] * weight`.
pub fn affine_backward_input(d_out: &RMatrix, weight: &RMatrix) -> RMatrix {
    assert_eq!(d_out.cols, weight.rows);
    let in_dim = weight.cols;
    let mut d_in = RMatrix::zeros(d_out.rows, in_dim);
    let run_row = |r: usize, dst: &mut [f64]| {
        let g = d_out.row(r);
        for (o, &go) in g.iter().enumerate() {
            if go != 0.0 {
                axpy(go, weight.row(o), dst);
            }
        }
    };
    let work = d_out.rows * d_out.cols * in_dim;
    if work < PAR_THRESHOLD || d_out.rows == 1 {
        for r in 0..d_out.rows {
            let mut tmp = vec![0.0; in_dim];
            run_row(r, &mut tmp);
            d_in.row_mut(r).copy_from_slice(&tmp);
        }
    } else {
        d_in.data
            .par_chunks_mut(in_dim)
            .enumerate()
            .for_each(|(r, dst)| run_row(r, dst));
    }
    d_in
}

/// Weight/bias gradients: `d_weight[o] = sum_r d_out[r][o] * input[r]`,
/// `d_bias[o] = sum_r d_out[r][o]`. Accumulation over the batch runs in row
/// order for every output, so the reduction order is fixed.
pub fn affine_backward_params(
    d_out: &RMatrix,
    input: &RMatrix,
    d_weight: &mut RMatrix,
    d_bias: &mut [f64],
) {
    assert_eq!(d_out.rows, input.rows);
    assert_eq!(d_weight.rows, d_out.cols);
    assert_eq!(d_weight.cols, input.cols);
    assert_eq!(d_bias.len(), d_out.cols);
    let in_dim = input.cols;
    let n_rows = d_out.rows;
    let run_out = |o: usize, w_row: &mut [f64], b: &mut f64| {
        for r in 0..n_rows {
            let g = d_out.get(r, o);
            if g != 0.0 {
                axpy(g, input.row(r), w_row);
                *b += g;
            }
        }
    };
    let work = n_rows * in_dim * d_out.cols;
    if work < PAR_THRESHOLD {
        for o in 0..d_out.cols {
            let mut b = d_bias[o];
            run_out(o, d_weight.row_mut(o), &mut b);
            d_bias[o] = b;
        }
    } else {
        d_weight
            .data
            .par_chunks_mut(in_dim)
            .zip(d_bias.par_iter_mut())
            .enumerate()
            .for_each(|(o, (w_row, b))| run_out(o, w_row, b));
    }
}

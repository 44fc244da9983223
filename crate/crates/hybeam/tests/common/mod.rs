//! Shared test oracles, independent of the library's implementation paths.

#![allow(dead_code)]

use hybeam::numerics::CMatrix;
use hybeam::rng;
use num_complex::Complex64;

/// Random complex matrix with standard-normal entries.
pub fn random_cmatrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut stream = rng::substream(seed, 0);
    CMatrix::from_fn(rows, cols, |_, _| rng::complex_standard_normal(&mut stream))
}

/// All eigenvalues of a Hermitian matrix via cyclic Jacobi sweeps on the
/// real symmetric embedding `[[Re, -Im], [Im, Re]]` (each eigenvalue of the
/// Hermitian matrix appears twice in the embedding).
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    assert_eq!(h.rows(), h.cols(), "need a square Hermitian matrix");
    let n = h.rows();
    let m = 2 * n;
    let mut a = vec![vec![0.0f64; m]; m];
    for r in 0..n {
        for c in 0..n {
            let z = h.get(r, c);
            a[r][c] = z.re;
            a[r][c + n] = -z.im;
            a[r + n][c] = z.im;
            a[r + n][c + n] = z.re;
        }
    }

    // Classical cyclic Jacobi for real symmetric matrices.
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..m {
            for q in (p + 1)..m {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() < 1e-13 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    // Keep one copy of each doubled eigenvalue.
    eig.into_iter().step_by(2).collect()
}

/// Largest singular value through the Jacobi eigen-oracle on the Gram
/// matrix.
pub fn oracle_sigma_max(a: &CMatrix) -> f64 {
    let gram = a.hermitian().matmul(a).unwrap();
    let eigs = hermitian_eigenvalues(&gram);
    eigs[0].max(0.0).sqrt()
}

/// All singular values (descending) via one-sided Jacobi (Hestenes) on the
/// real embedding. Unlike the Gram-matrix route, small singular values come
/// out at full relative accuracy, which numerical-rank checks need.
pub fn oracle_singular_values(a: &CMatrix) -> Vec<f64> {
    let m = a.rows();
    let n = a.cols();
    // Column-major storage of the 2m x 2n real embedding.
    let rm = 2 * m;
    let rn = 2 * n;
    let mut cols = vec![vec![0.0f64; rm]; rn];
    for r in 0..m {
        for c in 0..n {
            let z = a.get(r, c);
            cols[c][r] = z.re;
            cols[c + n][r] = -z.im;
            cols[c][r + m] = z.im;
            cols[c + n][r + m] = z.re;
        }
    }

    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..rn {
            for q in (p + 1)..rn {
                let (mut app, mut aqq, mut apq) = (0.0, 0.0, 0.0);
                for k in 0..rm {
                    app += cols[p][k] * cols[p][k];
                    aqq += cols[q][k] * cols[q][k];
                    apq += cols[p][k] * cols[q][k];
                }
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rm {
                    let vp = cols[p][k];
                    let vq = cols[q][k];
                    cols[p][k] = c * vp - s * vq;
                    cols[q][k] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    // Each singular value of the complex matrix appears twice.
    sv.into_iter().step_by(2).collect()
}

/// Naive triple-loop matrix product in the textbook index order.
pub fn naive_matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.cols(), b.rows());
    CMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..a.cols() {
            acc += a.get(i, k) * b.get(k, j);
        }
        acc
    })
}

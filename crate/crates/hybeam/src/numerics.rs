//! Complex dense linear algebra.
//!
//! Everything downstream (channels, beamformers, designers) works with small
//! dense complex matrices, so this module keeps its own row-major storage and
//! implements exactly the operations the rest of the crate needs: products,
//! Hermitian transpose, Frobenius norm, LU-based inversion with partial
//! pivoting, and the dominant singular pair via power iteration on the Gram
//! matrix.
//!
//! All values are immutable after construction; every operation is a pure
//! function of its inputs and safe to call from multiple threads.

use num_complex::Complex64;
use rand_core::SeedableRng;

use crate::rng;

/// Relative pivot threshold below which LU declares the matrix singular.
const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Fixed seed for the power-iteration start vector, so singular pairs are
/// reproducible across runs and platforms.
const POWER_ITERATION_SEED: u64 = 0x7031_7e7a_7105_eed1;

#[derive(Debug, thiserror::Error)]
pub enum NumericsError {
    #[error("dimension mismatch: {left} vs {right} in {op}")]
    DimensionMismatch {
        op: &'static str,
        left: String,
        right: String,
    },
    #[error("matrix entries must be finite")]
    NonFiniteEntry,
    #[error("matrix dimensions must be at least 1x1 (got {rows}x{cols})")]
    EmptyDimensions { rows: usize, cols: usize },
    #[error("entry count {given} does not match {rows}x{cols}")]
    EntryCount {
        rows: usize,
        cols: usize,
        given: usize,
    },
    #[error("matrix is singular to working precision (pivot {pivot:e} at step {step})")]
    Singular { pivot: f64, step: usize },
    #[error("matrix must be square for {op} (got {rows}x{cols})")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        /// Best singular pair seen when iteration stopped.
        last: Box<SingularPair>,
    },
    #[error("matrix must be nonzero for {0}")]
    ZeroMatrix(&'static str),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

/// Dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    data: Vec<Complex64>,
}

/// Result of [`dominant_singular_pair`]: unit-norm left/right singular
/// vectors and the dominant singular value.
#[derive(Debug, Clone)]
pub struct SingularPair {
    pub left: CVector,
    pub value: f64,
    pub right: CVector,
}

impl CMatrix {
    /// Builds a matrix from row-major entries, validating shape and
    /// finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(NumericsError::EmptyDimensions { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(NumericsError::EntryCount {
                rows,
                cols,
                given: data.len(),
            });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(NumericsError::NonFiniteEntry);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "dimensions must be at least 1x1");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds an `n x k` matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[CVector]) -> Result<Self> {
        let k = columns.len();
        if k == 0 {
            return Err(NumericsError::EmptyDimensions { rows: 0, cols: 0 });
        }
        let n = columns[0].len();
        for c in columns {
            if c.len() != n {
                return Err(NumericsError::DimensionMismatch {
                    op: "from_columns",
                    left: format!("{n}"),
                    right: format!("{}", c.len()),
                });
            }
        }
        Ok(Self::from_fn(n, k, |r, c| columns[c].data[r]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> CVector {
        CVector::from_fn(self.rows, |r| self.get(r, c))
    }

    /// Standard complex matrix product.
    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(NumericsError::DimensionMismatch {
                op: "matmul",
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", rhs.rows, rhs.cols),
            });
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        // i-k-j order keeps both inner accesses contiguous.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &CVector) -> Result<CVector> {
        if self.cols != v.len() {
            return Err(NumericsError::DimensionMismatch {
                op: "matvec",
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}", v.len()),
            });
        }
        Ok(CVector::from_fn(self.rows, |r| {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            row.iter()
                .zip(&v.data)
                .map(|(&a, &x)| a * x)
                .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t)
        }))
    }

    /// Conjugate transpose: `(a^H)[n][m] = conj(a[m][n])`.
    pub fn hermitian(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// Inverse via LU decomposition with partial pivoting.
    ///
    /// A pivot smaller than `1e-12` times the largest entry modulus of the
    /// input is treated as singular to working precision.
    pub fn inverse(&self) -> Result<CMatrix> {
        if self.rows != self.cols {
            return Err(NumericsError::NotSquare {
                op: "inverse",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let scale = self.max_abs();
        let mut lu = self.data.clone();
        // Inverse accumulated by solving against the permuted identity.
        let mut inv = CMatrix::identity(n);

        for k in 0..n {
            // Partial pivoting on column k.
            let mut pivot_row = k;
            let mut pivot_mag = lu[k * n + k].norm();
            for i in (k + 1)..n {
                let mag = lu[i * n + k].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = i;
                }
            }
            if pivot_mag < SINGULARITY_THRESHOLD * scale || pivot_mag == 0.0 {
                return Err(NumericsError::Singular {
                    pivot: pivot_mag,
                    step: k,
                });
            }
            if pivot_row != k {
                for j in 0..n {
                    lu.swap(k * n + j, pivot_row * n + j);
                    inv.data.swap(k * n + j, pivot_row * n + j);
                }
            }
            let pivot = lu[k * n + k];
            let pivot_inv = Complex64::new(1.0, 0.0) / pivot;
            for j in 0..n {
                lu[k * n + j] *= pivot_inv;
                inv.data[k * n + j] *= pivot_inv;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let factor = lu[i * n + k];
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let t = lu[k * n + j];
                    lu[i * n + j] -= factor * t;
                    let t = inv.data[k * n + j];
                    inv.data[i * n + j] -= factor * t;
                }
            }
        }
        Ok(inv)
    }

    /// Square root of the sum of squared entry moduli.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn add(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &CMatrix,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<CMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(NumericsError::DimensionMismatch {
                op,
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", rhs.rows, rhs.cols),
            });
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl CVector {
    pub fn new(data: Vec<Complex64>) -> Result<Self> {
        if data.is_empty() {
            return Err(NumericsError::EmptyDimensions { rows: 0, cols: 1 });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(NumericsError::NonFiniteEntry);
        }
        Ok(Self { data })
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "length must be at least 1");
        Self {
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> Complex64) -> Self {
        assert!(len > 0, "length must be at least 1");
        Self {
            data: (0..len).map(|i| f(i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.data[i]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Hermitian inner product `self^H rhs`.
    pub fn hdot(&self, rhs: &CVector) -> Result<Complex64> {
        if self.len() != rhs.len() {
            return Err(NumericsError::DimensionMismatch {
                op: "hdot",
                left: format!("{}", self.len()),
                right: format!("{}", rhs.len()),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| a.conj() * b)
            .fold(Complex64::new(0.0, 0.0), |acc, t| acc + t))
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> CVector {
        CVector {
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// Outer product `self * rhs^H`.
    pub fn outer(&self, rhs: &CVector) -> CMatrix {
        CMatrix::from_fn(self.len(), rhs.len(), |r, c| {
            self.data[r] * rhs.data[c].conj()
        })
    }

    /// Interprets the vector as an `n x 1` matrix.
    pub fn as_column(&self) -> CMatrix {
        CMatrix {
            rows: self.len(),
            cols: 1,
            data: self.data.clone(),
        }
    }
}

/// Dominant singular pair of `a` via power iteration on the Gram matrix
/// `a^H a`.
///
/// The start vector is drawn from a fixed seeded stream. Convergence is the
/// eigen-residual test `|| (a^H a) v - lambda v || <= tol * lambda` with
/// `lambda` the Rayleigh quotient; a degenerate dominant subspace passes the
/// test with any vector inside it. The returned right vector has its
/// largest-modulus entry rotated to the nonnegative real axis, and the left
/// vector carries the matching rotation so that `a v = s u` holds exactly.
pub fn dominant_singular_pair(a: &CMatrix, tol: f64, max_iter: usize) -> Result<SingularPair> {
    if a.max_abs() == 0.0 {
        return Err(NumericsError::ZeroMatrix("dominant_singular_pair"));
    }
    let gram = a.hermitian().matmul(a).expect("a^H a always conforms");
    let n = gram.rows();

    let mut stream = rand_chacha::ChaCha8Rng::seed_from_u64(POWER_ITERATION_SEED);
    let mut v = CVector::from_fn(n, |_| rng::complex_standard_normal(&mut stream));
    let nv = v.norm2();
    v = v.scale(Complex64::new(1.0 / nv, 0.0));

    let mut converged = false;
    for _ in 0..max_iter {
        let w = gram.matvec(&v).expect("gram matvec conforms");
        let lambda = v.hdot(&w).expect("same length").re;
        let residual = CVector::from_fn(n, |i| w.get(i) - v.get(i) * lambda);
        if lambda > 0.0 && residual.norm2() <= tol * lambda {
            converged = true;
            break;
        }
        let norm = w.norm2();
        if norm == 0.0 {
            // v landed in the null space; restart from a fresh draw.
            let mut f = CVector::from_fn(n, |_| rng::complex_standard_normal(&mut stream));
            let nf = f.norm2();
            f = f.scale(Complex64::new(1.0 / nf, 0.0));
            v = f;
            continue;
        }
        v = w.scale(Complex64::new(1.0 / norm, 0.0));
    }

    let pair = finalize_pair(a, &v);
    if converged {
        Ok(pair)
    } else {
        Err(NumericsError::NoConvergence {
            iterations: max_iter,
            last: Box::new(pair),
        })
    }
}

/// Fixes the global phase and builds `(u, s, v)` from a converged right
/// vector.
fn finalize_pair(a: &CMatrix, v: &CVector) -> SingularPair {
    // Rotate so the largest-modulus entry of v is real nonnegative.
    let mut best = 0;
    for i in 1..v.len() {
        if v.get(i).norm() > v.get(best).norm() {
            best = i;
        }
    }
    let anchor = v.get(best);
    let rot = if anchor.norm() > 0.0 {
        anchor.conj() / anchor.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let v = v.scale(rot);
    let av = a.matvec(&v).expect("a v conforms");
    let s = av.norm2();
    let u = if s > 0.0 {
        av.scale(Complex64::new(1.0 / s, 0.0))
    } else {
        CVector::from_fn(a.rows(), |i| {
            if i == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    SingularPair {
        left: u,
        value: s,
        right: v,
    }
}

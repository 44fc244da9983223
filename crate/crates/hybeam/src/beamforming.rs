//! Phase alphabets, analog designs, and the two-stage hybrid beamformer.
//!
//! Stage one picks a discrete-phase precoder column and combiner per user
//! (any [`AnalogDesigner`]); stage two computes the MMSE baseband precoder on
//! the equivalent channel and rescales it to the transmit power budget.
//! Sum-rate evaluation treats the scalar baseband equalizer at each receiver
//! as 1: it cancels from the SINR, which [`sinr`]'s scale invariance in the
//! combiner makes testable.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelSample;
use crate::numerics::{CMatrix, CVector, NumericsError};

#[derive(Debug, thiserror::Error)]
pub enum BeamformingError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("phase index {index} out of range for {bits}-bit alphabet")]
    PhaseIndexOutOfRange { index: u32, bits: u32 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("F_RF F_BB is zero; cannot normalize power")]
    ZeroProduct,
    #[error("design instance too large: {0} candidate designs exceed the exhaustive-search guard")]
    InstanceTooLarge(f64),
    #[error("designer failed: {0}")]
    Designer(String),
}

pub type Result<T> = std::result::Result<T, BeamformingError>;

/// The B-bit phase set `{modulus * exp(j 2 pi b / 2^B) : b = 0..2^B-1}`.
///
/// `bits = 0` is the degenerate single-phase alphabet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAlphabet {
    bits: u32,
    modulus: f64,
}

impl PhaseAlphabet {
    pub fn new(bits: u32, modulus: f64) -> Result<Self> {
        if bits > 16 {
            return Err(BeamformingError::InvalidArgument(format!(
                "phase resolution {bits} bits is unreasonably large"
            )));
        }
        if !(modulus > 0.0) || !modulus.is_finite() {
            return Err(BeamformingError::InvalidArgument(format!(
                "alphabet modulus must be positive and finite (got {modulus})"
            )));
        }
        Ok(Self { bits, modulus })
    }

    /// Alphabet for an `n`-element array: modulus `1/sqrt(n)`.
    pub fn for_array(bits: u32, n_elements: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(BeamformingError::InvalidArgument(
                "array must have at least one element".into(),
            ));
        }
        Self::new(bits, 1.0 / (n_elements as f64).sqrt())
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// Number of phases, `2^B`.
    pub fn size(&self) -> usize {
        1usize << self.bits
    }

    /// The value at phase index `b`.
    pub fn value(&self, index: u32) -> Result<Complex64> {
        if index as usize >= self.size() {
            return Err(BeamformingError::PhaseIndexOutOfRange {
                index,
                bits: self.bits,
            });
        }
        let phase = std::f64::consts::TAU * index as f64 / self.size() as f64;
        Ok(Complex64::from_polar(self.modulus, phase))
    }

    /// All alphabet values in index order (the per-shifter value vector).
    pub fn values(&self) -> Vec<Complex64> {
        (0..self.size() as u32)
            .map(|b| self.value(b).expect("index in range"))
            .collect()
    }
}

/// One user's analog design: a phase index per transmit and receive shifter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserDesign {
    pub tx_indices: Vec<u32>,
    pub rx_indices: Vec<u32>,
    pub bits: u32,
}

impl UserDesign {
    pub fn validate(&self) -> Result<()> {
        let size = 1u32 << self.bits;
        for &idx in self.tx_indices.iter().chain(&self.rx_indices) {
            if idx >= size {
                return Err(BeamformingError::PhaseIndexOutOfRange {
                    index: idx,
                    bits: self.bits,
                });
            }
        }
        if self.tx_indices.is_empty() || self.rx_indices.is_empty() {
            return Err(BeamformingError::InvalidArgument(
                "design must cover at least one shifter per end".into(),
            ));
        }
        Ok(())
    }
}

/// Multiuser analog design: exactly one phase index per shifter, the compact
/// form of the one-hot selection constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogDesign {
    pub users: Vec<UserDesign>,
    pub bits: u32,
}

impl AnalogDesign {
    pub fn new(users: Vec<UserDesign>) -> Result<Self> {
        if users.is_empty() {
            return Err(BeamformingError::InvalidArgument(
                "design must cover at least one user".into(),
            ));
        }
        let bits = users[0].bits;
        for u in &users {
            if u.bits != bits {
                return Err(BeamformingError::InvalidArgument(
                    "all users must share one phase resolution".into(),
                ));
            }
            u.validate()?;
        }
        Ok(Self { users, bits })
    }
}

/// Assembled hybrid beamformer satisfying the power constraint
/// `||F_RF F_BB||_F^2 = K`.
#[derive(Debug, Clone)]
pub struct HybridBeamformer {
    /// `N_t x K`, one constant-modulus column per user.
    pub f_rf: CMatrix,
    /// `K x K` baseband precoder, power-normalized.
    pub f_bb: CMatrix,
    /// Per-user receive combiners, length `N_r` each.
    pub w_rf: Vec<CVector>,
}

impl HybridBeamformer {
    /// Checks the constant-modulus and transmit-power invariants.
    pub fn validate(&self) -> Result<()> {
        let k = self.f_rf.cols();
        let tx_modulus = 1.0 / (self.f_rf.rows() as f64).sqrt();
        for z in self.f_rf.entries() {
            if (z.norm() - tx_modulus).abs() > 1e-9 {
                return Err(BeamformingError::InvalidArgument(format!(
                    "analog precoder entry modulus {} != {tx_modulus}",
                    z.norm()
                )));
            }
        }
        for w in &self.w_rf {
            let rx_modulus = 1.0 / (w.len() as f64).sqrt();
            for i in 0..w.len() {
                if (w.get(i).norm() - rx_modulus).abs() > 1e-9 {
                    return Err(BeamformingError::InvalidArgument(format!(
                        "combiner entry modulus {} != {rx_modulus}",
                        w.get(i).norm()
                    )));
                }
            }
        }
        let p = self.f_rf.matmul(&self.f_bb)?;
        let power = p.frobenius_norm().powi(2);
        if (power - k as f64).abs() > 1e-10 * (k as f64).max(1.0) {
            return Err(BeamformingError::InvalidArgument(format!(
                "||F_RF F_BB||_F^2 = {power}, expected {k}"
            )));
        }
        Ok(())
    }
}

/// Total transmit power, noise variance and user count for evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub power_total: f64,
    pub noise_var: f64,
    pub n_users: usize,
}

impl SystemConfig {
    pub fn new(power_total: f64, noise_var: f64, n_users: usize) -> Result<Self> {
        if !(power_total > 0.0) || !(noise_var > 0.0) || n_users == 0 {
            return Err(BeamformingError::InvalidArgument(format!(
                "need power > 0, noise > 0, users >= 1 (got {power_total}, {noise_var}, {n_users})"
            )));
        }
        Ok(Self {
            power_total,
            noise_var,
            n_users,
        })
    }

    /// Noise variance for an SNR point under `SNR = P / (K sigma^2)`.
    pub fn noise_var_for_snr_db(power_total: f64, n_users: usize, snr_db: f64) -> f64 {
        power_total / (n_users as f64 * 10f64.powf(snr_db / 10.0))
    }
}

/// Maps phase indices to complex shifter values.
pub fn realize_phase_vector(indices: &[u32], alphabet: &PhaseAlphabet) -> Result<CVector> {
    if indices.is_empty() {
        return Err(BeamformingError::InvalidArgument(
            "empty phase-index vector".into(),
        ));
    }
    let mut data = Vec::with_capacity(indices.len());
    for &b in indices {
        data.push(alphabet.value(b)?);
    }
    Ok(CVector::new(data)?)
}

/// Realizes a multiuser analog design: the `N_t x K` analog precoder whose
/// column `k` is user `k`'s precoder, plus the per-user combiners.
pub fn realize_analog(
    design: &AnalogDesign,
    tx_alphabet: &PhaseAlphabet,
    rx_alphabet: &PhaseAlphabet,
) -> Result<(CMatrix, Vec<CVector>)> {
    let mut tx_columns = Vec::with_capacity(design.users.len());
    let mut w_rf = Vec::with_capacity(design.users.len());
    for user in &design.users {
        tx_columns.push(realize_phase_vector(&user.tx_indices, tx_alphabet)?);
        w_rf.push(realize_phase_vector(&user.rx_indices, rx_alphabet)?);
    }
    Ok((CMatrix::from_columns(&tx_columns)?, w_rf))
}

/// Equivalent baseband channel: column `k` is
/// `h_eq_k = (w_k^H H_k F_RF)^H`, giving a `K x K` matrix for `K` users.
pub fn equivalent_channel(
    h: &ChannelSample,
    f_rf: &CMatrix,
    w_rf: &[CVector],
) -> Result<CMatrix> {
    if h.per_user.len() != w_rf.len() {
        return Err(BeamformingError::InvalidArgument(format!(
            "{} channels but {} combiners",
            h.per_user.len(),
            w_rf.len()
        )));
    }
    let mut columns = Vec::with_capacity(h.per_user.len());
    for (h_k, w_k) in h.per_user.iter().zip(w_rf) {
        let wh = w_k.as_column().hermitian(); // 1 x N_r
        let row = wh.matmul(h_k)?.matmul(f_rf)?; // 1 x K
        columns.push(row.hermitian().column(0)); // K x 1
    }
    Ok(CMatrix::from_columns(&columns)?)
}

/// MMSE baseband precoder
/// `F_BB = (H_eq H_eq^H + (K sigma^2 / P) F_RF^H F_RF)^{-1} H_eq`,
/// not yet power-normalized.
pub fn mmse_baseband(h_eq: &CMatrix, f_rf: &CMatrix, sys: &SystemConfig) -> Result<CMatrix> {
    let lhs = mmse_system_matrix(h_eq, f_rf, sys)?;
    Ok(lhs.inverse()?.matmul(h_eq)?)
}

/// MMSE precoder that survives an exactly singular system matrix.
///
/// Two users decoded onto an identical analog beam leave the system matrix
/// with a null space, but that null space is always orthogonal to `H_eq`
/// (both summands annihilate it), so the ridge limit is the minimum-norm
/// MMSE solution. A tiny diagonal ridge relative to the mean eigenvalue
/// realizes it; nonsingular systems take the exact path untouched.
pub fn mmse_baseband_min_norm(
    h_eq: &CMatrix,
    f_rf: &CMatrix,
    sys: &SystemConfig,
) -> Result<CMatrix> {
    let lhs = mmse_system_matrix(h_eq, f_rf, sys)?;
    match lhs.inverse() {
        Ok(inv) => Ok(inv.matmul(h_eq)?),
        Err(NumericsError::Singular { .. }) => {
            let k = lhs.rows();
            let mut trace = 0.0;
            for i in 0..k {
                trace += lhs.get(i, i).re;
            }
            let scale = (trace / k as f64).max(f64::MIN_POSITIVE);
            let mut last_err = None;
            for rel in [1e-9, 1e-6] {
                let ridged = lhs.add(&CMatrix::identity(k).scale(Complex64::new(
                    rel * scale,
                    0.0,
                )))?;
                match ridged.inverse() {
                    Ok(inv) => return Ok(inv.matmul(h_eq)?),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(last_err.expect("ridge attempted").into())
        }
        Err(e) => Err(e.into()),
    }
}

fn mmse_system_matrix(h_eq: &CMatrix, f_rf: &CMatrix, sys: &SystemConfig) -> Result<CMatrix> {
    let gram = h_eq.matmul(&h_eq.hermitian())?;
    let reg = f_rf.hermitian().matmul(f_rf)?;
    let weight = sys.n_users as f64 * sys.noise_var / sys.power_total;
    Ok(gram.add(&reg.scale(Complex64::new(weight, 0.0)))?)
}

/// Rescales `f_bb` by the single real scalar that makes
/// `||F_RF F_BB||_F^2 = k` hold exactly.
pub fn normalize_power(f_rf: &CMatrix, f_bb: &CMatrix, k: usize) -> Result<CMatrix> {
    let norm = f_rf.matmul(f_bb)?.frobenius_norm();
    if norm == 0.0 {
        return Err(BeamformingError::ZeroProduct);
    }
    let scale = (k as f64).sqrt() / norm;
    Ok(f_bb.scale(Complex64::new(scale, 0.0)))
}

/// SINR of one user with the baseband equalizer fixed to 1:
/// `(P/K) |w_k^H H_k F_RF f_k|^2` over
/// `(P/K) sum_{j != k} |w_k^H H_k F_RF f_j|^2 + sigma^2 ||w_k||^2`.
pub fn sinr(h: &ChannelSample, bf: &HybridBeamformer, sys: &SystemConfig, user: usize) -> f64 {
    let k = sys.n_users;
    let p_per_user = sys.power_total / k as f64;
    let w_k = &bf.w_rf[user];
    let h_k = &h.per_user[user];

    // Row vector w_k^H H_k F_RF, then one scalar per baseband column.
    let wh = w_k.as_column().hermitian();
    let row = wh
        .matmul(h_k)
        .and_then(|m| m.matmul(&bf.f_rf))
        .expect("beamformer dimensions consistent");

    let mut signal = 0.0;
    let mut interference = 0.0;
    for j in 0..k {
        let mut g = Complex64::new(0.0, 0.0);
        for m in 0..row.cols() {
            g += row.get(0, m) * bf.f_bb.get(m, j);
        }
        let power = g.norm_sqr();
        if j == user {
            signal = power;
        } else {
            interference += power;
        }
    }
    let noise = sys.noise_var * w_k.norm2().powi(2);
    p_per_user * signal / (p_per_user * interference + noise)
}

/// Sum-rate `sum_k log2(1 + SINR_k)`.
pub fn sum_rate(h: &ChannelSample, bf: &HybridBeamformer, sys: &SystemConfig) -> f64 {
    (0..sys.n_users)
        .map(|k| (1.0 + sinr(h, bf, sys, k)).log2())
        .sum()
}

/// Stage-one designer interface: map one user's channel to a discrete phase
/// design. Stochastic designers draw from the provided stream; the caller
/// seeds it per (sample, user) for reproducible parallel evaluation.
pub trait AnalogDesigner {
    fn design_user(
        &self,
        h_user: &CMatrix,
        tx_alphabet: &PhaseAlphabet,
        rx_alphabet: &PhaseAlphabet,
        stream: &mut ChaCha8Rng,
    ) -> Result<UserDesign>;

    /// Short name used in result tables.
    fn name(&self) -> String;
}

/// Runs both stages: per-user analog design, equivalent channel, MMSE
/// baseband precoder, power normalization. Propagates designer and
/// singularity errors.
pub fn two_stage_beamformer(
    h: &ChannelSample,
    designer: &dyn AnalogDesigner,
    sys: &SystemConfig,
    tx_alphabet: &PhaseAlphabet,
    rx_alphabet: &PhaseAlphabet,
    stream: &mut ChaCha8Rng,
) -> Result<HybridBeamformer> {
    two_stage_impl(h, designer, sys, tx_alphabet, rx_alphabet, stream, false)
}

/// [`two_stage_beamformer`] with the minimum-norm MMSE fallback, so that
/// samples where a designer puts several users on one beam still evaluate
/// (to a low sum-rate) instead of failing.
pub fn two_stage_beamformer_min_norm(
    h: &ChannelSample,
    designer: &dyn AnalogDesigner,
    sys: &SystemConfig,
    tx_alphabet: &PhaseAlphabet,
    rx_alphabet: &PhaseAlphabet,
    stream: &mut ChaCha8Rng,
) -> Result<HybridBeamformer> {
    two_stage_impl(h, designer, sys, tx_alphabet, rx_alphabet, stream, true)
}

fn two_stage_impl(
    h: &ChannelSample,
    designer: &dyn AnalogDesigner,
    sys: &SystemConfig,
    tx_alphabet: &PhaseAlphabet,
    rx_alphabet: &PhaseAlphabet,
    stream: &mut ChaCha8Rng,
    min_norm: bool,
) -> Result<HybridBeamformer> {
    if h.per_user.len() != sys.n_users {
        return Err(BeamformingError::InvalidArgument(format!(
            "channel has {} users but system expects {}",
            h.per_user.len(),
            sys.n_users
        )));
    }
    let mut users = Vec::with_capacity(sys.n_users);
    for h_k in &h.per_user {
        users.push(designer.design_user(h_k, tx_alphabet, rx_alphabet, stream)?);
    }
    let design = AnalogDesign::new(users)?;
    let (f_rf, w_rf) = realize_analog(&design, tx_alphabet, rx_alphabet)?;
    let h_eq = equivalent_channel(h, &f_rf, &w_rf)?;
    let f_bb = if min_norm {
        mmse_baseband_min_norm(&h_eq, &f_rf, sys)?
    } else {
        mmse_baseband(&h_eq, &f_rf, sys)?
    };
    let f_bb = normalize_power(&f_rf, &f_bb, sys.n_users)?;
    Ok(HybridBeamformer { f_rf, f_bb, w_rf })
}

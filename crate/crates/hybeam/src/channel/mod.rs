//! Clustered Saleh-Valenzuela channel generation for uniform planar arrays.
//!
//! Each user's channel is a sum of `L` rank-1 path contributions
//! `H = sqrt(N_t N_r / L) * sum_l alpha_l a_r(phi_r, theta_r) a_t^H(phi_t, theta_t)`
//! with i.i.d. unit-variance complex Gaussian path gains. Mean angles are
//! uniform over `[0, 2*pi)` per user and link end; individual paths scatter
//! around them with a Laplacian spread, the single-cluster structure of
//! clustered SV models. Every sample is drawn from its own RNG substream
//! (index = sample position), which makes datasets reproducible and order
//! independent.

mod io;

pub use io::{load_dataset, save_dataset, DatasetIoError};

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::numerics::CMatrix;
use crate::rng;

#[derive(Debug, thiserror::Error)]
pub enum ChannelError {
    #[error("element count {0} is not a perfect square")]
    NotSquareArray(usize),
    #[error("antenna spacing must be positive (got {0})")]
    BadSpacing(f64),
    #[error("{field} must be at least 1")]
    ZeroCount { field: &'static str },
    #[error("angle spread must be positive (got {0})")]
    BadSpread(f64),
    #[error("{side} geometry has {geometry} elements but the config says {config}")]
    GeometryMismatch {
        side: &'static str,
        geometry: usize,
        config: usize,
    },
}

/// Uniform planar array with `sqrt(N) x sqrt(N)` elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    n_elements: usize,
    side: usize,
    spacing_over_wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(n_elements: usize, spacing_over_wavelength: f64) -> Result<Self, ChannelError> {
        if n_elements == 0 {
            return Err(ChannelError::ZeroCount {
                field: "n_elements",
            });
        }
        let side = (n_elements as f64).sqrt().round() as usize;
        if side * side != n_elements {
            return Err(ChannelError::NotSquareArray(n_elements));
        }
        if !(spacing_over_wavelength > 0.0) {
            return Err(ChannelError::BadSpacing(spacing_over_wavelength));
        }
        Ok(Self {
            n_elements,
            side,
            spacing_over_wavelength,
        })
    }

    /// Half-wavelength spacing, the usual mmWave choice.
    pub fn half_wavelength(n_elements: usize) -> Result<Self, ChannelError> {
        Self::new(n_elements, 0.5)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn spacing_over_wavelength(&self) -> f64 {
        self.spacing_over_wavelength
    }
}

/// Interpretation of the configured angle spread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpreadConvention {
    /// Spread is the standard deviation; Laplacian scale `b = sigma/sqrt(2)`.
    #[default]
    StdDev,
    /// Spread is the Laplacian scale `b` itself.
    Scale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_users: usize,
    pub n_paths: usize,
    pub angle_spread_deg: f64,
    pub tx_geometry: ArrayGeometry,
    pub rx_geometry: ArrayGeometry,
    pub seed: u64,
    /// Draw an independent mean per path instead of one cluster mean per
    /// user and link end.
    pub per_path_means: bool,
    pub spread_convention: SpreadConvention,
}

impl ChannelConfig {
    /// Half-wavelength UPAs on both ends, single-cluster means, spread read
    /// as a standard deviation.
    pub fn new(
        n_tx: usize,
        n_rx: usize,
        n_users: usize,
        n_paths: usize,
        angle_spread_deg: f64,
        seed: u64,
    ) -> Result<Self, ChannelError> {
        let cfg = Self {
            n_tx,
            n_rx,
            n_users,
            n_paths,
            angle_spread_deg,
            tx_geometry: ArrayGeometry::half_wavelength(n_tx)?,
            rx_geometry: ArrayGeometry::half_wavelength(n_rx)?,
            seed,
            per_path_means: false,
            spread_convention: SpreadConvention::StdDev,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        for (field, v) in [
            ("n_tx", self.n_tx),
            ("n_rx", self.n_rx),
            ("n_users", self.n_users),
            ("n_paths", self.n_paths),
        ] {
            if v == 0 {
                return Err(ChannelError::ZeroCount { field });
            }
        }
        if !(self.angle_spread_deg > 0.0) {
            return Err(ChannelError::BadSpread(self.angle_spread_deg));
        }
        if self.tx_geometry.n_elements() != self.n_tx {
            return Err(ChannelError::GeometryMismatch {
                side: "tx",
                geometry: self.tx_geometry.n_elements(),
                config: self.n_tx,
            });
        }
        if self.rx_geometry.n_elements() != self.n_rx {
            return Err(ChannelError::GeometryMismatch {
                side: "rx",
                geometry: self.rx_geometry.n_elements(),
                config: self.n_rx,
            });
        }
        Ok(())
    }

    /// Laplacian scale in radians implied by the configured spread.
    fn laplace_scale_rad(&self) -> f64 {
        let spread_rad = self.angle_spread_deg.to_radians();
        match self.spread_convention {
            SpreadConvention::StdDev => spread_rad / std::f64::consts::SQRT_2,
            SpreadConvention::Scale => spread_rad,
        }
    }
}

/// One multiuser channel realization: `n_users` matrices of shape
/// `n_rx x n_tx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub per_user: Vec<CMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: ChannelConfig,
    pub samples: Vec<ChannelSample>,
}

/// One propagation path: complex gain plus departure/arrival angles in
/// radians.
#[derive(Debug, Clone, Copy)]
pub struct PathComponent {
    pub gain: Complex64,
    pub departure_azimuth: f64,
    pub departure_elevation: f64,
    pub arrival_azimuth: f64,
    pub arrival_elevation: f64,
}

/// UPA steering vector.
///
/// Entry `(m, n)` equals
/// `(1/sqrt(N)) * exp(j * 2*pi * (d/lambda) * (m sin(az) sin(el) + n cos(el)))`
/// for `m, n` in `0..sqrt(N)`, flattened with `m` as the outer index.
pub fn upa_response(geom: &ArrayGeometry, azimuth_rad: f64, elevation_rad: f64) -> crate::numerics::CVector {
    let side = geom.side();
    let norm = 1.0 / (geom.n_elements() as f64).sqrt();
    let base = std::f64::consts::TAU * geom.spacing_over_wavelength();
    let horiz = azimuth_rad.sin() * elevation_rad.sin();
    let vert = elevation_rad.cos();
    crate::numerics::CVector::from_fn(geom.n_elements(), |i| {
        let m = (i / side) as f64;
        let n = (i % side) as f64;
        let phase = base * (m * horiz + n * vert);
        Complex64::from_polar(norm, phase)
    })
}

/// Draws one path's azimuth/elevation around the given means. The spread is
/// the standard deviation in degrees of each Laplacian offset
/// (`b = spread * pi/180 / sqrt(2)`); the two angles are independent.
pub fn sample_path_angles(
    mean_azimuth: f64,
    mean_elevation: f64,
    spread_deg: f64,
    stream: &mut ChaCha8Rng,
) -> (f64, f64) {
    let b = spread_deg.to_radians() / std::f64::consts::SQRT_2;
    let az = mean_azimuth + rng::laplace(stream, b);
    let el = mean_elevation + rng::laplace(stream, b);
    (az, el)
}

/// Assembles a channel matrix from explicit path components:
/// `H = sqrt(N_t N_r / L) * sum_l gain_l a_r(arrival) a_t^H(departure)`.
pub fn assemble_channel(
    tx_geometry: &ArrayGeometry,
    rx_geometry: &ArrayGeometry,
    paths: &[PathComponent],
) -> CMatrix {
    assert!(!paths.is_empty(), "at least one path required");
    let n_tx = tx_geometry.n_elements();
    let n_rx = rx_geometry.n_elements();
    let scale = ((n_tx * n_rx) as f64 / paths.len() as f64).sqrt();
    let mut h = CMatrix::zeros(n_rx, n_tx);
    for p in paths {
        let a_r = upa_response(rx_geometry, p.arrival_azimuth, p.arrival_elevation);
        let a_t = upa_response(tx_geometry, p.departure_azimuth, p.departure_elevation);
        let contrib = a_r.outer(&a_t).scale(p.gain * scale);
        h = h.add(&contrib).expect("shapes agree");
    }
    h
}

/// Generates one multiuser channel realization from the given stream.
///
/// Per user, the draw order is fixed: four cluster means (departure azimuth,
/// departure elevation, arrival azimuth, arrival elevation, uniform over
/// `[0, 2*pi)`), then per path the Laplacian angle offsets in the same order
/// followed by the complex gain. With `per_path_means` the four means are
/// redrawn for every path.
pub fn generate_channel(config: &ChannelConfig, stream: &mut ChaCha8Rng) -> ChannelSample {
    let b = config.laplace_scale_rad();
    let mut per_user = Vec::with_capacity(config.n_users);
    for _ in 0..config.n_users {
        let mut means = [0.0; 4];
        if !config.per_path_means {
            for m in &mut means {
                *m = rng::uniform_angle(stream);
            }
        }
        let mut paths = Vec::with_capacity(config.n_paths);
        for _ in 0..config.n_paths {
            if config.per_path_means {
                for m in &mut means {
                    *m = rng::uniform_angle(stream);
                }
            }
            let departure_azimuth = means[0] + rng::laplace(stream, b);
            let departure_elevation = means[1] + rng::laplace(stream, b);
            let arrival_azimuth = means[2] + rng::laplace(stream, b);
            let arrival_elevation = means[3] + rng::laplace(stream, b);
            let gain = rng::complex_standard_normal(stream);
            paths.push(PathComponent {
                gain,
                departure_azimuth,
                departure_elevation,
                arrival_azimuth,
                arrival_elevation,
            });
        }
        per_user.push(assemble_channel(
            &config.tx_geometry,
            &config.rx_geometry,
            &paths,
        ));
    }
    ChannelSample { per_user }
}

/// Generates `n_samples` independent realizations. Sample `i` comes from
/// substream `i` of the config seed, so the result does not depend on
/// generation order.
pub fn generate_dataset(config: &ChannelConfig, n_samples: usize) -> Dataset {
    let samples = (0..n_samples)
        .map(|i| {
            let mut stream = rng::substream(config.seed, i as u64);
            generate_channel(config, &mut stream)
        })
        .collect();
    Dataset {
        config: config.clone(),
        samples,
    }
}

//! Binary dataset files.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic "HBFD" | version u32 |
//! n_tx u32 | n_rx u32 | n_users u32 | n_paths u32 |
//! angle_spread_deg f64 | tx d/lambda f64 | rx d/lambda f64 | seed u64 |
//! n_samples u64 |
//! samples: per sample, n_users matrices of n_rx*n_tx entries,
//!          row-major, each entry as f64 re then f64 im
//! ```
//!
//! Only the fields above are persisted; the sampling flags
//! (`per_path_means`, `spread_convention`) load as their defaults.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::numerics::CMatrix;

use super::{ArrayGeometry, ChannelConfig, ChannelError, ChannelSample, Dataset};

const MAGIC: &[u8; 4] = b"HBFD";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DatasetIoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic number (not a dataset file)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u32),
    #[error("file ends before the declared contents")]
    Truncated,
    #[error("header is internally inconsistent: {0}")]
    BadHeader(#[from] ChannelError),
    #[error("non-finite entry in stored sample")]
    CorruptEntry,
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DatasetIoError> {
    let mut w = BufWriter::new(File::create(path)?);
    let cfg = &dataset.config;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for v in [cfg.n_tx, cfg.n_rx, cfg.n_users, cfg.n_paths] {
        w.write_all(&(v as u32).to_le_bytes())?;
    }
    w.write_all(&cfg.angle_spread_deg.to_le_bytes())?;
    w.write_all(&cfg.tx_geometry.spacing_over_wavelength().to_le_bytes())?;
    w.write_all(&cfg.rx_geometry.spacing_over_wavelength().to_le_bytes())?;
    w.write_all(&cfg.seed.to_le_bytes())?;
    w.write_all(&(dataset.samples.len() as u64).to_le_bytes())?;
    for sample in &dataset.samples {
        for h in &sample.per_user {
            for z in h.entries() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetIoError> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(DatasetIoError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(DatasetIoError::BadVersion(version));
    }

    let n_tx = read_u32(&mut r)? as usize;
    let n_rx = read_u32(&mut r)? as usize;
    let n_users = read_u32(&mut r)? as usize;
    let n_paths = read_u32(&mut r)? as usize;
    let angle_spread_deg = read_f64(&mut r)?;
    let tx_spacing = read_f64(&mut r)?;
    let rx_spacing = read_f64(&mut r)?;
    let seed = read_u64(&mut r)?;
    let n_samples = read_u64(&mut r)? as usize;

    let config = ChannelConfig {
        n_tx,
        n_rx,
        n_users,
        n_paths,
        angle_spread_deg,
        tx_geometry: ArrayGeometry::new(n_tx, tx_spacing)?,
        rx_geometry: ArrayGeometry::new(n_rx, rx_spacing)?,
        seed,
        per_path_means: false,
        spread_convention: super::SpreadConvention::StdDev,
    };
    config.validate()?;

    let per_matrix = n_rx * n_tx;
    let mut samples = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut per_user = Vec::with_capacity(n_users);
        for _ in 0..n_users {
            let mut entries = Vec::with_capacity(per_matrix);
            for _ in 0..per_matrix {
                let re = read_f64(&mut r)?;
                let im = read_f64(&mut r)?;
                entries.push(Complex64::new(re, im));
            }
            let h = CMatrix::new(n_rx, n_tx, entries)
                .map_err(|_| DatasetIoError::CorruptEntry)?;
            per_user.push(h);
        }
        samples.push(ChannelSample { per_user });
    }
    Ok(Dataset { config, samples })
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<(), DatasetIoError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            DatasetIoError::Truncated
        } else {
            DatasetIoError::Io(e)
        }
    })
}

fn read_u32(r: &mut impl Read) -> Result<u32, DatasetIoError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64, DatasetIoError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64, DatasetIoError> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

//! Model checkpoints.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic "PCNW" | version u32 | n_tx u32 | n_rx u32 | standardize u32 |
//! rng_seed u64 | n_stages u32 |
//! per stage: n_layers u32 | width u32 | output_bits u32 | dropout_p f64 |
//!            n_skips u32 | (from u32, to u32)* |
//! parameters: every tensor in declaration order as f64
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{NetArchitecture, PcnetError, PcnetModel, Result, StageDescriptor};

const MAGIC: &[u8; 4] = b"PCNW";
const FORMAT_VERSION: u32 = 1;

pub fn save_model(model: &PcnetModel, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(model.arch.n_tx as u32).to_le_bytes())?;
    w.write_all(&(model.arch.n_rx as u32).to_le_bytes())?;
    w.write_all(&(model.arch.standardize_input as u32).to_le_bytes())?;
    w.write_all(&model.rng_seed.to_le_bytes())?;
    w.write_all(&(model.arch.stages.len() as u32).to_le_bytes())?;
    for st in &model.arch.stages {
        w.write_all(&(st.n_layers as u32).to_le_bytes())?;
        w.write_all(&(st.width as u32).to_le_bytes())?;
        w.write_all(&st.output_bits.to_le_bytes())?;
        w.write_all(&st.dropout_p.to_le_bytes())?;
        w.write_all(&(st.skips.len() as u32).to_le_bytes())?;
        for &(from, to) in &st.skips {
            w.write_all(&(from as u32).to_le_bytes())?;
            w.write_all(&(to as u32).to_le_bytes())?;
        }
    }
    for tensor in model.tensor_slices() {
        for &v in tensor {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PcnetModel> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(PcnetError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(PcnetError::BadVersion(version));
    }
    let n_tx = read_u32(&mut r)? as usize;
    let n_rx = read_u32(&mut r)? as usize;
    let standardize_input = read_u32(&mut r)? != 0;
    let rng_seed = read_u64(&mut r)?;
    let n_stages = read_u32(&mut r)? as usize;
    let mut stages = Vec::with_capacity(n_stages);
    for _ in 0..n_stages {
        let n_layers = read_u32(&mut r)? as usize;
        let width = read_u32(&mut r)? as usize;
        let output_bits = read_u32(&mut r)?;
        let dropout_p = read_f64(&mut r)?;
        let n_skips = read_u32(&mut r)? as usize;
        let mut skips = Vec::with_capacity(n_skips);
        for _ in 0..n_skips {
            let from = read_u32(&mut r)? as usize;
            let to = read_u32(&mut r)? as usize;
            skips.push((from, to));
        }
        stages.push(StageDescriptor {
            n_layers,
            width,
            dropout_p,
            output_bits,
            skips,
        });
    }
    let arch = NetArchitecture {
        n_tx,
        n_rx,
        stages,
        standardize_input,
    };
    arch.validate()
        .map_err(|e| PcnetError::ShapeMismatch(e.to_string()))?;

    // Fresh model gives the tensor shapes; overwrite with stored values.
    let mut model = PcnetModel::init(arch, rng_seed)?;
    for tensor in model.tensor_slices_mut() {
        for v in tensor.iter_mut() {
            *v = read_f64(&mut r)?;
        }
        if !tensor.iter().all(|x| x.is_finite()) {
            return Err(PcnetError::ShapeMismatch(
                "stored parameters contain non-finite values".into(),
            ));
        }
    }
    // Anything left over means the header lied about the shapes.
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(model),
        _ => Err(PcnetError::ShapeMismatch(
            "checkpoint holds more parameters than the architecture".into(),
        )),
    }
}

fn read_exact(r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            PcnetError::Truncated
        } else {
            PcnetError::Io(e)
        }
    })
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

//! One-hot decoding and the designer adapter for the evaluation pipeline.

use rand_chacha::ChaCha8Rng;

use super::{encode_input, forward_batch, real::RMatrix, Mode, PcnetModel};
use crate::beamforming::{AnalogDesigner, BeamformingError, PhaseAlphabet, UserDesign};
use crate::numerics::CMatrix;
use crate::rng;

/// Eval-mode forward followed by per-row argmax (ties to the smaller
/// index): the feasible discrete design at the requested resolution.
///
/// Only the stages up to the requested one are computed.
pub fn infer(model: &PcnetModel, h: &CMatrix, bits: u32) -> super::Result<UserDesign> {
    model.check_channel(h)?;
    let stage = model.arch.stage_with_bits(bits)?;
    let x = encode_input(h);
    let row = RMatrix {
        rows: 1,
        cols: x.len(),
        data: x,
    };
    let mut unused = rng::substream(0, 0);
    let trace = forward_batch(model, &row, Mode::Eval, &mut unused, stage + 1)?;
    let logits = trace.stages[stage].logits.row(0);
    let chunk = 1usize << bits;
    let pick = |offset: usize| -> u32 {
        let group = &logits[offset..offset + chunk];
        let mut best = 0usize;
        for (i, &v) in group.iter().enumerate() {
            if v > group[best] {
                best = i;
            }
        }
        best as u32
    };
    let tx_indices = (0..model.arch.n_tx).map(|r| pick(r * chunk)).collect();
    let rx_indices = (0..model.arch.n_rx)
        .map(|r| pick((model.arch.n_tx + r) * chunk))
        .collect();
    Ok(UserDesign {
        tx_indices,
        rx_indices,
        bits,
    })
}

/// A trained network acting as a stage-one designer at one resolution.
#[derive(Debug, Clone)]
pub struct PcnetDesigner {
    pub model: PcnetModel,
    pub bits: u32,
}

impl AnalogDesigner for PcnetDesigner {
    fn design_user(
        &self,
        h_user: &CMatrix,
        tx_alphabet: &PhaseAlphabet,
        rx_alphabet: &PhaseAlphabet,
        _stream: &mut ChaCha8Rng,
    ) -> crate::beamforming::Result<UserDesign> {
        if tx_alphabet.bits() != self.bits || rx_alphabet.bits() != self.bits {
            return Err(BeamformingError::Designer(format!(
                "model decodes {}-bit phases but the alphabets are {}/{}-bit",
                self.bits,
                tx_alphabet.bits(),
                rx_alphabet.bits()
            )));
        }
        infer(&self.model, h_user, self.bits)
            .map_err(|e| BeamformingError::Designer(e.to_string()))
    }

    fn name(&self) -> String {
        "pcnet".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcnet::NetArchitecture;

    fn tiny_model() -> PcnetModel {
        let mut arch = NetArchitecture::new(4, 4, &[12, 12]).unwrap();
        for st in arch.stages.iter_mut() {
            st.n_layers = 2;
            st.dropout_p = 0.0;
            st.skips = crate::pcnet::default_skips(2);
        }
        PcnetModel::init(arch, 2).unwrap()
    }

    fn random_channel(seed: u64) -> CMatrix {
        let mut s = rng::substream(seed, 0);
        CMatrix::from_fn(4, 4, |_, _| rng::complex_standard_normal(&mut s))
    }

    #[test]
    fn decoded_indices_are_in_range_for_each_stage() {
        let model = tiny_model();
        for seed in 0..5 {
            let h = random_channel(seed);
            for bits in [2u32, 3] {
                let d = infer(&model, &h, bits).unwrap();
                assert_eq!(d.tx_indices.len(), 4);
                assert_eq!(d.rx_indices.len(), 4);
                let size = 1u32 << bits;
                assert!(d.tx_indices.iter().all(|&i| i < size));
                assert!(d.rx_indices.iter().all(|&i| i < size));
            }
        }
    }

    #[test]
    fn missing_stage_is_an_error() {
        let model = tiny_model();
        let h = random_channel(0);
        assert!(matches!(
            infer(&model, &h, 7),
            Err(crate::pcnet::PcnetError::NoSuchStage(7))
        ));
    }

    #[test]
    fn saturated_logits_decode_to_the_saturating_phase() {
        let mut model = tiny_model();
        let out = &mut model.stages[0].output;
        for v in out.weight.data.iter_mut() {
            *v = 0.0;
        }
        let chunk = 4;
        for r in 0..out.bias.len() / chunk {
            for s in 0..chunk {
                out.bias[r * chunk + s] = if s == (r % chunk) { 50.0 } else { 0.0 };
            }
        }
        let d = infer(&model, &random_channel(3), 2).unwrap();
        for (r, &idx) in d.tx_indices.iter().enumerate() {
            assert_eq!(idx, (r % chunk) as u32);
        }
        for (r, &idx) in d.rx_indices.iter().enumerate() {
            assert_eq!(idx, ((4 + r) % chunk) as u32);
        }
    }

    #[test]
    fn argmax_is_invariant_to_per_row_logit_shifts() {
        let model = tiny_model();
        let h = random_channel(9);
        let before = infer(&model, &h, 2).unwrap();
        let mut shifted = model.clone();
        let chunk = 4;
        let out = &mut shifted.stages[0].output;
        for r in 0..out.bias.len() / chunk {
            for s in 0..chunk {
                out.bias[r * chunk + s] += 3.25 * (r as f64 + 1.0);
            }
        }
        let after = infer(&shifted, &h, 2).unwrap();
        assert_eq!(before, after);
    }
}

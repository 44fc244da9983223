//! Designer-level oracle comparisons and Monte-Carlo orderings.

mod common;

use hybeam::baselines::{
    cross_entropy_search, exhaustive_designer, objective, objective_of_vectors, phase_project,
    quantize_phases, random_designer, svd_designer, CrossEntropyConfig, ObjectiveInstance,
    SvdPrecoderRule,
};
use hybeam::beamforming::{PhaseAlphabet, UserDesign};
use hybeam::channel::{generate_channel, upa_response, ArrayGeometry, ChannelConfig};
use hybeam::numerics::CVector;
use hybeam::rng;
use num_complex::Complex64;
use proptest::prelude::*;

fn instance(n_tx: usize, n_rx: usize, bits: u32, seed: u64) -> ObjectiveInstance {
    ObjectiveInstance::new(
        common::random_cmatrix(n_rx, n_tx, seed),
        PhaseAlphabet::for_array(bits, n_tx).unwrap(),
        PhaseAlphabet::for_array(bits, n_rx).unwrap(),
    )
}

#[test]
fn matched_filter_objective_reaches_the_rank_one_bound() {
    // Single-path channel: continuous phase-matched vectors achieve exactly
    // sqrt(N_t N_r).
    let tx_geom = ArrayGeometry::new(16, 0.5).unwrap();
    let rx_geom = ArrayGeometry::new(4, 0.5).unwrap();
    let a_t = upa_response(&tx_geom, 0.9, 1.7);
    let a_r = upa_response(&rx_geom, 2.4, 0.6);
    let h = a_r.outer(&a_t).scale(Complex64::new(8.0, 0.0)); // sqrt(16*4)

    let w = phase_project(&a_r, 1.0 / 2.0);
    let f = phase_project(&a_t, 1.0 / 4.0);
    let gain = objective_of_vectors(&h, &w, &f);
    assert!(
        (gain - 8.0).abs() < 1e-12,
        "matched continuous gain {gain} vs 8"
    );
}

#[test]
fn quantized_svd_approaches_the_matched_filter_at_high_resolution() {
    // Rank-1 channel, 16-bit phases: within 0.1% of sqrt(N_t N_r).
    let tx_geom = ArrayGeometry::new(16, 0.5).unwrap();
    let rx_geom = ArrayGeometry::new(4, 0.5).unwrap();
    let a_t = upa_response(&tx_geom, 0.9, 1.7);
    let a_r = upa_response(&rx_geom, 2.4, 0.6);
    let h = a_r.outer(&a_t).scale(Complex64::new(8.0, 0.0));
    let inst = ObjectiveInstance::new(
        h,
        PhaseAlphabet::for_array(16, 16).unwrap(),
        PhaseAlphabet::for_array(16, 4).unwrap(),
    );
    let design = svd_designer(&inst, SvdPrecoderRule::MatchedPhase).unwrap();
    let gain = objective(&inst, &design);
    assert!(gain >= 8.0 * 0.999, "high-resolution gain {gain}");
}

#[test]
fn objective_matches_full_enumeration_table_at_one_bit() {
    // N_t = N_r = 2, B = 1: all 16 designs enumerated by hand.
    let inst = instance(2, 2, 1, 71);
    let mut table_best = f64::NEG_INFINITY;
    for code in 0..16u32 {
        let design = UserDesign {
            tx_indices: vec![code & 1, (code >> 1) & 1],
            rx_indices: vec![(code >> 2) & 1, (code >> 3) & 1],
            bits: 1,
        };
        // Independent scalar evaluation of |w^H H f|.
        let m = 1.0 / 2f64.sqrt();
        let val = |b: u32| -> Complex64 {
            Complex64::from_polar(m, std::f64::consts::PI * b as f64)
        };
        let f = [val(design.tx_indices[0]), val(design.tx_indices[1])];
        let w = [val(design.rx_indices[0]), val(design.rx_indices[1])];
        let mut z = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                z += w[i].conj() * inst.h.get(i, j) * f[j];
            }
        }
        let by_hand = z.norm();
        let by_lib = objective(&inst, &design);
        assert!((by_hand - by_lib).abs() < 1e-12);
        table_best = table_best.max(by_hand);
    }
    let opt = objective(&inst, &exhaustive_designer(&inst).unwrap());
    assert!((opt - table_best).abs() < 1e-12);
}

#[test]
fn cross_entropy_finds_the_exhaustive_optimum_on_tiny_instances() {
    // The reference hyperparameters (20 iterations, 150 candidates,
    // smoothing 0.8) with a 10% elite share; 200 seeded channels.
    let cfg = CrossEntropyConfig {
        n_iters: 20,
        n_candidates: 150,
        elite_fraction: 0.1,
        smoothing: 0.8,
        seed: 0,
    };
    let mut hits = 0;
    let n_trials = 200;
    for seed in 0..n_trials {
        let inst = instance(2, 2, 1, 40_000 + seed);
        let optimum = objective(&inst, &exhaustive_designer(&inst).unwrap());
        let mut stream = rng::substream(12, seed);
        let found = cross_entropy_search(&inst, &cfg, &mut stream).unwrap().objective;
        if found >= optimum - 1e-9 {
            hits += 1;
        }
    }
    assert!(
        hits * 100 >= 95 * n_trials,
        "cross-entropy hit the optimum on {hits}/{n_trials} trials"
    );
}

#[test]
fn svd_dominates_random_on_most_channels() {
    // Clustered channels, B = 2: quantized SVD beats a random design on at
    // least 90% of instances.
    let cfg = ChannelConfig::new(16, 4, 1, 10, 10.0, 8_080).unwrap();
    let tx = PhaseAlphabet::for_array(2, 16).unwrap();
    let rx = PhaseAlphabet::for_array(2, 4).unwrap();
    let mut wins = 0;
    let n = 1000;
    for i in 0..n {
        let mut stream = rng::substream(cfg.seed, i as u64);
        let sample = generate_channel(&cfg, &mut stream);
        let inst = ObjectiveInstance::new(sample.per_user[0].clone(), tx, rx);
        let svd = objective(&inst, &svd_designer(&inst, SvdPrecoderRule::MatchedPhase).unwrap());
        let mut rnd_stream = rng::substream(1_234, i as u64);
        let rnd = objective(&inst, &random_designer(&inst, &mut rnd_stream));
        if svd >= rnd {
            wins += 1;
        }
    }
    assert!(wins * 100 >= 90 * n, "svd won only {wins}/{n}");
}

#[test]
fn every_designer_is_bounded_by_the_exhaustive_optimum() {
    for seed in 0..50 {
        let inst = instance(2, 2, 2, 60_000 + seed);
        let optimum = objective(&inst, &exhaustive_designer(&inst).unwrap());
        let svd = objective(&inst, &svd_designer(&inst, SvdPrecoderRule::MatchedPhase).unwrap());
        let alt = objective(&inst, &svd_designer(&inst, SvdPrecoderRule::RightSingular).unwrap());
        let mut stream = rng::substream(61_000, seed);
        let rnd = objective(&inst, &random_designer(&inst, &mut stream));
        let mut ce_stream = rng::substream(62_000, seed);
        let ce = cross_entropy_search(&inst, &CrossEntropyConfig::default(), &mut ce_stream)
            .unwrap()
            .objective;
        for (name, v) in [("svd", svd), ("svd-right", alt), ("random", rnd), ("ce", ce)] {
            assert!(v <= optimum + 1e-9, "{name} {v} beat the optimum {optimum}");
        }
    }
}

#[test]
fn quantized_svd_improves_with_resolution_on_average() {
    // Per instance quantization refinement is not monotone; the average
    // over 1000 fixed channels must be nondecreasing within 1% noise.
    let cfg = ChannelConfig::new(16, 4, 1, 10, 10.0, 777).unwrap();
    let mut means = Vec::new();
    for bits in 1..=4u32 {
        let tx = PhaseAlphabet::for_array(bits, 16).unwrap();
        let rx = PhaseAlphabet::for_array(bits, 4).unwrap();
        let mut acc = 0.0;
        let n = 1000;
        for i in 0..n {
            let mut stream = rng::substream(cfg.seed, i as u64);
            let sample = generate_channel(&cfg, &mut stream);
            let inst = ObjectiveInstance::new(sample.per_user[0].clone(), tx, rx);
            acc += objective(&inst, &svd_designer(&inst, SvdPrecoderRule::MatchedPhase).unwrap());
        }
        means.push(acc / n as f64);
    }
    for pair in means.windows(2) {
        assert!(
            pair[1] >= pair[0] * 0.99,
            "average dropped across resolutions: {means:?}"
        );
    }
}

#[test]
fn mean_random_objective_is_positive_on_nonzero_channels() {
    let mut acc = 0.0;
    let n = 200;
    for seed in 0..n {
        let inst = instance(4, 4, 2, 70_000 + seed);
        let mut stream = rng::substream(71_000, seed);
        acc += objective(&inst, &random_designer(&inst, &mut stream));
    }
    assert!(acc / n as f64 > 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quantize_inverts_realize(seed in 0u64..1_000, bits in 1u32..5) {
        let n = 6usize;
        let alphabet = PhaseAlphabet::for_array(bits, n).unwrap();
        let mut stream = rng::substream(seed, 3);
        let indices: Vec<u32> = (0..n)
            .map(|_| rng::uniform_index(&mut stream, alphabet.size()) as u32)
            .collect();
        let realized =
            hybeam::beamforming::realize_phase_vector(&indices, &alphabet).unwrap();
        prop_assert_eq!(quantize_phases(&realized, &alphabet), indices);
    }

    #[test]
    fn phase_projection_preserves_modulus(seed in 0u64..1_000) {
        let mut stream = rng::substream(seed, 4);
        let v = CVector::from_fn(5, |_| rng::complex_standard_normal(&mut stream));
        let p = phase_project(&v, 0.5);
        for i in 0..5 {
            prop_assert!((p.get(i).norm() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn objective_is_invariant_under_global_channel_phase(seed in 0u64..500, gamma in 0.0..std::f64::consts::TAU) {
        let inst = instance(3, 2, 2, seed);
        let design = UserDesign {
            tx_indices: vec![1, 2, 0],
            rx_indices: vec![3, 1],
            bits: 2,
        };
        let base = objective(&inst, &design);
        let rotated = ObjectiveInstance::new(
            inst.h.scale(Complex64::from_polar(1.0, gamma)),
            inst.tx_alphabet,
            inst.rx_alphabet,
        );
        let rot = objective(&rotated, &design);
        prop_assert!((base - rot).abs() <= 1e-10 * base.max(1.0));
    }
}

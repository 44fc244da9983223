//! Compares the stage-one designers on the per-user beamforming gain
//! `|w^H H f|`, optionally including a trained network checkpoint.
//!
//! ```bash
//! cargo run --release --example designer_shootout -- [n_channels] [model.pcnw] [bits]
//! ```

use hybeam::baselines::{
    cross_entropy_search, objective, random_designer, svd_designer, CrossEntropyConfig,
    ObjectiveInstance, SvdPrecoderRule,
};
use hybeam::beamforming::PhaseAlphabet;
use hybeam::channel::{generate_channel, ChannelConfig};
use hybeam::pcnet;
use hybeam::rng;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n_channels: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let model = args.get(2).map(|p| pcnet::load_model(p).expect("load model"));
    let bits: u32 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2);

    let (n_tx, n_rx) = match &model {
        Some(m) => (m.arch.n_tx, m.arch.n_rx),
        None => (16, 4),
    };
    let channel_cfg = ChannelConfig::new(n_tx, n_rx, 1, 10, 10.0, 2024).expect("config");
    let tx_alphabet = PhaseAlphabet::for_array(bits, n_tx).unwrap();
    let rx_alphabet = PhaseAlphabet::for_array(bits, n_rx).unwrap();

    let ce_cfg = CrossEntropyConfig {
        n_iters: if bits >= 3 { 30 } else { 20 },
        ..CrossEntropyConfig::default()
    };

    let mut sums: Vec<(&str, f64)> = vec![
        ("svd", 0.0),
        ("cross-entropy", 0.0),
        ("random", 0.0),
        ("pcnet", 0.0),
        ("sigma_max", 0.0),
    ];
    for i in 0..n_channels {
        let mut stream = rng::substream(channel_cfg.seed, i as u64);
        let sample = generate_channel(&channel_cfg, &mut stream);
        let h = sample.per_user[0].clone();
        let inst = ObjectiveInstance::new(h.clone(), tx_alphabet, rx_alphabet);

        let svd = objective(&inst, &svd_designer(&inst, SvdPrecoderRule::MatchedPhase).unwrap());
        let mut ce_stream = rng::substream(7, i as u64);
        let ce = cross_entropy_search(&inst, &ce_cfg, &mut ce_stream)
            .unwrap()
            .objective;
        let mut rnd_stream = rng::substream(8, i as u64);
        let rnd = objective(&inst, &random_designer(&inst, &mut rnd_stream));
        let net = match &model {
            Some(m) => objective(&inst, &pcnet::infer(m, &h, bits).expect("infer")),
            None => 0.0,
        };
        let sigma = hybeam::numerics::dominant_singular_pair(&h, 1e-9, 2000)
            .map(|p| p.value)
            .unwrap_or(0.0);

        for (name, acc) in sums.iter_mut() {
            *acc += match *name {
                "svd" => svd,
                "cross-entropy" => ce,
                "random" => rnd,
                "pcnet" => net,
                _ => sigma,
            };
        }
    }

    println!("mean |w^H H f| over {n_channels} channels ({n_rx}x{n_tx}, B={bits}):");
    for (name, acc) in &sums {
        if *name == "pcnet" && model.is_none() {
            continue;
        }
        println!("  {:<14} {:.4}", name, acc / n_channels as f64);
    }
}

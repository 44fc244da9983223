//! Sanity check of the training loop: a tiny network trained on a single
//! channel should drive its decoded design close to the exhaustive optimum.
//!
//! ```bash
//! cargo run --release --example overfit_one_sample -- [steps] [lr]
//! ```

use hybeam::baselines::{exhaustive_designer, objective, ObjectiveInstance};
use hybeam::beamforming::PhaseAlphabet;
use hybeam::channel::{generate_channel, ChannelConfig, ChannelSample, Dataset};
use hybeam::pcnet::{infer, train, NetArchitecture, PcnetModel, TrainConfig};
use hybeam::rng;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let steps: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let lr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3e-3);

    let channel_cfg = ChannelConfig::new(4, 4, 1, 3, 10.0, 99).expect("config");
    let mut stream = rng::substream(channel_cfg.seed, 0);
    let sample = generate_channel(&channel_cfg, &mut stream);
    let h = sample.per_user[0].clone();

    let inst = ObjectiveInstance::new(
        h.clone(),
        PhaseAlphabet::for_array(2, 4).unwrap(),
        PhaseAlphabet::for_array(2, 4).unwrap(),
    );
    let optimum = objective(&inst, &exhaustive_designer(&inst).expect("tiny instance"));
    println!("exhaustive optimum |w^H H f| = {optimum:.5}");

    let mut arch = NetArchitecture::new(4, 4, &[16]).unwrap();
    arch.stages[0].n_layers = 2;
    arch.stages[0].dropout_p = 0.0;
    arch.stages[0].skips = hybeam::pcnet::default_skips(2);
    let model = PcnetModel::init(arch, 1).unwrap();

    let data = Dataset {
        config: channel_cfg.clone(),
        samples: vec![ChannelSample {
            per_user: vec![h.clone()],
        }],
    };
    // One row per epoch at batch size 1: epochs = optimizer steps.
    let cfg = TrainConfig {
        learning_rate: lr,
        batch_size: 1,
        n_epochs: steps,
        seed: 3,
        ..TrainConfig::default()
    };
    let outcome = train(&model, &data, &cfg, &data).expect("training");

    for row in outcome.history.iter().step_by((steps / 10).max(1)) {
        println!(
            "step {:>5}  train {:+.5}  val {:+.5}",
            row.epoch, row.train_loss, row.val_loss
        );
    }
    let decoded = infer(&outcome.model, &h, 2).expect("infer");
    let achieved = objective(&inst, &decoded);
    println!(
        "decoded objective {achieved:.5} ({:.1}% of optimum)",
        100.0 * achieved / optimum
    );
}

//! Times the end-to-end beamformer construction per designer at a chosen
//! scale (stage-one design for every user plus the MMSE stage).
//!
//! ```bash
//! cargo run --release --example bench_designers -- [model.pcnw] [n_timed]
//! ```
//!
//! Without a checkpoint the network is freshly initialized: timing does not
//! depend on the weights.

use hybeam::harness::{cmd_bench, DesignerSpec, ExperimentConfig, Scale};
use hybeam::pcnet::{save_model, NetArchitecture, PcnetModel};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mut cfg = ExperimentConfig::preset(Scale::Desk);
    cfg.experiment.n_timed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(30);
    cfg.designers = vec![
        DesignerSpec::named("pcnet"),
        DesignerSpec::named("svd"),
        DesignerSpec::named("cross-entropy"),
        DesignerSpec::named("random"),
    ];

    let tmp = std::env::temp_dir().join("hybeam_bench");
    std::fs::create_dir_all(&tmp).expect("temp dir");
    let model_path = match args.get(1) {
        Some(p) => std::path::PathBuf::from(p),
        None => {
            let arch = NetArchitecture {
                n_tx: cfg.channel.n_tx,
                n_rx: cfg.channel.n_rx,
                stages: ExperimentConfig::preset(Scale::Desk)
                    .pcnet
                    .to_architecture(cfg.channel.n_tx, cfg.channel.n_rx)
                    .expect("arch")
                    .stages,
                standardize_input: false,
            };
            let model = PcnetModel::init(arch, 0).expect("init");
            let path = tmp.join("fresh.pcnw");
            save_model(&model, &path).expect("save");
            path
        }
    };

    let rows = cmd_bench(&cfg, Some(&model_path), &tmp.join("bench.csv")).expect("bench");
    println!(
        "per-sample construction time at {}x{} antennas, K={} (n={}):",
        cfg.channel.n_rx, cfg.channel.n_tx, cfg.channel.n_users, cfg.experiment.n_timed
    );
    for r in &rows {
        println!(
            "  {:<14} B={}  {:>9.4} ms +- {:.4}",
            r.designer, r.bits, r.mean_ms, r.std_ms
        );
    }
}

//! Writes a seeded channel dataset to disk and reads it back.
//!
//! ```bash
//! cargo run --release --example generate_dataset -- [n_samples] [path]
//! ```

use hybeam::channel::{generate_dataset, load_dataset, save_dataset, ChannelConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n_samples: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let path = args
        .get(2)
        .cloned()
        .unwrap_or_else(|| "channels.hbfd".to_string());

    let cfg = ChannelConfig::new(16, 4, 2, 10, 10.0, 42).expect("config");
    let dataset = generate_dataset(&cfg, n_samples);
    save_dataset(&dataset, &path).expect("save");

    let loaded = load_dataset(&path).expect("load");
    assert_eq!(dataset, loaded, "round trip must be bit exact");
    let bytes = std::fs::metadata(&path).expect("metadata").len();
    println!(
        "wrote {n_samples} samples ({} users of {}x{}) to {path}: {bytes} bytes, round trip ok",
        cfg.n_users, cfg.n_rx, cfg.n_tx
    );
}

//! Verifies the clustered channel model's first moments empirically:
//! entrywise zero mean, `E||H||_F^2 = N_t N_r`, and the configured angular
//! spread.

use hybeam::channel::{generate_channel, sample_path_angles, ChannelConfig};
use hybeam::rng;

fn main() {
    let cfg = ChannelConfig::new(16, 4, 1, 10, 10.0, 7).expect("config");
    let n = 20_000;

    let mut power = 0.0;
    let mut mean_re = 0.0;
    for i in 0..n {
        let mut stream = rng::substream(cfg.seed, i as u64);
        let h = &generate_channel(&cfg, &mut stream).per_user[0];
        power += h.frobenius_norm().powi(2);
        mean_re += h.entries().iter().map(|z| z.re).sum::<f64>();
    }
    let n_entries = (cfg.n_tx * cfg.n_rx) as f64;
    println!("channels: {n} of {}x{}, L = {}", cfg.n_rx, cfg.n_tx, cfg.n_paths);
    println!(
        "  E||H||_F^2 / (N_t N_r) = {:.4}   (expect 1.0)",
        power / n as f64 / n_entries
    );
    println!(
        "  mean real part         = {:+.5}  (expect ~0)",
        mean_re / (n as f64 * n_entries)
    );

    let mut stream = rng::substream(99, 0);
    let draws = 100_000;
    let mut acc = 0.0;
    let mut acc_sq = 0.0;
    for _ in 0..draws {
        let (az, _) = sample_path_angles(0.0, 0.0, cfg.angle_spread_deg, &mut stream);
        acc += az;
        acc_sq += az * az;
    }
    let mean = acc / draws as f64;
    let std = (acc_sq / draws as f64 - mean * mean).sqrt().to_degrees();
    println!(
        "  angle spread           = {std:.3} deg (configured {} deg)",
        cfg.angle_spread_deg
    );
}

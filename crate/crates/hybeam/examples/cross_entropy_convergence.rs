//! Shows the cross-entropy search sharpening its per-shifter distributions:
//! best objective per iteration against the exhaustive optimum.
//!
//! ```bash
//! cargo run --release --example cross_entropy_convergence -- [seed]
//! ```

use hybeam::baselines::{
    cross_entropy_search, exhaustive_designer, objective, CrossEntropyConfig, ObjectiveInstance,
};
use hybeam::beamforming::PhaseAlphabet;
use hybeam::numerics::CMatrix;
use hybeam::rng;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);

    // 4x4 at B=2 keeps the exhaustive reference feasible (2^16 designs).
    let mut stream = rng::substream(seed, 0);
    let h = CMatrix::from_fn(4, 4, |_, _| rng::complex_standard_normal(&mut stream));
    let inst = ObjectiveInstance::new(
        h,
        PhaseAlphabet::for_array(2, 4).unwrap(),
        PhaseAlphabet::for_array(2, 4).unwrap(),
    );
    let optimum = objective(&inst, &exhaustive_designer(&inst).expect("guarded size"));

    let cfg = CrossEntropyConfig {
        seed,
        ..CrossEntropyConfig::default()
    };
    let mut search_stream = rng::substream(cfg.seed, 1);
    let outcome = cross_entropy_search(&inst, &cfg, &mut search_stream).expect("search");

    println!("exhaustive optimum: {optimum:.5}");
    for (i, best) in outcome.best_per_iteration.iter().enumerate() {
        println!(
            "iter {:>2}: best {:.5} ({:.1}%)",
            i + 1,
            best,
            100.0 * best / optimum
        );
    }
    let sharp = outcome
        .final_distributions
        .iter()
        .map(|d| d.iter().cloned().fold(0.0, f64::max))
        .sum::<f64>()
        / outcome.final_distributions.len() as f64;
    println!("mean max-probability per shifter after 20 iterations: {sharp:.3}");
}

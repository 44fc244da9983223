//! Small end-to-end experiment: generate datasets, train the network
//! briefly, then sweep sum-rate over SNR for every configured designer.
//! Writes the same CSVs as the `hybeam` binary.
//!
//! ```bash
//! cargo run --release --example train_and_evaluate -- [out_dir]
//! ```

use hybeam::harness::{cmd_evaluate, cmd_generate, cmd_train, ExperimentConfig, Scale};

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "train_and_evaluate_out".to_string());
    let out = std::path::PathBuf::from(out);

    let mut cfg = ExperimentConfig::preset(Scale::Tiny);
    cfg.experiment.output_dir = out.clone();
    cfg.data.n_train = 512;
    cfg.data.n_val = 64;
    cfg.data.n_test = 128;
    cfg.train.n_epochs = 6;
    cfg.experiment.n_eval_samples = 128;
    cfg.experiment.snr_grid_db = vec![-5.0, 0.0, 5.0, 10.0];

    let paths = cmd_generate(&cfg, &out).expect("generate");
    println!("datasets under {}", out.display());

    let model_path = out.join("pcnet.pcnw");
    let summary = cmd_train(
        &cfg,
        &paths.train,
        &paths.val,
        &model_path,
        &out.join("history.csv"),
    )
    .expect("train");
    println!(
        "trained {} epochs, best validation loss {:.4} at epoch {}",
        summary.n_epochs, summary.best_val_loss, summary.best_epoch
    );

    let rows = cmd_evaluate(
        &cfg,
        Some(&paths.test),
        Some(&model_path),
        &out.join("results.csv"),
    )
    .expect("evaluate");
    println!("\ndesigner        B  snr_db   mean sum-rate (bits/s/Hz)");
    for r in &rows {
        println!(
            "{:<14} {:>2} {:>7.1}   {:.3} +- {:.3}",
            r.designer, r.bits, r.snr_db, r.mean_sum_rate, r.std_err
        );
    }
}

//! End-to-end checks of the experiment commands and the CLI binary.

use std::path::Path;
use std::process::Command;

use hybeam::channel::load_dataset;
use hybeam::harness::{
    cmd_bench, cmd_evaluate, cmd_generate, cmd_train, DesignerSpec, ExperimentConfig, Scale,
};

fn tiny_config(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(Scale::Tiny);
    cfg.experiment.output_dir = out.to_path_buf();
    cfg
}

#[test]
fn generate_writes_three_loadable_disjoint_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let paths = cmd_generate(&cfg, dir.path()).unwrap();
    let train = load_dataset(&paths.train).unwrap();
    let val = load_dataset(&paths.val).unwrap();
    let test = load_dataset(&paths.test).unwrap();
    assert_eq!(train.samples.len(), cfg.data.n_train);
    assert_eq!(val.samples.len(), cfg.data.n_val);
    assert_eq!(test.samples.len(), cfg.data.n_test);
    // Disjoint substreams: the first samples all differ.
    assert_ne!(train.samples[0], val.samples[0]);
    assert_ne!(val.samples[0], test.samples[0]);
}

#[test]
fn generate_is_reproducible_bytewise() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir_a.path());
    cmd_generate(&cfg, dir_a.path()).unwrap();
    cmd_generate(&cfg, dir_b.path()).unwrap();
    for name in ["train.hbfd", "val.hbfd", "test.hbfd"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn train_writes_model_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(dir.path());
    cfg.data.n_train = 16;
    cfg.data.n_val = 8;
    cfg.train.n_epochs = 2;
    let paths = cmd_generate(&cfg, dir.path()).unwrap();
    let model_out = dir.path().join("pcnet.pcnw");
    let history_out = dir.path().join("history.csv");
    let summary = cmd_train(&cfg, &paths.train, &paths.val, &model_out, &history_out).unwrap();
    assert_eq!(summary.n_epochs, 2);
    assert!(summary.best_val_loss.is_finite());
    assert!(model_out.exists());

    let history = std::fs::read_to_string(&history_out).unwrap();
    let lines: Vec<&str> = history.lines().collect();
    assert!(lines[0].starts_with("# config_hash="));
    assert_eq!(lines[1], "epoch,train_loss,val_loss");
    assert_eq!(lines.len(), 2 + cfg.train.n_epochs);
    for line in &lines[2..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        assert!(fields[2].parse::<f64>().unwrap().is_finite());
    }

    hybeam::pcnet::load_model(&model_out).unwrap();
}

#[test]
fn evaluate_orders_random_below_exhaustive_and_is_snr_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(dir.path());
    cfg.designers = vec![DesignerSpec::named("exhaustive"), DesignerSpec::named("random")];
    cfg.experiment.snr_grid_db = vec![-5.0, 0.0, 5.0, 10.0];
    cfg.experiment.n_eval_samples = 64;
    cfg.data.n_test = 64;
    let paths = cmd_generate(&cfg, dir.path()).unwrap();
    let out_csv = dir.path().join("results.csv");
    let rows = cmd_evaluate(&cfg, Some(&paths.test), None, &out_csv).unwrap();
    assert_eq!(rows.len(), 2 * cfg.experiment.snr_grid_db.len());

    for &snr in &cfg.experiment.snr_grid_db {
        let find = |name: &str| {
            rows.iter()
                .find(|r| r.designer == name && r.snr_db == snr)
                .unwrap()
                .mean_sum_rate
        };
        assert!(
            find("random") <= find("exhaustive") + 1e-9,
            "ordering violated at snr {snr}"
        );
    }
    for name in ["exhaustive", "random"] {
        let mut last = f64::NEG_INFINITY;
        for &snr in &cfg.experiment.snr_grid_db {
            let mean = rows
                .iter()
                .find(|r| r.designer == name && r.snr_db == snr)
                .unwrap()
                .mean_sum_rate;
            assert!(
                mean >= last - 1e-9,
                "{name}: mean sum-rate not monotone over the SNR grid"
            );
            last = mean;
        }
    }

    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert!(text.starts_with("# config_hash="));
    assert!(text.lines().nth(1).unwrap() == "designer,B,snr_db,K,mean_sum_rate,std_err");
}

#[test]
fn evaluate_requires_a_model_for_pcnet_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(dir.path());
    cfg.designers = vec![DesignerSpec::named("pcnet")];
    let paths = cmd_generate(&cfg, dir.path()).unwrap();
    let err = cmd_evaluate(&cfg, Some(&paths.test), None, &dir.path().join("r.csv"))
        .unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn user_grid_regenerates_per_user_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(dir.path());
    cfg.designers = vec![DesignerSpec::named("random")];
    cfg.experiment.user_grid = vec![1, 2, 3];
    cfg.experiment.snr_grid_db = vec![10.0];
    cfg.experiment.n_eval_samples = 16;
    let rows = cmd_evaluate(&cfg, None, None, &dir.path().join("r.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    let ks: Vec<usize> = rows.iter().map(|r| r.n_users).collect();
    assert_eq!(ks, vec![1, 2, 3]);
    for r in &rows {
        assert!(r.mean_sum_rate.is_finite() && r.mean_sum_rate >= 0.0);
    }
}

#[test]
fn bench_emits_one_row_per_designer() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(dir.path());
    cfg.designers = vec![DesignerSpec::named("svd"), DesignerSpec::named("random")];
    cfg.experiment.n_timed = 3;
    let out_csv = dir.path().join("bench.csv");
    let rows = cmd_bench(&cfg, None, &out_csv).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r.mean_ms >= 0.0 && r.std_ms >= 0.0);
    }
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    assert_eq!(lines.next().unwrap(), "designer,B,mean_ms,std_ms");
    assert_eq!(lines.count(), 2);
}

// CLI binary surface.

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybeam"))
}

#[test]
fn cli_usage_errors_exit_with_one() {
    let out = bin().arg("no-such-verb").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["evaluate", "--scale", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin()
        .args(["generate", "--config", "/nonexistent/cfg.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cli_data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // Train without generated datasets.
    let out = bin()
        .args(["train", "--scale", "tiny", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_round_trip_generate_train_evaluate_bench() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let out = bin()
            .args(args)
            .args(["--scale", "tiny", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&["generate"]);
    run(&["train"]);
    let model = dir.path().join("pcnet.pcnw");
    let model_arg = model.to_str().unwrap();
    let out = bin()
        .args(["evaluate", "--scale", "tiny", "--model", model_arg, "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("results.csv").exists());
    let out = bin()
        .args([
            "bench",
            "--scale",
            "tiny",
            "--designers",
            "svd,random,pcnet",
            "--model",
            model_arg,
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("bench.csv").exists());
}

//! Statistical and structural checks of the channel generator.

mod common;

use hybeam::channel::{
    assemble_channel, generate_channel, generate_dataset, sample_path_angles, upa_response,
    ArrayGeometry, ChannelConfig, PathComponent,
};
use hybeam::rng;
use num_complex::Complex64;

#[test]
fn upa_response_matches_elementwise_formula() {
    let geom = ArrayGeometry::new(4, 0.5).unwrap();
    let az = std::f64::consts::FRAC_PI_4;
    let el = std::f64::consts::FRAC_PI_3;
    let v = upa_response(&geom, az, el);
    for m in 0..2 {
        for n in 0..2 {
            let phase = std::f64::consts::TAU
                * 0.5
                * (m as f64 * az.sin() * el.sin() + n as f64 * el.cos());
            let expected = Complex64::from_polar(0.5, phase);
            let got = v.get(m * 2 + n);
            assert!((got - expected).norm() < 1e-14);
        }
    }
}

#[test]
fn single_path_channel_matches_closed_form() {
    // L = 1 with unit gain: H = sqrt(N_t N_r) a_r a_t^H exactly.
    let tx = ArrayGeometry::new(4, 0.5).unwrap();
    let rx = ArrayGeometry::new(4, 0.5).unwrap();
    let path = PathComponent {
        gain: Complex64::new(1.0, 0.0),
        departure_azimuth: 0.7,
        departure_elevation: 1.1,
        arrival_azimuth: 2.3,
        arrival_elevation: 0.4,
    };
    let h = assemble_channel(&tx, &rx, &[path]);
    let a_r = upa_response(&rx, 2.3, 0.4);
    let a_t = upa_response(&tx, 0.7, 1.1);
    let expected = a_r.outer(&a_t).scale(Complex64::new(4.0, 0.0));
    assert!(h.sub(&expected).unwrap().max_abs() < 1e-12);
}

#[test]
fn mean_squared_frobenius_norm_is_antenna_product() {
    // E ||H||_F^2 = N_t N_r for unit-variance gains and unit-norm steering
    // vectors, for any L.
    let cfg = ChannelConfig::new(16, 4, 1, 10, 10.0, 7_777).unwrap();
    let n = 10_000;
    let mut acc = 0.0;
    for i in 0..n {
        let mut stream = rng::substream(cfg.seed, i as u64);
        let sample = generate_channel(&cfg, &mut stream);
        acc += sample.per_user[0].frobenius_norm().powi(2);
    }
    let ratio = acc / n as f64 / (16.0 * 4.0);
    assert!(
        (0.98..=1.02).contains(&ratio),
        "normalized mean power {ratio}"
    );
}

#[test]
fn entrywise_mean_is_near_zero() {
    let cfg = ChannelConfig::new(4, 4, 1, 5, 10.0, 31).unwrap();
    let n = 10_000;
    let mut mean = vec![Complex64::new(0.0, 0.0); 16];
    let mut power = vec![0.0f64; 16];
    for i in 0..n {
        let mut stream = rng::substream(cfg.seed, i as u64);
        let sample = generate_channel(&cfg, &mut stream);
        for (j, z) in sample.per_user[0].entries().iter().enumerate() {
            mean[j] += z;
            power[j] += z.norm_sqr();
        }
    }
    for j in 0..16 {
        let m = mean[j] / n as f64;
        let sigma = (power[j] / n as f64).sqrt();
        assert!(
            m.norm() <= 3.0 * sigma / (n as f64).sqrt() + 1e-12,
            "entry {j}: |mean| {} vs 3 sigma/sqrt(n) {}",
            m.norm(),
            3.0 * sigma / (n as f64).sqrt()
        );
    }
}

#[test]
fn channel_rank_is_bounded_by_path_count() {
    // With L < min(N_t, N_r), singular values beyond the L-th vanish.
    let cfg = ChannelConfig::new(16, 16, 1, 2, 10.0, 63).unwrap();
    for i in 0..5 {
        let mut stream = rng::substream(cfg.seed, i);
        let sample = generate_channel(&cfg, &mut stream);
        let singulars = common::oracle_singular_values(&sample.per_user[0]);
        let sigma_max = singulars[0];
        for &s in &singulars[2..] {
            assert!(
                s <= 1e-8 * sigma_max,
                "rank leak: sigma {s} vs max {sigma_max}"
            );
        }
    }
}

#[test]
fn laplacian_spread_matches_configured_standard_deviation() {
    let mut stream = rng::substream(17, 0);
    let n = 100_000;
    let spread_deg = 10.0;
    let mut acc = 0.0;
    let mut acc_sq = 0.0;
    for _ in 0..n {
        let (az, _el) = sample_path_angles(0.0, 0.0, spread_deg, &mut stream);
        acc += az;
        acc_sq += az * az;
    }
    let mean = acc / n as f64;
    let std = (acc_sq / n as f64 - mean * mean).sqrt();
    let expected = spread_deg.to_radians();
    assert!(
        (std - expected).abs() / expected < 0.03,
        "std {std} vs {expected}"
    );
}

#[test]
fn per_path_means_widen_the_angle_spread() {
    // With independent per-path means the paths decorrelate; the channel is
    // much farther from rank one than in the single-cluster default.
    let base = ChannelConfig::new(16, 16, 1, 4, 1.0, 12).unwrap();
    let clustered_ratio = mean_second_singular_ratio(&base);
    let spread_cfg = ChannelConfig {
        per_path_means: true,
        ..base
    };
    let spread_ratio = mean_second_singular_ratio(&spread_cfg);
    assert!(
        spread_ratio > 2.0 * clustered_ratio,
        "sigma2/sigma1: clustered {clustered_ratio}, per-path {spread_ratio}"
    );
}

fn mean_second_singular_ratio(cfg: &ChannelConfig) -> f64 {
    let n = 50;
    let mut acc = 0.0;
    for i in 0..n {
        let mut stream = rng::substream(cfg.seed, i);
        let sample = generate_channel(cfg, &mut stream);
        let s = common::oracle_singular_values(&sample.per_user[0]);
        acc += s[1] / s[0];
    }
    acc / n as f64
}

#[test]
fn dataset_generation_is_order_independent() {
    let cfg = ChannelConfig::new(4, 4, 2, 3, 10.0, 90).unwrap();
    let full = generate_dataset(&cfg, 5);
    // Generating only the tail must reproduce it.
    for idx in [0usize, 3, 4] {
        let mut stream = rng::substream(cfg.seed, idx as u64);
        let direct = generate_channel(&cfg, &mut stream);
        assert_eq!(full.samples[idx], direct);
    }
}

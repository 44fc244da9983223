//! Hybrid beamforming for multiuser mmWave MIMO with low-resolution phase
//! shifters.
//!
//! The transmitter applies a two-stage beamformer: an analog precoder built
//! from B-bit phase shifters (one RF chain per served user) and a digital
//! MMSE baseband precoder that handles multiuser interference. Each receiver
//! applies an analog phase-shifter combiner. This crate provides
//!
//! - [`numerics`]: complex dense linear algebra (products, Hermitian
//!   transpose, LU inverse, dominant singular pair via power iteration);
//! - [`channel`]: clustered Saleh-Valenzuela channel generation for uniform
//!   planar arrays, with a seeded binary dataset format;
//! - [`beamforming`]: phase alphabets, analog designs, the equivalent
//!   channel, the MMSE baseband precoder, power normalization, SINR and
//!   sum-rate evaluation;
//! - [`baselines`]: stage-one analog designers — phase projection and
//!   quantization, SVD-based design, cross-entropy search, exhaustive search
//!   and a random floor;
//! - [`pcnet`]: a concatenated residual MLP that classifies the phase of
//!   every shifter, trained unsupervised on the negated beamforming gain;
//! - [`harness`]: the batch experiment pipeline behind the `hybeam` binary
//!   (`generate`, `train`, `evaluate`, `bench`).
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example channel_statistics
//! cargo run --release --example generate_dataset
//! cargo run --release --example designer_shootout
//! cargo run --release --example cross_entropy_convergence
//! cargo run --release --example gradient_check
//! cargo run --release --example overfit_one_sample
//! cargo run --release --example train_and_evaluate
//! cargo run --release --example bench_designers
//! ```
//!
//! The same flows are scriptable through the thin CLI:
//!
//! ```bash
//! cargo run --release -- generate --scale tiny --out data
//! cargo run --release -- train --scale tiny --out data
//! cargo run --release -- evaluate --scale tiny --out data --model data/pcnet.pcnw
//! cargo run --release -- bench --scale tiny --out data --model data/pcnet.pcnw
//! ```

pub mod baselines;
pub mod beamforming;
pub mod channel;
pub mod harness;
pub mod numerics;
pub mod pcnet;
pub mod rng;

#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;
use zdjscc_core::model::{sample_source_pair, SourceModel};
use zdjscc_core::sim::rng::{block_rng, Stream};

/// Sample mean and standard error of `f(s1, s2)` over `n` source pairs.
pub fn mc_source_mean(rho: f64, n: u64, seed: u64, f: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let src = SourceModel::new(rho).unwrap();
    let mut rng = block_rng(seed, 0, Stream::Source);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let (a, b) = sample_source_pair(&src, &mut rng);
        let v = f(a, b);
        s += v;
        s2 += v * v;
    }
    let n = n as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean) / (n - 1.0)).max(0.0).sqrt())
}

/// Standard normal draws from a dedicated stream.
pub fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = block_rng(seed, 0, Stream::Noise1);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn within_se(got: f64, want: f64, se: f64, k: f64) -> bool {
    (got - want).abs() <= k * se
}

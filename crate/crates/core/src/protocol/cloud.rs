use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::units::ExperimentConfig;

/// Atom positions (µm) drawn from the anisotropic Gaussian cloud, with the
/// long axis along z.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudSample {
    pub positions: Vec<[f64; 3]>,
    pub rng_seed: u64,
}

pub(crate) fn draw_positions<R: Rng + ?Sized>(rng: &mut R, config: &ExperimentConfig, count: usize) -> Vec<[f64; 3]> {
    let (wr, wz) = (config.cloud_wr, config.cloud_wz);
    (0..count)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            [wr * x, wr * y, wz * z]
        })
        .collect()
}

pub fn sample_positions(config: &ExperimentConfig, count: usize, seed: u64) -> Result<CloudSample> {
    if count == 0 {
        return Err(Error::domain("sample_positions", "count must be at least 1"));
    }
    let mut rng = stream(seed, Purpose::Cloud, 0);
    Ok(CloudSample {
        positions: draw_positions(&mut rng, config, count),
        rng_seed: seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WriteResult {
    pub polariton_positions: Vec<[f64; 3]>,
    pub n_polaritons: usize,
}

impl WriteResult {
    /// Smallest pairwise separation, or infinity for fewer than two.
    pub fn min_separation(&self) -> f64 {
        let p = &self.polariton_positions;
        let mut min = f64::INFINITY;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                min = min.min(distance(&p[i], &p[j]));
            }
        }
        min
    }
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Hard-sphere blockade over the candidates in the order sampled: a candidate
/// is excited unless an earlier excitation lies closer than `r_o`. At most
/// `max_attempts` candidates are considered.
pub fn write_polaritons(cloud: &CloudSample, r_o: f64, max_attempts: usize) -> Result<WriteResult> {
    blockade(&cloud.positions, r_o, max_attempts)
}

pub(crate) fn blockade(candidates: &[[f64; 3]], r_o: f64, max_attempts: usize) -> Result<WriteResult> {
    if !(r_o > 0.0) {
        return Err(Error::domain("write_polaritons", format!("r_o = {r_o} must be > 0")));
    }
    let mut accepted: Vec<[f64; 3]> = Vec::new();
    for p in candidates.iter().take(max_attempts) {
        if accepted.iter().all(|q| distance(p, q) >= r_o) {
            accepted.push(*p);
        }
    }
    Ok(WriteResult {
        n_polaritons: accepted.len(),
        polariton_positions: accepted,
    })
}

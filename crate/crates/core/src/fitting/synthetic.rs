use rand_distr::{Distribution, Normal, Poisson};
use serde::Serialize;

use super::lm::Point;
use super::models::{lorentzian, rabi_collective_model, RabiParams};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// Gaussian-noise Lorentzian resonance sampled on an even grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LorentzianDesign {
    pub amplitude: f64,
    pub center: f64,
    pub fwhm: f64,
    pub offset: f64,
    pub points: usize,
    pub half_span: f64,
    /// Noise σ as a fraction of the amplitude.
    pub noise_fraction: f64,
}

impl Default for LorentzianDesign {
    /// EIT bandwidth scan: 15 detunings over ±3 MHz, 5% noise.
    fn default() -> Self {
        LorentzianDesign {
            amplitude: 1.0,
            center: 0.0,
            fwhm: 1.34,
            offset: 0.0,
            points: 15,
            half_span: 3.0,
            noise_fraction: 0.05,
        }
    }
}

impl LorentzianDesign {
    pub fn generate(&self, seed: u64, replicate: u64) -> Result<Vec<Point>> {
        if self.points < 2 {
            return Err(Error::domain("LorentzianDesign", "need at least two points"));
        }
        let sigma = self.noise_fraction * self.amplitude.abs();
        let noise = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("positive σ"));
        let mut rng = stream(seed, Purpose::Synthetic, replicate);
        (0..self.points)
            .map(|i| {
                let x = -self.half_span + 2.0 * self.half_span * i as f64 / (self.points - 1) as f64 + self.center;
                let y = lorentzian(x, self.amplitude, self.center, self.fwhm, self.offset)?;
                let e = noise.map_or(0.0, |n| n.sample(&mut rng));
                // σ_y of the zero-noise design is nominal so the fit stays defined
                Ok((x, y + e, if sigma > 0.0 { sigma } else { 1.0 }))
            })
            .collect()
    }
}

/// Counted Rabi scan: at each ω the number of retrieved photons over
/// `experiments_per_point` repetitions is Poisson with mean n·P(ω).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RabiDesign {
    pub truth: RabiParams,
    /// µs
    pub t_pulse: f64,
    /// MHz
    pub omegas: Vec<f64>,
    pub experiments_per_point: u64,
}

impl Default for RabiDesign {
    /// 150 ns pulses, 5–40 MHz in 0.5 MHz steps, 30 shots of 3334
    /// experiments per point.
    fn default() -> Self {
        RabiDesign {
            truth: RabiParams {
                a: 0.0072,
                n: 3.0,
                omega_env: 5.0,
                omega_decay: 3.0,
                b: 0.0019,
            },
            t_pulse: 0.15,
            omegas: (0..=70).map(|i| 5.0 + 0.5 * i as f64).collect(),
            experiments_per_point: 30 * 3334,
        }
    }
}

impl RabiDesign {
    /// Mean counts per experiment with σ = √max(k, 1)/n.
    pub fn generate(&self, seed: u64, replicate: u64) -> Result<Vec<Point>> {
        if self.experiments_per_point == 0 {
            return Err(Error::domain("RabiDesign", "need at least one experiment per point"));
        }
        let n = self.experiments_per_point as f64;
        let mut rng = stream(seed, Purpose::Synthetic, replicate);
        self.omegas
            .iter()
            .map(|&w| {
                let p = rabi_collective_model(w, self.t_pulse, &self.truth)?;
                let mean = n * p;
                if !(mean >= 0.0) {
                    return Err(Error::domain("RabiDesign", format!("negative rate at ω = {w}")));
                }
                let k = if mean > 0.0 {
                    Poisson::new(mean).expect("positive mean").sample(&mut rng)
                } else {
                    0.0
                };
                Ok((w, k / n, k.max(1.0).sqrt() / n))
            })
            .collect()
    }
}

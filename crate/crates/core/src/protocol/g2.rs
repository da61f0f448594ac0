use serde::Serialize;

use super::clicks::{ClickRecord, Detector};
use crate::error::{Error, Result};

/// Pulse lags whose mean peak height normalizes g².
pub const NORMALIZATION_LAGS: (usize, usize) = (5, 50);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2Options {
    /// Report lags −max_lag..=max_lag.
    pub max_lag: usize,
}

impl Default for G2Options {
    fn default() -> Self {
        G2Options { max_lag: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G2Result {
    pub lags: Vec<i64>,
    /// k·T, µs.
    pub tau_bins: Vec<f64>,
    pub coincidences: Vec<u64>,
    pub g2: Vec<f64>,
    pub statistical_error: Vec<f64>,
    pub zero_delay: f64,
    pub zero_delay_err: f64,
    /// Mean normalization-range peak relative to uncorrelated singles.
    pub side_peak_level: f64,
    pub side_peak_err: f64,
    pub singles: (u64, u64),
    pub n_trials: usize,
}

impl G2Result {
    pub fn bin(&self, lag: i64) -> Option<(f64, f64)> {
        self.lags.iter().position(|&k| k == lag).map(|i| (self.g2[i], self.statistical_error[i]))
    }
}

/// Cross-detector coincidences Σ_i a_i·b_{i+k} for k ∈ [−lag, lag].
fn coincidences(a: &[u64], b: &[u64], lag: usize) -> Vec<u64> {
    let n = a.len();
    (-(lag as i64)..=lag as i64)
        .map(|k| {
            let (lo, hi) = if k >= 0 { (0, n - k as usize) } else { ((-k) as usize, n) };
            (lo..hi).map(|i| a[i] * b[(i as i64 + k) as usize]).sum()
        })
        .collect()
}

/// Pulsed HBT correlation binned by the difference k of repetition-period
/// indices between an A click and a B click.
pub fn hbt_g2(clicks: &ClickRecord, options: G2Options) -> Result<G2Result> {
    let (norm_lo, norm_hi) = NORMALIZATION_LAGS;
    if clicks.events.len() < 2 {
        return Err(Error::Analysis("need at least two events".into()));
    }
    if clicks.n_trials <= norm_hi {
        return Err(Error::Analysis(format!("need more than {norm_hi} trials, got {}", clicks.n_trials)));
    }
    let n = clicks.n_trials;
    let (mut a, mut b) = (vec![0u64; n], vec![0u64; n]);
    for click in &clicks.events {
        let trial = clicks.trial_of(click);
        if trial >= n {
            return Err(Error::Analysis("event outside the recorded trials".into()));
        }
        match click.detector {
            Detector::A => a[trial] += 1,
            Detector::B => b[trial] += 1,
        }
    }
    let lag = options.max_lag.max(norm_hi);
    let counts = coincidences(&a, &b, lag);
    let rate = |k: i64| counts[(k + lag as i64) as usize] as f64 / (n as f64 - k.unsigned_abs() as f64);

    let norm_lags: Vec<i64> = (norm_lo as i64..=norm_hi as i64).flat_map(|k| [-k, k]).collect();
    let norm_total: u64 = norm_lags.iter().map(|&k| counts[(k + lag as i64) as usize]).sum();
    if norm_total == 0 {
        return Err(Error::Analysis("no coincidences in the normalization range".into()));
    }
    let norm = norm_lags.iter().map(|&k| rate(k)).sum::<f64>() / norm_lags.len() as f64;
    let norm_rel = 1.0 / (norm_total as f64).sqrt();

    let reported = options.max_lag as i64;
    let lags: Vec<i64> = (-reported..=reported).collect();
    let mut g2 = Vec::with_capacity(lags.len());
    let mut errors = Vec::with_capacity(lags.len());
    let mut reported_counts = Vec::with_capacity(lags.len());
    for &k in &lags {
        let c = counts[(k + lag as i64) as usize];
        let value = rate(k) / norm;
        // an empty bin gets the one-count Poisson scale
        let shot = (c.max(1) as f64).sqrt() / (n as f64 - k.unsigned_abs() as f64) / norm;
        g2.push(value);
        errors.push((shot * shot + (value * norm_rel).powi(2)).sqrt());
        reported_counts.push(c);
    }
    let zero = reported as usize;

    let singles = (a.iter().sum::<u64>(), b.iter().sum::<u64>());
    let product = singles.0 as f64 * singles.1 as f64 / (n as f64 * n as f64);
    let (side, side_err) = if product > 0.0 {
        (norm / product, norm / product * norm_rel)
    } else {
        (f64::NAN, f64::NAN)
    };

    Ok(G2Result {
        tau_bins: lags.iter().map(|&k| k as f64 * clicks.period).collect(),
        lags,
        coincidences: reported_counts,
        zero_delay: g2[zero],
        zero_delay_err: errors[zero],
        g2,
        statistical_error: errors,
        side_peak_level: side,
        side_peak_err: side_err,
        singles,
        n_trials: n,
    })
}

/// Removes an uncorrelated Poissonian background from a measured g²(0),
/// given the signal fraction ρ of the detected counts.
pub fn background_correct_g2(g2_measured: f64, signal_fraction: f64) -> Result<f64> {
    if !(signal_fraction > 0.0 && signal_fraction <= 1.0) {
        return Err(Error::domain(
            "background_correct_g2",
            format!("signal fraction {signal_fraction} outside (0, 1]"),
        ));
    }
    let rho2 = signal_fraction * signal_fraction;
    Ok(((g2_measured - (1.0 - rho2)) / rho2).max(0.0))
}

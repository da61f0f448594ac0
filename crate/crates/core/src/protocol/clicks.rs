use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shot::{binomial, poisson};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::units::ExperimentConfig;

/// FWHM of the retrieved pulse, µs.
pub const PULSE_FWHM: f64 = 0.12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Detector {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Click {
    /// µs since the start of the first period.
    pub time: f64,
    pub detector: Detector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClickRecord {
    pub events: Vec<Click>,
    pub n_trials: usize,
    /// (start, end) within each period, µs.
    pub window: (f64, f64),
    pub period: f64,
}

impl ClickRecord {
    /// Index of the period an event falls in.
    pub fn trial_of(&self, click: &Click) -> usize {
        (click.time / self.period).floor() as usize
    }
}

fn trial_events<R: Rng + ?Sized>(rng: &mut R, config: &ExperimentConfig, trial: usize, photons: u32) -> Vec<Click> {
    let (start, end) = config.retrieval_window;
    let offset = trial as f64 * config.repetition_period;
    let sigma = PULSE_FWHM / (8.0 * 2f64.ln()).sqrt();
    let shape = Normal::new(0.5 * (start + end), sigma).expect("positive width");
    let detector = |rng: &mut R| if rng.random_bool(0.5) { Detector::A } else { Detector::B };

    let mut events = Vec::new();
    for _ in 0..binomial(rng, photons, config.detection_efficiency) {
        let t = loop {
            let t = shape.sample(rng);
            if (start..end).contains(&t) {
                break t;
            }
        };
        events.push(Click {
            time: offset + t,
            detector: detector(rng),
        });
    }
    for _ in 0..poisson(rng, config.background_rate * config.window_length()) {
        let t = start + (end - start) * rng.random::<f64>();
        events.push(Click {
            time: offset + t,
            detector: detector(rng),
        });
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    events
}

/// Detector clicks for photons arriving at the HBT beam splitter, one entry
/// of `per_trial_photon_counts` per repetition period. Each photon is
/// detected with the configured efficiency and sent to A or B with equal
/// probability; background clicks are added uniformly over the window.
pub fn generate_click_stream(config: &ExperimentConfig, per_trial_photon_counts: &[u32], seed: u64) -> Result<ClickRecord> {
    config.validate()?;
    let per_trial: Vec<Vec<Click>> = per_trial_photon_counts
        .par_iter()
        .enumerate()
        .map(|(trial, &photons)| trial_events(&mut stream(seed, Purpose::Clicks, trial as u64), config, trial, photons))
        .collect();
    Ok(ClickRecord {
        events: per_trial.into_iter().flatten().collect(),
        n_trials: per_trial_photon_counts.len(),
        window: config.retrieval_window,
        period: config.repetition_period,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftShape {
    /// 1 + a·sin(2πi/P)
    Sinusoidal,
    /// 1 + a·(2i/(T−1) − 1) across the run
    Linear,
}

/// Slow modulation of the per-trial collection efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub amplitude: f64,
    /// Period of the sinusoid, in trials.
    pub period_trials: f64,
    pub shape: DriftShape,
}

impl DriftSpec {
    /// One point of a Rabi scan: 30 shots of 3334 experiments.
    pub const DEFAULT_PERIOD: f64 = 3334.0;

    /// Sinusoidal drift whose efficiency has the given standard deviation
    /// relative to its mean (a/√2).
    pub fn sinusoidal_with_relative_std(relative_std: f64) -> Self {
        DriftSpec {
            amplitude: relative_std * 2f64.sqrt(),
            period_trials: Self::DEFAULT_PERIOD,
            shape: DriftShape::Sinusoidal,
        }
    }

    fn factor(&self, trial: usize, n_trials: usize) -> f64 {
        match self.shape {
            DriftShape::Sinusoidal => 1.0 + self.amplitude * (2.0 * PI * trial as f64 / self.period_trials).sin(),
            DriftShape::Linear => {
                let x = if n_trials > 1 {
                    2.0 * trial as f64 / (n_trials - 1) as f64 - 1.0
                } else {
                    0.0
                };
                1.0 + self.amplitude * x
            }
        }
    }
}

/// Thins every event of trial i with keep-probability f(i)/(1 + a), so the
/// collected rate follows the drift profile f.
pub fn efficiency_drift_model(clicks: &ClickRecord, drift: &DriftSpec, seed: u64) -> Result<ClickRecord> {
    if !(0.0..1.0).contains(&drift.amplitude) {
        return Err(Error::domain(
            "efficiency_drift_model",
            format!("amplitude {} outside [0, 1)", drift.amplitude),
        ));
    }
    if !(drift.period_trials > 0.0) {
        return Err(Error::domain("efficiency_drift_model", "period must be positive"));
    }
    let mut by_trial: Vec<Vec<Click>> = vec![Vec::new(); clicks.n_trials];
    for click in &clicks.events {
        let trial = clicks.trial_of(click);
        if trial >= clicks.n_trials {
            return Err(Error::domain("efficiency_drift_model", "event outside the recorded trials"));
        }
        by_trial[trial].push(*click);
    }
    let kept: Vec<Vec<Click>> = by_trial
        .into_par_iter()
        .enumerate()
        .map(|(trial, events)| {
            let keep = drift.factor(trial, clicks.n_trials) / (1.0 + drift.amplitude);
            let mut rng = stream(seed, Purpose::Drift, trial as u64);
            events.into_iter().filter(|_| rng.random::<f64>() < keep).collect()
        })
        .collect();
    Ok(ClickRecord {
        events: kept.into_iter().flatten().collect(),
        ..clicks.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> ExperimentConfig {
        ExperimentConfig {
            background_rate: 0.0,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn empty_record() {
        let record = generate_click_stream(&quiet(), &[0; 100], 1).unwrap();
        assert!(record.events.is_empty());
        assert_eq!(record.n_trials, 100);
    }

    #[test]
    fn events_inside_windows_and_sorted() {
        let config = ExperimentConfig {
            background_rate: 0.5,
            detection_efficiency: 1.0,
            ..ExperimentConfig::default()
        };
        let counts: Vec<u32> = (0..2000).map(|i| i % 4).collect();
        let record = generate_click_stream(&config, &counts, 9).unwrap();
        assert!(!record.events.is_empty());
        for pair in record.events.windows(2) {
            assert!(pair[0].time <= pair[1].time);
        }
        for e in &record.events {
            let phase = e.time - record.trial_of(e) as f64 * record.period;
            assert!(phase >= config.retrieval_window.0 && phase < config.retrieval_window.1);
        }
        let signal: u32 = counts.iter().sum();
        assert!(record.events.len() as u32 >= signal);
    }

    #[test]
    fn detectors_split_evenly() {
        let config = ExperimentConfig {
            detection_efficiency: 1.0,
            ..quiet()
        };
        let record = generate_click_stream(&config, &vec![2; 20_000], 4).unwrap();
        let a = record.events.iter().filter(|e| e.detector == Detector::A).count() as f64;
        let n = record.events.len() as f64;
        assert_eq!(n, 40_000.0);
        assert!((a / n - 0.5).abs() < 4.0 * (0.25 / n).sqrt());
    }

    #[test]
    fn drift_amplitude_checked() {
        let record = generate_click_stream(&quiet(), &[1; 10], 1).unwrap();
        let bad = DriftSpec {
            amplitude: 1.0,
            ..DriftSpec::sinusoidal_with_relative_std(0.3)
        };
        assert!(efficiency_drift_model(&record, &bad, 1).is_err());
        let none = DriftSpec { amplitude: 0.0, ..bad };
        assert_eq!(efficiency_drift_model(&record, &none, 1).unwrap(), record);
    }
}

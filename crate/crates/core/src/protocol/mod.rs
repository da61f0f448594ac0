//! Monte Carlo of the store / rotate / retrieve experiment and the photon
//! counting analysis applied to its output.

mod clicks;
mod cloud;
mod g2;
mod shot;

use serde::Serialize;

pub use clicks::{efficiency_drift_model, generate_click_stream, Click, ClickRecord, Detector, DriftShape, DriftSpec, PULSE_FWHM};
pub use cloud::{sample_positions, write_polaritons, CloudSample, WriteResult};
pub use g2::{background_correct_g2, hbt_g2, G2Options, G2Result, NORMALIZATION_LAGS};
pub use shot::{rabi_scan, simulate_shot, simulate_shots, RabiPoint, ShotModel, ShotOutcome};

use crate::error::Result;
use crate::units::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolRun {
    pub trials: usize,
    pub mean_polaritons: f64,
    pub mean_retrieved: f64,
    pub detected_events: usize,
    pub g2: G2Result,
}

/// Shots, detector clicks (with optional efficiency drift) and their g².
#[allow(clippy::too_many_arguments)]
pub fn run_protocol(
    config: &ExperimentConfig,
    model: &ShotModel,
    omega_mu: f64,
    pulse_duration: f64,
    trials: usize,
    drift: Option<DriftSpec>,
    seed: u64,
    options: G2Options,
) -> Result<ProtocolRun> {
    let shots = simulate_shots(config, model, omega_mu, pulse_duration, trials, seed)?;
    let photons: Vec<u32> = shots.iter().map(|s| s.retrieved).collect();
    let mut clicks = generate_click_stream(config, &photons, seed)?;
    if let Some(drift) = drift {
        clicks = efficiency_drift_model(&clicks, &drift, seed)?;
    }
    let n = trials.max(1) as f64;
    Ok(ProtocolRun {
        trials,
        mean_polaritons: shots.iter().map(|s| s.n_polaritons as f64).sum::<f64>() / n,
        mean_retrieved: photons.iter().map(|&p| p as f64).sum::<f64>() / n,
        detected_events: clicks.events.len(),
        g2: hbt_g2(&clicks, options)?,
    })
}

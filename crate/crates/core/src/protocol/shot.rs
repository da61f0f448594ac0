use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cloud::{blockade, draw_positions};
use crate::error::{Error, Result};
use crate::interactions::{stored_state_return_probability, ChannelWeights, CouplingGraph, HamiltonianParams};
use crate::rng::{stream, Purpose, StreamRng};
use crate::units::{optical_blockade_radius, ExperimentConfig, PairCoefficients};

/// Calibration constants of the shot model that the experiment does not fix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotModel {
    /// Fraction of input photons that become candidate Rydberg excitations
    /// before blockade; 0.35 gives a mean of about three polaritons.
    pub write_efficiency: f64,
    /// Probability that one stored polariton is read out into the mode.
    pub retrieval_efficiency: f64,
    pub pair: PairCoefficients,
    pub graph: CouplingGraph,
    pub weights: ChannelWeights,
}

impl Default for ShotModel {
    fn default() -> Self {
        ShotModel {
            write_efficiency: 0.35,
            retrieval_efficiency: 0.04,
            pair: PairCoefficients::rb60(),
            graph: CouplingGraph::AllPairs,
            weights: ChannelWeights::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotOutcome {
    pub candidates: u32,
    pub n_polaritons: u32,
    /// Probability that the register is still in the stored state.
    pub survival: f64,
    /// Photons emitted into the read-out mode.
    pub retrieved: u32,
    pub detected_signal: u32,
    pub background: u32,
}

impl ShotOutcome {
    pub fn detected(&self) -> u32 {
        self.detected_signal + self.background
    }
}

pub(crate) fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u32
}

pub(crate) fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u32, p: f64) -> u32 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    Binomial::new(n as u64, p.min(1.0)).expect("probability in [0, 1]").sample(rng) as u32
}

fn check_pulse(config: &ExperimentConfig, omega_mu: f64, pulse_duration: f64) -> Result<()> {
    if !(omega_mu >= 0.0) || !omega_mu.is_finite() {
        return Err(Error::domain("simulate_shot", format!("omega_mu = {omega_mu}")));
    }
    if !(pulse_duration >= 0.0) || pulse_duration > config.storage_time {
        return Err(Error::domain(
            "simulate_shot",
            format!(
                "pulse of {pulse_duration} µs does not fit the {} µs storage interval",
                config.storage_time
            ),
        ));
    }
    Ok(())
}

fn shot_with(rng: &mut StreamRng, config: &ExperimentConfig, model: &ShotModel, omega_mu: f64, pulse_duration: f64) -> Result<ShotOutcome> {
    let candidates = poisson(rng, config.mean_input_photons * model.write_efficiency);
    let positions = draw_positions(rng, config, candidates as usize);
    let r_o = optical_blockade_radius(model.pair.c6, config.eit_width)?;
    let written = blockade(&positions, r_o, usize::MAX)?;
    let n = written.n_polaritons as u32;

    // with the microwave off the stored state does not evolve
    let survival = if omega_mu == 0.0 || pulse_duration == 0.0 || n == 0 {
        1.0
    } else {
        let params = HamiltonianParams {
            omega_mu,
            c3: model.pair.c3,
            graph: model.graph,
            weights: model.weights,
        };
        stored_state_return_probability(&written.polariton_positions, &params, pulse_duration)?.clamp(0.0, 1.0)
    };
    let per_polariton = if n == 0 {
        0.0
    } else {
        survival.powf(1.0 / n as f64) * model.retrieval_efficiency
    };
    let retrieved = binomial(rng, n, per_polariton);
    let detected_signal = binomial(rng, retrieved, config.detection_efficiency);
    let background = poisson(rng, config.background_rate * config.window_length());
    Ok(ShotOutcome {
        candidates,
        n_polaritons: n,
        survival,
        retrieved,
        detected_signal,
        background,
    })
}

/// One store / rotate / retrieve experiment. `trial` selects an independent
/// random stream under `seed`.
pub fn simulate_shot(config: &ExperimentConfig, model: &ShotModel, omega_mu: f64, pulse_duration: f64, seed: u64, trial: u64) -> Result<ShotOutcome> {
    config.validate()?;
    check_pulse(config, omega_mu, pulse_duration)?;
    shot_with(&mut stream(seed, Purpose::Shot, trial), config, model, omega_mu, pulse_duration)
}

/// `trials` shots merged in trial order.
pub fn simulate_shots(
    config: &ExperimentConfig,
    model: &ShotModel,
    omega_mu: f64,
    pulse_duration: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<ShotOutcome>> {
    run_indexed(config, model, omega_mu, pulse_duration, seed, 0, trials)
}

fn run_indexed(
    config: &ExperimentConfig,
    model: &ShotModel,
    omega_mu: f64,
    pulse_duration: f64,
    seed: u64,
    offset: u64,
    trials: usize,
) -> Result<Vec<ShotOutcome>> {
    config.validate()?;
    check_pulse(config, omega_mu, pulse_duration)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| shot_with(&mut stream(seed, Purpose::Shot, offset + t), config, model, omega_mu, pulse_duration))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiPoint {
    pub omega_mu: f64,
    /// Mean detected counts per experiment.
    pub retrieved_mean: f64,
    pub retrieved_err: f64,
}

/// Mean detected counts against microwave Rabi frequency at a fixed pulse
/// duration.
pub fn rabi_scan(
    config: &ExperimentConfig,
    model: &ShotModel,
    omegas: &[f64],
    pulse_duration: f64,
    trials_per_point: usize,
    seed: u64,
) -> Result<Vec<RabiPoint>> {
    if trials_per_point < 2 {
        return Err(Error::domain("rabi_scan", "need at least two trials per point"));
    }
    omegas
        .iter()
        .enumerate()
        .map(|(point, &omega_mu)| {
            let shots = run_indexed(config, model, omega_mu, pulse_duration, seed, (point as u64) << 32, trials_per_point)?;
            let n = shots.len() as f64;
            let mean = shots.iter().map(|s| s.detected() as f64).sum::<f64>() / n;
            let var = shots.iter().map(|s| (s.detected() as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(RabiPoint {
                omega_mu,
                retrieved_mean: mean,
                retrieved_err: (var / n).sqrt(),
            })
        })
        .collect()
}

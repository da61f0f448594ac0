use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, FitOptions, FitResult, Parameter, Point};
use crate::error::{Error, Result};

/// offset + amplitude·(w/2)²/((x − center)² + (w/2)²)
pub fn lorentzian(x: f64, amplitude: f64, center: f64, fwhm: f64, offset: f64) -> Result<f64> {
    if !(fwhm > 0.0) {
        return Err(Error::domain("lorentzian", format!("fwhm = {fwhm} must be > 0")));
    }
    Ok(lorentzian_unchecked(x, amplitude, center, fwhm, offset))
}

fn lorentzian_unchecked(x: f64, amplitude: f64, center: f64, fwhm: f64, offset: f64) -> f64 {
    let hw2 = 0.25 * fwhm * fwhm;
    offset + amplitude * hw2 / ((x - center).powi(2) + hw2)
}

/// Parameters of the collective Rabi curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiParams {
    /// Signal without microwave rotation.
    pub a: f64,
    /// Effective polariton number 𝒩.
    pub n: f64,
    /// Scale of the tanh envelope, MHz.
    pub omega_env: f64,
    /// Scale of the low-frequency exponential decay, MHz.
    pub omega_decay: f64,
    /// Background.
    pub b: f64,
}

/// A·tanh(ω/ω_env)·[cos²(πωt)]^𝒩 + (1 − tanh(ω/ω_env))·A·e^{−ω/ω_decay} + B,
/// with ω the microwave Rabi frequency in MHz and t the pulse length in µs.
pub fn rabi_collective_model(omega: f64, t_pulse: f64, params: &RabiParams) -> Result<f64> {
    let RabiParams {
        n, omega_env, omega_decay, ..
    } = *params;
    if !(n > 0.0) || !(omega_env > 0.0) || !(omega_decay > 0.0) || !t_pulse.is_finite() || t_pulse < 0.0 {
        return Err(Error::domain(
            "rabi_collective_model",
            format!("invalid parameters {params:?}, t = {t_pulse}"),
        ));
    }
    Ok(rabi_unchecked(omega, t_pulse, params))
}

fn rabi_unchecked(omega: f64, t_pulse: f64, p: &RabiParams) -> f64 {
    let blend = (omega / p.omega_env).tanh();
    let c = (PI * omega * t_pulse).cos();
    p.a * blend * (c * c).powf(p.n) + (1.0 - blend) * p.a * (-omega / p.omega_decay).exp() + p.b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    Lorentzian,
    RabiCollective,
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lorentzian" => Ok(ModelId::Lorentzian),
            "rabi_collective" => Ok(ModelId::RabiCollective),
            other => Err(Error::domain("ModelId", format!("unknown model `{other}`"))),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelId::Lorentzian => "lorentzian",
            ModelId::RabiCollective => "rabi_collective",
        })
    }
}

/// A model with its parameters. For the Rabi model the pulse length is a
/// known constant, not a fit parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub model: ModelId,
    pub parameters: Vec<Parameter>,
    /// µs; used by the Rabi model only.
    pub t_pulse: f64,
}

const INF: f64 = f64::INFINITY;

impl ModelSpec {
    /// Parameters (amplitude, center, fwhm, offset).
    pub fn lorentzian(initial: [f64; 4]) -> Self {
        ModelSpec {
            model: ModelId::Lorentzian,
            parameters: vec![
                Parameter::new("amplitude", initial[0], -INF, INF),
                Parameter::new("center", initial[1], -INF, INF),
                Parameter::new("fwhm", initial[2], 1e-9, INF),
                Parameter::new("offset", initial[3], -INF, INF),
            ],
            t_pulse: 0.0,
        }
    }

    /// Parameters (A, N, omega_env, omega_decay, B).
    pub fn rabi_collective(t_pulse: f64, initial: RabiParams) -> Self {
        ModelSpec {
            model: ModelId::RabiCollective,
            parameters: vec![
                Parameter::new("A", initial.a, 0.0, INF),
                Parameter::new("N", initial.n, 0.05, 50.0),
                Parameter::new("omega_env", initial.omega_env, 1e-6, INF),
                Parameter::new("omega_decay", initial.omega_decay, 1e-6, INF),
                Parameter::new("B", initial.b, -INF, INF),
            ],
            t_pulse,
        }
    }

    /// Holds a parameter at its initial value.
    pub fn fix(mut self, name: &str) -> Result<Self> {
        let p = self
            .parameters
            .iter_mut()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::Fit(format!("no parameter `{name}`")))?;
        p.fixed = true;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = match self.model {
            ModelId::Lorentzian => 4,
            ModelId::RabiCollective => 5,
        };
        if self.parameters.len() != expected {
            return Err(Error::Fit(format!("{} takes {expected} parameters", self.model)));
        }
        for p in &self.parameters {
            if !(p.lower <= p.initial && p.initial <= p.upper) {
                return Err(Error::Fit(format!(
                    "initial {} = {} outside [{}, {}]",
                    p.name, p.initial, p.lower, p.upper
                )));
            }
        }
        if self.model == ModelId::RabiCollective && !(self.t_pulse > 0.0) {
            return Err(Error::Fit("pulse length must be positive".into()));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: f64, p: &[f64]) -> f64 {
        match self.model {
            ModelId::Lorentzian => lorentzian_unchecked(x, p[0], p[1], p[2], p[3]),
            ModelId::RabiCollective => rabi_unchecked(
                x,
                self.t_pulse,
                &RabiParams {
                    a: p[0],
                    n: p[1],
                    omega_env: p[2],
                    omega_decay: p[3],
                    b: p[4],
                },
            ),
        }
    }
}

pub fn fit(model: &ModelSpec, data: &[Point]) -> Result<FitResult> {
    fit_with_options(model, data, FitOptions::default())
}

pub fn fit_with_options(model: &ModelSpec, data: &[Point], options: FitOptions) -> Result<FitResult> {
    model.validate()?;
    levenberg_marquardt(|x, p| model.evaluate(x, p), &model.parameters, data, options)
}

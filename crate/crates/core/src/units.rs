//! Unit conventions, the experiment configuration and closed-form calculators.
//!
//! Every frequency is an ordinary frequency (the angular value divided by 2π)
//! in MHz, lengths are in µm, times in µs and energies are quoted as E/h in MHz.
//! Interaction coefficients carry their natural units: C₆ in GHz·µm⁶ and C₃ in
//! GHz·µm³. They are stored signed; radius formulas use magnitudes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// GHz → MHz.
pub const GHZ_TO_MHZ: f64 = 1.0e3;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of ⁸⁷Rb in atomic mass units.
pub const RB87_MASS_U: f64 = 86.909;

/// Smallest R_o/λ ratio for which the phase-matched read-out is treated as
/// directional without a warning.
pub const DIRECTIONAL_EMISSION_RATIO: f64 = 5.0;

/// Physical parameters of the store / rotate / retrieve experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Axial standard deviation of the atomic density, µm.
    pub cloud_wz: f64,
    /// Radial standard deviation of the atomic density, µm.
    pub cloud_wr: f64,
    /// Cloud temperature, µK.
    pub temperature: f64,
    /// Atomic mass, u.
    pub atom_mass: f64,
    /// Signal wavelength, nm.
    pub signal_wavelength: f64,
    /// Control (coupling) wavelength, nm.
    pub control_wavelength: f64,
    /// Dipole-trap wavelength, nm.
    pub trap_wavelength: f64,
    /// Peak control Rabi frequency Ω_c/2π, MHz.
    pub omega_c: f64,
    /// Peak signal Rabi frequency Ω_s/2π, MHz.
    pub omega_s: f64,
    /// EIT linewidth Δ_EIT/2π, MHz.
    pub eit_width: f64,
    /// Principal quantum number of the stored Rydberg state.
    pub n_principal: u32,
    /// Period of the store/retrieve cycle, µs.
    pub repetition_period: f64,
    /// Time between storage and read-out, µs.
    pub storage_time: f64,
    /// Detection window (start, end) within each period, µs.
    pub retrieval_window: (f64, f64),
    /// Overall photon detection efficiency.
    pub detection_efficiency: f64,
    /// Detected background counts per µs inside the window.
    pub background_rate: f64,
    /// Mean photon number of the signal pulse.
    pub mean_input_photons: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            cloud_wz: 30.0,
            cloud_wr: 2.8,
            temperature: 100.0,
            atom_mass: RB87_MASS_U,
            signal_wavelength: 780.2,
            control_wavelength: 480.0,
            trap_wavelength: 910.0,
            omega_c: 3.0,
            omega_s: 1.2,
            eit_width: 1.0,
            n_principal: 60,
            repetition_period: 6.0,
            storage_time: 0.9,
            retrieval_window: (0.85, 1.15),
            detection_efficiency: 0.18,
            // roughly 8% of the detected retrieved signal at the default settings
            background_rate: 0.0064,
            mean_input_photons: 10.0,
        }
    }
}

impl ExperimentConfig {
    /// The default configuration as shipped in `config/default.json`.
    pub const DEFAULT_JSON: &'static str = include_str!("../config/default.json");

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every field invariant, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 14] = [
            ("cloud_wz", self.cloud_wz),
            ("cloud_wr", self.cloud_wr),
            ("temperature", self.temperature),
            ("atom_mass", self.atom_mass),
            ("signal_wavelength", self.signal_wavelength),
            ("control_wavelength", self.control_wavelength),
            ("trap_wavelength", self.trap_wavelength),
            ("omega_c", self.omega_c),
            ("omega_s", self.omega_s),
            ("eit_width", self.eit_width),
            ("repetition_period", self.repetition_period),
            ("storage_time", self.storage_time),
            ("mean_input_photons", self.mean_input_photons),
            ("retrieval_window", self.retrieval_window.0),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, format!("must be finite and > 0, got {value}")));
            }
        }
        if self.n_principal == 0 {
            return Err(Error::config("n_principal", "must be > 0"));
        }
        if !(self.detection_efficiency > 0.0 && self.detection_efficiency <= 1.0) {
            return Err(Error::config(
                "detection_efficiency",
                format!("must lie in (0, 1], got {}", self.detection_efficiency),
            ));
        }
        if !(self.background_rate.is_finite() && self.background_rate >= 0.0) {
            return Err(Error::config(
                "background_rate",
                format!("must be finite and >= 0, got {}", self.background_rate),
            ));
        }
        let (start, end) = self.retrieval_window;
        if !(start < end && end < self.repetition_period) {
            return Err(Error::config(
                "retrieval_window",
                format!(
                    "need start < end < repetition_period, got ({start}, {end}) with period {}",
                    self.repetition_period
                ),
            ));
        }
        Ok(())
    }

    pub fn window_length(&self) -> f64 {
        self.retrieval_window.1 - self.retrieval_window.0
    }
}

/// Pair-interaction coefficients for a chosen Rydberg level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoefficients {
    /// van der Waals coefficient, GHz·µm⁶ (signed).
    pub c6: f64,
    /// Resonant dipole–dipole coefficient, GHz·µm³ (signed).
    pub c3: f64,
    /// Transition dipole moment, e·a₀.
    pub dipole_moment: f64,
}

impl PairCoefficients {
    /// 60s₁/₂ pair (C₆) and the 60s₁/₂–59p₃/₂ pair (C₃).
    pub fn rb60() -> Self {
        PairCoefficients {
            c6: -140.0,
            c3: -14.3,
            dipole_moment: (2.0f64 / 9.0).sqrt() * 3468.0,
        }
    }
}

fn require_positive(op: &'static str, name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("{name} must be finite and > 0, got {value}")))
    }
}

/// R_o = (|C₆|/Δ_EIT)^{1/6}, µm.
pub fn optical_blockade_radius(c6: f64, eit_width: f64) -> Result<f64> {
    require_positive("optical_blockade_radius", "|c6|", c6.abs())?;
    require_positive("optical_blockade_radius", "eit_width", eit_width)?;
    Ok((c6.abs() * GHZ_TO_MHZ / eit_width).powf(1.0 / 6.0))
}

/// R_µ = (|C₃|/Ω_µ)^{1/3}, µm.
pub fn microwave_blockade_radius(c3: f64, omega_mu: f64) -> Result<f64> {
    require_positive("microwave_blockade_radius", "|c3|", c3.abs())?;
    require_positive("microwave_blockade_radius", "omega_mu", omega_mu)?;
    Ok((c3.abs() * GHZ_TO_MHZ / omega_mu).cbrt())
}

/// Resonant dipole–dipole interaction |C₃|/R³ in MHz.
pub fn dipole_interaction(c3: f64, r: f64) -> Result<f64> {
    require_positive("dipole_interaction", "r", r)?;
    Ok(c3.abs() * GHZ_TO_MHZ / (r * r * r))
}

/// Spin-wave coherence time 1/(k_eff·v_rms) in µs for counter-propagating
/// signal and control beams.
///
/// Equal signal and control wavelengths give a zero spin-wave wavevector and
/// the time is reported as `f64::INFINITY`.
pub fn motional_dephasing_time(config: &ExperimentConfig) -> Result<f64> {
    require_positive("motional_dephasing_time", "temperature", config.temperature)?;
    require_positive("motional_dephasing_time", "atom_mass", config.atom_mass)?;
    require_positive("motional_dephasing_time", "signal_wavelength", config.signal_wavelength)?;
    require_positive("motional_dephasing_time", "control_wavelength", config.control_wavelength)?;
    // wavenumbers in 1/m
    let k_signal = 1.0e9 / config.signal_wavelength;
    let k_control = 1.0e9 / config.control_wavelength;
    let k_eff = std::f64::consts::TAU * (k_signal - k_control).abs();
    if k_eff == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mass = config.atom_mass * ATOMIC_MASS_UNIT;
    let v_rms = (BOLTZMANN * config.temperature * 1.0e-6 / mass).sqrt();
    Ok(1.0e6 / (k_eff * v_rms))
}

/// Power laws in the principal quantum number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RydbergLaw {
    C6N11,
    DipoleN2,
    LifetimeN3,
    QubitFomN5,
}

impl RydbergLaw {
    pub fn exponent(self) -> i32 {
        match self {
            RydbergLaw::C6N11 => 11,
            RydbergLaw::DipoleN2 => 2,
            RydbergLaw::LifetimeN3 => 3,
            RydbergLaw::QubitFomN5 => 5,
        }
    }
}

impl FromStr for RydbergLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c6_n11" => Ok(RydbergLaw::C6N11),
            "dipole_n2" => Ok(RydbergLaw::DipoleN2),
            "lifetime_n3" => Ok(RydbergLaw::LifetimeN3),
            "qubit_fom_n5" => Ok(RydbergLaw::QubitFomN5),
            other => Err(Error::domain("rydberg_scalings", format!("unknown law `{other}`"))),
        }
    }
}

impl fmt::Display for RydbergLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RydbergLaw::C6N11 => "c6_n11",
            RydbergLaw::DipoleN2 => "dipole_n2",
            RydbergLaw::LifetimeN3 => "lifetime_n3",
            RydbergLaw::QubitFomN5 => "qubit_fom_n5",
        };
        f.write_str(name)
    }
}

/// Scales `value_ref` measured at `n_ref` to principal quantum number `n`.
pub fn rydberg_scalings(n: u32, n_ref: u32, value_ref: f64, law: RydbergLaw) -> Result<f64> {
    if n < 10 || n_ref < 10 {
        return Err(Error::domain(
            "rydberg_scalings",
            format!("n and n_ref must be >= 10, got n={n}, n_ref={n_ref}"),
        ));
    }
    Ok(value_ref * (n as f64 / n_ref as f64).powi(law.exponent()))
}

/// Warns when the optical blockade radius is not comfortably larger than the
/// signal wavelength, the regime where collective read-out stops being
/// directional.
pub fn directional_emission_warning(config: &ExperimentConfig, pair: &PairCoefficients) -> Option<String> {
    let r_o = optical_blockade_radius(pair.c6, config.eit_width).ok()?;
    let lambda_um = config.signal_wavelength * 1.0e-3;
    let ratio = r_o / lambda_um;
    (ratio < DIRECTIONAL_EMISSION_RATIO).then(|| format!("R_o/λ = {ratio:.2} is below {DIRECTIONAL_EMISSION_RATIO}; read-out may not be directional"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn optical_radius_values() {
        // (140e3)^(1/6) evaluated independently through logarithms
        let expected = ((140.0e3f64).ln() / 6.0).exp();
        let r = optical_blockade_radius(140.0, 1.0).unwrap();
        assert_relative_eq!(r, expected, max_relative = 1e-14);
        assert!((r - 7.2059).abs() < 1e-4);
        assert_relative_eq!(optical_blockade_radius(1.0e-3, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        let r64 = optical_blockade_radius(140.0 * 64.0, 1.0).unwrap();
        assert_relative_eq!(r64, 2.0 * r, max_relative = 1e-13);
        // sign of C6 is ignored
        assert_eq!(optical_blockade_radius(-140.0, 1.0).unwrap(), r);
    }

    #[test]
    fn radius_domain_errors() {
        assert!(optical_blockade_radius(0.0, 1.0).is_err());
        assert!(optical_blockade_radius(140.0, 0.0).is_err());
        assert!(optical_blockade_radius(140.0, -1.0).is_err());
        assert!(microwave_blockade_radius(14.3, 0.0).is_err());
        assert!(dipole_interaction(14.3, 0.0).is_err());
        assert!(dipole_interaction(14.3, -2.0).is_err());
    }

    #[test]
    fn microwave_radius_values() {
        assert!((microwave_blockade_radius(14.3, 20.0).unwrap() - 8.942).abs() < 1e-3);
        assert!((microwave_blockade_radius(14.3, 200.0).unwrap() - 4.1505).abs() < 1e-3);
        assert_relative_eq!(microwave_blockade_radius(1.0e-3, 1.0).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn dipole_interaction_values() {
        let v = dipole_interaction(14.3, 7.16).unwrap();
        assert!((v - 38.96).abs() < 0.01);
        assert_relative_eq!(dipole_interaction(14.3, 1.0).unwrap(), 14_300.0, max_relative = 1e-14);
        let r = 5.3;
        assert_relative_eq!(
            dipole_interaction(14.3, 2.0 * r).unwrap(),
            dipole_interaction(14.3, r).unwrap() / 8.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn dipole_inverts_microwave_radius() {
        for &omega in &[0.5, 3.0, 20.0, 200.0, 1234.5] {
            let r = microwave_blockade_radius(-14.3, omega).unwrap();
            assert_relative_eq!(dipole_interaction(-14.3, r).unwrap(), omega, max_relative = 1e-12);
        }
    }

    #[test]
    fn dephasing_time_defaults() {
        let config = ExperimentConfig::default();
        let t = motional_dephasing_time(&config).unwrap();
        assert!((t - 2.03).abs() < 0.01, "t = {t}");

        let hot = ExperimentConfig {
            temperature: 400.0,
            ..config.clone()
        };
        assert_relative_eq!(motional_dephasing_time(&hot).unwrap(), t / 2.0, max_relative = 1e-12);

        let same = ExperimentConfig {
            control_wavelength: 780.2,
            ..config
        };
        assert_eq!(motional_dephasing_time(&same).unwrap(), f64::INFINITY);
    }

    #[test]
    fn scaling_laws() {
        assert_eq!(rydberg_scalings(60, 60, 100.0, RydbergLaw::LifetimeN3).unwrap(), 100.0);
        assert_eq!(rydberg_scalings(70, 70, 3.5, RydbergLaw::C6N11).unwrap(), 3.5);
        assert_relative_eq!(rydberg_scalings(120, 60, 1.0, RydbergLaw::DipoleN2).unwrap(), 4.0);
        assert_relative_eq!(rydberg_scalings(120, 60, 1.0, RydbergLaw::QubitFomN5).unwrap(), 32.0);
        assert!(rydberg_scalings(5, 60, 1.0, RydbergLaw::DipoleN2).is_err());
        assert!("n7_law".parse::<RydbergLaw>().is_err());
        assert_eq!("qubit_fom_n5".parse::<RydbergLaw>().unwrap(), RydbergLaw::QubitFomN5);
    }

    #[test]
    fn shipped_config_matches_defaults() {
        let shipped = ExperimentConfig::from_json(ExperimentConfig::DEFAULT_JSON).unwrap();
        assert_eq!(shipped, ExperimentConfig::default());
    }

    #[test]
    fn unknown_key_rejected() {
        let mut value: serde_json::Value = serde_json::from_str(ExperimentConfig::DEFAULT_JSON).unwrap();
        value["cloud_wx"] = serde_json::json!(1.0);
        let err = ExperimentConfig::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("cloud_wx"), "{err}");
    }

    #[test]
    fn validation_names_field() {
        let bad = ExperimentConfig {
            detection_efficiency: 1.5,
            ..Default::default()
        };
        let err = bad.validate().unwrap_err();
        assert!(err.to_string().contains("detection_efficiency"));

        let bad = ExperimentConfig {
            retrieval_window: (1.2, 1.0),
            ..Default::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("retrieval_window"));

        let bad = ExperimentConfig {
            retrieval_window: (1.0, 7.0),
            ..Default::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("retrieval_window"));

        let bad = ExperimentConfig {
            cloud_wr: -2.8,
            ..Default::default()
        };
        assert!(bad.validate().unwrap_err().to_string().contains("cloud_wr"));
    }

    #[test]
    fn directional_warning_threshold() {
        let config = ExperimentConfig::default();
        assert!(directional_emission_warning(&config, &PairCoefficients::rb60()).is_none());
        let weak = PairCoefficients {
            c6: -1.0e-3,
            ..PairCoefficients::rb60()
        };
        assert!(directional_emission_warning(&config, &weak).is_some());
    }
}

//! Damped least-squares fitting and the resonance and collective Rabi models.

mod heuristics;
mod lm;
mod models;
mod synthetic;

pub use heuristics::{lorentzian_initial, polariton_number_from_duty_cycle, pulse_length_guess, rabi_initial};
pub use lm::{levenberg_marquardt, numerical_jacobian, FitOptions, FitParameter, FitResult, FitStatus, Parameter, Point};
pub use models::{fit, fit_with_options, lorentzian, rabi_collective_model, ModelId, ModelSpec, RabiParams};
pub use synthetic::{LorentzianDesign, RabiDesign};

//! Quantum-defect Rydberg levels and Numerov radial wavefunctions.
//!
//! Wavefunctions solve the pure Coulomb radial equation (atomic units) at the
//! quantum-defect energy E = −1/(2n*²). The integration runs inward on a
//! logarithmic grid r = eᵗ with u(r) = √r·y(t), which turns the radial
//! equation into
//!
//! ```text
//! y'' = [ (l + ½)² − 2r + r²/n*² ] y
//! ```
//!
//! The log step is a power of two and every grid node sits at an integer
//! multiple of it, so wavefunctions built with the same step share nodes.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Infinite-mass Rydberg constant, GHz.
pub const RYDBERG_INFINITY_GHZ: f64 = 3_289_841.960_25;

/// Mass-corrected Rydberg constant of ⁸⁷Rb, GHz.
pub const RYDBERG_RB87_GHZ: f64 = 3_289_821.194_66;

/// A level label. `two_j` holds 2j so half-integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub n: u32,
    pub l: u32,
    pub two_j: u32,
}

impl Level {
    pub fn new(n: u32, l: u32, two_j: u32) -> Self {
        Level { n, l, two_j }
    }
}

/// Quantum defect δ(n) = δ₀ + δ₂/(n − δ₀)² for one (l, j) series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectSeries {
    pub l: u32,
    pub two_j: u32,
    pub delta0: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumDefectModel {
    /// Mass-corrected Rydberg constant, GHz.
    pub rydberg_constant: f64,
    /// Series without an entry are treated as hydrogenic (δ = 0).
    pub defects: Vec<DefectSeries>,
}

impl QuantumDefectModel {
    pub fn hydrogen() -> Self {
        QuantumDefectModel {
            rydberg_constant: RYDBERG_INFINITY_GHZ,
            defects: Vec::new(),
        }
    }

    /// ⁸⁷Rb defects from microwave and millimetre-wave spectroscopy of the
    /// ns, np and nd series (Li et al. 2003; Han et al. 2006).
    pub fn rubidium87() -> Self {
        let series = [
            (0, 1, 3.131_180_4, 0.1784),
            (1, 1, 2.654_884_9, 0.2900),
            (1, 3, 2.641_673_7, 0.2950),
            (2, 3, 1.348_091_71, -0.602_86),
            (2, 5, 1.346_465_72, -0.596_00),
        ];
        QuantumDefectModel {
            rydberg_constant: RYDBERG_RB87_GHZ,
            defects: series
                .iter()
                .map(|&(l, two_j, delta0, delta2)| DefectSeries { l, two_j, delta0, delta2 })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rydberg_constant.is_finite() && self.rydberg_constant > 0.0) {
            return Err(Error::config("rydberg_constant", "must be finite and > 0"));
        }
        let mut seen = BTreeMap::new();
        for s in &self.defects {
            if !(s.delta0 >= 0.0 && s.delta0.is_finite() && s.delta2.is_finite()) {
                return Err(Error::config("defects", format!("series l={} 2j={} has invalid defects", s.l, s.two_j)));
            }
            if seen.insert((s.l, s.two_j), ()).is_some() {
                return Err(Error::config("defects", format!("duplicate series l={} 2j={}", s.l, s.two_j)));
            }
        }
        Ok(())
    }

    pub fn defect(&self, level: Level) -> f64 {
        self.defects
            .iter()
            .find(|s| s.l == level.l && s.two_j == level.two_j)
            .map(|s| {
                let x = level.n as f64 - s.delta0;
                s.delta0 + s.delta2 / (x * x)
            })
            .unwrap_or(0.0)
    }

    /// n* = n − δ(n).
    pub fn effective_n(&self, level: Level) -> Result<f64> {
        let n_star = level.n as f64 - self.defect(level);
        if !(n_star > 0.0) || level.l >= level.n {
            return Err(Error::domain(
                "binding_energy",
                format!("level n={} l={} has n* = {n_star}", level.n, level.l),
            ));
        }
        Ok(n_star)
    }
}

/// −Ry/(n − δ(n))², GHz.
pub fn binding_energy(model: &QuantumDefectModel, level: Level) -> Result<f64> {
    let n_star = model.effective_n(level)?;
    Ok(-model.rydberg_constant / (n_star * n_star))
}

/// |E(b) − E(a)|, GHz.
pub fn transition_frequency(model: &QuantumDefectModel, a: Level, b: Level) -> Result<f64> {
    Ok((binding_energy(model, b)? - binding_energy(model, a)?).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Minimum number of log-grid points per local wavelength.
    pub points_per_wavelength: f64,
    /// Upper bound on the log step.
    pub max_step: f64,
    /// Inner end of the integration, a₀. Defaults to 0.05·n² for series with
    /// a quantum defect and to `floor` otherwise.
    pub inner_cutoff: Option<f64>,
    /// Start of the inward integration, a₀. Defaults to 2.5·n·(n + 15).
    pub outer_radius: Option<f64>,
    /// Smallest radius ever integrated to, a₀.
    pub floor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_wavelength: 40.0,
            max_step: 1.0 / 64.0,
            inner_cutoff: None,
            outer_radius: None,
            floor: 1.0e-3,
        }
    }
}

impl GridSpec {
    /// Log step for a state of effective principal quantum number `n_star`:
    /// the largest power of two not exceeding the wavelength bound.
    pub fn step(&self, n_star: f64) -> f64 {
        let bound = (TAU / (self.points_per_wavelength * n_star.max(1.0))).min(self.max_step);
        2f64.powi(bound.log2().floor() as i32)
    }

    pub fn refined(&self) -> Self {
        GridSpec {
            points_per_wavelength: 2.0 * self.points_per_wavelength,
            max_step: 0.5 * self.max_step,
            ..*self
        }
    }
}

/// Reduced radial wavefunction u(r) = r·R(r) on a log grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWavefunction {
    pub level: Level,
    /// Energy used for the integration, hartree.
    pub energy_au: f64,
    /// Log step of the grid.
    pub step: f64,
    /// ln(grid[0]) / step.
    pub first_index: i64,
    /// Radii in a₀, strictly increasing.
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
}

impl RadialWavefunction {
    /// ∫ f(r) dr over the grid as a trapezoid sum in t = ln r.
    fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        trapezoid_log(&self.grid, self.step, f)
    }

    pub fn norm(&self) -> f64 {
        self.integrate(|i| self.u[i] * self.u[i])
    }

    pub fn expectation_r(&self) -> f64 {
        self.integrate(|i| self.u[i] * self.u[i] * self.grid[i])
    }

    /// Sign changes of u, ignoring the negligible tails.
    pub fn node_count(&self) -> usize {
        let peak = self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let significant: Vec<f64> = self.u.iter().copied().filter(|v| v.abs() > 1e-6 * peak).collect();
        significant.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
    }

    /// Linear interpolation in ln r; zero outside the grid.
    pub fn value_at(&self, r: f64) -> f64 {
        if r < self.grid[0] || r > *self.grid.last().unwrap() {
            return 0.0;
        }
        let pos = r.ln() / self.step - self.first_index as f64;
        let i = (pos.floor() as usize).min(self.u.len() - 2);
        let frac = pos - i as f64;
        self.u[i] * (1.0 - frac) + self.u[i + 1] * frac
    }
}

fn trapezoid_log(grid: &[f64], step: f64, f: impl Fn(usize) -> f64) -> f64 {
    let n = grid.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.5 * (f(0) * grid[0] + f(n - 1) * grid[n - 1]);
    for (i, r) in grid.iter().enumerate().take(n - 1).skip(1) {
        acc += f(i) * r;
    }
    acc * step
}

/// Integrates the radial equation inward at the quantum-defect energy and
/// returns the normalized solution. The sign is fixed so that the outermost
/// (largest) lobe is positive.
pub fn numerov_wavefunction(model: &QuantumDefectModel, level: Level, spec: &GridSpec) -> Result<RadialWavefunction> {
    model.validate()?;
    let n_star = model.effective_n(level)?;
    let defect = model.defect(level);
    let n = level.n as f64;
    let l = level.l as f64;

    let h = spec.step(n_star);
    let r_out = spec.outer_radius.unwrap_or(2.5 * n * (n + 15.0));
    let r_in = spec
        .inner_cutoff
        .unwrap_or(if defect > 0.0 { 0.05 * n * n } else { spec.floor })
        .max(spec.floor);
    if !(r_in < r_out) {
        return Err(Error::Integration(format!("inner radius {r_in} is not below outer radius {r_out}")));
    }
    let outer_turning = n_star * n_star * 2.0;
    if r_out <= outer_turning {
        return Err(Error::Integration(format!(
            "outer radius {r_out} a0 does not exceed the classical turning point {outer_turning} a0"
        )));
    }

    let k_min = (r_in.ln() / h).floor() as i64;
    let k_max = (r_out.ln() / h).ceil() as i64;
    let len = (k_max - k_min + 1) as usize;
    let grid: Vec<f64> = (0..len).map(|i| ((k_min + i as i64) as f64 * h).exp()).collect();

    let centrifugal = (l + 0.5) * (l + 0.5);
    let inv_n2 = 1.0 / (n_star * n_star);
    let h2 = h * h / 12.0;
    // Numerov weights for y'' = g y
    let w: Vec<f64> = grid.iter().map(|&r| h2 * (centrifugal - 2.0 * r + r * r * inv_n2)).collect();

    let mut y = vec![0.0; len];
    y[len - 2] = 1.0e-10;
    for i in (1..len - 1).rev() {
        let next = (2.0 * y[i] * (1.0 + 5.0 * w[i]) - y[i + 1] * (1.0 - w[i + 1])) / (1.0 - w[i - 1]);
        y[i - 1] = next;
        if next.abs() > 1.0e200 {
            for v in &mut y[i - 1..] {
                *v *= 1.0e-200;
            }
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Integration(format!("non-finite amplitude for level {level:?}")));
    }

    let mut u: Vec<f64> = y.iter().zip(&grid).map(|(yi, r)| yi * r.sqrt()).collect();

    // Drop the inner region where the inward solution diverges: |u| falling
    // outward from the floor means the irregular solution dominates. A
    // quantum-defect cutoff already sits outside that region.
    let mut cut = 0;
    if r_in <= spec.floor {
        while cut + 1 < len && u[cut + 1].abs() < u[cut].abs() {
            cut += 1;
        }
    }
    let (grid, mut u_kept) = if cut > 0 { (grid[cut..].to_vec(), u.split_off(cut)) } else { (grid, u) };
    let first_index = k_min + cut as i64;

    let norm = trapezoid_log(&grid, h, |i| u_kept[i] * u_kept[i]);
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Integration(format!("normalization failed for level {level:?}: {norm}")));
    }
    let peak = u_kept.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let scale = peak.signum() / norm.sqrt();
    for v in &mut u_kept {
        *v *= scale;
    }

    Ok(RadialWavefunction {
        level,
        energy_au: -0.5 * inv_n2,
        step: h,
        first_index,
        grid,
        u: u_kept,
    })
}

/// ⟨a| r |b⟩ = ∫ u_a r u_b dr in a₀ (e·a₀ for a dipole element).
///
/// Grids sharing a step are combined node by node; otherwise `b` is
/// interpolated onto the grid of `a`.
pub fn radial_matrix_element(a: &RadialWavefunction, b: &RadialWavefunction) -> Result<f64> {
    let a_lo = a.grid[0];
    let a_hi = *a.grid.last().unwrap();
    let b_lo = b.grid[0];
    let b_hi = *b.grid.last().unwrap();
    if a_hi <= b_lo || b_hi <= a_lo {
        return Err(Error::domain("radial_matrix_element", "wavefunction grids do not overlap"));
    }
    if a.step == b.step {
        let lo = a.first_index.max(b.first_index);
        let hi = (a.first_index + a.grid.len() as i64).min(b.first_index + b.grid.len() as i64);
        let ia = (lo - a.first_index) as usize;
        let ib = (lo - b.first_index) as usize;
        let count = (hi - lo) as usize;
        let grid = &a.grid[ia..ia + count];
        return Ok(trapezoid_log(grid, a.step, |i| a.u[ia + i] * grid[i] * b.u[ib + i]));
    }
    // coarser-step fallback: integrate on the finer of the two grids
    let (fine, coarse) = if a.step < b.step { (a, b) } else { (b, a) };
    Ok(fine.integrate(|i| fine.u[i] * fine.grid[i] * coarse.value_at(fine.grid[i])))
}

/// Radial element times the angular factor.
pub fn transition_dipole(radial: f64, angular_factor: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&angular_factor) {
        return Err(Error::domain(
            "transition_dipole",
            format!("angular factor must lie in [0, 1], got {angular_factor}"),
        ));
    }
    Ok(radial * angular_factor)
}

/// Everything the `structure` command reports for one microwave transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionSummary {
    pub energy_ghz: f64,
    pub radial_element_ea0: f64,
    pub dipole_ea0: f64,
    pub transition_ghz: f64,
}

pub fn summarize_transition(
    model: &QuantumDefectModel,
    initial: Level,
    target: Level,
    angular_factor: f64,
    spec: &GridSpec,
) -> Result<TransitionSummary> {
    let a = numerov_wavefunction(model, initial, spec)?;
    let b = numerov_wavefunction(model, target, spec)?;
    let radial = radial_matrix_element(&a, &b)?;
    Ok(TransitionSummary {
        energy_ghz: binding_energy(model, initial)?,
        radial_element_ea0: radial,
        dipole_ea0: transition_dipole(radial, angular_factor)?,
        transition_ghz: transition_frequency(model, initial, target)?,
    })
}

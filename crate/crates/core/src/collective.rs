//! Collective Dicke-state algebra for 𝒩 stored polaritons.
//!
//! Each polariton is a pseudo-spin-½ in the {|s⟩, |p⟩} basis. A resonant
//! microwave pulse of area Θ rotates the symmetric Dicke state |J = 𝒩/2,
//! M = −𝒩/2⟩ about y; phase-matched read-out projects back onto that state.
//! Rotation matrices use the convention d^J_{M′M}(Θ) = ⟨J M′| e^{−iΘJ_y} |J M⟩.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// A half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(value: i32) -> Self {
        HalfInt(2 * value)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn ln_factorial(n: i32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Terminating Gauss series ₂F₁(a, b; c; x) for a ∈ {0, −1, −2, …}.
pub fn hypergeom_2f1_terminating(a: i32, b: f64, c: f64, x: f64) -> Result<f64> {
    if a > 0 {
        return Err(Error::domain(
            "hypergeom_2f1_terminating",
            format!("a = {a} does not terminate the series"),
        ));
    }
    let terms = (-a) as usize;
    if c <= 0.0 && c.fract() == 0.0 && ((-c) as usize) < terms {
        return Err(Error::domain(
            "hypergeom_2f1_terminating",
            format!("c = {c} is a pole of the series before it terminates"),
        ));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..terms {
        let k = k as f64;
        term *= (a as f64 + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
        sum += term;
    }
    Ok(sum)
}

fn check_quantum_numbers(j: HalfInt, m_prime: HalfInt, m: HalfInt) -> Result<()> {
    let (tj, tmp, tm) = (j.twice(), m_prime.twice(), m.twice());
    if tj < 0 {
        return Err(Error::domain("wigner_d", format!("j = {j} is negative")));
    }
    for (name, tmx) in [("m'", tmp), ("m", tm)] {
        if tmx.abs() > tj {
            return Err(Error::domain("wigner_d", format!("|{name}| exceeds j = {j}")));
        }
        if (tj - tmx) % 2 != 0 {
            return Err(Error::domain("wigner_d", format!("j − {name} is not an integer")));
        }
    }
    Ok(())
}

/// Reduced rotation matrix element d^j_{m′,m}(θ).
///
/// Evaluated from the closed form
/// `(−1)^{m′−m}/(m′−m)! · √[(j−m)!(j+m′)!/((j+m)!(j−m′)!)] · cos^{2j+m−m′}(θ/2)
/// sin^{m′−m}(θ/2) · ₂F₁(m′−j, −m−j; m′−m+1; −tan²(θ/2))` for m′ ≥ m, and
/// from d_{m′,m} = (−1)^{m−m′} d_{m,m′} otherwise. Factorials are taken in
/// log space. Beyond 2j = 48 the matrix exponential is used instead.
pub fn wigner_d(j: HalfInt, m_prime: HalfInt, m: HalfInt, theta: f64) -> Result<f64> {
    check_quantum_numbers(j, m_prime, m)?;
    Ok(wigner_d_unchecked(j.twice(), m_prime.twice(), m.twice(), theta))
}

/// Above this 2j the alternating series loses more than ~1e-10 to
/// cancellation and the matrix exponential takes over.
const CLOSED_FORM_MAX_TWICE_J: i32 = 48;

fn wigner_d_unchecked(tj: i32, tmp: i32, tm: i32, theta: f64) -> f64 {
    if tj > CLOSED_FORM_MAX_TWICE_J {
        let d = d_matrix_exponential(tj, theta);
        return d[(((tmp + tj) / 2) as usize, ((tm + tj) / 2) as usize)];
    }
    closed_form(tj, tmp, tm, theta)
}

/// exp(−iθJ_y) by scaling and squaring a Taylor series; −iJ_y is real and
/// antisymmetric in the standard basis.
fn d_matrix_exponential(tj: i32, theta: f64) -> DMatrix<f64> {
    let dim = (tj + 1) as usize;
    let j = tj as f64 / 2.0;
    let mut gen = DMatrix::zeros(dim, dim);
    for k in 0..dim - 1 {
        let m = -j + k as f64;
        let c = 0.5 * ((j - m) * (j + m + 1.0)).sqrt();
        gen[(k + 1, k)] = -c;
        gen[(k, k + 1)] = c;
    }
    // ‖θ·gen‖ ≤ |θ|·j; scale below 1/2
    let squarings = ((2.0 * theta.abs() * j).log2().ceil().max(0.0)) as i32;
    let a = gen * (theta / 2f64.powi(squarings));
    let mut term = DMatrix::identity(dim, dim);
    let mut sum = term.clone();
    for n in 1..=24 {
        term = &term * &a / n as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn closed_form(tj: i32, tmp: i32, tm: i32, theta: f64) -> f64 {
    if tmp < tm {
        let sign = if ((tm - tmp) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        return sign * closed_form(tj, tm, tmp, theta);
    }
    // integer combinations of j, m, m'
    let k = (tmp - tm) / 2;
    let j_minus_m = (tj - tm) / 2;
    let j_plus_m = (tj + tm) / 2;
    let j_minus_mp = (tj - tmp) / 2;
    let j_plus_mp = (tj + tmp) / 2;
    let cos_power = j_minus_mp + j_plus_m;

    let log_pref = 0.5 * (ln_factorial(j_minus_m) + ln_factorial(j_plus_mp) - ln_factorial(j_plus_m) - ln_factorial(j_minus_mp)) - ln_factorial(k);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let prefactor = sign * log_pref.exp();

    let (s, c) = (0.5 * theta).sin_cos();
    let a = -j_minus_mp;
    let b = -(j_plus_m as f64);
    let c_param = (k + 1) as f64;

    if c.abs() >= 0.5 {
        let tan2 = (s / c) * (s / c);
        let f = hypergeom_2f1_terminating(a, b, c_param, -tan2).expect("parameters terminate");
        prefactor * c.powi(cos_power) * s.powi(k) * f
    } else {
        // Same series with cos^{2j+m−m'} distributed over the terms, which
        // stays finite as cos(θ/2) → 0.
        let mut coeff = 1.0;
        let mut sum = c.powi(cos_power) * s.powi(k);
        for i in 0..(-a) {
            let fi = i as f64;
            coeff *= -(a as f64 + fi) * (b + fi) / ((c_param + fi) * (fi + 1.0));
            let i1 = i + 1;
            sum += coeff * c.powi(cos_power - 2 * i1) * s.powi(k + 2 * i1);
        }
        prefactor * sum
    }
}

/// The (2j+1)×(2j+1) matrix d^j_{m′,m}(θ), rows and columns ordered m = −j..j.
pub fn wigner_d_matrix(j: HalfInt, theta: f64) -> Result<DMatrix<f64>> {
    if j.twice() < 0 {
        return Err(Error::domain("wigner_d_matrix", "j must be non-negative"));
    }
    let tj = j.twice();
    if tj > CLOSED_FORM_MAX_TWICE_J {
        return Ok(d_matrix_exponential(tj, theta));
    }
    let dim = (tj + 1) as usize;
    Ok(DMatrix::from_fn(dim, dim, |row, col| {
        let tmp = -tj + 2 * row as i32;
        let tm = -tj + 2 * col as i32;
        closed_form(tj, tmp, tm, theta)
    }))
}

/// Phase-matched retrieval probability [cos²(θ/2)]^𝒩.
pub fn retrieval_probability(n_polaritons: u32, theta: f64) -> f64 {
    let c = (0.5 * theta).cos();
    (c * c).powi(n_polaritons as i32)
}

/// Superposition over M of a fixed-J Dicke multiplet with real amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeState {
    j: HalfInt,
    /// Amplitudes for M = −J, −J+1, …, J.
    amplitudes: Vec<f64>,
}

impl DickeState {
    /// |J, M⟩.
    pub fn basis(j: HalfInt, m: HalfInt) -> Result<Self> {
        check_quantum_numbers(j, m, m)?;
        let dim = (j.twice() + 1) as usize;
        let mut amplitudes = vec![0.0; dim];
        amplitudes[((m.twice() + j.twice()) / 2) as usize] = 1.0;
        Ok(DickeState { j, amplitudes })
    }

    pub fn from_amplitudes(j: HalfInt, amplitudes: Vec<f64>) -> Result<Self> {
        if j.twice() < 0 || amplitudes.len() != (j.twice() + 1) as usize {
            return Err(Error::domain("DickeState", "amplitude count must be 2J+1"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::domain("DickeState", format!("norm {norm} differs from 1")));
        }
        Ok(DickeState { j, amplitudes })
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, m: HalfInt) -> Option<f64> {
        let offset = m.twice() + self.j.twice();
        if offset < 0 || offset % 2 != 0 {
            return None;
        }
        self.amplitudes.get((offset / 2) as usize).copied()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }

    /// Applies e^{−iθJ_y}.
    pub fn rotate(&self, theta: f64) -> DickeState {
        let d = wigner_d_matrix(self.j, theta).expect("valid j");
        let v = d * nalgebra::DVector::from_column_slice(&self.amplitudes);
        DickeState {
            j: self.j,
            amplitudes: v.iter().copied().collect(),
        }
    }

    /// Probability of read-out into the stored mode, |⟨J, −J|ψ⟩|².
    pub fn readout_probability(&self) -> f64 {
        self.amplitudes[0] * self.amplitudes[0]
    }
}

/// 𝒩 stored polaritons with their spin-wave phases.
///
/// The phases are bookkeeping: a microwave field much larger than the sample
/// rotates every polariton identically, so read-out stays phase matched.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolaritonRegister {
    pub n_polaritons: u32,
    /// Spin-wave phase k·r of each polariton, radians.
    pub phases: Vec<f64>,
    /// Atoms sharing each excitation.
    pub atoms_per_polariton: u32,
}

impl PolaritonRegister {
    pub fn new(n_polaritons: u32, atoms_per_polariton: u32) -> Self {
        PolaritonRegister {
            n_polaritons,
            phases: vec![0.0; n_polaritons as usize],
            atoms_per_polariton,
        }
    }

    pub fn with_phases(phases: Vec<f64>, atoms_per_polariton: u32) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::domain("PolaritonRegister", "phases must be finite"));
        }
        Ok(PolaritonRegister {
            n_polaritons: phases.len() as u32,
            phases,
            atoms_per_polariton,
        })
    }

    /// J = 𝒩/2.
    pub fn total_spin(&self) -> HalfInt {
        HalfInt::from_twice(self.n_polaritons as i32)
    }

    /// The stored state |J = 𝒩/2, M = −𝒩/2⟩.
    pub fn initial_state(&self) -> DickeState {
        let j = self.total_spin();
        DickeState::basis(j, HalfInt::from_twice(-j.twice())).expect("valid Dicke state")
    }
}

/// Amplitudes d^{𝒩/2}_{M′,−𝒩/2}(θ) over M′ after a rotation of the register.
pub fn rotate_register(register: &PolaritonRegister, theta: f64) -> DickeState {
    let j = register.total_spin();
    let tj = j.twice();
    let amplitudes = (0..=tj).map(|i| wigner_d_unchecked(tj, 2 * i - tj, -tj, theta)).collect();
    DickeState { j, amplitudes }
}

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use super::basis::{LevelSet, SiteBasis};
use super::hamiltonian::{pair_couplings, HamiltonianParams, SiteHamiltonian};
use super::spectrum::{eigenspectrum, HermitianOperator};
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest register evolved in the full four-level basis; bigger registers
/// use the two-level reduction.
pub const FULL_BASIS_MAX_POLARITONS: usize = 4;
const TWO_LEVEL_MAX_POLARITONS: usize = 24;

/// Spectral decomposition of H, reused for any number of evolution times.
#[derive(Debug, Clone)]
pub struct Propagator {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Propagator {
    pub fn new<H: HermitianOperator + ?Sized>(h: &H) -> Result<Self> {
        let spectrum = eigenspectrum(h, true)?;
        Ok(Propagator {
            values: spectrum.values,
            vectors: spectrum.vectors.expect("vectors requested"),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// exp(−2πiHt)ψ₀ with H in MHz and t in µs.
    pub fn evolve(&self, psi0: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
        if psi0.len() != self.dim() {
            return Err(Error::domain("time_evolve", "state and Hamiltonian dimensions differ"));
        }
        let norm = psi0.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::domain("time_evolve", format!("initial norm {norm} is not 1")));
        }
        if !t.is_finite() {
            return Err(Error::domain("time_evolve", "time must be finite"));
        }
        let v = self.vectors.map(|x| C64::new(x, 0.0));
        let mut coeffs = v.adjoint() * psi0;
        for (c, &e) in coeffs.iter_mut().zip(&self.values) {
            *c *= C64::from_polar(1.0, -2.0 * PI * e * t);
        }
        Ok(v * coeffs)
    }

    /// ⟨k|exp(−2πiHt)|k⟩ for a basis state k.
    pub fn return_amplitude(&self, index: usize, t: f64) -> C64 {
        self.vectors
            .row(index)
            .iter()
            .zip(&self.values)
            .map(|(&v, &e)| v * v * C64::from_polar(1.0, -2.0 * PI * e * t))
            .sum()
    }
}

pub fn time_evolve<H: HermitianOperator + ?Sized>(h: &H, psi0: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
    Propagator::new(h)?.evolve(psi0, t)
}

/// ⟨ψ|H|ψ⟩ in MHz.
pub fn expectation<H: HermitianOperator + ?Sized>(h: &H, psi: &DVector<C64>) -> f64 {
    let m = h.matrix().map(|x| C64::new(x, 0.0));
    psi.dotc(&(m * psi)).re
}

pub fn basis_state(dim: usize, index: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// |⟨s…s|ψ⟩|², the overlap with the phase-matched stored state.
pub fn retrieval_overlap(psi: &DVector<C64>, basis: &SiteBasis) -> Result<f64> {
    if psi.len() != basis.dim() {
        return Err(Error::domain("retrieval_overlap", "state and basis dimensions differ"));
    }
    let index = basis
        .all_s_index()
        .ok_or_else(|| Error::domain("retrieval_overlap", "basis lacks the all-s state"))?;
    Ok(psi[index].norm_sqr())
}

/// Return probability of |s…s⟩ in the {s, p₀} reduction, where the drive and
/// the zz channel commute: every product of μ^z eigenstates (s ± p₀)/√2 is an
/// eigenstate with energy (Ω/2)Σx_i + w_z Σ V_ij x_i x_j.
pub fn two_level_return_probability(n: usize, omega_mu: f64, couplings: &[(usize, usize, f64)], zz_weight: f64, t: f64) -> Result<f64> {
    if n > TWO_LEVEL_MAX_POLARITONS {
        return Err(Error::Dimension {
            dim: 1 << n.min(63),
            limit: 1 << TWO_LEVEL_MAX_POLARITONS,
        });
    }
    let mut amplitude = C64::new(0.0, 0.0);
    for bits in 0u32..(1 << n) {
        let x = |i: usize| if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
        let mut energy: f64 = (0..n).map(|i| 0.5 * omega_mu * x(i)).sum();
        for &(i, j, v) in couplings {
            energy += zz_weight * v * x(i) * x(j);
        }
        amplitude += C64::from_polar(1.0, -2.0 * PI * energy * t);
    }
    Ok((amplitude / (1u64 << n) as f64).norm_sqr())
}

/// Probability that polaritons stored at `positions` are still in |s…s⟩
/// after a pulse of `t` µs under the interacting Hamiltonian.
///
/// Up to four polaritons use the exact total-M = 0 sector of the four-level
/// basis; larger registers use the two-level reduction.
pub fn stored_state_return_probability(positions: &[[f64; 3]], params: &HamiltonianParams, t: f64) -> Result<f64> {
    let n = positions.len();
    if n == 0 || t == 0.0 {
        return Ok(1.0);
    }
    if n <= FULL_BASIS_MAX_POLARITONS {
        let basis = SiteBasis::with_sector(n, LevelSet::Full, 0)?;
        let index = basis.all_s_index().expect("all-s lies in the M = 0 sector");
        let h = SiteHamiltonian::assemble(basis, positions.to_vec(), *params)?;
        Ok(Propagator::new(&h)?.return_amplitude(index, t).norm_sqr())
    } else {
        let couplings = pair_couplings(positions, params.c3, params.graph)?;
        two_level_return_probability(n, params.omega_mu, &couplings, params.weights.zz, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::retrieval_probability;
    use crate::interactions::basis::SiteLevel;
    use crate::interactions::hamiltonian::{build_drive_hamiltonian, line_positions};

    #[test]
    fn single_polariton_pi_pulse() {
        let basis = SiteBasis::new(1, LevelSet::Full).unwrap();
        let omega = 7.0;
        let h = build_drive_hamiltonian(&basis, omega).unwrap();
        let psi = time_evolve(&h, &basis_state(4, 0), 0.5 / omega).unwrap();
        let p0 = basis.index_of(&[SiteLevel::PZero]).unwrap();
        assert!((psi[p0].norm_sqr() - 1.0).abs() < 1e-12);
        assert!(retrieval_overlap(&psi, &basis).unwrap() < 1e-12);
    }

    #[test]
    fn identity_and_orthogonal_overlaps() {
        let basis = SiteBasis::new(2, LevelSet::Full).unwrap();
        assert_eq!(retrieval_overlap(&basis_state(16, 0), &basis).unwrap(), 1.0);
        assert_eq!(retrieval_overlap(&basis_state(16, 5), &basis).unwrap(), 0.0);
    }

    #[test]
    fn non_interacting_register_follows_collective_law() {
        let basis = SiteBasis::new(3, LevelSet::Full).unwrap();
        let omega = 4.0;
        let h = SiteHamiltonian::assemble(basis.clone(), line_positions(&[0.0, 9.0, 18.0]), HamiltonianParams::new(omega, 0.0)).unwrap();
        let prop = Propagator::new(&h).unwrap();
        for k in 0..20 {
            let t = 0.013 * k as f64;
            let psi = prop.evolve(&basis_state(64, 0), t).unwrap();
            let theta = 2.0 * PI * omega * t;
            let p = retrieval_overlap(&psi, &basis).unwrap();
            assert!((p - retrieval_probability(3, theta)).abs() < 1e-10);
            assert!((psi.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn unnormalised_state_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let psi = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(time_evolve(&h, &psi, 1.0).is_err());
    }

    #[test]
    fn two_level_closed_form_matches_matrix_evolution() {
        let positions = vec![[0.0, 0.0, 0.0], [7.5, 0.0, 0.0], [3.0, 2.0, 9.0]];
        let params = HamiltonianParams::new(13.0, -14.3);
        let basis = SiteBasis::new(3, LevelSet::TwoLevel).unwrap();
        let h = SiteHamiltonian::assemble(basis.clone(), positions.clone(), params).unwrap();
        let prop = Propagator::new(&h).unwrap();
        let couplings = pair_couplings(&positions, params.c3, params.graph).unwrap();
        for &t in &[0.0, 0.03, 0.077, 0.3] {
            let exact = prop.return_amplitude(basis.all_s_index().unwrap(), t).norm_sqr();
            let closed = two_level_return_probability(3, params.omega_mu, &couplings, params.weights.zz, t).unwrap();
            assert!((exact - closed).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn sector_evolution_matches_full_basis() {
        let positions = vec![[0.0, 0.0, 0.0], [7.5, 0.0, 0.0], [3.0, 2.0, 9.0]];
        let params = HamiltonianParams::new(21.0, -14.3);
        let full = SiteHamiltonian::assemble(SiteBasis::new(3, LevelSet::Full).unwrap(), positions.clone(), params).unwrap();
        let prop = Propagator::new(&full).unwrap();
        for &t in &[0.01, 0.05, 1.0 / 21.0] {
            let reference = prop.return_amplitude(0, t).norm_sqr();
            let sector = stored_state_return_probability(&positions, &params, t).unwrap();
            assert!((reference - sector).abs() < 1e-10);
        }
    }
}

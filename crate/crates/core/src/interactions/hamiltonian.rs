use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::{SiteBasis, SiteLevel};
use crate::error::{Error, Result};
use crate::units::GHZ_TO_MHZ;

/// One matrix element of a single-site operator: |to⟩⟨from| × coefficient.
type Transition = (SiteLevel, SiteLevel, f64);

/// μ^z: the π component, s ↔ p₀.
const MU_Z: [Transition; 2] = [(SiteLevel::S, SiteLevel::PZero, 1.0), (SiteLevel::PZero, SiteLevel::S, 1.0)];
/// μ⁺ = |p₊₁⟩⟨s| − |s⟩⟨p₋₁|, raising m by one.
const MU_PLUS: [Transition; 2] = [(SiteLevel::S, SiteLevel::PPlus, 1.0), (SiteLevel::PMinus, SiteLevel::S, -1.0)];
/// μ⁻ = (μ⁺)†.
const MU_MINUS: [Transition; 2] = [(SiteLevel::PPlus, SiteLevel::S, 1.0), (SiteLevel::S, SiteLevel::PMinus, -1.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingGraph {
    #[default]
    AllPairs,
    /// Consecutive sites in the order given, as an open chain.
    NearestNeighbour,
}

/// Weights of the exchange channels in V Σ [w_±(μ⁺μ⁻ + μ⁻μ⁺) + w_z μ^zμ^z].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelWeights {
    pub exchange: f64,
    pub zz: f64,
}

impl Default for ChannelWeights {
    fn default() -> Self {
        ChannelWeights { exchange: 1.0, zz: -2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    /// MHz
    pub omega_mu: f64,
    /// GHz·µm³, signed
    pub c3: f64,
    pub graph: CouplingGraph,
    pub weights: ChannelWeights,
}

impl HamiltonianParams {
    pub fn new(omega_mu: f64, c3: f64) -> Self {
        HamiltonianParams {
            omega_mu,
            c3,
            graph: CouplingGraph::AllPairs,
            weights: ChannelWeights::default(),
        }
    }
}

/// Real symmetric Hamiltonian in MHz over a site basis.
#[derive(Debug, Clone)]
pub struct SiteHamiltonian {
    pub basis: SiteBasis,
    pub matrix: DMatrix<f64>,
    pub positions: Vec<[f64; 3]>,
    pub params: HamiltonianParams,
}

impl SiteHamiltonian {
    pub fn assemble(basis: SiteBasis, positions: Vec<[f64; 3]>, params: HamiltonianParams) -> Result<Self> {
        let drive = build_drive_hamiltonian(&basis, params.omega_mu)?;
        let dd = build_dd_hamiltonian(&basis, &positions, params.c3, params.graph, params.weights)?;
        Ok(SiteHamiltonian {
            matrix: drive + dd,
            basis,
            positions,
            params,
        })
    }
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Coupled pairs (i, j, V_ij) with V_ij = C₃·10³/R_ij³ in MHz.
pub fn pair_couplings(positions: &[[f64; 3]], c3: f64, graph: CouplingGraph) -> Result<Vec<(usize, usize, f64)>> {
    let n = positions.len();
    let pairs: Vec<(usize, usize)> = match graph {
        CouplingGraph::AllPairs => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        CouplingGraph::NearestNeighbour => (1..n).map(|j| (j - 1, j)).collect(),
    };
    pairs
        .into_iter()
        .map(|(i, j)| {
            let r = distance(&positions[i], &positions[j]);
            if !(r > 0.0) {
                return Err(Error::domain("build_dd_hamiltonian", format!("sites {i} and {j} coincide")));
            }
            Ok((i, j, c3 * GHZ_TO_MHZ / (r * r * r)))
        })
        .collect()
}

fn add_single_site(basis: &SiteBasis, matrix: &mut DMatrix<f64>, site: usize, op: &[Transition], scale: f64) {
    for col in 0..basis.dim() {
        let code = basis.code(col);
        let level = basis.level_in_code(code, site);
        for &(from, to, c) in op {
            if level != from.index() {
                continue;
            }
            if let Some(row) = basis.index_of_code(basis.replace_in_code(code, site, to.index())) {
                matrix[(row, col)] += scale * c;
            }
        }
    }
}

fn add_two_site(basis: &SiteBasis, matrix: &mut DMatrix<f64>, (i, op_i): (usize, &[Transition]), (j, op_j): (usize, &[Transition]), scale: f64) {
    for col in 0..basis.dim() {
        let code = basis.code(col);
        let (li, lj) = (basis.level_in_code(code, i), basis.level_in_code(code, j));
        for &(from_i, to_i, ci) in op_i {
            if li != from_i.index() {
                continue;
            }
            for &(from_j, to_j, cj) in op_j {
                if lj != from_j.index() {
                    continue;
                }
                let target = basis.replace_in_code(basis.replace_in_code(code, i, to_i.index()), j, to_j.index());
                // Misses only happen when a level is absent from a reduced basis.
                if let Some(row) = basis.index_of_code(target) {
                    matrix[(row, col)] += scale * ci * cj;
                }
            }
        }
    }
}

/// (Ω_µ/2) Σ_i μ^z_i on resonance in the rotating frame.
pub fn build_drive_hamiltonian(basis: &SiteBasis, omega_mu: f64) -> Result<DMatrix<f64>> {
    if !(omega_mu >= 0.0) || !omega_mu.is_finite() {
        return Err(Error::domain("build_drive_hamiltonian", format!("omega_mu = {omega_mu}")));
    }
    let mut matrix = DMatrix::zeros(basis.dim(), basis.dim());
    if omega_mu > 0.0 {
        for site in 0..basis.sites() {
            add_single_site(basis, &mut matrix, site, &MU_Z, 0.5 * omega_mu);
        }
    }
    Ok(matrix)
}

/// Σ_{coupled ij} V_ij [w_±(μ⁺_iμ⁻_j + μ⁻_iμ⁺_j) + w_z μ^z_iμ^z_j].
pub fn build_dd_hamiltonian(
    basis: &SiteBasis,
    positions: &[[f64; 3]],
    c3: f64,
    graph: CouplingGraph,
    weights: ChannelWeights,
) -> Result<DMatrix<f64>> {
    if positions.len() != basis.sites() {
        return Err(Error::domain(
            "build_dd_hamiltonian",
            format!("{} positions for {} sites", positions.len(), basis.sites()),
        ));
    }
    if positions.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::domain("build_dd_hamiltonian", "positions must be finite"));
    }
    let mut matrix = DMatrix::zeros(basis.dim(), basis.dim());
    for (i, j, v) in pair_couplings(positions, c3, graph)? {
        add_two_site(basis, &mut matrix, (i, &MU_PLUS), (j, &MU_MINUS), v * weights.exchange);
        add_two_site(basis, &mut matrix, (i, &MU_MINUS), (j, &MU_PLUS), v * weights.exchange);
        add_two_site(basis, &mut matrix, (i, &MU_Z), (j, &MU_Z), v * weights.zz);
    }
    Ok(matrix)
}

/// Positions on the x axis.
pub fn line_positions(xs: &[f64]) -> Vec<[f64; 3]> {
    xs.iter().map(|&x| [x, 0.0, 0.0]).collect()
}

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::basis::{LevelSet, SiteBasis, SiteLevel};
use super::hamiltonian::{line_positions, ChannelWeights, HamiltonianParams, SiteHamiltonian};
use super::spectrum::eigenspectrum;
use crate::error::{Error, Result};

/// Symmetry block of the pair Hamiltonian: total M and site-exchange parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BranchLabel {
    pub total_m: i32,
    pub parity: i8,
}

impl BranchLabel {
    /// The block containing |s s⟩, the only one the drive reaches from the
    /// stored state.
    pub const BRIGHT: BranchLabel = BranchLabel { total_m: 0, parity: 1 };
}

#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub label: BranchLabel,
    /// MHz, one per scan radius.
    pub energies: Vec<f64>,
    /// Weight of the eigenvector on states with a p₋₁ or p₊₁ polariton.
    pub sigma_weight: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub branches: (usize, usize),
    /// Interpolated radius, µm.
    pub r: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenScan {
    pub radii: Vec<f64>,
    /// Sorted spectrum at each radius.
    pub spectra: Vec<Vec<f64>>,
    pub branches: Vec<Branch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanParams {
    pub omega_mu: f64,
    pub c3: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
    pub weights: ChannelWeights,
}

/// Orthonormal symmetry-adapted basis of the 16-dimensional pair space,
/// grouped into (M, parity) blocks.
fn symmetry_blocks(basis: &SiteBasis) -> Vec<(BranchLabel, DMatrix<f64>)> {
    let mut blocks = Vec::new();
    for total_m in -2..=2 {
        for parity in [1i8, -1] {
            let mut columns = Vec::new();
            for a in SiteLevel::ALL {
                for b in SiteLevel::ALL {
                    if a.index() > b.index() || a.m() + b.m() != total_m {
                        continue;
                    }
                    let mut v = nalgebra::DVector::zeros(basis.dim());
                    let ab = basis.index_of(&[a, b]).expect("full basis");
                    if a == b {
                        if parity < 0 {
                            continue;
                        }
                        v[ab] = 1.0;
                    } else {
                        let ba = basis.index_of(&[b, a]).expect("full basis");
                        v[ab] = std::f64::consts::FRAC_1_SQRT_2;
                        v[ba] = parity as f64 * std::f64::consts::FRAC_1_SQRT_2;
                    }
                    columns.push(v);
                }
            }
            if !columns.is_empty() {
                blocks.push((BranchLabel { total_m, parity }, DMatrix::from_columns(&columns)));
            }
        }
    }
    blocks
}

struct BlockEigen {
    values: Vec<f64>,
    /// Eigenvectors in the product basis.
    vectors: DMatrix<f64>,
}

fn pair_hamiltonian(omega_mu: f64, c3: f64, r: f64, weights: ChannelWeights) -> Result<SiteHamiltonian> {
    let basis = SiteBasis::new(2, LevelSet::Full)?;
    let params = HamiltonianParams {
        weights,
        ..HamiltonianParams::new(omega_mu, c3)
    };
    SiteHamiltonian::assemble(basis, line_positions(&[0.0, r]), params)
}

fn diagonalise_blocks(h: &SiteHamiltonian, blocks: &[(BranchLabel, DMatrix<f64>)]) -> Result<Vec<BlockEigen>> {
    blocks
        .iter()
        .map(|(_, u)| {
            let reduced = u.transpose() * &h.matrix * u;
            // round-off from the projection would trip the strict symmetry check
            let reduced = (&reduced + reduced.transpose()) * 0.5;
            let spectrum = eigenspectrum(&reduced, true)?;
            Ok(BlockEigen {
                values: spectrum.values,
                vectors: u * spectrum.vectors.expect("vectors requested"),
            })
        })
        .collect()
}

/// Assignment of new eigenvectors to previous branches by largest overlap,
/// near-ties broken by eigenvalue proximity.
fn track(prev: &BlockEigen, prev_order: &[usize], next: &BlockEigen) -> Vec<usize> {
    let n = prev_order.len();
    let mut candidates = Vec::with_capacity(n * n);
    for (branch, &pi) in prev_order.iter().enumerate() {
        for nj in 0..n {
            let overlap = prev.vectors.column(pi).dot(&next.vectors.column(nj)).abs();
            let gap = (prev.values[pi] - next.values[nj]).abs();
            candidates.push((branch, nj, overlap, gap));
        }
    }
    candidates.sort_by(|a, b| {
        if (a.2 - b.2).abs() > 1e-6 {
            b.2.total_cmp(&a.2)
        } else {
            a.3.total_cmp(&b.3)
        }
    });
    let mut assigned = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (branch, nj, _, _) in candidates {
        if assigned[branch] == usize::MAX && !taken[nj] {
            assigned[branch] = nj;
            taken[nj] = true;
        }
    }
    assigned
}

fn sigma_weights(basis: &SiteBasis) -> Vec<bool> {
    (0..basis.dim())
        .map(|i| basis.state(i).iter().any(|l| matches!(l, SiteLevel::PMinus | SiteLevel::PPlus)))
        .collect()
}

/// Two-polariton spectrum against separation on `steps` evenly spaced radii.
pub fn pair_eigenscan(params: ScanParams) -> Result<EigenScan> {
    let ScanParams {
        omega_mu,
        c3,
        r_min,
        r_max,
        steps,
        weights,
    } = params;
    if !(r_min > 0.0) || !(r_max > r_min) || !r_max.is_finite() {
        return Err(Error::domain("pair_eigenscan", format!("radius range [{r_min}, {r_max}]")));
    }
    if steps < 2 {
        return Err(Error::domain("pair_eigenscan", "need at least two radii"));
    }
    let radii: Vec<f64> = (0..steps).map(|k| r_min + (r_max - r_min) * k as f64 / (steps - 1) as f64).collect();
    let basis = SiteBasis::new(2, LevelSet::Full)?;
    let blocks = symmetry_blocks(&basis);
    let sigma = sigma_weights(&basis);

    let per_radius: Vec<(Vec<f64>, Vec<BlockEigen>)> = radii
        .par_iter()
        .map(|&r| {
            let h = pair_hamiltonian(omega_mu, c3, r, weights)?;
            let spectrum = eigenspectrum(&h, false)?.values;
            Ok((spectrum, diagonalise_blocks(&h, &blocks)?))
        })
        .collect::<Result<_>>()?;

    let mut branches = Vec::new();
    for (b, (label, u)) in blocks.iter().enumerate() {
        let size = u.ncols();
        let mut order: Vec<usize> = (0..size).collect();
        let mut tracks: Vec<Branch> = (0..size)
            .map(|_| Branch {
                label: *label,
                energies: Vec::with_capacity(steps),
                sigma_weight: Vec::with_capacity(steps),
            })
            .collect();
        for k in 0..steps {
            let eig = &per_radius[k].1[b];
            if k > 0 {
                order = track(&per_radius[k - 1].1[b], &order, eig);
            }
            for (branch, &col) in tracks.iter_mut().zip(&order) {
                branch.energies.push(eig.values[col]);
                let v = eig.vectors.column(col);
                branch
                    .sigma_weight
                    .push(v.iter().zip(&sigma).filter(|(_, &s)| s).map(|(x, _)| x * x).sum());
            }
        }
        branches.extend(tracks);
    }

    Ok(EigenScan {
        radii,
        spectra: per_radius.into_iter().map(|(s, _)| s).collect(),
        branches,
    })
}

impl EigenScan {
    /// Sign changes of E_a − E_b between neighbouring radii, restricted to
    /// branches accepted by `include` and radii ≥ `r_from`. Exactly
    /// degenerate pairs never count.
    pub fn crossings(&self, r_from: f64, include: impl Fn(&Branch) -> bool) -> Vec<Crossing> {
        let scale = self.spectra.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        let tol = 1e-9 * scale;
        let mut out = Vec::new();
        for a in 0..self.branches.len() {
            for b in a + 1..self.branches.len() {
                if !include(&self.branches[a]) || !include(&self.branches[b]) {
                    continue;
                }
                let (ea, eb) = (&self.branches[a].energies, &self.branches[b].energies);
                for k in 0..self.radii.len() - 1 {
                    if self.radii[k] < r_from {
                        continue;
                    }
                    let (d0, d1) = (ea[k] - eb[k], ea[k + 1] - eb[k + 1]);
                    if d0.abs() > tol && d1.abs() > tol && d0.signum() != d1.signum() {
                        let r = self.radii[k] + (self.radii[k + 1] - self.radii[k]) * d0 / (d0 - d1);
                        out.push(Crossing { branches: (a, b), r });
                    }
                }
            }
        }
        out.sort_by(|x, y| x.r.total_cmp(&y.r));
        out
    }

    /// (branch, radius) points where a branch of the accepted set carries
    /// between `lo` and `hi` of its weight in the σ (m = ±1) channels.
    pub fn mixing_points(&self, r_from: f64, lo: f64, hi: f64, include: impl Fn(&Branch) -> bool) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (index, branch) in self.branches.iter().enumerate() {
            if !include(branch) {
                continue;
            }
            for (k, &w) in branch.sigma_weight.iter().enumerate() {
                if self.radii[k] >= r_from && (lo..=hi).contains(&w) {
                    out.push((index, self.radii[k]));
                }
            }
        }
        out
    }
}

/// Shift of the outermost dressed-pair splitting from its non-interacting
/// value 2Ω: (E₊₊ − E₋₋) − 2Ω, where E₊₊ and E₋₋ belong to the eigenstates
/// with the largest overlap on |+ +⟩ and |− −⟩, |±⟩ = (|s⟩ ± |p₀⟩)/√2.
pub fn splitting_deviation(omega_mu: f64, c3: f64, r: f64, weights: ChannelWeights) -> Result<f64> {
    let h = pair_hamiltonian(omega_mu, c3, r, weights)?;
    let spectrum = eigenspectrum(&h, true)?;
    let vectors = spectrum.vectors.expect("vectors requested");
    let basis = &h.basis;
    let dressed = |sign: f64| {
        let mut v = nalgebra::DVector::zeros(basis.dim());
        for (a, ca) in [(SiteLevel::S, 1.0), (SiteLevel::PZero, sign)] {
            for (b, cb) in [(SiteLevel::S, 1.0), (SiteLevel::PZero, sign)] {
                v[basis.index_of(&[a, b]).expect("full basis")] = 0.5 * ca * cb;
            }
        }
        v
    };
    let energy_of = |target: nalgebra::DVector<f64>| {
        let (k, _) = (0..vectors.ncols())
            .map(|k| (k, vectors.column(k).dot(&target).powi(2)))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        spectrum.values[k]
    };
    Ok(energy_of(dressed(1.0)) - energy_of(dressed(-1.0)) - 2.0 * omega_mu)
}

/// Non-interacting two-polariton dressed energies: sums of {−Ω/2, 0, 0, Ω/2}.
pub fn dressed_pair_energies(omega_mu: f64) -> Vec<f64> {
    let single = [-0.5 * omega_mu, 0.0, 0.0, 0.5 * omega_mu];
    let mut out: Vec<f64> = single.iter().flat_map(|a| single.iter().map(move |b| a + b)).collect();
    out.sort_by(f64::total_cmp);
    out
}

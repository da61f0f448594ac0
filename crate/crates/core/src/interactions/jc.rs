use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_JC_SITES: usize = 3;
const MAX_FOCK_CUTOFF: u32 = 3;
const MAX_JC_DIMENSION: usize = 10_000;

/// Jaynes–Cummings chain with dipolar hopping and a coherent drive,
/// g Σ(σ⁺a + σ⁻a†) + V Σ_{⟨ij⟩}(σ⁺_iσ⁻_j + h.c.) + f Σ(a + a†), on an open
/// chain. Local states are ordered (spin, photon number) with spin-major
/// index `spin·(cutoff+1) + n`; sites are site-major as in [`super::SiteBasis`].
#[derive(Debug, Clone)]
pub struct JcChain {
    pub sites: usize,
    pub fock_cutoff: u32,
    pub g: f64,
    pub f: f64,
    pub v_dd: f64,
    pub matrix: DMatrix<f64>,
}

impl JcChain {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// (excited, photons) on each site.
    pub fn decode(&self, index: usize) -> Vec<(bool, u32)> {
        decode(index, self.sites, self.fock_cutoff)
    }

    /// Σ_i (σ⁺_iσ⁻_i + a†_i a_i) for a basis state.
    pub fn excitation_number(&self, index: usize) -> u32 {
        self.decode(index).iter().map(|&(e, n)| e as u32 + n).sum()
    }
}

fn decode(index: usize, sites: usize, cutoff: u32) -> Vec<(bool, u32)> {
    let photons = cutoff as usize + 1;
    let local = 2 * photons;
    let mut out = vec![(false, 0); sites];
    let mut rest = index;
    for site in (0..sites).rev() {
        let l = rest % local;
        rest /= local;
        out[site] = (l >= photons, (l % photons) as u32);
    }
    out
}

fn encode(state: &[(bool, u32)], cutoff: u32) -> usize {
    let photons = cutoff as usize + 1;
    state
        .iter()
        .fold(0, |acc, &(e, n)| acc * 2 * photons + (e as usize) * photons + n as usize)
}

pub fn build_jc_chain(sites: usize, fock_cutoff: u32, g: f64, f: f64, v_dd: f64) -> Result<JcChain> {
    if sites == 0 || sites > MAX_JC_SITES {
        return Err(Error::domain("build_jc_chain", format!("sites = {sites} outside 1..={MAX_JC_SITES}")));
    }
    if fock_cutoff > MAX_FOCK_CUTOFF {
        return Err(Error::domain(
            "build_jc_chain",
            format!("fock_cutoff = {fock_cutoff} exceeds {MAX_FOCK_CUTOFF}"),
        ));
    }
    if ![g, f, v_dd].iter().all(|x| x.is_finite()) {
        return Err(Error::domain("build_jc_chain", "couplings must be finite"));
    }
    let dim = (2 * (fock_cutoff as usize + 1)).pow(sites as u32);
    if dim > MAX_JC_DIMENSION {
        return Err(Error::Dimension {
            dim,
            limit: MAX_JC_DIMENSION,
        });
    }

    let mut matrix = DMatrix::zeros(dim, dim);
    let mut add = |from: usize, to: &[(bool, u32)], value: f64| {
        let row = encode(to, fock_cutoff);
        matrix[(row, from)] += value;
        matrix[(from, row)] += value;
    };
    for col in 0..dim {
        let state = decode(col, sites, fock_cutoff);
        for i in 0..sites {
            let (excited, n) = state[i];
            // σ⁺a and its conjugate: one term per pair of connected states
            if !excited && n > 0 {
                let mut to = state.clone();
                to[i] = (true, n - 1);
                add(col, &to, g * (n as f64).sqrt());
            }
            // f(a + a†): the a† direction, conjugate added by `add`
            if n < fock_cutoff {
                let mut to = state.clone();
                to[i] = (excited, n + 1);
                add(col, &to, f * ((n + 1) as f64).sqrt());
            }
            // σ⁺_iσ⁻_{i+1} + h.c.
            if i + 1 < sites && !excited && state[i + 1].0 {
                let mut to = state.clone();
                to[i].0 = true;
                to[i + 1].0 = false;
                add(col, &to, v_dd);
            }
        }
    }
    Ok(JcChain {
        sites,
        fock_cutoff,
        g,
        f,
        v_dd,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interactions::spectrum::{check_hermitian, eigenspectrum};

    #[test]
    fn dimension_and_hermiticity() {
        let chain = build_jc_chain(3, 3, 1.3, 0.4, 0.7).unwrap();
        assert_eq!(chain.dim(), 512);
        check_hermitian(&chain.matrix).unwrap();
        for i in 0..chain.dim() {
            assert_eq!(encode(&chain.decode(i), 3), i);
        }
    }

    #[test]
    fn excitation_number_conserved_without_drive() {
        let chain = build_jc_chain(2, 2, 1.1, 0.0, 0.6).unwrap();
        for r in 0..chain.dim() {
            for c in 0..chain.dim() {
                if chain.excitation_number(r) != chain.excitation_number(c) {
                    assert!(chain.matrix[(r, c)].abs() < 1e-12);
                }
            }
        }
        let driven = build_jc_chain(2, 2, 1.1, 0.3, 0.6).unwrap();
        let leaks = (0..driven.dim())
            .flat_map(|r| (0..driven.dim()).map(move |c| (r, c)))
            .any(|(r, c)| driven.excitation_number(r) != driven.excitation_number(c) && driven.matrix[(r, c)] != 0.0);
        assert!(leaks);
    }

    #[test]
    fn vacuum_rabi_pair() {
        let g = 2.0;
        let chain = build_jc_chain(1, 2, g, 0.0, 0.0).unwrap();
        let one = [encode(&[(true, 0)], 2), encode(&[(false, 1)], 2)];
        let block = DMatrix::from_fn(2, 2, |r, c| chain.matrix[(one[r], one[c])]);
        let values = eigenspectrum(&block, false).unwrap().values;
        assert!((values[0] + g).abs() < 1e-14 && (values[1] - g).abs() < 1e-14);
    }

    #[test]
    fn hopping_doublet() {
        let v = 0.8;
        let chain = build_jc_chain(2, 0, 0.0, 0.0, v).unwrap();
        let values = eigenspectrum(&chain, false).unwrap().values;
        // ground and doubly excited at 0, one-excitation doublet at ±V
        let expected = [-v, 0.0, 0.0, v];
        for (a, b) in values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn limits() {
        assert!(build_jc_chain(4, 1, 1.0, 0.0, 0.0).is_err());
        assert!(build_jc_chain(2, 4, 1.0, 0.0, 0.0).is_err());
        assert!(build_jc_chain(0, 1, 1.0, 0.0, 0.0).is_err());
    }
}

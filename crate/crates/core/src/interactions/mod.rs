//! Interacting-polariton Hamiltonians: microwave drive plus resonant
//! dipole–dipole exchange between localized polaritons, exact
//! diagonalization, pair eigenvalue scans and unitary evolution.
//!
//! Energies are ordinary frequencies in MHz and times in µs, so the
//! propagator is exp(−2πiHt).

mod basis;
mod evolve;
mod hamiltonian;
mod jc;
mod scan;
mod spectrum;

pub use basis::{LevelSet, SiteBasis, SiteLevel, MAX_DIMENSION};
pub use evolve::{
    basis_state, expectation, retrieval_overlap, stored_state_return_probability, time_evolve, two_level_return_probability, Propagator, C64,
    FULL_BASIS_MAX_POLARITONS,
};
pub use hamiltonian::{
    build_dd_hamiltonian, build_drive_hamiltonian, line_positions, pair_couplings, ChannelWeights, CouplingGraph, HamiltonianParams, SiteHamiltonian,
};
pub use jc::{build_jc_chain, JcChain};
pub use scan::{dressed_pair_energies, pair_eigenscan, splitting_deviation, Branch, BranchLabel, Crossing, EigenScan, ScanParams};
pub use spectrum::{check_hermitian, eigenspectrum, HermitianOperator, Spectrum};

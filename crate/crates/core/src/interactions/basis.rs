use serde::Serialize;

use crate::error::{Error, Result};

/// Largest Hilbert-space dimension handled with dense matrices.
pub const MAX_DIMENSION: usize = 4096;

const MAX_SITES: usize = 8;

/// Single-polariton levels; the discriminant is the per-site level index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SiteLevel {
    S = 0,
    PMinus = 1,
    PZero = 2,
    PPlus = 3,
}

impl SiteLevel {
    pub const ALL: [SiteLevel; 4] = [SiteLevel::S, SiteLevel::PMinus, SiteLevel::PZero, SiteLevel::PPlus];

    pub fn index(self) -> u32 {
        self as u32
    }

    pub fn from_index(index: u32) -> Option<Self> {
        Self::ALL.get(index as usize).copied()
    }

    /// Magnetic quantum number m.
    pub fn m(self) -> i32 {
        match self {
            SiteLevel::S | SiteLevel::PZero => 0,
            SiteLevel::PMinus => -1,
            SiteLevel::PPlus => 1,
        }
    }

    pub fn is_p(self) -> bool {
        self != SiteLevel::S
    }
}

/// Which per-site levels the basis keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LevelSet {
    /// {s, p₋₁, p₀, p₊₁}
    Full,
    /// {s, p₀}; the σ-channel exchange drops out.
    TwoLevel,
}

impl LevelSet {
    fn levels(self) -> &'static [SiteLevel] {
        match self {
            LevelSet::Full => &SiteLevel::ALL,
            LevelSet::TwoLevel => &[SiteLevel::S, SiteLevel::PZero],
        }
    }
}

/// Product basis over sites, enumerated site-major (site 0 is the most
/// significant base-4 digit), optionally restricted to one total-M sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteBasis {
    sites: usize,
    levels: LevelSet,
    sector: Option<i32>,
    codes: Vec<u32>,
}

impl SiteBasis {
    pub fn new(sites: usize, levels: LevelSet) -> Result<Self> {
        Self::build(sites, levels, None)
    }

    /// Only states whose Σm equals `total_m`. Every Hamiltonian term here
    /// conserves Σm, so each sector evolves independently.
    pub fn with_sector(sites: usize, levels: LevelSet, total_m: i32) -> Result<Self> {
        Self::build(sites, levels, Some(total_m))
    }

    fn build(sites: usize, levels: LevelSet, sector: Option<i32>) -> Result<Self> {
        if sites == 0 || sites > MAX_SITES {
            return Err(Error::domain("SiteBasis", format!("site count {sites} outside 1..={MAX_SITES}")));
        }
        let local = levels.levels();
        let total = local.len().pow(sites as u32);
        let mut codes = Vec::new();
        for combo in 0..total {
            let mut rest = combo;
            let mut code = 0u32;
            let mut m = 0;
            for _ in 0..sites {
                let level = local[rest % local.len()];
                rest /= local.len();
                code = code * 4 + level.index();
                m += level.m();
            }
            if sector.is_none_or(|target| target == m) {
                codes.push(code);
            }
        }
        codes.sort_unstable();
        if codes.is_empty() {
            return Err(Error::domain("SiteBasis", "the requested sector is empty"));
        }
        if codes.len() > MAX_DIMENSION {
            return Err(Error::Dimension {
                dim: codes.len(),
                limit: MAX_DIMENSION,
            });
        }
        Ok(SiteBasis {
            sites,
            levels,
            sector,
            codes,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn levels(&self) -> LevelSet {
        self.levels
    }

    pub fn sector(&self) -> Option<i32> {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.codes.len()
    }

    pub(crate) fn code(&self, index: usize) -> u32 {
        self.codes[index]
    }

    pub(crate) fn index_of_code(&self, code: u32) -> Option<usize> {
        self.codes.binary_search(&code).ok()
    }

    pub(crate) fn level_in_code(&self, code: u32, site: usize) -> u32 {
        (code >> (2 * (self.sites - 1 - site))) & 3
    }

    pub(crate) fn replace_in_code(&self, code: u32, site: usize, level: u32) -> u32 {
        let shift = 2 * (self.sites - 1 - site);
        (code & !(3 << shift)) | (level << shift)
    }

    pub fn level(&self, index: usize, site: usize) -> SiteLevel {
        SiteLevel::from_index(self.level_in_code(self.codes[index], site)).expect("two-bit level")
    }

    pub fn state(&self, index: usize) -> Vec<SiteLevel> {
        (0..self.sites).map(|site| self.level(index, site)).collect()
    }

    pub fn index_of(&self, state: &[SiteLevel]) -> Option<usize> {
        if state.len() != self.sites {
            return None;
        }
        let code = state.iter().fold(0u32, |code, level| code * 4 + level.index());
        self.index_of_code(code)
    }

    pub fn total_m(&self, index: usize) -> i32 {
        (0..self.sites).map(|site| self.level(index, site).m()).sum()
    }

    /// Index of |s s … s⟩, the phase-matched stored state.
    pub fn all_s_index(&self) -> Option<usize> {
        self.index_of_code(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_dimension_and_bijection() {
        for sites in 1..=4 {
            let basis = SiteBasis::new(sites, LevelSet::Full).unwrap();
            assert_eq!(basis.dim(), 4usize.pow(sites as u32));
            for i in 0..basis.dim() {
                assert_eq!(basis.index_of(&basis.state(i)), Some(i));
            }
        }
    }

    #[test]
    fn site_major_order() {
        let basis = SiteBasis::new(2, LevelSet::Full).unwrap();
        assert_eq!(basis.state(1), vec![SiteLevel::S, SiteLevel::PMinus]);
        assert_eq!(basis.state(4), vec![SiteLevel::PMinus, SiteLevel::S]);
    }

    #[test]
    fn zero_sector_dimensions() {
        // central binomial coefficients C(2N, N)
        for (sites, dim) in [(1, 2), (2, 6), (3, 20), (4, 70), (5, 252)] {
            let basis = SiteBasis::with_sector(sites, LevelSet::Full, 0).unwrap();
            assert_eq!(basis.dim(), dim);
            assert!((0..dim).all(|i| basis.total_m(i) == 0));
            assert_eq!(basis.all_s_index(), Some(0));
        }
    }

    #[test]
    fn two_level_basis() {
        let basis = SiteBasis::new(3, LevelSet::TwoLevel).unwrap();
        assert_eq!(basis.dim(), 8);
        assert!(basis.index_of(&[SiteLevel::S, SiteLevel::PPlus, SiteLevel::S]).is_none());
    }

    #[test]
    fn limits() {
        assert!(SiteBasis::new(0, LevelSet::Full).is_err());
        assert!(matches!(SiteBasis::new(7, LevelSet::Full), Err(Error::Dimension { .. })));
        assert!(SiteBasis::with_sector(2, LevelSet::Full, 3).is_err());
    }
}

//! Chain presets and the full-versus-truncated mode comparison.

use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_equilibrium, ChainConfiguration};
use crate::error::{Error, Result};
use crate::modes::{
    most_localized_modes, transverse_modes, truncated_subcrystal_modes, ElectronicAssignment, ModeDecomposition,
};
use crate::units::StateFrequencies;

/// Ion count, trap anharmonicity and which ions (0-based) are Rydberg-excited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainScenario {
    pub n_ions: usize,
    pub k4: f64,
    pub frequencies: StateFrequencies,
    pub rydberg: Vec<usize>,
}

impl ChainScenario {
    pub const REFERENCE_IONS: usize = 100;
    pub const REFERENCE_K4: f64 = 1.343;

    pub fn all_ell() -> Self {
        Self {
            n_ions: Self::REFERENCE_IONS,
            k4: Self::REFERENCE_K4,
            frequencies: StateFrequencies::default(),
            rydberg: Vec::new(),
        }
    }

    /// Ions 45 and 56 (1-based) excited.
    pub fn two_rydberg() -> Self {
        Self { rydberg: vec![44, 55], ..Self::all_ell() }
    }

    /// Ions 45, 48, 53 and 56 (1-based) excited.
    pub fn four_rydberg() -> Self {
        Self { rydberg: vec![44, 47, 52, 55], ..Self::all_ell() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions == 0 {
            return Err(Error::invalid("ion count must be at least 1"));
        }
        if let Some(&r) = self.rydberg.iter().find(|&&r| r >= self.n_ions) {
            return Err(Error::invalid(format!("Rydberg ion {} outside chain of {}", r + 1, self.n_ions)));
        }
        Ok(())
    }

    pub fn configuration(&self) -> Result<ChainConfiguration> {
        self.validate()?;
        solve_equilibrium(self.n_ions, self.k4, None)
    }

    pub fn assignment(&self) -> Result<ElectronicAssignment> {
        ElectronicAssignment::with_rydberg(self.n_ions, &self.rydberg, self.frequencies)
    }

    pub fn bare_assignment(&self) -> ElectronicAssignment {
        ElectronicAssignment::all_ell(self.n_ions, self.frequencies)
    }

    pub fn modes(&self, config: &ChainConfiguration) -> Result<ModeDecomposition> {
        transverse_modes(config, &self.assignment()?)
    }

    /// Runs of ELL ions enclosed between consecutive Rydberg ions.
    pub fn subcrystals(&self) -> Vec<Vec<usize>> {
        let mut r = self.rydberg.clone();
        r.sort_unstable();
        r.dedup();
        r.windows(2).filter(|w| w[1] > w[0] + 1).map(|w| (w[0] + 1..w[1]).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// Full-chain modes with largest sub-crystal weight, ascending frequency.
    pub full_modes: Vec<usize>,
    pub full_frequencies: Vec<f64>,
    pub truncated_frequencies: Vec<f64>,
    pub max_relative_discrepancy: f64,
}

/// Compares the sub-crystal modes of the full chain with those of the truncated Hessian.
pub fn truncation_comparison(
    config: &ChainConfiguration,
    assignment: &ElectronicAssignment,
    subcrystal: &[usize],
) -> Result<TruncationReport> {
    let full = transverse_modes(config, assignment)?;
    let trunc = truncated_subcrystal_modes(config, assignment, subcrystal)?;
    let loc = most_localized_modes(&full, subcrystal, subcrystal.len())?;
    let full_frequencies: Vec<f64> = loc.modes.iter().map(|&j| full.frequencies[j]).collect();
    let max_rel = full_frequencies
        .iter()
        .zip(trunc.frequencies.iter())
        .map(|(f, t)| ((f - t) / f).abs())
        .fold(0.0, f64::max);
    Ok(TruncationReport {
        full_modes: loc.modes,
        full_frequencies,
        truncated_frequencies: trunc.frequencies,
        max_relative_discrepancy: max_rel,
    })
}

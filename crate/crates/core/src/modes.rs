//! State-dependent transverse phonon modes.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::equilibrium::ChainConfiguration;
use crate::error::{Error, Result};
use crate::units::StateFrequencies;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElectronicState {
    /// Electronically low-lying (S, P or D) state.
    Ell,
    Rydberg,
}

/// Per-ion electronic state and the resulting radial trap frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectronicAssignment {
    pub states: Vec<ElectronicState>,
    pub frequencies: StateFrequencies,
}

impl ElectronicAssignment {
    pub fn all_ell(n: usize, frequencies: StateFrequencies) -> Self {
        Self { states: vec![ElectronicState::Ell; n], frequencies }
    }

    /// Marks the given 0-based ions as Rydberg-excited.
    pub fn with_rydberg(n: usize, rydberg: &[usize], frequencies: StateFrequencies) -> Result<Self> {
        let mut a = Self::all_ell(n, frequencies);
        for &r in rydberg {
            if r >= n {
                return Err(Error::invalid(format!("Rydberg ion {} outside chain of {n}", r + 1)));
            }
            a.states[r] = ElectronicState::Rydberg;
        }
        Ok(a)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// ω_m^(x) in units of ω_s.
    pub fn frequency(&self, ion: usize) -> f64 {
        match self.states[ion] {
            ElectronicState::Ell => self.frequencies.omega_ell,
            ElectronicState::Rydberg => self.frequencies.omega_ryd,
        }
    }

    pub fn rydberg_ions(&self) -> Vec<usize> {
        self.states.iter().enumerate().filter(|(_, s)| **s == ElectronicState::Rydberg).map(|(i, _)| i).collect()
    }
}

/// Eigenfrequencies (ascending, units of ω_s) and eigenvectors as columns:
/// `vectors[(m, j)]` is the amplitude of ion `m` in mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub frequencies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl ModeDecomposition {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn amplitude(&self, ion: usize, mode: usize) -> f64 {
        self.vectors[(ion, mode)]
    }

    /// Keeps only the listed modes (in the given order).
    pub fn select(&self, modes: &[usize]) -> ModeDecomposition {
        ModeDecomposition {
            frequencies: modes.iter().map(|&j| self.frequencies[j]).collect(),
            vectors: self.vectors.select_columns(modes),
        }
    }
}

/// Transverse Hessian in units of `M ω_s²`.
pub fn build_hessian(config: &ChainConfiguration, assignment: &ElectronicAssignment) -> Result<DMatrix<f64>> {
    let n = config.len();
    if assignment.len() != n {
        return Err(Error::DimensionMismatch(format!("{} positions but {} electronic states", n, assignment.len())));
    }
    let z = &config.positions;
    let mut h = DMatrix::zeros(n, n);
    for m in 0..n {
        let w = assignment.frequency(m);
        let mut diag = w * w + 0.5 - 1.5 * config.k4 * z[m] * z[m];
        for k in 0..n {
            if k == m {
                continue;
            }
            let d = (z[k] - z[m]).abs();
            if d == 0.0 {
                return Err(Error::CoincidentIons(m.min(k), m.max(k)));
            }
            let c = 1.0 / (d * d * d);
            diag -= c;
            h[(m, k)] = c;
        }
        h[(m, m)] = diag;
    }
    Ok(h)
}

/// Symmetric eigendecomposition with ascending frequencies.
///
/// Each eigenvector is signed so that its largest-magnitude entry is positive;
/// among entries tied within 1e-9 relative, the lowest ion index decides.
pub fn diagonalize(hessian: &DMatrix<f64>) -> Result<ModeDecomposition> {
    let n = hessian.nrows();
    if hessian.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{}×{} matrix is not square", n, hessian.ncols())));
    }
    let scale = hessian.amax().max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if (hessian[(i, j)] - hessian[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::invalid(format!("matrix not symmetric at ({i},{j})")));
            }
        }
    }
    let eig = jacobi_polish(hessian, SymmetricEigen::new(hessian.clone()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).expect("finite eigenvalues"));

    let mut frequencies = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (j, &src) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[src];
        if !(lambda > 0.0) {
            return Err(Error::Unstable { mode: j, eigenvalue: lambda });
        }
        frequencies.push(lambda.sqrt());
        let col = eig.eigenvectors.column(src);
        let max = col.amax();
        let lead = col.iter().position(|x| x.abs() >= max * (1.0 - 1e-9)).unwrap_or(0);
        let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        for m in 0..n {
            vectors[(m, j)] = sign * col[m];
        }
    }
    Ok(ModeDecomposition { frequencies, vectors })
}

/// Cyclic Jacobi sweeps on `VᵀHV` to push the eigen-residual down to rounding level.
fn jacobi_polish(h: &DMatrix<f64>, mut eig: SymmetricEigen<f64, nalgebra::Dyn>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let n = h.nrows();
    let v = &mut eig.eigenvectors;
    let mut a = v.transpose() * h * &*v;
    let tol = f64::EPSILON * h.amax().max(f64::MIN_POSITIVE);
    for _ in 0..10 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-3 * tol {
                    continue;
                }
                rotated = true;
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    for i in 0..n {
        eig.eigenvalues[i] = a[(i, i)];
    }
    eig
}

pub fn transverse_modes(config: &ChainConfiguration, assignment: &ElectronicAssignment) -> Result<ModeDecomposition> {
    diagonalize(&build_hessian(config, assignment)?)
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::invalid("sub-crystal must contain at least one ion"));
    }
    for &m in subset {
        if m >= n {
            return Err(Error::invalid(format!("ion {} outside chain of {n}", m + 1)));
        }
    }
    Ok(())
}

/// Σ_{m∈subset} |B_m^j|² for every mode j.
pub fn localization_weights(modes: &ModeDecomposition, subset: &[usize]) -> Result<Vec<f64>> {
    check_subset(modes.vectors.nrows(), subset)?;
    Ok((0..modes.len()).map(|j| subset.iter().map(|&m| modes.vectors[(m, j)].powi(2)).sum()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedModes {
    /// Mode indices sorted by frequency.
    pub modes: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Modes whose weight on `subset` reaches `threshold`.
pub fn localized_mode_analysis(modes: &ModeDecomposition, subset: &[usize], threshold: f64) -> Result<LocalizedModes> {
    let w = localization_weights(modes, subset)?;
    let picked: Vec<usize> = (0..w.len()).filter(|&j| w[j] >= threshold).collect();
    Ok(LocalizedModes { weights: picked.iter().map(|&j| w[j]).collect(), modes: picked })
}

/// The `count` modes with the largest weight on `subset`, sorted by frequency.
pub fn most_localized_modes(modes: &ModeDecomposition, subset: &[usize], count: usize) -> Result<LocalizedModes> {
    let w = localization_weights(modes, subset)?;
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).expect("finite weights"));
    idx.truncate(count);
    idx.sort_unstable();
    Ok(LocalizedModes { weights: idx.iter().map(|&j| w[j]).collect(), modes: idx })
}

/// Modes of the Hessian restricted to a contiguous sub-crystal.
///
/// Diagonal entries keep the Coulomb curvature of every ion in the chain, so
/// spectator ions act as pinned charges.
pub fn truncated_subcrystal_modes(
    config: &ChainConfiguration,
    assignment: &ElectronicAssignment,
    subcrystal: &[usize],
) -> Result<ModeDecomposition> {
    check_subset(config.len(), subcrystal)?;
    if subcrystal.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::invalid("sub-crystal must be a contiguous, increasing ion range"));
    }
    let full = build_hessian(config, assignment)?;
    let sub = full.select_rows(subcrystal).select_columns(subcrystal);
    diagonalize(&sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_equilibrium;

    fn freqs() -> StateFrequencies {
        StateFrequencies::default()
    }

    #[test]
    fn two_by_two_eigenpairs() {
        let h = DMatrix::from_row_slice(2, 2, &[5.0, 1.0, 1.0, 5.0]);
        let d = diagonalize(&h).unwrap();
        assert!((d.frequencies[0] - 2.0).abs() < 1e-14 && (d.frequencies[1] - 6f64.sqrt()).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        assert!((d.vectors[(0, 0)] - r).abs() < 1e-14 && (d.vectors[(1, 0)] + r).abs() < 1e-14);
        assert!((d.vectors[(0, 1)] - r).abs() < 1e-14 && (d.vectors[(1, 1)] - r).abs() < 1e-14);
    }

    #[test]
    fn identity_matrix() {
        let d = diagonalize(&DMatrix::identity(4, 4)).unwrap();
        assert!(d.frequencies.iter().all(|&w| (w - 1.0).abs() < 1e-15));
        assert!((d.vectors.clone() - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn negative_eigenvalue_names_mode() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(diagonalize(&h), Err(Error::Unstable { mode: 0, .. })));
    }

    #[test]
    fn asymmetric_input_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.2, 1.0]);
        assert!(diagonalize(&h).is_err());
    }

    #[test]
    fn two_ion_hessian_entries() {
        let c = solve_equilibrium(2, 1.343, None).unwrap();
        let d = c.positions[1];
        let h = build_hessian(&c, &ElectronicAssignment::all_ell(2, freqs())).unwrap();
        assert!((h[(0, 1)] - 1.0 / (2.0 * d).powi(3)).abs() < 1e-14);
        assert_eq!(h[(0, 1)], h[(1, 0)]);
        assert!((h[(0, 0)] - h[(1, 1)]).abs() < 1e-12);
    }

    #[test]
    fn single_ion_frequency() {
        let c = ChainConfiguration::new(vec![0.4], 1.343).unwrap();
        let d = transverse_modes(&c, &ElectronicAssignment::all_ell(1, freqs())).unwrap();
        let expect = (150.0f64.powi(2) + 0.5 - 1.5 * 1.343 * 0.16).sqrt();
        assert!((d.frequencies[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn rydberg_index_out_of_range() {
        assert!(ElectronicAssignment::with_rydberg(5, &[5], freqs()).is_err());
    }

    #[test]
    fn uniform_chain_modes_are_delocalized() {
        let c = solve_equilibrium(20, 1.343, None).unwrap();
        let d = transverse_modes(&c, &ElectronicAssignment::all_ell(20, freqs())).unwrap();
        assert!(localized_mode_analysis(&d, &[10], 0.99).unwrap().modes.is_empty());
    }

    #[test]
    fn weights_sum_to_subset_size() {
        let c = solve_equilibrium(16, 1.343, None).unwrap();
        let a = ElectronicAssignment::with_rydberg(16, &[4, 11], freqs()).unwrap();
        let d = transverse_modes(&c, &a).unwrap();
        let subset: Vec<usize> = (5..11).collect();
        let total: f64 = localization_weights(&d, &subset).unwrap().iter().sum();
        assert!((total - subset.len() as f64).abs() < 1e-10);
    }

    #[test]
    fn truncating_to_whole_chain_is_identity() {
        let c = solve_equilibrium(12, 1.343, None).unwrap();
        let a = ElectronicAssignment::with_rydberg(12, &[3, 8], freqs()).unwrap();
        let all: Vec<usize> = (0..12).collect();
        let full = transverse_modes(&c, &a).unwrap();
        let trunc = truncated_subcrystal_modes(&c, &a, &all).unwrap();
        assert_eq!(full, trunc);
        assert!(truncated_subcrystal_modes(&c, &a, &[2, 4]).is_err());
    }

    #[test]
    fn stronger_rydberg_confinement_increases_localization() {
        let c = solve_equilibrium(100, 1.343, None).unwrap();
        let subset: Vec<usize> = (45..55).collect();
        let mut last = 0.0;
        for ratio in [1.0, 1.3233, 2.0] {
            let f = StateFrequencies::new(150.0, 150.0 * ratio).unwrap();
            let a = ElectronicAssignment::with_rydberg(100, &[44, 55], f).unwrap();
            let d = transverse_modes(&c, &a).unwrap();
            let best = localization_weights(&d, &subset).unwrap().into_iter().fold(0.0, f64::max);
            assert!(best > last, "ratio {ratio}: {best} ≤ {last}");
            last = best;
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn decomposition_invariants(n in 2usize..25, r1 in 0usize..25, r2 in 0usize..25) {
            let c = solve_equilibrium(n, 1.343, None).unwrap();
            let a = ElectronicAssignment::with_rydberg(n, &[r1 % n, r2 % n], freqs()).unwrap();
            let h = build_hessian(&c, &a).unwrap();
            let d = diagonalize(&h).unwrap();
            let b = &d.vectors;
            let gram = b.transpose() * b;
            proptest::prop_assert!((gram - DMatrix::<f64>::identity(n, n)).amax() < 1e-10);
            for j in 0..n {
                let v = b.column(j);
                let r = &h * v - v * d.frequencies[j].powi(2);
                proptest::prop_assert!(r.amax() < 1e-8);
                proptest::prop_assert!(v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) >= v.amax() * (1.0 - 1e-9));
            }
            proptest::prop_assert!(d.frequencies.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

//! Thermal fidelity of two parallel phase gates, including the change of
//! phonon basis caused by Rydberg excitation.
//!
//! Phonons are thermal in the bare (all-ELL) modes. Excitation is sudden, so
//! the gate runs in the shaped modes while the state is still the bare one.
//! Shaped normal coordinates relate to bare ones by the orthogonal map
//! `T = B_shapedᵀ A_bare` (eigenvectors as columns); the ladder operators
//! mix through `T_± = L_e⁻¹ T L_g ± P_e⁻¹ T P_g`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::PhaseMatrix;
use crate::modes::ModeDecomposition;

#[derive(Debug, Clone, PartialEq)]
pub struct DuschinskyMap {
    pub t: DMatrix<f64>,
    /// `L_e⁻¹ T L_g`, entries `T_jp sqrt(ω_j/ω̃_p)`.
    pub position_block: DMatrix<f64>,
    /// `P_e⁻¹ T P_g`, entries `T_jp sqrt(ω̃_p/ω_j)`.
    pub momentum_block: DMatrix<f64>,
    pub t_plus: DMatrix<f64>,
    pub t_minus: DMatrix<f64>,
    pub bare_frequencies: Vec<f64>,
    pub shaped_frequencies: Vec<f64>,
}

impl DuschinskyMap {
    /// `max |TᵀT − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.t.ncols();
        (self.t.transpose() * &self.t - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// `max |(T_+T_+ᵀ − T_−T_−ᵀ)/4 − I|`.
    pub fn commutation_error(&self) -> f64 {
        let n = self.t.nrows();
        let c = (&self.t_plus * self.t_plus.transpose() - &self.t_minus * self.t_minus.transpose()) * 0.25;
        (c - DMatrix::<f64>::identity(n, n)).amax()
    }
}

pub fn duschinsky_map(bare: &ModeDecomposition, shaped: &ModeDecomposition) -> Result<DuschinskyMap> {
    if bare.vectors.shape() != shaped.vectors.shape() || bare.len() != shaped.len() {
        return Err(Error::DimensionMismatch(format!(
            "bare modes {:?} vs shaped modes {:?}",
            bare.vectors.shape(),
            shaped.vectors.shape()
        )));
    }
    let t = shaped.vectors.transpose() * &bare.vectors;
    let n = t.nrows();
    let x = DMatrix::from_fn(n, n, |j, p| t[(j, p)] * (shaped.frequencies[j] / bare.frequencies[p]).sqrt());
    let y = DMatrix::from_fn(n, n, |j, p| t[(j, p)] * (bare.frequencies[p] / shaped.frequencies[j]).sqrt());
    Ok(DuschinskyMap {
        t_plus: &x + &y,
        t_minus: &x - &y,
        position_block: x,
        momentum_block: y,
        t,
        bare_frequencies: bare.frequencies.clone(),
        shaped_frequencies: shaped.frequencies.clone(),
    })
}

/// The identity map for a gate run directly in the bare modes.
pub fn identity_map(modes: &ModeDecomposition) -> DuschinskyMap {
    let n = modes.len();
    let i = DMatrix::<f64>::identity(n, n);
    DuschinskyMap {
        t: i.clone(),
        position_block: i.clone(),
        momentum_block: i.clone(),
        t_plus: &i * 2.0,
        t_minus: DMatrix::zeros(n, n),
        bare_frequencies: modes.frequencies.clone(),
        shaped_frequencies: modes.frequencies.clone(),
    }
}

/// Bare-mode displacements `C_g = Re(C_e) P_e⁻¹TP_g + i Im(C_e) L_e⁻¹TL_g`, one row per driven ion.
///
/// A real shaped-frame displacement is a pure position shift `2 l_j Re α`,
/// which in the bare mode of length `l̃_p` reads `Re α · T √(ω̃_p/ω_j)`;
/// momentum shifts carry the inverse ratio.
pub fn bare_frame_displacements(c_e: &DMatrix<Complex64>, map: &DuschinskyMap) -> Result<DMatrix<Complex64>> {
    if c_e.ncols() != map.t.nrows() {
        return Err(Error::DimensionMismatch(format!("{} displacement columns for {} modes", c_e.ncols(), map.t.nrows())));
    }
    let re = c_e.map(|z| z.re) * &map.momentum_block;
    let im = c_e.map(|z| z.im) * &map.position_block;
    Ok(DMatrix::from_fn(c_e.nrows(), c_e.ncols(), |r, c| Complex64::new(re[(r, c)], im[(r, c)])))
}

/// `γ = ln(1 + 1/n̄)`, i.e. `ħω/(k_B T)` for a mode with mean occupation `n̄`.
pub fn temperature_from_occupation(nbar: f64) -> Result<f64> {
    if !(nbar > 0.0) || !nbar.is_finite() {
        return Err(Error::invalid(format!("mean occupation must be positive, got {nbar}")));
    }
    Ok((1.0 / nbar).ln_1p())
}

/// Temperature in kelvin for factor `gamma` at angular frequency `omega_si`.
pub fn kelvin(gamma: f64, omega_si: f64, consts: &crate::units::PhysicalConstants) -> f64 {
    consts.reduced_planck * omega_si / (consts.boltzmann * gamma)
}

/// Per-mode temperature factors `γ_p = ħω̃_p / (k_B T)` of the bare modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalState {
    pub frequencies: Vec<f64>,
    /// `f64::INFINITY` encodes zero temperature.
    pub gamma: Vec<f64>,
}

impl ThermalState {
    /// A common temperature fixed by `nbar` on mode `reference`.
    pub fn from_reference(frequencies: &[f64], reference: usize, nbar: f64) -> Result<Self> {
        if reference >= frequencies.len() {
            return Err(Error::invalid(format!("reference mode {reference} out of range")));
        }
        let g = temperature_from_occupation(nbar)?;
        let w0 = frequencies[reference];
        Ok(Self { frequencies: frequencies.to_vec(), gamma: frequencies.iter().map(|w| g * w / w0).collect() })
    }

    pub fn zero_temperature(frequencies: &[f64]) -> Self {
        Self { frequencies: frequencies.to_vec(), gamma: vec![f64::INFINITY; frequencies.len()] }
    }

    pub fn mean_occupation(&self, mode: usize) -> f64 {
        1.0 / self.gamma[mode].exp_m1()
    }

    /// `coth(γ/2) = 2n̄ + 1`.
    pub fn coth_half(&self, mode: usize) -> f64 {
        let g = self.gamma[mode];
        if g.is_infinite() {
            1.0
        } else {
            1.0 + 2.0 / g.exp_m1()
        }
    }
}

/// Spin eigenvalues of the four gate ions (ordered m1, n1, m2, n2), in the
/// order `(+,+,+,+), (+,+,+,−), …, (−,−,−,−)`.
pub fn spin_basis() -> [[f64; 4]; 16] {
    let mut out = [[0.0; 4]; 16];
    for (j, row) in out.iter_mut().enumerate() {
        for (b, s) in row.iter_mut().enumerate() {
            *s = if (j >> (3 - b)) & 1 == 0 { 1.0 } else { -1.0 };
        }
    }
    out
}

/// Two disjoint gate pairs (0-based ions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateLayout {
    pub pairs: [(usize, usize); 2],
    /// Sign of the target phase of each pair (the ideal gate is `exp(±iπ/4 σσ)`).
    pub reference_signs: [f64; 2],
    /// Sub-crystal hosting each pair, if known.
    #[serde(default)]
    pub subcrystals: Vec<Vec<usize>>,
    #[serde(default)]
    pub bus_modes: Vec<usize>,
}

impl GateLayout {
    pub fn new(pairs: [(usize, usize); 2]) -> Result<Self> {
        let l = Self { pairs, reference_signs: [1.0, 1.0], subcrystals: Vec::new(), bus_modes: Vec::new() };
        l.validate()?;
        Ok(l)
    }

    pub fn ions(&self) -> [usize; 4] {
        [self.pairs[0].0, self.pairs[0].1, self.pairs[1].0, self.pairs[1].1]
    }

    pub fn validate(&self) -> Result<()> {
        let ions = self.ions();
        for a in 0..4 {
            for b in a + 1..4 {
                if ions[a] == ions[b] {
                    return Err(Error::invalid(format!("gate ions must be distinct (ion {} repeated)", ions[a] + 1)));
                }
            }
        }
        if self.reference_signs.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::invalid("reference signs must be ±1"));
        }
        if !self.subcrystals.is_empty() {
            if self.subcrystals.len() != 2 {
                return Err(Error::invalid("one sub-crystal per gate pair expected"));
            }
            for (k, (m, n)) in self.pairs.iter().enumerate() {
                let sc = &self.subcrystals[k];
                if !sc.contains(m) || !sc.contains(n) {
                    return Err(Error::invalid(format!("pair ({}, {}) not inside its sub-crystal", m + 1, n + 1)));
                }
            }
        }
        Ok(())
    }
}

/// Thermal fidelity of the two parallel gates for the input `|+⟩^{⊗4}`.
///
/// `c_g` has one row per gate ion in layout order and one column per bare
/// mode; `phases` is indexed by chain ion.
pub fn gate_fidelity(
    c_g: &DMatrix<Complex64>,
    phases: &PhaseMatrix,
    thermal: &ThermalState,
    layout: &GateLayout,
) -> Result<f64> {
    layout.validate()?;
    if c_g.nrows() != 4 {
        return Err(Error::DimensionMismatch(format!("expected 4 gate-ion rows, got {}", c_g.nrows())));
    }
    if c_g.ncols() != thermal.gamma.len() {
        return Err(Error::DimensionMismatch(format!("{} modes vs {} temperatures", c_g.ncols(), thermal.gamma.len())));
    }
    let ions = layout.ions();
    for &m in &ions {
        if m >= phases.values.nrows() {
            return Err(Error::DimensionMismatch(format!("ion {} outside phase matrix", m + 1)));
        }
    }
    let spins = spin_basis();
    let np = c_g.ncols();
    let coth: Vec<f64> = (0..np).map(|p| thermal.coth_half(p)).collect();

    let mut beta = vec![vec![Complex64::new(0.0, 0.0); np]; 16];
    let mut theta = [0.0; 16];
    let mut big_phi = [0.0; 16];
    let q = std::f64::consts::FRAC_PI_4;
    for (j, s) in spins.iter().enumerate() {
        for p in 0..np {
            beta[j][p] = (0..4).map(|m| c_g[(m, p)] * s[m]).sum();
        }
        theta[j] = q * (layout.reference_signs[0] * s[0] * s[1] + layout.reference_signs[1] * s[2] * s[3]);
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    acc += phases.values[(ions[a], ions[b])] * s[a] * s[b];
                }
            }
        }
        big_phi[j] = acc;
    }

    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..16 {
        for k in 0..16 {
            let mut e = Complex64::new(0.0, 0.0);
            for p in 0..np {
                let (bj, bk) = (beta[j][p], beta[k][p]);
                let cross = bj * bk.conj();
                e += Complex64::new(0.0, 2.0 * cross.im) - (bj - bk).norm_sqr() * coth[p];
            }
            let phase = Complex64::new(0.0, theta[k] - theta[j] + big_phi[j] - big_phi[k]);
            total += (phase + 0.5 * e).exp();
        }
    }
    let f = total / 256.0;
    if f.im.abs() > 1e-8 {
        return Err(Error::NonHermitian(f.im));
    }
    Ok(f.re.clamp(0.0, 1.0))
}

/// `exp(−n · t_excited / lifetime)`.
pub fn decay_penalty(n_rydberg: usize, excited_duration: f64, lifetime: f64) -> Result<f64> {
    if excited_duration < 0.0 || !excited_duration.is_finite() {
        return Err(Error::invalid("excited duration must be non-negative"));
    }
    if !(lifetime > 0.0) {
        return Err(Error::invalid("lifetime must be positive"));
    }
    Ok((-(n_rydberg as f64) * excited_duration / lifetime).exp())
}

/// Rydberg lifetime and time spent excited per gate, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiativeDecay {
    pub lifetime: f64,
    pub excited_duration: f64,
}

impl Default for RadiativeDecay {
    fn default() -> Self {
        Self { lifetime: 270e-6, excited_duration: 4.9e-6 }
    }
}

impl RadiativeDecay {
    pub fn penalty(&self, n_rydberg: usize) -> Result<f64> {
        decay_penalty(n_rydberg, self.excited_duration, self.lifetime)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn phases_for(pairs: [(usize, usize); 2], values: [f64; 2], n: usize) -> PhaseMatrix {
        let mut m = DMatrix::zeros(n, n);
        for (k, (a, b)) in pairs.iter().enumerate() {
            m[(*a, *b)] = values[k];
            m[(*b, *a)] = values[k];
        }
        PhaseMatrix { values: m }
    }

    #[test]
    fn perfect_gate_has_unit_fidelity() {
        let layout = GateLayout::new([(0, 1), (2, 3)]).unwrap();
        let c = DMatrix::from_element(4, 3, Complex64::new(0.0, 0.0));
        let th = ThermalState::from_reference(&[1.0, 2.0, 3.0], 2, 3.25).unwrap();
        let f = gate_fidelity(&c, &phases_for(layout.pairs, [PI / 8.0; 2], 4), &th, &layout).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_reference_sign_matches_negative_phase() {
        let mut layout = GateLayout::new([(0, 1), (2, 3)]).unwrap();
        layout.reference_signs = [-1.0, 1.0];
        let c = DMatrix::from_element(4, 1, Complex64::new(0.0, 0.0));
        let th = ThermalState::zero_temperature(&[1.0]);
        let f = gate_fidelity(&c, &phases_for(layout.pairs, [-PI / 8.0, PI / 8.0], 4), &th, &layout).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    /// Direct 16-dimensional overlap of |+⟩^4 evolved by the identity with the ideal state.
    #[test]
    fn no_gate_gives_quarter() {
        let spins = spin_basis();
        let q = PI / 4.0;
        let mut amp = Complex64::new(0.0, 0.0);
        for s in spins.iter() {
            amp += Complex64::new(0.0, -q * (s[0] * s[1] + s[2] * s[3])).exp() / 16.0;
        }
        let brute = amp.norm_sqr();
        let layout = GateLayout::new([(0, 1), (2, 3)]).unwrap();
        let c = DMatrix::from_element(4, 1, Complex64::new(0.0, 0.0));
        let f = gate_fidelity(&c, &phases_for(layout.pairs, [0.0; 2], 4), &ThermalState::zero_temperature(&[1.0]), &layout)
            .unwrap();
        assert!((brute - 0.25).abs() < 1e-14);
        assert!((f - brute).abs() < 1e-14);
    }

    #[test]
    fn spin_basis_order() {
        let b = spin_basis();
        assert_eq!(b[0], [1.0; 4]);
        assert_eq!(b[1], [1.0, 1.0, 1.0, -1.0]);
        assert_eq!(b[15], [-1.0; 4]);
    }

    #[test]
    fn occupation_inversions() {
        assert!((temperature_from_occupation(3.25).unwrap() - 0.268_263).abs() < 1e-6);
        assert!((temperature_from_occupation(0.5).unwrap() - 3f64.ln()).abs() < 1e-15);
        let g = temperature_from_occupation(1e-12).unwrap();
        assert!(g > 27.0);
        let th = ThermalState { frequencies: vec![1.0], gamma: vec![g] };
        assert!((th.coth_half(0) - 1.0).abs() < 1e-11);
        assert!(temperature_from_occupation(0.0).is_err());
        assert!(temperature_from_occupation(-1.0).is_err());
        let th = ThermalState::from_reference(&[2.0, 4.0], 1, 3.25).unwrap();
        assert!((th.mean_occupation(1) - 3.25).abs() < 1e-12);
        assert!((th.gamma[0] - 0.5 * th.gamma[1]).abs() < 1e-15);
    }

    fn modes(freqs: &[f64], v: DMatrix<f64>) -> ModeDecomposition {
        ModeDecomposition { frequencies: freqs.to_vec(), vectors: v }
    }

    #[test]
    fn identical_modes_give_identity_map() {
        let v = DMatrix::from_row_slice(2, 2, &[0.6, 0.8, -0.8, 0.6]);
        let m = modes(&[1.0, 2.0], v);
        let d = duschinsky_map(&m, &m).unwrap();
        assert!((d.t.clone() - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
        assert!((d.t_plus.clone() - DMatrix::<f64>::identity(2, 2) * 2.0).amax() < 1e-15);
        assert!(d.t_minus.amax() < 1e-15);
        let c = DMatrix::from_row_slice(1, 2, &[Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4)]);
        assert!((bare_frame_displacements(&c, &d).unwrap() - c).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn fourfold_frequency_blocks() {
        let bare = modes(&[1.0, 2.0], DMatrix::identity(2, 2));
        let shaped = modes(&[4.0, 8.0], DMatrix::identity(2, 2));
        let d = duschinsky_map(&bare, &shaped).unwrap();
        assert!((d.t_plus[(0, 0)] - 2.5).abs() < 1e-15 && (d.t_plus[(1, 1)] - 2.5).abs() < 1e-15);
        assert!((d.t_minus[(0, 0)] - 1.5).abs() < 1e-15);
        assert!(d.commutation_error() < 1e-14);
        let c = DMatrix::from_row_slice(1, 2, &[Complex64::new(0.3, 0.0), Complex64::new(-0.1, 0.0)]);
        let cg = bare_frame_displacements(&c, &d).unwrap();
        assert!(cg.iter().all(|z| z.im == 0.0));
        // position shift in a mode four times stiffer: half the bare amplitude
        assert!((cg[(0, 0)].re - 0.15).abs() < 1e-15);
        let ci = DMatrix::from_row_slice(1, 2, &[Complex64::new(0.0, 0.3), Complex64::new(0.0, 0.0)]);
        assert!((bare_frame_displacements(&ci, &d).unwrap()[(0, 0)].im - 0.6).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let a = modes(&[1.0], DMatrix::identity(1, 1));
        let b = modes(&[1.0, 2.0], DMatrix::identity(2, 2));
        assert!(matches!(duschinsky_map(&a, &b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn decay_examples() {
        assert_eq!(decay_penalty(4, 4.9e-6, f64::INFINITY).unwrap(), 1.0);
        let d = RadiativeDecay::default();
        assert!((d.penalty(1).unwrap() - 0.982).abs() < 1e-3);
        assert!((d.penalty(4).unwrap() - 0.930).abs() < 2e-3);
        assert!(decay_penalty(1, -1.0, 1.0).is_err());
        assert!(decay_penalty(1, 1.0, 0.0).is_err());
    }

    #[test]
    fn layout_validation() {
        assert!(GateLayout::new([(0, 1), (1, 2)]).is_err());
        let mut l = GateLayout::new([(1, 2), (5, 6)]).unwrap();
        l.subcrystals = vec![vec![1, 2], vec![5]];
        assert!(l.validate().is_err());
    }

    fn random_cg(seed: u64, np: usize) -> DMatrix<Complex64> {
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.4
        };
        DMatrix::from_fn(4, np, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn hotter_phonons_lower_fidelity() {
        let layout = GateLayout::new([(0, 1), (2, 3)]).unwrap();
        let c = random_cg(7, 3);
        let ph = phases_for(layout.pairs, [PI / 8.0; 2], 4);
        let mut last = 2.0;
        for nbar in [0.1, 1.0, 3.25] {
            let th = ThermalState::from_reference(&[1.0, 1.5, 2.0], 2, nbar).unwrap();
            let f = gate_fidelity(&c, &ph, &th, &layout).unwrap();
            assert!(f < last, "{nbar}: {f}");
            last = f;
        }
    }

    #[test]
    fn mode_sign_flip_invariance() {
        let layout = GateLayout::new([(0, 1), (2, 3)]).unwrap();
        let c = random_cg(11, 3);
        let mut flipped = c.clone();
        for m in 0..4 {
            flipped[(m, 1)] = -flipped[(m, 1)];
        }
        let ph = phases_for(layout.pairs, [0.35, 0.41], 4);
        let th = ThermalState::from_reference(&[1.0, 1.5, 2.0], 2, 1.0).unwrap();
        let a = gate_fidelity(&c, &ph, &th, &layout).unwrap();
        let b = gate_fidelity(&flipped, &ph, &th, &layout).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    fn coherent(beta: Complex64, cutoff: usize) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(cutoff);
        let mut term = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
        for n in 0..cutoff {
            v.push(term);
            term *= beta / ((n + 1) as f64).sqrt();
        }
        v
    }

    /// Zero-temperature fidelity from the explicit spin ⊗ Fock state.
    #[test]
    fn zero_temperature_matches_fock_overlap() {
        let cutoff = 40;
        let np = 2;
        let layout = GateLayout::new([(0, 1), (2, 3)]).unwrap();
        let c = random_cg(3, np);
        let ph = phases_for(layout.pairs, [0.33, 0.42], 4);
        let spins = spin_basis();
        // final state: Σ_j (1/4) e^{iΦ_j}|j⟩ ⊗ Π_p |β_jp⟩ ; ideal: Σ_j (1/4) e^{iθ_j}|j⟩
        // F = Σ_jk ⟨ideal|j⟩⟨j|ρ|k⟩⟨k|ideal⟩ with ρ the reduced spin state
        let mut states = Vec::new();
        let mut amps = Vec::new();
        for s in spins.iter() {
            let mut vecs = Vec::new();
            for p in 0..np {
                let b: Complex64 = (0..4).map(|m| c[(m, p)] * s[m]).sum();
                vecs.push(coherent(b, cutoff));
            }
            states.push(vecs);
            let mut phi = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    if a != b {
                        phi += ph.values[(a, b)] * s[a] * s[b];
                    }
                }
            }
            let theta = PI / 4.0 * (s[0] * s[1] + s[2] * s[3]);
            amps.push(Complex64::new(0.0, phi - theta).exp() / 16.0);
        }
        let mut f = Complex64::new(0.0, 0.0);
        for j in 0..16 {
            for k in 0..16 {
                let mut ov = Complex64::new(1.0, 0.0);
                for p in 0..np {
                    ov *= states[k][p].iter().zip(states[j][p].iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>();
                }
                f += amps[j] * amps[k].conj() * ov;
            }
        }
        let closed = gate_fidelity(&c, &ph, &ThermalState::zero_temperature(&[1.0, 2.0]), &layout).unwrap();
        assert!((f.re - closed).abs() < 1e-6, "{} vs {closed}", f.re);
    }

    proptest::proptest! {
        #[test]
        fn fidelity_is_bounded(seed in 0u64..1000, a in -1.0f64..1.0, b in -1.0f64..1.0, nbar in 0.01f64..10.0) {
            let layout = GateLayout::new([(0, 1), (2, 3)]).unwrap();
            let th = ThermalState::from_reference(&[1.0, 1.5, 2.0], 0, nbar).unwrap();
            let f = gate_fidelity(&random_cg(seed, 3), &phases_for(layout.pairs, [a, b], 4), &th, &layout).unwrap();
            proptest::prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}

//! Spin-dependent-force phase gate in the Magnus picture.
//!
//! The interaction Hamiltonian (ħ = 1, interaction picture)
//! `H_I(t) = Σ_{m,j} g_m^j Ω_m(t) σ_m^z (−i a_j† e^{iω_j t} + i a_j e^{−iω_j t})`
//! with `g_m^j = η_m^j B_m^j` is linear in the phonon operators, so the
//! Magnus series stops at second order and
//! `U = Π_j D_j(Σ_m σ_m α_m^j) · exp(i Σ_{m≠n} φ_mn σ_m σ_n)` exactly, with
//!
//! * `α_m^j = −g_m^j ∫ Ω_m(t) e^{iω_j t} dt`
//! * `φ_mn = ½ Σ_j g_m^j g_n^j ∫∫ Ω_m(t) Ω_n(t′) sin(ω_j |t − t′|) dt dt′`.
//!
//! The sum runs over ordered pairs, so a single pair acquires
//! `exp(2iφ_mn σσ)` and `φ_mn = π/8` is the ideal conditional phase flip.
//! Times are in units of `1/ω_s`, frequencies in units of `ω_s`.

pub mod closed_form;
pub mod quadrature;
pub mod tdse;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::ModeDecomposition;
use closed_form::{ExpSum, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PulseShape {
    /// `sin(ν (t − t_start))`.
    Sine { frequency: f64 },
    /// Flat top, mainly for tests.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    /// 0-based ion index.
    pub ion: usize,
    pub amplitude: f64,
    pub shape: PulseShape,
    pub start: f64,
    pub duration: f64,
}

impl Pulse {
    pub fn sine(ion: usize, amplitude: f64, frequency: f64, start: f64, duration: f64) -> Self {
        Self { ion, amplitude, shape: PulseShape::Sine { frequency }, start, duration }
    }

    pub fn constant(ion: usize, amplitude: f64, start: f64, duration: f64) -> Self {
        Self { ion, amplitude, shape: PulseShape::Constant, start, duration }
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn window(&self) -> Window {
        Window { start: self.start, end: self.end() }
    }

    /// Rabi frequency Ω_m(t).
    pub fn value(&self, t: f64) -> f64 {
        if t < self.start || t > self.end() {
            return 0.0;
        }
        match self.shape {
            PulseShape::Sine { frequency } => self.amplitude * (frequency * (t - self.start)).sin(),
            PulseShape::Constant => self.amplitude,
        }
    }

    /// The pulse as a sum of complex exponentials.
    pub fn exp_sum(&self) -> ExpSum {
        let terms = match self.shape {
            PulseShape::Sine { frequency } => {
                let half = Complex64::new(0.0, -0.5) * self.amplitude;
                let phase = Complex64::new(0.0, -frequency * self.start).exp();
                vec![(half * phase, frequency), (-half * phase.conj(), -frequency)]
            }
            PulseShape::Constant => vec![(Complex64::new(self.amplitude, 0.0), 0.0)],
        };
        ExpSum { window: self.window(), terms }
    }
}

/// One pulse per driven ion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub pulses: Vec<Pulse>,
}

impl PulseSchedule {
    pub fn new(pulses: Vec<Pulse>) -> Result<Self> {
        let s = Self { pulses };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.pulses {
            if !(p.duration > 0.0) || !p.duration.is_finite() {
                return Err(Error::invalid(format!("pulse on ion {} has non-positive duration", p.ion + 1)));
            }
            if !p.amplitude.is_finite() || !p.start.is_finite() {
                return Err(Error::invalid(format!("pulse on ion {} has non-finite parameters", p.ion + 1)));
            }
            if let PulseShape::Sine { frequency } = p.shape {
                if !frequency.is_finite() {
                    return Err(Error::invalid("shape frequency must be finite"));
                }
            }
            if !seen.insert(p.ion) {
                return Err(Error::invalid(format!("ion {} is driven twice", p.ion + 1)));
            }
        }
        Ok(())
    }

    pub fn end_time(&self) -> f64 {
        self.pulses.iter().map(Pulse::end).fold(0.0, f64::max)
    }

    pub fn ions(&self) -> Vec<usize> {
        self.pulses.iter().map(|p| p.ion).collect()
    }

    pub fn pulse(&self, ion: usize) -> Option<&Pulse> {
        self.pulses.iter().find(|p| p.ion == ion)
    }

    /// Multiplies the amplitudes of the listed ions by `factor`.
    pub fn scaled(&self, ions: &[usize], factor: f64) -> Self {
        let mut s = self.clone();
        for p in &mut s.pulses {
            if ions.contains(&p.ion) {
                p.amplitude *= factor;
            }
        }
        s
    }

    pub fn shifted(&self, delta: f64) -> Self {
        let mut s = self.clone();
        for p in &mut s.pulses {
            p.start += delta;
        }
        s
    }

    fn check_against(&self, modes: &ModeDecomposition, t_end: f64) -> Result<()> {
        self.validate()?;
        let n = modes.vectors.nrows();
        for p in &self.pulses {
            if p.ion >= n {
                return Err(Error::invalid(format!("driven ion {} outside chain of {n}", p.ion + 1)));
            }
            if p.start < 0.0 {
                return Err(Error::invalid("pulses must start at t ≥ 0"));
            }
        }
        if t_end < self.end_time() {
            return Err(Error::invalid(format!("t_end {t_end} precedes the last pulse end {}", self.end_time())));
        }
        Ok(())
    }
}

/// Lamb-Dicke parameters `η_m^j = η_ref · f_m · sqrt(ω_ref / ω_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCoupling {
    pub eta_ref: f64,
    /// Frequency (units of ω_s) at which `eta_ref` is quoted.
    pub omega_ref: f64,
    /// Per-ion wavenumber factors `k_m / k`; absent ions use 1.
    #[serde(default)]
    pub ion_factors: BTreeMap<usize, f64>,
}

impl GateCoupling {
    pub fn new(eta_ref: f64, omega_ref: f64) -> Result<Self> {
        if !(eta_ref > 0.0) || !(omega_ref > 0.0) {
            return Err(Error::invalid("η_ref and ω_ref must be positive"));
        }
        Ok(Self { eta_ref, omega_ref, ion_factors: BTreeMap::new() })
    }

    /// From a laser wavenumber (1/m): `η = k sqrt(ħ / (2 M ω))`.
    pub fn from_wavenumber(
        wavenumber: f64,
        omega_ref: f64,
        units: &crate::units::ScaledUnits,
        consts: &crate::units::PhysicalConstants,
    ) -> Result<Self> {
        let omega_si = units.angular_frequency(omega_ref);
        let eta = wavenumber * (consts.reduced_planck / (2.0 * consts.ion_mass * omega_si)).sqrt();
        Self::new(eta, omega_ref)
    }

    pub fn eta(&self, ion: usize, omega: f64) -> f64 {
        let f = self.ion_factors.get(&ion).copied().unwrap_or(1.0);
        self.eta_ref * f * (self.omega_ref / omega).sqrt()
    }
}

impl Default for GateCoupling {
    fn default() -> Self {
        Self { eta_ref: 0.1, omega_ref: 150.0, ion_factors: BTreeMap::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Integrator {
    ClosedForm,
    /// Adaptive Gauss–Kronrod with the given absolute tolerance.
    Adaptive { tolerance: f64 },
}

impl Integrator {
    pub fn adaptive(tolerance: f64) -> Self {
        Integrator::Adaptive { tolerance }
    }
}

/// `α_m^j` for every ion (rows; zero for undriven ions) and mode (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementCoefficients {
    pub values: DMatrix<Complex64>,
}

impl DisplacementCoefficients {
    pub fn rows(&self, ions: &[usize]) -> DMatrix<Complex64> {
        self.values.select_rows(ions)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, z| a.max(z.norm()))
    }
}

/// Symmetric `φ_mn` with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    pub values: DMatrix<f64>,
}

impl PhaseMatrix {
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[(m, n)]
    }
}

fn g(coupling: &GateCoupling, modes: &ModeDecomposition, ion: usize, j: usize) -> f64 {
    coupling.eta(ion, modes.frequencies[j]) * modes.vectors[(ion, j)]
}

/// `∫ Ω(t) e^{iωt} dt` for one pulse.
pub fn pulse_fourier(pulse: &Pulse, omega: f64, integrator: Integrator) -> Complex64 {
    match integrator {
        Integrator::ClosedForm => pulse.exp_sum().fourier(omega),
        Integrator::Adaptive { tolerance } => quadrature::integrate(
            |t| pulse.value(t) * Complex64::new(0.0, omega * t).exp(),
            pulse.start,
            pulse.end(),
            &[],
            tolerance,
        ),
    }
}

/// `∫∫ Ω_a(t) Ω_b(t′) sin(ω|t − t′|) dt dt′`.
pub fn pulse_kernel(a: &Pulse, b: &Pulse, omega: f64, integrator: Integrator) -> f64 {
    match integrator {
        Integrator::ClosedForm => closed_form::sine_kernel_double(&a.exp_sum(), &b.exp_sum(), omega).re,
        Integrator::Adaptive { tolerance: tol } => {
            let len = a.duration.max(b.duration);
            quadrature::integrate(
                |t| {
                    let inner = quadrature::integrate(
                        |s| Complex64::new(b.value(s) * (omega * (t - s).abs()).sin(), 0.0),
                        b.start,
                        b.end(),
                        &[t],
                        0.1 * tol / len,
                    );
                    inner * a.value(t)
                },
                a.start,
                a.end(),
                &[b.start, b.end()],
                tol,
            )
            .re
        }
    }
}

pub fn displacement_coefficients(
    schedule: &PulseSchedule,
    modes: &ModeDecomposition,
    coupling: &GateCoupling,
    t_end: f64,
) -> Result<DisplacementCoefficients> {
    displacement_coefficients_with(schedule, modes, coupling, t_end, Integrator::ClosedForm)
}

pub fn displacement_coefficients_with(
    schedule: &PulseSchedule,
    modes: &ModeDecomposition,
    coupling: &GateCoupling,
    t_end: f64,
    integrator: Integrator,
) -> Result<DisplacementCoefficients> {
    schedule.check_against(modes, t_end)?;
    let mut values = DMatrix::from_element(modes.vectors.nrows(), modes.len(), Complex64::new(0.0, 0.0));
    for p in &schedule.pulses {
        for j in 0..modes.len() {
            values[(p.ion, j)] = -g(coupling, modes, p.ion, j) * pulse_fourier(p, modes.frequencies[j], integrator);
        }
    }
    Ok(DisplacementCoefficients { values })
}

pub fn phase_matrix(
    schedule: &PulseSchedule,
    modes: &ModeDecomposition,
    coupling: &GateCoupling,
    t_end: f64,
) -> Result<PhaseMatrix> {
    phase_matrix_with(schedule, modes, coupling, t_end, Integrator::ClosedForm)
}

pub fn phase_matrix_with(
    schedule: &PulseSchedule,
    modes: &ModeDecomposition,
    coupling: &GateCoupling,
    t_end: f64,
    integrator: Integrator,
) -> Result<PhaseMatrix> {
    schedule.check_against(modes, t_end)?;
    let n = modes.vectors.nrows();
    let mut values = DMatrix::zeros(n, n);
    let pulses = &schedule.pulses;
    for (a, pa) in pulses.iter().enumerate() {
        for pb in &pulses[a + 1..] {
            let mut phi = 0.0;
            for j in 0..modes.len() {
                let gg = g(coupling, modes, pa.ion, j) * g(coupling, modes, pb.ion, j);
                if gg != 0.0 {
                    phi += gg * pulse_kernel(pa, pb, modes.frequencies[j], integrator);
                }
            }
            values[(pa.ion, pb.ion)] = 0.5 * phi;
            values[(pb.ion, pa.ion)] = 0.5 * phi;
        }
    }
    Ok(PhaseMatrix { values })
}

/// Both Magnus terms at once.
pub fn magnus(
    schedule: &PulseSchedule,
    modes: &ModeDecomposition,
    coupling: &GateCoupling,
    t_end: f64,
) -> Result<(DisplacementCoefficients, PhaseMatrix)> {
    Ok((
        displacement_coefficients(schedule, modes, coupling, t_end)?,
        phase_matrix(schedule, modes, coupling, t_end)?,
    ))
}

/// Target two-qubit phase for a conditional phase flip.
pub const TARGET_PHASE: f64 = PI / 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeCalibration {
    /// Factor applied to the amplitudes of both pair ions.
    pub amplitude: f64,
    /// Pair phase before scaling.
    pub unit_phase: f64,
    /// Sign of the realized phase, ±1.
    pub sign: f64,
}

/// Scales the pair's amplitudes so that `|φ_mn| = π/8`.
///
/// The sine ansatz can produce a negative phase; `exp(−iπ/4 σσ)` is the same
/// entangling gate up to single-qubit z rotations, so the sign is reported
/// rather than rejected.
pub fn calibrate_amplitude(
    template: &PulseSchedule,
    modes: &ModeDecomposition,
    coupling: &GateCoupling,
    pair: (usize, usize),
) -> Result<AmplitudeCalibration> {
    let (m, n) = pair;
    if m == n {
        return Err(Error::invalid("gate pair must contain two distinct ions"));
    }
    let (Some(pm), Some(pn)) = (template.pulse(m), template.pulse(n)) else {
        return Err(Error::invalid(format!("ions {} and {} must both be driven", m + 1, n + 1)));
    };
    let sub = PulseSchedule::new(vec![*pm, *pn])?;
    let phi = phase_matrix(&sub, modes, coupling, sub.end_time())?.get(m, n);
    let scale = phi.abs().max(TARGET_PHASE * 1e-300);
    if !phi.is_finite() || phi.abs() < 1e-14 * TARGET_PHASE {
        return Err(Error::DegenerateDrive(phi));
    }
    Ok(AmplitudeCalibration { amplitude: (TARGET_PHASE / scale).sqrt(), unit_phase: phi, sign: phi.signum() })
}

//! Direct Schrödinger-equation integration of the gate Hamiltonian in a
//! truncated Fock space, used to check the Magnus result on small systems.

use num_complex::Complex64;

use super::{displacement_coefficients, phase_matrix, GateCoupling, PulseSchedule};
use crate::error::{Error, Result};
use crate::modes::ModeDecomposition;
use crate::ode;

pub const MAX_IONS: usize = 3;
pub const MAX_MODES: usize = 2;
pub const MAX_CUTOFF: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdseOptions {
    /// Fock levels kept per mode (0..cutoff−1).
    pub fock_cutoff: usize,
    /// Upper bound on the step, as a fraction of the fastest phase rotation.
    pub phase_per_step: f64,
}

impl Default for TdseOptions {
    fn default() -> Self {
        Self { fock_cutoff: 20, phase_per_step: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdseReport {
    /// `⟨ψ_Magnus|ψ_TDSE⟩` for the input `|+⟩^{⊗n} ⊗ |γ⟩`.
    pub overlap: Complex64,
    /// `⟨a_j⟩_final − γ_j` per spin configuration (rows) and mode (columns).
    pub displacements: Vec<Vec<Complex64>>,
    /// Spin configurations in enumeration order (+1 before −1, driven ions in schedule order).
    pub spins: Vec<Vec<f64>>,
    /// Largest population found on the highest kept Fock level.
    pub top_population: f64,
    pub saturated: bool,
    pub steps: usize,
}

impl TdseReport {
    pub fn fidelity(&self) -> f64 {
        self.overlap.norm_sqr()
    }
}

fn factorials(n: usize) -> Vec<f64> {
    let mut f = vec![1.0; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

fn coherent(gamma: Complex64, cutoff: usize) -> Vec<Complex64> {
    let f = factorials(cutoff);
    let norm = (-0.5 * gamma.norm_sqr()).exp();
    (0..cutoff).map(|n| gamma.powu(n as u32) * (norm / f[n].sqrt())).collect()
}

fn product_state(factors: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut state = vec![Complex64::new(1.0, 0.0)];
    // mode 0 is the slowest-varying index
    for f in factors {
        let mut next = Vec::with_capacity(state.len() * f.len());
        for &a in &state {
            for &b in f {
                next.push(a * b);
            }
        }
        state = next;
    }
    state
}

/// Integrates every spin configuration and compares with the Magnus prediction.
///
/// `coherent_input` holds one coherent amplitude per mode (all zero for the
/// phonon ground state).
pub fn tdse_oracle(
    schedule: &PulseSchedule,
    modes: &ModeDecomposition,
    coupling: &GateCoupling,
    t_end: f64,
    coherent_input: &[Complex64],
    opts: TdseOptions,
) -> Result<TdseReport> {
    let ions = schedule.ions();
    let nm = modes.len();
    if ions.len() > MAX_IONS || nm > MAX_MODES || nm == 0 {
        return Err(Error::invalid(format!(
            "TDSE oracle supports ≤{MAX_IONS} driven ions and 1..={MAX_MODES} modes, got {} and {nm}",
            ions.len()
        )));
    }
    if opts.fock_cutoff < 2 || opts.fock_cutoff > MAX_CUTOFF {
        return Err(Error::invalid(format!("Fock cutoff must lie in 2..={MAX_CUTOFF}")));
    }
    if coherent_input.len() != nm {
        return Err(Error::DimensionMismatch(format!("{} coherent amplitudes for {nm} modes", coherent_input.len())));
    }
    let alpha = displacement_coefficients(schedule, modes, coupling, t_end)?;
    let phi = phase_matrix(schedule, modes, coupling, t_end)?;

    let c = opts.fock_cutoff;
    let dim = c.pow(nm as u32);
    let stride: Vec<usize> = (0..nm).map(|j| c.pow((nm - 1 - j) as u32)).collect();
    let sqrt_n: Vec<f64> = (0..=c).map(|n| (n as f64).sqrt()).collect();

    let g: Vec<Vec<f64>> = ions
        .iter()
        .map(|&m| (0..nm).map(|j| coupling.eta(m, modes.frequencies[j]) * modes.vectors[(m, j)]).collect())
        .collect();

    let max_amp = schedule.pulses.iter().map(|p| p.amplitude.abs()).fold(0.0, f64::max);
    let max_rate = modes.frequencies.iter().cloned().fold(0.0, f64::max)
        + schedule
            .pulses
            .iter()
            .map(|p| match p.shape {
                super::PulseShape::Sine { frequency } => frequency.abs(),
                super::PulseShape::Constant => 0.0,
            })
            .fold(0.0, f64::max);
    let gmax = g.iter().flatten().fold(0.0_f64, |a, x| a.max(x.abs()));
    let rate = max_rate + ions.len() as f64 * gmax * max_amp * sqrt_n[c] + 1e-12;
    let steps = ((t_end * rate / opts.phase_per_step).ceil() as usize).max(100);

    let input: Vec<Vec<Complex64>> = coherent_input.iter().map(|&gm| coherent(gm, c)).collect();
    let psi0 = product_state(&input);

    let n_ions = ions.len();
    let configs: Vec<Vec<f64>> = (0..1usize << n_ions)
        .map(|k| (0..n_ions).map(|b| if (k >> (n_ions - 1 - b)) & 1 == 0 { 1.0 } else { -1.0 }).collect())
        .collect();
    let weight = 1.0 / configs.len() as f64;

    let mut overlap = Complex64::new(0.0, 0.0);
    let mut displacements = Vec::new();
    let mut top_population: f64 = 0.0;
    for sigma in &configs {
        let mut psi = psi0.clone();
        let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            // h_j(t) = −i Σ_m g_mj σ_m Ω_m(t) e^{iω_j t};  H = Σ_j h_j a_j† + h_j* a_j
            let mut h = [Complex64::new(0.0, 0.0); MAX_MODES];
            for (k, p) in schedule.pulses.iter().enumerate() {
                let om = p.value(t);
                if om != 0.0 {
                    for j in 0..nm {
                        h[j] += g[k][j] * sigma[k] * om;
                    }
                }
            }
            for j in 0..nm {
                h[j] *= Complex64::new(0.0, -1.0) * Complex64::new(0.0, modes.frequencies[j] * t).exp();
            }
            for v in dy.iter_mut() {
                *v = Complex64::new(0.0, 0.0);
            }
            for idx in 0..dim {
                let yv = y[idx];
                if yv == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..nm {
                    let nj = (idx / stride[j]) % c;
                    // a† |n⟩ = sqrt(n+1) |n+1⟩
                    if nj + 1 < c {
                        dy[idx + stride[j]] += h[j] * sqrt_n[nj + 1] * yv;
                    }
                    // a |n⟩ = sqrt(n) |n−1⟩
                    if nj > 0 {
                        dy[idx - stride[j]] += h[j].conj() * sqrt_n[nj] * yv;
                    }
                }
            }
            for v in dy.iter_mut() {
                *v *= Complex64::new(0.0, -1.0);
            }
        };
        ode::integrate(rhs, &mut psi, 0.0, t_end, steps, |_, _| {});

        // saturation monitor
        for j in 0..nm {
            let pop: f64 = (0..dim).filter(|i| (i / stride[j]) % c == c - 1).map(|i| psi[i].norm_sqr()).sum();
            top_population = top_population.max(pop);
        }

        // ⟨a_j⟩
        let mut disp = Vec::with_capacity(nm);
        for j in 0..nm {
            let mut a = Complex64::new(0.0, 0.0);
            for idx in 0..dim {
                let nj = (idx / stride[j]) % c;
                if nj > 0 {
                    a += psi[idx - stride[j]].conj() * sqrt_n[nj] * psi[idx];
                }
            }
            disp.push(a - coherent_input[j]);
        }
        displacements.push(disp);

        // Magnus prediction: e^{iΦ} D(β)|γ⟩ = e^{iΦ} e^{(βγ* − β*γ)/2} |γ + β⟩
        let mut big_phi = 0.0;
        for (a, &m) in ions.iter().enumerate() {
            for (b, &n) in ions.iter().enumerate() {
                if a != b {
                    big_phi += phi.values[(m, n)] * sigma[a] * sigma[b];
                }
            }
        }
        let mut factors = Vec::with_capacity(nm);
        let mut prefactor = Complex64::new(0.0, big_phi).exp();
        for j in 0..nm {
            let beta: Complex64 = ions.iter().enumerate().map(|(a, &m)| alpha.values[(m, j)] * sigma[a]).sum();
            let gm = coherent_input[j];
            prefactor *= (0.5 * (beta * gm.conj() - beta.conj() * gm)).exp();
            factors.push(coherent(gm + beta, c));
        }
        let predicted = product_state(&factors);
        let ov: Complex64 = predicted.iter().zip(psi.iter()).map(|(p, q)| (prefactor * p).conj() * q).sum();
        overlap += weight * ov;
    }

    Ok(TdseReport {
        overlap,
        displacements,
        spins: configs,
        top_population,
        saturated: top_population > 1e-6,
        steps,
    })
}

//! Axial equilibrium of an ion chain in the scaled quartic potential.
//!
//! The energy in units of `M ω_s² l_s²` is
//! `u = Σ_m (−z_m²/2 + k4 z_m⁴/4) + Σ_{m<n} 1/|z_m − z_n|`.
//! The trap form is inferred from the transverse Hessian (its `+1/2` and
//! `−3k4 z²/2` diagonal terms are the radial Laplace partners of this axial
//! potential).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equilibrium positions in units of `l_s`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfiguration {
    pub positions: Vec<f64>,
    pub k4: f64,
}

impl ChainConfiguration {
    /// Wraps user-provided positions after checking they are finite and strictly increasing.
    pub fn new(positions: Vec<f64>, k4: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("chain must contain at least one ion"));
        }
        if positions.iter().any(|z| !z.is_finite()) || !k4.is_finite() {
            return Err(Error::invalid("positions and k4 must be finite"));
        }
        for (i, w) in positions.windows(2).enumerate() {
            if w[1] == w[0] {
                return Err(Error::CoincidentIons(i, i + 1));
            }
            if w[1] < w[0] {
                return Err(Error::invalid(format!("positions not increasing at index {}", i + 1)));
            }
        }
        Ok(Self { positions, k4 })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn energy(&self) -> f64 {
        scaled_axial_energy_gradient(&self.positions, self.k4).map(|(e, _)| e).unwrap_or(f64::NAN)
    }
}

fn check_distinct(z: &[f64]) -> Result<()> {
    for m in 0..z.len() {
        for n in m + 1..z.len() {
            if z[m] == z[n] {
                return Err(Error::CoincidentIons(m, n));
            }
        }
    }
    Ok(())
}

/// Scaled energy and its gradient.
pub fn scaled_axial_energy_gradient(positions: &[f64], k4: f64) -> Result<(f64, Vec<f64>)> {
    check_distinct(positions)?;
    let n = positions.len();
    let mut energy = 0.0;
    let mut grad = vec![0.0; n];
    for (m, &z) in positions.iter().enumerate() {
        energy += -0.5 * z * z + 0.25 * k4 * z.powi(4);
        grad[m] += -z + k4 * z.powi(3);
    }
    for m in 0..n {
        for k in m + 1..n {
            let d = positions[m] - positions[k];
            energy += 1.0 / d.abs();
            let f = d.signum() / (d * d);
            grad[m] -= f;
            grad[k] += f;
        }
    }
    Ok((energy, grad))
}

/// Axial Hessian of the scaled energy.
pub fn axial_hessian(positions: &[f64], k4: f64) -> Result<DMatrix<f64>> {
    check_distinct(positions)?;
    let n = positions.len();
    let mut h = DMatrix::zeros(n, n);
    for m in 0..n {
        h[(m, m)] = -1.0 + 3.0 * k4 * positions[m] * positions[m];
        for k in 0..n {
            if k != m {
                let c = 2.0 / (positions[m] - positions[k]).abs().powi(3);
                h[(m, m)] += c;
                h[(m, k)] = -c;
            }
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Convergence threshold on the gradient infinity norm.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 500 }
    }
}

/// Energies and gradient norms of accepted iterations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverTrace {
    pub energies: Vec<f64>,
    pub gradient_norms: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn is_ordered(z: &[f64]) -> bool {
    z.windows(2).all(|w| w[1] > w[0])
}

/// Evenly spaced seed spanning roughly the expected chain length.
pub fn default_seed(n: usize, k4: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let half = (n as f64).cbrt() / k4.sqrt();
    (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect()
}

pub fn solve_equilibrium(n: usize, k4: f64, initial_guess: Option<&[f64]>) -> Result<ChainConfiguration> {
    solve_equilibrium_traced(n, k4, initial_guess, SolverOptions::default()).map(|(c, _)| c)
}

/// Damped Newton iteration with a Levenberg shift, restricted to ordered configurations.
pub fn solve_equilibrium_traced(
    n: usize,
    k4: f64,
    initial_guess: Option<&[f64]>,
    opts: SolverOptions,
) -> Result<(ChainConfiguration, SolverTrace)> {
    if n == 0 {
        return Err(Error::invalid("ion count must be at least 1"));
    }
    if !(k4 > 0.0) || !k4.is_finite() {
        return Err(Error::invalid(format!("k4 must be positive, got {k4}")));
    }
    let mut z = match initial_guess {
        Some(g) => {
            if g.len() != n {
                return Err(Error::DimensionMismatch(format!("initial guess has {} entries, expected {n}", g.len())));
            }
            let mut g = g.to_vec();
            g.sort_by(|a, b| a.partial_cmp(b).expect("finite guess"));
            if !is_ordered(&g) {
                return Err(Error::invalid("initial guess has coincident ions"));
            }
            g
        }
        None => default_seed(n, k4),
    };

    let mut trace = SolverTrace::default();
    let (mut energy, mut grad) = scaled_axial_energy_gradient(&z, k4)?;
    trace.energies.push(energy);
    trace.gradient_norms.push(inf_norm(&grad));
    let mut shift = 0.0_f64;

    for _ in 0..opts.max_iterations {
        let gnorm = inf_norm(&grad);
        if gnorm < opts.tolerance {
            if n >= 2 {
                // escape a saddle if one was reached
                let h = axial_hessian(&z, k4)?;
                let eig = SymmetricEigen::new(h);
                let (imin, lmin) = eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (i, &l)| if l < acc.1 { (i, l) } else { acc });
                if lmin < -1e-9 {
                    let v = eig.eigenvectors.column(imin);
                    let gap = z.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                    let mut moved = false;
                    for sgn in [1.0, -1.0] {
                        let trial: Vec<f64> = z.iter().zip(v.iter()).map(|(a, b)| a + sgn * 0.1 * gap * b).collect();
                        if is_ordered(&trial) {
                            let (e, g) = scaled_axial_energy_gradient(&trial, k4)?;
                            if e < energy {
                                z = trial;
                                energy = e;
                                grad = g;
                                moved = true;
                                break;
                            }
                        }
                    }
                    if moved {
                        trace.energies.push(energy);
                        trace.gradient_norms.push(inf_norm(&grad));
                        continue;
                    }
                }
            }
            let config = ChainConfiguration { positions: z, k4 };
            return Ok((config, trace));
        }

        let h = axial_hessian(&z, k4)?;
        let g = DVector::from_column_slice(&grad);
        let mut accepted = false;
        let mut mu = shift;
        for _ in 0..60 {
            let shifted = &h + DMatrix::identity(n, n) * mu;
            let step = match shifted.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    mu = if mu == 0.0 { 1e-3 * (1.0 + h.diagonal().amax()) } else { mu * 10.0 };
                    continue;
                }
            };
            let mut lambda = 1.0;
            while lambda > 1e-12 {
                let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, s)| a + lambda * s).collect();
                if is_ordered(&trial) {
                    let (e, gr) = scaled_axial_energy_gradient(&trial, k4)?;
                    let noise = 1e-14 * energy.abs().max(1.0);
                    if e < energy || (e <= energy + noise && inf_norm(&gr) < gnorm) {
                        z = trial;
                        energy = e.min(energy);
                        grad = gr;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if accepted {
                shift = if lambda == 1.0 { mu * 0.1 } else { mu };
                if shift < 1e-12 {
                    shift = 0.0;
                }
                break;
            }
            mu = if mu == 0.0 { 1e-3 * (1.0 + h.diagonal().amax()) } else { mu * 10.0 };
        }
        if !accepted {
            // plain gradient descent as a last resort
            let mut lambda = 1.0 / (1.0 + h.diagonal().amax());
            while lambda > 1e-16 {
                let trial: Vec<f64> = z.iter().zip(grad.iter()).map(|(a, d)| a - lambda * d).collect();
                if is_ordered(&trial) {
                    let (e, gr) = scaled_axial_energy_gradient(&trial, k4)?;
                    if e < energy {
                        z = trial;
                        energy = e;
                        grad = gr;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations: trace.energies.len(), residual: inf_norm(&grad) });
        }
        trace.energies.push(energy);
        trace.gradient_norms.push(inf_norm(&grad));
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, residual: inf_norm(&grad) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingStatistics {
    pub mean_spacing: f64,
    pub relative_std: f64,
    pub min: f64,
    pub max: f64,
}

/// Nearest-neighbour gap statistics over the central `⌈fraction·N⌉` ions.
pub fn spacing_statistics(config: &ChainConfiguration, central_fraction: f64) -> Result<SpacingStatistics> {
    let n = config.len();
    if n < 2 {
        return Err(Error::invalid("spacing statistics need at least two ions"));
    }
    if !(central_fraction > 0.0 && central_fraction <= 1.0) {
        return Err(Error::invalid(format!("central fraction must lie in (0,1], got {central_fraction}")));
    }
    let count = ((central_fraction * n as f64).ceil() as usize).clamp(2, n);
    let start = (n - count) / 2;
    let gaps: Vec<f64> =
        config.positions[start..start + count].windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
    Ok(SpacingStatistics {
        mean_spacing: mean,
        relative_std: var.sqrt() / mean,
        min: gaps.iter().cloned().fold(f64::INFINITY, f64::min),
        max: gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    })
}

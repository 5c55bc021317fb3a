//! Two simultaneous phase gates on a shaped (or unshaped) chain.
//!
//! Each gate pair is driven with `Ω(t) = Ω0 sin(ν t)` for `τ = periods · 2π/ω_bus`;
//! the second pair may start after a delay. Amplitudes are calibrated per
//! pair to `|φ| = π/8` and the thermal fidelity is evaluated in the bare
//! phonon basis.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::ChainConfiguration;
use crate::error::{Error, Result};
use crate::fidelity::{
    bare_frame_displacements, duschinsky_map, gate_fidelity, identity_map, DuschinskyMap, GateLayout, ThermalState,
};
use crate::gate::{displacement_coefficients, phase_matrix, GateCoupling, Pulse, PulseSchedule, TARGET_PHASE};
use crate::modes::{most_localized_modes, transverse_modes, ModeDecomposition};
use crate::scenario::ChainScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSet {
    /// Shaped chain, every mode.
    All,
    /// Shaped chain, only the modes localized on the gate sub-crystals.
    Localized,
    /// Unshaped chain (no Rydberg ions).
    Bare,
}

impl ModeSet {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModeSet::All => "all",
            ModeSet::Localized => "localized",
            ModeSet::Bare => "bare",
        }
    }
}

impl std::str::FromStr for ModeSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(ModeSet::All),
            "localized" => Ok(ModeSet::Localized),
            "bare" => Ok(ModeSet::Bare),
            other => Err(Error::invalid(format!("unknown mode set '{other}' (all | localized | bare)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub chain: ChainScenario,
    /// Gate pairs, 0-based.
    pub pairs: [(usize, usize); 2],
    /// Gate duration in bus-mode periods.
    pub gate_periods: f64,
    pub coupling: GateCoupling,
    /// Mean occupation of the reference bare mode; sets a common temperature.
    pub nbar: f64,
    /// Bare mode (0-based, ascending frequency) carrying `nbar`; `None` means the highest.
    #[serde(default)]
    pub thermal_reference: Option<usize>,
}

impl ProtocolConfig {
    /// Ions 45/48/53/56 excited, gates on 46–47 and 54–55, τ = 8 bus periods, n̄ = 3.25.
    pub fn reference() -> Self {
        Self {
            chain: ChainScenario::four_rydberg(),
            pairs: [(45, 46), (53, 54)],
            gate_periods: 8.0,
            coupling: GateCoupling::default(),
            nbar: 3.25,
            thermal_reference: None,
        }
    }
}

/// One evaluation of the parallel-gate protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GatePoint {
    /// Shape frequency ν in units of ω_s.
    pub nu: f64,
    /// Start delay of the second gate, units of 1/ω_s.
    pub delay: f64,
    pub fidelity: f64,
    /// Calibrated pair phases (±π/8).
    pub phases: [f64; 2],
    /// Unit-amplitude pair phases.
    pub unit_phases: [f64; 2],
    pub amplitudes: [f64; 2],
    /// Largest residual displacement in the gate frame.
    pub max_abs_alpha: f64,
    /// Phase between ions of different pairs.
    pub cross_phase: f64,
    /// Set when a pair phase vanishes and no amplitude can be calibrated.
    pub degenerate: bool,
}

impl GatePoint {
    /// ντ/2π.
    pub fn loops(&self, tau: f64) -> f64 {
        self.nu * tau / (2.0 * PI)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub best: GatePoint,
    pub grid: Vec<GatePoint>,
}

/// Precomputed chain, modes and basis change for the protocol.
#[derive(Debug, Clone)]
pub struct ParallelGateProtocol {
    pub config: ProtocolConfig,
    pub chain: ChainConfiguration,
    pub bare: ModeDecomposition,
    pub shaped: ModeDecomposition,
    pub map: DuschinskyMap,
    /// Shaped modes localized on the gate sub-crystals, ascending frequency.
    pub localized: Vec<usize>,
    pub thermal: ThermalState,
    layout: GateLayout,
}

impl ParallelGateProtocol {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        let layout = GateLayout::new(config.pairs)?;
        if !(config.gate_periods > 0.0) {
            return Err(Error::invalid("gate duration must be positive"));
        }
        for &m in &layout.ions() {
            if m >= config.chain.n_ions {
                return Err(Error::invalid(format!("gate ion {} outside chain", m + 1)));
            }
            if config.chain.rydberg.contains(&m) {
                return Err(Error::invalid(format!("gate ion {} is Rydberg-excited", m + 1)));
            }
        }
        let chain = config.chain.configuration()?;
        let bare = transverse_modes(&chain, &config.chain.bare_assignment())?;
        let shaped = config.chain.modes(&chain)?;
        let map = duschinsky_map(&bare, &shaped)?;
        let ions = layout.ions();
        let subset = gate_subcrystal_union(&config.chain, &ions);
        let localized = most_localized_modes(&shaped, &subset, subset.len())?.modes;
        let reference = config.thermal_reference.unwrap_or(bare.len() - 1);
        let thermal = ThermalState::from_reference(&bare.frequencies, reference, config.nbar)?;
        Ok(Self { config, chain, bare, shaped, map, localized, thermal, layout })
    }

    /// Bus frequency: highest localized mode, or highest bare mode without shaping.
    pub fn bus_frequency(&self, set: ModeSet) -> f64 {
        match set {
            ModeSet::Bare => *self.bare.frequencies.last().expect("non-empty chain"),
            _ => self.localized.iter().map(|&j| self.shaped.frequencies[j]).fold(0.0, f64::max),
        }
    }

    /// τ = periods · 2π / ω_bus.
    pub fn gate_time(&self, set: ModeSet) -> f64 {
        self.config.gate_periods * 2.0 * PI / self.bus_frequency(set)
    }

    pub fn bus_period(&self, set: ModeSet) -> f64 {
        2.0 * PI / self.bus_frequency(set)
    }

    fn modes_for(&self, set: ModeSet) -> (ModeDecomposition, Option<&[usize]>) {
        match set {
            ModeSet::All => (self.shaped.clone(), None),
            ModeSet::Localized => (self.shaped.select(&self.localized), Some(&self.localized)),
            ModeSet::Bare => (self.bare.clone(), None),
        }
    }

    /// Calibrates both pairs and evaluates the fidelity at shape frequency `nu`.
    pub fn evaluate(&self, set: ModeSet, nu: f64, delay: f64) -> Result<GatePoint> {
        let (modes, selection) = self.modes_for(set);
        self.evaluate_with(set, &modes, selection, nu, delay)
    }

    fn evaluate_with(
        &self,
        set: ModeSet,
        modes: &ModeDecomposition,
        selection: Option<&[usize]>,
        nu: f64,
        delay: f64,
    ) -> Result<GatePoint> {
        if !(delay >= 0.0) {
            return Err(Error::invalid("delay must be non-negative"));
        }
        let tau = self.gate_time(set);
        let ions = self.layout.ions();
        let starts = [0.0, 0.0, delay, delay];
        let pulses = (0..4).map(|k| Pulse::sine(ions[k], 1.0, nu, starts[k], tau)).collect();
        let schedule = PulseSchedule::new(pulses)?;
        let t_end = tau + delay;
        let coupling = &self.config.coupling;
        let alpha = displacement_coefficients(&schedule, modes, coupling, t_end)?;
        let phi = phase_matrix(&schedule, modes, coupling, t_end)?;

        let unit = [phi.get(ions[0], ions[1]), phi.get(ions[2], ions[3])];
        let mut point = GatePoint {
            nu,
            delay,
            fidelity: 0.0,
            phases: [0.0; 2],
            unit_phases: unit,
            amplitudes: [0.0; 2],
            max_abs_alpha: 0.0,
            cross_phase: 0.0,
            degenerate: false,
        };
        if unit.iter().any(|p| !p.is_finite() || p.abs() < 1e-14 * TARGET_PHASE) {
            point.degenerate = true;
            return Ok(point);
        }
        let amps = [(TARGET_PHASE / unit[0].abs()).sqrt(), (TARGET_PHASE / unit[1].abs()).sqrt()];
        let per_ion = [amps[0], amps[0], amps[1], amps[1]];

        let n_shaped = self.shaped.len();
        let mut c_e = DMatrix::from_element(4, n_shaped, Complex64::new(0.0, 0.0));
        for (r, &m) in ions.iter().enumerate() {
            for c in 0..modes.len() {
                let col = selection.map_or(c, |s| s[c]);
                c_e[(r, col)] = alpha.values[(m, c)] * per_ion[r];
            }
        }
        let mut scaled = phi.clone();
        for a in 0..4 {
            for b in 0..4 {
                scaled.values[(ions[a], ions[b])] *= per_ion[a] * per_ion[b];
            }
        }
        let map = match set {
            ModeSet::Bare => identity_map(&self.bare),
            _ => self.map.clone(),
        };
        let c_g = bare_frame_displacements(&c_e, &map)?;
        let mut layout = self.layout.clone();
        layout.reference_signs = [unit[0].signum(), unit[1].signum()];
        let f = gate_fidelity(&c_g, &scaled, &self.thermal, &layout)?;

        point.fidelity = f;
        point.amplitudes = amps;
        point.phases = [scaled.get(ions[0], ions[1]), scaled.get(ions[2], ions[3])];
        point.max_abs_alpha = c_e.iter().fold(0.0, |a, z| a.max(z.norm()));
        point.cross_phase = [(0, 2), (0, 3), (1, 2), (1, 3)]
            .iter()
            .map(|&(a, b)| scaled.get(ions[a], ions[b]))
            .fold(0.0, |acc: f64, x| if x.abs() > acc.abs() { x } else { acc });
        Ok(point)
    }

    /// Evaluates every grid frequency in parallel; output order follows the grid.
    pub fn scan(&self, set: ModeSet, nu_grid: &[f64], delay: f64) -> Result<Vec<GatePoint>> {
        let (modes, selection) = self.modes_for(set);
        nu_grid.par_iter().map(|&nu| self.evaluate_with(set, &modes, selection, nu, delay)).collect()
    }

    /// Grid scan followed by golden-section refinement of the three best local maxima.
    pub fn optimize(&self, set: ModeSet, nu_grid: &[f64], delay: f64) -> Result<Optimum> {
        if nu_grid.len() < 3 {
            return Err(Error::invalid("frequency grid needs at least three points"));
        }
        let grid = self.scan(set, nu_grid, delay)?;
        let f: Vec<f64> = grid.iter().map(|p| p.fidelity).collect();
        let mut peaks: Vec<usize> =
            (1..f.len() - 1).filter(|&i| f[i] >= f[i - 1] && f[i] >= f[i + 1] && f[i] > 0.0).collect();
        peaks.sort_by(|&a, &b| f[b].partial_cmp(&f[a]).expect("finite fidelity"));
        peaks.truncate(3);

        let (modes, selection) = self.modes_for(set);
        let refined: Vec<GatePoint> = peaks
            .par_iter()
            .map(|&i| {
                golden_max(nu_grid[i - 1], nu_grid[i + 1], 1e-7 * nu_grid[i].abs().max(1e-12), |nu| {
                    self.evaluate_with(set, &modes, selection, nu, delay)
                })
            })
            .collect::<Result<_>>()?;
        let mut best = grid
            .iter()
            .copied()
            .max_by(|a, b| a.fidelity.partial_cmp(&b.fidelity).expect("finite fidelity"))
            .expect("non-empty grid");
        for p in refined {
            if p.fidelity > best.fidelity {
                best = p;
            }
        }
        Ok(Optimum { best, grid })
    }

    /// Frequency-optimized fidelity for each delay.
    pub fn delay_scan(&self, set: ModeSet, delays: &[f64], nu_grid: &[f64]) -> Result<Vec<Optimum>> {
        delays.iter().map(|&d| self.optimize(set, nu_grid, d)).collect()
    }

    /// `points` frequencies spanning `[lo, hi] · ω_bus`.
    pub fn nu_grid(&self, set: ModeSet, lo: f64, hi: f64, points: usize) -> Vec<f64> {
        let wb = self.bus_frequency(set);
        linspace(lo * wb, hi * wb, points)
    }
}

fn gate_subcrystal_union(chain: &ChainScenario, ions: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = chain
        .subcrystals()
        .into_iter()
        .filter(|sc| ions.iter().any(|m| sc.contains(m)))
        .flatten()
        .collect();
    if out.is_empty() {
        out = ions.to_vec();
    }
    out.sort_unstable();
    out.dedup();
    out
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn golden_max<F>(mut a: f64, mut b: f64, tol: f64, mut eval: F) -> Result<GatePoint>
where
    F: FnMut(f64) -> Result<GatePoint>,
{
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut p1 = eval(x1)?;
    let mut p2 = eval(x2)?;
    while (b - a).abs() > tol {
        if p1.fidelity >= p2.fidelity {
            b = x2;
            x2 = x1;
            p2 = p1;
            x1 = b - r * (b - a);
            p1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            p1 = p2;
            x2 = a + r * (b - a);
            p2 = eval(x2)?;
        }
    }
    Ok(if p1.fidelity >= p2.fidelity { p1 } else { p2 })
}

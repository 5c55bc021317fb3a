//! Microwave-dressed Rydberg excitation.
//!
//! Three levels `|D⟩` (low-lying), `|P⟩ = nP`, `|S⟩ = n′S` in the rotating
//! frame with `H = Ω_L/2 (|D⟩⟨P| + h.c.) + Ω_MW/2 (|P⟩⟨S| + h.c.) + Δ_P|P⟩⟨P| + Δ_S|S⟩⟨S|`.
//! The microwave mixes `|P⟩` and `|S⟩` into `|±⟩ = N_±(C_±|P⟩ + |S⟩)`, whose
//! polarizability can be nulled.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode;

const TWO_PI_MHZ: f64 = 2.0 * PI * 1e6;

/// Detunings and Rabi frequencies, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedSystem {
    pub delta_s: f64,
    pub delta_p: f64,
    pub omega_l: f64,
    pub omega_mw: f64,
}

impl DressedSystem {
    pub fn new(delta_s: f64, delta_p: f64, omega_l: f64, omega_mw: f64) -> Result<Self> {
        let s = Self { delta_s, delta_p, omega_l, omega_mw };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_mw > 0.0) || !self.omega_mw.is_finite() {
            return Err(Error::invalid(format!("microwave Rabi frequency must be positive, got {}", self.omega_mw)));
        }
        if !(self.delta_s.is_finite() && self.delta_p.is_finite() && self.omega_l.is_finite()) {
            return Err(Error::invalid("detunings and laser Rabi frequency must be finite"));
        }
        Ok(())
    }

    /// Δ_S = 2π·136.074 MHz, Δ_P = 2π·293.957 MHz, Ω_MW = 2π·400 MHz and
    /// Ω_L chosen so that the `|D⟩ ↔ |−⟩` Rabi frequency is 2π·1 MHz.
    pub fn reference() -> Self {
        let mut s = Self {
            delta_s: 136.074 * TWO_PI_MHZ,
            delta_p: 293.957 * TWO_PI_MHZ,
            omega_l: 0.0,
            omega_mw: 400.0 * TWO_PI_MHZ,
        };
        s.omega_l = s.laser_for_minus_rabi(TWO_PI_MHZ);
        s
    }

    pub fn delta_plus(&self) -> f64 {
        self.delta_p + self.delta_s
    }

    pub fn delta_minus(&self) -> f64 {
        self.delta_p - self.delta_s
    }

    /// Ω_L giving effective Rabi frequency `omega_minus` on `|D⟩ ↔ |−⟩`.
    pub fn laser_for_minus_rabi(&self, omega_minus: f64) -> f64 {
        let r = self.omega_mw.hypot(self.delta_minus());
        let c = (self.delta_minus() - r) / self.omega_mw;
        let n = 1.0 / (1.0 + c * c).sqrt();
        omega_minus * 2.0 * r * n / self.omega_mw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedStates {
    pub c_plus: f64,
    pub c_minus: f64,
    pub n_plus: f64,
    pub n_minus: f64,
    /// rad/s
    pub e_plus: f64,
    pub e_minus: f64,
    /// Effective `|D⟩ ↔ |±⟩` Rabi frequencies, rad/s.
    pub omega_plus: f64,
    pub omega_minus: f64,
}

impl DressedStates {
    /// `(⟨P|±⟩, ⟨S|±⟩)`.
    pub fn vector(&self, plus: bool) -> (f64, f64) {
        if plus {
            (self.n_plus * self.c_plus, self.n_plus)
        } else {
            (self.n_minus * self.c_minus, self.n_minus)
        }
    }
}

pub fn dressed_analysis(sys: &DressedSystem) -> Result<DressedStates> {
    sys.validate()?;
    let om = sys.omega_mw;
    let dm = sys.delta_minus();
    let r = om.hypot(dm);
    let c_plus = (dm + r) / om;
    let c_minus = (dm - r) / om;
    let n_plus = 1.0 / (1.0 + c_plus * c_plus).sqrt();
    let n_minus = 1.0 / (1.0 + c_minus * c_minus).sqrt();
    Ok(DressedStates {
        c_plus,
        c_minus,
        n_plus,
        n_minus,
        e_plus: 0.5 * sys.delta_plus() + 0.5 * r,
        e_minus: 0.5 * sys.delta_plus() - 0.5 * r,
        omega_plus: om * sys.omega_l / (2.0 * r * n_plus),
        omega_minus: om * sys.omega_l / (2.0 * r * n_minus),
    })
}

/// `P = N²(C² P_nP + P_n′S)`.
pub fn dressed_polarizability(mixing: f64, p_np: f64, p_ns: f64) -> f64 {
    (mixing * mixing * p_np + p_ns) / (1.0 + mixing * mixing)
}

/// Both dressed polarizabilities `(P_+, P_−)`.
pub fn dressed_polarizabilities(states: &DressedStates, p_np: f64, p_ns: f64) -> (f64, f64) {
    (dressed_polarizability(states.c_plus, p_np, p_ns), dressed_polarizability(states.c_minus, p_np, p_ns))
}

/// `|C|` at which the dressed polarizability vanishes.
pub fn zero_crossing_mixing(p_np: f64, p_ns: f64) -> Result<f64> {
    if p_np == 0.0 || p_np.signum() == p_ns.signum() {
        return Err(Error::NoZeroCrossing(p_np, p_ns));
    }
    Ok((-p_ns / p_np).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelAmplitudes {
    pub d: Complex64,
    pub p: Complex64,
    pub s: Complex64,
}

impl ThreeLevelAmplitudes {
    pub fn ground() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { d: Complex64::new(1.0, 0.0), p: z, s: z }
    }

    /// Dressed state `|−⟩` (or `|+⟩`).
    pub fn dressed(states: &DressedStates, plus: bool) -> Self {
        let (p, s) = states.vector(plus);
        Self { d: Complex64::new(0.0, 0.0), p: Complex64::new(p, 0.0), s: Complex64::new(s, 0.0) }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.d.norm_sqr() + self.p.norm_sqr() + self.s.norm_sqr()
    }

    fn to_vec(self) -> [Complex64; 3] {
        [self.d, self.p, self.s]
    }

    fn from_slice(v: &[Complex64]) -> Self {
        Self { d: v[0], p: v[1], s: v[2] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    /// seconds
    pub t: f64,
    pub amplitudes: ThreeLevelAmplitudes,
    /// Population of `|−⟩`, `|+⟩` for the dressed states at time `t`.
    pub pop_minus: f64,
    pub pop_plus: f64,
}

impl TrajectorySample {
    pub fn pop_d(&self) -> f64 {
        self.amplitudes.d.norm_sqr()
    }
    pub fn pop_p(&self) -> f64 {
        self.amplitudes.p.norm_sqr()
    }
    pub fn pop_s(&self) -> f64 {
        self.amplitudes.s.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub step: f64,
    /// Largest deviation of the norm from 1 along the run.
    pub norm_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has samples")
    }

    /// First sample time at which `f` reaches `level`.
    pub fn first_crossing(&self, level: f64, f: impl Fn(&TrajectorySample) -> f64) -> Option<f64> {
        self.samples.iter().find(|s| f(s) >= level).map(|s| s.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    /// Fixed step in seconds; `None` picks half the stability bound.
    pub step: Option<f64>,
    /// Keep every n-th step in the trajectory.
    pub sample_every: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { step: None, sample_every: 100 }
    }
}

/// `1/(50 · max(Ω_MW, |Δ_+|, |Δ_−|, extra))`.
pub fn step_bound(sys: &DressedSystem, extra_rate: f64) -> f64 {
    let rate = sys.omega_mw.max(sys.delta_plus().abs()).max(sys.delta_minus().abs()).max(extra_rate.abs());
    1.0 / (50.0 * rate)
}

fn pick_step(control: &StepControl, bound: f64, duration: f64) -> Result<(f64, usize)> {
    let h = match control.step {
        Some(h) if h > bound => return Err(Error::StepControl { step: h, bound }),
        Some(h) if !(h > 0.0) => return Err(Error::invalid("step must be positive")),
        Some(h) => h,
        None => 0.5 * bound,
    };
    let steps = (duration / h).ceil().max(1.0) as usize;
    Ok((duration / steps as f64, steps))
}

fn dressed_pops(states: &DressedStates, a: &ThreeLevelAmplitudes) -> (f64, f64) {
    let (pm, sm) = states.vector(false);
    let (pp, sp) = states.vector(true);
    ((a.p * pm + a.s * sm).norm_sqr(), (a.p * pp + a.s * sp).norm_sqr())
}

fn run<F>(
    mut hamiltonian: F,
    initial: ThreeLevelAmplitudes,
    duration: f64,
    h: f64,
    steps: usize,
    sample_every: usize,
    dressed_at: impl Fn(f64) -> DressedStates,
) -> Trajectory
where
    F: FnMut(f64) -> [[f64; 3]; 3],
{
    let mut y = initial.to_vec();
    let mut samples = Vec::new();
    let mut drift: f64 = 0.0;
    let every = sample_every.max(1);
    let mut count = 0usize;
    let mut record = |t: f64, y: &[Complex64]| {
        let a = ThreeLevelAmplitudes::from_slice(y);
        drift = drift.max((a.norm_sqr() - 1.0).abs());
        if count.is_multiple_of(every) || count == steps {
            let (pm, pp) = dressed_pops(&dressed_at(t), &a);
            samples.push(TrajectorySample { t, amplitudes: a, pop_minus: pm, pop_plus: pp });
        }
        count += 1;
    };
    let mi = Complex64::new(0.0, -1.0);
    ode::integrate(
        |t, y, dy| {
            let hm = hamiltonian(t);
            for r in 0..3 {
                dy[r] = mi * (y[0] * hm[r][0] + y[1] * hm[r][1] + y[2] * hm[r][2]);
            }
        },
        &mut y,
        0.0,
        duration,
        steps,
        &mut record,
    );
    Trajectory { samples, step: h, norm_drift: drift }
}

/// Fixed-step RK4 evolution of the full three-level system.
pub fn evolve_three_level(
    sys: &DressedSystem,
    initial: ThreeLevelAmplitudes,
    duration: f64,
    control: StepControl,
) -> Result<Trajectory> {
    sys.validate()?;
    if !(duration > 0.0) {
        return Err(Error::invalid("duration must be positive"));
    }
    let states = dressed_analysis(sys)?;
    let (h, steps) = pick_step(&control, step_bound(sys, sys.omega_l), duration)?;
    let hm = [
        [0.0, 0.5 * sys.omega_l, 0.0],
        [0.5 * sys.omega_l, sys.delta_p, 0.5 * sys.omega_mw],
        [0.0, 0.5 * sys.omega_mw, sys.delta_s],
    ];
    Ok(run(|_| hm, initial, duration, h, steps, control.sample_every, |_| states))
}

/// `|D⟩ ↔ |−⟩` population in the reduced two-level model at time `t`.
pub fn two_level_population(states: &DressedStates, t: f64) -> f64 {
    let om = states.omega_minus;
    let det = states.e_minus;
    let w = om.hypot(det);
    if w == 0.0 {
        return 0.0;
    }
    (om / w).powi(2) * (0.5 * w * t).sin().powi(2)
}

/// Microwave sweep parameters for switching `|−⟩` adiabatically into `|P⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSettings {
    /// Sweep rate `c` in 1/s.
    pub rate: f64,
    /// seconds
    pub duration: f64,
    /// Sweep stops once `|Δ_SP|` reaches this multiple of Ω_MW.
    pub cutoff_multiple: f64,
}

impl RampSettings {
    /// `c = Ω_MW / 4.7` over 20 ns.
    pub fn reference(sys: &DressedSystem) -> Self {
        Self { rate: sys.omega_mw / 4.7, duration: 20e-9, cutoff_multiple: 20.0 }
    }
}

/// `Δ_SP(t) = (Δ_S − Δ_P)(1 − c²t²)`, frozen once `|Δ_SP| ≥ cutoff·Ω_MW`.
pub fn ramp_detuning(sys: &DressedSystem, ramp: &RampSettings, t: f64) -> f64 {
    let d0 = sys.delta_s - sys.delta_p;
    let limit = ramp.cutoff_multiple * sys.omega_mw;
    let d = d0 * (1.0 - (ramp.rate * t).powi(2));
    if d.abs() >= limit && limit >= d0.abs() {
        limit * d.signum()
    } else {
        d
    }
}

/// Evolves `|−⟩` with the laser off while the S level is swept away.
pub fn adiabatic_ramp(sys: &DressedSystem, ramp: &RampSettings, control: StepControl) -> Result<Trajectory> {
    sys.validate()?;
    if sys.omega_l != 0.0 {
        return Err(Error::invalid("the ramp runs with the Rydberg laser off (Ω_L = 0)"));
    }
    if !(ramp.duration > 0.0) || !(ramp.rate >= 0.0) || !(ramp.cutoff_multiple > 0.0) {
        return Err(Error::invalid("ramp needs positive duration and cutoff and non-negative rate"));
    }
    let states0 = dressed_analysis(sys)?;
    let max_sp = (0..=200)
        .map(|k| ramp_detuning(sys, ramp, ramp.duration * k as f64 / 200.0).abs())
        .fold(0.0, f64::max);
    let (h, steps) = pick_step(&control, step_bound(sys, sys.delta_p.abs() + max_sp), ramp.duration)?;
    let dressed_at = |t: f64| {
        let mut s = *sys;
        s.delta_s = sys.delta_p + ramp_detuning(sys, ramp, t);
        dressed_analysis(&s).expect("validated system")
    };
    let ham = |t: f64| {
        let e_s = sys.delta_p + ramp_detuning(sys, ramp, t);
        [[0.0, 0.0, 0.0], [0.0, sys.delta_p, 0.5 * sys.omega_mw], [0.0, 0.5 * sys.omega_mw, e_s]]
    };
    Ok(run(ham, ThreeLevelAmplitudes::dressed(&states0, false), ramp.duration, h, steps, control.sample_every, dressed_at))
}

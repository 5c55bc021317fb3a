//! JSON scenario configuration. Ion indices are 1-based here and 0-based in the library.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rydberg_shaping::dressing::{DressedSystem, RampSettings};
use rydberg_shaping::gate::GateCoupling;
use rydberg_shaping::protocol::{ModeSet, ProtocolConfig};
use rydberg_shaping::scenario::ChainScenario;
use rydberg_shaping::units::StateFrequencies;

use crate::error::CliError;

const TWO_PI_MHZ: f64 = 2.0 * std::f64::consts::PI * 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub n_ions: usize,
    pub k4: f64,
    /// Radial frequency of ELL ions, units of ω_s.
    pub omega_ell: f64,
    /// Radial frequency of Rydberg ions, units of ω_s.
    pub omega_ryd: f64,
    pub rydberg_ions: Vec<usize>,
    pub gate_pairs: [[usize; 2]; 2],
    pub pulse: PulseConfig,
    pub thermal: ThermalConfig,
    pub coupling: CouplingConfig,
    pub localization_threshold: f64,
    pub mode_set: ModeSet,
    pub output_dir: Option<PathBuf>,
    pub dressing: DressingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    /// Gate duration τ in bus-mode periods.
    pub gate_periods: f64,
    /// ν grid bounds in units of the bus frequency.
    pub nu_min_over_bus: f64,
    pub nu_max_over_bus: f64,
    pub nu_points: usize,
    /// Delay grid bounds in bus-mode periods.
    pub delay_min_over_bus_period: f64,
    pub delay_max_over_bus_period: f64,
    pub delay_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalConfig {
    /// 1-based bare mode index in ascending frequency; absent means the highest mode.
    pub reference_mode: Option<usize>,
    pub nbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingConfig {
    pub eta_ref: f64,
    /// Mode frequency at which η = eta_ref, units of ω_s.
    pub omega_ref: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DressingConfig {
    pub delta_s_mhz: f64,
    pub delta_p_mhz: f64,
    pub omega_mw_mhz: f64,
    /// Target `|D⟩ ↔ |−⟩` Rabi frequency; fixes Ω_L.
    pub rabi_minus_mhz: f64,
    pub pulse_us: f64,
    /// Sweep rate c in units of Ω_MW.
    pub ramp_rate_over_omega_mw: f64,
    pub ramp_ns: f64,
    pub ramp_cutoff_multiple: f64,
    /// Keep every n-th integrator step.
    pub sample_every: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let s = ChainScenario::four_rydberg();
        let p = ProtocolConfig::reference();
        Self {
            n_ions: s.n_ions,
            k4: s.k4,
            omega_ell: s.frequencies.omega_ell,
            omega_ryd: s.frequencies.omega_ryd,
            rydberg_ions: s.rydberg.iter().map(|m| m + 1).collect(),
            gate_pairs: p.pairs.map(|(a, b)| [a + 1, b + 1]),
            pulse: PulseConfig::default(),
            thermal: ThermalConfig::default(),
            coupling: CouplingConfig::default(),
            localization_threshold: 0.95,
            mode_set: ModeSet::All,
            output_dir: None,
            dressing: DressingConfig::default(),
        }
    }
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            gate_periods: 8.0,
            nu_min_over_bus: 0.005,
            nu_max_over_bus: 1.0,
            nu_points: 200,
            delay_min_over_bus_period: 0.0,
            delay_max_over_bus_period: 4.0,
            delay_points: 20,
        }
    }
}

impl Default for ThermalConfig {
    fn default() -> Self {
        Self { reference_mode: None, nbar: 3.25 }
    }
}

impl Default for CouplingConfig {
    fn default() -> Self {
        let c = GateCoupling::default();
        Self { eta_ref: c.eta_ref, omega_ref: c.omega_ref }
    }
}

impl Default for DressingConfig {
    fn default() -> Self {
        let sys = DressedSystem::reference();
        let ramp = RampSettings::reference(&sys);
        Self {
            delta_s_mhz: sys.delta_s / TWO_PI_MHZ,
            delta_p_mhz: sys.delta_p / TWO_PI_MHZ,
            omega_mw_mhz: sys.omega_mw / TWO_PI_MHZ,
            rabi_minus_mhz: 1.0,
            pulse_us: 0.5,
            ramp_rate_over_omega_mw: ramp.rate / sys.omega_mw,
            ramp_ns: ramp.duration * 1e9,
            ramp_cutoff_multiple: ramp.cutoff_multiple,
            sample_every: 20,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.n_ions;
        if n == 0 {
            return Err(invalid("n_ions must be at least 1"));
        }
        positive("k4", self.k4)?;
        StateFrequencies::new(self.omega_ell, self.omega_ryd).map_err(CliError::from)?;
        let in_range = |m: usize| (1..=n).contains(&m);
        if !(self.localization_threshold > 0.0 && self.localization_threshold <= 1.0) {
            return Err(invalid("localization_threshold must lie in (0, 1]"));
        }
        let p = &self.pulse;
        positive("pulse.gate_periods", p.gate_periods)?;
        if p.nu_points == 0 || p.delay_points == 0 {
            return Err(invalid("pulse grids must be nonempty"));
        }
        positive("pulse.nu_min_over_bus", p.nu_min_over_bus)?;
        if !(p.nu_max_over_bus >= p.nu_min_over_bus) || !p.nu_max_over_bus.is_finite() {
            return Err(invalid("pulse.nu_max_over_bus must be finite and ≥ nu_min_over_bus"));
        }
        if !(p.delay_min_over_bus_period >= 0.0 && p.delay_max_over_bus_period >= p.delay_min_over_bus_period)
            || !p.delay_max_over_bus_period.is_finite()
        {
            return Err(invalid("delay grid must satisfy 0 ≤ min ≤ max"));
        }
        if !(self.thermal.nbar >= 0.0) || !self.thermal.nbar.is_finite() {
            return Err(invalid("thermal.nbar must be non-negative"));
        }
        if let Some(r) = self.thermal.reference_mode {
            if !in_range(r) {
                return Err(invalid(format!("thermal.reference_mode {r} outside 1..={n}")));
            }
        }
        positive("coupling.eta_ref", self.coupling.eta_ref)?;
        positive("coupling.omega_ref", self.coupling.omega_ref)?;
        let d = &self.dressing;
        for (name, x) in [
            ("dressing.omega_mw_mhz", d.omega_mw_mhz),
            ("dressing.rabi_minus_mhz", d.rabi_minus_mhz),
            ("dressing.pulse_us", d.pulse_us),
            ("dressing.ramp_ns", d.ramp_ns),
            ("dressing.ramp_cutoff_multiple", d.ramp_cutoff_multiple),
        ] {
            positive(name, x)?;
        }
        if !(d.ramp_rate_over_omega_mw >= 0.0) || !d.delta_s_mhz.is_finite() || !d.delta_p_mhz.is_finite() {
            return Err(invalid("dressing detunings must be finite and the ramp rate non-negative"));
        }
        if d.sample_every == 0 {
            return Err(invalid("dressing.sample_every must be at least 1"));
        }
        Ok(())
    }

    /// Rydberg-index checks for commands that build the electronic configuration.
    pub fn validate_rydberg(&self) -> Result<(), CliError> {
        let n = self.n_ions;
        if let Some(&m) = self.rydberg_ions.iter().find(|&&m| !(1..=n).contains(&m)) {
            return Err(invalid(format!("rydberg ion {m} outside 1..={n}")));
        }
        let mut seen = self.rydberg_ions.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("rydberg_ions contains duplicates"));
        }
        Ok(())
    }

    /// Gate-pair checks that only the gate commands need.
    pub fn validate_gates(&self) -> Result<(), CliError> {
        self.validate_rydberg()?;
        let n = self.n_ions;
        let ions: Vec<usize> = self.gate_pairs.iter().flatten().copied().collect();
        if let Some(&m) = ions.iter().find(|&&m| !(1..=n).contains(&m)) {
            return Err(invalid(format!("gate ion {m} outside 1..={n}")));
        }
        if let Some(&m) = ions.iter().find(|m| self.rydberg_ions.contains(m)) {
            return Err(invalid(format!("gate ion {m} is Rydberg-excited")));
        }
        Ok(())
    }

    pub fn chain(&self) -> Result<ChainScenario, CliError> {
        self.validate_rydberg()?;
        let mut rydberg: Vec<usize> = self.rydberg_ions.iter().map(|m| m - 1).collect();
        rydberg.sort_unstable();
        Ok(ChainScenario {
            n_ions: self.n_ions,
            k4: self.k4,
            frequencies: StateFrequencies::new(self.omega_ell, self.omega_ryd)?,
            rydberg,
        })
    }

    pub fn protocol(&self) -> Result<ProtocolConfig, CliError> {
        self.validate_gates()?;
        Ok(ProtocolConfig {
            chain: self.chain()?,
            pairs: self.gate_pairs.map(|[a, b]| (a - 1, b - 1)),
            gate_periods: self.pulse.gate_periods,
            coupling: GateCoupling::new(self.coupling.eta_ref, self.coupling.omega_ref)?,
            nbar: self.thermal.nbar,
            thermal_reference: self.thermal.reference_mode.map(|m| m - 1),
        })
    }

    pub fn dressed_system(&self) -> Result<DressedSystem, CliError> {
        let d = &self.dressing;
        let mut sys =
            DressedSystem::new(d.delta_s_mhz * TWO_PI_MHZ, d.delta_p_mhz * TWO_PI_MHZ, 0.0, d.omega_mw_mhz * TWO_PI_MHZ)?;
        sys.omega_l = sys.laser_for_minus_rabi(d.rabi_minus_mhz * TWO_PI_MHZ);
        Ok(sys)
    }

    pub fn ramp(&self, sys: &DressedSystem) -> RampSettings {
        let d = &self.dressing;
        RampSettings {
            rate: d.ramp_rate_over_omega_mw * sys.omega_mw,
            duration: d.ramp_ns * 1e-9,
            cutoff_multiple: d.ramp_cutoff_multiple,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_scenario() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        assert_eq!(c.rydberg_ions, vec![45, 48, 53, 56]);
        assert_eq!(c.gate_pairs, [[46, 47], [54, 55]]);
        assert_eq!(c.protocol().unwrap(), ProtocolConfig::reference());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = serde_json::from_str::<ScenarioConfig>(r#"{"n_ion": 5}"#).unwrap_err();
        assert!(e.to_string().contains("unknown field"));
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"pulse": {"gate_period": 8}}"#).is_err());
    }

    #[test]
    fn indices_are_one_based() {
        let c = ScenarioConfig { n_ions: 5, rydberg_ions: vec![5], ..ScenarioConfig::default() };
        c.validate().unwrap();
        assert_eq!(c.chain().unwrap().rydberg, vec![4]);
        for m in [0, 6] {
            let bad = ScenarioConfig { n_ions: 5, rydberg_ions: vec![m], ..ScenarioConfig::default() };
            assert!(bad.chain().is_err());
        }
        let dup = ScenarioConfig { n_ions: 5, rydberg_ions: vec![2, 2], ..ScenarioConfig::default() };
        assert!(dup.chain().is_err());
    }

    #[test]
    fn gate_ions_must_be_ell() {
        let c = ScenarioConfig { gate_pairs: [[45, 46], [54, 55]], ..ScenarioConfig::default() };
        assert!(c.validate_gates().is_err());
    }

    #[test]
    fn dressing_defaults_round_trip() {
        let c = ScenarioConfig::default();
        let sys = c.dressed_system().unwrap();
        let r = DressedSystem::reference();
        assert!((sys.omega_l - r.omega_l).abs() < 1e-6 * r.omega_l);
        assert!((sys.delta_s - r.delta_s).abs() < 1e-6 * r.delta_s);
    }
}

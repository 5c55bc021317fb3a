//! Subcommand bodies. Each writes its artifacts into `out` and returns its summary.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use rydberg_shaping::dressing::{
    adiabatic_ramp, dressed_analysis, evolve_three_level, two_level_population, DressedSystem, StepControl,
    ThreeLevelAmplitudes, Trajectory,
};
use rydberg_shaping::equilibrium::{solve_equilibrium, spacing_statistics};
use rydberg_shaping::fidelity::RadiativeDecay;
use rydberg_shaping::modes::{localized_mode_analysis, transverse_modes, ModeDecomposition};
use rydberg_shaping::protocol::{linspace, GatePoint, ModeSet, ParallelGateProtocol};
use rydberg_shaping::scenario::{truncation_comparison, ChainScenario};
use rydberg_shaping::units::{derive_scaled_units, ell_frequency_ratio, PhysicalConstants, ScaledUnits, TrapParameters};

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::heatmap::emit_heatmap;
use crate::output::{num, write_csv, write_json};

const CROSSING_LEVEL: f64 = 0.99;

fn units() -> Result<ScaledUnits, CliError> {
    Ok(derive_scaled_units(&TrapParameters::reference(), &PhysicalConstants::calcium40())?)
}

fn one_based(ions: &[usize]) -> Vec<usize> {
    ions.iter().map(|m| m + 1).collect()
}

fn mhz(units: &ScaledUnits, scaled_omega: f64) -> f64 {
    units.angular_frequency(scaled_omega) / (2.0 * PI * 1e6)
}

// ---------------------------------------------------------------- equilibrium

#[derive(Debug, Serialize)]
pub struct EquilibriumSummary {
    pub command: &'static str,
    pub n_ions: usize,
    pub k4: f64,
    pub length_scale_um: f64,
    pub extent_scaled: f64,
    pub spacing: Option<SpacingSummary>,
}

#[derive(Debug, Serialize)]
pub struct SpacingSummary {
    pub central_fraction: f64,
    pub mean_spacing_scaled: f64,
    pub mean_spacing_um: f64,
    pub relative_std: f64,
}

pub fn equilibrium(cfg: &ScenarioConfig, out: &Path) -> Result<EquilibriumSummary, CliError> {
    let units = units()?;
    let chain = solve_equilibrium(cfg.n_ions, cfg.k4, None)?;
    let rows = chain.positions.iter().enumerate().map(|(i, z)| vec![(i + 1).to_string(), num(*z)]);
    write_csv(&out.join("equilibrium.csv"), &["index", "z_scaled"], rows)?;
    let spacing = if cfg.n_ions >= 2 {
        let s = spacing_statistics(&chain, 0.5)?;
        Some(SpacingSummary {
            central_fraction: 0.5,
            mean_spacing_scaled: s.mean_spacing,
            mean_spacing_um: units.metres(s.mean_spacing) * 1e6,
            relative_std: s.relative_std,
        })
    } else {
        None
    };
    let summary = EquilibriumSummary {
        command: "equilibrium",
        n_ions: cfg.n_ions,
        k4: cfg.k4,
        length_scale_um: units.length_scale * 1e6,
        extent_scaled: chain.positions.last().unwrap_or(&0.0) - chain.positions.first().unwrap_or(&0.0),
        spacing,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- modes

#[derive(Debug, Serialize)]
pub struct ModesSummary {
    pub command: &'static str,
    pub n_ions: usize,
    pub rydberg_ions: Vec<usize>,
    pub mode_set: &'static str,
    pub frequency_scale_mhz: f64,
    pub min_omega_over_omegas: f64,
    pub max_omega_over_omegas: f64,
    pub localization_threshold: f64,
    pub subcrystals: Vec<SubcrystalSummary>,
}

#[derive(Debug, Serialize)]
pub struct SubcrystalSummary {
    pub ions: Vec<usize>,
    pub localized_modes: Vec<usize>,
    pub localized_weights: Vec<f64>,
    pub truncation_max_relative_discrepancy: f64,
}

pub fn modes(cfg: &ScenarioConfig, out: &Path) -> Result<ModesSummary, CliError> {
    let units = units()?;
    let scenario = match cfg.mode_set {
        ModeSet::Bare => ChainScenario { rydberg: Vec::new(), ..cfg.chain()? },
        _ => cfg.chain()?,
    };
    let chain = scenario.configuration()?;
    let assignment = scenario.assignment()?;
    let decomposition = transverse_modes(&chain, &assignment)?;
    write_mode_tables(&decomposition, &units, out)?;

    let mut subcrystals = Vec::new();
    let mut trunc_rows = Vec::new();
    for (k, ions) in scenario.subcrystals().into_iter().enumerate() {
        let loc = localized_mode_analysis(&decomposition, &ions, cfg.localization_threshold)?;
        let report = truncation_comparison(&chain, &assignment, &ions)?;
        for (i, (&j, (&f, &t))) in report
            .full_modes
            .iter()
            .zip(report.full_frequencies.iter().zip(&report.truncated_frequencies))
            .enumerate()
        {
            trunc_rows.push(vec![
                (k + 1).to_string(),
                (i + 1).to_string(),
                (j + 1).to_string(),
                num(f),
                num(t),
                num(((f - t) / f).abs()),
            ]);
        }
        subcrystals.push(SubcrystalSummary {
            ions: one_based(&ions),
            localized_modes: one_based(&loc.modes),
            localized_weights: loc.weights,
            truncation_max_relative_discrepancy: report.max_relative_discrepancy,
        });
    }
    if !subcrystals.is_empty() {
        write_csv(
            &out.join("truncation.csv"),
            &[
                "subcrystal",
                "rank",
                "full_mode_index",
                "full_omega_over_omegas",
                "truncated_omega_over_omegas",
                "relative_discrepancy",
            ],
            trunc_rows.into_iter(),
        )?;
    }
    let title = if scenario.rydberg.is_empty() {
        "|B| transverse modes, no Rydberg ions".to_string()
    } else {
        format!("|B| transverse modes, Rydberg ions {:?}", one_based(&scenario.rydberg))
    };
    emit_heatmap(&decomposition.vectors.transpose().abs(), "mode index", "ion index", &title, &out.join("modes_heatmap.svg"))?;

    let summary = ModesSummary {
        command: "modes",
        n_ions: scenario.n_ions,
        rydberg_ions: one_based(&scenario.rydberg),
        mode_set: cfg.mode_set.as_str(),
        frequency_scale_mhz: units.frequency_scale / (2.0 * PI * 1e6),
        min_omega_over_omegas: decomposition.frequencies[0],
        max_omega_over_omegas: *decomposition.frequencies.last().expect("non-empty chain"),
        localization_threshold: cfg.localization_threshold,
        subcrystals,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn write_mode_tables(d: &ModeDecomposition, units: &ScaledUnits, out: &Path) -> Result<(), CliError> {
    let n = d.vectors.nrows();
    let rows = (0..d.len()).flat_map(|j| (0..n).map(move |m| vec![(j + 1).to_string(), (m + 1).to_string(), num(d.vectors[(m, j)])]));
    write_csv(&out.join("modes.csv"), &["mode_index", "ion_index", "amplitude"], rows)?;
    let rows = d.frequencies.iter().enumerate().map(|(j, &w)| vec![(j + 1).to_string(), num(w), num(mhz(units, w))]);
    write_csv(&out.join("frequencies.csv"), &["mode_index", "omega_over_omegas", "frequency_mhz"], rows)
}

// ---------------------------------------------------------------- gate scan

#[derive(Debug, Serialize)]
pub struct GateScanSummary {
    pub command: &'static str,
    pub mode_set: &'static str,
    pub gate_pairs: [[usize; 2]; 2],
    pub bus_omega_over_omegas: f64,
    pub gate_time_scaled: f64,
    pub gate_time_us: f64,
    pub grid_points: usize,
    pub best: BestPoint,
    pub grid_maxima: Vec<GridMaximum>,
}

#[derive(Debug, Serialize)]
pub struct BestPoint {
    pub nu_over_omegas: f64,
    pub nu_tau_over_2pi: f64,
    pub fidelity: f64,
    pub phases: [f64; 2],
    pub amplitudes: [f64; 2],
    pub max_abs_alpha: f64,
    pub cross_phase: f64,
}

#[derive(Debug, Serialize)]
pub struct GridMaximum {
    pub nu_tau_over_2pi: f64,
    pub fidelity: f64,
}

fn best_point(p: &GatePoint, tau: f64) -> BestPoint {
    BestPoint {
        nu_over_omegas: p.nu,
        nu_tau_over_2pi: p.loops(tau),
        fidelity: p.fidelity,
        phases: p.phases,
        amplitudes: p.amplitudes,
        max_abs_alpha: p.max_abs_alpha,
        cross_phase: p.cross_phase,
    }
}

fn nu_grid(cfg: &ScenarioConfig, protocol: &ParallelGateProtocol, set: ModeSet) -> Vec<f64> {
    let p = &cfg.pulse;
    protocol.nu_grid(set, p.nu_min_over_bus, p.nu_max_over_bus, p.nu_points)
}

pub fn gate_scan(cfg: &ScenarioConfig, out: &Path) -> Result<GateScanSummary, CliError> {
    let units = units()?;
    let set = cfg.mode_set;
    let protocol = ParallelGateProtocol::new(cfg.protocol()?)?;
    let tau = protocol.gate_time(set);
    let opt = protocol.optimize(set, &nu_grid(cfg, &protocol, set), 0.0)?;
    let rows = opt.grid.iter().map(|g| {
        vec![
            num(g.nu),
            num(g.loops(tau)),
            num(g.unit_phases[0]),
            num(g.unit_phases[1]),
            num(g.amplitudes[0]),
            num(g.amplitudes[1]),
            num(g.max_abs_alpha),
            num(g.cross_phase),
            num(g.fidelity),
            g.degenerate.to_string(),
        ]
    });
    write_csv(
        &out.join("gate_scan.csv"),
        &[
            "nu_over_omegas",
            "nu_tau_over_2pi",
            "unit_phi_pair1",
            "unit_phi_pair2",
            "amplitude_pair1",
            "amplitude_pair2",
            "max_abs_alpha",
            "cross_phase",
            "fidelity",
            "degenerate",
        ],
        rows,
    )?;
    let f: Vec<f64> = opt.grid.iter().map(|g| g.fidelity).collect();
    let grid_maxima = (0..f.len())
        .filter(|&i| (i == 0 || f[i] > f[i - 1]) && (i + 1 == f.len() || f[i] >= f[i + 1]))
        .map(|i| GridMaximum { nu_tau_over_2pi: opt.grid[i].loops(tau), fidelity: f[i] })
        .collect();
    let summary = GateScanSummary {
        command: "gate-scan",
        mode_set: set.as_str(),
        gate_pairs: cfg.gate_pairs,
        bus_omega_over_omegas: protocol.bus_frequency(set),
        gate_time_scaled: tau,
        gate_time_us: units.seconds(tau) * 1e6,
        grid_points: opt.grid.len(),
        best: best_point(&opt.best, tau),
        grid_maxima,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- delay scan

#[derive(Debug, Serialize)]
pub struct DelayScanSummary {
    pub command: &'static str,
    pub mode_set: &'static str,
    pub bus_period_scaled: f64,
    pub gate_time_us: f64,
    pub delays: usize,
    pub grid_points: usize,
    pub min_fidelity: f64,
    pub min_fidelity_delay_over_bus_period: f64,
    pub max_fidelity: f64,
}

pub fn delay_scan(cfg: &ScenarioConfig, out: &Path) -> Result<DelayScanSummary, CliError> {
    let units = units()?;
    let set = cfg.mode_set;
    let protocol = ParallelGateProtocol::new(cfg.protocol()?)?;
    let tau = protocol.gate_time(set);
    let period = protocol.bus_period(set);
    let p = &cfg.pulse;
    let fractions = linspace(p.delay_min_over_bus_period, p.delay_max_over_bus_period, p.delay_points);
    let delays: Vec<f64> = fractions.iter().map(|x| x * period).collect();
    let optima = protocol.delay_scan(set, &delays, &nu_grid(cfg, &protocol, set))?;
    let rows = fractions.iter().zip(&optima).map(|(x, o)| {
        vec![
            num(*x),
            num(o.best.delay),
            num(o.best.nu),
            num(o.best.loops(tau)),
            num(o.best.fidelity),
            set.as_str().to_string(),
        ]
    });
    write_csv(
        &out.join("delay_scan.csv"),
        &["delay_over_bus_period", "delay_scaled", "nu_over_omegas", "nu_tau_over_2pi", "fidelity", "mode_set"],
        rows,
    )?;
    let (imin, fmin) = optima
        .iter()
        .map(|o| o.best.fidelity)
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, f)| if f < acc.1 { (i, f) } else { acc });
    let summary = DelayScanSummary {
        command: "delay-scan",
        mode_set: set.as_str(),
        bus_period_scaled: period,
        gate_time_us: units.seconds(tau) * 1e6,
        delays: optima.len(),
        grid_points: p.nu_points,
        min_fidelity: fmin,
        min_fidelity_delay_over_bus_period: fractions[imin],
        max_fidelity: optima.iter().map(|o| o.best.fidelity).fold(f64::NEG_INFINITY, f64::max),
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- dressing

#[derive(Debug, Serialize)]
pub struct DressingSummary {
    pub command: &'static str,
    pub c_minus: f64,
    pub c_plus: f64,
    pub autler_townes_mhz: f64,
    pub rabi_minus_mhz: f64,
    pub laser_rabi_mhz: f64,
    pub pulse_us: f64,
    pub pulse_final_pop_minus: f64,
    pub pulse_max_two_level_deviation: f64,
    pub pulse_norm_drift: f64,
    pub ramp_rate_over_omega_mw: f64,
    pub ramp_first_crossing_ns: Option<f64>,
    pub ramp_final_pop_p: f64,
    pub ramp_norm_drift: f64,
}

const TRAJECTORY_HEADER: [&str; 6] = ["t_ns", "pop_D", "pop_P", "pop_S", "pop_minus", "pop_plus"];

fn trajectory_rows(t: &Trajectory) -> impl Iterator<Item = Vec<String>> + '_ {
    t.samples.iter().map(|s| {
        vec![num(s.t * 1e9), num(s.pop_d()), num(s.pop_p()), num(s.pop_s()), num(s.pop_minus), num(s.pop_plus)]
    })
}

pub fn dressing(cfg: &ScenarioConfig, out: &Path) -> Result<DressingSummary, CliError> {
    let sys = cfg.dressed_system()?;
    let states = dressed_analysis(&sys)?;
    let control = StepControl { step: None, sample_every: cfg.dressing.sample_every };
    let pulse = evolve_three_level(&sys, ThreeLevelAmplitudes::ground(), cfg.dressing.pulse_us * 1e-6, control)?;
    write_csv(&out.join("dressing_pulse.csv"), &TRAJECTORY_HEADER, trajectory_rows(&pulse))?;
    let off = DressedSystem { omega_l: 0.0, ..sys };
    let ramp = adiabatic_ramp(&off, &cfg.ramp(&off), control)?;
    write_csv(&out.join("dressing_ramp.csv"), &TRAJECTORY_HEADER, trajectory_rows(&ramp))?;

    let deviation = pulse
        .samples
        .iter()
        .map(|s| (s.pop_minus - two_level_population(&states, s.t)).abs())
        .fold(0.0, f64::max);
    let two_pi_mhz = 2.0 * PI * 1e6;
    let summary = DressingSummary {
        command: "dressing",
        c_minus: states.c_minus.abs(),
        c_plus: states.c_plus.abs(),
        autler_townes_mhz: (states.e_plus - states.e_minus) / two_pi_mhz,
        rabi_minus_mhz: states.omega_minus.abs() / two_pi_mhz,
        laser_rabi_mhz: sys.omega_l / two_pi_mhz,
        pulse_us: cfg.dressing.pulse_us,
        pulse_final_pop_minus: pulse.last().pop_minus,
        pulse_max_two_level_deviation: deviation,
        pulse_norm_drift: pulse.norm_drift,
        ramp_rate_over_omega_mw: cfg.dressing.ramp_rate_over_omega_mw,
        ramp_first_crossing_ns: ramp.first_crossing(CROSSING_LEVEL, |s| s.pop_p()).map(|t| t * 1e9),
        ramp_final_pop_p: ramp.last().pop_p(),
        ramp_norm_drift: ramp.norm_drift,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

// ---------------------------------------------------------------- all figures

#[derive(Debug, Serialize)]
pub struct PaperSummary {
    pub command: &'static str,
    pub omega_ell_over_omegas: f64,
    pub gate_time_us: f64,
    pub unshaped_max_single_ion_weight: f64,
    pub two_rydberg_localized_modes: usize,
    pub four_rydberg_localized_modes_per_pair: [usize; 2],
    pub truncation_max_relative_discrepancy: f64,
    pub shaped_best_fidelity: f64,
    pub shaped_best_nu_tau_over_2pi: f64,
    pub unshaped_best_fidelity: f64,
    pub shaped_min_delay_fidelity: f64,
    pub unshaped_min_delay_fidelity: f64,
    pub dressing_c_minus: f64,
    pub dressing_pi_pulse_pop_minus: f64,
    pub dressing_ramp_first_crossing_ns: Option<f64>,
    pub decay_penalty_one_ion: f64,
    pub decay_penalty_four_ions: f64,
}

fn subdir(out: &Path, name: &str) -> Result<std::path::PathBuf, CliError> {
    let dir = out.join(name);
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn preset(cfg: &ScenarioConfig, scenario: ChainScenario, mode_set: ModeSet) -> ScenarioConfig {
    ScenarioConfig {
        n_ions: scenario.n_ions,
        k4: scenario.k4,
        omega_ell: scenario.frequencies.omega_ell,
        omega_ryd: scenario.frequencies.omega_ryd,
        rydberg_ions: one_based(&scenario.rydberg),
        gate_pairs: ScenarioConfig::default().gate_pairs,
        mode_set,
        ..cfg.clone()
    }
}

/// Runs every figure preset on the reference chains; grids, thermal and dressing settings come from `cfg`.
pub fn reproduce_paper(cfg: &ScenarioConfig, out: &Path) -> Result<PaperSummary, CliError> {
    let unshaped = preset(cfg, ChainScenario::all_ell(), ModeSet::All);
    let two = preset(cfg, ChainScenario::two_rydberg(), ModeSet::All);
    let four = preset(cfg, ChainScenario::four_rydberg(), ModeSet::All);
    let four_bare = preset(cfg, ChainScenario::four_rydberg(), ModeSet::Bare);

    modes(&unshaped, &subdir(out, "fig1b")?)?;
    let m4 = modes(&four, &subdir(out, "fig1c")?)?;
    let m2 = modes(&two, &subdir(out, "fig2")?)?;
    let g_shaped = gate_scan(&four, &subdir(out, "fig3a/shaped")?)?;
    let g_bare = gate_scan(&four_bare, &subdir(out, "fig3a/bare")?)?;
    let d_shaped = delay_scan(&four, &subdir(out, "fig3b/shaped")?)?;
    let d_bare = delay_scan(&four_bare, &subdir(out, "fig3b/bare")?)?;
    let dressed = dressing(cfg, &subdir(out, "figS2")?)?;

    let bare_chain = ChainScenario::all_ell();
    let bare_modes = bare_chain.modes(&bare_chain.configuration()?)?;
    let peak = bare_modes.vectors.iter().fold(0.0f64, |a, x| a.max(x * x));
    let pair_counts = |sc: &SubcrystalSummary| sc.localized_modes.len();
    let gate_subcrystals: Vec<&SubcrystalSummary> = m4.subcrystals.iter().filter(|s| s.ions.len() == 2).collect();
    let per_pair = match gate_subcrystals.as_slice() {
        [a, b] => [pair_counts(a), pair_counts(b)],
        _ => return Err(CliError::Validation("four-Rydberg preset must have two two-ion sub-crystals".into())),
    };
    let decay = RadiativeDecay::default();
    let summary = PaperSummary {
        command: "reproduce-paper",
        omega_ell_over_omegas: ell_frequency_ratio(&TrapParameters::reference(), &PhysicalConstants::calcium40())?,
        gate_time_us: g_shaped.gate_time_us,
        unshaped_max_single_ion_weight: peak,
        two_rydberg_localized_modes: m2.subcrystals.iter().map(|s| s.localized_modes.len()).sum(),
        four_rydberg_localized_modes_per_pair: per_pair,
        truncation_max_relative_discrepancy: m2
            .subcrystals
            .iter()
            .map(|s| s.truncation_max_relative_discrepancy)
            .fold(0.0, f64::max),
        shaped_best_fidelity: g_shaped.best.fidelity,
        shaped_best_nu_tau_over_2pi: g_shaped.best.nu_tau_over_2pi,
        unshaped_best_fidelity: g_bare.best.fidelity,
        shaped_min_delay_fidelity: d_shaped.min_fidelity,
        unshaped_min_delay_fidelity: d_bare.min_fidelity,
        dressing_c_minus: dressed.c_minus,
        dressing_pi_pulse_pop_minus: dressed.pulse_final_pop_minus,
        dressing_ramp_first_crossing_ns: dressed.ramp_first_crossing_ns,
        decay_penalty_one_ion: decay.penalty(1)?,
        decay_penalty_four_ions: decay.penalty(4)?,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

use std::f64::consts::PI;

use rydberg_shaping::gate::{calibrate_amplitude, phase_matrix, Pulse, PulseSchedule, TARGET_PHASE};
use rydberg_shaping::protocol::{ModeSet, ParallelGateProtocol, ProtocolConfig};

fn protocol() -> ParallelGateProtocol {
    ParallelGateProtocol::new(ProtocolConfig::reference()).unwrap()
}

/// Shape frequency with one loop per gate, near the shaped-chain optimum.
fn one_loop(p: &ParallelGateProtocol) -> f64 {
    2.0 * PI / p.gate_time(ModeSet::All)
}

#[test]
fn calibration_hits_target_phase_on_reference_chain() {
    let p = protocol();
    let tau = p.gate_time(ModeSet::All);
    let coupling = &p.config.coupling;
    for nu in [one_loop(&p), 0.37 * p.bus_frequency(ModeSet::All)] {
        for &(m, n) in &p.config.pairs {
            let s = PulseSchedule::new(vec![Pulse::sine(m, 1.0, nu, 0.0, tau), Pulse::sine(n, 1.0, nu, 0.0, tau)]).unwrap();
            let cal = calibrate_amplitude(&s, &p.shaped, coupling, (m, n)).unwrap();
            let scaled = s.scaled(&[m, n], cal.amplitude);
            let phi = phase_matrix(&scaled, &p.shaped, coupling, tau).unwrap().get(m, n);
            assert!((phi.abs() - TARGET_PHASE).abs() < 1e-10, "{phi}");
            assert_eq!(phi.signum(), cal.sign);
        }
    }
}

#[test]
fn localized_modes_carry_the_pair_phase() {
    let p = protocol();
    let nu = one_loop(&p);
    let all = p.evaluate(ModeSet::All, nu, 0.0).unwrap();
    let loc = p.evaluate(ModeSet::Localized, nu, 0.0).unwrap();
    for k in 0..2 {
        let rel = (loc.unit_phases[k] - all.unit_phases[k]).abs() / all.unit_phases[k].abs();
        assert!(rel < 1e-2, "pair {k}: all {} vs localized {} ({rel})", all.unit_phases[k], loc.unit_phases[k]);
    }
}

#[test]
fn gates_in_separate_subcrystals_barely_couple() {
    let p = protocol();
    let nu = one_loop(&p);
    let tau = p.gate_time(ModeSet::All);
    // second window starts after the first has ended
    for delay in [tau, 1.5 * tau, 3.0 * tau] {
        let g = p.evaluate(ModeSet::All, nu, delay).unwrap();
        assert!(g.cross_phase.abs() < 1e-3 * TARGET_PHASE, "delay {delay}: {}", g.cross_phase);
    }
}

#[test]
fn delayed_second_gate_keeps_high_fidelity_on_shaped_chain() {
    let p = protocol();
    let nu = one_loop(&p);
    let tau = p.gate_time(ModeSet::All);
    let a = p.evaluate(ModeSet::All, nu, 0.0).unwrap();
    let b = p.evaluate(ModeSet::All, nu, 1.7 * tau).unwrap();
    assert!((a.fidelity - b.fidelity).abs() < 1e-3, "{} vs {}", a.fidelity, b.fidelity);
}

#[test]
fn bare_chain_fidelity_is_lower() {
    let p = protocol();
    let shaped = p.evaluate(ModeSet::All, one_loop(&p), 0.0).unwrap();
    let bare_tau = p.gate_time(ModeSet::Bare);
    let bare = p.evaluate(ModeSet::Bare, 2.0 * PI / bare_tau, 0.0).unwrap();
    assert!(shaped.fidelity > bare.fidelity, "{} vs {}", shaped.fidelity, bare.fidelity);
}

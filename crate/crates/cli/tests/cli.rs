use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn rydshape(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydshape"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    repo().join("configs").join(name).to_string_lossy().into_owned()
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(repo().join("schemas").join(name)).unwrap();
    jsonschema::JSONSchema::compile(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, value: &Value) {
    let s = schema(schema_name);
    let msgs: Vec<String> = match s.validate(value) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{schema_name}: {msgs:?}");
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
}

fn error_report(o: &Output, code: i32) -> Value {
    assert_eq!(o.status.code(), Some(code), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stderr).expect("stderr is JSON");
    assert_valid("error.schema.json", &v);
    v
}

fn csv_header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

/// Every file in `dir` (recursively) with its bytes.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

/// Heatmap cells as (row, column, value), 1-based.
fn heatmap_cells(path: &Path) -> Vec<(usize, usize, f64)> {
    let attr = |line: &str, key: &str| -> String {
        line.split(&format!("{key}=\"")).nth(1).unwrap().split('"').next().unwrap().to_string()
    };
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| l.contains("data-row="))
        .map(|l| (attr(l, "data-row").parse().unwrap(), attr(l, "data-col").parse().unwrap(), attr(l, "data-value").parse().unwrap()))
        .collect()
}

fn rows_of(cells: &[(usize, usize, f64)]) -> BTreeMap<usize, Vec<(usize, f64)>> {
    let mut rows: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for &(r, c, v) in cells {
        rows.entry(r).or_default().push((c, v));
    }
    rows
}

#[test]
fn example_configs_match_the_schema() {
    for name in ["four_rydberg.json", "two_rydberg.json", "small_chain.json"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(config(name)).unwrap()).unwrap();
        assert_valid("config.schema.json", &v);
    }
}

#[test]
fn single_ion_equilibrium() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("one.json");
    std::fs::write(&cfg, r#"{"n_ions": 1}"#).unwrap();
    let out = tmp.path().join("out");
    ok(&rydshape(&["equilibrium", "--config", cfg.to_str().unwrap()], &out));
    assert_eq!(std::fs::read_to_string(out.join("equilibrium.csv")).unwrap(), "index,z_scaled\n1,0.0\n");
    let s = summary(&out);
    assert_valid("equilibrium.summary.schema.json", &s);
    assert!(s["spacing"].is_null());
}

#[test]
fn unknown_config_key_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"n_ion": 10}"#).unwrap();
    let o = rydshape(&["equilibrium", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    let v = error_report(&o, 2);
    assert!(v["error"]["message"].as_str().unwrap().contains("n_ion"));
}

#[test]
fn out_of_range_ion_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"n_ions": 10, "rydberg_ions": [11]}"#).unwrap();
    error_report(&rydshape(&["modes", "--config", cfg.to_str().unwrap()], &tmp.path().join("out")), 2);
}

#[test]
fn bad_arguments_are_validation_errors() {
    let tmp = tempfile::tempdir().unwrap();
    error_report(&rydshape(&["modes", "--mode-set", "some"], tmp.path()), 2);
    error_report(&rydshape(&["no-such-command"], tmp.path()), 2);
}

#[test]
fn unstable_chain_is_a_convergence_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("soft.json");
    // radial confinement too weak to hold a zigzag-free chain
    std::fs::write(&cfg, r#"{"omega_ell": 1.0, "omega_ryd": 1.0, "rydberg_ions": []}"#).unwrap();
    error_report(&rydshape(&["modes", "--config", cfg.to_str().unwrap()], &tmp.path().join("out")), 3);
}

#[test]
fn io_failures_exit_with_four() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.json");
    error_report(&rydshape(&["equilibrium", "--config", missing.to_str().unwrap()], tmp.path()), 4);
    let file = tmp.path().join("occupied");
    std::fs::write(&file, "not a directory").unwrap();
    error_report(&rydshape(&["equilibrium"], &file), 4);
}

#[test]
fn modes_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = config("small_chain.json");
    ok(&rydshape(&["modes", "--config", &cfg], &a));
    ok(&rydshape(&["modes", "--config", &cfg], &b));
    assert_eq!(snapshot(&a), snapshot(&b));
    assert_eq!(csv_header(&a.join("modes.csv")), "mode_index,ion_index,amplitude");
    assert_eq!(csv_header(&a.join("frequencies.csv")), "mode_index,omega_over_omegas,frequency_mhz");
    assert_eq!(std::fs::read_to_string(a.join("modes.csv")).unwrap().lines().count(), 1 + 20 * 20);
    assert_valid("modes.summary.schema.json", &summary(&a));
}

#[test]
fn gate_scan_output_does_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("one"), tmp.path().join("four"));
    let cfg = config("small_chain.json");
    ok(&rydshape(&["gate-scan", "--config", &cfg, "--threads", "1"], &a));
    ok(&rydshape(&["gate-scan", "--config", &cfg, "--threads", "4"], &b));
    assert_eq!(snapshot(&a), snapshot(&b));
    let text = std::fs::read_to_string(a.join("gate_scan.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "nu_over_omegas,nu_tau_over_2pi,unit_phi_pair1,unit_phi_pair2,amplitude_pair1,amplitude_pair2,max_abs_alpha,cross_phase,fidelity,degenerate"
    );
    assert_eq!(text.lines().count(), 1 + 24);
    assert_valid("gate-scan.summary.schema.json", &summary(&a));
}

#[test]
fn delay_scan_and_dressing_summaries_match_schemas() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("small_chain.json");
    let d = tmp.path().join("delay");
    ok(&rydshape(&["delay-scan", "--config", &cfg, "--mode-set", "bare"], &d));
    assert_eq!(csv_header(&d.join("delay_scan.csv")), "delay_over_bus_period,delay_scaled,nu_over_omegas,nu_tau_over_2pi,fidelity,mode_set");
    let s = summary(&d);
    assert_valid("delay-scan.summary.schema.json", &s);
    assert_eq!(s["mode_set"], "bare");
    let text = std::fs::read_to_string(d.join("delay_scan.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",bare")));

    let e = tmp.path().join("dressing");
    ok(&rydshape(&["dressing", "--config", &cfg], &e));
    for f in ["dressing_pulse.csv", "dressing_ramp.csv"] {
        assert_eq!(csv_header(&e.join(f)), "t_ns,pop_D,pop_P,pop_S,pop_minus,pop_plus");
    }
    assert_valid("dressing.summary.schema.json", &summary(&e));
}

#[test]
fn unshaped_heatmap_shows_delocalized_bands() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&rydshape(&["modes", "--mode-set", "bare"], tmp.path()));
    let cells = heatmap_cells(&tmp.path().join("modes_heatmap.svg"));
    assert_eq!(cells.len(), 100 * 100);
    // no mode concentrates on a single ion: |B| stays below √0.2
    let peak = cells.iter().map(|c| c.2).fold(0.0, f64::max);
    assert!(peak < 0.2f64.sqrt(), "{peak}");
}

#[test]
fn shaped_heatmap_has_blocks_on_gate_pairs() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&rydshape(&["modes"], tmp.path()));
    let rows = rows_of(&heatmap_cells(&tmp.path().join("modes_heatmap.svg")));
    let pairs = [46, 47, 54, 55];
    let mut lit = std::collections::BTreeSet::new();
    let mut block_rows = 0;
    for cells in rows.values() {
        let top = cells.iter().map(|c| c.1).fold(0.0, f64::max);
        let bright: Vec<usize> = cells.iter().filter(|c| c.1 >= 0.5 * top).map(|c| c.0).collect();
        if bright.iter().all(|c| pairs.contains(c)) {
            block_rows += 1;
            lit.extend(bright);
        }
    }
    assert!(block_rows >= 2, "{block_rows} rows confined to the gate pairs");
    assert_eq!(lit.into_iter().collect::<Vec<_>>(), pairs.to_vec());
}

#[test]
fn reference_gate_scan_peaks_at_whole_loops() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&rydshape(&["gate-scan", "--config", &config("four_rydberg.json")], tmp.path()));
    let s = summary(tmp.path());
    assert_valid("gate-scan.summary.schema.json", &s);
    // grid step in ντ/2π: 8 periods × (1 − 0.005)/199
    let step = 8.0 * 0.995 / 199.0;
    let loops = s["best"]["nu_tau_over_2pi"].as_f64().unwrap();
    assert!((loops - loops.round()).abs() <= step && loops.round() >= 1.0, "{loops}");
    assert!(s["best"]["fidelity"].as_f64().unwrap() >= 0.995);
    for m in s["grid_maxima"].as_array().unwrap() {
        if m["fidelity"].as_f64().unwrap() > 0.99 {
            let k = m["nu_tau_over_2pi"].as_f64().unwrap();
            assert!((k - k.round()).abs() <= step, "maximum at ντ/2π = {k}");
        }
    }
}

#[test]
fn reproduce_paper_writes_every_figure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("coarse.json");
    std::fs::write(&cfg, r#"{"pulse": {"nu_points": 40, "delay_points": 2}, "dressing": {"sample_every": 200}}"#).unwrap();
    let out = tmp.path().join("paper");
    ok(&rydshape(&["reproduce-paper", "--config", cfg.to_str().unwrap()], &out));
    let s = summary(&out);
    assert_valid("reproduce-paper.summary.schema.json", &s);
    let parts = [
        ("fig1b", "modes.summary.schema.json"),
        ("fig1c", "modes.summary.schema.json"),
        ("fig2", "modes.summary.schema.json"),
        ("fig3a/shaped", "gate-scan.summary.schema.json"),
        ("fig3a/bare", "gate-scan.summary.schema.json"),
        ("fig3b/shaped", "delay-scan.summary.schema.json"),
        ("fig3b/bare", "delay-scan.summary.schema.json"),
        ("figS2", "dressing.summary.schema.json"),
    ];
    for (dir, schema_name) in parts {
        assert_valid(schema_name, &summary(&out.join(dir)));
    }
    assert!(out.join("fig2/truncation.csv").exists());
    assert!(s["shaped_best_fidelity"].as_f64().unwrap() > s["unshaped_best_fidelity"].as_f64().unwrap());
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_spingate");

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("scenario.json");
    std::fs::write(&path, body).unwrap();
    path
}

fn spingate(args: &[&str], config: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--config")
        .arg(config)
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

/// Data rows of a CSV with `#` metadata lines and a header.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

const BASE: &str = r#"
  "cavities": {
    "main": { "units": "kappa", "g": 2.4, "gamma": 0.1 },
    "empty": { "g": 0.0, "gamma": 0.1 }
  }"#;

fn config(extra: &str) -> String {
    format!("{{ \"seed\": 7, {BASE}, {extra} }}")
}

#[test]
fn spectra_csv_layout_and_resonance_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(r#""spectra": { "cavity": "main", "min": -5, "max": 5, "points": 1001 }"#),
    );
    let csv = stdout(&spingate(&["spectra"], &cfg));
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# tool: spingate "));
    assert!(lines.next().unwrap().starts_with("# config_sha256: "));
    assert_eq!(lines.next().unwrap(), "# seed: 7");
    assert_eq!(
        lines.next().unwrap(),
        "omega,abs_r0,abs_t0,abs_r,abs_t,fidelity"
    );
    assert!(!csv.contains('\r'));
    let data = rows(&csv);
    assert_eq!(data.len(), 1001);
    let centre = &data[500];
    assert_eq!(centre[0], 0.0);
    assert!((centre[5] - 0.999963).abs() < 1e-5);
}

#[test]
fn decoupled_cavity_has_flat_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(r#""spectra": { "cavity": "empty", "min": -3, "max": 3, "points": 61 }"#),
    );
    for row in rows(&stdout(&spingate(&["spectra"], &cfg))) {
        assert!((row[5] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }
}

#[test]
fn parameter_sweep_uses_parameter_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(
            r#""spectra": { "cavity": "main", "parameter": "g", "min": 0, "max": 4, "points": 9 }"#,
        ),
    );
    let csv = stdout(&spingate(&["spectra"], &cfg));
    assert!(csv.contains("\ng,abs_r0,abs_t0,abs_r,abs_t,fidelity\n"));
    let f: Vec<f64> = rows(&csv).iter().map(|r| r[5]).collect();
    assert!(f.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn inverted_range_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(r#""spectra": { "cavity": "main", "min": 5, "max": -5, "points": 11 }"#),
    );
    let o = spingate(&["spectra"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("spectra.min"), "{err}");
}

#[test]
fn unknown_protocol_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(r#""protocol": { "name": "teleport", "cavity": "main" }"#),
    );
    let o = spingate(&["protocol"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("protocol.name"));
}

#[test]
fn missing_config_and_bad_json_exit_2() {
    let o = Command::new(BIN).arg("spectra").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{ not json");
    assert_eq!(spingate(&["spectra"], &cfg).status.code(), Some(2));
    let o = Command::new(BIN).arg("frobnicate").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn impossible_herald_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(
            r#""protocol": { "name": "entangle_spins", "cavity": "main", "mode": "ideal", "spins": ["up", "down"] }"#,
        ),
    );
    let o = spingate(&["protocol"], &cfg);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn photon_pair_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(
            r#""trials": 20000, "protocol": { "name": "entangle_photons", "cavity": "main", "mode": "ideal" }"#,
        ),
    );
    let v = json(&spingate(&["protocol"], &cfg));
    assert_eq!(v["protocol"], "entangle_photons");
    assert!((v["p_success"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(v["metadata"]["seed"], 7);
    assert_eq!(v["trials"]["n_trials"], 20000);
    let frac = v["trials"]["success_fraction"].as_f64().unwrap();
    let sigma = v["trials"]["sigma"].as_f64().unwrap();
    assert!((frac - 0.25).abs() < 5.0 * sigma);
    for h in v["heralds"].as_array().unwrap() {
        assert!((h["target_overlap"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert!(h.get("state").is_none());
    }
    assert!(v.get("final").is_none());
}

#[test]
fn spin_pair_report_gives_simulated_probability() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(
            r#""trials": 0, "protocol": { "name": "entangle_spins", "cavity": "main", "mode": "ideal" }"#,
        ),
    );
    let v = json(&spingate(&["protocol"], &cfg));
    assert!((v["p_success"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!(v.get("trials").is_none());
}

#[test]
fn dump_state_includes_final_register() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(
            r#""trials": 10, "protocol": { "name": "photon_to_spin", "cavity": "main", "mode": "ideal", "photon": { "alpha": 0.6, "beta": [0, 0.8] } }"#,
        ),
    );
    let v = json(&spingate(&["protocol", "--dump-state"], &cfg));
    let fin = &v["final"];
    assert_eq!(fin["labels"][0]["kind"], "spin");
    assert_eq!(fin["amplitudes"].as_array().unwrap().len(), 2);
    assert!(v["heralds"][0].get("state").is_some());
}

#[test]
fn same_seed_gives_identical_bytes_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(
            r#""trials": 30000, "protocol": { "name": "ghz_photons", "cavity": "main", "n": 3 }"#,
        ),
    );
    let run = |threads: &str| {
        Command::new(BIN)
            .args(["protocol", "--config"])
            .arg(&cfg)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let a = run("1");
    assert!(!a.is_empty());
    assert_eq!(a, run("1"));
    assert_eq!(a, run("4"));
    let other = Command::new(BIN)
        .args(["protocol", "--seed", "8", "--config"])
        .arg(&cfg)
        .output()
        .unwrap()
        .stdout;
    assert_ne!(a, other);
}

#[test]
fn missing_seed_is_drawn_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{{ {BASE}, \"trials\": 100, \"protocol\": {{ \"name\": \"qnd_spin_measurement\", \"cavity\": \"main\" }} }}");
    let cfg = write_config(dir.path(), &body);
    let o = spingate(&["protocol"], &cfg);
    let v = json(&o);
    let err = String::from_utf8_lossy(&o.stderr);
    let echoed: u64 = err
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed echoed on stderr")
        .parse()
        .unwrap();
    assert_eq!(v["metadata"]["seed"].as_u64(), Some(echoed));
}

#[test]
fn decoherence_curve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(r#""decoherence": { "t2": 2.0, "min": 0, "max": 20, "points": 101 }"#),
    );
    let csv = stdout(&spingate(&["decoherence"], &cfg));
    assert!(csv.contains("\nt,offdiag,fidelity\n"));
    let data = rows(&csv);
    assert_eq!(data[0][2], 1.0);
    assert_eq!(data[10][0], 2.0);
    assert!((data[10][2] - 0.68394).abs() < 1e-5);
    assert!(data.windows(2).all(|w| w[1][2] < w[0][2]));
}

#[test]
fn dephased_photon_pair_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(
            r#""trials": 1000, "protocol": { "name": "entangle_photons", "cavity": "main", "mode": "ideal", "dephasing": { "t": 1.0, "t2": 1.0 } }"#,
        ),
    );
    let v = json(&spingate(&["protocol", "--dump-state"], &cfg));
    let d = &v["dephasing"];
    let mean = d["mean_fidelity"].as_f64().unwrap();
    assert!((mean - d["predicted_fidelity"].as_f64().unwrap()).abs() < 1e-12);
    assert!((mean - 0.683_939_720_585_721_2).abs() < 1e-12);
    assert!(v["heralds"][0].get("density").is_some());
    let cfg = write_config(
        dir.path(),
        &config(
            r#""protocol": { "name": "photon_to_spin", "cavity": "main", "dephasing": { "t": 1.0, "t2": 1.0 } }"#,
        ),
    );
    assert_eq!(spingate(&["protocol"], &cfg).status.code(), Some(2));
}

#[test]
fn gate_describe_and_micro_ev_units() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{ "seed": 1,
             "cavities": { "dev": { "units": "ueV", "g": 120, "kappa": 50, "gamma": 5 } },
             "gate": { "cavity": "dev", "omega": 25, "mode": "full" } }"#,
    );
    let v = json(&spingate(&["gate", "describe"], &cfg));
    assert!((v["abs_t0"].as_f64().unwrap() - 0.894_427_190_999_915_9).abs() < 1e-12);
    assert!((v["fidelity"].as_f64().unwrap() - 0.994_978_241_586_281_2).abs() < 1e-12);
    assert_eq!(v["gate"]["provenance"]["omega"], 0.5);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &config(r#""decoherence": { "t2": 1.0, "min": 0, "max": 1, "points": 3 }"#),
    );
    let target = dir.path().join("curve.csv");
    let o = Command::new(BIN)
        .args(["decoherence", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&target)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(rows(&std::fs::read_to_string(target).unwrap()).len(), 3);
}

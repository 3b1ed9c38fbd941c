//! End-to-end tests of the `quench` binary: exit codes, output layout,
//! determinism, and the documented subcommand behaviors.

use std::path::Path;
use std::process::{Command, Output};

fn quench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench")).args(args).output().expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn base_config(out_path: &Path) -> String {
    format!(
        r#"
version = 1

[model]
case = "I"
n_sites = 4
hopping = 1.0

[initial]
state = "neel"

[evolution]
scheme = "symmetric"
dt = 0.25
n_steps = 2

[sampling]
shots = 512
seed = 9

[observables]
names = ["magnetization", "n_half", "parity"]

[output]
path = "{}"
"#,
        out_path.display()
    )
}

const CALIBRATION: &str = "\
single_duration 0.1
qubit 0 readout 0.04 t1 70 t2 80
qubit 1 readout 0.04 t1 70 t2 80
qubit 2 readout 0.04 t1 70 t2 80
qubit 3 readout 0.04 t1 70 t2 80
edge 0 1 cnot 0.02 duration 0.4
edge 1 2 cnot 0.02 duration 0.4
edge 2 3 cnot 0.02 duration 0.4
";

#[test]
fn zero_time_rows_match_the_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.csv");
    let config = dir.path().join("experiment.toml");
    write(&config, &base_config(&out));

    let result = quench(&["run", "--config", config.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));

    let text = std::fs::read_to_string(&out).unwrap();
    // Néel |↑↓↑↓⟩: site 1 up, site 2 down; N_half = 1 up spin on the left.
    for expected in [
        "0,m_1,1,0,1,trotter",
        "0,m_2,-1,0,1,trotter",
        "0,n_half,1,0,1,trotter",
        "0,parity,1,0,1,trotter",
        "0,m_1,1,0,1,shots_raw",
        "0,parity,1,0,1,shots_raw",
    ] {
        assert!(text.lines().any(|l| l == expected), "missing row {expected:?} in:\n{text}");
    }
}

#[test]
fn reruns_are_byte_identical_and_seed_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.csv");
    let config = dir.path().join("experiment.toml");
    write(&config, &base_config(&out));
    let args = ["run", "--config", config.to_str().unwrap()];

    assert!(quench(&args).status.success());
    let first = std::fs::read(&out).unwrap();
    assert!(quench(&args).status.success());
    assert_eq!(first, std::fs::read(&out).unwrap(), "rerun must be byte-identical");

    assert!(quench(&["run", "--config", config.to_str().unwrap(), "--seed", "10"])
        .status
        .success());
    assert_ne!(first, std::fs::read(&out).unwrap(), "different seed, different samples");
}

#[test]
fn config_problems_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.csv");
    let config = dir.path().join("experiment.toml");

    write(&config, &base_config(&out).replace("[sampling]", "[sampling]\ntypo_key = 3"));
    let result = quench(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));

    write(
        &config,
        &base_config(&out)
            .replace("names = [\"magnetization\", \"n_half\", \"parity\"]", "names = [\"correlator\"]"),
    );
    let result = quench(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2), "correlator without pairs");
    assert!(String::from_utf8_lossy(&result.stderr).contains("pairs"));
}

#[test]
fn infeasible_selection_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cal = dir.path().join("device.cal");
    write(&cal, CALIBRATION);
    let config = dir.path().join("select.toml");
    write(
        &config,
        r#"
version = 1

[noise]
calibration = "device.cal"
channels = ["cnot"]
layout = "auto"

[select]
chain_length = 6
meas_threshold = 0.08
t2_threshold = 20.0
"#,
    );
    // Only four qubits exist; a six-qubit chain can never be found.
    let result = quench(&["select-qubits", "--config", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&result.stderr).contains("no 6-qubit chain"));
}

#[test]
fn select_reports_chain_and_stats_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cal = dir.path().join("device.cal");
    write(&cal, CALIBRATION);
    let config = dir.path().join("select.toml");
    write(
        &config,
        r#"
version = 1

[noise]
calibration = "device.cal"
channels = ["cnot"]
layout = "auto"

[select]
chain_length = 4
meas_threshold = 0.08
t2_threshold = 20.0
"#,
    );
    let result = quench(&["select-qubits", "--config", config.to_str().unwrap()]);
    assert!(result.status.success());
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.contains("# chain=0 1 2 3"), "unexpected report:\n{text}");
    assert!(text.contains("# matches_brute_force=true"));
    assert!(text.contains("cnot,0.02,0.02,0.02"));
}

#[test]
fn noiseless_echo_is_flat_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("echo.csv");
    let config = dir.path().join("echo.toml");
    write(&config, &base_config(&out));

    let result = quench(&["echo", "--config", config.to_str().unwrap()]);
    assert!(result.status.success(), "stderr: {}", String::from_utf8_lossy(&result.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut trotter_rows = 0;
    for line in text.lines().filter(|l| l.contains(",echo,") && l.ends_with("trotter")) {
        let value: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((value - 1.0).abs() < 1e-9, "echo must stay at 1, got {line}");
        trotter_rows += 1;
    }
    assert_eq!(trotter_rows, 3, "one row per grid point");
    for line in text.lines().filter(|l| l.contains(",echo,") && l.ends_with("shots_raw")) {
        let value: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(value, 1.0, "noiseless sampling returns every shot, got {line}");
    }
}

#[test]
fn ghz_without_output_section_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("ghz.toml");
    write(
        &config,
        r#"
version = 1

[sampling]
shots = 4096
seed = 2
"#,
    );
    let result = quench(&["ghz-mermin", "--config", config.to_str().unwrap()]);
    assert!(result.status.success());
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.contains("0,mermin,4,0,1,shots_raw"), "noiseless witness is exactly 4:\n{text}");
    assert!(text.lines().any(|l| l.starts_with("0,mermin,4.000000000000") && l.ends_with("exact")));
}

#[test]
fn synth_check_passes_and_reports() {
    let result = quench(&["synth-check", "--samples", "200", "--seed", "4"]);
    assert!(result.status.success());
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.contains("synth-check: pass"), "report:\n{text}");
}

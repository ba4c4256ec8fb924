//! End-to-end checks of the `simulate` binary: config handling, exit codes,
//! output files.

use std::path::Path;
use std::process::Command;

fn simulate() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("sim.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

const TINY: &str = "\
nt = 2
nr = 2
s = 2
p = 2
m = 2
rate = 2/3
snr_db = 6, 12
frames = 2
instants = 12
modes = csd, psi
seed = 3
";

#[test]
fn sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let csv = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    let output = simulate()
        .arg("--config")
        .arg(&cfg)
        .arg("--out-csv")
        .arg(&csv)
        .arg("--out-plot")
        .arg(&svg)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    // header + 2 SNR points x 2 modes
    assert_eq!(csv_text.lines().count(), 5);
    assert!(csv_text.starts_with("nt,nr,S,P,M,rate,mode,snr_db"));
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
}

#[test]
fn flags_override_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let csv = dir.path().join("out.csv");
    let output = simulate()
        .arg("--config")
        .arg(&cfg)
        .arg("--snr-db")
        .arg("9")
        .arg("--modes")
        .arg("psi")
        .arg("--frames")
        .arg("1")
        .arg("--out-csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(output.status.success());
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = csv_text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains(",psi,"));
    assert!(lines[1].contains("9.0000000000000000e0"));
}

#[test]
fn config_errors_exit_with_code_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("s = 2", "s = 5"));
    let output = simulate().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("`s`"), "stderr: {stderr}");
}

#[test]
fn missing_config_file_exits_with_code_2() {
    let output = simulate()
        .arg("--config")
        .arg("/nonexistent/sim.cfg")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn custom_precoder_matrix_file_is_loaded_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    // a valid 2x2 unitary: the normalized DFT matrix
    let matrix = dir.path().join("theta.txt");
    std::fs::write(
        &matrix,
        "0.7071067811865476 0.7071067811865476\n0.7071067811865476 -0.7071067811865476\n",
    )
    .unwrap();
    let body = format!("{TINY}precoder = {}\n", matrix.display());
    let cfg = write_config(dir.path(), &body);
    let output = simulate()
        .arg("--config")
        .arg(&cfg)
        .arg("--frames")
        .arg("1")
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );

    // a non-unitary matrix must be rejected
    std::fs::write(&matrix, "1 0\n0 0.5\n").unwrap();
    let output = simulate().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unitary"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let csv = dir.path().join(name);
        let status = simulate()
            .arg("--config")
            .arg(&cfg)
            .arg("--out-csv")
            .arg(&csv)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

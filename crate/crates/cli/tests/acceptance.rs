//! Harness-level acceptance: determinism of the CSV outputs, exit-code
//! contract, and the run-directory layout.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_configforce"))
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn criterion_9_determinism_byte_identical_outputs() {
    let root = tempfile::tempdir().unwrap();
    let out_a = root.path().join("a");
    let out_b = root.path().join("b");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["run", "--seed", "42", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(
        read(&out_a, "diagnostics.csv"),
        read(&out_b, "diagnostics.csv"),
        "diagnostics CSV differs between identical runs"
    );
    // every produced file is byte-identical, snapshots included
    let mut names: Vec<String> = fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.len() > 3);
    for name in &names {
        assert_eq!(read(&out_a, name), read(&out_b, name), "{name} differs");
    }
    println!(
        "[PASS] criterion 9: determinism ({} files byte-identical)",
        names.len()
    );
}

#[test]
fn run_directory_layout() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("run");
    let status = bin().args(["run", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    for required in ["config.txt", "diagnostics.csv", "summary.txt", "state_00000.csv"] {
        assert!(out.join(required).exists(), "missing {required}");
    }
    let summary = String::from_utf8(read(&out, "summary.txt")).unwrap();
    assert!(summary.contains("result: pass"));
    let config = String::from_utf8(read(&out, "config.txt")).unwrap();
    assert!(config.contains("kappa = 0.05"));
    // snapshots cover the whole run: frame 0 plus t_end / (dt * stride)
    let snapshots = fs::read_dir(&out)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("state_")
        })
        .count();
    assert_eq!(snapshots, 51);
}

#[test]
fn exit_code_contract() {
    let root = tempfile::tempdir().unwrap();

    // malformed configuration: exit 2
    let bad = root.path().join("bad.cfg");
    fs::write(&bad, "no equals sign here\n").unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(&bad)
        .args(["--out"])
        .arg(root.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // invariant t_end > 0 violated: exit 2
    let zero_t = root.path().join("zero_t.cfg");
    fs::write(&zero_t, "t_end = 0.0\n").unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(&zero_t)
        .args(["--out"])
        .arg(root.path().join("y"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // unknown key: exit 2
    let unknown = root.path().join("unknown.cfg");
    fs::write(&unknown, "quantum_fluctuation = 1\n").unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(&unknown)
        .args(["--out"])
        .arg(root.path().join("z"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // missing file counts as bad configuration
    let status = bin()
        .args(["run", "--config", "/definitely/not/here.cfg"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn check_default_config_passes() {
    let root = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["check", "--out"])
        .arg(root.path().join("check"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let verdict =
        String::from_utf8(read(&root.path().join("check"), "check.txt")).unwrap();
    assert!(verdict.contains("result: pass"));
    assert!(verdict.contains("viscosity inequalities"));
}

#[test]
fn grid_override_flag_applies() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("coarse");
    let status = bin()
        .args(["run", "--grid", "51", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let snapshot = String::from_utf8(read(&out, "state_00000.csv")).unwrap();
    // header + comment + 51 node rows
    assert_eq!(snapshot.lines().count(), 53);
}

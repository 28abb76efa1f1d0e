//! Acceptance suite for the command-line surface: determinism of `sweep`
//! and exactness of the certificate export/verify round trip.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_genie-mac")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(criterion: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("{verdict}: {criterion} - {detail}");
    assert!(pass, "{criterion}: {detail}");
}

fn write_file(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

/// Criterion 9a: identical seeds produce byte-identical sweep output, and
/// every reported bound dominates the achievable rate.
#[test]
fn acceptance_9a_sweep_determinism() {
    let args = [
        "sweep", "--users", "3", "--count", "10", "--seed", "42", "--kind", "degraded",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(second.status.code(), Some(0));
    let identical = first.stdout == second.stdout;
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    let mut worst_gap = f64::NEG_INFINITY;
    let mut rows = 0;
    for line in text.lines().skip(2) {
        let gap: f64 = line.split(',').next_back().unwrap().parse().unwrap();
        assert!(gap >= -1e-9, "bound below achievable: {line}");
        worst_gap = worst_gap.max(gap);
        rows += 1;
    }
    assert_eq!(rows, 10);
    report(
        "criterion 9a (sweep determinism)",
        identical,
        format!("two runs byte-identical over {rows} rows; max optimizer gap {worst_gap:.3e} bits"),
    );
}

/// Criterion 9b: certificate export re-verifies against the source channel
/// and reproduces the bound value to 1e-12.
#[test]
fn acceptance_9b_certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    // Unsorted gains, signed b, non-unit P and N.
    let ch = write_file(
        dir.path(),
        "ch.json",
        r#"{ "a": [2.5, 0.5, 1.5], "b": [1.2, -0.7, 0.9], "P": 2.5, "N": 0.8 }"#,
    );
    let cert_path = dir.path().join("cert.json");
    let out = run(&[
        "certificate",
        ch.to_str().unwrap(),
        "--out",
        cert_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let exported: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    let exported_bound = exported["bound_bits"].as_f64().unwrap();

    let verify_out = run(&["verify", ch.to_str().unwrap(), cert_path.to_str().unwrap()]);
    assert_eq!(
        verify_out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&verify_out.stderr)
    );
    let text = String::from_utf8(verify_out.stdout).unwrap();
    assert!(text.contains("feasible: yes"));
    let line = text
        .lines()
        .find(|l| l.contains("MAC sum-capacity bound:"))
        .unwrap();
    let reverified: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    let residual = (reverified - exported_bound).abs();
    report(
        "criterion 9b (certificate round trip)",
        residual <= 1e-12,
        format!("|verify bound - exported bound| = {residual:.3e} bits"),
    );
}

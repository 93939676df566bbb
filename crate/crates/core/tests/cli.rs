//! Black-box tests of the command-line interface: exit codes, CSV shape,
//! and byte-level reproducibility across runs.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bdris-sim"))
}

fn shipped_config() -> String {
    format!("{}/configs/default_scenario.json", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn simulate_writes_deterministic_csv() {
    let dir = std::env::temp_dir().join("bdris-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out_a = dir.join("sweep_a.csv");
    let out_b = dir.join("sweep_b.csv");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args([
                "simulate",
                "--config",
                &shipped_config(),
                "--sweep",
                "pt",
                "--out",
                out.to_str().unwrap(),
                "--schemes",
                "bdris-iso-rxx,random-bdris,no-ris",
                "--trials",
                "3",
                "--seed",
                "42",
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read_to_string(&out_a).unwrap();
    let b = std::fs::read_to_string(&out_b).unwrap();
    assert_eq!(a, b, "same seed must reproduce the CSV byte for byte");

    assert!(!a.contains('\r'), "LF line endings only");
    let mut lines = a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,sweep_var,sweep_value,trial,seed,rate_bits"
    );
    // 4 power levels x 3 trials x 3 schemes
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 36);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[4], "42");
        let rate: f64 = fields[5].parse().unwrap();
        assert!(rate.is_finite() && rate >= 0.0);
        // 12 significant digits: d.11 digits e+-xx
        assert_eq!(fields[5].split('e').next().unwrap().len(), 13);
    }
}

#[test]
fn audit_quick_passes() {
    let output = bin().args(["audit", "--quick"]).output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("[PASS]"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = std::env::temp_dir().join("bdris-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"not\": \"a config\"}").unwrap();
    let status = bin()
        .args([
            "simulate",
            "--config",
            bad.to_str().unwrap(),
            "--sweep",
            "pt",
            "--out",
            dir.join("unused.csv").to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let status = bin()
        .args([
            "simulate",
            "--config",
            &shipped_config(),
            "--sweep",
            "pt",
            "--out",
            dir.join("unused.csv").to_str().unwrap(),
            "--schemes",
            "no-such-scheme",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

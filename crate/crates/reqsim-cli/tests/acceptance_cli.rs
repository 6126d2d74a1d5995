//! CLI acceptance: byte-identical CSV output across repeated runs and across
//! `--jobs` settings (criterion 9), plus the configuration contract.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reqsim"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("reqsim-test-{}-{name}", std::process::id()));
    p
}

fn run_ok(args: &[&str]) {
    let out = bin().args(args).output().expect("spawn reqsim");
    assert!(
        out.status.success(),
        "reqsim {args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn criterion_9_csv_determinism() {
    // Small but non-trivial configurations of all three CSV commands, run
    // twice each and across --jobs 1 / --jobs 4.
    let cases: Vec<(&str, Vec<String>)> = vec![
        (
            "fidelity-sweep",
            vec![
                "--variant".into(),
                "symmetrized_bb1".into(),
                "--g".into(),
                "100".into(),
                "--delta-min".into(),
                "-0.01".into(),
                "--delta-max".into(),
                "0.01".into(),
                "--delta-step".into(),
                "0.01".into(),
                "--omega-min".into(),
                "0.95".into(),
                "--omega-max".into(),
                "1.05".into(),
                "--omega-step".into(),
                "0.05".into(),
            ],
        ),
        (
            "cat-parity",
            vec![
                "--n".into(),
                "3".into(),
                "--phis".into(),
                "0:1.5:0.5".into(),
                "--omega-width".into(),
                "0.05".into(),
                "--g-min".into(),
                "50".into(),
                "--g-max".into(),
                "200".into(),
                "--instances".into(),
                "6".into(),
                "--seed".into(),
                "42".into(),
            ],
        ),
        (
            "yield",
            vec![
                "--ion-count".into(),
                "5000".into(),
                "--n-values".into(),
                "2,3".into(),
                "--n-seeds".into(),
                "4".into(),
                "--seed".into(),
                "7".into(),
                "--threshold".into(),
                "20000".into(),
            ],
        ),
    ];

    for (subcommand, args) in cases {
        let mut outputs = Vec::new();
        for (run, jobs) in [(0, "1"), (1, "4"), (2, "4")] {
            let path = tmp(&format!("{subcommand}-{run}.csv"));
            let path_str = path.to_str().unwrap().to_string();
            let mut full: Vec<String> = vec![subcommand.into(), "--jobs".into(), jobs.into()];
            full.extend(args.iter().cloned());
            full.extend(["--output".into(), path_str]);
            let refs: Vec<&str> = full.iter().map(|s| s.as_str()).collect();
            run_ok(&refs);
            outputs.push(std::fs::read(&path).expect("read output"));
            let _ = std::fs::remove_file(&path);
        }
        let pass = outputs[0] == outputs[1] && outputs[1] == outputs[2];
        println!(
            "{} criterion 9 ({subcommand}): {} bytes, identical across reruns and --jobs 1/4: {pass}",
            if pass { "[PASS]" } else { "[FAIL]" },
            outputs[0].len()
        );
        assert!(pass, "criterion 9: {subcommand} output not deterministic");
    }
}

#[test]
fn csv_format_contract() {
    let path = tmp("format.csv");
    run_ok(&[
        "fidelity-sweep",
        "--variant",
        "simple",
        "--delta-min",
        "0",
        "--delta-max",
        "0",
        "--delta-step",
        "0.01",
        "--omega-min",
        "1",
        "--omega-max",
        "1",
        "--omega-step",
        "0.01",
        "--output",
        path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&path).unwrap();
    let _ = std::fs::remove_file(&path);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta,omega,fidelity"));
    let row = lines.next().unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells.len(), 3);
    // Scientific notation, 12 significant digits: d.ddddddddddde[-]e
    for cell in cells {
        let (mantissa, _exp) = cell.split_once('e').expect("scientific notation");
        let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
        assert_eq!(
            digits.len(),
            12,
            "cell {cell} should carry 12 significant digits"
        );
    }
    assert!(text.ends_with('\n'));
    assert!(!text.contains('\r'));
}

#[test]
fn help_exits_zero_and_documents_defaults() {
    for sub in [
        "fidelity-sweep",
        "gate-check",
        "cat-parity",
        "yield",
        "selftest",
    ] {
        let out = bin().args([sub, "--help"]).output().unwrap();
        assert!(out.status.success(), "{sub} --help failed");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(
            text.contains("default"),
            "{sub} --help should document defaults"
        );
    }
}

#[test]
fn bad_variant_is_rejected_by_name() {
    let out = bin()
        .args([
            "fidelity-sweep",
            "--variant",
            "bogus",
            "--output",
            "/dev/null",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("variant"), "stderr: {err}");
}

#[test]
fn missing_output_is_rejected_by_name() {
    let out = bin().args(["fidelity-sweep"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("output"), "stderr: {err}");
}

#[test]
fn unknown_flag_and_unknown_config_key_are_rejected() {
    let out = bin()
        .args(["fidelity-sweep", "--bogus-flag", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let cfg = tmp("bad.cfg");
    std::fs::write(&cfg, "nonsense_key = 1\n").unwrap();
    let out = bin()
        .args([
            "fidelity-sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--output",
            "/dev/null",
        ])
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&cfg);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nonsense_key"), "stderr: {err}");
}

#[test]
fn config_file_equals_flags_and_flags_take_precedence() {
    // Same tiny sweep expressed via file and via flags.
    let cfg = tmp("sweep.cfg");
    std::fs::write(
        &cfg,
        "variant = simple\ncoupling = 100\ndelta_min = 0\ndelta_max = 0\n\
         delta_step = 0.01\nomega_min = 1\nomega_max = 1.01\nomega_step = 0.005\n",
    )
    .unwrap();
    let out_file = tmp("from-file.csv");
    run_ok(&[
        "fidelity-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out_file.to_str().unwrap(),
    ]);
    let out_flags = tmp("from-flags.csv");
    run_ok(&[
        "fidelity-sweep",
        "--variant",
        "simple",
        "--g",
        "100",
        "--delta-min",
        "0",
        "--delta-max",
        "0",
        "--delta-step",
        "0.01",
        "--omega-min",
        "1",
        "--omega-max",
        "1.01",
        "--omega-step",
        "0.005",
        "--output",
        out_flags.to_str().unwrap(),
    ]);
    let a = std::fs::read(&out_file).unwrap();
    let b = std::fs::read(&out_flags).unwrap();
    assert_eq!(a, b, "config file and flags must produce identical output");

    // A flag overrides the file: coupling 50 makes the blockade worse, so
    // the fidelity at omega = 1.01 must change.
    let out_override = tmp("override.csv");
    run_ok(&[
        "fidelity-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--g",
        "50",
        "--output",
        out_override.to_str().unwrap(),
    ]);
    let c = std::fs::read(&out_override).unwrap();
    assert_ne!(a, c, "flag must override the config file");

    for p in [&cfg, &out_file, &out_flags, &out_override] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn render_parse_round_trip_is_identity() {
    use reqsim_cli::config::{CatParityConfig, ConfigFile, SweepConfig, YieldConfig};

    let sweep = SweepConfig {
        variant: reqsim::experiments::CpsVariant::Symmetrized,
        coupling: 137.5,
        delta_min: -0.031,
        delta_max: 0.029,
        delta_step: 0.0025,
        omega_min: 0.9,
        omega_max: 1.1,
        omega_step: 0.005,
        output: "sweep.csv".into(),
    };
    let parsed = ConfigFile::parse(&sweep.render()).unwrap();
    parsed.check_keys(SweepConfig::FILE_KEYS).unwrap();
    let rebuilt = SweepConfig {
        variant: reqsim::experiments::CpsVariant::parse(parsed.get("variant").unwrap()).unwrap(),
        coupling: parsed.parse_value("coupling").unwrap().unwrap(),
        delta_min: parsed.parse_value("delta_min").unwrap().unwrap(),
        delta_max: parsed.parse_value("delta_max").unwrap().unwrap(),
        delta_step: parsed.parse_value("delta_step").unwrap().unwrap(),
        omega_min: parsed.parse_value("omega_min").unwrap().unwrap(),
        omega_max: parsed.parse_value("omega_max").unwrap().unwrap(),
        omega_step: parsed.parse_value("omega_step").unwrap().unwrap(),
        output: parsed.get("output").unwrap().into(),
    };
    assert_eq!(sweep, rebuilt);
    assert_eq!(sweep.render(), rebuilt.render());

    let cat = CatParityConfig {
        n: 5,
        phis: vec![0.0, 0.1, 0.30000000000000004],
        delta_width: 0.01,
        omega_width: 0.02,
        g_min: 80.0,
        g_max: 120.0,
        instances: 12,
        seed: 99,
        output: "cat.csv".into(),
    };
    let parsed = ConfigFile::parse(&cat.render()).unwrap();
    parsed.check_keys(CatParityConfig::FILE_KEYS).unwrap();
    let phis = reqsim_cli::config::parse_f64_list("phis", parsed.get("phis").unwrap()).unwrap();
    assert_eq!(cat.phis, phis, "phi list must survive render/parse exactly");

    let yld = YieldConfig {
        ion_count: 12345,
        box_side: 2.5,
        dipole_constant: 0.75,
        channel_probability: 0.04,
        threshold: 31415.9,
        angular_factor: true,
        n_values: vec![2, 3, 5],
        n_seeds: 7,
        seed: 3,
        output: "yield.csv".into(),
    };
    let parsed = ConfigFile::parse(&yld.render()).unwrap();
    parsed.check_keys(YieldConfig::FILE_KEYS).unwrap();
    assert_eq!(
        reqsim_cli::config::parse_usize_list("n_values", parsed.get("n_values").unwrap()).unwrap(),
        yld.n_values
    );
    assert_eq!(
        parsed.parse_value::<f64>("threshold").unwrap().unwrap(),
        yld.threshold
    );
    assert_eq!(
        parsed.parse_value::<bool>("angular_factor").unwrap(),
        Some(true)
    );
}

#[test]
fn env_seed_is_used_as_default() {
    let out_a = tmp("env-a.csv");
    let out_b = tmp("env-b.csv");
    let out_c = tmp("env-c.csv");
    let args = |path: &str| {
        vec![
            "cat-parity".to_string(),
            "--n".into(),
            "2".into(),
            "--phis".into(),
            "0:0.5:0.5".into(),
            "--omega-width".into(),
            "0.1".into(),
            "--instances".into(),
            "3".into(),
            "--output".into(),
            path.to_string(),
        ]
    };
    // Same env seed twice, then a different one.
    for (path, seed) in [(&out_a, "11"), (&out_b, "11"), (&out_c, "12")] {
        let full = args(path.to_str().unwrap());
        let refs: Vec<&str> = full.iter().map(|s| s.as_str()).collect();
        let out = bin()
            .env("REQCSIM_SEED", seed)
            .args(&refs)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    let c = std::fs::read(&out_c).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    for p in [&out_a, &out_b, &out_c] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn gate_check_and_selftest_exit_zero() {
    run_ok(&["gate-check"]);
    run_ok(&["selftest", "--seed", "5"]);
}

#[test]
fn invalid_physics_exits_three() {
    // Zero lower coupling bound is rejected by the ensemble model.
    let out = bin()
        .args([
            "cat-parity",
            "--g-min",
            "0",
            "--phis",
            "0:0.2:0.2",
            "--output",
            "/dev/null",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn unwritable_output_exits_two() {
    let out = bin()
        .args([
            "fidelity-sweep",
            "--variant",
            "simple",
            "--delta-min",
            "0",
            "--delta-max",
            "0",
            "--delta-step",
            "0.01",
            "--omega-min",
            "1",
            "--omega-max",
            "1",
            "--omega-step",
            "0.01",
            "--output",
            "/nonexistent-dir/out.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

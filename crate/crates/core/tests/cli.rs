//! End-to-end tests of the command-line surface: round trips, exit codes,
//! and byte-stable CSV output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_collvar"))
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("collvar-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn extract_field(report: &str, prefix: &str) -> f64 {
    report
        .lines()
        .find_map(|line| line.strip_prefix(prefix))
        .unwrap_or_else(|| panic!("missing field '{prefix}' in:\n{report}"))
        .trim()
        .parse()
        .unwrap_or_else(|_| panic!("field '{prefix}' is not a number in:\n{report}"))
}

#[test]
fn sample_then_describe_round_trips_the_quantifier() {
    let dir = tempdir("roundtrip");
    let state = dir.join("ghz3.json");
    let status = bin()
        .args(["sample", "--kind", "ghz", "--n", "3", "--d", "2"])
        .arg("--out")
        .arg(&state)
        .status()
        .unwrap();
    assert!(status.success());

    let output = bin().arg("describe").arg(&state).output().unwrap();
    assert!(output.status.success());
    let report = stdout_of(&output);
    let f = extract_field(&report, "f_pure:");
    assert!((f - 9.0).abs() < 1e-10, "round-trip f drifted: {f}");
    assert!(report.contains("entanglement witnessed (F > n)"));
    assert!(report.contains("support size: 2"));
    assert!(report.contains("thickness zeta_hat: 0"));
}

#[test]
fn gaussian_round_trip_preserves_f_to_high_precision() {
    let dir = tempdir("gauss");
    let state = dir.join("g.json");
    let status = bin()
        .args([
            "sample",
            "--kind",
            "gaussian",
            "--points",
            "32",
            "--sum-width",
            "3",
            "--diff-width",
            "1.5",
        ])
        .arg("--out")
        .arg(&state)
        .status()
        .unwrap();
    assert!(status.success());

    // library-side value of the same constructor
    let obs = collvar::spectral::LocalObservable::evenly_spaced(32, 1.0).unwrap();
    let reference = collvar::quantifiers::f_pure(
        &collvar::states::gaussian_grid_state(&obs, 3.0, 1.5).unwrap(),
        &collvar::observables::SignVector::uniform(2),
    );

    let output = bin().arg("describe").arg(&state).output().unwrap();
    let f = extract_field(&stdout_of(&output), "f_pure:");
    assert!(
        (f - reference).abs() < 1e-10,
        "file round trip lost precision: {f} vs {reference}"
    );
}

#[test]
fn certify_reports_depth_and_honors_zeta_refusal() {
    let dir = tempdir("certify");
    let state = dir.join("ghz4.json");
    bin()
        .args(["sample", "--kind", "ghz", "--n", "4", "--d", "2"])
        .arg("--out")
        .arg(&state)
        .status()
        .unwrap();

    let output = bin().arg("certify").arg(&state).output().unwrap();
    assert!(output.status.success());
    let report = stdout_of(&output);
    assert!(
        report.contains("entanglement depth >= 4"),
        "wrong verdict:\n{report}"
    );

    // the state has zeta_hat = 0, so a 0.5 hypothesis must be refused
    let refused = bin()
        .arg("certify")
        .arg(&state)
        .args(["--zeta", "0.5"])
        .output()
        .unwrap();
    assert_eq!(refused.status.code(), Some(3), "refusal must exit 3");
    assert!(String::from_utf8_lossy(&refused.stderr).contains("refusing"));
}

#[test]
fn haar_product_state_does_not_witness() {
    let dir = tempdir("product");
    let state = dir.join("p4.json");
    bin()
        .args(["--seed", "11", "sample", "--kind", "product", "--n", "4", "--d", "2"])
        .arg("--out")
        .arg(&state)
        .status()
        .unwrap();
    let output = bin().arg("describe").arg(&state).output().unwrap();
    let report = stdout_of(&output);
    assert!(report.contains("no entanglement witnessed (F <= n)"));

    let certify = bin().arg("certify").arg(&state).output().unwrap();
    assert!(stdout_of(&certify).contains("entanglement depth >= 1"));
}

#[test]
fn density_describe_shows_certified_bracket() {
    let dir = tempdir("density");
    let state = dir.join("dep.json");
    bin()
        .args(["sample", "--kind", "depolarized", "--n", "2", "--eps", "0.5"])
        .arg("--out")
        .arg(&state)
        .status()
        .unwrap();
    let output = bin().arg("describe").arg(&state).output().unwrap();
    let report = stdout_of(&output);
    let fr = extract_field(
        &report
            .replace(" (certified exact)", ""),
        "f_qfi_ratio:",
    );
    assert!((fr - 4.0 / 3.0).abs() < 1e-9, "Fisher ratio off: {fr}");
    assert!(report.contains("support size (rank): 4"));
}

#[test]
fn sweep_outputs_are_byte_identical_and_correct() {
    let dir = tempdir("sweep");
    let out1 = dir.join("a.csv");
    let out2 = dir.join("b.csv");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["sweep", "--mode", "k_of_zeta", "--n", "10"])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b, "CSV output must be byte-identical across runs");

    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains('\r'), "LF line endings required");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12, "header plus 11 grid rows");
    assert_eq!(lines[0], "zeta,k,feasible");
    assert!(lines[1].starts_with("0.0000000000000000e0,1.0000000000000000e1,true"));
    assert!(lines[11].ends_with(",1.0000000000000000e0,true"));
}

#[test]
fn sweep_level_set_flags_infeasible_rows() {
    let dir = tempdir("levelset");
    let out = dir.join("zf.csv");
    let status = bin()
        .args(["sweep", "--mode", "zeta_for_f", "--n", "10", "--f", "15"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,zeta,feasible");
    // k = 1 divides by zero: infeasible, empty cell
    assert!(lines[1].ends_with(",,false"), "k=1 row must be flagged: {}", lines[1]);
    // k = 2 gives 1/3
    assert!(lines[2].contains("3.3333333333333331e-1"));
    assert!(lines[2].ends_with("true"));
}

#[test]
fn bound_table_matches_library() {
    let dir = tempdir("boundtable");
    let out = dir.join("bt.csv");
    bin()
        .args(["sweep", "--mode", "bound_table", "--n", "6"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,floor_bound,linear_bound"));
    for (k, line) in (1..=6usize).zip(lines) {
        let (floor, linear) = collvar::witnesses::bound_k(6, k).unwrap();
        assert_eq!(line, format!("{k},{},{}", floor as u64, linear as u64));
    }
}

#[test]
fn reproduce_targets_all_pass() {
    for target in ["ghz_saturation", "popoviciu", "tradeoff"] {
        let output = bin()
            .args(["reproduce", "--target", target])
            .output()
            .unwrap();
        assert!(output.status.success());
        let report = stdout_of(&output);
        let summary = report
            .lines()
            .last()
            .unwrap_or_else(|| panic!("no summary for {target}"));
        assert!(
            summary.contains("rows pass") && !report.contains(" FAIL"),
            "target {target} has failures:\n{report}"
        );
    }
    // the noisy-family target is heavier; trim the optimizer restarts
    let output = bin()
        .args(["--restarts", "8", "reproduce", "--target", "appendixD"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let report = stdout_of(&output);
    assert!(
        report.contains("92/92 rows pass"),
        "noisy-family reproduction incomplete:\n{report}"
    );
}

#[test]
fn ksep_sample_writes_partition_sidecar() {
    let dir = tempdir("ksep");
    let state = dir.join("ks.json");
    bin()
        .args(["--seed", "1", "sample", "--kind", "ksep", "--n", "6", "--k", "2"])
        .arg("--out")
        .arg(&state)
        .status()
        .unwrap();
    let sidecar = state.with_extension("partition.json");
    let text = std::fs::read_to_string(&sidecar).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["k"], 2);
    let parts: Vec<u64> = value["parts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(parts.iter().sum::<u64>(), 6);
    assert!(parts.iter().all(|&p| p >= 1 && p <= 2));
}

#[test]
fn exit_codes_follow_the_contract() {
    // usage error: 1
    let out = bin().args(["sweep", "--mode", "nope", "--n", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // invariant violation: 2
    let dir = tempdir("exitcodes");
    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"version": 1, "n": 1, "spectrum": [-1, 1], "kind": "pure",
           "data": [[1.0, 0.0], [1.0, 0.0]]}"#,
    )
    .unwrap();
    let out = bin().arg("describe").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // parse error: 2
    let garbled = dir.join("garbled.json");
    std::fs::write(&garbled, "{").unwrap();
    let out = bin().arg("describe").arg(&garbled).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // help: 0
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn environment_variables_mirror_flags_with_lower_precedence() {
    let dir = tempdir("envvars");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    let c = dir.join("c.json");
    // env seed applies
    bin()
        .env("COLLVAR_SEED", "7")
        .args(["sample", "--kind", "haar", "--n", "2", "--d", "2"])
        .arg("--out")
        .arg(&a)
        .status()
        .unwrap();
    // explicit flag wins over env
    bin()
        .env("COLLVAR_SEED", "99")
        .args(["--seed", "7", "sample", "--kind", "haar", "--n", "2", "--d", "2"])
        .arg("--out")
        .arg(&b)
        .status()
        .unwrap();
    // different env seed produces a different state
    bin()
        .env("COLLVAR_SEED", "8")
        .args(["sample", "--kind", "haar", "--n", "2", "--d", "2"])
        .arg("--out")
        .arg(&c)
        .status()
        .unwrap();
    let a = std::fs::read(&a).unwrap();
    let b = std::fs::read(&b).unwrap();
    let c = std::fs::read(&c).unwrap();
    assert_eq!(a, b, "flag must override env while matching its value");
    assert_ne!(a, c, "different seeds must change the sample");
}

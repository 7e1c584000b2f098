//! End-to-end tests that exercise the compiled `crjet` binary: exit codes,
//! stdout/stderr contracts, and byte-exact document round-trips over the
//! bundled fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crjet_core::{
    jet_pullback, series_from_expression, AlgebraicModel, CrSignature, JetDocument, MapJet,
    SeriesVector, VariableSpace,
};

fn crjet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crjet"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_kind(out: &Output) -> String {
    let err: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr carries one JSON error object");
    err["error"]["kind"].as_str().expect("kind is a string").to_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).expect("fixture exists")
}

fn fixture_arg(name: &str) -> String {
    fixture(name).to_str().expect("fixture path is UTF-8").to_owned()
}

/// Builds the bundled documents from scratch. Run with REGEN_FIXTURES=1 to
/// rewrite them; otherwise asserts the committed files match the builder.
fn built_fixtures() -> Vec<(&'static str, String)> {
    let sig = CrSignature::new(1, 1, 1, 2, 4).unwrap();
    let source = VariableSpace::holomorphic_jet(1, 1);
    let doubled = VariableSpace::doubled(1, 1);
    let f = SeriesVector::new(vec![series_from_expression("z1", &source, 4).unwrap()]).unwrap();
    let g = SeriesVector::new(vec![series_from_expression("w1", &source, 4).unwrap()]).unwrap();
    let identity = MapJet::new(sig, f, g).unwrap();

    let mut docs = Vec::new();
    for (name, rho_text) in [("heisenberg.json", "-(z1*~z1)"), ("flat.json", "0")] {
        let rho =
            SeriesVector::new(vec![series_from_expression(rho_text, &doubled, 2).unwrap()])
                .unwrap();
        let model = AlgebraicModel::new(sig, rho).unwrap();
        let result = jet_pullback(&identity, &model).unwrap();
        let doc = JetDocument::from_values(&identity, &model, Some(&result.germ)).unwrap();
        docs.push((name, doc.to_json_string()));
    }

    // Same map and model as heisenberg.json, but the germ coefficient of
    // x1^2 is bumped to 2, so `check` must refuse it.
    let mut tampered = JetDocument::from_json(&docs[0].1).unwrap();
    let germ = tampered.germ.as_mut().unwrap();
    germ.components[0][0].coeff.num_re = serde_json::Number::from(2u32);
    docs.push(("tampered.json", tampered.to_json_string()));
    docs
}

#[test]
fn fixtures_match_their_builder() {
    for (name, text) in built_fixtures() {
        if std::env::var("REGEN_FIXTURES").is_ok() {
            std::fs::write(fixture(name), &text).unwrap();
        }
        assert_eq!(fixture_text(name), text, "{name} drifted from its builder");
    }
}

#[test]
fn fixtures_round_trip_byte_identically() {
    for name in ["heisenberg.json", "flat.json", "tampered.json"] {
        let text = fixture_text(name);
        let doc = JetDocument::from_json(&text).unwrap();
        assert_eq!(doc.to_json_string(), text, "{name} is not canonical");
    }
}

#[test]
fn pullback_prints_the_heisenberg_germ() {
    let out = crjet(&["pullback", "--in", &fixture_arg("heisenberg.json")]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_of(&out), "x1^2 + y1^2\n");
}

#[test]
fn inline_expressions_reproduce_the_document_route() {
    let doc_route = crjet(&["pullback", "--in", &fixture_arg("heisenberg.json")]);
    let inline = crjet(&[
        "pullback", "--m", "1", "--d", "1", "--mprime", "1", "--nu", "2", "--k", "4", "--f",
        "z1", "--g", "w1", "--model", "-(z1*~z1)",
    ]);
    assert_eq!(exit_code(&inline), 0);
    assert_eq!(stdout_of(&inline), stdout_of(&doc_route));
}

#[test]
fn pullback_out_rebuilds_the_fixture_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = crjet(&[
        "pullback", "--m", "1", "--d", "1", "--mprime", "1", "--nu", "2", "--k", "4", "--f",
        "z1", "--g", "w1", "--model", "-(z1*~z1)", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, fixture_text("heisenberg.json"));
}

#[test]
fn check_verifies_fixtures_and_flags_tampering() {
    for name in ["heisenberg.json", "flat.json"] {
        let out = crjet(&["check", "--in", &fixture_arg(name)]);
        assert_eq!(exit_code(&out), 0, "{name} should verify");
        assert_eq!(stdout_of(&out), "germ verified\n");
    }
    let out = crjet(&["check", "--in", &fixture_arg("tampered.json")]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stderr_kind(&out), "mismatch");
}

#[test]
fn dims_table_carries_the_crossover_numbers() {
    let out = crjet(&[
        "dims", "--m", "1", "--d", "1", "--mprime", "1", "--nu", "2", "--k", "10",
    ]);
    assert_eq!(exit_code(&out), 0);
    let table = stdout_of(&out);
    for needle in ["282", "256", "266", "yes"] {
        assert!(table.contains(needle), "table misses {needle}:\n{table}");
    }

    let out = crjet(&[
        "dims", "--m", "1", "--d", "1", "--mprime", "1", "--nu", "2", "--k", "10", "--json",
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["dim_target"], 282);
    assert_eq!(report["dim_source_maps"], 256);
    assert_eq!(report["dim_source_models"], 10);
    assert_eq!(report["source_total"], 266);
    assert_eq!(report["crossover"], true);
}

#[test]
fn crossover_scan_finds_order_ten() {
    let out = crjet(&[
        "crossover", "--m", "1", "--d", "1", "--mprime", "1", "--nu", "2", "--kmax", "20",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout_of(&out).starts_with("crossover order: 10\n"));

    let out = crjet(&[
        "crossover", "--m", "1", "--d", "1", "--mprime", "1", "--nu", "2", "--kmax", "5",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_of(&out), "no crossover up to k = 5\n");
}

#[test]
fn keyobs_runs_a_config_and_reports_zero_failures() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(
        &path,
        r#"{"signature": {"m": 1, "d": 1, "m_prime": 1, "nu": 2, "k": 3},
            "seed": 7, "trials": 4, "coefficient_bound": 3}"#,
    )
    .unwrap();
    let out = crjet(&["keyobs", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["trials"], 4);
    assert_eq!(report["failures"], 0);
    assert_eq!(report["max_delta"], "0");
}

#[test]
fn rank_reports_the_jacobian_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(
        &path,
        r#"{"signature": {"m": 1, "d": 1, "m_prime": 1, "nu": 2, "k": 2},
            "seed": 11, "trials": 1, "coefficient_bound": 2}"#,
    )
    .unwrap();
    let out = crjet(&["rank", "--config", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let reports: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["jacobian_rows"], 6);
    assert_eq!(reports[0]["jacobian_cols"], 26);
    assert_eq!(reports[0]["numerical_rank"], 6);
    assert_eq!(reports[0]["rank_deficient"], false);
}

#[test]
fn norm_evaluates_embedded_and_recomputed_germs() {
    let heis = fixture_arg("heisenberg.json");
    let out = crjet(&["norm", "--in", &heis, "--t", "1"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_of(&out), "2\n");
    let out = crjet(&["norm", "--in", &heis, "--t", "1/2"]);
    assert_eq!(stdout_of(&out), "1/2\n");

    // Strip the germ: norm must recompute it through the pullback.
    let mut doc = JetDocument::from_json(&fixture_text("heisenberg.json")).unwrap();
    doc.germ = None;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bare.json");
    std::fs::write(&path, doc.to_json_string()).unwrap();
    let out = crjet(&["norm", "--in", path.to_str().unwrap(), "--t", "1"]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_of(&out), "2\n");
}

#[test]
fn error_exits_follow_the_contract() {
    // Missing file: I/O.
    let out = crjet(&["check", "--in", "/nonexistent/jet.json"]);
    assert_eq!(exit_code(&out), 4);
    assert_eq!(stderr_kind(&out), "io");

    // Unparseable document: validation.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage.json");
    std::fs::write(&path, "not json").unwrap();
    let out = crjet(&["check", "--in", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stderr_kind(&out), "validation");

    // Document without a germ cannot be checked.
    let mut doc = JetDocument::from_json(&fixture_text("flat.json")).unwrap();
    doc.germ = None;
    let bare = dir.path().join("bare.json");
    std::fs::write(&bare, doc.to_json_string()).unwrap();
    let out = crjet(&["check", "--in", bare.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stderr_kind(&out), "validation");

    // Mixing --in with inline flags is ambiguous.
    let out = crjet(&[
        "pullback", "--in", &fixture_arg("flat.json"), "--m", "1", "--d", "1", "--mprime",
        "1", "--nu", "2", "--k", "4",
    ]);
    assert_eq!(exit_code(&out), 2);

    // Bad expression text points at the offending byte.
    let out = crjet(&[
        "pullback", "--m", "1", "--d", "1", "--mprime", "1", "--nu", "2", "--k", "4", "--f",
        "z1 +", "--g", "w1", "--model", "0",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stderr_kind(&out), "validation");

    // Non-positive weight.
    let out = crjet(&["norm", "--in", &fixture_arg("heisenberg.json"), "--t", "0"]);
    assert_eq!(exit_code(&out), 2);
    let out = crjet(&["norm", "--in", &fixture_arg("heisenberg.json"), "--t", "-1/3"]);
    assert_eq!(exit_code(&out), 2);

    // Clap usage errors share the validation exit.
    let out = crjet(&["bogus-subcommand"]);
    assert_eq!(exit_code(&out), 2);
    let out = crjet(&["dims", "--m", "1"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn help_and_version_exit_cleanly() {
    let out = crjet(&["--help"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout_of(&out).contains("pullback"));
    let out = crjet(&["--version"]);
    assert_eq!(exit_code(&out), 0);
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ebcert_cli::files::parse_json;
use ebcert_cli::{KrausFile, MatrixFile, ReportFile};
use ebcert_core::certify::predicate_value;
use ebcert_core::VerdictValue::{No, Unknown, Yes};

fn ebcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ebcert"))
        .args(args)
        .env_remove("EBCERT_PSD_TOL")
        .env_remove("EBCERT_RANK_TOL")
        .env_remove("EBCERT_EQUALITY_TOL")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = ebcert(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_report(p: &Path) -> ReportFile {
    parse_json(&std::fs::read(p).unwrap(), "report").unwrap()
}

#[test]
fn identity_choi_report() {
    let dir = tempfile::tempdir().unwrap();
    let (m, r) = (path(dir.path(), "id.json"), path(dir.path(), "id.report.json"));
    ok(&["generate", "--kind", "identity", "--dims", "2", "--output", s(&m)]);
    let file: MatrixFile = parse_json(&std::fs::read(&m).unwrap(), "matrix").unwrap();
    assert_eq!((file.rows, file.cols), (4, 4));
    // Σ|ii⟩⟨jj|: ones at (0,0), (0,3), (3,0), (3,3).
    for (row, values) in file.re.iter().enumerate() {
        for (col, &v) in values.iter().enumerate() {
            let expected = if (row == 0 || row == 3) && (col == 0 || col == 3) { 1.0 } else { 0.0 };
            assert_eq!(v, expected);
        }
    }
    ok(&["analyze", s(&m), "--output", s(&r)]);
    let report = read_report(&r).report.unwrap();
    assert_eq!(predicate_value(&report, "map.psd"), Some(Yes));
    assert_eq!(predicate_value(&report, "map.ppt"), Some(No));
    assert_eq!(predicate_value(&report, "map.trace_preserving"), Some(Yes));
}

#[test]
fn tiles_state_report() {
    let dir = tempfile::tempdir().unwrap();
    let (m, r) = (path(dir.path(), "tiles.json"), path(dir.path(), "tiles.report.json"));
    ok(&["generate", "--kind", "tiles", "--output", s(&m)]);
    ok(&["analyze", s(&m), "--output", s(&r)]);
    let file = read_report(&r);
    let report = file.report.unwrap();
    assert_eq!(predicate_value(&report, "state.ppt"), Some(Yes));
    assert_eq!(predicate_value(&report, "state.low_rank_separability"), Some(Unknown));
    assert_eq!(report.analyses["state"].rank.rank, 4);
    assert_eq!(file.input_digest.len(), 64);
}

#[test]
fn dephasing_dilation_is_certified_on_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let (m, r) = (path(dir.path(), "deph.json"), path(dir.path(), "deph.report.json"));
    ok(&["generate", "--kind", "dephasing", "--dims", "3", "--dilate", "--output", s(&m)]);
    ok(&["analyze", s(&m), "--output", s(&r)]);
    let report = read_report(&r).report.unwrap();
    assert_eq!(predicate_value(&report, "phi.entanglement_breaking"), Some(Yes));
    assert_eq!(predicate_value(&report, "psi.entanglement_breaking"), Some(Yes));
    assert!(report.recheck().is_ok());
}

#[test]
fn schur_pair_is_degradable() {
    let dir = tempfile::tempdir().unwrap();
    let (m, r) = (path(dir.path(), "schur.json"), path(dir.path(), "schur.report.json"));
    ok(&["generate", "--kind", "schur", "--params", "1,0.5", "--output", s(&m)]);
    ok(&["analyze", s(&m), "--output", s(&r)]);
    let file = read_report(&r);
    let degr = file.degradability.unwrap();
    assert_eq!(predicate_value(&degr, "pair.degradable"), Some(Yes));
    assert_eq!(predicate_value(&degr, "psi.ppt"), Some(Yes));
    assert!(degr.recheck().is_ok());
}

#[test]
fn verify_theorem_and_replay_agree() {
    let dir = tempfile::tempdir().unwrap();
    let r = path(dir.path(), "verify.json");
    ok(&["verify-theorem", "--trials", "20", "--dims", "2,2,2", "--seed", "5", "--per-sample", "--output", s(&r)]);
    let agg = read_report(&r).aggregate.unwrap();
    assert_eq!(agg.trials, 20);
    assert_eq!(agg.counterexamples, 0);
    let samples = agg.samples.unwrap();
    let third = &samples[3];

    let replay = path(dir.path(), "replay.json");
    let seed = third.seed.to_string();
    ok(&["verify-theorem", "--dims", "2,2,2", "--replay", &seed, "--per-sample", "--output", s(&replay)]);
    let replayed = read_report(&replay).aggregate.unwrap().samples.unwrap();
    let mut expected = third.clone();
    expected.index = 0;
    assert_eq!(replayed, vec![expected]);
}

#[test]
fn trivial_environment_gives_eb_complements() {
    let dir = tempfile::tempdir().unwrap();
    let r = path(dir.path(), "verify.json");
    ok(&["verify-theorem", "--trials", "10", "--dims", "2,2,1", "--per-sample", "--output", s(&r)]);
    let samples = read_report(&r).aggregate.unwrap().samples.unwrap();
    assert!(samples.iter().all(|x| x.psi_eb == Some(Yes)));
}

#[test]
fn conversion_round_trip_reproduces_choi() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| path(dir.path(), n);
    ok(&["generate", "--kind", "random-stinespring", "--dims", "2,3,2", "--seed", "9", "--output", s(&d("l.json"))]);
    ok(&["convert", "--from", "stinespring", "--to", "choi", s(&d("l.json")), "--output", s(&d("c.json"))]);
    ok(&["convert", "--from", "choi", "--to", "kraus", s(&d("c.json")), "--output", s(&d("k.json"))]);
    ok(&["convert", "--from", "kraus", "--to", "stinespring", s(&d("k.json")), "--output", s(&d("l2.json"))]);
    ok(&["convert", "--from", "stinespring", "--to", "choi", s(&d("l2.json")), "--output", s(&d("c2.json"))]);
    let load = |p: &Path| parse_json::<MatrixFile>(&std::fs::read(p).unwrap(), "m").unwrap().to_choi().unwrap();
    let (a, b) = (load(&d("c.json")), load(&d("c2.json")));
    assert!(a.matrix().distance(b.matrix()) <= 1e-8 * a.matrix().frobenius_norm());
    let kraus: KrausFile = parse_json(&std::fs::read(d("k.json")).unwrap(), "k").unwrap();
    assert_eq!(kraus.dims, [2, 3]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, "{ \"rows\": ").unwrap();
    assert_eq!(ebcert(&["analyze", s(&bad)]).status.code(), Some(2));
    assert_eq!(ebcert(&["analyze", s(&path(dir.path(), "missing.json"))]).status.code(), Some(2));
    assert_eq!(ebcert(&["verify-theorem", "--tol", "psd"]).status.code(), Some(2));
    assert_eq!(ebcert(&["generate", "--kind", "nonsense"]).status.code(), Some(2));

    let t = path(dir.path(), "transpose.json");
    ok(&["generate", "--kind", "transpose", "--dims", "2", "--output", s(&t)]);
    let out = ebcert(&["convert", "--from", "choi", "--to", "kraus", s(&t)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not positive semidefinite"));
    assert_eq!(ebcert(&["verify-theorem", "--trials", "0"]).status.code(), Some(3));
    assert_eq!(ebcert(&["generate", "--kind", "identity", "--dims", "1"]).status.code(), Some(3));
}

#[test]
fn reports_are_reproducible_and_record_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let m = path(dir.path(), "l.json");
    ok(&["generate", "--kind", "random-stinespring", "--dims", "2,2,3", "--seed", "1", "--output", s(&m)]);
    let (r1, r2) = (path(dir.path(), "r1.json"), path(dir.path(), "r2.json"));
    ok(&["analyze", s(&m), "--output", s(&r1)]);
    ok(&["analyze", s(&m), "--output", s(&r2)]);
    assert_eq!(read_report(&r1).canonical_bytes(), read_report(&r2).canonical_bytes());

    let r3 = path(dir.path(), "r3.json");
    let out = Command::new(env!("CARGO_BIN_EXE_ebcert"))
        .args(["analyze", s(&m), "--tol", "rank=1e-7", "--output", s(&r3)])
        .env("EBCERT_PSD_TOL", "1e-8")
        .output()
        .unwrap();
    assert!(out.status.success());
    let tol = read_report(&r3).tolerances;
    assert_eq!((tol.psd_tol, tol.rank_tol, tol.equality_tol), (1e-8, 1e-7, 1e-9));
}

#[test]
fn stdout_is_the_default_output() {
    let out = ebcert(&["generate", "--kind", "depolarizing", "--dims", "2"]);
    assert!(out.status.success());
    let file: MatrixFile = parse_json(&out.stdout, "stdout").unwrap();
    let choi = file.to_choi().unwrap();
    assert_eq!(choi.matrix(), &ebcert_core::ComplexMatrix::identity(4).scale_real(0.5));
}

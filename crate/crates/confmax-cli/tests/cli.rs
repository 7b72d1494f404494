//! End-to-end tests of the `confmax` binary: exit codes, file outputs,
//! verification verdicts, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use confmax::confmat::paley_conference;
use confmax::gf::build_tower;
use confmax::report::{matrix_from_text, matrix_to_text, ConstructionReport};

fn confmax(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confmax"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn construct_q5_and_round_trip_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = confmax(&["construct", "--q", "5", "--out", "run"], dir.path());
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("excess 12 = bound 12"));

    let report_text = std::fs::read_to_string(dir.path().join("run.report.txt")).unwrap();
    let report = ConstructionReport::parse(&report_text).unwrap();
    assert_eq!(report.excess, 12);
    assert_eq!(report.bound, (12, 1));

    let matrix_path: PathBuf = dir.path().join("run.matrix.txt");
    let matrix = matrix_from_text(&std::fs::read_to_string(&matrix_path).unwrap()).unwrap();
    assert!(report.consistent_with(&matrix).is_ok());

    let verify = confmax(&["verify", "run.matrix.txt"], dir.path());
    assert_eq!(exit_code(&verify), 0);
    let text = stdout(&verify);
    assert!(text.contains("conference check: PASS"));
    assert!(text.contains("attainment: PASS"));
}

#[test]
fn construct_rejects_non_construction_q() {
    let dir = tempfile::tempdir().unwrap();
    // 13 is prime but not of the form 4m² + 1.
    let out = confmax(&["construct", "--q", "13"], dir.path());
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("4m"));
    // 21 = 4·... is not a prime power either way.
    let out = confmax(&["construct", "--q", "21"], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn construct_respects_format_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = confmax(
        &["construct", "--q", "5", "--out", "m", "--format", "matrix"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    assert!(dir.path().join("m.matrix.txt").exists());
    assert!(!dir.path().join("m.report.txt").exists());
}

#[test]
fn verify_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    confmax(&["construct", "--q", "5", "--out", "run"], dir.path());
    let path = dir.path().join("run.matrix.txt");
    let text = std::fs::read_to_string(&path).unwrap();
    // Flip the first off-diagonal "1" of row 2 (line 3).
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[2] = lines[2].replacen("1", "-1", 1);
    std::fs::write(&path, format!("{}\n", lines.join("\n"))).unwrap();

    let out = confmax(&["verify", "run.matrix.txt"], dir.path());
    assert_eq!(exit_code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("conference check: FAIL (rows"), "got: {text}");
}

#[test]
fn verify_unswitched_paley_fails_attainment_only() {
    let dir = tempfile::tempdir().unwrap();
    let t = build_tower(5, 1).unwrap();
    let w = paley_conference(&t).unwrap();
    std::fs::write(dir.path().join("paley.txt"), matrix_to_text(&w)).unwrap();
    let out = confmax(&["verify", "paley.txt"], dir.path());
    assert_eq!(exit_code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("conference check: PASS"));
    assert!(text.contains("attainment: FAIL"));
    assert!(text.contains("excess: 10"));
}

#[test]
fn construct_unwritable_out_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = confmax(
        &["construct", "--q", "5", "--out", "no/such/dir/run"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 4);
    assert!(stderr(&out).contains("cannot write"));
}

#[test]
fn verify_parse_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "2\n0 1\n1 x\n").unwrap();
    let out = confmax(&["verify", "bad.txt"], dir.path());
    assert_eq!(exit_code(&out), 4);
    assert!(stderr(&out).contains("line 3"));
    let out = confmax(&["verify", "missing.txt"], dir.path());
    assert_eq!(exit_code(&out), 4);
}

#[test]
fn table_lists_admissible_q_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = confmax(&["table", "--max-m", "5"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    // m = 4 gives 65 = 5·13, skipped; m = 5 gives the prime 101.
    assert_eq!(rows.len(), 4, "got: {text}");
    assert!(!text.contains(" 65 "));
    for (row, q) in rows.iter().zip([5, 17, 37, 101]) {
        assert!(row.trim_start().starts_with(&q.to_string()), "row: {row}");
        assert!(row.ends_with("PASS"));
    }
}

#[test]
fn reports_are_deterministic_up_to_timings() {
    let strip = |text: &str| -> String {
        text.lines()
            .filter(|l| !l.starts_with("timing_"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    assert_eq!(exit_code(&confmax(&["construct", "--q", "17", "--out", "a"], d1.path())), 0);
    assert_eq!(exit_code(&confmax(&["construct", "--q", "17", "--out", "a"], d2.path())), 0);
    let m1 = std::fs::read(d1.path().join("a.matrix.txt")).unwrap();
    let m2 = std::fs::read(d2.path().join("a.matrix.txt")).unwrap();
    assert_eq!(m1, m2, "matrix files must be byte-identical");
    let r1 = std::fs::read_to_string(d1.path().join("a.report.txt")).unwrap();
    let r2 = std::fs::read_to_string(d2.path().join("a.report.txt")).unwrap();
    assert_eq!(strip(&r1), strip(&r2), "reports must agree outside the timing block");
}

#[test]
fn enumerate_pairs_lists_the_chosen_pair_first() {
    let dir = tempfile::tempdir().unwrap();
    let out = confmax(
        &["construct", "--q", "5", "--out", "run", "--enumerate-pairs"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let first_pair = text.lines().find(|l| l.starts_with("h=")).unwrap();
    assert_eq!(first_pair, "h=0 ell=1");
    // The existence remark guarantees a rich admissible set.
    assert!(text.lines().filter(|l| l.starts_with("h=")).count() > 1);
}

#[test]
fn closed_pipe_does_not_panic() {
    use std::process::Stdio;
    let dir = tempfile::tempdir().unwrap();
    // 33k lines of pair output overflow the pipe buffer; dropping the read
    // end must kill the process via SIGPIPE, not a panic backtrace.
    let mut child = Command::new(env!("CARGO_BIN_EXE_confmax"))
        .args(["construct", "--q", "257", "--enumerate-pairs", "--format", "report"])
        .current_dir(dir.path())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let status = child.wait().unwrap();
    let mut err = String::new();
    use std::io::Read;
    child.stderr.take().unwrap().read_to_string(&mut err).unwrap();
    assert!(!err.contains("panicked"), "stderr: {err}");
    assert!(!status.success());
}

#[test]
fn verify_handles_orders_without_a_bound() {
    // A 1×1 zero matrix is trivially a conference matrix, but no excess
    // bound is defined for odd orders: attainment fails, exit 1.
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("one.txt"), "1\n0\n").unwrap();
    let out = confmax(&["verify", "one.txt"], dir.path());
    assert_eq!(exit_code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("conference check: PASS"));
    assert!(text.contains("bound: undefined"));
    assert!(text.contains("attainment: FAIL"));
}

#[test]
fn budget_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_confmax"))
        .args(["construct", "--q", "257"])
        .env("CONFMAX_BUDGET", "100")
        .current_dir(dir.path())
        .output()
        .unwrap();
    // Tower budget of 100 rejects q = 257 before any work happens.
    assert_eq!(exit_code(&out), 3);
    assert!(stderr(&out).contains("budget"));
}

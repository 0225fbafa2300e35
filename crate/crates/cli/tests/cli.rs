use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn strata(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strata"))
        .args(args)
        .output()
        .expect("spawn strata")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes the presentation of `tag` into `dir` via the `family` subcommand.
fn family_file(dir: &Path, tag: &str, name: &str) -> PathBuf {
    let path = dir.join(name);
    let o = strata(&["family", "--tag", tag, "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    path
}

#[test]
fn strata_table_lists_maximal_first() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(1,2,2,1)", "a.bq");
    let o = strata(&["strata", "--algebra", f.to_str().unwrap(), "--dim", "2,2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("2;2 ") && rows[0].ends_with('*'), "{out}");
    assert!(rows[1..].iter().all(|r| !r.ends_with('*')));
}

#[test]
fn strata_zero_vector_has_one_empty_stratum() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(1,2,2,1)", "a.bq");
    let o = strata(&["strata", "--algebra", f.to_str().unwrap(), "--dim", "0,0", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "assignment,orbit_dims,ambient,codim,dim,maximal\n-;-,0;0,0,0,0,*\n"
    );
}

#[test]
fn malformed_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("bad.bq");
    std::fs::write(&f, "vertex 0\nloop e 0 order two\n").unwrap();
    let o = strata(&["strata", "--algebra", f.to_str().unwrap(), "--dim", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn wrong_dimension_length_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(1,2,2,1)", "a.bq");
    let o = strata(&["strata", "--algebra", f.to_str().unwrap(), "--dim", "1,1,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scan_finds_staircase_certificate() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(1,4,4,2)", "a.bq");
    let o = strata(&[
        "reduce-scan", "--algebra", f.to_str().unwrap(), "--max-total", "8", "--expect", "some",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let at = out.find("certificate d=(4,2)").expect("certificate at (4,2)");
    let block = &out[at..];
    assert!(block.contains("witness  3,1;2      c=2"), "{block}");
    assert!(block.contains("maximal  4;2        c=4"), "{block}");
}

#[test]
fn scan_of_free_family_finds_nothing() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A'(1,2,2)", "a.bq");
    let o = strata(&[
        "reduce-scan", "--algebra", f.to_str().unwrap(), "--max-total", "6", "--expect", "none",
    ]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("certificate d="));
    // Asking for a certificate that does not exist is a policy failure.
    let o = strata(&[
        "reduce-scan", "--algebra", f.to_str().unwrap(), "--max-total", "6", "--expect", "some",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn empty_range_prints_nothing() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A'(1,2,2)", "a.bq");
    let o = strata(&[
        "reduce-scan", "--algebra", f.to_str().unwrap(), "--min-total", "5", "--max-total", "4",
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
}

#[test]
fn scan_reports_cap_per_vector() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(1,4,4,2)", "a.bq");
    let o = strata(&["reduce-scan", "--algebra", f.to_str().unwrap(), "--dim", "4,4", "--cap", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("exceed cap 3"), "{}", stdout(&o));
}

#[test]
fn default_formula_sweep_matches() {
    let o = strata(&["verify-formulas"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with(" 0 mismatches"));
}

#[test]
fn single_formula_item() {
    let o = strata(&["--format", "csv", "verify-formulas", "--item", "7", "--p", "2", "--q", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(!rows.is_empty());
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!((f[0], f[2], f[3], f[6]), ("7", "2", "2", "yes"), "{r}");
    }
}

#[test]
fn forbidden_lambda_is_rejected() {
    let o = strata(&["verify-formulas", "--item", "9", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda != 1"));
    let o = strata(&["verify-formulas", "--item", "11", "--lambda", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_identity_passes() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(1,2,2,1)", "a.bq");
    let o = strata(&[
        "--format", "csv", "oracle-count", "--algebra", f.to_str().unwrap(), "--dim", "2,2", "--q", "2",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().skip(1).all(|l| l.ends_with(",pass")), "{out}");
}

#[test]
fn oracle_rejects_composite_and_oversize() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(1,2,2,1)", "a.bq");
    let f = f.to_str().unwrap();
    let o = strata(&["oracle-count", "--algebra", f, "--dim", "1,1", "--q", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = strata(&["oracle-count", "--algebra", f, "--dim", "4,4", "--q", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cap"));
}

#[test]
fn output_is_deterministic_across_widths() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(1,4,4,2)", "a.bq");
    let f = f.to_str().unwrap();
    let run = |jobs: &str| {
        let o = strata(&["--jobs", jobs, "reduce-scan", "--algebra", f, "--max-total", "7", "--all"]);
        assert!(o.status.success());
        o.stdout
    };
    let a = run("1");
    assert_eq!(a, run("4"));
    assert_eq!(a, run("4"));
}

#[test]
fn family_and_recognize_round_trip() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(2,3,3,1)", "a.bq");
    let o = strata(&["recognize", "--algebra", f.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "A(2,3,3,1)\nin irreducibility list: yes\n");
}

#[test]
fn system_dump() {
    let dir = TempDir::new().unwrap();
    let f = family_file(dir.path(), "A(1,2,2,1)", "a.bq");
    let o = strata(&["system", "--algebra", f.to_str().unwrap(), "--assignment", "2;2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("4 4\n"));
    assert!(out.ends_with("rank 2\n"));
}

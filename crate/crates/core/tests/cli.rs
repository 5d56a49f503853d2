//! Behaviour of the `kset` binary: output formats, exit codes, files.

use std::process::{Command, Output};

fn kset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kset"))
        .args(args)
        .env_remove("KSET_THREADS")
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = kset(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn limit_report() {
    let out = stdout(&["limit", "--k", "4"]);
    assert_eq!(
        out,
        "k: 4\ni_inf: 0.46955773\np_inf: 0.53044227\nrows: 8\n\
         partials_considered: 16\npruned_universal: 5\npruned_divisibility: 0\nfull_tests: 11\n"
    );
}

#[test]
fn limit_emits_rows() {
    let dir = std::env::temp_dir().join(format!("kset-rows-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rows.csv");
    stdout(&["limit", "--k", "4", "--emit-rows", path.to_str().unwrap()]);
    let rows = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        rows,
        "3,0,0\n2,0,0\n1,1,0\n1,0,0\n0,1,1\n0,1,0\n0,0,1\n0,0,0\n"
    );
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn limit_table_csv() {
    assert_eq!(
        stdout(&["limit-table", "--k-max", "3", "--digits", "5"]),
        "k,i_inf,rows\n1,0.63212,1\n2,0.55374,2\n3,0.49658,4\n"
    );
}

#[test]
fn finite_table_variants() {
    assert_eq!(
        stdout(&["finite-table", "--n-max", "4"]),
        "n,k,value\n2,1,0.50000\n3,1,0.66667\n4,1,0.62500\n4,2,0.41667\n"
    );
    assert_eq!(
        stdout(&[
            "finite-table",
            "--n-max",
            "4",
            "--which",
            "p",
            "--digits",
            "3"
        ]),
        "n,k,value\n2,1,0.500\n3,1,0.333\n4,1,0.375\n4,2,0.583\n"
    );
    let wide = stdout(&["finite-table", "--n-max", "4", "--wide"]);
    let lines: Vec<&str> = wide.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[3].split_whitespace().eq(["4", "0.62500", "0.41667"]));
}

#[test]
fn exceptions_and_ratio() {
    assert_eq!(
        stdout(&["exceptions", "--n-max", "36"]),
        "n,k\n30,9\n36,11\n"
    );
    assert_eq!(
        stdout(&["ratio", "--k-max", "2", "--digits", "12"]),
        "k,ratio\n2,0.339198473750\n"
    );
}

#[test]
fn mc_is_reproducible() {
    let a = stdout(&["mc", "--k", "3", "--samples", "100000", "--seed", "9"]);
    let b = stdout(&[
        "--threads",
        "3",
        "mc",
        "--k",
        "3",
        "--samples",
        "100000",
        "--seed",
        "9",
    ]);
    assert_eq!(a, b);
    assert!(a.starts_with("quantity: p(inf,3)\nsamples: 100000\nseed: 9\n"));
    let f = stdout(&["mc", "--k", "2", "--n", "6", "--samples", "1000"]);
    assert!(f.starts_with("quantity: i(6,2)\n"));
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("kset-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.csv");
    let printed = stdout(&["limit-table", "--k-max", "6"]);
    assert_eq!(
        stdout(&["limit-table", "--k-max", "6", "-o", path.to_str().unwrap()]),
        ""
    );
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn invalid_arguments_exit_2() {
    for args in [
        &["limit", "--k", "0"][..],
        &["limit", "--k", "3", "--digits", "0"],
        &["limit", "--k", "3", "--digits", "51"],
        &["limit", "--k", "65"],
        &["finite-table", "--n-max", "1"],
        &["ratio", "--k-max", "1"],
        &["mc", "--k", "3", "--samples", "0"],
        &["mc", "--k", "7", "--n", "5", "--samples", "10"],
        &["limit"],
        &["bogus"],
    ] {
        let out = kset(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn threads_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_kset"))
        .args(["limit-table", "--k-max", "8"])
        .env("KSET_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        stdout(&["--threads", "1", "limit-table", "--k-max", "8"])
    );
}

use std::fs;
use std::process::{Command, Output};

use arisum_cli::{parse_bfile, run, BFile, RunConfig};
use clap::Parser;
use proptest::prelude::*;

fn arisum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arisum")).args(args).output().unwrap()
}

#[test]
fn table_prints_moebius_values() {
    let out = arisum(&["table", "--kind", "moebius", "--lo", "1", "--hi", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(values, ["1", "-1", "-1", "0", "-1", "1", "-1", "0", "0", "1"]);
}

#[test]
fn riemann_check_reports_json() {
    let out = arisum(&["riemann-check", "--n-max", "1000000", "--xi", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["argmax_n"], 300_551);
}

#[test]
fn ergodic_prints_covariance_average() {
    let out = arisum(&["ergodic", "--atoms", "0:2,1.0471:1", "--n", "10000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,covariance_average_re,covariance_average_im\n"));
    let last = text.lines().last().unwrap();
    let re: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(last.starts_with("10000,") && (re - 2.0).abs() <= 1e-3);
}

#[test]
fn exit_codes() {
    let fail = arisum(&["deviation", "--kind", "prime_indicator", "--n-max", "100000", "--psi", "const:2"]);
    assert_eq!(fail.status.code(), Some(1));
    let bad_kind = arisum(&["stats", "--kind", "omega_equals:0", "--n", "10"]);
    assert_eq!(bad_kind.status.code(), Some(2));
    let bad_range = arisum(&["table", "--kind", "moebius", "--lo", "5", "--hi", "4"]);
    assert_eq!(bad_range.status.code(), Some(2));
    let both = arisum(&["deviation", "--kind", "moebius", "--n-max", "100", "--psi", "log", "--xi", "0"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn oeis_check_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    let bad = dir.path().join("bad.txt");
    let disjoint = dir.path().join("disjoint.txt");
    fs::write(&good, "# M(n)\n1 1\n2 0\n3 -1\n4 -1\n5 -2\n").unwrap();
    fs::write(&bad, "1 1\n2 0\n3 -1\n4 -1\n5 -3\n").unwrap();
    fs::write(&disjoint, "-3 1\n0 1\n").unwrap();
    let code = |p: &std::path::Path| arisum(&["oeis-check", "--bfile", p.to_str().unwrap()]).status.code();
    assert_eq!(code(&good), Some(0));
    assert_eq!(code(&bad), Some(1));
    assert_eq!(code(&disjoint), Some(2));
    let out = dir.path().join("out");
    let st = arisum(&["oeis-check", "--bfile", bad.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(st.status.code(), Some(1));
    assert_eq!(fs::read_to_string(out.join("mismatches.csv")).unwrap(), "n,computed,expected\n5,-2,-3\n");
}

#[test]
fn cache_dir_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let args = |cache: &str| {
        RunConfig::try_parse_from(["arisum", "stats", "--kind", "omega_equals:2", "--n", "5000", "--cache-dir", cache])
            .unwrap()
    };
    let cache = dir.path().to_str().unwrap();
    let first = run(&args(cache)).unwrap();
    let cached = dir.path().join("omega_equals-2_1_5000.csv");
    assert!(cached.exists());
    let second = run(&args(cache)).unwrap();
    assert_eq!(first, second);
    let uncached = RunConfig::try_parse_from(["arisum", "stats", "--kind", "omega_equals:2", "--n", "5000"]).unwrap();
    assert_eq!(run(&uncached).unwrap(), first);
}

#[test]
fn every_subcommand_writes_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], &[&str])] = &[
        (&["sum", "--kind", "moebius", "--n-max", "1000", "--checkpoints", "10,100,1000"], &["sums.csv"]),
        (
            &["dependence", "--kind", "prime_indicator", "--n", "10000", "--alpha"],
            &["dependence.csv", "stationarity.json", "mixing.json"],
        ),
        (
            &["normality", "--kind", "signed_squarefree", "--n", "100000", "--block-size", "1000"],
            &["normality.json", "normality.csv"],
        ),
        (
            &["deviation", "--kind", "moebius", "--n-max", "100000", "--xi", "0", "--block-size", "1000"],
            &["deviation.json", "deviation.csv", "variance_growth.csv", "variance_growth.json"],
        ),
    ];
    for (args, names) in cases {
        let out = dir.path().join(args[0]);
        let mut argv = vec!["arisum"];
        argv.extend_from_slice(args);
        argv.extend_from_slice(&["--out-dir", out.to_str().unwrap()]);
        let outcome = run(&RunConfig::try_parse_from(argv).unwrap()).unwrap();
        outcome.write_to(&out).unwrap();
        for name in *names {
            assert!(out.join(name).exists(), "{name}");
        }
    }
    let sums = fs::read_to_string(dir.path().join("sum/sums.csv")).unwrap();
    assert_eq!(sums, "n,S\n10,-1\n100,1\n1000,2\n");
}

#[test]
fn vendored_bfile_parses() {
    let b = BFile::read(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/b002321.txt")).unwrap();
    assert_eq!(b.entries.len(), 10_000);
    assert_eq!(
        b.entries[..10],
        [(1, 1), (2, 0), (3, -1), (4, -1), (5, -2), (6, -1), (7, -2), (8, -2), (9, -2), (10, -1)]
    );
}

proptest! {
    #[test]
    fn bfile_round_trips(start in -1000i64..1000, steps in prop::collection::vec((1i64..50, any::<i64>()), 0..200)) {
        let mut idx = start;
        let entries: Vec<(i64, i64)> = steps.into_iter().map(|(d, v)| { idx += d; (idx, v) }).collect();
        let b = BFile { entries };
        prop_assert_eq!(parse_bfile(&b.to_text()).unwrap(), b);
    }
}

//! One line per acceptance criterion. Criteria 1 to 11 run in-process; criterion 12 runs the
//! binary into a second directory and compares every CSV byte for byte.

use std::process::{Command, ExitCode};

use restrict_lab::accept::{compare_csv_dirs, determinism_line, run_suite};

fn main() -> ExitCode {
    let first = tempfile::tempdir().expect("temp dir");
    let second = tempfile::tempdir().expect("temp dir");
    let results = run_suite(first.path(), 0, &[]).expect("suite runs");
    let mut pass = true;
    for r in &results {
        println!("{}", r.line());
        if !r.pass() {
            if let Some(o) = &r.outcome {
                for l in &o.summary {
                    println!("    {l}");
                }
            }
        }
        pass &= r.pass();
    }
    let status = Command::new(env!("CARGO_BIN_EXE_restrict-lab"))
        .args(["accept", "--rerun", "false", "--seed", "0", "--out"])
        .arg(second.path())
        .output()
        .expect("binary runs");
    let differ = compare_csv_dirs(first.path(), second.path()).expect("outputs readable");
    let files = std::fs::read_dir(first.path()).map(|d| d.count()).unwrap_or(0);
    let ok12 = differ.is_empty() && status.status.code().is_some_and(|c| c <= 1);
    let line = determinism_line(&differ, files);
    println!("{}", if ok12 { line } else { format!("{line} (binary exit {:?})", status.status.code()) });
    pass &= ok12;
    println!("acceptance: {}", if pass { "all criteria pass" } else { "some criteria fail" });
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

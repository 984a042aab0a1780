//! The acceptance suite: criteria 1 to 11 as library calls, 12 as a byte comparison of two runs.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use restrict_core::exponents::{oscillatory_exponents, to_f64};
use restrict_core::phase::{Amplitude, PhaseSpec};

use crate::cli::write_tables;
use crate::error::{LabError, Result};
use crate::experiments::{self, DecayExpectation, KnappTolerances, MeasureSource, Outcome};
use crate::knapp::KnappOptions;
use crate::oscillatory::ScalingOptions;
use crate::report::{emit_csv, ReportTable};

pub struct Criterion {
    pub id: u32,
    pub title: &'static str,
    pub budget: Option<Duration>,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, title: "exponent identity suite", budget: secs(1) },
    Criterion { id: 2, title: "exponent cross-checks", budget: None },
    Criterion { id: 3, title: "circle measure dimensions", budget: secs(10) },
    Criterion { id: 4, title: "Cantor measure and decay failure", budget: secs(10) },
    Criterion { id: 5, title: "dyadic bounds for the circle", budget: secs(60) },
    Criterion { id: 6, title: "Tomas identity and adjointness", budget: None },
    Criterion { id: 7, title: "Lorentz suite", budget: None },
    Criterion { id: 8, title: "Knapp sharpness", budget: secs(300) },
    Criterion { id: 9, title: "oscillatory scaling, parabola", budget: secs(600) },
    Criterion { id: 10, title: "fold scaling, curved fold", budget: secs(600) },
    Criterion { id: 11, title: "dyadic kernel sup, parabola", budget: None },
];

fn lambdas(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

fn scaling_with_seed(spec: &PhaseSpec, lambdas: Vec<f64>, q: f64, band: (f64, f64), seed: u64) -> Result<Outcome> {
    let mut opts = ScalingOptions::new(lambdas, q);
    opts.seed = seed;
    experiments::scaling(spec, &opts, band)
}

/// The computation behind criterion `id`, without timing.
pub fn run_criterion(id: u32, seed: u64) -> Result<Outcome> {
    match id {
        1 => experiments::identity_suite(100, seed),
        2 => experiments::exponent_cross_checks(),
        3 => {
            let mu = MeasureSource::Sphere { d: 2, n: 8192 }.build()?;
            let freqs: Vec<f64> = (2..=8).map(|k| 2f64.powi(k)).collect();
            let mut out = experiments::decay(&mu, &freqs, 64, DecayExpectation::Near(0.5, 0.05))?;
            let radii: Vec<f64> = (2..=8).map(|k| 0.5f64.powi(k)).collect();
            out.absorb("balls", experiments::regularity(&mu, &radii, 0, Some((1.0, 0.1)))?);
            Ok(out)
        }
        4 => {
            let mu = MeasureSource::Cantor { ratio: 1.0 / 3.0, levels: 14 }.build()?;
            let radii: Vec<f64> = (2..=8).map(|k| 3f64.powi(-k)).collect();
            let mut out = experiments::regularity(&mu, &radii, 0, Some((0.63, 0.05)))?;
            let freqs: Vec<f64> = (1..=6).map(|k| 3f64.powi(k)).collect();
            out.absorb("decay", experiments::decay(&mu, &freqs, 2, DecayExpectation::Below(0.05))?);
            Ok(out)
        }
        5 => {
            let mu = MeasureSource::Sphere { d: 2, n: 16384 }.build()?;
            let js: Vec<u32> = (1..=8).collect();
            experiments::dyadic_bounds(&mu, &js, 2.0, 64, 0.5, 1.0, 10.0)
        }
        6 => experiments::tomas_suite(20, 512, seed, 1e-8),
        7 => experiments::lorentz_suite(1000, seed, 1e-10),
        8 => {
            let opts = KnappOptions::planar(2.0, vec![2.0, f64::INFINITY], vec![2, 3, 4, 5, 6]);
            experiments::knapp(&opts, KnappTolerances::default())
        }
        9 => {
            let spec = PhaseSpec::from_catalog("parabola", 2, Amplitude::new(1.0)?)?;
            let q = to_f64(oscillatory_exponents(1).q_circ()?);
            scaling_with_seed(&spec, lambdas(4, 10), q, (-0.43, -0.23), seed)
        }
        10 => {
            let spec = PhaseSpec::from_catalog("fold-curved", 2, Amplitude::new(1.0)?)?;
            let mut out = experiments::fold_check(&spec, 1)?;
            let q = to_f64(&oscillatory_exponents(1).q1);
            out.absorb("scaling", scaling_with_seed(&spec, lambdas(4, 9), q, (-0.82, -0.52), seed)?);
            Ok(out)
        }
        11 => {
            let spec = PhaseSpec::from_catalog("parabola", 2, Amplitude::new(1.0)?)?;
            let js: Vec<u32> = (2..=7).collect();
            experiments::kernel_sup(&spec, 1024.0, &js, 1, 10.0)
        }
        _ => Err(LabError::Invalid(format!("no criterion {id}; criteria run from 1 to 11"))),
    }
}

pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    /// `None` when the run itself failed.
    pub outcome: Option<Outcome>,
    pub error: Option<String>,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl CriterionResult {
    pub fn numeric_pass(&self) -> bool {
        self.outcome.as_ref().is_some_and(|o| o.pass)
    }

    pub fn in_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.elapsed <= b)
    }

    pub fn pass(&self) -> bool {
        self.numeric_pass() && self.in_budget()
    }

    pub fn line(&self) -> String {
        let budget = match self.budget {
            Some(b) => format!(" (budget {} s{})", b.as_secs(), if self.in_budget() { "" } else { ", exceeded" }),
            None => String::new(),
        };
        let mut s = format!(
            "criterion {:>2} {}: {} in {:.2} s{budget}",
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64()
        );
        if let Some(e) = &self.error {
            s.push_str(&format!(" [error: {e}]"));
        }
        s
    }
}

fn stem(id: u32) -> String {
    format!("criterion_{id:02}")
}

/// Runs the selected criteria (all when `ids` is empty), writing `criterion_NN*.csv` and
/// `accept.csv` into `out`. Run errors become failed criteria.
pub fn run_suite(out: &Path, seed: u64, ids: &[u32]) -> Result<Vec<CriterionResult>> {
    if let Some(bad) = ids.iter().find(|i| !(1..=11).contains(*i)) {
        return Err(LabError::Invalid(format!("no criterion {bad}; criteria run from 1 to 11")));
    }
    fs::create_dir_all(out).map_err(|source| LabError::Io { path: out.to_path_buf(), source })?;
    let mut results = Vec::new();
    for c in CRITERIA.iter().filter(|c| ids.is_empty() || ids.contains(&c.id)) {
        let start = Instant::now();
        let run = run_criterion(c.id, seed);
        let elapsed = start.elapsed();
        let (outcome, error) = match run {
            Ok(o) => {
                write_tables(out, &stem(c.id), &o)?;
                (Some(o), None)
            }
            Err(e) => (None, Some(e.to_string())),
        };
        results.push(CriterionResult { id: c.id, title: c.title, outcome, error, elapsed, budget: c.budget });
    }
    let mut table = ReportTable::new(["criterion", "title", "numeric_pass"]);
    for r in &results {
        table.push(vec![(r.id as usize).into(), r.title.into(), r.numeric_pass().into()])?;
    }
    emit_csv(&table, &out.join("accept.csv"))?;
    Ok(results)
}

/// Compares every `.csv` in `a` with the file of the same name in `b`; returns the names
/// that differ or are missing.
pub fn compare_csv_dirs(a: &Path, b: &Path) -> Result<Vec<String>> {
    let read_dir = |p: &Path| fs::read_dir(p).map_err(|source| LabError::Io { path: p.to_path_buf(), source });
    let mut names: Vec<String> = Vec::new();
    for dir in [a, b] {
        for entry in read_dir(dir)? {
            let entry = entry.map_err(|source| LabError::Io { path: dir.to_path_buf(), source })?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.ends_with(".csv") && !names.contains(&name) {
                names.push(name);
            }
        }
    }
    names.sort();
    let mut differ = Vec::new();
    for n in names {
        match (fs::read(a.join(&n)), fs::read(b.join(&n))) {
            (Ok(x), Ok(y)) if x == y => {}
            _ => differ.push(n),
        }
    }
    Ok(differ)
}

/// Criterion 12 line from a comparison.
pub fn determinism_line(differ: &[String], files: usize) -> String {
    if differ.is_empty() {
        format!("criterion 12 PASS: determinism, {files} CSV files identical across two runs")
    } else {
        format!("criterion 12 FAIL: determinism, differing files: {}", differ.join(", "))
    }
}

/// The `accept` subcommand: suite into `out`, optionally again into `out/rerun`.
pub fn run_cli(out: &Path, seed: u64, only: &[u32], rerun: bool) -> Result<(bool, Vec<String>)> {
    let results = run_suite(out, seed, only)?;
    let mut pass = results.iter().all(CriterionResult::pass);
    let mut lines: Vec<String> = Vec::new();
    for r in &results {
        lines.push(r.line());
        if let Some(o) = &r.outcome {
            lines.extend(o.summary.iter().map(|l| format!("    {l}")));
        }
    }
    if rerun {
        let second = out.join("rerun");
        run_suite(&second, seed, only)?;
        let differ = compare_csv_dirs(out, &second)?;
        let files = fs::read_dir(out)
            .map(|d| d.filter(|e| e.as_ref().is_ok_and(|e| e.file_name().to_string_lossy().ends_with(".csv"))).count())
            .unwrap_or(0);
        pass &= differ.is_empty();
        lines.push(determinism_line(&differ, files));
    }
    Ok((pass, lines))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass_and_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_suite(dir.path(), 0, &[1, 2, 7]).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(CriterionResult::numeric_pass));
        for f in ["criterion_01.csv", "criterion_02.csv", "criterion_07.csv", "accept.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        assert!(r[1].line().starts_with("criterion  2 PASS: exponent cross-checks"));
        assert!(run_suite(dir.path(), 0, &[12]).is_err());
    }

    #[test]
    fn comparison_finds_changed_and_missing_files() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        fs::write(a.path().join("x.csv"), "1\n").unwrap();
        fs::write(b.path().join("x.csv"), "1\n").unwrap();
        fs::write(a.path().join("notes.txt"), "ignored").unwrap();
        assert!(compare_csv_dirs(a.path(), b.path()).unwrap().is_empty());
        fs::write(b.path().join("x.csv"), "2\n").unwrap();
        fs::write(b.path().join("y.csv"), "").unwrap();
        assert_eq!(compare_csv_dirs(a.path(), b.path()).unwrap(), ["x.csv", "y.csv"]);
        assert!(determinism_line(&[], 3).contains("PASS"));
    }

    #[test]
    fn over_budget_fails() {
        let r = CriterionResult {
            id: 1,
            title: "t",
            outcome: Some(experiments::exponent_cross_checks().unwrap()),
            error: None,
            elapsed: Duration::from_secs(2),
            budget: secs(1),
        };
        assert!(r.numeric_pass() && !r.pass());
        assert!(r.line().contains("exceeded"));
    }
}

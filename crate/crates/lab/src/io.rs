//! Plain-text atom files and polynomial phase files.
//!
//! Atom file: a header line `d n label`, then `n` rows `x_1 ... x_d w`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use restrict_core::measure::DiscreteMeasure;
use restrict_core::phase::PolyPhase;

use crate::error::{LabError, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io { path: path.to_path_buf(), source }
}

/// 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn measure_to_string(mu: &DiscreteMeasure) -> String {
    let d = mu.dim();
    let label = if mu.label().trim().is_empty() { "measure" } else { mu.label() };
    let mut s = format!("{d} {} {}\n", mu.len(), label.replace(['\n', '\r'], " "));
    for (j, w) in mu.weights().iter().enumerate() {
        for x in mu.atom(j) {
            s.push_str(&fmt_real(*x));
            s.push(' ');
        }
        let _ = writeln!(s, "{}", fmt_real(*w));
    }
    s
}

pub fn measure_from_str(text: &str) -> Result<DiscreteMeasure> {
    let bad = |line: usize, why: &str| LabError::Invalid(format!("atom file line {line}: {why}"));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    let mut parts = header.split_whitespace();
    let d: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(hl + 1, "bad dimension"))?;
    let n: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(hl + 1, "bad atom count"))?;
    let label = parts.collect::<Vec<_>>().join(" ");
    let mut atoms = Vec::with_capacity(n * d);
    let mut weights = Vec::with_capacity(n);
    for (ln, line) in lines {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(ln + 1, "not a number"))?;
        if vals.len() != d + 1 {
            return Err(bad(ln + 1, &format!("expected {} columns, got {}", d + 1, vals.len())));
        }
        atoms.extend_from_slice(&vals[..d]);
        weights.push(vals[d]);
    }
    if weights.len() != n {
        return Err(LabError::Length { expected: n, got: weights.len() });
    }
    Ok(DiscreteMeasure::new(d, atoms, weights, label)?)
}

pub fn write_measure(mu: &DiscreteMeasure, path: &Path) -> Result<()> {
    fs::write(path, measure_to_string(mu)).map_err(io_err(path))
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    measure_from_str(&fs::read_to_string(path).map_err(io_err(path))?)
}

/// Reads a polynomial phase coefficient file (first line `dx dy`, then `coef px.. py..`).
pub fn read_phase(path: &Path) -> Result<PolyPhase> {
    Ok(PolyPhase::parse(&fs::read_to_string(path).map_err(io_err(path))?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use restrict_core::measure::{make_cantor_measure, make_sphere_measure};

    #[test]
    fn round_trip_is_exact() {
        for mu in [make_sphere_measure(2, 64).unwrap(), make_cantor_measure(1.0 / 3.0, 5).unwrap()] {
            let back = measure_from_str(&measure_to_string(&mu)).unwrap();
            assert_eq!(back.atoms(), mu.atoms());
            assert_eq!(back.weights(), mu.weights());
            assert_eq!(back.label(), mu.label());
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(measure_from_str("").is_err());
        assert!(measure_from_str("2 1 x\n0.5 0.5\n").is_err());
        assert!(measure_from_str("1 2 x\n0.5 1\n").is_err());
        assert!(measure_from_str("1 1 x\nzero 1\n").is_err());
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        let mu = make_sphere_measure(3, 200).unwrap();
        write_measure(&mu, &p).unwrap();
        assert_eq!(read_measure(&p).unwrap().atoms(), mu.atoms());
        let q = dir.path().join("phase.txt");
        fs::write(&q, "2 1\n1 1 0 1\n0.5 0 1 2\n").unwrap();
        let ph = read_phase(&q).unwrap();
        assert_eq!(ph.terms().len(), 2);
        assert!(matches!(read_measure(&dir.path().join("missing")), Err(LabError::Io { .. })));
    }
}

//! Least-squares power-law fits in log-log coordinates.

use alloc::vec::Vec;

use crate::error::FitError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in natural-log units.
    pub max_residual: f64,
    pub count: usize,
}

impl FitResult {
    /// Value of the fitted power law at `x`.
    pub fn predict(&self, x: f64) -> f64 {
        libm::exp(self.intercept + self.slope * libm::log(x))
    }
}

/// Fits `log y = intercept + slope * log x` by ordinary least squares.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<FitResult, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    let mut lx = Vec::with_capacity(points.len());
    let mut ly = Vec::with_capacity(points.len());
    for (i, &(x, y)) in points.iter().enumerate() {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(FitError::NonPositive { index: i, x, y });
        }
        lx.push(libm::log(x));
        ly.push(libm::log(y));
    }
    let n = points.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(FitError::DegenerateAbscissae);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).abs())
        .fold(0.0, f64::max);
    Ok(FitResult { slope, intercept, max_residual, count: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lines() {
        let f = loglog_fit(&[(1.0, 1.0), (2.0, 2.0), (4.0, 4.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-15);
        assert!(f.max_residual < 1e-15);
        let pts: Vec<_> = [1.0, 8.0, 64.0].iter().map(|&t: &f64| (t, libm::pow(t, -1.0 / 3.0))).collect();
        let f = loglog_fit(&pts).unwrap();
        assert!((f.slope + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn three_point_closed_form() {
        let f = loglog_fit(&[(1.0, 1.0), (2.0, 2.0), (4.0, 3.0)]).unwrap();
        // x = 0, L, 2L with L = ln 2; slope = (ln 3 - 0) / (2 ln 2)
        let expect = libm::log(3.0) / (2.0 * libm::log(2.0));
        assert!((f.slope - expect).abs() < 1e-14);
        assert!(f.slope > 0.5 && f.slope < 1.0);
        assert!(f.max_residual > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(loglog_fit(&[(1.0, 1.0), (2.0, 2.0)]), Err(FitError::TooFewPoints(2))));
        assert!(matches!(
            loglog_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]),
            Err(FitError::NonPositive { index: 1, .. })
        ));
        assert!(loglog_fit(&[(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)]).is_err());
    }
}

//! Decreasing rearrangements and Lorentz quasi-norms of sampled data.
//!
//! A sampled field is a step function, so its rearrangement `f*` is a step function
//! too and `(int (t^(1/p) f*(t))^s dt/t)^(1/s)` integrates in closed form:
//! each step `(v_i, W_{i-1} < t <= W_i)` contributes `v_i^s (p/s) (W_i^(s/p) - W_{i-1}^(s/p))`.

use alloc::vec::Vec;

use crate::error::LorentzError;
use crate::field::SampledField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzExponent {
    p: f64,
    s: f64,
}

impl LorentzExponent {
    /// `s = f64::INFINITY` selects the weak-type quasi-norm.
    pub fn new(p: f64, s: f64) -> Result<Self, LorentzError> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(LorentzError::P(p));
        }
        if !(s > 0.0) || s.is_nan() {
            return Err(LorentzError::S(s));
        }
        Ok(Self { p, s })
    }

    /// Plain `L^p`.
    pub fn lebesgue(p: f64) -> Result<Self, LorentzError> {
        Self::new(p, p)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn is_weak(&self) -> bool {
        self.s.is_infinite()
    }
}

/// `f*` as `(value, width)` steps with strictly decreasing positive values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RearrangementSteps {
    steps: Vec<(f64, f64)>,
}

impl RearrangementSteps {
    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    pub fn total_width(&self) -> f64 {
        self.steps.iter().map(|s| s.1).sum()
    }

    /// Measure of `{|f| > level}`.
    pub fn distribution(&self, level: f64) -> f64 {
        self.steps.iter().take_while(|s| s.0 > level).map(|s| s.1).sum()
    }

    /// `f*(t)`, right-continuous convention `f*(t) = inf{v : distribution(v) <= t}`.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, w) in &self.steps {
            acc += w;
            if t < acc {
                return v;
            }
        }
        0.0
    }

    pub fn lorentz_norm(&self, e: LorentzExponent) -> f64 {
        steps_norm(&self.steps, e)
    }
}

/// Rearrangement of `|f|` on a uniform grid. Equal magnitudes are merged.
pub fn decreasing_rearrangement(f: &SampledField) -> RearrangementSteps {
    let vol = f.cell_volume();
    let mut mags: Vec<f64> = f.values().iter().map(|v| v.norm()).filter(|&m| m > 0.0).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < mags.len() {
        let v = mags[i];
        let mut j = i;
        while j < mags.len() && mags[j] == v {
            j += 1;
        }
        steps.push((v, (j - i) as f64 * vol));
        i = j;
    }
    RearrangementSteps { steps }
}

/// Rearrangement of magnitudes carried by cells of unequal measure.
pub fn weighted_rearrangement(mags: &[f64], measures: &[f64]) -> Result<RearrangementSteps, LorentzError> {
    if mags.len() != measures.len() {
        return Err(LorentzError::Length { values: mags.len(), weights: measures.len() });
    }
    if let Some(&w) = measures.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(LorentzError::Weight(w));
    }
    let mut cells: Vec<(f64, f64)> = mags
        .iter()
        .zip(measures)
        .map(|(&m, &w)| (m.abs(), w))
        .filter(|c| c.0 > 0.0)
        .collect();
    cells.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for (v, w) in cells {
        match steps.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => steps.push((v, w)),
        }
    }
    Ok(RearrangementSteps { steps })
}

pub fn lorentz_norm(f: &SampledField, e: LorentzExponent) -> f64 {
    decreasing_rearrangement(f).lorentz_norm(e)
}

pub fn weighted_lorentz_norm(mags: &[f64], measures: &[f64], e: LorentzExponent) -> Result<f64, LorentzError> {
    Ok(weighted_rearrangement(mags, measures)?.lorentz_norm(e))
}

fn steps_norm(steps: &[(f64, f64)], e: LorentzExponent) -> f64 {
    let Some(&(top, _)) = steps.first() else {
        return 0.0;
    };
    let p = e.p;
    if e.s.is_infinite() {
        let mut w = 0.0;
        let mut best: f64 = 0.0;
        for &(v, width) in steps {
            w += width;
            best = best.max(libm::pow(w, 1.0 / p) * v);
        }
        return best;
    }
    let s = e.s;
    let r = s / p;
    // Values are divided by the largest one so that scaling by powers of two is exact.
    let mut acc = 0.0;
    let mut w_prev = 0.0;
    for &(v, width) in steps {
        let inc = if w_prev == 0.0 {
            libm::pow(width, r)
        } else {
            libm::pow(w_prev, r) * libm::expm1(r * libm::log1p(width / w_prev))
        };
        acc += libm::pow(v / top, s) * inc;
        w_prev += width;
    }
    top * libm::pow(acc * p / s, 1.0 / s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;
    use alloc::vec;
    use num_complex::Complex64;

    fn field(vals: &[Complex64]) -> SampledField {
        let n = vals.len().max(8);
        let g = GridSpec::new(vec![n as f64 / 2.0], vec![n]).unwrap();
        let mut v = vals.to_vec();
        v.resize(n, Complex64::new(0.0, 0.0));
        SampledField::new(g, v).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn rearrangement_examples() {
        let r = decreasing_rearrangement(&field(&[re(3.0), re(1.0), re(1.0)]));
        assert_eq!(r.steps(), &[(3.0, 1.0), (1.0, 2.0)]);
        assert!(decreasing_rearrangement(&field(&[])).steps().is_empty());
        let r = decreasing_rearrangement(&field(&[re(-2.0), Complex64::new(0.0, 2.0)]));
        assert_eq!(r.steps(), &[(2.0, 2.0)]);
        assert_eq!(r.distribution(1.0), 2.0);
        assert_eq!(r.value_at(1.5), 2.0);
        assert_eq!(r.value_at(2.5), 0.0);
    }

    #[test]
    fn norm_examples() {
        let ind = field(&[re(1.0); 4]);
        let n = lorentz_norm(&ind, LorentzExponent::new(2.0, 1.0).unwrap());
        assert!((n - 4.0).abs() < 1e-12);
        let f = field(&[re(3.0), re(1.0)]);
        let n = lorentz_norm(&f, LorentzExponent::new(2.0, 2.0).unwrap());
        assert!((n - libm::sqrt(10.0)).abs() < 1e-14);
        for p in [0.5, 1.0, 1.5, 6.0] {
            let n = lorentz_norm(&ind, LorentzExponent::new(p, f64::INFINITY).unwrap());
            assert!((n - libm::pow(4.0, 1.0 / p)).abs() < 1e-12);
        }
    }

    #[test]
    fn exponent_validation() {
        assert!(LorentzExponent::new(0.0, 1.0).is_err());
        assert!(LorentzExponent::new(f64::INFINITY, 1.0).is_err());
        assert!(LorentzExponent::new(1.0, 0.0).is_err());
        assert!(LorentzExponent::new(1.0, f64::NAN).is_err());
        assert!(LorentzExponent::new(1.0, f64::INFINITY).unwrap().is_weak());
    }

    #[test]
    fn weighted_matches_uniform() {
        let vals = [re(3.0), re(-1.0), Complex64::new(0.5, 0.5), re(1.0)];
        let f = field(&vals);
        let mags: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
        let w = vec![f.cell_volume(); mags.len()];
        for (p, s) in [(1.2, 2.0), (2.0, 2.0), (6.0, f64::INFINITY), (1.5, 0.5)] {
            let e = LorentzExponent::new(p, s).unwrap();
            let a = lorentz_norm(&f, e);
            let b = weighted_lorentz_norm(&mags, &w, e).unwrap();
            assert!((a - b).abs() <= 1e-14 * a, "{a} {b}");
        }
        assert!(weighted_lorentz_norm(&[1.0], &[0.0], LorentzExponent::lebesgue(2.0).unwrap()).is_err());
        assert!(weighted_lorentz_norm(&[1.0], &[], LorentzExponent::lebesgue(2.0).unwrap()).is_err());
    }
}

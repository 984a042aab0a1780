//! Atomic probability measures, their Fourier transforms, and fitted
//! Frostman / decay exponents.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::MeasureError;
use crate::fit::{loglog_fit, FitResult};
use crate::quad::gauss_legendre;

/// `e^{-2 pi i t}` with the argument reduced mod 1 first.
#[inline]
pub fn cis_neg(t: f64) -> Complex64 {
    let f = t - libm::round(t);
    let (s, c) = libm::sincos(2.0 * PI * f);
    Complex64::new(c, -s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<f64>,
    weights: Vec<f64>,
    label: String,
    aliasing_frequency: Option<f64>,
}

impl DiscreteMeasure {
    /// `atoms` is flat, `d` coordinates per atom.
    pub fn new(dim: usize, atoms: Vec<f64>, weights: Vec<f64>, label: impl Into<String>) -> Result<Self, MeasureError> {
        if dim == 0 {
            return Err(MeasureError::ZeroDimension);
        }
        if weights.is_empty() {
            return Err(MeasureError::Empty);
        }
        if atoms.len() != dim * weights.len() {
            return Err(MeasureError::Length { atoms: atoms.len() / dim, weights: weights.len() });
        }
        if let Some(i) = atoms.iter().position(|x| !x.is_finite()) {
            return Err(MeasureError::Atom(i / dim));
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(MeasureError::Weight { index, value });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MeasureError::Mass(total));
        }
        Ok(Self { dim, atoms, weights, label: label.into(), aliasing_frequency: None })
    }

    /// Unit point mass at the origin.
    pub fn dirac(dim: usize) -> Self {
        Self { dim, atoms: alloc::vec![0.0; dim], weights: alloc::vec![1.0], label: "dirac".to_string(), aliasing_frequency: None }
    }

    pub fn with_aliasing_frequency(mut self, f: Option<f64>) -> Self {
        self.aliasing_frequency = f;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn atom(&self, j: usize) -> &[f64] {
        &self.atoms[j * self.dim..(j + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Frequency above which the atomic approximation is not trusted to represent the continuous measure.
    pub fn aliasing_frequency(&self) -> Option<f64> {
        self.aliasing_frequency
    }

    pub fn translated(&self, v: &[f64]) -> Self {
        let mut out = self.clone();
        for (i, x) in out.atoms.iter_mut().enumerate() {
            *x += v[i % self.dim];
        }
        out
    }

    /// Image under `x -> -x`.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        out.atoms.iter_mut().for_each(|x| *x = -*x);
        out
    }
}

fn check_sphere_args(d: usize, n: usize) -> Result<(), MeasureError> {
    if d != 2 && d != 3 {
        return Err(MeasureError::SphereDimension(d));
    }
    if n < 16 {
        return Err(MeasureError::TooFewAtoms(n));
    }
    Ok(())
}

/// Normalised surface measure on the unit sphere in dimension 2 or 3.
///
/// `d = 2`: `n` equally spaced angles, weight `1/n`, aliasing frequency `n/(8 pi)`.
/// `d = 3`: product of an `m`-point Gauss-Legendre rule in the polar coordinate `z`
/// and `2m` equally spaced azimuths, `m = round(sqrt(n/2))`; the atom count is `2m^2`,
/// which is close to but not always equal to `n`. Aliasing frequency `m/(2 pi)`.
pub fn make_sphere_measure(d: usize, n: usize) -> Result<DiscreteMeasure, MeasureError> {
    check_sphere_args(d, n)?;
    if d == 2 {
        let mut atoms = Vec::with_capacity(2 * n);
        for k in 0..n {
            let (s, c) = libm::sincos(2.0 * PI * k as f64 / n as f64);
            atoms.push(c);
            atoms.push(s);
        }
        let m = DiscreteMeasure::new(2, atoms, alloc::vec![1.0 / n as f64; n], format!("circle n={n}"))?;
        return Ok(m.with_aliasing_frequency(Some(n as f64 / (8.0 * PI))));
    }
    let m = libm::round(libm::sqrt(n as f64 / 2.0)).max(3.0) as usize;
    let naz = 2 * m;
    let (z, wz) = gauss_legendre(m);
    let mut atoms = Vec::with_capacity(3 * m * naz);
    let mut weights = Vec::with_capacity(m * naz);
    for (zi, wi) in z.iter().zip(&wz) {
        let r = libm::sqrt((1.0 - zi * zi).max(0.0));
        for k in 0..naz {
            let (s, c) = libm::sincos(2.0 * PI * k as f64 / naz as f64);
            atoms.extend_from_slice(&[r * c, r * s, *zi]);
            weights.push(wi / (2.0 * naz as f64));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let meas = DiscreteMeasure::new(3, atoms, weights, format!("sphere n={}", m * naz))?;
    Ok(meas.with_aliasing_frequency(Some(m as f64 / (2.0 * PI))))
}

fn check_cantor_args(ratio: f64, levels: u32) -> Result<(), MeasureError> {
    if !(ratio > 0.0 && ratio <= 0.5) {
        return Err(MeasureError::Ratio(ratio));
    }
    if levels == 0 || levels > 25 {
        return Err(MeasureError::Levels(levels));
    }
    Ok(())
}

/// Level-`levels` Cantor construction on `[0, 1]`: the `2^levels` interval midpoints,
/// equal weights. Aliasing frequency `ratio^(-levels)/4`.
pub fn make_cantor_measure(ratio: f64, levels: u32) -> Result<DiscreteMeasure, MeasureError> {
    check_cantor_args(ratio, levels)?;
    let mut pts = alloc::vec![0.0f64];
    let mut len = 1.0;
    for _ in 0..levels {
        let shift = (1.0 - ratio) * len;
        let mut next = Vec::with_capacity(2 * pts.len());
        for &x in &pts {
            next.push(x);
        }
        for &x in &pts {
            next.push(x + shift);
        }
        next.sort_unstable_by(f64::total_cmp);
        pts = next;
        len *= ratio;
    }
    let half = len / 2.0;
    pts.iter_mut().for_each(|x| *x += half);
    let n = pts.len();
    let m = DiscreteMeasure::new(1, pts, alloc::vec![1.0 / n as f64; n], format!("cantor r={ratio} levels={levels}"))?;
    Ok(m.with_aliasing_frequency(Some(libm::pow(1.0 / ratio, levels as f64) / 4.0)))
}

/// Experimental: at every level each interval keeps two subintervals of relative
/// length `ratio`, one in each half, at uniformly random offsets. No decay rate is claimed.
pub fn make_random_cantor_measure(ratio: f64, levels: u32, seed: u64) -> Result<DiscreteMeasure, MeasureError> {
    check_cantor_args(ratio, levels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let mut starts = alloc::vec![0.0f64];
    let mut len = 1.0;
    for _ in 0..levels {
        let child = ratio * len;
        let slack = len / 2.0 - child;
        let mut next = Vec::with_capacity(2 * starts.len());
        for &a in &starts {
            next.push(a + unit() * slack);
            next.push(a + len / 2.0 + unit() * slack);
        }
        starts = next;
        len = child;
    }
    let n = starts.len();
    let pts: Vec<f64> = starts.iter().map(|a| a + len / 2.0).collect();
    let m = DiscreteMeasure::new(1, pts, alloc::vec![1.0 / n as f64; n], format!("random-cantor r={ratio} levels={levels} seed={seed} experimental"))?;
    Ok(m.with_aliasing_frequency(Some(libm::pow(1.0 / ratio, levels as f64) / 4.0)))
}

/// `mu^(xi) = sum_j w_j e^{-2 pi i <x_j, xi>}` for each point of `xi` (flat, `d` per point).
pub fn fourier_transform_at(mu: &DiscreteMeasure, xi: &[f64]) -> Result<Vec<Complex64>, MeasureError> {
    let d = mu.dim;
    if !xi.len().is_multiple_of(d) {
        return Err(MeasureError::DimensionMismatch { expected: d, got: xi.len() % d });
    }
    Ok(xi.chunks_exact(d).map(|p| transform_one(mu, p)).collect())
}

fn transform_one(mu: &DiscreteMeasure, xi: &[f64]) -> Complex64 {
    let d = mu.dim;
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, &w) in mu.atoms.chunks_exact(d).zip(&mu.weights) {
        let t: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        acc += cis_neg(t) * w;
    }
    acc
}

/// `mu^` on the axis-aligned lattice `origin + k_a step_a e_a`, `0 <= k_a < counts_a`,
/// in row-major order (last axis fastest). Uses a phase recurrence along the
/// last axis, restarted from a direct evaluation every 64 steps.
pub fn fourier_transform_lattice(
    mu: &DiscreteMeasure,
    origin: &[f64],
    step: &[f64],
    counts: &[usize],
) -> Result<Vec<Complex64>, MeasureError> {
    let d = mu.dim;
    for len in [origin.len(), step.len(), counts.len()] {
        if len != d {
            return Err(MeasureError::DimensionMismatch { expected: d, got: len });
        }
    }
    let total: usize = counts.iter().product();
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); total];
    if total == 0 {
        return Ok(out);
    }
    let last = counts[d - 1];
    let rows = total / last;
    let mut idx = [0usize; 3];
    let mut xi0 = [0.0f64; 3];
    for (x, &w) in mu.atoms.chunks_exact(d).zip(&mu.weights) {
        let ratio = cis_neg(x[d - 1] * step[d - 1]);
        for r in 0..rows {
            let mut rem = r;
            for a in (0..d - 1).rev() {
                idx[a] = rem % counts[a];
                rem /= counts[a];
            }
            for a in 0..d - 1 {
                xi0[a] = origin[a] + idx[a] as f64 * step[a];
            }
            let base_dot: f64 = (0..d - 1).map(|a| x[a] * xi0[a]).sum();
            let row = &mut out[r * last..(r + 1) * last];
            let mut cur = Complex64::new(0.0, 0.0);
            for (k, o) in row.iter_mut().enumerate() {
                if k % 64 == 0 {
                    let t = base_dot + x[d - 1] * (origin[d - 1] + k as f64 * step[d - 1]);
                    cur = cis_neg(t) * w;
                } else {
                    cur *= ratio;
                }
                *o += cur;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityProfile {
    pub radii: Vec<f64>,
    pub max_ball_masses: Vec<f64>,
    /// `max_ball_masses[i] / radii[i]^a_fit`.
    pub max_ball_ratios: Vec<f64>,
    pub a_fit: f64,
    pub a_const: f64,
    pub fit: FitResult,
}

/// Largest `mu(B(c, r))` over centres `c` at atoms, for each radius, with a power-law fit.
///
/// With `n_centers` below the atom count, every `len/n_centers`-th atom is used.
pub fn ball_regularity_profile(mu: &DiscreteMeasure, radii: &[f64], n_centers: usize) -> Result<RegularityProfile, MeasureError> {
    if radii.len() < 3 {
        return Err(MeasureError::TooFewRadii(radii.len()));
    }
    if let Some(&r) = radii.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return Err(MeasureError::Radius(r));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(MeasureError::RadiiOrder);
    }
    let d = mu.dim;
    let n = mu.len();
    let stride = if n_centers == 0 || n_centers >= n { 1 } else { n / n_centers };

    // atoms sorted by first coordinate, with prefix sums of weights
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&i, &j| mu.atoms[i * d].total_cmp(&mu.atoms[j * d]));
    let first: Vec<f64> = order.iter().map(|&i| mu.atoms[i * d]).collect();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut s = 0.0;
    for &i in &order {
        s += mu.weights[i];
        prefix.push(s);
    }

    let mut masses = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best: f64 = 0.0;
        for c in (0..n).step_by(stride) {
            let cx = mu.atom(c);
            let lo = first.partition_point(|&v| v < cx[0] - r);
            let hi = first.partition_point(|&v| v <= cx[0] + r);
            let m = if d == 1 {
                prefix[hi] - prefix[lo]
            } else {
                let r2 = r * r;
                order[lo..hi]
                    .iter()
                    .filter(|&&j| {
                        let y = mu.atom(j);
                        cx.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r2
                    })
                    .map(|&j| mu.weights[j])
                    .sum()
            };
            best = best.max(m);
        }
        masses.push(best);
    }
    let pts: Vec<(f64, f64)> = radii.iter().copied().zip(masses.iter().copied()).collect();
    let fit = loglog_fit(&pts)?;
    let a_fit = fit.slope;
    let ratios: Vec<f64> = radii.iter().zip(&masses).map(|(r, m)| m / libm::pow(*r, a_fit)).collect();
    let a_const = ratios.iter().copied().fold(1.0, f64::max);
    Ok(RegularityProfile { radii: radii.to_vec(), max_ball_masses: masses, max_ball_ratios: ratios, a_fit, a_const, fit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile {
    pub radii: Vec<f64>,
    pub annulus_sups: Vec<f64>,
    pub b_fit: f64,
    pub b_const: f64,
    pub fit: FitResult,
}

/// Unit directions used to sample the sphere `|xi| = R`: `+-1` on the line, `n` angles in
/// `[0, pi)` in the plane, `n` Fibonacci points on the upper hemisphere in space.
/// Half-spaces suffice because `|mu^(-xi)| = |mu^(xi)|`.
pub fn sample_directions(d: usize, n: usize) -> Vec<f64> {
    match d {
        1 => alloc::vec![1.0, -1.0],
        2 => (0..n)
            .flat_map(|k| {
                let (s, c) = libm::sincos(PI * k as f64 / n as f64);
                [c, s]
            })
            .collect(),
        _ => {
            let golden = PI * (3.0 - libm::sqrt(5.0));
            let mut out = Vec::with_capacity(d * n);
            for k in 0..n {
                let z = (k as f64 + 0.5) / n as f64;
                let r = libm::sqrt(1.0 - z * z);
                let (s, c) = libm::sincos(golden * k as f64);
                out.extend_from_slice(&[r * c, r * s, z]);
                out.extend(core::iter::repeat_n(0.0, d - 3));
            }
            out
        }
    }
}

/// Sup of `|mu^|` over sampled directions at each radius, with a power-law fit.
pub fn fourier_decay_profile(mu: &DiscreteMeasure, radii: &[f64], n_directions: usize) -> Result<DecayProfile, MeasureError> {
    if radii.len() < 3 {
        return Err(MeasureError::TooFewRadii(radii.len()));
    }
    if n_directions == 0 {
        return Err(MeasureError::Directions);
    }
    if let Some(&r) = radii.iter().find(|r| !(**r >= 1.0)) {
        return Err(MeasureError::FrequencyBelowOne(r));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MeasureError::FrequencyOrder);
    }
    if let (Some(limit), Some(&top)) = (mu.aliasing_frequency, radii.last()) {
        if top > limit {
            return Err(MeasureError::Aliasing { radius: top, limit });
        }
    }
    let d = mu.dim;
    let dirs = sample_directions(d, n_directions);
    let mut sups = Vec::with_capacity(radii.len());
    let mut xi = alloc::vec![0.0; d];
    for &r in radii {
        let mut best: f64 = 0.0;
        for u in dirs.chunks_exact(d) {
            for (a, b) in xi.iter_mut().zip(u) {
                *a = r * b;
            }
            best = best.max(transform_one(mu, &xi).norm());
        }
        if best == 0.0 {
            return Err(MeasureError::ZeroSup(r));
        }
        sups.push(best.min(1.0));
    }
    let pts: Vec<(f64, f64)> = radii.iter().copied().zip(sups.iter().copied()).collect();
    let fit = loglog_fit(&pts)?;
    let b_fit = (-fit.slope).max(0.0);
    let b_const = radii.iter().zip(&sups).map(|(r, s)| s * libm::pow(*r, b_fit)).fold(1.0, f64::max);
    Ok(DecayProfile { radii: radii.to_vec(), annulus_sups: sups, b_fit, b_const, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert_eq!(make_sphere_measure(4, 100), Err(MeasureError::SphereDimension(4)));
        assert_eq!(make_sphere_measure(2, 15), Err(MeasureError::TooFewAtoms(15)));
        assert_eq!(make_cantor_measure(0.6, 3), Err(MeasureError::Ratio(0.6)));
        assert_eq!(make_cantor_measure(0.0, 3), Err(MeasureError::Ratio(0.0)));
        assert_eq!(make_cantor_measure(0.3, 26), Err(MeasureError::Levels(26)));
        assert!(DiscreteMeasure::new(1, alloc::vec![0.0, 1.0], alloc::vec![0.5, 0.4], "x").is_err());
        assert!(DiscreteMeasure::new(1, alloc::vec![0.0, 1.0], alloc::vec![1.5, -0.5], "x").is_err());
        assert!(DiscreteMeasure::new(2, alloc::vec![0.0], alloc::vec![1.0], "x").is_err());
    }

    #[test]
    fn small_circle() {
        let m = make_sphere_measure(2, 16).unwrap();
        assert_eq!(m.len(), 16);
        assert!(m.weights().iter().all(|&w| w == 1.0 / 16.0));
        for j in 0..16 {
            let a = m.atom(j);
            assert!((a[0] * a[0] + a[1] * a[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_cantor() {
        let m = make_cantor_measure(0.5, 3).unwrap();
        assert_eq!(m.len(), 8);
        for j in 0..8 {
            assert!((m.atom(j)[0] - (j as f64 / 8.0 + 1.0 / 16.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn dirac_transform() {
        let m = DiscreteMeasure::dirac(2);
        let v = fourier_transform_at(&m, &[3.7, -1.2, 0.0, 0.0]).unwrap();
        assert_eq!(v, alloc::vec![Complex64::new(1.0, 0.0); 2]);
        assert!(fourier_transform_at(&m, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn lattice_matches_direct() {
        let m = make_cantor_measure(1.0 / 3.0, 6).unwrap().translated(&[0.37]);
        let lat = fourier_transform_lattice(&m, &[-40.0], &[0.173], &[500]).unwrap();
        let pts: Vec<f64> = (0..500).map(|k| -40.0 + k as f64 * 0.173).collect();
        let dir = fourier_transform_at(&m, &pts).unwrap();
        for (a, b) in lat.iter().zip(&dir) {
            assert!((a - b).norm() < 1e-12);
        }
        let c = make_sphere_measure(2, 200).unwrap();
        let lat = fourier_transform_lattice(&c, &[-3.0, 2.0], &[0.25, 0.11], &[20, 150]).unwrap();
        let mut pts = Vec::new();
        for i in 0..20 {
            for k in 0..150 {
                pts.push(-3.0 + 0.25 * i as f64);
                pts.push(2.0 + 0.11 * k as f64);
            }
        }
        let dir = fourier_transform_at(&c, &pts).unwrap();
        for (a, b) in lat.iter().zip(&dir) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn point_mass_profiles() {
        let m = DiscreteMeasure::dirac(1);
        let p = ball_regularity_profile(&m, &[0.5, 0.25, 0.125], 10).unwrap();
        assert!(p.a_fit.abs() < 1e-12);
        let dp = fourier_decay_profile(&m, &[1.0, 2.0, 4.0], 3).unwrap();
        assert!(dp.annulus_sups.iter().all(|&s| s == 1.0));
        assert_eq!(dp.b_fit, 0.0);
    }

    #[test]
    fn profile_argument_checks() {
        let m = make_sphere_measure(2, 64).unwrap();
        assert!(matches!(ball_regularity_profile(&m, &[0.5, 0.25], 8), Err(MeasureError::TooFewRadii(2))));
        assert!(matches!(ball_regularity_profile(&m, &[0.5, 0.5, 0.25], 8), Err(MeasureError::RadiiOrder)));
        assert!(matches!(ball_regularity_profile(&m, &[2.0, 0.5, 0.25], 8), Err(MeasureError::Radius(_))));
        assert!(matches!(fourier_decay_profile(&m, &[0.5, 1.0, 2.0], 8), Err(MeasureError::FrequencyBelowOne(_))));
        assert!(matches!(fourier_decay_profile(&m, &[1.0, 2.0, 200.0], 8), Err(MeasureError::Aliasing { .. })));
    }
}

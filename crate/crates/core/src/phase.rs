//! Phase functions of oscillatory integral operators, their derivative
//! tensors, and numeric checks of the rank, curvature and fold conditions.
//!
//! Derivative layouts (row-major): mixed Hessian `H[i*m + j] = d_{x_i} d_{y_j} phi`,
//! third-order tensor `T[(i*m + j)*m + k] = d_{x_i} d_{y_j} d_{y_k} phi`,
//! with `d` x-coordinates and `m` y-coordinates.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bump::{chi0, chi_j};
use crate::error::PhaseError;

/// Central-difference step of the fallback derivatives.
pub const FD_STEP: f64 = 1e-4;
/// Step for the third derivatives, taken as differences of mixed Hessians.
pub const FD_STEP_THIRD: f64 = 1e-3;
pub const DEFAULT_RADIUS: f64 = 0.3;
pub const DEFAULT_RANK_TOL: f64 = 1e-6;
pub const DEFAULT_DIRECTIONAL_TOL: f64 = 1e-4;

/// A real phase `phi(x, y)`.
///
/// Only `value` is required; the derivative methods fall back to central differences.
pub trait Phase {
    fn x_dim(&self) -> usize;
    fn y_dim(&self) -> usize;
    fn value(&self, x: &[f64], y: &[f64]) -> f64;

    /// True when `phi(x, y) = psi(y) + <x, Gamma(y)>`; then `Gamma(y)` is `grad_x` at any x.
    fn linear_in_x(&self) -> bool {
        false
    }

    fn grad_x(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let h = FD_STEP;
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            xp[i] = x[i] + h;
            let a = self.value(&xp, y);
            xp[i] = x[i] - h;
            let b = self.value(&xp, y);
            xp[i] = x[i];
            out[i] = (a - b) / (2.0 * h);
        }
    }

    fn grad_y(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let h = FD_STEP;
        let mut yp = y.to_vec();
        for j in 0..y.len() {
            yp[j] = y[j] + h;
            let a = self.value(x, &yp);
            yp[j] = y[j] - h;
            let b = self.value(x, &yp);
            yp[j] = y[j];
            out[j] = (a - b) / (2.0 * h);
        }
    }

    fn mixed_hessian(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let h = FD_STEP;
        let m = y.len();
        let mut xp = x.to_vec();
        let mut yp = y.to_vec();
        for i in 0..x.len() {
            for j in 0..m {
                let mut acc = 0.0;
                for (sx, sy, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                    xp[i] = x[i] + sx * h;
                    yp[j] = y[j] + sy * h;
                    acc += sign * self.value(&xp, &yp);
                }
                xp[i] = x[i];
                yp[j] = y[j];
                out[i * m + j] = acc / (4.0 * h * h);
            }
        }
    }

    fn third(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let h = FD_STEP_THIRD;
        let d = x.len();
        let m = y.len();
        let mut yp = y.to_vec();
        let mut a = vec![0.0; d * m];
        let mut b = vec![0.0; d * m];
        for k in 0..m {
            yp[k] = y[k] + h;
            self.mixed_hessian(x, &yp, &mut a);
            yp[k] = y[k] - h;
            self.mixed_hessian(x, &yp, &mut b);
            yp[k] = y[k];
            for ij in 0..d * m {
                out[ij * m + k] = (a[ij] - b[ij]) / (2.0 * h);
            }
        }
    }
}

/// Polynomial phase with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPhase {
    dx: usize,
    dy: usize,
    /// `(coefficient, powers)`, powers for x first, then y.
    terms: Vec<(f64, Vec<u32>)>,
    name: String,
}

impl PolyPhase {
    pub fn new(dx: usize, dy: usize, terms: Vec<(f64, Vec<u32>)>, name: impl Into<String>) -> Result<Self, PhaseError> {
        if dx == 0 || dy == 0 {
            return Err(PhaseError::Polynomial(format!("dimensions must be positive, got {dx} and {dy}")));
        }
        for (n, (c, p)) in terms.iter().enumerate() {
            if p.len() != dx + dy {
                return Err(PhaseError::Polynomial(format!(
                    "term {n} has {} exponents, expected {}",
                    p.len(),
                    dx + dy
                )));
            }
            if !c.is_finite() {
                return Err(PhaseError::Polynomial(format!("term {n} has a non-finite coefficient")));
            }
        }
        Ok(Self { dx, dy, terms, name: name.into() })
    }

    /// Reads `dx dy` on the first data line, then one `coef p_x1 .. p_xd p_y1 .. p_ym` line per term.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, PhaseError> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let bad = |line: usize, what: &str| PhaseError::Polynomial(format!("line {}: {what}", line + 1));
        let (n0, head) = lines.next().ok_or_else(|| PhaseError::Polynomial("empty coefficient file".to_string()))?;
        let dims: Vec<usize> = head
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(n0, "expected 'dx dy'"))?;
        if dims.len() != 2 {
            return Err(bad(n0, "expected 'dx dy'"));
        }
        let (dx, dy) = (dims[0], dims[1]);
        let mut terms = Vec::new();
        for (n, line) in lines {
            let mut tok = line.split_whitespace();
            let c: f64 = tok
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(n, "bad coefficient"))?;
            let p: Vec<u32> = tok
                .map(|t| t.parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad(n, "exponents must be non-negative integers"))?;
            if p.len() != dx + dy {
                return Err(bad(n, &format!("expected {} exponents, got {}", dx + dy, p.len())));
            }
            terms.push((c, p));
        }
        Self::new(dx, dy, terms, "file")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }

    /// Partial derivative of multi-order `alpha` (x orders first, then y).
    pub fn derivative(&self, x: &[f64], y: &[f64], alpha: &[u32]) -> f64 {
        let mut total = 0.0;
        'terms: for (c, pows) in &self.terms {
            let mut v = *c;
            for (k, (&p, &a)) in pows.iter().zip(alpha).enumerate() {
                if a > p {
                    continue 'terms;
                }
                let z = if k < self.dx { x[k] } else { y[k - self.dx] };
                let mut f = 1.0;
                for t in 0..a {
                    f *= (p - t) as f64;
                }
                v *= f * libm::pow(z, (p - a) as f64);
            }
            total += v;
        }
        total
    }
}

impl Phase for PolyPhase {
    fn x_dim(&self) -> usize {
        self.dx
    }

    fn y_dim(&self) -> usize {
        self.dy
    }

    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.derivative(x, y, &vec![0; self.dx + self.dy])
    }

    fn linear_in_x(&self) -> bool {
        self.terms.iter().all(|(_, p)| p[..self.dx].iter().sum::<u32>() <= 1)
    }

    fn grad_x(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let mut alpha = vec![0; self.dx + self.dy];
        for (i, o) in out.iter_mut().enumerate().take(self.dx) {
            alpha[i] = 1;
            *o = self.derivative(x, y, &alpha);
            alpha[i] = 0;
        }
    }

    fn grad_y(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let mut alpha = vec![0; self.dx + self.dy];
        for (j, o) in out.iter_mut().enumerate().take(self.dy) {
            alpha[self.dx + j] = 1;
            *o = self.derivative(x, y, &alpha);
            alpha[self.dx + j] = 0;
        }
    }

    fn mixed_hessian(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let mut alpha = vec![0; self.dx + self.dy];
        for i in 0..self.dx {
            for j in 0..self.dy {
                alpha[i] += 1;
                alpha[self.dx + j] += 1;
                out[i * self.dy + j] = self.derivative(x, y, &alpha);
                alpha[i] -= 1;
                alpha[self.dx + j] -= 1;
            }
        }
    }

    fn third(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let m = self.dy;
        let mut alpha = vec![0; self.dx + m];
        for i in 0..self.dx {
            for j in 0..m {
                for k in 0..m {
                    alpha[i] += 1;
                    alpha[self.dx + j] += 1;
                    alpha[self.dx + k] += 1;
                    out[(i * m + j) * m + k] = self.derivative(x, y, &alpha);
                    alpha[i] -= 1;
                    alpha[self.dx + j] -= 1;
                    alpha[self.dx + k] -= 1;
                }
            }
        }
    }
}

/// Built-in phases.
///
/// `parabola`: `<x', y> + x_d |y|^2 / 2`, y in R^(d-1).
/// `cone`: `<x', y> + x_d y_1^2 / 2`, y in R^(d-1).
/// `zero`: identically zero, y in R^(d-1).
/// `fold-flat`: `<x', y'> + x_d y_d^2 / 2`, y in R^d.
/// `fold-curved`: `<x', y'> + x_d |y|^2 / 2`, y in R^d.
pub fn catalog(name: &str, d: usize) -> Result<PolyPhase, PhaseError> {
    let known = ["parabola", "cone", "zero", "fold-flat", "fold-curved"];
    if !known.contains(&name) {
        return Err(PhaseError::UnknownCatalog(name.to_string()));
    }
    if !(2..=3).contains(&d) {
        return Err(PhaseError::CatalogDimension { name: name.to_string(), d });
    }
    let m = if name.starts_with("fold") { d } else { d - 1 };
    let mono = |xi: usize, yj: &[(usize, u32)]| {
        let mut p = vec![0u32; d + m];
        p[xi] = 1;
        for &(j, e) in yj {
            p[d + j] += e;
        }
        p
    };
    let mut terms = Vec::new();
    if name != "zero" {
        for i in 0..d - 1 {
            terms.push((1.0, mono(i, &[(i, 1)])));
        }
    }
    match name {
        "parabola" | "fold-curved" => {
            for j in 0..m {
                terms.push((0.5, mono(d - 1, &[(j, 2)])));
            }
        }
        "cone" => terms.push((0.5, mono(d - 1, &[(0, 2)]))),
        "fold-flat" => terms.push((0.5, mono(d - 1, &[(d - 1, 2)]))),
        _ => {}
    }
    PolyPhase::new(d, m, terms, name)
}

/// `phi(R x, S y)` for orthogonal `R`, `S` (row-major).
pub struct RotatedPhase<P> {
    inner: P,
    rx: Vec<f64>,
    ry: Vec<f64>,
}

impl<P: Phase> RotatedPhase<P> {
    pub fn new(inner: P, rx: Vec<f64>, ry: Vec<f64>) -> Self {
        assert_eq!(rx.len(), inner.x_dim() * inner.x_dim());
        assert_eq!(ry.len(), inner.y_dim() * inner.y_dim());
        Self { inner, rx, ry }
    }

    fn map(r: &[f64], v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n).map(|a| (0..n).map(|b| r[a * n + b] * v[b]).sum()).collect()
    }

    /// `R^T v`.
    fn map_t(r: &[f64], v: &[f64], out: &mut [f64]) {
        let n = v.len();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|a| r[a * n + i] * v[a]).sum();
        }
    }
}

impl<P: Phase> Phase for RotatedPhase<P> {
    fn x_dim(&self) -> usize {
        self.inner.x_dim()
    }

    fn y_dim(&self) -> usize {
        self.inner.y_dim()
    }

    fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inner.value(&Self::map(&self.rx, x), &Self::map(&self.ry, y))
    }

    fn linear_in_x(&self) -> bool {
        self.inner.linear_in_x()
    }

    fn grad_x(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let mut g = vec![0.0; x.len()];
        self.inner.grad_x(&Self::map(&self.rx, x), &Self::map(&self.ry, y), &mut g);
        Self::map_t(&self.rx, &g, out);
    }

    fn grad_y(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let mut g = vec![0.0; y.len()];
        self.inner.grad_y(&Self::map(&self.rx, x), &Self::map(&self.ry, y), &mut g);
        Self::map_t(&self.ry, &g, out);
    }

    fn mixed_hessian(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let (d, m) = (x.len(), y.len());
        let mut h = vec![0.0; d * m];
        self.inner.mixed_hessian(&Self::map(&self.rx, x), &Self::map(&self.ry, y), &mut h);
        for i in 0..d {
            for j in 0..m {
                let mut s = 0.0;
                for a in 0..d {
                    for b in 0..m {
                        s += self.rx[a * d + i] * h[a * m + b] * self.ry[b * m + j];
                    }
                }
                out[i * m + j] = s;
            }
        }
    }

    fn third(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let (d, m) = (x.len(), y.len());
        let mut t = vec![0.0; d * m * m];
        self.inner.third(&Self::map(&self.rx, x), &Self::map(&self.ry, y), &mut t);
        // contract one index at a time
        let mut t1 = vec![0.0; d * m * m];
        for i in 0..d {
            for bc in 0..m * m {
                t1[i * m * m + bc] = (0..d).map(|a| self.rx[a * d + i] * t[a * m * m + bc]).sum();
            }
        }
        let mut t2 = vec![0.0; d * m * m];
        for i in 0..d {
            for j in 0..m {
                for c in 0..m {
                    t2[(i * m + j) * m + c] = (0..m).map(|b| self.ry[b * m + j] * t1[(i * m + b) * m + c]).sum();
                }
            }
        }
        for i in 0..d {
            for j in 0..m {
                for k in 0..m {
                    out[(i * m + j) * m + k] = (0..m).map(|c| self.ry[c * m + k] * t2[(i * m + j) * m + c]).sum();
                }
            }
        }
    }
}

/// Orthogonal `n x n` matrix (row-major) from the QR factor of a seeded random matrix.
pub fn random_orthogonal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |_, _| unit(&mut rng) * 2.0 - 1.0);
    let q = a.qr().q();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = q[(i, j)];
        }
    }
    out
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Cutoff `zeta(x, y) = chi0(|x| / r) chi0(|y| / r)`, supported in `|x|, |y| < r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    radius: f64,
}

impl Amplitude {
    pub fn new(radius: f64) -> Result<Self, PhaseError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(PhaseError::Radius(radius));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        self.x_factor(x) * self.y_factor(y)
    }

    pub fn x_factor(&self, x: &[f64]) -> f64 {
        chi0(norm(x) / self.radius)
    }

    pub fn y_factor(&self, y: &[f64]) -> f64 {
        chi0(norm(y) / self.radius)
    }
}

impl Default for Amplitude {
    fn default() -> Self {
        Self { radius: DEFAULT_RADIUS }
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|t| t * t).sum())
}

/// A phase together with its amplitude.
pub struct PhaseSpec {
    pub phase: Box<dyn Phase>,
    pub amplitude: Amplitude,
    pub label: String,
}

impl PhaseSpec {
    pub fn new(phase: Box<dyn Phase>, amplitude: Amplitude, label: impl Into<String>) -> Self {
        Self { phase, amplitude, label: label.into() }
    }

    pub fn from_catalog(name: &str, d: usize, amplitude: Amplitude) -> Result<Self, PhaseError> {
        Ok(Self::new(Box::new(catalog(name, d)?), amplitude, name))
    }

    pub fn x_dim(&self) -> usize {
        self.phase.x_dim()
    }

    pub fn y_dim(&self) -> usize {
        self.phase.y_dim()
    }
}

/// Largest discrepancy between the derivative methods of `phase` and central differences
/// (step [`FD_STEP`]) of the next-lower order, at `probes` seeded points of `[-r, r]^(d+m)`.
///
/// Each discrepancy is measured relative to `1 + |exact|`.
pub fn derivative_consistency(phase: &dyn Phase, probes: usize, radius: f64, seed: u64) -> f64 {
    let (d, m) = (phase.x_dim(), phase.y_dim());
    let h = FD_STEP;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut rel = |exact: f64, approx: f64| worst = worst.max((exact - approx).abs() / (1.0 + exact.abs()));
    let (mut gx, mut gy) = (vec![0.0; d], vec![0.0; m]);
    let (mut hp, mut hm) = (vec![0.0; d * m], vec![0.0; d * m]);
    let (mut gp, mut gm) = (vec![0.0; m], vec![0.0; m]);
    let mut t = vec![0.0; d * m * m];
    let mut hess = vec![0.0; d * m];
    for _ in 0..probes {
        let x: Vec<f64> = (0..d).map(|_| radius * (2.0 * unit(&mut rng) - 1.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| radius * (2.0 * unit(&mut rng) - 1.0)).collect();
        phase.grad_x(&x, &y, &mut gx);
        phase.grad_y(&x, &y, &mut gy);
        phase.mixed_hessian(&x, &y, &mut hess);
        phase.third(&x, &y, &mut t);
        let mut xp = x.clone();
        for i in 0..d {
            xp[i] = x[i] + h;
            let a = phase.value(&xp, &y);
            phase.grad_y(&xp, &y, &mut gp);
            xp[i] = x[i] - h;
            let b = phase.value(&xp, &y);
            phase.grad_y(&xp, &y, &mut gm);
            xp[i] = x[i];
            rel(gx[i], (a - b) / (2.0 * h));
            for j in 0..m {
                rel(hess[i * m + j], (gp[j] - gm[j]) / (2.0 * h));
            }
        }
        let mut yp = y.clone();
        for k in 0..m {
            yp[k] = y[k] + h;
            let a = phase.value(&x, &yp);
            phase.mixed_hessian(&x, &yp, &mut hp);
            yp[k] = y[k] - h;
            let b = phase.value(&x, &yp);
            phase.mixed_hessian(&x, &yp, &mut hm);
            yp[k] = y[k];
            rel(gy[k], (a - b) / (2.0 * h));
            for ij in 0..d * m {
                rel(t[ij * m + k], (hp[ij] - hm[ij]) / (2.0 * h));
            }
        }
    }
    worst
}

/// Per-probe values of a [`ConditionReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<(&'static str, f64)>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition: String,
    pub target: usize,
    /// Relative rank tolerance.
    pub tolerance: f64,
    /// Tolerance of the transversality test (fold check only).
    pub directional_tolerance: Option<f64>,
    pub probes: Vec<ProbeOutcome>,
    pub verdict: bool,
    pub note: Option<String>,
}

impl ConditionReport {
    fn finish(condition: &str, target: usize, tolerance: f64, probes: Vec<ProbeOutcome>) -> Self {
        let verdict = probes.iter().all(|p| p.pass);
        Self {
            condition: condition.to_string(),
            target,
            tolerance,
            directional_tolerance: None,
            probes,
            verdict,
            note: None,
        }
    }
}

/// A probe point `(x, y)`.
pub type Probe = (Vec<f64>, Vec<f64>);

fn check_shape(phase: &dyn Phase, index: usize, x: &[f64], y: &[f64]) -> Result<(), PhaseError> {
    let (dx, dy) = (phase.x_dim(), phase.y_dim());
    if x.len() != dx || y.len() != dy {
        return Err(PhaseError::ProbeShape { index, dx, dy });
    }
    Ok(())
}

fn to_matrix(a: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, a)
}

/// Singular values, largest first.
fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_unstable_by(|p, q| q.total_cmp(p));
    s
}

fn count_above(s: &[f64], cut: f64) -> usize {
    s.iter().filter(|&&v| v > cut).count()
}

/// Numeric rank of the mixed Hessian: singular values above `tol` times the largest.
pub fn check_rank_mixed_hessian(
    phase: &dyn Phase,
    probes: &[Probe],
    target: usize,
    tol: f64,
) -> Result<ConditionReport, PhaseError> {
    let (d, m) = (phase.x_dim(), phase.y_dim());
    let mut h = vec![0.0; d * m];
    let mut out = Vec::with_capacity(probes.len());
    for (index, (x, y)) in probes.iter().enumerate() {
        check_shape(phase, index, x, y)?;
        phase.mixed_hessian(x, y, &mut h);
        let s = singular_values(&to_matrix(&h, d, m));
        let rank = count_above(&s, tol * s[0]);
        out.push(ProbeOutcome {
            x: x.clone(),
            y: y.clone(),
            values: vec![("rank", rank as f64), ("largest_singular_value", s[0])],
            pass: rank >= target,
        });
    }
    Ok(ConditionReport::finish("mixed_hessian_rank", target, tol, out))
}

/// Unit `u` with `u^T H = 0` (smallest eigenvector of `H H^T`), and the
/// singular values of `H` padded with zeros to length `d`, largest first.
fn left_kernel(h: &[f64], d: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let hm = to_matrix(h, d, m);
    let gram = &hm * hm.transpose();
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_unstable_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let u = eig.eigenvectors.column(order[0]).iter().copied().collect();
    let s = order.iter().rev().map(|&k| libm::sqrt(eig.eigenvalues[k].max(0.0))).collect();
    (u, s)
}

/// `sum_i u_i T[i, ., .]`, an `m x m` matrix.
fn contract_first(t: &[f64], u: &[f64], m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |j, k| u.iter().enumerate().map(|(i, ui)| ui * t[(i * m + j) * m + k]).sum())
}

/// Rank of `Hess_yy <u, phi_x>` with `u` spanning the left kernel of the mixed Hessian.
///
/// The rank cut is `tol` times the larger of the top singular values of this matrix and of
/// the mixed Hessian. Needs `y_dim = x_dim - 1`.
pub fn check_curvature_rank(
    phase: &dyn Phase,
    probes: &[Probe],
    kappa: usize,
    tol: f64,
) -> Result<ConditionReport, PhaseError> {
    let (d, m) = (phase.x_dim(), phase.y_dim());
    if m + 1 != d {
        return Err(PhaseError::YDimension { expected: d.saturating_sub(1), got: m });
    }
    let mut h = vec![0.0; d * m];
    let mut t = vec![0.0; d * m * m];
    let mut out = Vec::with_capacity(probes.len());
    for (index, (x, y)) in probes.iter().enumerate() {
        check_shape(phase, index, x, y)?;
        phase.mixed_hessian(x, y, &mut h);
        phase.third(x, y, &mut t);
        let (u, s) = left_kernel(&h, d, m);
        let (s0, s1) = (s[d - 1], s[d - 2]);
        if s1 - s0 <= tol * s[0].max(f64::MIN_POSITIVE) {
            return Err(PhaseError::AmbiguousKernel { index, s0, s1 });
        }
        let c = contract_first(&t, &u, m);
        let cs = singular_values(&c);
        let rank = count_above(&cs, tol * cs[0].max(s[0]));
        out.push(ProbeOutcome {
            x: x.clone(),
            y: y.clone(),
            values: vec![("curvature_rank", rank as f64), ("kernel_gap", s1 - s0)],
            pass: rank >= kappa,
        });
    }
    Ok(ConditionReport::finish("curvature_rank", kappa, tol, out))
}

/// Determinant of a small square matrix by cofactor expansion.
fn det(a: &[f64], n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        _ => (0..n)
            .map(|c| {
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[c] * det(&minor(a, n, 0, c), n - 1)
            })
            .sum(),
    }
}

fn minor(a: &[f64], n: usize, r: usize, c: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != r) {
        for j in (0..n).filter(|&j| j != c) {
            out.push(a[i * n + j]);
        }
    }
    out
}

/// Adjugate, `adj[j][i] = (-1)^(i+j) det(minor(i, j))`.
fn adjugate(a: &[f64], n: usize) -> Vec<f64> {
    let mut adj = vec![0.0; n * n];
    if n == 1 {
        adj[0] = 1.0;
        return adj;
    }
    for i in 0..n {
        for j in 0..n {
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[j * n + i] = sign * det(&minor(a, n, i, j), n - 1);
        }
    }
    adj
}

/// A probe segment `y0 -> y1` at fixed `x`, searched for zeros of `det Phi_xy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub x: Vec<f64>,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
}

const SEGMENT_PIECES: usize = 16;

/// Fold check for square mixed Hessians.
///
/// Zeros of `det Phi_xy` are located by bisection along each segment. At each zero the kernel
/// vector `b` must satisfy `|<b, grad_y> det| > dir_tol`, and the second fundamental form of
/// `{Phi_x(x, y) : det = 0}`, which is `Hess_yy <u, Phi_x>` restricted to the tangent space
/// of the zero set, must have rank at least `kappa`.
pub fn check_fold(
    phase: &dyn Phase,
    segments: &[Segment],
    kappa: usize,
    rank_tol: f64,
    dir_tol: f64,
) -> Result<ConditionReport, PhaseError> {
    let (d, m) = (phase.x_dim(), phase.y_dim());
    if m != d {
        return Err(PhaseError::YDimension { expected: d, got: m });
    }
    let mut h = vec![0.0; d * d];
    let mut t = vec![0.0; d * d * d];
    let mut det_at = |x: &[f64], y: &[f64]| {
        phase.mixed_hessian(x, y, &mut h);
        det(&h, d)
    };
    let mut zeros: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (index, s) in segments.iter().enumerate() {
        check_shape(phase, index, &s.x, &s.y0)?;
        check_shape(phase, index, &s.x, &s.y1)?;
        let at = |t: f64| -> Vec<f64> { s.y0.iter().zip(&s.y1).map(|(a, b)| a + t * (b - a)).collect() };
        let mut t0 = 0.0;
        let mut g0 = det_at(&s.x, &at(0.0));
        if g0 == 0.0 {
            zeros.push((s.x.clone(), at(0.0)));
        }
        for k in 1..=SEGMENT_PIECES {
            let t1 = k as f64 / SEGMENT_PIECES as f64;
            let g1 = det_at(&s.x, &at(t1));
            if g1 == 0.0 {
                zeros.push((s.x.clone(), at(t1)));
            } else if g0 != 0.0 && (g0 < 0.0) != (g1 < 0.0) {
                let (mut lo, mut hi, mut glo) = (t0, t1, g0);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let gm = det_at(&s.x, &at(mid));
                    if gm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (gm < 0.0) == (glo < 0.0) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                zeros.push((s.x.clone(), at(0.5 * (lo + hi))));
            }
            t0 = t1;
            g0 = g1;
        }
    }
    let mut out = Vec::with_capacity(zeros.len());
    for (x, y) in zeros {
        phase.mixed_hessian(&x, &y, &mut h);
        phase.third(&x, &y, &mut t);
        let hm = to_matrix(&h, d, d);
        let svd = hm.svd(true, true);
        let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        let (kmin, kmax) = extreme_indices(&sv);
        let vt = svd.v_t.as_ref().expect("requested V");
        let uu = svd.u.as_ref().expect("requested U");
        let b: Vec<f64> = (0..d).map(|k| vt[(kmin, k)]).collect();
        let u: Vec<f64> = (0..d).map(|i| uu[(i, kmin)]).collect();
        let adj = adjugate(&h, d);
        // Jacobi: d_k det = tr(adj dH/dy_k)
        let grad_det: Vec<f64> = (0..d)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        s += adj[j * d + i] * t[(i * d + j) * d + k];
                    }
                }
                s
            })
            .collect();
        let transversal: f64 = grad_det.iter().zip(&b).map(|(g, bk)| g * bk).sum();
        let gn = norm(&grad_det);
        let mut c = contract_first(&t, &u, d);
        if gn > 0.0 {
            let n = nalgebra::DVector::from_iterator(d, grad_det.iter().map(|g| g / gn));
            let p = DMatrix::<f64>::identity(d, d) - &n * n.transpose();
            c = &p * c * &p;
        }
        let cs = singular_values(&c);
        let rank = count_above(&cs, rank_tol * cs[0].max(sv[kmax]));
        let fold_ok = transversal.abs() > dir_tol;
        out.push(ProbeOutcome {
            x,
            y,
            values: vec![("det_derivative", transversal), ("curvature_rank", rank as f64)],
            pass: fold_ok && rank >= kappa,
        });
    }
    let vacuous = out.is_empty();
    let mut report = ConditionReport::finish("fold", kappa, rank_tol, out);
    report.directional_tolerance = Some(dir_tol);
    if vacuous {
        report.note = Some("fold hypothesis vacuous here".to_string());
    }
    Ok(report)
}

fn extreme_indices(s: &[f64]) -> (usize, usize) {
    let mut kmin = 0;
    let mut kmax = 0;
    for (k, v) in s.iter().enumerate() {
        if *v < s[kmin] {
            kmin = k;
        }
        if *v > s[kmax] {
            kmax = k;
        }
    }
    (kmin, kmax)
}

/// Which part of the dyadic kernel split to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPart {
    /// Cutoff `eta_j(lambda (w_d - z_d)) eta0(lambda 2^-j |w' - z'| / eps)`.
    Main,
    /// Cutoff `eta_j(lambda (w_d - z_d)) (1 - eta0(lambda 2^-j |w' - z'| / eps))`.
    Tilde,
    /// No split: the kernel of `T T*`.
    Full,
}

fn check_lambda(lambda: f64) -> Result<(), PhaseError> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(PhaseError::Lambda(lambda));
    }
    Ok(())
}

/// `int b(w, z, y) e^{i lambda (phi(w, y) - phi(z, y))} dy` by the trapezoid rule on
/// `[-eps, eps]^m` with `n` intervals per axis, `eps` the amplitude radius.
///
/// Rejects grids coarser than a tenth of the local oscillation period.
pub fn kernel_piece(
    spec: &PhaseSpec,
    lambda: f64,
    j: u32,
    part: KernelPart,
    w: &[f64],
    z: &[f64],
    n: usize,
) -> Result<Complex64, PhaseError> {
    check_lambda(lambda)?;
    let (d, m) = (spec.x_dim(), spec.y_dim());
    check_shape(spec.phase.as_ref(), 0, w, &vec![0.0; m])?;
    check_shape(spec.phase.as_ref(), 0, z, &vec![0.0; m])?;
    if n < 4 {
        return Err(PhaseError::Quadrature { min: 4, got: n });
    }
    let eps = spec.amplitude.radius();
    let cut = match part {
        KernelPart::Full => 1.0,
        _ => {
            let dd = w[d - 1] - z[d - 1];
            let dp = norm(&w[..d - 1].iter().zip(&z[..d - 1]).map(|(a, b)| a - b).collect::<Vec<_>>());
            let e = chi_j(j, lambda * dd);
            let t = chi0(lambda * libm::ldexp(1.0, -(j as i32)) * dp / eps);
            match part {
                KernelPart::Main => e * t,
                _ => e * (1.0 - t),
            }
        }
    };
    let ax = spec.amplitude.x_factor(w) * spec.amplitude.x_factor(z);
    if cut == 0.0 || ax == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let h = 2.0 * eps / n as f64;
    let required = 2.0 * core::f64::consts::PI / 10.0;
    let total = libm::pow((n + 1) as f64, m as f64) as usize;
    let mut idx = vec![0usize; m];
    let mut y = vec![0.0; m];
    let (mut gw, mut gz) = (vec![0.0; m], vec![0.0; m]);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut worst_grad: f64 = 0.0;
    for _ in 0..total {
        for a in 0..m {
            y[a] = -eps + idx[a] as f64 * h;
        }
        let amp = spec.amplitude.y_factor(&y);
        if amp != 0.0 {
            spec.phase.grad_y(w, &y, &mut gw);
            spec.phase.grad_y(z, &y, &mut gz);
            let g = norm(&gw.iter().zip(&gz).map(|(a, b)| a - b).collect::<Vec<_>>());
            worst_grad = worst_grad.max(lambda * g);
            let ph = lambda * (spec.phase.value(w, &y) - spec.phase.value(z, &y));
            let (s, c) = libm::sincos(ph);
            acc += Complex64::new(c, s) * (amp * amp);
        }
        for a in (0..m).rev() {
            idx[a] += 1;
            if idx[a] <= n {
                break;
            }
            idx[a] = 0;
        }
    }
    if worst_grad * h > required {
        return Err(PhaseError::Resolution { spacing: h, required: required / worst_grad });
    }
    Ok(acc * (libm::pow(h, m as f64) * ax * cut))
}

/// Sampling of the `(w, z)` slab used by [`dyadic_kernel_sup`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSampling {
    /// Values of `lambda (w_d - z_d)` spread over the support of `eta_j`.
    pub normal: usize,
    /// Values of `|w' - z'|` per tangential axis (including zero).
    pub tangential: usize,
    /// Trapezoid intervals per y-axis.
    pub quadrature: usize,
}

impl Default for KernelSampling {
    fn default() -> Self {
        Self { normal: 9, tangential: 4, quadrature: 256 }
    }
}

/// `max |S_j(w, z)|` over pairs `w, z = +-(w - z)/2` sampling the support of the main piece.
///
/// Returns 0 when `2^j > eps lambda`, where the piece is treated as vanishing.
pub fn dyadic_kernel_sup(spec: &PhaseSpec, lambda: f64, j: u32, sampling: KernelSampling) -> Result<f64, PhaseError> {
    check_lambda(lambda)?;
    let d = spec.x_dim();
    let eps = spec.amplitude.radius();
    let scale = libm::ldexp(1.0, j as i32);
    if scale > eps * lambda {
        return Ok(0.0);
    }
    let nn = sampling.normal.max(2);
    let normals: Vec<f64> = (0..nn)
        .map(|k| {
            let f = k as f64 / (nn - 1) as f64;
            if j == 0 {
                f
            } else {
                // log-spaced over [2^(j-2), 2^j]; the midpoint 2^(j-1) is where eta_j = 1
                scale * 0.25 * libm::pow(4.0, f)
            }
        })
        .collect();
    let reach = eps * scale / lambda;
    let mut offsets: Vec<Vec<f64>> = vec![vec![0.0; d - 1]];
    for axis in 0..d - 1 {
        for k in 1..sampling.tangential {
            let c = k as f64 / sampling.tangential as f64;
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; d - 1];
                v[axis] = sign * c * reach;
                offsets.push(v);
            }
        }
    }
    let mut best: f64 = 0.0;
    let (mut w, mut z) = (vec![0.0; d], vec![0.0; d]);
    for &t in &normals {
        for off in &offsets {
            for a in 0..d - 1 {
                w[a] = 0.5 * off[a];
                z[a] = -0.5 * off[a];
            }
            w[d - 1] = 0.5 * t / lambda;
            z[d - 1] = -0.5 * t / lambda;
            let v = kernel_piece(spec, lambda, j, KernelPart::Main, &w, &z, sampling.quadrature)?;
            best = best.max(v.norm());
        }
    }
    Ok(best)
}

//! Extension, restriction and `f * mu^` on grids, operator norm estimates, and
//! Stein-Tomas ratios.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restrict_core::exponents::{to_f64, ExponentProfile};
use restrict_core::field::{GridSpec, SampledField};
use restrict_core::lorentz::{lorentz_norm, LorentzExponent};
use restrict_core::measure::{cis_neg, DiscreteMeasure};

use crate::error::{LabError, Result};
use crate::fft::FftNd;
use crate::nufft::{Nufft, NufftOptions, Sign};

/// Work (atoms times grid points) above which the NUFFT path is used.
pub const DIRECT_LIMIT: usize = 1 << 22;
/// Samples outside the inner half of the box may reach this fraction of the sup norm.
pub const SUPPORT_TOL: f64 = 1e-12;

fn check_dims(mu: &DiscreteMeasure, grid: &GridSpec) -> Result<()> {
    if mu.dim() != grid.dim() {
        return Err(LabError::Dimension(format!("measure in dimension {} on a {}-d grid", mu.dim(), grid.dim())));
    }
    Ok(())
}

/// `x_n = c + k h` with `k = n - floor(N/2)`; returns `c` per axis.
fn grid_centre(grid: &GridSpec) -> Vec<f64> {
    (0..grid.dim()).map(|a| grid.node(a, grid.points(a) / 2)).collect()
}

/// NUFFT points `2 pi h_a t_a` for the atoms `t` (or their negatives).
fn scaled_atoms(mu: &DiscreteMeasure, grid: &GridSpec, sign: f64) -> Vec<f64> {
    let d = mu.dim();
    let mut pts = Vec::with_capacity(mu.len() * d);
    for j in 0..mu.len() {
        for (a, t) in mu.atom(j).iter().enumerate() {
            pts.push(sign * 2.0 * PI * grid.spacing(a) * t);
        }
    }
    pts
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x -> sum_j g_j w_j e^{+2 pi i <t_j, x>}` on the grid.
pub fn extend(g: &[Complex64], mu: &DiscreteMeasure, grid: &GridSpec) -> Result<SampledField> {
    check_dims(mu, grid)?;
    if g.len() != mu.len() {
        return Err(LabError::Length { expected: mu.len(), got: g.len() });
    }
    if mu.len() * grid.len() <= DIRECT_LIMIT {
        return Ok(extend_direct(g, mu, grid));
    }
    let c = grid_centre(grid);
    let strengths: Vec<Complex64> = (0..mu.len())
        .map(|j| g[j] * mu.weights()[j] * cis_neg(-dot(mu.atom(j), &c)))
        .collect();
    let values = Nufft::new(grid.shape(), NufftOptions::default()).type1(&scaled_atoms(mu, grid, 1.0), &strengths, Sign::Plus);
    Ok(SampledField::new(grid.clone(), values)?)
}

fn extend_direct(g: &[Complex64], mu: &DiscreteMeasure, grid: &GridSpec) -> SampledField {
    let d = grid.dim();
    SampledField::from_fn(grid.clone(), |x| {
        (0..mu.len()).map(|j| g[j] * mu.weights()[j] * cis_neg(-dot(mu.atom(j), &x[..d]))).sum()
    })
}

/// `f^(t_j) = h^d sum_n f(x_n) e^{-2 pi i <x_n, t_j>}` at every atom.
pub fn restrict_values(f: &SampledField, mu: &DiscreteMeasure) -> Result<Vec<Complex64>> {
    let grid = f.grid();
    check_dims(mu, grid)?;
    let vol = f.cell_volume();
    if mu.len() * grid.len() <= DIRECT_LIMIT {
        let d = grid.dim();
        let mut x = [0.0; 3];
        let mut out = vec![Complex64::new(0.0, 0.0); mu.len()];
        for (n, v) in f.values().iter().enumerate() {
            if *v == Complex64::new(0.0, 0.0) {
                continue;
            }
            grid.coords(n, &mut x);
            for (j, o) in out.iter_mut().enumerate() {
                *o += v * cis_neg(dot(&x[..d], mu.atom(j)));
            }
        }
        return Ok(out.into_iter().map(|v| v * vol).collect());
    }
    let c = grid_centre(grid);
    let raw = Nufft::new(grid.shape(), NufftOptions::default()).type2(&scaled_atoms(mu, grid, 1.0), f.values(), Sign::Minus);
    Ok(raw.into_iter().enumerate().map(|(j, v)| v * cis_neg(dot(mu.atom(j), &c)) * vol).collect())
}

/// `sum_j w_j |f^(t_j)|^2`.
pub fn restrict_sq_integral(f: &SampledField, mu: &DiscreteMeasure) -> Result<f64> {
    let v = restrict_values(f, mu)?;
    Ok(v.iter().zip(mu.weights()).map(|(z, w)| w * z.norm_sqr()).sum())
}

/// `(f * mu^)(x_m) = h^d sum_n f(x_n) mu^(x_m - x_n)` on the grid.
///
/// Evaluated through `sum_j w_j e^{-2 pi i <t_j, x_m>} f^(-t_j)`, which is the same finite sum
/// without periodisation. Inputs must vanish outside the inner half of the box.
pub fn convolve_mu_hat(f: &SampledField, mu: &DiscreteMeasure) -> Result<SampledField> {
    let grid = f.grid();
    check_dims(mu, grid)?;
    if !f.supported_within(0.5, SUPPORT_TOL) {
        return Err(LabError::Support);
    }
    let reflected = mu.reflected();
    let fhat = restrict_values(f, &reflected)?;
    let c = grid_centre(grid);
    let strengths: Vec<Complex64> = (0..mu.len())
        .map(|j| fhat[j] * mu.weights()[j] * cis_neg(dot(mu.atom(j), &c)))
        .collect();
    let values = if mu.len() * grid.len() <= DIRECT_LIMIT {
        let d = grid.dim();
        let mut x = [0.0; 3];
        (0..grid.len())
            .map(|m| {
                grid.coords(m, &mut x);
                (0..mu.len()).map(|j| fhat[j] * mu.weights()[j] * cis_neg(dot(mu.atom(j), &x[..d]))).sum()
            })
            .collect()
    } else {
        Nufft::new(grid.shape(), NufftOptions::default()).type1(&scaled_atoms(mu, grid, 1.0), &strengths, Sign::Minus)
    };
    Ok(SampledField::new(grid.clone(), values)?)
}

/// The pairing `<f * mu^(-.), f>`, equal to [`restrict_sq_integral`] up to rounding.
pub fn tomas_pairing(f: &SampledField, mu: &DiscreteMeasure) -> Result<f64> {
    let conv = convolve_mu_hat(f, &mu.reflected())?;
    Ok(conv.inner(f)?.re)
}

/// A linear map between fields on one grid.
pub trait LinearOperator {
    fn grid(&self) -> &GridSpec;
    fn apply(&self, f: &SampledField) -> Result<SampledField>;
    fn apply_adjoint(&self, f: &SampledField) -> Result<SampledField>;
}

/// Multiplication by `symbol` in the DFT basis of the grid.
pub struct FourierMultiplier {
    grid: GridSpec,
    symbol: Vec<Complex64>,
    plan: FftNd,
}

impl FourierMultiplier {
    /// `symbol` is indexed like the unshifted DFT output.
    pub fn new(grid: GridSpec, symbol: Vec<Complex64>) -> Result<Self> {
        if symbol.len() != grid.len() {
            return Err(LabError::Length { expected: grid.len(), got: symbol.len() });
        }
        let plan = FftNd::new(grid.shape());
        Ok(Self { grid, symbol, plan })
    }

    /// Periodic convolution `f -> h^d sum_n f(x_n) k(x_m - x_n)` with `k` sampled at
    /// lattice offsets `r h`, `|r_a| <= N_a/2`.
    pub fn periodic_convolution(grid: GridSpec, kernel: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let d = grid.dim();
        let shape = grid.shape().to_vec();
        let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut m = [0usize; 3];
        let mut r = [0.0; 3];
        for (i, v) in c.iter_mut().enumerate() {
            grid.unflatten(i, &mut m[..d]);
            for a in 0..d {
                let k = if m[a] <= shape[a] / 2 { m[a] as f64 } else { m[a] as f64 - shape[a] as f64 };
                r[a] = k * grid.spacing(a);
            }
            *v = kernel(&r[..d]) * grid.cell_volume();
        }
        let plan = FftNd::new(&shape);
        plan.forward(&mut c);
        Ok(Self { grid, symbol: c, plan })
    }

    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    fn multiply(&self, f: &SampledField, conj: bool) -> Result<SampledField> {
        if f.grid() != &self.grid {
            return Err(LabError::Dimension("field grid differs from the operator grid".into()));
        }
        let mut v = f.values().to_vec();
        self.plan.forward(&mut v);
        let n = v.len() as f64;
        for (a, s) in v.iter_mut().zip(&self.symbol) {
            *a *= if conj { s.conj() } else { *s } / n;
        }
        self.plan.inverse(&mut v);
        Ok(SampledField::new(self.grid.clone(), v)?)
    }
}

impl LinearOperator for FourierMultiplier {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn apply(&self, f: &SampledField) -> Result<SampledField> {
        self.multiply(f, false)
    }

    fn apply_adjoint(&self, f: &SampledField) -> Result<SampledField> {
        self.multiply(f, true)
    }
}

/// `f -> f * mu^` (self-adjoint for real atoms).
pub struct MuHatConvolution<'a> {
    pub mu: &'a DiscreteMeasure,
    pub grid: GridSpec,
}

impl LinearOperator for MuHatConvolution<'_> {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn apply(&self, f: &SampledField) -> Result<SampledField> {
        convolve_mu_hat(f, self.mu)
    }

    fn apply_adjoint(&self, f: &SampledField) -> Result<SampledField> {
        convolve_mu_hat(f, self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    PowerIteration,
    TestFamilyMax,
}

impl NormMethod {
    pub fn name(self) -> &'static str {
        match self {
            NormMethod::PowerIteration => "power-iteration",
            NormMethod::TestFamilyMax => "test-family-max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorNormEstimate {
    pub value: f64,
    pub method: NormMethod,
    /// Iterations for power iteration, members used for a family maximum.
    pub count: usize,
    /// Relative change of the last step (power iteration only).
    pub residual: f64,
    /// Set when power iteration stopped at `max_iter` before reaching `tol`.
    pub not_converged: bool,
    pub lower_bound: bool,
    /// Rayleigh quotients `||T v_k||^2` of the iterates.
    pub rayleigh: Vec<f64>,
    pub notes: Vec<String>,
}

/// Power iteration on `T* T` from a seeded random start; the estimate is `sqrt` of the top
/// eigenvalue.
pub fn l2_operator_norm(op: &dyn LinearOperator, tol: f64, max_iter: usize, seed: u64) -> Result<OperatorNormEstimate> {
    let grid = op.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = SampledField::from_fn(grid, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    v = v.scaled(Complex64::new(1.0 / v.l2_norm(), 0.0));
    let mut rayleigh = Vec::new();
    let mut prev = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let w = op.apply_adjoint(&op.apply(&v)?)?;
        let lambda = w.inner(&v)?.re;
        rayleigh.push(lambda);
        let norm = w.l2_norm();
        if norm == 0.0 {
            residual = 0.0;
            prev = 0.0;
            break;
        }
        residual = if lambda > 0.0 { (lambda - prev).abs() / lambda } else { 0.0 };
        prev = lambda;
        v = w.scaled(Complex64::new(1.0 / norm, 0.0));
        if residual <= tol {
            break;
        }
    }
    let not_converged = residual > tol;
    let notes = if not_converged { vec![format!("stopped after {max_iter} iterations, residual {residual:e}")] } else { vec![] };
    Ok(OperatorNormEstimate {
        value: prev.max(0.0).sqrt(),
        method: NormMethod::PowerIteration,
        count: iterations,
        residual,
        not_converged,
        lower_bound: false,
        rayleigh,
        notes,
    })
}

/// `max ||T f||_out / ||f||_in` over a family; zero-norm members are skipped with a note.
pub fn lorentz_operator_lower_bound(
    op: &dyn LinearOperator,
    in_exp: LorentzExponent,
    out_exp: LorentzExponent,
    family: &[SampledField],
) -> Result<OperatorNormEstimate> {
    let mut best: f64 = 0.0;
    let mut used = 0;
    let mut notes = Vec::new();
    for (i, f) in family.iter().enumerate() {
        let n = lorentz_norm(f, in_exp);
        if n == 0.0 {
            notes.push(format!("member {i} has zero norm and was skipped"));
            continue;
        }
        used += 1;
        best = best.max(lorentz_norm(&op.apply(f)?, out_exp) / n);
    }
    if used == 0 {
        return Err(LabError::ZeroInput);
    }
    Ok(OperatorNormEstimate {
        value: best,
        method: NormMethod::TestFamilyMax,
        count: used,
        residual: 0.0,
        not_converged: false,
        lower_bound: true,
        rayleigh: vec![],
        notes,
    })
}

/// `sqrt(int |f^|^2 dmu) / ||f||_{L^{p_circ, 2}}`.
pub fn stein_tomas_ratio(f: &SampledField, mu: &DiscreteMeasure, profile: &ExponentProfile) -> Result<f64> {
    let e = LorentzExponent::new(to_f64(&profile.p_circ), 2.0)?;
    let n = lorentz_norm(f, e);
    if n == 0.0 {
        return Err(LabError::ZeroInput);
    }
    Ok(restrict_sq_integral(f, mu)?.sqrt() / n)
}

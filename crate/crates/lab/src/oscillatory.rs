//! Quadrature for oscillatory integral operators
//! `T f(x) = int zeta(x, y) e^{i lambda phi(x, y)} f(y) dy` and lambda-scaling experiments.
//!
//! Sums run over the nodes of a y-grid (Riemann sums, which equal the trapezoid rule since
//! the amplitude vanishes at the box edges). Phases linear in `x` go through a type-1 NUFFT.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restrict_core::bump::chi0;
use restrict_core::field::{GridSpec, SampledField};
use restrict_core::fit::{loglog_fit, FitResult};
use restrict_core::lorentz::{lorentz_norm, LorentzExponent};
use restrict_core::phase::PhaseSpec;

use crate::error::{LabError, Result};
use crate::nufft::{Nufft, NufftOptions, Sign};
use crate::restriction::{l2_operator_norm, LinearOperator};

/// Pairs of (x, y) nodes below which sums are done directly.
pub const DIRECT_LIMIT: usize = 1 << 16;
/// Points per oscillation period the y-grid must provide.
pub const Y_POINTS_PER_PERIOD: f64 = 10.0;

/// `max |grad_y phi|` over a 5-point tensor sample of `[-r, r]^(d + m)`.
pub fn max_y_gradient(spec: &PhaseSpec) -> f64 {
    max_gradient(spec, false)
}

/// `max |grad_x phi|` over the same sample.
pub fn max_x_gradient(spec: &PhaseSpec) -> f64 {
    max_gradient(spec, true)
}

fn max_gradient(spec: &PhaseSpec, wrt_x: bool) -> f64 {
    let (d, m) = (spec.x_dim(), spec.y_dim());
    let r = spec.amplitude.radius();
    let n = d + m;
    let mut idx = vec![0usize; n];
    let mut p = vec![0.0; n];
    let mut g = vec![0.0; if wrt_x { d } else { m }];
    let mut best: f64 = 0.0;
    for _ in 0..5usize.pow(n as u32) {
        for a in 0..n {
            p[a] = -r + idx[a] as f64 * r / 2.0;
        }
        let (x, y) = p.split_at(d);
        if wrt_x {
            spec.phase.grad_x(x, y, &mut g);
        } else {
            spec.phase.grad_y(x, y, &mut g);
        }
        best = best.max(g.iter().map(|v| v * v).sum::<f64>().sqrt());
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] < 5 {
                break;
            }
            idx[a] = 0;
        }
    }
    best
}

/// Largest y-spacing allowed at frequency `lambda`.
pub fn required_y_spacing(spec: &PhaseSpec, lambda: f64) -> f64 {
    2.0 * PI / (Y_POINTS_PER_PERIOD * lambda * max_y_gradient(spec))
}

fn check_inputs(spec: &PhaseSpec, lambda: f64, y_grid: &GridSpec, x_grid: &GridSpec) -> Result<()> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(LabError::Invalid(format!("lambda must be finite and at least 1, got {lambda}")));
    }
    if y_grid.dim() != spec.y_dim() || x_grid.dim() != spec.x_dim() {
        return Err(LabError::Dimension(format!(
            "phase takes x in R^{} and y in R^{}, grids have {} and {} axes",
            spec.x_dim(),
            spec.y_dim(),
            x_grid.dim(),
            y_grid.dim()
        )));
    }
    let need = required_y_spacing(spec, lambda);
    for axis in 0..y_grid.dim() {
        if y_grid.spacing(axis) > need {
            return Err(LabError::Resolution {
                what: format!("y-grid spacing on axis {axis}"),
                required: need,
                actual: y_grid.spacing(axis),
            });
        }
    }
    Ok(())
}

/// Nodes of a grid as a flat list.
fn nodes(grid: &GridSpec) -> Vec<f64> {
    let d = grid.dim();
    let mut out = vec![0.0; grid.len() * d];
    for (i, c) in out.chunks_mut(d).enumerate() {
        grid.coords(i, c);
    }
    out
}

/// Per-axis NUFFT offsets: node `n` of axis `a` is `c_a + k h_a` with `k = n - floor(N/2)`.
fn centres(grid: &GridSpec) -> Vec<f64> {
    (0..grid.dim()).map(|a| grid.node(a, grid.points(a) / 2)).collect()
}

/// `T_lambda f` on `x_grid` for samples `f` on a y-grid.
pub fn apply_t_lambda(spec: &PhaseSpec, lambda: f64, f: &SampledField, x_grid: &GridSpec) -> Result<SampledField> {
    apply_t_lambda_with(spec, lambda, f, x_grid, NufftOptions::default())
}

pub fn apply_t_lambda_with(
    spec: &PhaseSpec,
    lambda: f64,
    f: &SampledField,
    x_grid: &GridSpec,
    opts: NufftOptions,
) -> Result<SampledField> {
    let y_grid = f.grid();
    check_inputs(spec, lambda, y_grid, x_grid)?;
    let (d, m) = (spec.x_dim(), spec.y_dim());
    let amp = &spec.amplitude;
    let ys = nodes(y_grid);
    let hy = y_grid.cell_volume();
    // y nodes carrying mass
    let live: Vec<(usize, Complex64)> = f
        .values()
        .iter()
        .enumerate()
        .filter_map(|(j, v)| {
            let a = amp.y_factor(&ys[j * m..(j + 1) * m]);
            (a != 0.0 && *v != Complex64::new(0.0, 0.0)).then(|| (j, v * (a * hy)))
        })
        .collect();
    let xs = nodes(x_grid);
    let xw: Vec<f64> = xs.chunks(d).map(|x| amp.x_factor(x)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); x_grid.len()];
    if live.is_empty() {
        return Ok(SampledField::new(x_grid.clone(), out)?);
    }
    if !spec.phase.linear_in_x() || live.len().saturating_mul(x_grid.len()) <= DIRECT_LIMIT {
        for (i, o) in out.iter_mut().enumerate() {
            if xw[i] == 0.0 {
                continue;
            }
            let x = &xs[i * d..(i + 1) * d];
            let s: Complex64 = live
                .iter()
                .map(|&(j, c)| c * Complex64::from_polar(1.0, lambda * spec.phase.value(x, &ys[j * m..(j + 1) * m])))
                .sum();
            *o = s * xw[i];
        }
        return Ok(SampledField::new(x_grid.clone(), out)?);
    }
    // phi(x, y) = phi(c, y) + <x - c, Gamma(y)> with x - c = k h
    let c = centres(x_grid);
    let h: Vec<f64> = (0..d).map(|a| x_grid.spacing(a)).collect();
    let mut gamma = vec![0.0; d];
    let mut points = Vec::with_capacity(live.len() * d);
    let strengths: Vec<Complex64> = live
        .iter()
        .map(|&(j, s)| {
            let y = &ys[j * m..(j + 1) * m];
            spec.phase.grad_x(&c, y, &mut gamma);
            points.extend(gamma.iter().zip(&h).map(|(g, h)| lambda * h * g));
            s * Complex64::from_polar(1.0, lambda * spec.phase.value(&c, y))
        })
        .collect();
    let plan = Nufft::new(x_grid.shape(), opts);
    let coeffs = plan.type1(&points, &strengths, Sign::Plus);
    for ((o, v), w) in out.iter_mut().zip(coeffs).zip(&xw) {
        *o = v * *w;
    }
    Ok(SampledField::new(x_grid.clone(), out)?)
}

/// `T_lambda^* g` on `y_grid`: `int zeta(x, y) e^{-i lambda phi(x, y)} g(x) dx`.
pub fn apply_t_lambda_adjoint(spec: &PhaseSpec, lambda: f64, g: &SampledField, y_grid: &GridSpec) -> Result<SampledField> {
    let x_grid = g.grid();
    check_inputs(spec, lambda, y_grid, x_grid)?;
    let (d, m) = (spec.x_dim(), spec.y_dim());
    let amp = &spec.amplitude;
    let xs = nodes(x_grid);
    let hx = x_grid.cell_volume();
    let live: Vec<(usize, Complex64)> = g
        .values()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let a = amp.x_factor(&xs[i * d..(i + 1) * d]);
            (a != 0.0 && *v != Complex64::new(0.0, 0.0)).then(|| (i, v * (a * hx)))
        })
        .collect();
    let ys = nodes(y_grid);
    if spec.phase.linear_in_x() && live.len().saturating_mul(y_grid.len()) > DIRECT_LIMIT {
        // sum_k G_k e^{-i lambda <c + k h, Gamma(y)>}, a type-2 transform at lambda h Gamma(y)
        let c = centres(x_grid);
        let h: Vec<f64> = (0..d).map(|a| x_grid.spacing(a)).collect();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); x_grid.len()];
        for &(i, v) in &live {
            coeffs[i] = v;
        }
        let mut gamma = vec![0.0; d];
        let mut points = Vec::with_capacity(y_grid.len() * d);
        for y in ys.chunks(m) {
            spec.phase.grad_x(&c, y, &mut gamma);
            points.extend(gamma.iter().zip(&h).map(|(g, h)| lambda * h * g));
        }
        let plan = Nufft::new(x_grid.shape(), NufftOptions::default());
        let sums = plan.type2(&points, &coeffs, Sign::Minus);
        let out = ys
            .chunks(m)
            .zip(sums)
            .map(|(y, s)| {
                let a = amp.y_factor(y);
                if a == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                s * Complex64::from_polar(a, -lambda * spec.phase.value(&c, y))
            })
            .collect();
        return Ok(SampledField::new(y_grid.clone(), out)?);
    }
    let out = (0..y_grid.len())
        .map(|j| {
            let y = &ys[j * m..(j + 1) * m];
            let a = amp.y_factor(y);
            if a == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let s: Complex64 = live
                .iter()
                .map(|&(i, c)| c * Complex64::from_polar(1.0, -lambda * spec.phase.value(&xs[i * d..(i + 1) * d], y)))
                .sum();
            s * a
        })
        .collect();
    Ok(SampledField::new(y_grid.clone(), out)?)
}

/// `||f||_inf sup_x sum_y |zeta(x, y)| h^m`, a bound for `sup |T_lambda f|` on `x_grid`.
pub fn sup_bound(spec: &PhaseSpec, f: &SampledField, x_grid: &GridSpec) -> f64 {
    let amp = &spec.amplitude;
    let (d, m) = (spec.x_dim(), spec.y_dim());
    let ys = nodes(f.grid());
    let ymass: f64 = ys.chunks(m).map(|y| amp.y_factor(y)).sum::<f64>() * f.cell_volume();
    let xmax = nodes(x_grid).chunks(d).map(|x| amp.x_factor(x)).fold(0.0, f64::max);
    f.sup_norm() * ymass * xmax
}

/// Relative sup-norm change of `T_lambda f` when every y-axis is refined twofold.
pub fn refinement_error(
    spec: &PhaseSpec,
    lambda: f64,
    f: impl Fn(&[f64]) -> Complex64,
    y_grid: &GridSpec,
    x_grid: &GridSpec,
) -> Result<f64> {
    let fine = GridSpec::new(
        (0..y_grid.dim()).map(|a| y_grid.half_width(a)).collect(),
        (0..y_grid.dim()).map(|a| 2 * y_grid.points(a)).collect(),
    )?;
    let coarse = apply_t_lambda(spec, lambda, &SampledField::from_fn(y_grid.clone(), &f), x_grid)?;
    let refined = apply_t_lambda(spec, lambda, &SampledField::from_fn(fine, &f), x_grid)?;
    let diff = coarse.values().iter().zip(refined.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = refined.sup_norm();
    if scale == 0.0 {
        return Ok(diff);
    }
    Ok(diff / scale)
}

/// `T_lambda^* T_lambda` on the y-grid, for power iteration.
pub struct NormalOperator<'a> {
    pub spec: &'a PhaseSpec,
    pub lambda: f64,
    pub y_grid: GridSpec,
    pub x_grid: GridSpec,
}

impl LinearOperator for NormalOperator<'_> {
    fn grid(&self) -> &GridSpec {
        &self.y_grid
    }

    fn apply(&self, f: &SampledField) -> Result<SampledField> {
        let t = apply_t_lambda(self.spec, self.lambda, f, &self.x_grid)?;
        apply_t_lambda_adjoint(self.spec, self.lambda, &t, &self.y_grid)
    }

    fn apply_adjoint(&self, f: &SampledField) -> Result<SampledField> {
        self.apply(f)
    }
}

/// `||T_lambda||_{L^2 -> L^2}` by power iteration on `T* T`.
pub fn l2_norm_t_lambda(spec: &PhaseSpec, lambda: f64, y_grid: &GridSpec, x_grid: &GridSpec, seed: u64) -> Result<f64> {
    let op = NormalOperator { spec, lambda, y_grid: y_grid.clone(), x_grid: x_grid.clone() };
    // power iteration on a self-adjoint T*T returns sqrt of its top eigenvalue squared
    let est = l2_operator_norm(&op, 1e-7, 300, seed)?;
    Ok(est.value.sqrt())
}

/// Test inputs on the y-grid, each restricted to the amplitude support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMember {
    Constant,
    /// `chi0(sqrt(lambda) |y - y0 e_1|)`, with `y0` in units of the amplitude radius / 0.6.
    Slab { centre_tenths: i32 },
    /// Seeded trigonometric polynomial of low degree.
    Random,
}

impl FamilyMember {
    pub fn name(&self) -> String {
        match self {
            FamilyMember::Constant => "constant".into(),
            FamilyMember::Slab { centre_tenths } => format!("slab{:+.1}", *centre_tenths as f64 / 10.0),
            FamilyMember::Random => "random".into(),
        }
    }

    /// The default family: constant, slabs at `y_1 = 0` and `0.5`, and one random field.
    pub fn standard() -> Vec<FamilyMember> {
        vec![
            FamilyMember::Constant,
            FamilyMember::Slab { centre_tenths: 0 },
            FamilyMember::Slab { centre_tenths: 5 },
            FamilyMember::Random,
        ]
    }

    pub fn sample(&self, spec: &PhaseSpec, lambda: f64, grid: &GridSpec, seed: u64) -> SampledField {
        let amp = spec.amplitude;
        let m = grid.dim();
        let modes: Vec<(Vec<i32>, Complex64)> = match self {
            FamilyMember::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..8)
                    .map(|_| {
                        let k = (0..m).map(|_| rng.gen_range(-3..=3)).collect();
                        (k, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        let r = amp.radius();
        SampledField::from_fn(grid.clone(), |y| {
            if amp.y_factor(y) == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            match self {
                FamilyMember::Constant => Complex64::new(1.0, 0.0),
                FamilyMember::Slab { centre_tenths } => {
                    let y0 = *centre_tenths as f64 / 10.0 * r;
                    let dist = y.iter().enumerate().map(|(a, v)| if a == 0 { (v - y0).powi(2) } else { v * v }).sum::<f64>();
                    Complex64::new(chi0(dist.sqrt() * lambda.sqrt()), 0.0)
                }
                FamilyMember::Random => modes
                    .iter()
                    .map(|(k, c)| {
                        let t: f64 = k.iter().zip(y).map(|(k, y)| *k as f64 * y).sum();
                        c * Complex64::from_polar(1.0, PI * t / r)
                    })
                    .sum(),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingOptions {
    pub lambdas: Vec<f64>,
    /// Target exponent `q`; output norms are `L^{q,2}`.
    pub q: f64,
    pub family: Vec<FamilyMember>,
    /// Output samples per oscillation period of `x -> lambda phi(x, y)`.
    pub x_points_per_period: f64,
    /// Lambdas whose y-grid or x-grid would exceed these sizes are dropped.
    pub max_y_points: usize,
    pub max_x_points: usize,
    pub nufft: NufftOptions,
    /// Recompute the smallest lambda with both grids refined twofold.
    pub doubling_check: bool,
    pub seed: u64,
}

impl ScalingOptions {
    pub fn new(lambdas: Vec<f64>, q: f64) -> Self {
        Self {
            lambdas,
            q,
            family: FamilyMember::standard(),
            x_points_per_period: 4.0,
            max_y_points: 1 << 24,
            max_x_points: 1 << 22,
            nufft: NufftOptions { spread: 8, oversample: 2.0 },
            doubling_check: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub lambdas: Vec<f64>,
    /// `max ||T f||_{L^{q,2}} / ||f||_2` over the family, per lambda.
    pub ratios: Vec<f64>,
    /// Family member attaining each maximum.
    pub best: Vec<String>,
    pub fit: FitResult,
    /// `-d / q`.
    pub target_slope: f64,
    /// `(lambda, ratio, ratio on grids refined twofold)`.
    pub doubling: Option<(f64, f64, f64)>,
    pub notes: Vec<String>,
}

impl ScalingReport {
    /// Relative change of the doubling check.
    pub fn doubling_change(&self) -> Option<f64> {
        self.doubling.map(|(_, a, b)| (a - b).abs() / b)
    }
}

/// Grids for one lambda: y spacing at the required rule, x spacing at `x_ppp` points per period.
fn grids_for(spec: &PhaseSpec, lambda: f64, x_ppp: f64, refine: usize) -> Result<(GridSpec, GridSpec)> {
    let r = spec.amplitude.radius();
    let gy = max_y_gradient(spec).max(1.0);
    let gx = max_x_gradient(spec).max(1.0);
    let count = |h: f64| {
        let n = (2.0 * r / h).ceil() as usize * refine;
        (n + n % 2).max(8)
    };
    let ny = count(2.0 * PI / (Y_POINTS_PER_PERIOD * lambda * gy));
    let nx = count(2.0 * PI / (x_ppp * lambda * gx));
    Ok((GridSpec::isotropic(spec.y_dim(), r, ny)?, GridSpec::isotropic(spec.x_dim(), r, nx)?))
}

fn family_ratio(spec: &PhaseSpec, lambda: f64, opts: &ScalingOptions, y: &GridSpec, x: &GridSpec) -> Result<(f64, String)> {
    let e = LorentzExponent::new(opts.q, 2.0)?;
    let mut best = (0.0, String::new());
    for (i, member) in opts.family.iter().enumerate() {
        let f = member.sample(spec, lambda, y, opts.seed.wrapping_add(i as u64));
        let n = f.l2_norm();
        if n == 0.0 {
            continue;
        }
        let t = apply_t_lambda_with(spec, lambda, &f, x, opts.nufft)?;
        let r = lorentz_norm(&t, e) / n;
        if r > best.0 {
            best = (r, member.name());
        }
    }
    if best.0 == 0.0 {
        return Err(LabError::ZeroInput);
    }
    Ok(best)
}

pub fn scaling_experiment(spec: &PhaseSpec, opts: &ScalingOptions) -> Result<ScalingReport> {
    if opts.lambdas.len() < 4 {
        return Err(LabError::Invalid("at least 4 values of lambda are needed".into()));
    }
    let ratio0 = opts.lambdas[1] / opts.lambdas[0];
    let geometric = ratio0 > 1.0
        && opts.lambdas.windows(2).all(|w| ((w[1] / w[0]) / ratio0 - 1.0).abs() < 1e-9);
    if !geometric {
        return Err(LabError::Invalid("lambda values must form an increasing geometric sequence".into()));
    }
    if opts.family.is_empty() {
        return Err(LabError::Invalid("the test family is empty".into()));
    }
    let mut report = ScalingReport {
        lambdas: Vec::new(),
        ratios: Vec::new(),
        best: Vec::new(),
        fit: FitResult { slope: 0.0, intercept: 0.0, max_residual: 0.0, count: 0 },
        target_slope: -(spec.x_dim() as f64) / opts.q,
        doubling: None,
        notes: Vec::new(),
    };
    for &lambda in &opts.lambdas {
        let (y, x) = grids_for(spec, lambda, opts.x_points_per_period, 1)?;
        if y.len() > opts.max_y_points || x.len() > opts.max_x_points {
            report.notes.push(format!(
                "lambda {lambda} dropped: needs {} y-nodes and {} x-nodes",
                y.len(),
                x.len()
            ));
            continue;
        }
        let (r, name) = family_ratio(spec, lambda, opts, &y, &x)?;
        report.lambdas.push(lambda);
        report.ratios.push(r);
        report.best.push(name);
    }
    if report.lambdas.len() < 4 {
        return Err(LabError::Invalid(format!(
            "only {} lambda values could be resolved, at least 4 are needed",
            report.lambdas.len()
        )));
    }
    let pts: Vec<(f64, f64)> = report.lambdas.iter().copied().zip(report.ratios.iter().copied()).collect();
    report.fit = loglog_fit(&pts)?;
    if opts.doubling_check {
        let lambda = report.lambdas[0];
        let (y, x) = grids_for(spec, lambda, opts.x_points_per_period, 2)?;
        let (r, _) = family_ratio(spec, lambda, opts, &y, &x)?;
        report.doubling = Some((lambda, report.ratios[0], r));
    }
    Ok(report)
}

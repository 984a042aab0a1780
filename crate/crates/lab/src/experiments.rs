//! Experiment runners shared by the subcommands and the acceptance suite. Each returns the
//! tables to write, a verdict and a few summary lines.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restrict_core::bump::chi0;
use restrict_core::exponents::{
    exponent_profile, int, oscillatory_exponents, rat, to_f64, verify_identities, ExponentProfile, Rational,
};
use restrict_core::error::PhaseError;
use restrict_core::field::{GridSpec, SampledField};
use restrict_core::fit::FitResult;
use restrict_core::lorentz::{lorentz_norm, LorentzExponent};
use restrict_core::measure::{
    ball_regularity_profile, fourier_decay_profile, make_cantor_measure, make_random_cantor_measure,
    make_sphere_measure, DiscreteMeasure,
};
use restrict_core::phase::{
    check_fold, dyadic_kernel_sup, KernelSampling, PhaseSpec, Segment, DEFAULT_DIRECTIONAL_TOL, DEFAULT_RANK_TOL,
};

use crate::error::{LabError, Result};
use crate::io::read_measure;
use crate::knapp::{knapp_sharpness_experiment, KnappOptions};
use crate::oscillatory::{scaling_experiment, ScalingOptions};
use crate::report::{Cell, ReportTable};
use crate::restriction::{extend, restrict_sq_integral, restrict_values, tomas_pairing};
use crate::spectral::dyadic_piece;

/// Tables keyed by file stem suffix (`""` for the main table), verdict and summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub tables: Vec<(String, ReportTable)>,
    pub pass: bool,
    pub summary: Vec<String>,
}

impl Outcome {
    fn new(table: ReportTable) -> Self {
        Self { tables: vec![(String::new(), table)], pass: true, summary: Vec::new() }
    }

    fn with(mut self, suffix: &str, table: ReportTable) -> Self {
        self.tables.push((suffix.to_string(), table));
        self
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.summary.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.summary.push(format!("     {line}"));
    }

    /// Merges another outcome, prefixing its table suffixes.
    pub fn absorb(&mut self, prefix: &str, other: Outcome) {
        for (s, t) in other.tables {
            let name = if s.is_empty() { prefix.to_string() } else { format!("{prefix}_{s}") };
            self.tables.push((name, t));
        }
        self.pass &= other.pass;
        self.summary.extend(other.summary);
    }

    pub fn main_table(&self) -> &ReportTable {
        &self.tables[0].1
    }
}

fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().copied().fold(0.0, f64::max);
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn fit_table(rows: &[(&str, FitResult, Option<f64>)]) -> Result<ReportTable> {
    let mut t = ReportTable::new(["quantity", "slope", "intercept", "max_residual", "points", "target"]);
    for (name, fit, target) in rows {
        t.push(vec![
            (*name).into(),
            fit.slope.into(),
            fit.intercept.into(),
            fit.max_residual.into(),
            fit.count.into(),
            target.map_or(Cell::Text(String::new()), Cell::Real),
        ])?;
    }
    Ok(t)
}

fn profile_row(p: &ExponentProfile, ok: bool) -> Vec<Cell> {
    vec![
        p.d.to_string().into(),
        p.a.to_string().into(),
        p.b.to_string().into(),
        p.p_circ.to_string().into(),
        p.theta.to_string().into(),
        p.gamma.to_string().into(),
        p.rho.to_string().into(),
        p.sigma.to_string().into(),
        ok.into(),
    ]
}

const PROFILE_COLUMNS: [&str; 9] = ["d", "a", "b", "p_circ", "theta", "gamma", "rho", "sigma", "identities"];

/// The identity checks on `trials` random valid `(d, a, b)` and the two sphere profiles.
pub fn identity_suite(trials: usize, seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = ReportTable::new(PROFILE_COLUMNS);
    let mut cases = vec![(3u32, int(2), int(1)), (2, int(1), rat(1, 2))];
    for _ in 0..trials {
        let d = rng.gen_range(1..=8u32);
        let a = rat(d as i64 * rng.gen_range(1..1000), 1000);
        let b = &a * rat(rng.gen_range(1..=1000), 2000);
        cases.push((d, a, b));
    }
    let mut failed = 0;
    for (d, a, b) in cases {
        let p = exponent_profile(d, a, b)?;
        let ok = verify_identities(&p).all();
        failed += usize::from(!ok);
        table.push(profile_row(&p, ok))?;
    }
    let mut out = Outcome::new(table);
    out.check(failed == 0, format!("identities hold on {} profiles ({failed} failures)", trials + 2));
    Ok(out)
}

/// All exponents of one profile, plus the oscillatory ones for `kappa`.
pub fn exponent_table(d: u32, a: Rational, b: Rational, kappa: Option<u32>) -> Result<Outcome> {
    let p = exponent_profile(d, a, b)?;
    let report = verify_identities(&p);
    let mut table = ReportTable::new(["quantity", "exact", "value"]);
    let mut push = |name: &str, q: &Rational| table.push(vec![name.into(), q.to_string().into(), to_f64(q).into()]);
    for (name, q) in [
        ("p_circ", &p.p_circ),
        ("p_circ_dual", &p.p_circ_dual),
        ("theta", &p.theta),
        ("gamma", &p.gamma),
        ("rho", &p.rho),
        ("sigma", &p.sigma),
        ("rho_dual", &p.rho_dual),
        ("sigma_dual", &p.sigma_dual),
    ] {
        push(name, q)?;
    }
    if let Some(k) = kappa {
        let o = oscillatory_exponents(k);
        if let Ok(q) = o.q_circ() {
            push("q_circ", q)?;
        }
        push("q1", &o.q1)?;
        push("rho1", &o.rho1)?;
        push("sigma1", &o.sigma1)?;
    }
    let mut out = Outcome::new(table);
    for (name, ok) in report.named() {
        out.check(ok, format!("identity {name}"));
    }
    Ok(out)
}

/// Exact values at `d = 3`, `a = 2`, `b = 1` and the oscillatory exponents at `kappa = 2, 1`.
pub fn exponent_cross_checks() -> Result<Outcome> {
    let p = exponent_profile(3, int(2), int(1))?;
    let o2 = oscillatory_exponents(2);
    let o1 = oscillatory_exponents(1);
    let d = int(3);
    let rows: Vec<(&str, Rational, Rational)> = vec![
        ("p_circ", p.p_circ.clone(), rat(4, 3)),
        ("theta", p.theta.clone(), rat(1, 2)),
        ("gamma", p.gamma.clone(), rat(1, 3)),
        ("rho", p.rho.clone(), rat(6, 5)),
        ("sigma", p.sigma.clone(), int(3)),
        ("q_circ(kappa=2)", o2.q_circ()?.clone(), int(4)),
        ("(2d+2)/(d-1) at d=3", (int(2) * &d + int(2)) / (&d - int(1)), int(4)),
        ("q1(kappa=1)", o1.q1.clone(), int(3)),
    ];
    let mut table = ReportTable::new(["quantity", "value", "expected", "pass"]);
    let mut out_rows = Vec::new();
    for (name, got, want) in rows {
        let ok = got == want;
        table.push(vec![name.into(), got.to_string().into(), want.to_string().into(), ok.into()])?;
        out_rows.push((name, ok, got));
    }
    let mut out = Outcome::new(table);
    for (name, ok, got) in out_rows {
        out.check(ok, format!("{name} = {got}"));
    }
    Ok(out)
}

/// Measures the subcommands can build.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureSource {
    Sphere { d: usize, n: usize },
    Cantor { ratio: f64, levels: u32 },
    RandomCantor { ratio: f64, levels: u32, seed: u64 },
    File(PathBuf),
}

impl MeasureSource {
    pub fn build(&self) -> Result<DiscreteMeasure> {
        Ok(match self {
            MeasureSource::Sphere { d, n } => make_sphere_measure(*d, *n)?,
            MeasureSource::Cantor { ratio, levels } => make_cantor_measure(*ratio, *levels)?,
            MeasureSource::RandomCantor { ratio, levels, seed } => make_random_cantor_measure(*ratio, *levels, *seed)?,
            MeasureSource::File(p) => read_measure(p)?,
        })
    }

    /// Frostman exponent and Fourier decay known in closed form, if any.
    pub fn known_exponents(&self) -> (Option<f64>, Option<f64>) {
        match self {
            MeasureSource::Sphere { d, .. } => (Some(*d as f64 - 1.0), Some((*d as f64 - 1.0) / 2.0)),
            MeasureSource::Cantor { ratio, .. } => (Some(2f64.ln() / (1.0 / ratio).ln()), None),
            _ => (None, None),
        }
    }

    /// Default radii for ball counts (descending, at most 1).
    pub fn default_ball_radii(&self) -> Vec<f64> {
        let base = match self {
            MeasureSource::Cantor { ratio, .. } | MeasureSource::RandomCantor { ratio, .. } => *ratio,
            _ => 0.5,
        };
        (2..=8).map(|k| base.powi(k)).collect()
    }

    /// Default frequencies for the decay fit.
    pub fn default_frequencies(&self) -> Vec<f64> {
        match self {
            MeasureSource::Cantor { ratio, .. } | MeasureSource::RandomCantor { ratio, .. } => {
                (1..=6).map(|k| (1.0 / ratio).powi(k)).collect()
            }
            _ => (2..=8).map(|k| 2f64.powi(k)).collect(),
        }
    }
}

/// Largest ball masses and the fitted Frostman exponent; `expect = (a, tol)`.
pub fn regularity(mu: &DiscreteMeasure, radii: &[f64], centers: usize, expect: Option<(f64, f64)>) -> Result<Outcome> {
    let p = ball_regularity_profile(mu, radii, centers)?;
    let mut table = ReportTable::new(["radius", "max_ball_mass", "mass_over_r_pow_a"]);
    for i in 0..p.radii.len() {
        table.push(vec![p.radii[i].into(), p.max_ball_masses[i].into(), p.max_ball_ratios[i].into()])?;
    }
    let fits = fit_table(&[("a", p.fit, expect.map(|e| e.0))])?;
    let mut out = Outcome::new(table).with("fit", fits);
    match expect {
        Some((a, tol)) => out.check((p.a_fit - a).abs() <= tol, format!("a_fit = {:.4} within {tol} of {a:.4}", p.a_fit)),
        None => out.note(format!("a_fit = {:.4}", p.a_fit)),
    }
    Ok(out)
}

/// Expected decay exponent: a band `(b, tol)` or an upper bound (decay failure witness).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayExpectation {
    Near(f64, f64),
    Below(f64),
    None,
}

pub fn decay(mu: &DiscreteMeasure, frequencies: &[f64], directions: usize, expect: DecayExpectation) -> Result<Outcome> {
    let p = fourier_decay_profile(mu, frequencies, directions)?;
    let mut table = ReportTable::new(["frequency", "sup_abs_mu_hat"]);
    for (r, s) in p.radii.iter().zip(&p.annulus_sups) {
        table.push(vec![(*r).into(), (*s).into()])?;
    }
    let target = match expect {
        DecayExpectation::Near(b, _) => Some(-b),
        _ => None,
    };
    let fits = fit_table(&[("mu_hat", p.fit, target)])?;
    let mut out = Outcome::new(table).with("fit", fits);
    match expect {
        DecayExpectation::Near(b, tol) => {
            out.check((p.b_fit - b).abs() <= tol, format!("b_fit = {:.4} within {tol} of {b}", p.b_fit))
        }
        DecayExpectation::Below(cap) => out.check(p.b_fit < cap, format!("b_fit = {:.4} below {cap}", p.b_fit)),
        DecayExpectation::None => out.note(format!("b_fit = {:.4}", p.b_fit)),
    }
    Ok(out)
}

/// `sup |mu^_j| 2^(j b)` and `sup |mu_j| 2^(-j (d - a))` over `js`, each flat within `factor`.
///
/// The grid for `j` has half-width `half_width` and `max(min_points, 4 half_width 2^(j+1))`
/// points per axis, which puts the Nyquist frequency at `2^(j+1)`.
pub fn dyadic_bounds(
    mu: &DiscreteMeasure,
    js: &[u32],
    half_width: f64,
    min_points: usize,
    b: f64,
    gap: f64,
    factor: f64,
) -> Result<Outcome> {
    let d = mu.dim();
    let mut table =
        ReportTable::new(["j", "points", "sup_mu_hat_j", "sup_mu_hat_j_scaled", "sup_mu_j", "sup_mu_j_scaled"]);
    let (mut hats, mut pieces) = (Vec::new(), Vec::new());
    for &j in js {
        let need = (4.0 * half_width * (1u64 << (j + 1)) as f64).ceil() as usize;
        let n = need.max(min_points);
        let grid = GridSpec::isotropic(d, half_width, n + n % 2)?;
        let piece = dyadic_piece(mu, j, &grid)?;
        let jf = j as f64;
        let hat = piece.sup_mu_hat_j * (b * jf).exp2();
        let mj = piece.sup_mu_j * (-gap * jf).exp2();
        table.push(vec![
            (j as usize).into(),
            grid.points(0).into(),
            piece.sup_mu_hat_j.into(),
            hat.into(),
            piece.sup_mu_j.into(),
            mj.into(),
        ])?;
        hats.push(hat);
        pieces.push(mj);
    }
    let mut out = Outcome::new(table);
    let (sh, sm) = (spread(&hats), spread(&pieces));
    out.check(sh <= factor, format!("sup|mu^_j| 2^(j b) varies by {sh:.3} (limit {factor})"));
    out.check(sm <= factor, format!("sup|mu_j| 2^(-j(d-a)) varies by {sm:.3} (limit {factor})"));
    Ok(out)
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            // a few exact zeros and repeats exercise the merged steps
            match rng.gen_range(0..10) {
                0 => Complex64::new(0.0, 0.0),
                1 => Complex64::new(1.0, 0.0),
                _ => Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            }
        })
        .collect()
}

/// Checks of the Lorentz norm on `fields` random fields.
pub fn lorentz_suite(fields: usize, seed: u64, tol: f64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diag: f64 = 0.0;
    let mut homog: f64 = 0.0;
    let mut perm_ok = true;
    for _ in 0..fields {
        let n = rng.gen_range(8..200);
        let grid = GridSpec::new(vec![rng.gen_range(0.5..20.0)], vec![n])?;
        let vals = random_values(&mut rng, n);
        let f = SampledField::new(grid.clone(), vals.clone())?;
        let p = rng.gen_range(0.5..8.0);
        let direct = (f.values().iter().map(|v| v.norm().powf(p)).sum::<f64>() * f.cell_volume()).powf(1.0 / p);
        let got = lorentz_norm(&f, LorentzExponent::new(p, p)?);
        if direct > 0.0 {
            diag = diag.max((got - direct).abs() / direct);
        }
        let s = rng.gen_range(0.5..8.0);
        let e = LorentzExponent::new(p, s)?;
        let base = lorentz_norm(&f, e);
        let k = rng.gen_range(-10..=10i32);
        let scale = Complex64::from_polar((k as f64).exp2(), rng.gen_range(0.0..2.0 * PI));
        let scaled = lorentz_norm(&f.scaled(scale), e);
        if base > 0.0 {
            homog = homog.max((scaled - scale.norm() * base).abs() / (scale.norm() * base));
        }
        let mut shuffled = vals;
        for i in (1..n).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        perm_ok &= lorentz_norm(&SampledField::new(grid, shuffled)?, e) == base;
    }
    // indicators of m cells of width h: (p/s)^(1/s) (m h)^(1/p)
    let mut ind: f64 = 0.0;
    let mut cases = 0;
    for m in [1usize, 2, 7, 50, 199] {
        for &(p, s) in &[(0.5f64, 0.5f64), (1.0, 2.0), (1.2, 1.0), (2.0, 3.5), (6.0, 2.0), (7.5, 0.75)] {
            let grid = GridSpec::new(vec![3.0], vec![200])?;
            let f = SampledField::from_fn(grid.clone(), |x| {
                let k = ((x[0] + 3.0) / grid.spacing(0)).round() as usize;
                Complex64::new(if k < m { 1.0 } else { 0.0 }, 0.0)
            });
            let exact = (p / s).powf(1.0 / s) * (m as f64 * grid.spacing(0)).powf(1.0 / p);
            let got = lorentz_norm(&f, LorentzExponent::new(p, s)?);
            ind = ind.max((got - exact).abs() / exact);
            cases += 1;
        }
    }
    let mut table = ReportTable::new(["check", "cases", "max_relative_error", "tolerance", "pass"]);
    let rows = [
        ("lorentz_p_p_equals_lebesgue", fields, diag, tol),
        ("indicator_closed_form", cases, ind, 1e-12),
        ("homogeneity", fields, homog, 1e-12),
        ("rearrangement_invariance", fields, if perm_ok { 0.0 } else { 1.0 }, 0.0),
    ];
    let mut lines = Vec::new();
    for (name, n, err, t) in rows {
        let ok = err <= t;
        table.push(vec![name.into(), n.into(), err.into(), t.into(), ok.into()])?;
        lines.push((ok, format!("{name}: max relative error {err:.3e} over {n} cases (tolerance {t:e})")));
    }
    let mut out = Outcome::new(table);
    for (ok, l) in lines {
        out.check(ok, l);
    }
    Ok(out)
}

/// Sum of a few smooth bumps with plane-wave modulation, supported in `|x| < 1`.
fn random_smooth(grid: &GridSpec, rng: &mut ChaCha8Rng) -> SampledField {
    let d = grid.dim();
    let bumps: Vec<(Vec<f64>, f64, Vec<f64>, Complex64)> = (0..rng.gen_range(1..=4))
        .map(|_| {
            let rho = rng.gen_range(0.2..0.5);
            let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.5..0.5) * (1.0 - rho)).collect();
            let xi: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..1.5)).collect();
            (c, rho, xi, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    SampledField::from_fn(grid.clone(), |x| {
        bumps
            .iter()
            .map(|(c, rho, xi, a)| {
                let r = c.iter().zip(x).map(|(c, x)| (x - c) * (x - c)).sum::<f64>().sqrt();
                let t: f64 = xi.iter().zip(x).map(|(k, x)| k * x).sum();
                a * chi0(r / rho) * Complex64::from_polar(1.0, 2.0 * PI * t)
            })
            .sum()
    })
}

/// `int |f^|^2 dmu` against the pairing with `f * mu^(-.)`, and adjointness of extension and
/// restriction, on `trials` random smooth inputs over the circle.
pub fn tomas_suite(trials: usize, atoms: usize, seed: u64, tol: f64) -> Result<Outcome> {
    let mu = make_sphere_measure(2, atoms)?;
    let grid = GridSpec::isotropic(2, 2.0, 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = ReportTable::new(["trial", "restrict_sq_integral", "tomas_pairing", "relative_gap", "adjoint_gap"]);
    let (mut worst_t, mut worst_a): (f64, f64) = (0.0, 0.0);
    for i in 0..trials {
        let f = random_smooth(&grid, &mut rng);
        let r = restrict_sq_integral(&f, &mu)?;
        let t = tomas_pairing(&f, &mu)?;
        let rel = (r - t).abs() / r;
        let g: Vec<Complex64> =
            (0..mu.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let lhs = extend(&g, &mu, &grid)?.inner(&f)?;
        let fhat = restrict_values(&f, &mu)?;
        let rhs: Complex64 = g.iter().zip(&fhat).zip(mu.weights()).map(|((g, h), w)| g * h.conj() * w).sum();
        let adj = (lhs - rhs).norm() / lhs.norm().max(rhs.norm());
        worst_t = worst_t.max(rel);
        worst_a = worst_a.max(adj);
        table.push(vec![i.into(), r.into(), t.into(), rel.into(), adj.into()])?;
    }
    let mut out = Outcome::new(table);
    out.check(worst_t <= tol, format!("Tomas identity: worst relative gap {worst_t:.3e} (tolerance {tol:e})"));
    out.check(worst_a <= tol, format!("extension/restriction adjointness: worst gap {worst_a:.3e} (tolerance {tol:e})"));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnappTolerances {
    /// Band around `1/q` for `slope_g` and around 0 for `slope_f(inf)`.
    pub g: f64,
    /// Band around `1/s` for finite `s`.
    pub s: f64,
    /// Required `slope_g - slope_f(s)` for `s > q`.
    pub gap: f64,
}

impl Default for KnappTolerances {
    fn default() -> Self {
        Self { g: 0.1, s: 0.15, gap: 0.3 }
    }
}

pub fn knapp(opts: &KnappOptions, tol: KnappTolerances) -> Result<Outcome> {
    let rep = knapp_sharpness_experiment(opts)?;
    let mut cols = vec!["N".to_string(), "norm_g".to_string()];
    cols.extend(rep.norm_f.iter().map(|(s, _)| format!("norm_f_s{s}")));
    let mut table = ReportTable::new(cols);
    for (i, &n) in rep.n_values.iter().enumerate() {
        let mut row: Vec<Cell> = vec![n.into(), rep.norm_g[i].into()];
        row.extend(rep.norm_f.iter().map(|(_, v)| Cell::Real(v[i])));
        table.push(row)?;
    }
    let target_g = 1.0 / opts.q;
    let mut fits: Vec<(String, FitResult, Option<f64>)> = vec![("g".into(), rep.fit_g, Some(target_g))];
    fits.extend(rep.fit_f.iter().map(|(s, f)| (format!("f_s{s}"), *f, Some(if s.is_infinite() { 0.0 } else { 1.0 / s }))));
    let named: Vec<(&str, FitResult, Option<f64>)> = fits.iter().map(|(n, f, t)| (n.as_str(), *f, *t)).collect();
    let mut ladder = ReportTable::new(["level", "distribution_times_level_pow_p"]);
    for &(l, r) in &rep.ladder {
        ladder.push(vec![l.into(), r.into()])?;
    }
    let mut out = Outcome::new(table).with("fit", fit_table(&named)?).with("ladder", ladder);
    let sg = rep.slope_g();
    out.check((sg - target_g).abs() <= tol.g, format!("slope_g = {sg:.4} within {} of {target_g}", tol.g));
    for (s, f) in &rep.fit_f {
        if s.is_infinite() {
            out.check(f.slope.abs() <= tol.g, format!("slope_f(inf) = {:.4} within {} of 0", f.slope, tol.g));
        } else {
            out.check((f.slope - 1.0 / s).abs() <= tol.s, format!("slope_f({s}) = {:.4} within {} of {}", f.slope, tol.s, 1.0 / s));
        }
    }
    for (s, ok) in rep.unbounded_witness(opts.q, tol.gap) {
        let sf = rep.slope_f(s).unwrap_or(f64::NAN);
        out.check(ok, format!("slope_g - slope_f({s}) = {:.4} at least {}", sg - sf, tol.gap));
    }
    out.note(format!("{} cells in the quadrant grid, ladder spread {:.3}", rep.cells, rep.ladder_spread()));
    Ok(out)
}

/// `max ||T_lambda f||_{L^{q,2}} / ||f||_2` against lambda; the fitted slope must land in `band`.
pub fn scaling(spec: &PhaseSpec, opts: &ScalingOptions, band: (f64, f64)) -> Result<Outcome> {
    let rep = scaling_experiment(spec, opts)?;
    let mut table = ReportTable::new(["lambda", "ratio", "best_member"]);
    for i in 0..rep.lambdas.len() {
        table.push(vec![rep.lambdas[i].into(), rep.ratios[i].into(), rep.best[i].clone().into()])?;
    }
    let mut out = Outcome::new(table).with("fit", fit_table(&[("ratio", rep.fit, Some(rep.target_slope))])?);
    let s = rep.fit.slope;
    out.check(
        (band.0..=band.1).contains(&s),
        format!("slope = {s:.4} in [{:.4}, {:.4}] (target {:.4})", band.0, band.1, rep.target_slope),
    );
    if let (Some((l, a, b)), Some(c)) = (rep.doubling, rep.doubling_change()) {
        out.note(format!("grid doubling at lambda {l}: {a:.6e} -> {b:.6e} (relative change {c:.2e})"));
    }
    for n in &rep.notes {
        out.note(n.clone());
    }
    Ok(out)
}

/// Probe segments crossing `y_m = 0` at a few tangential offsets and base points, scaled by `r`.
pub fn fold_segments(d: usize, r: f64) -> Vec<Segment> {
    let mut segs = Vec::new();
    for x in [[0.0, 0.1], [0.2, -0.1]] {
        for t in [-0.2, 0.0, 0.25] {
            let mut xs = vec![0.0; d];
            xs[0] = x[0] * r;
            xs[d - 1] = x[1] * r;
            let mut y0 = vec![0.0; d];
            let mut y1 = vec![0.0; d];
            if d > 1 {
                y0[0] = t * r;
                y1[0] = t * r;
            }
            y0[d - 1] = -0.3 * r;
            y1[d - 1] = 0.2 * r;
            segs.push(Segment { x: xs, y0, y1 });
        }
    }
    segs
}

/// Fold condition and curvature `kappa` of the fold surfaces along [`fold_segments`].
pub fn fold_check(spec: &PhaseSpec, kappa: usize) -> Result<Outcome> {
    let d = spec.x_dim();
    let rep = check_fold(
        spec.phase.as_ref(),
        &fold_segments(d, spec.amplitude.radius()),
        kappa,
        DEFAULT_RANK_TOL,
        DEFAULT_DIRECTIONAL_TOL,
    )?;
    let mut cols: Vec<String> = (0..d).map(|a| format!("x{a}")).collect();
    cols.extend((0..spec.y_dim()).map(|a| format!("y{a}")));
    let names: Vec<&str> = rep.probes.first().map(|p| p.values.iter().map(|v| v.0).collect()).unwrap_or_default();
    cols.extend(names.iter().map(|s| s.to_string()));
    cols.push("pass".into());
    let mut table = ReportTable::new(cols);
    for p in &rep.probes {
        let mut row: Vec<Cell> = p.x.iter().chain(&p.y).map(|v| Cell::Real(*v)).collect();
        row.extend(p.values.iter().map(|v| Cell::Real(v.1)));
        row.push(p.pass.into());
        table.push(row)?;
    }
    let mut out = Outcome::new(table);
    let found = !rep.probes.is_empty();
    out.check(rep.verdict && found, format!("fold condition with curvature {kappa} at {} fold points", rep.probes.len()));
    if let Some(n) = rep.note {
        out.note(n);
    }
    Ok(out)
}

/// Doubles the quadrature until the resolution rule of [`dyadic_kernel_sup`] is met.
fn kernel_sup_refined(spec: &PhaseSpec, lambda: f64, j: u32) -> Result<f64> {
    let mut sampling = KernelSampling::default();
    loop {
        match dyadic_kernel_sup(spec, lambda, j, sampling) {
            Err(PhaseError::Resolution { .. }) if sampling.quadrature < 1 << 14 => sampling.quadrature *= 2,
            other => return Ok(other?),
        }
    }
}

/// `sup |S_j| 2^(j kappa/2)` over `js` at one lambda, flat within `factor`.
pub fn kernel_sup(spec: &PhaseSpec, lambda: f64, js: &[u32], kappa: u32, factor: f64) -> Result<Outcome> {
    let mut table = ReportTable::new(["j", "sup_kernel", "sup_kernel_scaled"]);
    let mut scaled = Vec::new();
    for &j in js {
        let s = kernel_sup_refined(spec, lambda, j)?;
        if s == 0.0 {
            return Err(LabError::Invalid(format!("2^{j} exceeds radius times lambda, the piece vanishes")));
        }
        let v = s * (j as f64 * kappa as f64 / 2.0).exp2();
        table.push(vec![(j as usize).into(), s.into(), v.into()])?;
        scaled.push(v);
    }
    let mut out = Outcome::new(table);
    let sp = spread(&scaled);
    out.check(sp <= factor, format!("sup|S_j| 2^(j kappa/2) varies by {sp:.3} (limit {factor})"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_of_flat_and_spiky() {
        assert_eq!(spread(&[2.0, 2.0, 2.0]), 1.0);
        assert_eq!(spread(&[1.0, 4.0, 2.0]), 4.0);
    }

    #[test]
    fn identity_suite_is_seeded() {
        let a = identity_suite(5, 1).unwrap();
        let b = identity_suite(5, 1).unwrap();
        let c = identity_suite(5, 2).unwrap();
        assert!(a.pass);
        assert_eq!(a.main_table().rows().len(), 7);
        assert_eq!(a.main_table().to_csv().unwrap(), b.main_table().to_csv().unwrap());
        assert_ne!(a.main_table().to_csv().unwrap(), c.main_table().to_csv().unwrap());
    }

    #[test]
    fn invalid_profile_is_an_error() {
        assert!(exponent_table(3, int(2), int(2), None).is_err());
        let t = exponent_table(2, int(1), rat(1, 2), Some(1)).unwrap();
        assert!(t.pass);
        let csv = t.main_table().to_csv().unwrap();
        assert!(csv.contains("\np_circ,6/5,") && csv.contains("\nq_circ,6,") && csv.contains("\nq1,3,"));
    }

    #[test]
    fn fold_segments_cross_the_fold() {
        let segs = fold_segments(2, 0.5);
        assert_eq!(segs.len(), 6);
        for s in &segs {
            assert!(s.y0[1] < 0.0 && s.y1[1] > 0.0 && s.y0[0] == s.y1[0]);
        }
        let spec = PhaseSpec::from_catalog("fold-flat", 2, restrict_core::phase::Amplitude::new(1.0).unwrap()).unwrap();
        // flat fold surfaces carry no curvature
        assert!(fold_check(&spec, 0).unwrap().pass);
        assert!(!fold_check(&spec, 1).unwrap().pass);
    }

    #[test]
    fn absorb_prefixes_tables() {
        let mut a = Outcome::new(ReportTable::new(["x"]));
        let mut b = Outcome::new(ReportTable::new(["y"])).with("fit", ReportTable::new(["z"]));
        b.check(false, "bad".into());
        a.absorb("more", b);
        let names: Vec<&str> = a.tables.iter().map(|t| t.0.as_str()).collect();
        assert_eq!(names, ["", "more", "more_fit"]);
        assert!(!a.pass);
        assert_eq!(a.summary, ["FAIL bad"]);
    }

    #[test]
    fn decay_witness_for_cantor() {
        let mu = make_cantor_measure(1.0 / 3.0, 10).unwrap();
        let freqs: Vec<f64> = (1..=5).map(|k| 3f64.powi(k)).collect();
        assert!(decay(&mu, &freqs, 2, DecayExpectation::Below(0.05)).unwrap().pass);
        assert!(!decay(&mu, &freqs, 2, DecayExpectation::Near(0.3, 0.05)).unwrap().pass);
    }
}

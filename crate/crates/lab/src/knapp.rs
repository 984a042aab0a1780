//! Superposed Knapp examples on the circle and the slope experiment showing
//! that restriction fails on `L^{p,s}` for `s > q`.
//!
//! The cap functions factor: the inverse transform of
//! `eta1(2^k |xi_1|) eta0(2^(2k-5) |xi_2 - 1|)` is `a_k(x_1) b_k(x_2) e^{2 pi i x_2}` with
//! `a_k(x) = 2^-k A(2^-k x)`, `b_k(x) = 2^(5-2k) B(2^(5-2k) x)` and
//! `A(t) = 2 int_{3/4}^{5/4} eta1(s) cos(2 pi s t) ds`, `B(t) = 2 int_0^1 eta0(s) cos(2 pi s t) ds`.

use std::f64::consts::PI;

use num_complex::Complex64;
use restrict_core::bump::{eta0, eta1};
use restrict_core::field::{GridSpec, SampledField};
use restrict_core::fit::{loglog_fit, FitResult};
use restrict_core::lorentz::{weighted_lorentz_norm, weighted_rearrangement, LorentzExponent};
use restrict_core::measure::{make_sphere_measure, DiscreteMeasure};

use crate::error::{LabError, Result};

/// Largest frequency of `A`'s bump and of `B`'s bump.
const A_TOP: f64 = 1.25;
const B_TOP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnappSpec {
    n: usize,
    q: f64,
}

impl KnappSpec {
    /// `N` caps in the plane with weights `2^(k/q)`.
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Invalid("the number of caps N must be at least 1".into()));
        }
        if !(q >= 1.0 && q.is_finite()) {
            return Err(LabError::Invalid(format!("q must be finite and at least 1, got {q}")));
        }
        Ok(Self { n, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn weight(&self, k: usize) -> f64 {
        (k as f64 / self.q).exp2()
    }

    /// `2^(2k-5)`, the inverse thickness of cap `k`.
    pub fn thickness_scale(k: usize) -> f64 {
        (2.0 * k as f64 - 5.0).exp2()
    }

    /// `g(xi)` in the plane.
    pub fn g(&self, xi: &[f64]) -> f64 {
        (1..=self.n)
            .map(|k| {
                self.weight(k) * eta1((k as f64).exp2() * xi[0].abs()) * eta0(Self::thickness_scale(k) * (xi[1] - 1.0).abs())
            })
            .sum()
    }
}

/// Trapezoid nodes for `int_lo^hi` of a bump times `cos(2 pi s t)`, enough to resolve `t`.
fn nodes_for(t: f64, width: f64) -> usize {
    2 * (width * (t.abs() + 128.0)).ceil() as usize + 16
}

/// `A(t) = 2 int_{3/4}^{5/4} eta1(s) cos(2 pi s t) ds`.
pub fn profile_a(t: f64) -> f64 {
    let n = nodes_for(t, 0.5);
    let h = 0.5 / n as f64;
    // the integrand vanishes to all orders at both ends
    let s: f64 = (1..n)
        .map(|i| {
            let s = 0.75 + i as f64 * h;
            eta1(s) * (2.0 * PI * s * t).cos()
        })
        .sum();
    2.0 * h * s
}

/// `B(t) = 2 int_0^1 eta0(s) cos(2 pi s t) ds = int_{-1}^1 eta0(s) e^{2 pi i s t} ds`.
pub fn profile_b(t: f64) -> f64 {
    let n = nodes_for(t, 1.0);
    let h = 1.0 / n as f64;
    let s: f64 = (1..n).map(|i| {
        let s = i as f64 * h;
        eta0(s) * (2.0 * PI * s * t).cos()
    }).sum::<f64>()
        + 0.5;
    2.0 * h * s
}

fn a_k(k: usize, x: f64) -> f64 {
    let s = (-(k as f64)).exp2();
    s * profile_a(s * x)
}

fn b_k(k: usize, x: f64) -> f64 {
    let s = 1.0 / KnappSpec::thickness_scale(k);
    s * profile_b(s * x)
}

/// Which atoms lie on the north half `xi_2 > 0` of the circle.
fn north(mu: &DiscreteMeasure) -> Vec<bool> {
    (0..mu.len()).map(|j| mu.atom(j)[1] > 0.0).collect()
}

/// `g` at the atoms of a planar measure, set to zero on `xi_2 <= 0`.
pub fn knapp_g(spec: &KnappSpec, mu: &DiscreteMeasure) -> Result<Vec<f64>> {
    if mu.dim() != 2 {
        return Err(LabError::Dimension("Knapp examples are built in the plane".into()));
    }
    let up = north(mu);
    Ok((0..mu.len()).map(|j| if up[j] { spec.g(mu.atom(j)) } else { 0.0 }).collect())
}

/// `(int |g|^q dmu)^(1/q)`.
pub fn g_norm(spec: &KnappSpec, mu: &DiscreteMeasure) -> Result<f64> {
    let g = knapp_g(spec, mu)?;
    let s: f64 = g.iter().zip(mu.weights()).map(|(v, w)| w * v.abs().powf(spec.q)).sum();
    Ok(s.powf(1.0 / spec.q))
}

/// `g` on the atoms of `mu` and `f = F^{-1} g` sampled on a uniform grid.
///
/// The grid must resolve every frequency in the support of `g`.
pub fn knapp_function(spec: &KnappSpec, mu: &DiscreteMeasure, grid: &GridSpec) -> Result<(Vec<f64>, SampledField)> {
    if grid.dim() != 2 {
        return Err(LabError::Dimension("Knapp examples are built in the plane".into()));
    }
    let top = [A_TOP / 2.0, 1.0 + 8.0 * B_TOP];
    for (axis, &need) in top.iter().enumerate() {
        if grid.nyquist(axis) < need {
            return Err(LabError::Resolution {
                what: format!("Nyquist frequency on axis {axis}"),
                required: need,
                actual: grid.nyquist(axis),
            });
        }
    }
    // the thinnest cap spreads over |x_1| ~ 2^N and |x_2| ~ 2^(2N-5)
    let fits = |n: usize| grid.half_width(0) >= 4.0 * (n as f64).exp2() && grid.half_width(1) >= 4.0 * KnappSpec::thickness_scale(n);
    if !fits(spec.n) {
        let largest = (1..spec.n).rev().find(|&n| fits(n)).unwrap_or(0);
        return Err(LabError::Resolution {
            what: format!("spatial half-width for N = {} caps (largest N this grid supports: {largest})", spec.n),
            required: 4.0 * KnappSpec::thickness_scale(spec.n),
            actual: grid.half_width(1),
        });
    }
    let g = knapp_g(spec, mu)?;
    let (n0, n1) = (grid.points(0), grid.points(1));
    let x0 = grid.axis_nodes(0);
    let x1 = grid.axis_nodes(1);
    let mut vals = vec![Complex64::new(0.0, 0.0); grid.len()];
    for k in 1..=spec.n {
        let w = spec.weight(k);
        let a: Vec<f64> = x0.iter().map(|&x| w * a_k(k, x)).collect();
        let b: Vec<f64> = x1.iter().map(|&x| b_k(k, x)).collect();
        for i in 0..n0 {
            for j in 0..n1 {
                vals[i * n1 + j] += a[i] * b[j];
            }
        }
    }
    for (j, &x) in x1.iter().enumerate() {
        let carrier = Complex64::from_polar(1.0, 2.0 * PI * x);
        for i in 0..n0 {
            vals[i * n1 + j] *= carrier;
        }
    }
    Ok((g, SampledField::new(grid.clone(), vals)?))
}

/// `|f(0)| = sum_k 2^(k/q) ||cap_k||_1`, the triangle-inequality bound for `sup |f|`.
pub fn sup_bound(spec: &KnappSpec) -> f64 {
    (1..=spec.n).map(|k| spec.weight(k) * a_k(k, 0.0) * b_k(k, 0.0)).sum()
}

/// Cell midpoints and widths on `[0, extent]` with width `max(h_min, x / growth)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedAxis {
    pub centres: Vec<f64>,
    pub widths: Vec<f64>,
}

pub fn graded_axis(h_min: f64, extent: f64, growth: f64) -> GradedAxis {
    let mut edges = vec![0.0];
    while *edges.last().unwrap() < extent {
        let e = *edges.last().unwrap();
        edges.push(e + h_min.max(e / growth));
    }
    let centres = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let widths = edges.windows(2).map(|w| w[1] - w[0]).collect();
    GradedAxis { centres, widths }
}

/// Graded tensor grid on the positive quadrant; `|f|` is even in both variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnappGrid {
    pub h_min: [f64; 2],
    pub growth: f64,
    /// Extents are `T 2^N_max` and `T 2^(2 N_max - 5)`.
    pub extent_factor: f64,
}

impl Default for KnappGrid {
    fn default() -> Self {
        Self { h_min: [0.0625, 0.005], growth: 64.0, extent_factor: 32.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnappOptions {
    pub q: f64,
    pub p: f64,
    pub s_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub circle_atoms: usize,
    pub grid: KnappGrid,
}

impl KnappOptions {
    /// `p` from `q = p' / 3`, the planar case.
    pub fn planar(q: f64, s_list: Vec<f64>, n_list: Vec<usize>) -> Self {
        let pp = 3.0 * q;
        Self { q, p: pp / (pp - 1.0), s_list, n_list, circle_atoms: 1 << 18, grid: KnappGrid::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub n_values: Vec<usize>,
    pub norm_g: Vec<f64>,
    /// `(s, ||f_N||_{L^{p,s}} per N)`.
    pub norm_f: Vec<(f64, Vec<f64>)>,
    pub fit_g: FitResult,
    pub fit_f: Vec<(f64, FitResult)>,
    /// Cells in the positive quadrant.
    pub cells: usize,
    /// Ladder check at the largest N: `(level, |{|f| > level}| / level^-p)`.
    pub ladder: Vec<(f64, f64)>,
}

impl ExperimentReport {
    pub fn slope_g(&self) -> f64 {
        self.fit_g.slope
    }

    pub fn slope_f(&self, s: f64) -> Option<f64> {
        self.fit_f.iter().find(|(t, _)| *t == s || (t.is_infinite() && s.is_infinite())).map(|(_, f)| f.slope)
    }

    /// `slope_g - slope_f(s) >= gap` for every `s > q` in the run.
    pub fn unbounded_witness(&self, q: f64, gap: f64) -> Vec<(f64, bool)> {
        self.fit_f.iter().filter(|(s, _)| *s > q).map(|(s, f)| (*s, self.fit_g.slope - f.slope >= gap)).collect()
    }

    /// Largest over smallest ladder ratio.
    pub fn ladder_spread(&self) -> f64 {
        let hi = self.ladder.iter().map(|l| l.1).fold(0.0, f64::max);
        let lo = self.ladder.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

pub fn knapp_sharpness_experiment(opts: &KnappOptions) -> Result<ExperimentReport> {
    let q = opts.q;
    let pp = 3.0 * q;
    if (opts.p - pp / (pp - 1.0)).abs() > 1e-12 {
        return Err(LabError::Invalid(format!("p = {} does not satisfy q = p'/3 for q = {q}", opts.p)));
    }
    if opts.n_list.len() < 3 {
        return Err(LabError::Invalid("at least 3 values of N are needed".into()));
    }
    if opts.n_list.windows(2).any(|w| w[0] >= w[1]) || opts.n_list[0] == 0 {
        return Err(LabError::Invalid("N values must be positive and increasing".into()));
    }
    let g = &opts.grid;
    // a_1 oscillates with period 1.6 and b_1 with period 1/8
    for (axis, period) in [(0, 1.0 / (A_TOP / 2.0)), (1, 1.0 / (8.0 * B_TOP))] {
        if g.h_min[axis] > period / 10.0 {
            return Err(LabError::Resolution {
                what: format!("finest cell width on axis {axis}"),
                required: period / 10.0,
                actual: g.h_min[axis],
            });
        }
    }
    if g.growth < 16.0 {
        return Err(LabError::Invalid("grading ratio must be at least 16".into()));
    }
    let n_max = *opts.n_list.last().unwrap();
    let ax1 = graded_axis(g.h_min[0], g.extent_factor * (n_max as f64).exp2(), g.growth);
    let ax2 = graded_axis(g.h_min[1], g.extent_factor * (2.0 * n_max as f64 - 5.0).exp2(), g.growth);
    let (n1, n2) = (ax1.centres.len(), ax2.centres.len());
    let cell: Vec<f64> = ax1.widths.iter().flat_map(|w1| ax2.widths.iter().map(move |w2| 4.0 * w1 * w2)).collect();

    let mu = make_sphere_measure(2, opts.circle_atoms)?;
    let lp = |s: f64| LorentzExponent::new(opts.p, s);
    let exps: Vec<LorentzExponent> = opts.s_list.iter().map(|&s| lp(s)).collect::<std::result::Result<_, _>>()?;

    let mut f = vec![0.0; n1 * n2];
    let mut norm_g = Vec::new();
    let mut norm_f: Vec<(f64, Vec<f64>)> = opts.s_list.iter().map(|&s| (s, Vec::new())).collect();
    let mut next = 0;
    let mut ladder = Vec::new();
    for k in 1..=n_max {
        let spec = KnappSpec::new(k, q)?;
        let w = spec.weight(k);
        let a: Vec<f64> = ax1.centres.iter().map(|&x| w * a_k(k, x)).collect();
        let b: Vec<f64> = ax2.centres.iter().map(|&x| b_k(k, x)).collect();
        for i in 0..n1 {
            let row = &mut f[i * n2..(i + 1) * n2];
            for (v, bj) in row.iter_mut().zip(&b) {
                *v += a[i] * bj;
            }
        }
        if opts.n_list[next] != k {
            continue;
        }
        next += 1;
        norm_g.push(g_norm(&spec, &mu)?);
        for ((_, out), e) in norm_f.iter_mut().zip(&exps) {
            out.push(weighted_lorentz_norm(&f, &cell, *e)?);
        }
        if k == n_max {
            ladder = ladder_ratios(&spec, &f, &cell, opts.p)?;
        }
    }
    let ns: Vec<f64> = opts.n_list.iter().map(|&n| n as f64).collect();
    let fit = |ys: &[f64]| loglog_fit(&ns.iter().copied().zip(ys.iter().copied()).collect::<Vec<_>>());
    let fit_g = fit(&norm_g)?;
    let fit_f = norm_f.iter().map(|(s, ys)| Ok((*s, fit(ys)?))).collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport { n_values: opts.n_list.clone(), norm_g, norm_f, fit_g, fit_f, cells: n1 * n2, ladder })
}

/// Distribution function of `|f|` at three dyadic levels between the peaks of caps 2 and N-1,
/// divided by `level^-p`.
fn ladder_ratios(spec: &KnappSpec, f: &[f64], cell: &[f64], p: f64) -> Result<Vec<(f64, f64)>> {
    let n = spec.n();
    if n < 4 {
        return Ok(Vec::new());
    }
    let peak = |k: usize| spec.weight(k) * a_k(k, 0.0) * b_k(k, 0.0);
    let (hi, lo) = (peak(2).log2(), peak(n - 1).log2());
    let steps = weighted_rearrangement(f, cell)?;
    Ok((0..3)
        .map(|i| {
            let level = (hi + (lo - hi) * (i as f64 + 0.5) / 3.0).round().exp2();
            (level, steps.distribution(level) * level.powf(p))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_at_zero() {
        // A(0) = int eta1(|s|) ds, B(0) = int eta0(|s|) ds; eta0 has mean value 1/2 on its ramps
        let fine = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            (0..n).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
        };
        assert!((profile_a(0.0) - 2.0 * fine(&eta1, 0.75, 1.25)).abs() < 1e-10);
        assert!((profile_b(0.0) - 2.0 * fine(&eta0, 0.0, 1.0)).abs() < 1e-10);
        assert!((profile_b(0.0) - 1.5).abs() < 1e-10);
        for t in [0.3, 7.0, 55.5, 300.0] {
            let a = 2.0 * fine(&|s| eta1(s) * (2.0 * PI * s * t).cos(), 0.75, 1.25);
            assert!((profile_a(t) - a).abs() < 1e-9, "{t}");
            let b = 2.0 * fine(&|s| eta0(s) * (2.0 * PI * s * t).cos(), 0.0, 1.0);
            assert!((profile_b(t) - b).abs() < 1e-9, "{t}");
        }
    }

    #[test]
    fn caps_are_disjoint_on_the_circle() {
        let mu = make_sphere_measure(2, 1 << 14).unwrap();
        for j in 0..mu.len() {
            let xi = mu.atom(j);
            let live = (1..=8).filter(|&k| eta1((k as f64).exp2() * xi[0].abs()) != 0.0).count();
            assert!(live <= 1);
        }
    }

    #[test]
    fn one_and_two_caps() {
        let mu = make_sphere_measure(2, 1 << 16).unwrap();
        let one = KnappSpec::new(1, 2.0).unwrap();
        let n1 = g_norm(&one, &mu).unwrap();
        // support arc of cap 1 on the north half: |xi_1| in (3/8, 5/8)
        let arc = 2.0 * ((0.625f64).asin() - (0.375f64).asin()) / (2.0 * PI);
        let scale = one.weight(1) * arc.sqrt();
        assert!(n1 <= scale && n1 >= scale / 2.0, "{n1} {scale}");
        let n2 = g_norm(&KnappSpec::new(2, 2.0).unwrap(), &mu).unwrap();
        let r = (n2 / n1).powi(2);
        assert!((1.6..2.4).contains(&r), "{r}");
    }

    #[test]
    fn uniform_grid_function_is_bounded() {
        let spec = KnappSpec::new(3, 2.0).unwrap();
        let mu = make_sphere_measure(2, 4096).unwrap();
        let grid = GridSpec::new(vec![32.0, 8.0], vec![128, 512]).unwrap();
        let (g, f) = knapp_function(&spec, &mu, &grid).unwrap();
        assert_eq!(g.len(), 4096);
        let bound = sup_bound(&spec);
        assert!(f.sup_norm() <= bound * (1.0 + 1e-12));
        // the origin is a node and attains the bound
        assert!((f.values()[64 * 512 + 256].norm() - bound).abs() < 1e-12 * bound);
        let coarse = GridSpec::new(vec![32.0, 8.0], vec![128, 64]).unwrap();
        assert!(matches!(knapp_function(&spec, &mu, &coarse), Err(LabError::Resolution { .. })));
        let narrow = GridSpec::new(vec![32.0, 4.0], vec![128, 256]).unwrap();
        let err = knapp_function(&spec, &mu, &narrow).unwrap_err().to_string();
        assert!(err.contains("largest N this grid supports: 2"), "{err}");
    }

    #[test]
    fn graded_axis_shape() {
        let ax = graded_axis(0.5, 100.0, 8.0);
        assert!(ax.widths[..8].iter().all(|&w| w == 0.5));
        let total: f64 = ax.widths.iter().sum();
        assert!((100.0..100.0 + 100.0 / 8.0 + 0.5).contains(&total));
        assert!(ax.widths.windows(2).all(|w| w[1] >= w[0]));
    }
}

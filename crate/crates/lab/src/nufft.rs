//! Nonuniform FFTs by Gaussian gridding.
//!
//! Type 1: `F[k] = sum_j c_j e^{s i k.x_j}`. Type 2: `f_j = sum_k F[k] e^{s i k.x_j}`.
//! Modes run over `k_a = -floor(M_a/2) .. M_a - 1 - floor(M_a/2)`, row-major. Points are
//! in radians and are reduced mod `2 pi`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::fft::{next_smooth, FftNd};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NufftOptions {
    /// Grid points on each side of a source used for spreading; 12 gives about 1e-12.
    pub spread: usize,
    /// Oversampling factor of the fine grid (at least 2).
    pub oversample: f64,
}

impl Default for NufftOptions {
    fn default() -> Self {
        Self { spread: 12, oversample: 2.0 }
    }
}

pub struct Nufft {
    modes: [usize; 3],
    fine: [usize; 3],
    tau: [f64; 3],
    spread: usize,
    dim: usize,
    plan: FftNd,
    /// Per-axis `1 / (M_r g(k))` over the mode range.
    deconv: [Vec<f64>; 3],
}

impl Nufft {
    pub fn new(modes: &[usize], opts: NufftOptions) -> Self {
        let dim = modes.len();
        assert!((1..=3).contains(&dim), "dimension must be 1, 2 or 3");
        assert!(modes.iter().all(|&m| m > 0), "mode counts must be positive");
        let spread = opts.spread.max(2);
        let r = opts.oversample.max(2.0);
        let mut m3 = [1usize; 3];
        let mut fine = [1usize; 3];
        let mut tau = [0.0; 3];
        let mut deconv: [Vec<f64>; 3] = [vec![1.0], vec![1.0], vec![1.0]];
        for a in 0..dim {
            let axis = 3 - dim + a;
            let m = modes[a];
            let mr = next_smooth(((r * m as f64).ceil() as usize).max(2 * spread + 2));
            let reff = mr as f64 / m as f64;
            let t = PI * spread as f64 / (m as f64 * m as f64 * reff * (reff - 0.5));
            m3[axis] = m;
            fine[axis] = mr;
            tau[axis] = t;
            let lo = -((m / 2) as i64);
            deconv[axis] = (0..m)
                .map(|i| {
                    let k = (lo + i as i64) as f64;
                    1.0 / (mr as f64 * (t / PI).sqrt() * (-k * k * t).exp())
                })
                .collect();
        }
        let shape: Vec<usize> = fine[3 - dim..].to_vec();
        Self { modes: m3, fine, tau, spread, dim, plan: FftNd::new(&shape), deconv }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode_count(&self) -> usize {
        self.modes.iter().product()
    }

    /// Spreading indices and Gaussian weights of one point along one (padded) axis.
    fn kernel(&self, axis: usize, x: f64, idx: &mut [usize], w: &mut [f64]) {
        let mr = self.fine[axis];
        if mr == 1 {
            idx[0] = 0;
            w[0] = 1.0;
            return;
        }
        let h = 2.0 * PI / mr as f64;
        let xr = x.rem_euclid(2.0 * PI);
        let m0 = (xr / h).floor() as i64;
        let s = self.spread as i64;
        let inv = 1.0 / (4.0 * self.tau[axis]);
        for (t, l) in (-s + 1..=s).enumerate() {
            let m = m0 + l;
            let dist = xr - m as f64 * h;
            idx[t] = m.rem_euclid(mr as i64) as usize;
            w[t] = (-dist * dist * inv).exp();
        }
    }

    fn width(&self, axis: usize) -> usize {
        if self.fine[axis] == 1 {
            1
        } else {
            2 * self.spread
        }
    }

    fn point3(&self, points: &[f64], j: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        p[3 - self.dim..].copy_from_slice(&points[j * self.dim..(j + 1) * self.dim]);
        p
    }

    pub fn type1(&self, points: &[f64], strengths: &[Complex64], sign: Sign) -> Vec<Complex64> {
        assert_eq!(points.len(), strengths.len() * self.dim, "points and strengths disagree");
        let [_, f1, f2] = self.fine;
        let mut grid = vec![Complex64::new(0.0, 0.0); self.fine.iter().product()];
        let ws = 2 * self.spread;
        let (mut i0, mut i1, mut i2) = (vec![0; ws], vec![0; ws], vec![0; ws]);
        let (mut w0, mut w1, mut w2) = (vec![0.0; ws], vec![0.0; ws], vec![0.0; ws]);
        let (n0, n1, n2) = (self.width(0), self.width(1), self.width(2));
        for (j, &c) in strengths.iter().enumerate() {
            let p = self.point3(points, j);
            self.kernel(0, p[0], &mut i0, &mut w0);
            self.kernel(1, p[1], &mut i1, &mut w1);
            self.kernel(2, p[2], &mut i2, &mut w2);
            for a in 0..n0 {
                let ca = c * w0[a];
                let base_a = i0[a] * f1;
                for b in 0..n1 {
                    let cb = ca * w1[b];
                    let row = (base_a + i1[b]) * f2;
                    for t in 0..n2 {
                        grid[row + i2[t]] += cb * w2[t];
                    }
                }
            }
        }
        match sign {
            Sign::Minus => self.plan.forward(&mut grid),
            Sign::Plus => self.plan.inverse(&mut grid),
        }
        let mut out = Vec::with_capacity(self.mode_count());
        self.for_modes(|g0, g1, g2, scale| out.push(grid[(g0 * f1 + g1) * f2 + g2] * scale));
        out
    }

    pub fn type2(&self, points: &[f64], coeffs: &[Complex64], sign: Sign) -> Vec<Complex64> {
        assert_eq!(coeffs.len(), self.mode_count(), "coefficient count does not match the modes");
        assert_eq!(points.len() % self.dim, 0);
        let [_, f1, f2] = self.fine;
        let mut grid = vec![Complex64::new(0.0, 0.0); self.fine.iter().product()];
        let mut it = coeffs.iter();
        self.for_modes(|g0, g1, g2, scale| grid[(g0 * f1 + g1) * f2 + g2] = it.next().unwrap() * scale);
        match sign {
            Sign::Minus => self.plan.forward(&mut grid),
            Sign::Plus => self.plan.inverse(&mut grid),
        }
        let ws = 2 * self.spread;
        let (mut i0, mut i1, mut i2) = (vec![0; ws], vec![0; ws], vec![0; ws]);
        let (mut w0, mut w1, mut w2) = (vec![0.0; ws], vec![0.0; ws], vec![0.0; ws]);
        let (n0, n1, n2) = (self.width(0), self.width(1), self.width(2));
        let npts = points.len() / self.dim;
        (0..npts)
            .map(|j| {
                let p = self.point3(points, j);
                self.kernel(0, p[0], &mut i0, &mut w0);
                self.kernel(1, p[1], &mut i1, &mut w1);
                self.kernel(2, p[2], &mut i2, &mut w2);
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..n0 {
                    let base_a = i0[a] * f1;
                    let mut sa = Complex64::new(0.0, 0.0);
                    for b in 0..n1 {
                        let row = (base_a + i1[b]) * f2;
                        let mut sb = Complex64::new(0.0, 0.0);
                        for t in 0..n2 {
                            sb += grid[row + i2[t]] * w2[t];
                        }
                        sa += sb * w1[b];
                    }
                    acc += sa * w0[a];
                }
                acc
            })
            .collect()
    }

    /// Visits modes in output order with their fine-grid indices and deconvolution factor.
    fn for_modes(&self, mut f: impl FnMut(usize, usize, usize, f64)) {
        let wrap = |axis: usize, i: usize| {
            let m = self.modes[axis];
            let k = i as i64 - (m / 2) as i64;
            k.rem_euclid(self.fine[axis] as i64) as usize
        };
        for a in 0..self.modes[0] {
            let (g0, s0) = (wrap(0, a), self.deconv[0][a]);
            for b in 0..self.modes[1] {
                let (g1, s1) = (wrap(1, b), s0 * self.deconv[1][b]);
                for c in 0..self.modes[2] {
                    f(g0, g1, wrap(2, c), s1 * self.deconv[2][c]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn modes_list(modes: &[usize]) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &m in modes {
            let lo = -((m / 2) as i64);
            out = out
                .into_iter()
                .flat_map(|p| (0..m as i64).map(move |i| [p.clone(), vec![lo + i]].concat()))
                .collect();
        }
        out
    }

    fn check(modes: &[usize], npts: usize, seed: u64) {
        let d = modes.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<f64> = (0..npts * d).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let c: Vec<Complex64> = (0..npts).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let plan = Nufft::new(modes, NufftOptions::default());
        let ks = modes_list(modes);
        let coef: Vec<Complex64> = ks.iter().map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        for (sign, s) in [(Sign::Minus, -1.0), (Sign::Plus, 1.0)] {
            let fast = plan.type1(&pts, &c, sign);
            let scale: f64 = c.iter().map(|v| v.norm()).sum();
            for (k, got) in ks.iter().zip(&fast) {
                let exact: Complex64 = (0..npts)
                    .map(|j| {
                        let t: f64 = (0..d).map(|a| k[a] as f64 * pts[j * d + a]).sum();
                        c[j] * Complex64::from_polar(1.0, s * t)
                    })
                    .sum();
                assert!((got - exact).norm() < 1e-11 * scale, "type1 {modes:?} {got} {exact}");
            }
            let fast = plan.type2(&pts, &coef, sign);
            let scale: f64 = coef.iter().map(|v| v.norm()).sum();
            for (j, got) in fast.iter().enumerate() {
                let exact: Complex64 = ks
                    .iter()
                    .zip(&coef)
                    .map(|(k, f)| {
                        let t: f64 = (0..d).map(|a| k[a] as f64 * pts[j * d + a]).sum();
                        f * Complex64::from_polar(1.0, s * t)
                    })
                    .sum();
                assert!((got - exact).norm() < 1e-11 * scale, "type2 {modes:?} {got} {exact}");
            }
        }
    }

    #[test]
    fn agrees_with_direct_sums() {
        check(&[1], 5, 0);
        check(&[33], 50, 1);
        check(&[64], 200, 2);
        check(&[12, 7], 60, 3);
        check(&[20, 20], 100, 4);
        check(&[6, 5, 8], 40, 5);
    }
}

//! Uniform box grids and complex samples on them.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::GridError;

/// Node grid on the box `prod [-L_i, L_i)`, with `N_i` points per axis.
///
/// Nodes are `x_k = -L + k h` with `h = 2L / N`, so the origin sits at `k = N/2`
/// and `x -> -x` maps node `k` to node `N - k` (node 0 has no mirror inside the box).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    half_width: Vec<f64>,
    points: Vec<usize>,
}

impl GridSpec {
    pub fn new(half_width: Vec<f64>, points: Vec<usize>) -> Result<Self, GridError> {
        let d = half_width.len();
        if d == 0 || d > 3 || points.len() != d {
            return Err(GridError::Dimension(if points.len() != d { points.len() } else { d }));
        }
        for (axis, (&l, &n)) in half_width.iter().zip(&points).enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(GridError::HalfWidth { axis, half_width: l });
            }
            if n < 8 {
                return Err(GridError::TooFewPoints { axis, points: n });
            }
        }
        Ok(Self { half_width, points })
    }

    pub fn isotropic(d: usize, half_width: f64, points: usize) -> Result<Self, GridError> {
        Self::new(alloc::vec![half_width; d], alloc::vec![points; d])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn half_width(&self, axis: usize) -> f64 {
        self.half_width[axis]
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn shape(&self) -> &[usize] {
        &self.points
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_width[axis] / self.points[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Spacing of the dual frequency lattice, `1/(2L)`.
    pub fn frequency_spacing(&self, axis: usize) -> f64 {
        0.5 / self.half_width[axis]
    }

    /// Nyquist frequency `N/(4L)`.
    pub fn nyquist(&self, axis: usize) -> f64 {
        self.points[axis] as f64 / (4.0 * self.half_width[axis])
    }

    pub fn min_nyquist(&self) -> f64 {
        (0..self.dim()).map(|a| self.nyquist(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, axis: usize, k: usize) -> f64 {
        -self.half_width[axis] + k as f64 * self.spacing(axis)
    }

    /// Node coordinates along one axis.
    pub fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis]).map(|k| self.node(axis, k)).collect()
    }

    /// Row-major multi-index (last axis fastest) of a flat index.
    pub fn unflatten(&self, mut idx: usize, out: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            out[a] = idx % self.points[a];
            idx /= self.points[a];
        }
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.points).fold(0, |acc, (&k, &n)| acc * n + k)
    }

    /// Coordinates of flat index `idx`, written into `out[..d]`.
    pub fn coords(&self, idx: usize, out: &mut [f64]) {
        let mut m = [0usize; 3];
        self.unflatten(idx, &mut m[..self.dim()]);
        for a in 0..self.dim() {
            out[a] = self.node(a, m[a]);
        }
    }
}

/// Complex values on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::ValueCount { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self { grid, values: alloc::vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let d = grid.dim();
        let mut x = [0.0; 3];
        let values = (0..grid.len())
            .map(|i| {
                grid.coords(i, &mut x);
                f(&x[..d])
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell_volume())
    }

    /// `sum u conj(v) dV`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, GridError> {
        if self.grid != other.grid {
            return Err(GridError::Mismatch);
        }
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.cell_volume())
    }

    pub fn add(&self, other: &Self) -> Result<Self, GridError> {
        if self.grid != other.grid {
            return Err(GridError::Mismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    /// `x -> conj(f(-x))`, with nodes lacking a mirror image set to zero.
    pub fn reflect_conj(&self) -> Self {
        let g = &self.grid;
        let d = g.dim();
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); g.len()];
        let mut m = [0usize; 3];
        let mut r = [0usize; 3];
        for (i, o) in out.iter_mut().enumerate() {
            g.unflatten(i, &mut m[..d]);
            let mut inside = true;
            for a in 0..d {
                if m[a] == 0 {
                    inside = false;
                    break;
                }
                r[a] = g.points(a) - m[a];
            }
            if inside {
                *o = self.values[g.flatten(&r[..d])].conj();
            }
        }
        Self { grid: g.clone(), values: out }
    }

    /// True when every sample outside the centred box of half-widths `frac * L_i`
    /// is at most `tol * sup|f|` in modulus.
    pub fn supported_within(&self, frac: f64, tol: f64) -> bool {
        let g = &self.grid;
        let d = g.dim();
        let cut = tol * self.sup_norm();
        let mut x = [0.0; 3];
        self.values.iter().enumerate().all(|(i, v)| {
            g.coords(i, &mut x);
            let inside = (0..d).all(|a| x[a].abs() <= frac * g.half_width(a));
            inside || v.norm() <= cut
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let g = GridSpec::new(alloc::vec![2.0, 1.0], alloc::vec![8, 16]).unwrap();
        assert_eq!(g.len(), 128);
        assert_eq!(g.spacing(0), 0.5);
        assert_eq!(g.spacing(1), 0.125);
        assert_eq!(g.cell_volume(), 0.0625);
        assert_eq!(g.nyquist(0), 1.0);
        assert_eq!(g.frequency_spacing(1), 0.5);
        assert_eq!(g.node(0, 4), 0.0);
        let mut m = [0; 2];
        g.unflatten(37, &mut m);
        assert_eq!(m, [2, 5]);
        assert_eq!(g.flatten(&m), 37);
        let mut x = [0.0; 2];
        g.coords(37, &mut x);
        assert_eq!(x, [-1.0, -0.375]);
    }

    #[test]
    fn rejects() {
        assert!(GridSpec::isotropic(2, 1.0, 4).is_err());
        assert!(GridSpec::isotropic(4, 1.0, 8).is_err());
        assert!(GridSpec::isotropic(1, 0.0, 8).is_err());
        let g = GridSpec::isotropic(1, 1.0, 8).unwrap();
        assert!(SampledField::new(g.clone(), alloc::vec![Complex64::new(0.0, 0.0); 7]).is_err());
        let mut v = alloc::vec![Complex64::new(0.0, 0.0); 8];
        v[3].re = f64::NAN;
        assert_eq!(SampledField::new(g, v), Err(GridError::NonFinite(3)));
    }

    #[test]
    fn reflection() {
        let g = GridSpec::isotropic(1, 1.0, 8).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::new(x[0], 1.0 + x[0]));
        let r = f.reflect_conj();
        assert_eq!(r.values()[0], Complex64::new(0.0, 0.0));
        for k in 1..8 {
            let x = -1.0 + 0.25 * k as f64;
            assert_eq!(r.values()[k], Complex64::new(-x, -(1.0 - x)));
        }
    }
}

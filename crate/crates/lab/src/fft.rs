//! Multi-dimensional FFTs over row-major buffers.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward and inverse transforms for one shape. Neither direction is normalized.
pub struct FftNd {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl FftNd {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self { shape: shape.to_vec(), forward, inverse }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `X[k] = sum_n x[n] e^{-2 pi i k.n / N}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// `x[n] = sum_k X[k] e^{+2 pi i k.n / N}`, without the `1/N`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len(), "buffer does not match the planned shape");
        let d = self.shape.len();
        let mut stride = 1;
        for axis in (0..d).rev() {
            let n = self.shape[axis];
            let plan = &plans[axis];
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            if stride == 1 {
                for line in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(line, &mut scratch);
                }
            } else {
                // gather a block of lines at a time to keep the strided reads cache friendly
                let block = stride.min(16);
                let mut buf = vec![Complex64::new(0.0, 0.0); n * block];
                let outer = data.len() / (n * stride);
                for o in 0..outer {
                    let base = o * n * stride;
                    let mut s0 = 0;
                    while s0 < stride {
                        let b = block.min(stride - s0);
                        for k in 0..n {
                            let row = base + k * stride + s0;
                            for t in 0..b {
                                buf[t * n + k] = data[row + t];
                            }
                        }
                        for t in 0..b {
                            plan.process_with_scratch(&mut buf[t * n..(t + 1) * n], &mut scratch);
                        }
                        for k in 0..n {
                            let row = base + k * stride + s0;
                            for t in 0..b {
                                data[row + t] = buf[t * n + k];
                            }
                        }
                        s0 += b;
                    }
                }
            }
            stride *= n;
        }
    }
}

/// Smallest `2^a 3^b 5^c` that is at least `n`.
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive(data: &[Complex64], shape: &[usize], sign: f64) -> Vec<Complex64> {
        let len: usize = shape.iter().product();
        let idx = |mut i: usize| {
            let mut m = vec![0; shape.len()];
            for a in (0..shape.len()).rev() {
                m[a] = i % shape[a];
                i /= shape[a];
            }
            m
        };
        (0..len)
            .map(|k| {
                let km = idx(k);
                (0..len)
                    .map(|n| {
                        let nm = idx(n);
                        let t: f64 = (0..shape.len()).map(|a| (km[a] * nm[a]) as f64 / shape[a] as f64).sum();
                        data[n] * Complex64::from_polar(1.0, sign * 2.0 * PI * t)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for shape in [vec![12], vec![6, 10], vec![4, 3, 5], vec![40, 3]] {
            let len: usize = shape.iter().product();
            let data: Vec<Complex64> = (0..len).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos())).collect();
            let plan = FftNd::new(&shape);
            let mut f = data.clone();
            plan.forward(&mut f);
            for (a, b) in f.iter().zip(naive(&data, &shape, -1.0)) {
                assert!((a - b).norm() < 1e-10);
            }
            plan.inverse(&mut f);
            for (a, b) in f.iter().zip(&data) {
                assert!((a / len as f64 - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(next_smooth(1), 1);
        assert_eq!(next_smooth(7), 8);
        assert_eq!(next_smooth(97), 100);
        assert_eq!(next_smooth(4096), 4096);
        assert_eq!(next_smooth(4097), 4320);
    }
}

//! Grid-accelerated Fourier transforms of discrete measures and the
//! Littlewood-Paley pieces `mu_j`.

use std::f64::consts::PI;

use num_complex::Complex64;
use restrict_core::bump::chi_j;
use restrict_core::field::{GridSpec, SampledField};
use restrict_core::measure::{cis_neg, DiscreteMeasure};

use crate::error::{LabError, Result};
use crate::fft::FftNd;
use crate::nufft::{Nufft, NufftOptions, Sign};

/// `mu^` on the lattice `origin + k_a step_a e_a`, `0 <= k_a < counts_a`, row-major, by a type 1 NUFFT.
pub fn transform_on_lattice(
    mu: &DiscreteMeasure,
    origin: &[f64],
    step: &[f64],
    counts: &[usize],
    opts: NufftOptions,
) -> Result<Vec<Complex64>> {
    let d = mu.dim();
    if origin.len() != d || step.len() != d || counts.len() != d || d > 3 {
        return Err(LabError::Dimension(format!("lattice for a measure in dimension {d}")));
    }
    // k_a = (m_a - floor(M_a/2)) with m_a the lattice index
    let shift: Vec<f64> = (0..d).map(|a| origin[a] + (counts[a] / 2) as f64 * step[a]).collect();
    let mut pts = Vec::with_capacity(mu.len() * d);
    let mut strengths = Vec::with_capacity(mu.len());
    for (j, &w) in mu.weights().iter().enumerate() {
        let x = mu.atom(j);
        let t: f64 = x.iter().zip(&shift).map(|(a, b)| a * b).sum();
        strengths.push(cis_neg(t) * w);
        for a in 0..d {
            pts.push(2.0 * PI * step[a] * x[a]);
        }
    }
    Ok(Nufft::new(counts, opts).type1(&pts, &strengths, Sign::Minus))
}

/// Samples of `mu_j = mu * F^{-1}[chi_j]` and the sup norms of `mu^_j` and `mu_j`.
#[derive(Debug, Clone)]
pub struct DyadicPiece {
    pub j: u32,
    pub field: SampledField,
    /// Largest `|mu^ chi_j|` on the dual lattice of the grid.
    pub sup_mu_hat_j: f64,
    pub sup_mu_j: f64,
}

/// `mu_j` on `grid`, computed as the lattice Riemann sum of `mu^ chi_j e^{2 pi i x.xi}` with
/// lattice spacing `1/(2L)`, so the result is the `2L`-periodisation of `mu_j`.
///
/// Needs the Nyquist frequency to reach `2^(j+1)` and, for atomic approximations, the
/// aliasing frequency to reach `2^j`.
pub fn dyadic_piece(mu: &DiscreteMeasure, j: u32, grid: &GridSpec) -> Result<DyadicPiece> {
    let d = mu.dim();
    if grid.dim() != d {
        return Err(LabError::Dimension(format!("grid dimension {} for a measure in dimension {d}", grid.dim())));
    }
    let top = (1u64 << j) as f64;
    if grid.min_nyquist() < 2.0 * top {
        return Err(LabError::Resolution {
            what: format!("Nyquist frequency for j = {j}"),
            required: 2.0 * top,
            actual: grid.min_nyquist(),
        });
    }
    if let Some(limit) = mu.aliasing_frequency() {
        if limit < top {
            return Err(LabError::Resolution { what: format!("aliasing frequency for j = {j}"), required: top, actual: limit });
        }
    }
    // lattice k / (2L) with |k| <= 2^j 2L covers supp chi_j
    let reach: Vec<usize> = (0..d).map(|a| (top * 2.0 * grid.half_width(a)).ceil() as usize).collect();
    let counts: Vec<usize> = reach.iter().map(|r| 2 * r + 1).collect();
    let step: Vec<f64> = (0..d).map(|a| grid.frequency_spacing(a)).collect();
    let origin: Vec<f64> = (0..d).map(|a| -(reach[a] as f64) * step[a]).collect();
    let hat = transform_on_lattice(mu, &origin, &step, &counts, NufftOptions::default())?;
    let shape = grid.shape().to_vec();
    let plan = FftNd::new(&shape);
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut sup_hat: f64 = 0.0;
    let mut m = [0usize; 3];
    let total: usize = counts.iter().product();
    for (i, v) in hat.iter().enumerate().take(total) {
        let mut rem = i;
        for a in (0..d).rev() {
            m[a] = rem % counts[a];
            rem /= counts[a];
        }
        let mut r2 = 0.0;
        let mut flat = 0usize;
        let mut parity = 0i64;
        for a in 0..d {
            let k = m[a] as i64 - reach[a] as i64;
            let xi = k as f64 * step[a];
            r2 += xi * xi;
            parity += k;
            flat = flat * shape[a] + k.rem_euclid(shape[a] as i64) as usize;
        }
        let c = chi_j(j, r2.sqrt());
        if c == 0.0 {
            continue;
        }
        let g = v * c;
        sup_hat = sup_hat.max(g.norm());
        // x_n = -L + n h gives e^{2 pi i x_n xi_k} = (-1)^k e^{2 pi i n k / N}
        buf[flat] += if parity % 2 == 0 { g } else { -g };
    }
    plan.inverse(&mut buf);
    let dual: f64 = step.iter().product();
    for v in buf.iter_mut() {
        *v *= dual;
    }
    let field = SampledField::new(grid.clone(), buf)?;
    let sup_mu_j = field.sup_norm();
    Ok(DyadicPiece { j, field, sup_mu_hat_j: sup_hat, sup_mu_j })
}

#[cfg(test)]
mod tests {
    use super::*;
    use restrict_core::measure::{fourier_transform_lattice, make_cantor_measure, make_sphere_measure};

    #[test]
    fn lattice_matches_direct() {
        let c = make_sphere_measure(2, 300).unwrap();
        let fast = transform_on_lattice(&c, &[-3.1, 0.4], &[0.25, 0.3], &[21, 16], NufftOptions::default()).unwrap();
        let slow = fourier_transform_lattice(&c, &[-3.1, 0.4], &[0.25, 0.3], &[21, 16]).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
        let k = make_cantor_measure(0.3, 7).unwrap();
        let fast = transform_on_lattice(&k, &[-40.0], &[0.37], &[200], NufftOptions::default()).unwrap();
        let slow = fourier_transform_lattice(&k, &[-40.0], &[0.37], &[200]).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
        let s = make_sphere_measure(3, 200).unwrap();
        let fast = transform_on_lattice(&s, &[-1.0, 0.0, 2.0], &[0.5, 0.25, 0.1], &[5, 6, 7], NufftOptions::default()).unwrap();
        let slow = fourier_transform_lattice(&s, &[-1.0, 0.0, 2.0], &[0.5, 0.25, 0.1], &[5, 6, 7]).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn dirac_piece_is_the_multiplier() {
        let grid = GridSpec::isotropic(2, 2.0, 128).unwrap();
        let p = dyadic_piece(&DiscreteMeasure::dirac(2), 3, &grid).unwrap();
        assert!((p.sup_mu_hat_j - 1.0).abs() < 1e-11);
        // mu_3 = F^{-1} chi_3, real and even
        let v = p.field.values();
        assert!(v.iter().all(|z| z.im.abs() < 1e-10));
        assert!(dyadic_piece(&DiscreteMeasure::dirac(2), 6, &grid).is_err());
    }

    #[test]
    fn pieces_sum_to_low_pass() {
        // sum_{j<=J} mu_j has multiplier chi0(2^-J .), i.e. the low-pass at scale 2^J
        let c = make_sphere_measure(2, 512).unwrap();
        let grid = GridSpec::isotropic(2, 2.0, 128).unwrap();
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        for j in 0..=3 {
            let p = dyadic_piece(&c, j, &grid).unwrap();
            for (a, b) in acc.iter_mut().zip(p.field.values()) {
                *a += b;
            }
        }
        // direct lattice sum with chi0(|xi| / 8)
        let n = 65;
        let hat = fourier_transform_lattice(&c, &[-8.0, -8.0], &[0.25, 0.25], &[n, n]).unwrap();
        let mut x = [0.0; 2];
        for i in (0..grid.len()).step_by(97) {
            grid.coords(i, &mut x);
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    let xi = [-8.0 + 0.25 * a as f64, -8.0 + 0.25 * b as f64];
                    let w = restrict_core::bump::chi0((xi[0] * xi[0] + xi[1] * xi[1]).sqrt() / 8.0);
                    s += hat[a * n + b] * w * cis_neg(-(x[0] * xi[0] + x[1] * xi[1]));
                }
            }
            s *= 0.0625;
            assert!((s - acc[i]).norm() < 1e-9, "{s} {}", acc[i]);
        }
    }
}

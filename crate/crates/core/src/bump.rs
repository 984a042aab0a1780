//! Smooth compactly supported profiles.
//!
//! Everything is built from `h(t) = exp(-1/t)` for `t > 0`. The step
//! `h(t) / (h(t) + h(1 - t))` climbs from 0 to 1 on `[0, 1]`, and
//! `chi0(r) = 1 - step(2|r| - 1)` equals 1 on `|r| <= 1/2` and vanishes for `|r| >= 1`.

fn h(t: f64) -> f64 {
    if t > 0.0 {
        libm::exp(-1.0 / t)
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = h(t);
    let b = h(1.0 - t);
    a / (a + b)
}

/// Radial bump: 1 on `|r| <= 1/2`, supported in `|r| < 1`.
pub fn chi0(r: f64) -> f64 {
    1.0 - smooth_step(2.0 * r.abs() - 1.0)
}

/// Even bump on `(-1, 1)`, identically 1 on `|t| <= 1/2`.
pub fn eta0(t: f64) -> f64 {
    chi0(t)
}

/// Bump supported in `(3/4, 5/4)` (as a function of `|t|`), equal to 1 on `|t| - 1| <= 1/8`.
pub fn eta1(t: f64) -> f64 {
    chi0(4.0 * (t.abs() - 1.0))
}

/// Annular piece `chi0(2^-j r) - chi0(2^(1-j) r)` for `j >= 1`, and `chi0` itself for `j = 0`.
///
/// Supported in `2^(j-2) < |r| < 2^j`.
pub fn chi_j(j: u32, r: f64) -> f64 {
    let r = r.abs();
    if j == 0 {
        return chi0(r);
    }
    let s = libm::ldexp(1.0, -(j as i32));
    chi0(s * r) - chi0(2.0 * s * r)
}

//! Exact exponent bookkeeping for restriction and oscillatory estimates.
//!
//! All quantities are `BigRational`. With `g = d - a`:
//!
//! ```text
//! p_circ = 2(g + b) / (2g + b)        theta = g / (g + b)        gamma = g / (g + 2b)
//! rho    = (g + 2b)(g + b) / (g^2 + 3bg + b^2)                   sigma = (g + 2b) / b
//! ```

use alloc::string::ToString;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ExponentError;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Reads `n`, `n/m` or a finite decimal such as `-0.125`, exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ExponentError> {
    let t = text.trim();
    let bad = || ExponentError::Parse(text.to_string());
    if let Some((n, m)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let m: BigInt = m.trim().parse().map_err(|_| bad())?;
        if m.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, m));
    }
    let (whole, frac) = t.split_once('.').unwrap_or((t, ""));
    let neg = whole.starts_with('-');
    let digits = whole.trim_start_matches(['-', '+']);
    if (digits.is_empty() && frac.is_empty()) || !frac.bytes().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    if !digits.bytes().all(|c| c.is_ascii_digit()) || whole.len() - digits.len() > 1 {
        return Err(bad());
    }
    let mantissa: BigInt = alloc::format!("{digits}{frac}").parse().map_err(|_| bad())?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(mantissa, scale);
    Ok(if neg { -v } else { v })
}

/// Hoelder conjugate `p / (p - 1)` for `p > 1`.
pub fn conjugate(p: &Rational) -> Rational {
    p / (p - Rational::one())
}

/// A rational or `+infinity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extended {
    Finite(Rational),
    Infinite,
}

impl core::fmt::Display for Extended {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Extended::Finite(q) => write!(f, "{q}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentProfile {
    pub d: u32,
    pub a: Rational,
    pub b: Rational,
    pub p_circ: Rational,
    pub p_circ_dual: Rational,
    pub theta: Rational,
    pub gamma: Rational,
    pub rho: Rational,
    pub sigma: Rational,
    pub rho_dual: Rational,
    pub sigma_dual: Rational,
}

impl ExponentProfile {
    /// `d - a`.
    pub fn gap(&self) -> Rational {
        int(self.d as i64) - &self.a
    }

    /// Exponent of `A` in the restriction constant, `b / (d - a + b)`.
    pub fn a_weight(&self) -> Rational {
        &self.b / (self.gap() + &self.b)
    }

    /// Exponent of `B` in the restriction constant, `(d - a) / (d - a + b)`.
    pub fn b_weight(&self) -> Rational {
        self.gap() / (self.gap() + &self.b)
    }
}

fn rho_sigma(g: &Rational, b: &Rational) -> (Rational, Rational) {
    let two = int(2);
    let three = int(3);
    let rho = (g + &two * b) * (g + b) / (g * g + &three * b * g + b * b);
    let sigma = (g + two * b) / b;
    (rho, sigma)
}

pub fn exponent_profile(d: u32, a: Rational, b: Rational) -> Result<ExponentProfile, ExponentError> {
    if d == 0 {
        return Err(ExponentError::Dimension);
    }
    if !a.is_positive() {
        return Err(ExponentError::ANonPositive(a.to_string()));
    }
    let dq = int(d as i64);
    if a >= dq {
        return Err(ExponentError::ANotBelowD { a: a.to_string(), d });
    }
    if !b.is_positive() {
        return Err(ExponentError::BNonPositive(b.to_string()));
    }
    if &b * int(2) > a {
        return Err(ExponentError::BAboveHalfA { a: a.to_string(), b: b.to_string() });
    }
    let g = &dq - &a;
    let two = int(2);
    let p_circ = &two * (&g + &b) / (&two * &g + &b);
    let p_circ_dual = conjugate(&p_circ);
    let theta = &g / (&g + &b);
    let gamma = &g / (&g + &two * &b);
    let (rho, sigma) = rho_sigma(&g, &b);
    let rho_dual = conjugate(&rho);
    let sigma_dual = conjugate(&sigma);
    Ok(ExponentProfile { d, a, b, p_circ, p_circ_dual, theta, gamma, rho, sigma, rho_dual, sigma_dual })
}

/// `q = b p' / (d - a + b)`, the exponent reached by interpolating the endpoint with `L^1 -> L^inf`.
pub fn critical_q(profile: &ExponentProfile, p: &Rational) -> Result<Extended, ExponentError> {
    if *p < Rational::one() || *p > profile.p_circ {
        return Err(ExponentError::POutOfRange { p: p.to_string(), p_circ: profile.p_circ.to_string() });
    }
    if p.is_one() {
        return Ok(Extended::Infinite);
    }
    Ok(Extended::Finite(&profile.b * conjugate(p) / (profile.gap() + &profile.b)))
}

/// `q = (d + 1)/(d - 1) p'` for `1 < p < 2d/(d - 1)`.
pub fn hormander_q(d: u32, p: &Rational) -> Result<Rational, ExponentError> {
    if d < 2 {
        return Err(ExponentError::HormanderRange { p: p.to_string(), d });
    }
    let dq = int(d as i64);
    let upper = int(2) * &dq / (&dq - int(1));
    if *p <= Rational::one() || *p >= upper {
        return Err(ExponentError::HormanderRange { p: p.to_string(), d });
    }
    Ok((&dq + int(1)) / (dq - int(1)) * conjugate(p))
}

/// Exponents attached to a curvature count `kappa`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OscillatoryExponents {
    pub kappa: u32,
    q_circ: Option<Rational>,
    pub q1: Rational,
    rho_kappa: Option<(Rational, Rational)>,
    pub rho1: Rational,
    pub sigma1: Rational,
}

impl OscillatoryExponents {
    /// `2 + 4/kappa`.
    pub fn q_circ(&self) -> Result<&Rational, ExponentError> {
        self.q_circ.as_ref().ok_or(ExponentError::KappaZero)
    }

    /// `(rho, sigma)` at `d - a = 1`, `b = kappa/2`.
    pub fn rho_sigma_kappa(&self) -> Result<(&Rational, &Rational), ExponentError> {
        self.rho_kappa.as_ref().map(|(r, s)| (r, s)).ok_or(ExponentError::KappaZero)
    }
}

/// Only `d - a` enters the formulas, and it equals 1 for `a = d - 1`.
pub fn oscillatory_exponents(kappa: u32) -> OscillatoryExponents {
    let k = int(kappa as i64);
    let one = int(1);
    let two = int(2);
    let (q_circ, rho_kappa) = if kappa == 0 {
        (None, None)
    } else {
        (Some(&two + int(4) / &k), Some(rho_sigma(&one, &(&k / &two))))
    };
    let q1 = (&two * &k + int(4)) / (&k + &one);
    let (rho1, sigma1) = rho_sigma(&one, &((&k + &one) / &two));
    OscillatoryExponents { kappa, q_circ, q1, rho_kappa, rho1, sigma1 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationInput {
    pub beta0: Rational,
    pub beta1: Rational,
    pub m0: f64,
    pub m1: f64,
    /// `(1/p, 1/q)` at the decaying endpoint.
    pub endpoint0: (Rational, Rational),
    /// `(1/p, 1/q)` at the growing endpoint.
    pub endpoint1: (Rational, Rational),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationResult {
    pub vartheta: Rational,
    pub target: (Rational, Rational),
    /// `M0^(1 - vartheta) M1^vartheta`; the full bound carries an extra factor `C(beta0, beta1)`.
    pub constant_bound: f64,
    pub constant_note: &'static str,
}

/// Restricted weak type bound for `sum_j T_j` when `||T_j|| <= M0 2^(-j beta0)` at
/// `endpoint0` and `<= M1 2^(j beta1)` at `endpoint1`.
pub fn bourgain_interpolate(input: &InterpolationInput) -> Result<InterpolationResult, ExponentError> {
    if !input.beta0.is_positive() || !input.beta1.is_positive() {
        return Err(ExponentError::Beta);
    }
    if !(input.m0 > 0.0 && input.m0.is_finite() && input.m1 > 0.0 && input.m1.is_finite()) {
        return Err(ExponentError::Constant);
    }
    let vartheta = &input.beta0 / (&input.beta0 + &input.beta1);
    let w0 = Rational::one() - &vartheta;
    let target = (
        &w0 * &input.endpoint0.0 + &vartheta * &input.endpoint1.0,
        &w0 * &input.endpoint0.1 + &vartheta * &input.endpoint1.1,
    );
    let t = to_f64(&vartheta);
    let constant_bound = libm::pow(input.m0, 1.0 - t) * libm::pow(input.m1, t);
    Ok(InterpolationResult { vartheta, target, constant_bound, constant_note: "xC" })
}

/// Outcome of the exact identity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityReport {
    /// `(1 - theta)(d - a) = theta b`.
    pub theta_balance: bool,
    /// `(1 - gamma)(d - a)/2 = gamma b`.
    pub gamma_balance: bool,
    /// `(1 - gamma)(1 - theta/2) = b/(d - a + b) = 1 - theta` and `(1 - gamma) theta/2 + gamma = theta`.
    pub gamma_theta_weights: bool,
    /// `(1 - gamma)(1/p_circ, 1/2) + gamma (1, 0) = (1/rho, 1/sigma)`.
    pub rho_sigma_interpolant: bool,
    /// `(1/p_circ, 1/p_circ')` is the midpoint of `(1/rho, 1/sigma)` and `(1/sigma', 1/rho')`.
    pub midpoint: bool,
    /// `1 - 1/rho + 1/sigma = 2/p_circ'`.
    pub duality_gap: bool,
    /// First-stage interpolation lands on `1/p_circ` with `vartheta = 1 - theta`.
    pub stage_one: bool,
    /// Second-stage interpolation (`beta0 = b`, `beta1 = (d - a)/2`) lands on `(1/rho, 1/sigma)`.
    pub stage_two: bool,
    /// `b p_circ' / (d - a + b) = 2`.
    pub critical_q_at_endpoint: bool,
}

impl IdentityReport {
    pub fn all(&self) -> bool {
        self.named().iter().all(|(_, v)| *v)
    }

    pub fn named(&self) -> [(&'static str, bool); 9] {
        [
            ("theta_balance", self.theta_balance),
            ("gamma_balance", self.gamma_balance),
            ("gamma_theta_weights", self.gamma_theta_weights),
            ("rho_sigma_interpolant", self.rho_sigma_interpolant),
            ("midpoint", self.midpoint),
            ("duality_gap", self.duality_gap),
            ("stage_one", self.stage_one),
            ("stage_two", self.stage_two),
            ("critical_q_at_endpoint", self.critical_q_at_endpoint),
        ]
    }
}

pub fn verify_identities(pr: &ExponentProfile) -> IdentityReport {
    let one = Rational::one();
    let two = int(2);
    let half = rat(1, 2);
    let g = pr.gap();
    let b = &pr.b;
    let th = &pr.theta;
    let ga = &pr.gamma;

    let theta_balance = (&one - th) * &g == th * b;
    let gamma_balance = (&one - ga) * &g / &two == ga * b;
    let w = b / (&g + b);
    let gamma_theta_weights =
        (&one - ga) * (&one - th / &two) == w && w == &one - th && (&one - ga) * th / &two + ga == *th;
    let inv_p = pr.p_circ.recip();
    let rho_sigma_interpolant = (&one - ga) * &inv_p + ga == pr.rho.recip()
        && (&one - ga) * &half == pr.sigma.recip();
    let midpoint = (pr.rho.recip() + pr.sigma_dual.recip()) / &two == inv_p
        && (pr.sigma.recip() + pr.rho_dual.recip()) / &two == pr.p_circ_dual.recip();
    let duality_gap = &one - pr.rho.recip() + pr.sigma.recip() == &two / &pr.p_circ_dual;

    let stage = bourgain_interpolate(&InterpolationInput {
        beta0: b.clone(),
        beta1: g.clone(),
        m0: 1.0,
        m1: 1.0,
        endpoint0: (one.clone(), Rational::zero()),
        endpoint1: (half.clone(), half.clone()),
    });
    let stage_one = match stage {
        Ok(r) => r.target.0 == inv_p && r.vartheta == &one - th,
        Err(_) => false,
    };
    let stage = bourgain_interpolate(&InterpolationInput {
        beta0: b.clone(),
        beta1: &g / &two,
        m0: 1.0,
        m1: 1.0,
        endpoint0: (one.clone(), Rational::zero()),
        endpoint1: (inv_p.clone(), half.clone()),
    });
    let stage_two = match stage {
        Ok(r) => r.target == (pr.rho.recip(), pr.sigma.recip()),
        Err(_) => false,
    };
    let critical_q_at_endpoint =
        matches!(critical_q(pr, &pr.p_circ), Ok(Extended::Finite(q)) if q == two);

    IdentityReport {
        theta_balance,
        gamma_balance,
        gamma_theta_weights,
        rho_sigma_interpolant,
        midpoint,
        duality_gap,
        stage_one,
        stage_two,
        critical_q_at_endpoint,
    }
}

//! Standard-normal CDF and quantile, plus the cached probit parameters the
//! confidence-weighted updates need.
//!
//! The quantile is a rational approximation (Acklam's coefficients) refined
//! by one Halley step against our own erf, which lands the residual
//! |Φ(x) − p| at machine-precision level, far inside the 1e-12 contract.

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
#[allow(clippy::excessive_precision)]
const SQRT_2PI: f64 = 2.506628274631000502415765;
const LN_SQRT_PI: f64 = 0.5723649429247001;

/// Regularized lower incomplete gamma P(1/2, x) by series.
fn gamma_p_half(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = 0.5;
    let mut term: f64 = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    while term.abs() > sum.abs() * 1e-17 {
        term *= x / (a + n);
        sum += term;
        n += 1.0;
        if n > 500.0 {
            break;
        }
    }
    sum * (-x + a * x.ln() - LN_SQRT_PI).exp()
}

/// Regularized upper incomplete gamma Q(1/2, x) by continued fraction
/// (modified Lentz). Accurate for x away from 0; callers switch to the
/// series below the crossover.
fn gamma_q_half(x: f64) -> f64 {
    let a = 0.5;
    const FPMIN: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 3e-17 {
            break;
        }
    }
    h * (-x + a * x.ln() - LN_SQRT_PI).exp()
}

const GAMMA_CROSSOVER: f64 = 1.5;

fn erf_nonneg(u: f64) -> f64 {
    let u2 = u * u;
    if u2 < GAMMA_CROSSOVER {
        gamma_p_half(u2)
    } else {
        1.0 - gamma_q_half(u2)
    }
}

fn erfc_nonneg(u: f64) -> f64 {
    let u2 = u * u;
    if u2 < GAMMA_CROSSOVER {
        1.0 - gamma_p_half(u2)
    } else {
        gamma_q_half(u2)
    }
}

/// Standard normal CDF. Relative accuracy holds into the far lower tail
/// (the branch keeps erfc's argument nonnegative, avoiding cancellation).
pub fn normal_cdf(x: f64) -> f64 {
    let t = x / SQRT_2;
    if t < 0.0 {
        0.5 * erfc_nonneg(-t)
    } else {
        0.5 * (1.0 + erf_nonneg(t))
    }
}

// Acklam's inverse-normal coefficients, as published.
#[allow(clippy::excessive_precision)]
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

fn acklam(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Inverse standard normal CDF on (0, 1).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "quantile argument must lie in (0, 1), got {p}"
        )));
    }
    let mut x = acklam(p);
    // One Halley step: with e = Φ(x) − p and u = e / φ(x),
    // x ← x − u / (1 + x·u/2).
    let e = normal_cdf(x) - p;
    let u = e * SQRT_2PI * (x * x / 2.0).exp();
    x -= u / (1.0 + x * u / 2.0);
    Ok(x)
}

/// Probit-margin parameters shared by every confidence-weighted update:
/// φ = Φ⁻¹(η), ψ = 1 + φ²/2, ζ = 1 + φ². Computed once per ranker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbitParams {
    eta: f64,
    phi: f64,
    psi: f64,
    zeta: f64,
}

impl ProbitParams {
    /// `eta` is the confidence level; only (0.5, 1) gives a positive margin.
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.5 && eta < 1.0) {
            return Err(Error::Domain(format!(
                "confidence level must lie in (0.5, 1), got {eta}"
            )));
        }
        let phi = normal_quantile(eta)?;
        Ok(Self::from_phi_unchecked(eta, phi))
    }

    /// Construct directly from a positive probit margin φ.
    pub fn from_phi(phi: f64) -> Result<Self> {
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::Domain(format!(
                "probit margin must be positive and finite, got {phi}"
            )));
        }
        Ok(Self::from_phi_unchecked(normal_cdf(phi), phi))
    }

    fn from_phi_unchecked(eta: f64, phi: f64) -> Self {
        ProbitParams {
            eta,
            phi,
            psi: 1.0 + phi * phi / 2.0,
            zeta: 1.0 + phi * phi,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }
}

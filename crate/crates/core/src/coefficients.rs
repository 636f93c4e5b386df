//! Time-variable coefficients a(t), b(t), the derived quantities r = a/b and
//! R(t) = \int_0^t r, the (alpha, beta)-plane region classification, and the
//! exponent formulas attached to the effective-damping region.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance for detecting a point sitting on a region-defining curve.
pub const BOUNDARY_TOL: f64 = 1e-12;

pub type CoeffFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum CoefficientFamily {
    /// a(t) = (1+t)^alpha, b(t) = (1+t)^beta exactly.
    ExactPowerLaw,
    /// User callables for a, b and their derivatives (positive over t >= 0).
    UserSupplied {
        a: CoeffFn,
        b: CoeffFn,
        a_prime: CoeffFn,
        b_prime: CoeffFn,
    },
}

impl std::fmt::Debug for CoefficientFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoefficientFamily::ExactPowerLaw => write!(f, "ExactPowerLaw"),
            CoefficientFamily::UserSupplied { .. } => write!(f, "UserSupplied"),
        }
    }
}

/// The coefficient pair (a, b) with exponents (alpha, beta).
#[derive(Clone, Debug)]
pub struct CoefficientModel {
    pub alpha: f64,
    pub beta: f64,
    pub family: CoefficientFamily,
}

/// Values of the coefficients and their derivatives at a fixed time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffValues {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
}

/// r = a/b and its derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioValues {
    pub r: f64,
    pub r_prime: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum RegionLabel {
    Omega1,
    Omega2,
    Omega3,
    Omega4,
    Omega5,
    Boundary,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegionLabel::Omega1 => "Omega1",
            RegionLabel::Omega2 => "Omega2",
            RegionLabel::Omega3 => "Omega3",
            RegionLabel::Omega4 => "Omega4",
            RegionLabel::Omega5 => "Omega5",
            RegionLabel::Boundary => "Boundary",
        };
        write!(f, "{s}")
    }
}

/// Exponents governing the decay of the rescaled coefficient factors.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ExponentConstants {
    /// min{(beta+1)/(alpha-beta+1), (2 alpha - beta + 1)/(alpha-beta+1)}.
    pub delta: f64,
    /// min{1/2, 2(beta+1)/(alpha-beta+1), (2 alpha - beta + 1)/(alpha-beta+1)}.
    pub lambda_max: f64,
    /// (-beta+1)/(alpha-beta+1); the nonlinearity is supercritical when below 2.
    pub supercriticality_exponent: f64,
}

impl CoefficientModel {
    pub fn power_law(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "exponents must be finite, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            family: CoefficientFamily::ExactPowerLaw,
        })
    }

    pub fn user_supplied(
        alpha: f64,
        beta: f64,
        a: CoeffFn,
        b: CoeffFn,
        a_prime: CoeffFn,
        b_prime: CoeffFn,
    ) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "exponents must be finite, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            family: CoefficientFamily::UserSupplied {
                a,
                b,
                a_prime,
                b_prime,
            },
        })
    }

    /// alpha - beta + 1, the exponent of R(t).
    pub fn growth_exponent(&self) -> f64 {
        self.alpha - self.beta + 1.0
    }

    pub fn region(&self) -> RegionLabel {
        classify_region(self.alpha, self.beta)
    }

    /// Evaluate a, b and their derivatives at t >= 0.
    pub fn eval(&self, t: f64) -> Result<CoeffValues> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "coefficient evaluation requires finite t >= 0, got {t}"
            )));
        }
        let v = match &self.family {
            CoefficientFamily::ExactPowerLaw => {
                let base = 1.0 + t;
                CoeffValues {
                    a: base.powf(self.alpha),
                    b: base.powf(self.beta),
                    a_prime: self.alpha * base.powf(self.alpha - 1.0),
                    b_prime: self.beta * base.powf(self.beta - 1.0),
                }
            }
            CoefficientFamily::UserSupplied {
                a,
                b,
                a_prime,
                b_prime,
            } => CoeffValues {
                a: a(t),
                b: b(t),
                a_prime: a_prime(t),
                b_prime: b_prime(t),
            },
        };
        if !(v.a.is_finite() && v.b.is_finite() && v.a_prime.is_finite() && v.b_prime.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "non-finite coefficient value at t = {t}"
            )));
        }
        if v.a <= 0.0 || v.b <= 0.0 {
            return Err(Error::InvalidCoefficient(format!(
                "coefficients must stay positive; got a = {}, b = {} at t = {t}",
                v.a, v.b
            )));
        }
        Ok(v)
    }

    /// r = a/b and r' = (a'b - a b')/b^2.
    pub fn ratio(&self, t: f64) -> Result<RatioValues> {
        let v = self.eval(t)?;
        Ok(RatioValues {
            r: v.a / v.b,
            r_prime: (v.a_prime * v.b - v.a * v.b_prime) / (v.b * v.b),
        })
    }

    /// R(t) = \int_0^t r(tau) dtau. Closed form for the power law, adaptive
    /// quadrature (relative tolerance 1e-12) otherwise.
    pub fn big_r(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "R(t) requires finite t >= 0, got {t}"
            )));
        }
        match &self.family {
            CoefficientFamily::ExactPowerLaw => {
                let q = self.growth_exponent();
                if q.abs() < 1e-14 {
                    Ok((1.0 + t).ln())
                } else {
                    Ok(((1.0 + t).powf(q) - 1.0) / q)
                }
            }
            CoefficientFamily::UserSupplied { .. } => {
                if t == 0.0 {
                    return Ok(0.0);
                }
                adaptive_simpson(|tau| self.ratio(tau).map(|v| v.r), 0.0, t, 1e-12)
            }
        }
    }

    /// Inverse of R: returns t with |R(t) - rho| <= 1e-10 (1 + rho).
    pub fn big_r_inverse(&self, rho: f64) -> Result<f64> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "R inverse requires finite rho >= 0, got {rho}"
            )));
        }
        if rho == 0.0 {
            return Ok(0.0);
        }
        match &self.family {
            CoefficientFamily::ExactPowerLaw => {
                let q = self.growth_exponent();
                if q.abs() < 1e-14 {
                    Ok(rho.exp() - 1.0)
                } else {
                    let arg = q * rho + 1.0;
                    if arg <= 0.0 {
                        return Err(Error::InvalidCoefficient(format!(
                            "R is bounded by {:.6e} for alpha - beta + 1 = {q}; cannot invert rho = {rho}",
                            -1.0 / q
                        )));
                    }
                    Ok(arg.powf(1.0 / q) - 1.0)
                }
            }
            CoefficientFamily::UserSupplied { .. } => self.invert_r_numeric(rho),
        }
    }

    fn invert_r_numeric(&self, rho: f64) -> Result<f64> {
        // Bracket by doubling, then bisect, then one round of Newton polish.
        let mut hi = 1.0;
        let mut r_hi = self.big_r(hi)?;
        let mut iter = 0;
        while r_hi < rho {
            hi *= 2.0;
            iter += 1;
            if iter > 200 {
                return Err(Error::InvalidCoefficient(format!(
                    "R(t) failed to reach rho = {rho}; is r(t) positive?"
                )));
            }
            let next = self.big_r(hi)?;
            if next < r_hi {
                return Err(Error::InvalidCoefficient(
                    "R(t) is not monotone increasing".into(),
                ));
            }
            r_hi = next;
        }
        let mut lo = 0.0;
        let tol = 1e-10 * (1.0 + rho);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let r_mid = self.big_r(mid)?;
            if (r_mid - rho).abs() <= 0.5 * tol {
                lo = mid;
                hi = mid;
                break;
            }
            if r_mid < rho {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 * (1.0 + hi) {
                break;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..4 {
            let f = self.big_r(t)? - rho;
            if f.abs() <= tol {
                break;
            }
            let slope = self.ratio(t)?.r;
            if slope <= 0.0 {
                return Err(Error::InvalidCoefficient(
                    "R(t) is not monotone increasing (r <= 0)".into(),
                ));
            }
            t = (t - f / slope).max(0.0);
        }
        let check = self.big_r(t)? - rho;
        if check.abs() > tol {
            return Err(Error::QuadratureFailure(format!(
                "R inversion stalled: |R(t) - rho| = {:.3e} at t = {t}",
                check.abs()
            )));
        }
        Ok(t)
    }

    /// Envelope factors max a / (1+t)^alpha, max (1+t)^alpha / a (and the same
    /// for b) over sampled times; for the exact power law all four are 1.
    pub fn envelope_report(&self, t_samples: &[f64]) -> Result<EnvelopeReport> {
        let mut rep = EnvelopeReport::default();
        for &t in t_samples {
            let v = self.eval(t)?;
            let pa = (1.0 + t).powf(self.alpha);
            let pb = (1.0 + t).powf(self.beta);
            rep.a_upper = rep.a_upper.max(v.a / pa);
            rep.a_lower = rep.a_lower.max(pa / v.a);
            rep.b_upper = rep.b_upper.max(v.b / pb);
            rep.b_lower = rep.b_lower.max(pb / v.b);
        }
        Ok(rep)
    }
}

/// Sampled Assumption-(A) envelope constants (all >= 1 when the envelope holds).
#[derive(Clone, Copy, Debug, Default)]
pub struct EnvelopeReport {
    pub a_upper: f64,
    pub a_lower: f64,
    pub b_upper: f64,
    pub b_lower: f64,
}

impl EnvelopeReport {
    pub fn constant(&self) -> f64 {
        self.a_upper
            .max(self.a_lower)
            .max(self.b_upper)
            .max(self.b_lower)
    }
}

/// Classify a point of the (alpha, beta) plane into the five open regions,
/// returning `Boundary` when any defining inequality is met within 1e-12.
pub fn classify_region(alpha: f64, beta: f64) -> RegionLabel {
    // Margins are positive strictly inside each region.
    let omega1 = [beta + 1.0, alpha + 1.0 - beta, 2.0 * alpha + 1.0 - beta];
    let omega2 = [beta + 1.0, beta - (2.0 * alpha + 1.0), 1.0 - beta];
    let omega3 = [-1.0 - beta, alpha + 1.0];
    let omega4 = [-1.0 - beta, -1.0 - alpha];
    let omega5 = [beta - 1.0, beta - (alpha + 1.0)];

    let strict = |margins: &[f64]| margins.iter().all(|&m| m > BOUNDARY_TOL);
    if strict(&omega1) {
        RegionLabel::Omega1
    } else if strict(&omega2) {
        RegionLabel::Omega2
    } else if strict(&omega3) {
        RegionLabel::Omega3
    } else if strict(&omega4) {
        RegionLabel::Omega4
    } else if strict(&omega5) {
        RegionLabel::Omega5
    } else {
        RegionLabel::Boundary
    }
}

/// Decay/rate exponents valid inside the effective-damping region.
pub fn exponent_constants(alpha: f64, beta: f64) -> Result<ExponentConstants> {
    if classify_region(alpha, beta) != RegionLabel::Omega1 {
        return Err(Error::OutOfRegion {
            alpha,
            beta,
            detail: "exponent constants are defined for points strictly inside Omega1".into(),
        });
    }
    let q = alpha - beta + 1.0;
    let first = (beta + 1.0) / q;
    let second = (2.0 * alpha - beta + 1.0) / q;
    Ok(ExponentConstants {
        delta: first.min(second),
        lambda_max: 0.5_f64.min(2.0 * first).min(second),
        supercriticality_exponent: (-beta + 1.0) / q,
    })
}

fn adaptive_simpson(
    f: impl Fn(f64) -> Result<f64> + Copy,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: impl Fn(f64) -> Result<f64> + Copy,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm)?;
        let frm = f(rm)?;
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || b - a < 1e-13 * (1.0 + b.abs()) {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::QuadratureFailure(format!(
                "adaptive quadrature failed to converge on [{a}, {b}]"
            )));
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let fa = f(a)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let fb = f(b)?;
    let whole = simpson(fa, fm, fb, b - a);
    let scale = whole.abs().max(1e-300);
    recurse(f, a, b, fa, fm, fb, whole, rel_tol * scale, 60)
}

//! The nonlinearity N(z) = mu z^2 + Ntilde(z), its derivatives, the smoothness
//! condition checker, and the spectral evaluation of the flux d/dx N(u_x).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TildeForm {
    /// Ntilde = 0 (quadratic-only nonlinearity).
    None,
    /// Ntilde(z) = |z|^{p-1} z.
    PowerLaw,
}

/// N(z) = mu z^2 + Ntilde(z) with p-th order Ntilde, p >= 3.
#[derive(Clone, Copy, Debug)]
pub struct NonlinearityModel {
    pub mu: f64,
    pub p: f64,
    pub tilde_form: TildeForm,
}

impl NonlinearityModel {
    pub fn new(mu: f64, p: f64, tilde_form: TildeForm) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidModel(format!("mu must be finite, got {mu}")));
        }
        if !(p.is_finite() && p >= 3.0) {
            return Err(Error::InvalidModel(format!(
                "the higher-order exponent requires p >= 3, got p = {p}"
            )));
        }
        Ok(Self {
            mu,
            p,
            tilde_form,
        })
    }

    /// Quadratic-only nonlinearity with weight mu.
    pub fn quadratic(mu: f64) -> Self {
        Self {
            mu,
            p: 3.0,
            tilde_form: TildeForm::None,
        }
    }

    /// The zero nonlinearity (linear problem).
    pub fn linear() -> Self {
        Self::quadratic(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.mu == 0.0 && self.tilde_form == TildeForm::None
    }

    /// N^{(order)}(z) for order in 0..=2.
    pub fn eval(&self, z: f64, order: u32) -> Result<f64> {
        let quad = match order {
            0 => self.mu * z * z,
            1 => 2.0 * self.mu * z,
            2 => 2.0 * self.mu,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "derivative order must be in 0..=2, got {order}"
                )))
            }
        };
        let tilde = match self.tilde_form {
            TildeForm::None => 0.0,
            TildeForm::PowerLaw => {
                let p = self.p;
                match order {
                    0 => z.abs().powf(p - 1.0) * z,
                    1 => p * z.abs().powf(p - 1.0),
                    // p (p-1) |z|^{p-3} z; regular at 0 for p >= 3
                    2 => {
                        if z == 0.0 {
                            0.0
                        } else {
                            p * (p - 1.0) * z.abs().powf(p - 3.0) * z
                        }
                    }
                    _ => unreachable!(),
                }
            }
        };
        Ok(quad + tilde)
    }

    /// Pointwise N applied to dealiased samples of u_x, followed by one
    /// spectral derivative (the product is re-truncated before differentiating).
    pub fn flux(&self, ux: &Field) -> Result<Field> {
        if !ux.is_finite() {
            return Err(Error::Overflow(
                "nonlinear flux input (u_x samples)".into(),
            ));
        }
        let spectrum = self.flux_spectrum(ux.grid(), &ux.grid().forward(ux.values()))?;
        Field::new(ux.grid().clone(), ux.grid().inverse(&spectrum))
    }

    /// Spectrum-in, spectrum-out form of [`flux`]: 2/3 truncation of the
    /// input modes, pointwise N in physical space, re-truncation, then one
    /// multiplication by i*xi.
    pub fn flux_spectrum(&self, grid: &Grid, ux_hat: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = grid.len();
        if self.is_zero() {
            return Ok(vec![Complex64::new(0.0, 0.0); n]);
        }
        let cutoff = n / 3;
        let keep = |k: usize| {
            let m = if k < n / 2 { k } else { n - k };
            m <= cutoff
        };
        let mut truncated: Vec<Complex64> = ux_hat
            .iter()
            .enumerate()
            .map(|(k, &c)| if keep(k) { c } else { Complex64::new(0.0, 0.0) })
            .collect();
        let clean = grid.inverse(&truncated);
        let mut pointwise = Vec::with_capacity(n);
        for &z in &clean {
            let v = self.eval(z, 0)?;
            if !v.is_finite() {
                return Err(Error::Overflow("pointwise nonlinearity evaluation".into()));
            }
            pointwise.push(v);
        }
        truncated = grid.forward(&pointwise);
        let xi = grid.wavenumbers();
        for (k, c) in truncated.iter_mut().enumerate() {
            if keep(k) && k != n / 2 {
                *c *= Complex64::new(0.0, xi[k]);
            } else {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(truncated)
    }

    /// Sample the Hoelder-type difference quotient of Ntilde^{(j)} over boxes
    /// [-1,1]^2 and [-10,10]^2 and report the largest observed ratios.
    pub fn verify_smoothness(&self, sample_count: usize, seed: u64) -> Result<SmoothnessReport> {
        if sample_count == 0 {
            return Err(Error::InvalidInput(
                "smoothness check needs at least one sample".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = SmoothnessReport::default();
        if self.tilde_form == TildeForm::None {
            report.vacuous = true;
            return Ok(report);
        }
        let tilde = |z: f64, j: u32| -> f64 {
            let p = self.p;
            match j {
                0 => z.abs().powf(p - 1.0) * z,
                1 => p * z.abs().powf(p - 1.0),
                _ => {
                    if z == 0.0 {
                        0.0
                    } else {
                        p * (p - 1.0) * z.abs().powf(p - 3.0) * z
                    }
                }
            }
        };
        for (scale, ratios) in [
            (1.0, &mut report.max_ratio_small),
            (10.0, &mut report.max_ratio_large),
        ] {
            for _ in 0..sample_count {
                let z: f64 = rng.gen_range(-scale..scale);
                let w: f64 = rng.gen_range(-scale..scale);
                if (z - w).abs() < 1e-12 {
                    continue; // degenerate pair: 0/0
                }
                for j in 0..3u32 {
                    let num = (tilde(z, j) - tilde(w, j)).abs();
                    let den = (z.abs() + w.abs()).powf(self.p - 1.0 - j as f64) * (z - w).abs();
                    if den > 0.0 {
                        let ratio = num / den;
                        ratios[j as usize] = ratios[j as usize].max(ratio);
                    }
                }
            }
        }
        Ok(report)
    }
}

/// Largest observed Hoelder ratios per derivative order, on the two boxes.
#[derive(Clone, Copy, Debug, Default)]
pub struct SmoothnessReport {
    pub max_ratio_small: [f64; 3],
    pub max_ratio_large: [f64; 3],
    pub vacuous: bool,
}

impl SmoothnessReport {
    /// The condition holds with a constant uniform across scales: every ratio
    /// is finite and the two boxes agree to within a small factor.
    pub fn passes(&self) -> bool {
        if self.vacuous {
            return true;
        }
        for j in 0..3 {
            let s = self.max_ratio_small[j];
            let l = self.max_ratio_large[j];
            if !(s.is_finite() && l.is_finite()) {
                return false;
            }
            let hi = s.max(l);
            let lo = s.min(l).max(1e-12);
            if hi / lo > 4.0 {
                return false;
            }
        }
        true
    }
}

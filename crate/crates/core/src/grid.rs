//! Truncated periodic domain, Fourier differentiation/antidifferentiation,
//! and quadrature for plain and weighted Sobolev norms.
//!
//! The domain is `[-L, L)` discretized with `n` (a power of two) equispaced
//! points; fields are assumed periodic and decaying well inside the box, so
//! trapezoid quadrature and spectral calculus are accurate to round-off.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct GridInner {
    half_width: f64,
    n: usize,
    spacing: f64,
    points: Vec<f64>,
    /// Wavenumbers in FFT index order: xi_k = pi*m/L with m = k for k < n/2, m = k - n otherwise.
    wavenumbers: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

/// Immutable periodic grid on `[-L, L)` with `n` points (`n` a power of two).
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("half_width", &self.inner.half_width)
            .field("n", &self.inner.n)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n && self.inner.half_width == other.inner.half_width
    }
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid point count must be a power of two >= 8, got {n}"
            )));
        }
        let spacing = 2.0 * half_width / n as f64;
        let points = (0..n).map(|j| -half_width + j as f64 * spacing).collect();
        let wavenumbers = (0..n)
            .map(|k| {
                let m = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
                PI * m as f64 / half_width
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                half_width,
                n,
                spacing,
                points,
                wavenumbers,
                fft,
                ifft,
            }),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.inner.half_width
    }

    pub fn len(&self) -> usize {
        self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    pub fn points(&self) -> &[f64] {
        &self.inner.points
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Largest resolved wavenumber (Nyquist), pi*(n/2)/L.
    pub fn max_wavenumber(&self) -> f64 {
        PI * (self.inner.n as f64 / 2.0) / self.inner.half_width
    }

    pub fn zeros(&self) -> Field {
        Field {
            grid: self.clone(),
            values: vec![0.0; self.inner.n],
        }
    }

    /// Sample a function on the grid points.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.clone(),
            values: self.inner.points.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Forward transform of real samples (unnormalized, FFT index order).
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.inner.n);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inner.fft.process(&mut buf);
        buf
    }

    /// Inverse transform back to real samples (applies the 1/n normalization).
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(spectrum.len(), self.inner.n);
        let mut buf = spectrum.to_vec();
        self.inner.ifft.process(&mut buf);
        let scale = 1.0 / self.inner.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

/// Real-valued samples on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid mean (1/n) sum of values.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Periodic trapezoid quadrature of the samples.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    /// Quadrature of the pointwise product with another field.
    pub fn inner_product(&self, other: &Field) -> f64 {
        debug_assert!(self.grid == other.grid);
        let dot: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        self.grid.spacing() * dot
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Quadrature of y^power * field; `power` in 0..=2.
    pub fn moment(&self, power: u32) -> Result<f64> {
        if power > 2 {
            return Err(Error::InvalidInput(format!(
                "moment power must be in 0..=2, got {power}"
            )));
        }
        let pts = self.grid.points();
        let sum: f64 = self
            .values
            .iter()
            .zip(pts)
            .map(|(v, &y)| v * y.powi(power as i32))
            .sum();
        Ok(self.grid.spacing() * sum)
    }

    /// Weighted Sobolev norm: sum over l = 0..=k of the L2 norm of
    /// (1+|y|)^m times the l-th spectral derivative.
    pub fn weighted_norm(&self, k: u32, m: f64) -> Result<f64> {
        if k > 3 {
            return Err(Error::InvalidInput(format!(
                "weighted norm derivative count must be in 0..=3, got {k}"
            )));
        }
        let pts = self.grid.points();
        let h = self.grid.spacing();
        let mut total = 0.0;
        let mut current = self.clone();
        for l in 0..=k {
            if l > 0 {
                current = current.deriv(1)?;
            }
            let sq: f64 = current
                .values
                .iter()
                .zip(pts)
                .map(|(v, &y)| {
                    let w = (1.0 + y.abs()).powf(m);
                    (w * v) * (w * v)
                })
                .sum();
            total += (h * sq).sqrt();
        }
        Ok(total)
    }

    /// Spectral derivative of the given order (1..=4). The Nyquist mode is
    /// zeroed for odd orders.
    pub fn deriv(&self, order: u32) -> Result<Field> {
        if order == 0 || order > 4 {
            return Err(Error::InvalidInput(format!(
                "derivative order must be in 1..=4, got {order}"
            )));
        }
        let n = self.grid.len();
        let mut spectrum = self.grid.forward(&self.values);
        let xi = self.grid.wavenumbers();
        for (k, c) in spectrum.iter_mut().enumerate() {
            if k == n / 2 && order % 2 == 1 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                let factor = Complex64::new(0.0, xi[k]).powu(order);
                *c *= factor;
            }
        }
        Ok(Field {
            grid: self.grid.clone(),
            values: self.grid.inverse(&spectrum),
        })
    }

    /// Antiderivative of a (numerically) mean-zero field, with the additive
    /// constant chosen so the result vanishes at both domain ends.
    ///
    /// The mean mode is inverted spectrally and the constant is fixed by
    /// subtracting the mean of the two endpoint values, so F(-L) = -F(L-h);
    /// for genuinely decaying mean-zero input both endpoints come out ~0.
    pub fn antideriv_zero_mean(&self) -> Result<Field> {
        let sup = self.sup_norm();
        let mean = self.mean();
        if mean.abs() > 1e-10 * sup {
            return Err(Error::ZeroMeanViolation(format!(
                "antiderivative input has grid mean {mean:.3e} exceeding 1e-10 * sup-norm {sup:.3e}"
            )));
        }
        let n = self.grid.len();
        let mut spectrum = self.grid.forward(&self.values);
        let xi = self.grid.wavenumbers();
        for (k, c) in spectrum.iter_mut().enumerate() {
            if k == 0 || k == n / 2 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= Complex64::new(0.0, xi[k]);
            }
        }
        let mut values = self.grid.inverse(&spectrum);
        let shift = 0.5 * (values[0] + values[n - 1]);
        for v in &mut values {
            *v -= shift;
        }
        Ok(Field {
            grid: self.grid.clone(),
            values,
        })
    }

    /// 2/3-rule dealiasing: zero all modes with |index| > n/3.
    pub fn dealias(&self) -> Field {
        let n = self.grid.len();
        let cutoff = n / 3;
        let mut spectrum = self.grid.forward(&self.values);
        for (k, c) in spectrum.iter_mut().enumerate() {
            let m = if k < n / 2 { k } else { n - k };
            if m > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Field {
            grid: self.grid.clone(),
            values: self.grid.inverse(&spectrum),
        }
    }

    /// Trigonometric interpolation at arbitrary points. Points are taken
    /// modulo the period; callers are responsible for keeping them inside
    /// the region where the field carries meaningful values.
    pub fn interpolate(&self, xs: &[f64]) -> Vec<f64> {
        let spectrum = self.grid.forward(&self.values);
        interpolate_spectrum(&self.grid, &spectrum, xs)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Field) -> Field {
        debug_assert!(self.grid == other.grid);
        Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        debug_assert!(self.grid == other.grid);
        Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// a*self + b*other.
    pub fn linear_comb(&self, a: f64, other: &Field, b: f64) -> Field {
        debug_assert!(self.grid == other.grid);
        Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}

/// Evaluate the trigonometric interpolant of a (real-origin) spectrum at
/// arbitrary points. Uses conjugate symmetry, one complex Horner pass per
/// point; the Nyquist mode contributes a cosine.
pub fn interpolate_spectrum(grid: &Grid, spectrum: &[Complex64], xs: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let l = grid.half_width();
    let half = n / 2;
    let inv_n = 1.0 / n as f64;
    let xi_nyq = PI * half as f64 / l;
    xs.iter()
        .map(|&x| {
            let theta = PI * (x + l) / l;
            let z = Complex64::new(theta.cos(), theta.sin());
            // Horner over modes m = half-1 down to 1.
            let mut acc = Complex64::new(0.0, 0.0);
            for m in (1..half).rev() {
                acc = (acc + spectrum[m]) * z;
            }
            let mut value = spectrum[0].re + 2.0 * acc.re;
            value += spectrum[half].re * (xi_nyq * (x + l)).cos();
            value * inv_n
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sup_diff(a: &Field, b: &Field) -> f64 {
        a.sub(b).sup_norm()
    }

    #[test]
    fn deriv_of_sine_is_cosine() {
        let grid = Grid::new(PI, 64).unwrap();
        let f = grid.sample(|x| x.sin());
        let df = f.deriv(1).unwrap();
        let expected = grid.sample(|x| x.cos());
        assert!(sup_diff(&df, &expected) < 1e-12);
    }

    #[test]
    fn deriv_of_constant_vanishes() {
        let grid = Grid::new(10.0, 128).unwrap();
        let f = grid.sample(|_| 3.25);
        for order in 1..=4 {
            assert!(f.deriv(order).unwrap().sup_norm() < 1e-12);
        }
    }

    #[test]
    fn second_deriv_of_gaussian_matches_analytic() {
        let grid = Grid::new(20.0, 512).unwrap();
        let f = grid.sample(|x| (-x * x).exp());
        let d2 = f.deriv(2).unwrap();
        let expected = grid.sample(|x| (4.0 * x * x - 2.0) * (-x * x).exp());
        assert!(sup_diff(&d2, &expected) < 1e-10);
    }

    #[test]
    fn antideriv_of_odd_gaussian() {
        let grid = Grid::new(20.0, 1024).unwrap();
        let f = grid.sample(|y| y * (-y * y / 2.0).exp());
        let anti = f.antideriv_zero_mean().unwrap();
        let expected = grid.sample(|y| -(-y * y / 2.0).exp());
        assert!(sup_diff(&anti, &expected) < 1e-8);
    }

    #[test]
    fn antideriv_of_zero_is_zero() {
        let grid = Grid::new(20.0, 256).unwrap();
        let f = grid.zeros();
        assert!(f.antideriv_zero_mean().unwrap().sup_norm() == 0.0);
    }

    #[test]
    fn antideriv_rejects_nonzero_mean() {
        let grid = Grid::new(20.0, 256).unwrap();
        let f = grid.sample(|y| (-y * y).exp());
        assert!(matches!(
            f.antideriv_zero_mean(),
            Err(Error::ZeroMeanViolation(_))
        ));
    }

    #[test]
    fn weighted_norm_of_gaussian_profile() {
        // ||phi||_{H^{0,0}} = (integral of phi^2)^(1/2) = (1/(2 sqrt(2 pi)))^(1/2)
        let grid = Grid::new(20.0, 512).unwrap();
        let phi = grid.sample(|y| (4.0 * PI).sqrt().recip() * (-y * y / 4.0).exp());
        let norm = phi.weighted_norm(0, 0.0).unwrap();
        let expected = (1.0 / (2.0 * (2.0 * PI).sqrt())).sqrt();
        assert_abs_diff_eq!(norm, expected, epsilon = 1e-10);
        assert_abs_diff_eq!(expected, 0.44663, epsilon = 1e-5);
    }

    #[test]
    fn weighted_norm_of_zero_field() {
        let grid = Grid::new(5.0, 64).unwrap();
        assert_eq!(grid.zeros().weighted_norm(3, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn h1_norm_of_sine() {
        let grid = Grid::new(PI, 128).unwrap();
        let f = grid.sample(|x| x.sin());
        let norm = f.weighted_norm(1, 0.0).unwrap();
        assert_abs_diff_eq!(norm, 2.0 * PI.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn moments_of_gaussian_profile() {
        let grid = Grid::new(20.0, 512).unwrap();
        let phi = grid.sample(|y| (4.0 * PI).sqrt().recip() * (-y * y / 4.0).exp());
        assert_abs_diff_eq!(phi.moment(0).unwrap(), 1.0, epsilon = 1e-12);
        // second moment of the heat kernel at time 1 is 2
        assert_abs_diff_eq!(phi.moment(2).unwrap(), 2.0, epsilon = 1e-10);
        // psi = phi_yy integrates to zero
        let psi = phi.deriv(2).unwrap();
        assert!(psi.moment(0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn roundtrip_deriv_antideriv() {
        // mean-zero decaying field: the exact derivative of a Gaussian bump
        let grid = Grid::new(20.0, 1024).unwrap();
        let f = grid
            .sample(|y| (0.5 - 2.0 * y / 3.0 * (1.0 + 0.5 * y)) * (-y * y / 3.0).exp());
        assert!(f.mean().abs() < 1e-16);
        let df = f.deriv(1).unwrap();
        let back = df.antideriv_zero_mean().unwrap();
        assert!(sup_diff(&back, &f) < 1e-9);
    }

    #[test]
    fn parseval_identity() {
        let grid = Grid::new(20.0, 256).unwrap();
        let f = grid.sample(|y| (0.7 * y).sin() * (-y * y / 8.0).exp());
        let phys = f.l2_norm_sq();
        let spectrum = grid.forward(f.values());
        let n = grid.len() as f64;
        let spec = grid.spacing() / n * spectrum.iter().map(|c| c.norm_sqr()).sum::<f64>();
        assert_abs_diff_eq!(phys, spec, epsilon = 1e-12 * phys.abs());
    }

    #[test]
    fn quadrature_and_derivative_plateau_at_roundoff() {
        // Spectral accuracy: once n >= 512 at L = 20, Gaussian-decaying data
        // is integrated and differentiated to ~1e-10 or better.
        let exact = (2.0 * PI).sqrt();
        for n in [512usize, 1024] {
            let grid = Grid::new(20.0, n).unwrap();
            let f = grid.sample(|y| (-y * y / 2.0).exp());
            assert!((f.integral() - exact).abs() < 1e-10);
            let d1 = f.deriv(1).unwrap();
            let expected = grid.sample(|y| -y * (-y * y / 2.0).exp());
            assert!(sup_diff(&d1, &expected) < 1e-10);
        }
    }

    #[test]
    fn interpolation_reproduces_grid_points_and_band_limited_values() {
        let grid = Grid::new(10.0, 128).unwrap();
        let g = grid.sample(|x| (3.0 * PI * x / 10.0).cos() - 0.25 * (7.0 * PI * x / 10.0).sin());
        let at_grid = g.interpolate(grid.points());
        for (a, b) in at_grid.iter().zip(g.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let xs = [-9.97, -3.2, 0.123, 4.56, 9.99];
        let vals = g.interpolate(&xs);
        for (&x, &v) in xs.iter().zip(vals.iter()) {
            let exact = (3.0 * PI * x / 10.0).cos() - 0.25 * (7.0 * PI * x / 10.0).sin();
            assert_abs_diff_eq!(v, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn forward_inverse_roundtrip_keeps_real_fields_real() {
        let grid = Grid::new(20.0, 256).unwrap();
        let f = grid.sample(|y| (0.9 * y).sin() * (-y * y / 7.0).exp() + 0.3);
        let back = grid.inverse(&grid.forward(f.values()));
        let worst = f
            .values()
            .iter()
            .zip(&back)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(worst < 1e-13, "round-trip error {worst}");
    }

    #[test]
    fn dealias_removes_high_modes() {
        let grid = Grid::new(PI, 32).unwrap();
        // mode 12 > 32/3 -> removed; mode 3 kept
        let f = grid.sample(|x| (3.0 * x).cos() + (12.0 * x).cos());
        let d = f.dealias();
        let expected = grid.sample(|x| (3.0 * x).cos());
        assert!(sup_diff(&d, &expected) < 1e-12);
    }
}

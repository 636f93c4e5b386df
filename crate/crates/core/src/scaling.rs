//! Parabolic scaling variables: s = log(R(t)+1), y = x / sqrt(R(t)+1),
//! the rescaled pair (v, w), the mass m(s), the Gaussian profiles phi and
//! psi = phi'', the remainder decomposition (f, g), the inhomogeneity h, and
//! the antiderivative triple (F, G, H).

use crate::coefficients::CoefficientModel;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::solver::PhysicalState;

/// Relative tolerance for the zero-mean conditions on f and g.
pub const ZERO_MEAN_REL_TOL: f64 = 1e-9;

/// P(y) e^{-y^2/4} with polynomial P; closed under differentiation, which is
/// what makes the profile derivatives and manufactured fields exact.
#[derive(Clone, Debug)]
pub struct GaussPoly {
    /// Coefficients of P, index = power of y.
    coeffs: Vec<f64>,
}

impl GaussPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// d/dy (P e^{-y^2/4}) = (P' - (y/2) P) e^{-y^2/4}.
    pub fn deriv(&self) -> Self {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                out[k - 1] += k as f64 * c;
            }
            out[k + 1] -= 0.5 * c;
        }
        Self { coeffs: out }
    }

    pub fn nth_deriv(&self, order: usize) -> Self {
        let mut cur = self.clone();
        for _ in 0..order {
            cur = cur.deriv();
        }
        cur
    }

    pub fn mul_y(&self) -> Self {
        let mut out = vec![0.0];
        out.extend_from_slice(&self.coeffs);
        Self { coeffs: out }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, &c) in other.coeffs.iter().enumerate() {
            out[k] += c;
        }
        Self { coeffs: out }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let mut p = 0.0;
        for &c in self.coeffs.iter().rev() {
            p = p * y + c;
        }
        p * (-y * y / 4.0).exp()
    }

    pub fn sample(&self, grid: &Grid) -> Field {
        grid.sample(|y| self.eval(y))
    }
}

/// The Gaussian profile phi(y) = G(1, y) = (4 pi)^{-1/2} e^{-y^2/4} as a
/// [`GaussPoly`]; its k-th derivative is `phi_poly().nth_deriv(k)`.
pub fn phi_poly() -> GaussPoly {
    GaussPoly::constant((4.0 * std::f64::consts::PI).sqrt().recip())
}

pub fn profile_phi(grid: &Grid) -> Field {
    phi_poly().sample(grid)
}

/// psi = phi_yy; analytically psi(y) = phi(y) (y^2 - 2)/4.
pub fn profile_psi(grid: &Grid) -> Field {
    phi_poly().nth_deriv(2).sample(grid)
}

/// Coefficient factors evaluated at t(s) = R^{-1}(e^s - 1).
#[derive(Clone, Copy, Debug)]
pub struct ScaledFactors {
    pub s: f64,
    pub t: f64,
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
    pub r: f64,
    pub r_prime: f64,
    pub exp_neg_s: f64,
    /// r^2 e^{-s} / a.
    pub c1: f64,
    /// e^{-s} / a.
    pub c4: f64,
}

impl ScaledFactors {
    pub fn at(coeff: &CoefficientModel, s: f64) -> Result<Self> {
        let t = coeff.big_r_inverse(s.exp() - 1.0)?;
        Self::at_time(coeff, s, t)
    }

    pub fn at_time(coeff: &CoefficientModel, s: f64, t: f64) -> Result<Self> {
        let v = coeff.eval(t)?;
        let rv = coeff.ratio(t)?;
        let exp_neg_s = (-s).exp();
        Ok(Self {
            s,
            t,
            a: v.a,
            a_prime: v.a_prime,
            b: v.b,
            b_prime: v.b_prime,
            r: rv.r,
            r_prime: rv.r_prime,
            exp_neg_s,
            c1: rv.r * rv.r * exp_neg_s / v.a,
            c4: exp_neg_s / v.a,
        })
    }

    /// r'/a.
    pub fn rp_over_a(&self) -> f64 {
        self.r_prime / self.a
    }

    /// a'/(2 r a^2).
    pub fn a1(&self) -> f64 {
        self.a_prime / (2.0 * self.r * self.a * self.a)
    }

    /// r a'/(2 a^2).
    pub fn a2(&self) -> f64 {
        self.r * self.a_prime / (2.0 * self.a * self.a)
    }

    /// r'/a - r a'/a^2.
    pub fn a3(&self) -> f64 {
        self.r_prime / self.a - self.r * self.a_prime / (self.a * self.a)
    }
}

/// Scaled time s plus the full set of derived fields at one snapshot.
#[derive(Clone, Debug)]
pub struct ScaledState {
    pub s: f64,
    pub t: f64,
    pub grid: Grid,
    pub v: Field,
    pub w: Field,
    pub m: f64,
    pub m_s: f64,
    pub f: Field,
    pub g: Field,
    pub h: Field,
    pub f_anti: Field,
    pub g_anti: Field,
    pub h_anti: Field,
}

/// Transform a physical snapshot onto the fixed y-grid. The physical fields
/// are resampled at x = y sqrt(R+1) by trigonometric interpolation.
pub fn to_scaled(
    state: &PhysicalState,
    coeff: &CoefficientModel,
    y_grid: &Grid,
) -> Result<ScaledState> {
    let t = state.t;
    let big_r = coeff.big_r(t)?;
    let s = (big_r + 1.0).ln();
    let sigma = (big_r + 1.0).sqrt();
    let r = coeff.ratio(t)?.r;

    let xs: Vec<f64> = y_grid.points().iter().map(|&y| y * sigma).collect();
    let span = y_grid.half_width() * sigma;
    if span > state.grid().half_width() * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "scaled image half-width {span:.3e} exceeds the physical domain {:.3e}; \
             enlarge the solver grid",
            state.grid().half_width()
        )));
    }

    let v_vals: Vec<f64> = state
        .u
        .interpolate(&xs)
        .into_iter()
        .map(|u| sigma * u)
        .collect();
    let w_scale = sigma * sigma * sigma / r;
    let w_vals: Vec<f64> = state
        .ut
        .interpolate(&xs)
        .into_iter()
        .map(|ut| w_scale * ut)
        .collect();
    let v = Field::new(y_grid.clone(), v_vals)?;
    let w = Field::new(y_grid.clone(), w_vals)?;

    let m = v.moment(0)?;
    let m_s = w.moment(0)?;

    let phi = profile_phi(y_grid);
    let psi = profile_psi(y_grid);
    let f = v.linear_comb(1.0, &phi, -m);
    let g = w.sub(&phi.scale(m_s)).sub(&psi.scale(m));

    // Floor keeps round-off-level remainders (Gaussian-exact data) from
    // tripping the guard; a genuine decomposition bug shows up at O(m).
    let floor = 1e-12 * (v.sup_norm() + w.sup_norm());
    for (name, field) in [("f", &f), ("g", &g)] {
        let integral = field.integral().abs();
        let sup = field.sup_norm();
        if integral > ZERO_MEAN_REL_TOL * sup + floor {
            return Err(Error::ZeroMeanViolation(format!(
                "integral of {name} is {integral:.3e} against sup-norm {sup:.3e} at s = {s:.4}"
            )));
        }
    }

    let factors = ScaledFactors::at_time(coeff, s, t)?;
    let h = remainder_h_parts(y_grid, &factors, m, m_s);

    // The means are zero up to round-off (guarded above); centering makes the
    // antiderivative precondition exact without changing the result.
    let center = |field: &Field| {
        let mean = field.mean();
        field.map(|v| v - mean)
    };
    let f_anti = center(&f).antideriv_zero_mean()?;
    let g_anti = center(&g).antideriv_zero_mean()?;
    let h_anti = center(&h).antideriv_zero_mean()?;

    Ok(ScaledState {
        s,
        t,
        grid: y_grid.clone(),
        v,
        w,
        m,
        m_s,
        f,
        g,
        h,
        f_anti,
        g_anti,
        h_anti,
    })
}

/// Undo the scaling on the induced physical grid x = y sqrt(R+1) (exact
/// inverse of [`to_scaled`] on shared sample points).
pub fn from_scaled(scaled: &ScaledState, coeff: &CoefficientModel) -> Result<PhysicalState> {
    if scaled.s < 0.0 {
        return Err(Error::InvalidInput(format!(
            "scaled time must be nonnegative, got {}",
            scaled.s
        )));
    }
    let t = coeff.big_r_inverse(scaled.s.exp() - 1.0)?;
    let sigma = scaled.s.exp().sqrt();
    let r = coeff.ratio(t)?.r;
    let x_grid = Grid::new(scaled.grid.half_width() * sigma, scaled.grid.len())?;
    let u = Field::new(
        x_grid.clone(),
        scaled.v.values().iter().map(|&v| v / sigma).collect(),
    )?;
    let ut_scale = r / (sigma * sigma * sigma);
    let ut = Field::new(
        x_grid,
        scaled.w.values().iter().map(|&w| ut_scale * w).collect(),
    )?;
    PhysicalState::new(t, u, ut)
}

/// The inhomogeneity driving the (f, g) system:
/// h = -c1 (2 m_s psi - (y/2) m psi_y - (3/2) m psi) - (r'/a) m psi - c4 m psi_yy,
/// with psi derivatives in closed form.
pub fn remainder_h(scaled: &ScaledState, coeff: &CoefficientModel) -> Result<Field> {
    let factors = ScaledFactors::at_time(coeff, scaled.s, scaled.t)?;
    Ok(remainder_h_parts(
        &scaled.grid,
        &factors,
        scaled.m,
        scaled.m_s,
    ))
}

pub(crate) fn remainder_h_parts(grid: &Grid, factors: &ScaledFactors, m: f64, m_s: f64) -> Field {
    let psi = phi_poly().nth_deriv(2);
    let psi_y = psi.deriv();
    let psi_yy = psi_y.deriv();
    // 2 m_s psi - (y/2) m psi_y - (3/2) m psi
    let bracket = psi
        .scale(2.0 * m_s)
        .add(&psi_y.mul_y().scale(-0.5 * m))
        .add(&psi.scale(-1.5 * m));
    let total = bracket
        .scale(-factors.c1)
        .add(&psi.scale(-factors.rp_over_a() * m))
        .add(&psi_yy.scale(-factors.c4 * m));
    total.sample(grid)
}

/// y-derivative of [`remainder_h`], in closed form.
pub(crate) fn remainder_h_deriv_parts(
    grid: &Grid,
    factors: &ScaledFactors,
    m: f64,
    m_s: f64,
) -> Field {
    let psi = phi_poly().nth_deriv(2);
    let psi_y = psi.deriv();
    let psi_yy = psi_y.deriv();
    let psi_yyy = psi_yy.deriv();
    // d/dy of (2 m_s psi - (y/2) m psi_y - (3/2) m psi)
    let bracket_y = psi_y
        .scale(2.0 * m_s)
        .add(&psi_y.scale(-0.5 * m))
        .add(&psi_yy.mul_y().scale(-0.5 * m))
        .add(&psi_y.scale(-1.5 * m));
    let total = bracket_y
        .scale(-factors.c1)
        .add(&psi_y.scale(-factors.rp_over_a() * m))
        .add(&psi_yyy.scale(-factors.c4 * m));
    total.sample(grid)
}

/// One logged mass sample.
#[derive(Clone, Copy, Debug)]
pub struct MassSample {
    pub s: f64,
    pub m: f64,
    pub m_s: f64,
}

/// Residual of the mass identity c1 (m_ss - m_s) + (1 + r'/a) m_s = 0 at the
/// interior samples, with m_ss from centered differences of the logged m_s.
pub fn mass_ode_residual(
    samples: &[MassSample],
    coeff: &CoefficientModel,
) -> Result<Vec<(f64, f64)>> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "mass identity residual needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    let ds = samples[1].s - samples[0].s;
    for pair in samples.windows(2) {
        let step = pair[1].s - pair[0].s;
        if (step - ds).abs() > 1e-9 * ds.abs() {
            return Err(Error::InsufficientData(
                "mass identity residual requires uniformly spaced samples".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(samples.len() - 2);
    for i in 1..samples.len() - 1 {
        let m_ss = (samples[i + 1].m_s - samples[i - 1].m_s) / (2.0 * ds);
        let factors = ScaledFactors::at(coeff, samples[i].s)?;
        let residual =
            factors.c1 * (m_ss - samples[i].m_s) + (1.0 + factors.rp_over_a()) * samples[i].m_s;
        out.push((samples[i].s, residual));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn heat_kernel(t: f64, x: f64) -> f64 {
        (4.0 * PI * t).sqrt().recip() * (-x * x / (4.0 * t)).exp()
    }

    #[test]
    fn profile_values() {
        let grid = Grid::new(20.0, 512).unwrap();
        let phi = profile_phi(&grid);
        let psi = profile_psi(&grid);
        let phi0 = (4.0 * PI).sqrt().recip();
        // phi(0) and psi(0) = -phi(0)/2; grid point n/2 sits at y = 0
        assert_abs_diff_eq!(phi.values()[256], phi0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi0, 0.28209, epsilon = 1e-5);
        assert_abs_diff_eq!(psi.values()[256], -phi0 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(-phi0 / 2.0, -0.14105, epsilon = 1e-5);
        assert_abs_diff_eq!(phi.moment(0).unwrap(), 1.0, epsilon = 1e-12);
        // psi agrees with the spectral second derivative of phi
        let psi_spectral = phi.deriv(2).unwrap();
        assert!(psi.sub(&psi_spectral).sup_norm() < 1e-10);
    }

    #[test]
    fn gauss_poly_derivative_recurrence() {
        // fifth derivative of phi: -phi(y) y (60 - 20 y^2 + y^4)/32
        let p5 = phi_poly().nth_deriv(5);
        let phi0 = (4.0 * PI).sqrt().recip();
        for &y in &[-3.0, -0.7, 0.0, 1.3, 2.9] {
            let expected =
                -phi0 * (-y * y / 4.0_f64).exp() * y * (60.0 - 20.0 * y * y + y.powi(4)) / 32.0;
            assert_abs_diff_eq!(p5.eval(y), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn antideriv_of_psi_is_phi_prime() {
        let grid = Grid::new(20.0, 1024).unwrap();
        let psi = profile_psi(&grid);
        let anti = psi.antideriv_zero_mean().unwrap();
        let phi_y = phi_poly().deriv().sample(&grid);
        assert!(anti.sub(&phi_y).sup_norm() < 1e-8);
    }

    #[test]
    fn gaussian_data_is_a_fixed_point() {
        // With a = b = 1 (so R(t) = t) and u = G(t+1, .), the scaled pair is
        // exactly (phi, psi): both remainders vanish to quadrature tolerance.
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let y_grid = Grid::new(20.0, 512).unwrap();
        for &t in &[0.0, 1.0, 3.0] {
            let sigma = (t + 1.0_f64).sqrt();
            let x_grid = Grid::new(20.0 * 2.0_f64.max(sigma), 1024).unwrap();
            let u = x_grid.sample(|x| heat_kernel(t + 1.0, x));
            let ut = x_grid.sample(|x| {
                heat_kernel(t + 1.0, x) * (x * x / (4.0 * (t + 1.0).powi(2)) - 0.5 / (t + 1.0))
            });
            let state = PhysicalState::new(t, u, ut).unwrap();
            let scaled = to_scaled(&state, &coeff, &y_grid).unwrap();
            assert_abs_diff_eq!(scaled.m, 1.0, epsilon = 1e-10);
            assert!(scaled.m_s.abs() < 1e-10);
            assert!(scaled.f.sup_norm() < 1e-10, "f sup at t={t}");
            assert!(scaled.g.sup_norm() < 1e-9, "g sup at t={t}");
            assert_abs_diff_eq!(scaled.s, (t + 1.0_f64).ln(), epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_state_transforms_to_zero() {
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let y_grid = Grid::new(20.0, 256).unwrap();
        let x_grid = Grid::new(20.0, 256).unwrap();
        let state = PhysicalState::new(0.0, x_grid.zeros(), x_grid.zeros()).unwrap();
        let scaled = to_scaled(&state, &coeff, &y_grid).unwrap();
        assert_eq!(scaled.m, 0.0);
        assert_eq!(scaled.m_s, 0.0);
        assert_eq!(scaled.v.sup_norm(), 0.0);
        assert_eq!(scaled.w.sup_norm(), 0.0);
        assert_eq!(scaled.f.sup_norm(), 0.0);
        assert_eq!(scaled.g.sup_norm(), 0.0);
    }

    #[test]
    fn initial_time_is_identity_up_to_velocity_scale() {
        // At t = 0: s = 0, the y-grid equals the x-grid, v = u0, w = u1/r(0).
        let coeff = CoefficientModel::power_law(1.0, -0.5).unwrap();
        let r0 = coeff.ratio(0.0).unwrap().r;
        let grid = Grid::new(20.0, 256).unwrap();
        let u0 = grid.sample(|x| 0.1 * (-x * x / 4.0).exp());
        let u1 = grid.sample(|x| 0.05 * x * (-x * x / 4.0).exp());
        let state = PhysicalState::new(0.0, u0.clone(), u1.clone()).unwrap();
        let scaled = to_scaled(&state, &coeff, &grid).unwrap();
        assert_eq!(scaled.s, 0.0);
        assert!(scaled.v.sub(&u0).sup_norm() < 1e-12);
        assert!(scaled.w.sub(&u1.scale(1.0 / r0)).sup_norm() < 1e-12);
    }

    #[test]
    fn roundtrip_from_scaled_then_to_scaled() {
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let y_grid = Grid::new(20.0, 512).unwrap();
        let x_grid = Grid::new(45.0, 1024).unwrap();
        let t = 2.5;
        let u = x_grid.sample(|x| 0.2 * heat_kernel(t + 1.0, x) * (1.0 + 0.1 * (x / 3.0).cos()));
        let ut = x_grid.sample(|x| 0.01 * x * (-x * x / 9.0).exp());
        let state = PhysicalState::new(t, u, ut).unwrap();
        let scaled = to_scaled(&state, &coeff, &y_grid).unwrap();
        let back = from_scaled(&scaled, &coeff).unwrap();
        assert_abs_diff_eq!(back.t, t, epsilon = 1e-10);
        // shared sample points: x = y sqrt(R+1)
        let sigma = (t + 1.0_f64).sqrt();
        let xs: Vec<f64> = y_grid.points().iter().map(|&y| y * sigma).collect();
        let u_at = state.u.interpolate(&xs);
        for (a, b) in back.u.values().iter().zip(u_at) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }
        let scaled_again = to_scaled(&back, &coeff, &y_grid).unwrap();
        assert!(scaled_again.v.sub(&scaled.v).sup_norm() < 1e-10);
        assert!(scaled_again.w.sub(&scaled.w).sup_norm() < 1e-10);
    }

    #[test]
    fn from_scaled_heat_kernel_example() {
        // v = phi, w = psi, a = b = 1, s = log 2 -> t = 1, u = G(2, x).
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let y_grid = Grid::new(20.0, 512).unwrap();
        let s = 2.0_f64.ln();
        let sigma = 2.0_f64.sqrt();
        let scaled = ScaledState {
            s,
            t: 1.0,
            grid: y_grid.clone(),
            v: profile_phi(&y_grid),
            w: profile_psi(&y_grid),
            m: 1.0,
            m_s: 0.0,
            f: y_grid.zeros(),
            g: y_grid.zeros(),
            h: y_grid.zeros(),
            f_anti: y_grid.zeros(),
            g_anti: y_grid.zeros(),
            h_anti: y_grid.zeros(),
        };
        let state = from_scaled(&scaled, &coeff).unwrap();
        assert_abs_diff_eq!(state.t, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(state.grid().half_width(), 20.0 * sigma, epsilon = 1e-12);
        for (x, u) in state.grid().points().iter().zip(state.u.values()) {
            assert_abs_diff_eq!(*u, heat_kernel(2.0, *x), epsilon = 1e-14);
        }
    }

    #[test]
    fn remainder_h_zero_mass() {
        let grid = Grid::new(20.0, 256).unwrap();
        let coeff = CoefficientModel::power_law(1.0, 0.0).unwrap();
        let factors = ScaledFactors::at(&coeff, 1.3).unwrap();
        let h = remainder_h_parts(&grid, &factors, 0.0, 0.0);
        assert_eq!(h.sup_norm(), 0.0);
    }

    #[test]
    fn remainder_h_integrates_to_zero() {
        let grid = Grid::new(20.0, 512).unwrap();
        for &(alpha, beta) in &[(0.0, 0.0), (1.0, 0.0), (0.0, -0.5)] {
            let coeff = CoefficientModel::power_law(alpha, beta).unwrap();
            let factors = ScaledFactors::at(&coeff, 2.1).unwrap();
            let h = remainder_h_parts(&grid, &factors, 1.3, -0.7);
            let rel = h.integral().abs() / h.sup_norm();
            assert!(rel < 1e-10, "({alpha},{beta}): relative integral {rel}");
        }
    }

    #[test]
    fn remainder_h_constant_coefficient_formula() {
        // alpha = beta = 0, s = 0, m = 1, m_s = 0:
        // h = (y/2) psi_y + (3/2) psi - psi_yy pointwise.
        let grid = Grid::new(20.0, 256).unwrap();
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let factors = ScaledFactors::at(&coeff, 0.0).unwrap();
        let h = remainder_h_parts(&grid, &factors, 1.0, 0.0);
        let phi0 = (4.0 * PI).sqrt().recip();
        let expected = grid.sample(|y| {
            let e = (-y * y / 4.0_f64).exp() * phi0;
            let psi = e * (y * y - 2.0) / 4.0;
            let psi_y = e * y * (6.0 - y * y) / 8.0;
            let psi_yy = e * (12.0 - 12.0 * y * y + y.powi(4)) / 16.0;
            0.5 * y * psi_y + 1.5 * psi - psi_yy
        });
        assert!(h.sub(&expected).sup_norm() < 1e-14);
    }

    #[test]
    fn remainder_h_deriv_matches_spectral_derivative() {
        let grid = Grid::new(20.0, 512).unwrap();
        let coeff = CoefficientModel::power_law(1.0, 0.0).unwrap();
        let factors = ScaledFactors::at(&coeff, 0.8).unwrap();
        let h = remainder_h_parts(&grid, &factors, 0.9, 0.4);
        let hy = remainder_h_deriv_parts(&grid, &factors, 0.9, 0.4);
        assert!(h.deriv(1).unwrap().sub(&hy).sup_norm() < 1e-10);
    }

    #[test]
    fn mass_ode_residual_degenerate_and_manufactured() {
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        // constant m: residual identically zero
        let constant: Vec<MassSample> = (0..10)
            .map(|i| MassSample {
                s: 0.1 * i as f64,
                m: 3.0,
                m_s: 0.0,
            })
            .collect();
        for (_, res) in mass_ode_residual(&constant, &coeff).unwrap() {
            assert_eq!(res, 0.0);
        }

        // manufactured m(s) = e^{-s}: frozen closed form of the discrete
        // residual, c1 = e^{-s}, r' = 0:
        // residual = e^{-2s}(sinh(ds)/ds + 1) - e^{-s}
        let ds = 0.05;
        let series: Vec<MassSample> = (0..40)
            .map(|i| {
                let s = ds * i as f64;
                MassSample {
                    s,
                    m: (-s).exp(),
                    m_s: -(-s).exp(),
                }
            })
            .collect();
        let sinh_factor = (ds.sinh() / ds) + 1.0;
        for (s, res) in mass_ode_residual(&series, &coeff).unwrap() {
            let expected = (-2.0 * s).exp() * sinh_factor - (-s).exp();
            assert_abs_diff_eq!(res, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn mass_ode_residual_needs_enough_uniform_samples() {
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let mk = |s: f64| MassSample { s, m: 1.0, m_s: 0.0 };
        let short = vec![mk(0.0), mk(0.1)];
        assert!(matches!(
            mass_ode_residual(&short, &coeff),
            Err(Error::InsufficientData(_))
        ));
        let uneven = vec![mk(0.0), mk(0.1), mk(0.3)];
        assert!(matches!(
            mass_ode_residual(&uneven, &coeff),
            Err(Error::InsufficientData(_))
        ));
    }
}

//! Time integration of U = (u, u_t) in mild-solution form: the fourth-order
//! beam part is propagated exactly per Fourier mode and the remaining
//! coefficient and nonlinear terms enter through a midpoint quadrature of the
//! Duhamel integral. Step size is controlled by step-doubling.

use rustfft::num_complex::Complex64;

use crate::coefficients::CoefficientModel;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::NonlinearityModel;

/// Sup-norm threshold beyond which a trajectory is declared blown up.
pub const BLOW_UP_SUP: f64 = 1e8;
/// Step sizes below this trigger a stiffness failure.
pub const MIN_DT: f64 = 1e-12;

/// Minimal coefficient interface the integrator needs. Implemented by
/// [`CoefficientModel`]; test problems may implement it directly (e.g. with
/// zero damping, which Assumption-(A) models cannot express).
pub trait TimeCoefficients {
    fn coeff_a(&self, t: f64) -> Result<f64>;
    fn coeff_b(&self, t: f64) -> Result<f64>;
}

impl TimeCoefficients for CoefficientModel {
    fn coeff_a(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.a)
    }
    fn coeff_b(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.b)
    }
}

/// Time t plus grid samples of u and u_t.
#[derive(Clone, Debug)]
pub struct PhysicalState {
    pub t: f64,
    pub u: Field,
    pub ut: Field,
}

impl PhysicalState {
    pub fn new(t: f64, u: Field, ut: Field) -> Result<Self> {
        if u.grid() != ut.grid() {
            return Err(Error::InvalidInput(
                "u and u_t must live on the same grid".into(),
            ));
        }
        Ok(Self { t, u, ut })
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    ExpMidpoint,
    ExpEuler,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub dt_initial: f64,
    pub dt_max: f64,
    pub safety: f64,
    pub error_tol: f64,
    pub scheme: Scheme,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt_initial: 1e-4,
            dt_max: 0.25,
            safety: 0.8,
            error_tol: 1e-9,
            scheme: Scheme::ExpMidpoint,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_initial > 0.0 && self.dt_max > 0.0 && self.dt_initial <= self.dt_max) {
            return Err(Error::InvalidConfig(format!(
                "require 0 < dt_initial <= dt_max, got {} and {}",
                self.dt_initial, self.dt_max
            )));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "safety factor must lie in (0, 1], got {}",
                self.safety
            )));
        }
        if !(self.error_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "error tolerance must be positive, got {}",
                self.error_tol
            )));
        }
        Ok(())
    }
}

/// Per-mode 2x2 blocks of exp(dt A) with A = [[0, 1], [-d^4/dx^4, 0]]:
/// [[cos(xi^2 dt), sin(xi^2 dt)/xi^2], [-xi^2 sin(xi^2 dt), cos(xi^2 dt)]],
/// with the xi = 0 block [[1, dt], [0, 1]].
#[derive(Clone, Debug)]
pub struct BeamPropagator {
    pub cos_block: Vec<f64>,
    pub sinc_block: Vec<f64>,
    pub lower_block: Vec<f64>,
}

pub fn beam_propagator(grid: &Grid, dt: f64) -> BeamPropagator {
    let n = grid.len();
    let mut cos_block = Vec::with_capacity(n);
    let mut sinc_block = Vec::with_capacity(n);
    let mut lower_block = Vec::with_capacity(n);
    for &xi in grid.wavenumbers() {
        let om = xi * xi;
        if om == 0.0 {
            cos_block.push(1.0);
            sinc_block.push(dt);
            lower_block.push(0.0);
        } else {
            let (s, c) = (om * dt).sin_cos();
            cos_block.push(c);
            sinc_block.push(s / om);
            lower_block.push(-om * s);
        }
    }
    BeamPropagator {
        cos_block,
        sinc_block,
        lower_block,
    }
}

impl BeamPropagator {
    fn apply(&self, u: &mut [Complex64], ut: &mut [Complex64]) {
        for k in 0..u.len() {
            let a = u[k];
            let b = ut[k];
            u[k] = self.cos_block[k] * a + self.sinc_block[k] * b;
            ut[k] = self.lower_block[k] * a + self.cos_block[k] * b;
        }
    }
}

/// The Duhamel forcing (0, -b(t) u_t + a(t) u_xx + d/dx N(u_x)).
pub fn forcing(
    state: &PhysicalState,
    coeff: &impl TimeCoefficients,
    nonlin: &NonlinearityModel,
) -> Result<(Field, Field)> {
    let grid = state.grid().clone();
    let spectral = SpectralState::from_physical(state);
    let k2 = forcing_spectrum(&grid, &spectral, state.t, coeff, nonlin)?;
    Ok((grid.zeros(), Field::new(grid.clone(), grid.inverse(&k2))?))
}

#[derive(Clone)]
struct SpectralState {
    t: f64,
    u: Vec<Complex64>,
    ut: Vec<Complex64>,
}

impl SpectralState {
    fn from_physical(state: &PhysicalState) -> Self {
        let grid = state.grid();
        Self {
            t: state.t,
            u: grid.forward(state.u.values()),
            ut: grid.forward(state.ut.values()),
        }
    }

    fn to_physical(&self, grid: &Grid) -> Result<PhysicalState> {
        PhysicalState::new(
            self.t,
            Field::new(grid.clone(), grid.inverse(&self.u))?,
            Field::new(grid.clone(), grid.inverse(&self.ut))?,
        )
    }

    /// (1/n) sum |hat u_k|: an upper bound for the physical sup-norm.
    fn sup_proxy(&self) -> (f64, f64) {
        let inv_n = 1.0 / self.u.len() as f64;
        let pu: f64 = self.u.iter().map(|c| c.norm()).sum::<f64>() * inv_n;
        let put: f64 = self.ut.iter().map(|c| c.norm()).sum::<f64>() * inv_n;
        (pu, put)
    }

    fn is_finite(&self) -> bool {
        self.u.iter().all(|c| c.re.is_finite() && c.im.is_finite())
            && self.ut.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Second component of K in spectral space.
fn forcing_spectrum(
    grid: &Grid,
    state: &SpectralState,
    t: f64,
    coeff: &impl TimeCoefficients,
    nonlin: &NonlinearityModel,
) -> Result<Vec<Complex64>> {
    let a = coeff.coeff_a(t)?;
    let b = coeff.coeff_b(t)?;
    let n = grid.len();
    let xi = grid.wavenumbers();
    let mut k2: Vec<Complex64> = (0..n)
        .map(|k| -b * state.ut[k] - a * xi[k] * xi[k] * state.u[k])
        .collect();
    if !nonlin.is_zero() {
        let ux_hat: Vec<Complex64> = (0..n)
            .map(|k| {
                if k == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, xi[k]) * state.u[k]
                }
            })
            .collect();
        let flux = nonlin.flux_spectrum(grid, &ux_hat)?;
        for (dst, src) in k2.iter_mut().zip(flux) {
            *dst += src;
        }
    }
    Ok(k2)
}

/// One step of the configured exponential scheme (spectral form).
#[allow(clippy::too_many_arguments)]
fn step_spectral(
    grid: &Grid,
    state: &SpectralState,
    dt: f64,
    coeff: &impl TimeCoefficients,
    nonlin: &NonlinearityModel,
    scheme: Scheme,
    full: &BeamPropagator,
    half: &BeamPropagator,
) -> Result<SpectralState> {
    match scheme {
        Scheme::ExpEuler => {
            let k = forcing_spectrum(grid, state, state.t, coeff, nonlin)?;
            let mut u = state.u.clone();
            let mut ut: Vec<Complex64> =
                state.ut.iter().zip(&k).map(|(v, f)| v + dt * f).collect();
            full.apply(&mut u, &mut ut);
            Ok(SpectralState {
                t: state.t + dt,
                u,
                ut,
            })
        }
        Scheme::ExpMidpoint => {
            // Exponential-Euler prediction at t + dt/2.
            let k0 = forcing_spectrum(grid, state, state.t, coeff, nonlin)?;
            let mut um = state.u.clone();
            let mut utm: Vec<Complex64> = state
                .ut
                .iter()
                .zip(&k0)
                .map(|(v, f)| v + 0.5 * dt * f)
                .collect();
            half.apply(&mut um, &mut utm);
            let mid = SpectralState {
                t: state.t + 0.5 * dt,
                u: um,
                ut: utm,
            };
            // Midpoint quadrature of the Duhamel integral.
            let km = forcing_spectrum(grid, &mid, mid.t, coeff, nonlin)?;
            let mut u = state.u.clone();
            let mut ut = state.ut.clone();
            full.apply(&mut u, &mut ut);
            let mut ku = vec![Complex64::new(0.0, 0.0); u.len()];
            let mut kut = km;
            half.apply(&mut ku, &mut kut);
            for k in 0..u.len() {
                u[k] += dt * ku[k];
                ut[k] += dt * kut[k];
            }
            Ok(SpectralState {
                t: state.t + dt,
                u,
                ut,
            })
        }
    }
}

/// Advance one step of size dt (no error control).
pub fn step(
    state: &PhysicalState,
    dt: f64,
    coeff: &impl TimeCoefficients,
    nonlin: &NonlinearityModel,
    config: &IntegratorConfig,
) -> Result<PhysicalState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "step size must be positive, got {dt}"
        )));
    }
    let grid = state.grid().clone();
    let spectral = SpectralState::from_physical(state);
    let full = beam_propagator(&grid, dt);
    let half = beam_propagator(&grid, 0.5 * dt);
    let next = step_spectral(
        &grid,
        &spectral,
        dt,
        coeff,
        nonlin,
        config.scheme,
        &full,
        &half,
    )?;
    if !next.is_finite() {
        return Err(Error::Overflow(
            "time step produced non-finite values; reduce dt".into(),
        ));
    }
    next.to_physical(&grid)
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct IntegrationStats {
    pub accepted: u64,
    pub rejected: u64,
    pub min_dt: f64,
    pub max_dt: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<PhysicalState>,
    pub stats: IntegrationStats,
}

/// Integrate from `initial.t` to `t_end`, emitting states exactly at the
/// requested snapshot times. Step size halves when the step-doubling error
/// estimate exceeds `error_tol` and grows by the safety factor otherwise.
pub fn integrate(
    initial: &PhysicalState,
    t_end: f64,
    snapshot_times: &[f64],
    coeff: &impl TimeCoefficients,
    nonlin: &NonlinearityModel,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let t0 = initial.t;
    if !(t_end >= t0) {
        return Err(Error::InvalidInput(format!(
            "t_end = {t_end} must be >= initial time {t0}"
        )));
    }
    let mut last = f64::NEG_INFINITY;
    for &s in snapshot_times {
        if s < t0 - 1e-12 || s > t_end + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "snapshot time {s} outside [{t0}, {t_end}]"
            )));
        }
        if s <= last {
            return Err(Error::InvalidInput(
                "snapshot times must be strictly increasing".into(),
            ));
        }
        last = s;
    }

    let grid = initial.grid().clone();
    let mut state = SpectralState::from_physical(initial);
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut stats = IntegrationStats {
        min_dt: f64::INFINITY,
        ..Default::default()
    };
    let mut snap_iter = snapshot_times.iter().copied().peekable();

    // Emit any snapshot at (or numerically at) the initial time.
    while let Some(&s) = snap_iter.peek() {
        if s <= t0 + 1e-14 * (1.0 + t0.abs()) {
            let mut phys = state.to_physical(&grid)?;
            phys.t = s;
            snapshots.push(phys);
            snap_iter.next();
        } else {
            break;
        }
    }

    let mut dt_nominal = config.dt_initial.min(config.dt_max);
    let mut cache = PropagatorCache::new(grid.clone());

    while state.t < t_end - 1e-14 * (1.0 + t_end.abs()) {
        let next_event = snap_iter.peek().copied().unwrap_or(t_end).min(t_end);
        let dt = dt_nominal.min(next_event - state.t).max(MIN_DT);
        let hits_event = state.t + dt >= next_event - 1e-14 * (1.0 + next_event.abs());

        let full = cache.get(dt);
        let half = cache.get(0.5 * dt);
        let quarter = cache.get(0.25 * dt);

        let attempt = (|| -> Result<(SpectralState, f64)> {
            let coarse = step_spectral(
                &grid,
                &state,
                dt,
                coeff,
                nonlin,
                config.scheme,
                &full,
                &half,
            )?;
            let mid = step_spectral(
                &grid,
                &state,
                0.5 * dt,
                coeff,
                nonlin,
                config.scheme,
                &half,
                &quarter,
            )?;
            let fine = step_spectral(
                &grid,
                &mid,
                0.5 * dt,
                coeff,
                nonlin,
                config.scheme,
                &half,
                &quarter,
            )?;
            let inv_n = 1.0 / fine.u.len() as f64;
            let mut du = 0.0;
            let mut dut = 0.0;
            for k in 0..fine.u.len() {
                du += (fine.u[k] - coarse.u[k]).norm();
                dut += (fine.ut[k] - coarse.ut[k]).norm();
            }
            let (pu, put) = fine.sup_proxy();
            let scale = pu + put + 1e-30;
            let err = (du + dut) * inv_n / scale;
            Ok((fine, err))
        })();

        let accepted = match attempt {
            Ok((fine, err)) if err.is_finite() && err <= config.error_tol => Some(fine),
            Ok(_) => None,
            Err(Error::Overflow(_)) => None,
            Err(e) => return Err(e),
        };

        match accepted {
            Some(mut fine) => {
                if !fine.is_finite() {
                    return Err(Error::BlowUpDetected {
                        t: fine.t,
                        sup: f64::INFINITY,
                    });
                }
                let (pu, put) = fine.sup_proxy();
                if pu.max(put) > BLOW_UP_SUP {
                    // Confirm with the actual physical sup-norm.
                    let phys = fine.to_physical(&grid)?;
                    let sup = phys.u.sup_norm().max(phys.ut.sup_norm());
                    if sup > BLOW_UP_SUP {
                        return Err(Error::BlowUpDetected { t: fine.t, sup });
                    }
                }
                stats.accepted += 1;
                stats.min_dt = stats.min_dt.min(dt);
                stats.max_dt = stats.max_dt.max(dt);
                if hits_event {
                    fine.t = next_event;
                }
                state = fine;
                while let Some(&snap) = snap_iter.peek() {
                    if state.t >= snap - 1e-14 * (1.0 + snap.abs()) {
                        let mut phys = state.to_physical(&grid)?;
                        phys.t = snap;
                        snapshots.push(phys);
                        snap_iter.next();
                    } else {
                        break;
                    }
                }
                dt_nominal = (dt_nominal / config.safety).min(config.dt_max);
            }
            None => {
                stats.rejected += 1;
                dt_nominal = 0.5 * dt;
                if dt_nominal < MIN_DT {
                    let (pu, put) = state.sup_proxy();
                    if !state.is_finite() || pu.max(put) > BLOW_UP_SUP {
                        return Err(Error::BlowUpDetected {
                            t: state.t,
                            sup: pu.max(put),
                        });
                    }
                    return Err(Error::StiffnessFailure {
                        t: state.t,
                        dt: dt_nominal,
                    });
                }
            }
        }
    }

    if stats.min_dt == f64::INFINITY {
        stats.min_dt = 0.0;
    }
    Ok(Trajectory { snapshots, stats })
}

/// CFL-style cap for the explicitly treated terms: the tension force acts per
/// mode with magnitude a xi^2 and the damping with b; the adaptive error
/// control keeps accuracy, this keeps high-mode round-off from amplifying.
pub fn stability_dt_cap(grid: &Grid, a_max: f64, b_max: f64, cfl: f64) -> f64 {
    let xi = grid.max_wavenumber();
    cfl / (a_max * xi * xi + b_max + 1e-300)
}

struct PropagatorCache {
    grid: Grid,
    entries: Vec<(u64, std::sync::Arc<BeamPropagator>)>,
}

impl PropagatorCache {
    fn new(grid: Grid) -> Self {
        Self {
            grid,
            entries: Vec::new(),
        }
    }

    fn get(&mut self, dt: f64) -> std::sync::Arc<BeamPropagator> {
        let key = dt.to_bits();
        if let Some((_, p)) = self.entries.iter().find(|(k, _)| *k == key) {
            return p.clone();
        }
        let p = std::sync::Arc::new(beam_propagator(&self.grid, dt));
        if self.entries.len() >= 12 {
            self.entries.remove(0);
        }
        self.entries.push((key, p.clone()));
        p
    }
}

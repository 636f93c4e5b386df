//! End-to-end run orchestration: initial data, time integration on the fixed
//! physical grid, per-snapshot transformation and energy evaluation, mass and
//! profile-error series, rate fits, and the machine-readable summary.

use serde::Serialize;

use crate::analysis::{estimate_m_star, fit_decay_rate, profile_error, RateFit};
use crate::coefficients::{exponent_constants, RegionLabel};
use crate::config::RunConfig;
use crate::energy::{energy_report, identity_residual_series, EnergyReport, IDENTITY_NAMES};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::scaling::{profile_phi, to_scaled};
use crate::solver::{integrate, stability_dt_cap, IntegrationStats, PhysicalState, Trajectory};

/// Stability-cap multiplier for the explicitly treated terms (the scheme's
/// empirical boundary sits near 3).
const CFL: f64 = 1.5;

/// The generic initial-data family: a Gaussian bump with a cosine modulation,
/// normalized so that the combined weighted-Sobolev size is epsilon, with
/// zero initial velocity.
pub fn initial_data(grid: &Grid, epsilon: f64) -> Result<(Field, Field)> {
    let shape = grid.sample(|x| {
        (-x * x / 4.0).exp() * (1.0 + 0.3 * (x / 2.0).cos() * (-x * x / 8.0).exp())
    });
    let size = shape.weighted_norm(2, 1.0)? + shape.weighted_norm(3, 0.0)?;
    Ok((shape.scale(epsilon / size), grid.zeros()))
}

/// Per-snapshot diagnostics not covered by the energy report.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SnapshotDiag {
    pub s: f64,
    pub t: f64,
    pub int_f: f64,
    pub sup_f: f64,
    pub int_g: f64,
    pub sup_g: f64,
    pub int_h: f64,
    pub sup_h: f64,
    /// ||H||_{L2}^2 and 4 ||y h||_{L2}^2 for the Hardy-consistency monitor.
    pub hardy_h_lhs: f64,
    pub hardy_h_rhs: f64,
    /// ingredients of || v - m phi || for any mass value
    pub v_norm_sq: f64,
    pub v_dot_phi: f64,
    /// filled after the mass limit is known
    pub err_shift: f64,
    pub err_raw: Option<f64>,
    pub v_minus_mstar_phi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub schema_version: String,
    pub status: String,
    pub region: RegionLabel,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub p: f64,
    pub epsilon: f64,
    pub s_max: f64,
    pub grid_l: f64,
    pub grid_n: usize,
    pub solver_grid_l: f64,
    pub solver_grid_n: usize,
    pub m_star: f64,
    pub m_tail_spread: f64,
    pub lambda_max: Option<f64>,
    pub lambda_target: Option<f64>,
    /// 1/4 + lambda_target/2, the decay rate the profile error should beat.
    pub predicted_decay_rate: Option<f64>,
    pub fit_shift: Option<RateFit>,
    pub fit_raw: Option<RateFit>,
    pub rate_ok: Option<bool>,
    pub apriori_ratio: Option<f64>,
    pub apriori_ok: Option<bool>,
    pub zero_mean_ok: bool,
    pub energy_nonneg_ok: bool,
    pub hardy_h_ok: bool,
    pub lower_bound_ok: bool,
    pub max_identity_residual: f64,
    pub stats: IntegrationStats,
}

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub config: RunConfig,
    pub region: RegionLabel,
    pub forced: bool,
    pub reports: Vec<EnergyReport>,
    pub diags: Vec<SnapshotDiag>,
    pub trajectory: Option<Trajectory>,
    pub summary: Summary,
}

/// Run the full pipeline with the standard initial-data policy.
pub fn run_pipeline(config: &RunConfig, force: bool) -> Result<RunArtifacts> {
    run_pipeline_from(config, force, None)
}

/// Run the full pipeline, optionally overriding the initial state (it must
/// live on the configured solver grid). Non-effective-damping parameter
/// points are refused unless `force` is set, in which case the run is marked
/// exploratory.
pub fn run_pipeline_from(
    config: &RunConfig,
    force: bool,
    initial_override: Option<PhysicalState>,
) -> Result<RunArtifacts> {
    config.validate()?;
    let region = crate::coefficients::classify_region(
        config.coefficients.alpha,
        config.coefficients.beta,
    );
    if region != RegionLabel::Omega1 && !force {
        return Err(Error::OutOfRegion {
            alpha: config.coefficients.alpha,
            beta: config.coefficients.beta,
            detail: format!(
                "classified as {region}; the Gaussian-profile theorem applies inside Omega1 \
                 (pass force to run anyway)"
            ),
        });
    }

    let coeff = config.coefficient_model()?;
    let nonlin = config.nonlinearity_model()?;
    let y_grid = config.y_grid()?;
    let x_grid = config.x_grid()?;
    let weights = config.energy_weights;

    let initial = match initial_override {
        Some(state) => {
            if state.grid() != &x_grid {
                return Err(Error::InvalidInput(
                    "initial-state override must live on the configured solver grid".into(),
                ));
            }
            state
        }
        None => {
            let (u0, u1) = initial_data(&x_grid, config.data.epsilon)?;
            PhysicalState::new(0.0, u0, u1)?
        }
    };

    let s_values = config.snapshot_s_values();
    let mut t_values = Vec::with_capacity(s_values.len());
    for &s in &s_values {
        t_values.push(coeff.big_r_inverse(s.exp() - 1.0)?);
    }
    let t_end = *t_values.last().expect("nonempty schedule");

    let mut int_config = config.integrator_config();
    let a_max = coeff.eval(0.0)?.a.max(coeff.eval(t_end)?.a);
    let b_max = coeff.eval(0.0)?.b.max(coeff.eval(t_end)?.b);
    let cap = stability_dt_cap(&x_grid, a_max, b_max, CFL);
    int_config.dt_max = int_config.dt_max.min(cap);
    int_config.dt_initial = int_config.dt_initial.min(int_config.dt_max);

    let trajectory = integrate(&initial, t_end, &t_values, &coeff, &nonlin, &int_config)?;

    let phi = profile_phi(&y_grid);
    let phi_norm_sq = phi.l2_norm_sq();

    let mut reports = Vec::with_capacity(trajectory.snapshots.len());
    let mut diags = Vec::with_capacity(trajectory.snapshots.len());
    for state in &trajectory.snapshots {
        let scaled = to_scaled(state, &coeff, &y_grid)?;
        let report = energy_report(&scaled, &coeff, &nonlin, &weights)?;
        let yh_sq = crate::energy::weighted_dot(&scaled.h, &scaled.h, 2);
        diags.push(SnapshotDiag {
            s: scaled.s,
            t: scaled.t,
            int_f: scaled.f.integral(),
            sup_f: scaled.f.sup_norm(),
            int_g: scaled.g.integral(),
            sup_g: scaled.g.sup_norm(),
            int_h: scaled.h.integral(),
            sup_h: scaled.h.sup_norm(),
            hardy_h_lhs: scaled.h_anti.l2_norm_sq(),
            hardy_h_rhs: 4.0 * yh_sq,
            v_norm_sq: scaled.v.l2_norm_sq(),
            v_dot_phi: scaled.v.inner_product(&phi),
            err_shift: f64::NAN,
            err_raw: None,
            v_minus_mstar_phi: f64::NAN,
        });
        reports.push(report);
    }

    // Mass limit and profile errors.
    let m_series: Vec<(f64, f64)> = reports.iter().map(|r| (r.s, r.m)).collect();
    let mass = estimate_m_star(&m_series)?;
    for (diag, state) in diags.iter_mut().zip(&trajectory.snapshots) {
        let err = profile_error(state, mass.m_star, &coeff)?;
        diag.err_shift = err.err_shift;
        diag.err_raw = err.err_raw;
        let dist_sq = (diag.v_norm_sq - 2.0 * mass.m_star * diag.v_dot_phi
            + mass.m_star * mass.m_star * phi_norm_sq)
            .max(0.0);
        diag.v_minus_mstar_phi = dist_sq.sqrt();
    }

    // Identity residuals at the run's own snapshot spacing.
    let residuals = identity_residual_series(&reports, 1)?;
    let mut max_identity_residual = 0.0f64;
    for (j, (name, series)) in residuals.iter().enumerate() {
        debug_assert_eq!(name, IDENTITY_NAMES[j]);
        for (i, (s, res)) in series.iter().enumerate() {
            debug_assert!((reports[i + 1].s - s).abs() < 1e-12);
            reports[i + 1]
                .identity_residuals
                .insert(name.clone(), *res);
            max_identity_residual = max_identity_residual.max(*res);
        }
    }

    // Rate fits on the profile-error series.
    let window = config.analysis.fit_window;
    let shift_series: Vec<(f64, f64)> = diags.iter().map(|d| (d.s, d.err_shift)).collect();
    let fit_shift = fit_decay_rate(&shift_series, window).ok();
    let raw_series: Vec<(f64, f64)> = diags
        .iter()
        .filter_map(|d| d.err_raw.map(|e| (d.s, e)))
        .collect();
    let fit_raw = fit_decay_rate(&raw_series, window).ok();

    // Theorem-rate bookkeeping (only meaningful inside Omega1).
    let exponents = exponent_constants(config.coefficients.alpha, config.coefficients.beta).ok();
    let lambda_target = exponents.map(|e| config.analysis.lambda_fraction * e.lambda_max);
    let predicted = lambda_target.map(|l| 0.25 + 0.5 * l);
    let rate_ok = match (predicted, &fit_shift) {
        (Some(pred), Some(fit)) => Some(-fit.slope >= 0.7 * pred),
        _ => None,
    };

    // A-priori boundedness of the total energy past the settling point s = 2.
    let settle = 2.0;
    let tail: Vec<&EnergyReport> = reports.iter().filter(|r| r.s >= settle - 1e-12).collect();
    let (apriori_ratio, apriori_ok) = if tail.len() >= 2 {
        let base = tail[0].composites.cal_e_tilde;
        let sup = tail
            .iter()
            .map(|r| r.composites.cal_e_tilde)
            .fold(f64::NEG_INFINITY, f64::max);
        if base.abs() > 0.0 {
            let ratio = sup / base;
            (Some(ratio), Some(ratio <= 2.0))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };

    // Structural checks.
    let mut zero_mean_ok = true;
    let mut hardy_h_ok = true;
    for diag in &diags {
        // absolute floor: keeps round-off-level remainders from flagging
        let floor = 1e-12 * (1.0 + diag.v_norm_sq.sqrt());
        for (integral, sup) in [
            (diag.int_f, diag.sup_f),
            (diag.int_g, diag.sup_g),
            (diag.int_h, diag.sup_h),
        ] {
            if integral.abs() > 1e-9 * sup + floor {
                zero_mean_ok = false;
            }
        }
        if diag.hardy_h_lhs > diag.hardy_h_rhs * (1.0 + 1e-10) + 1e-300 {
            hardy_h_ok = false;
        }
    }
    let energy_nonneg_ok = reports.iter().all(|r| r.energies.nonnegative_ok());
    let lower_bound_ok = reports
        .iter()
        .filter(|r| r.s >= settle - 1e-12)
        .all(|r| r.composites.ee0 + 1e-18 >= r.lower_bound_quarter);

    let summary = Summary {
        schema_version: "1.0".into(),
        status: if region == RegionLabel::Omega1 {
            "ok".into()
        } else {
            "exploratory".into()
        },
        region,
        alpha: config.coefficients.alpha,
        beta: config.coefficients.beta,
        mu: config.nonlinearity.mu,
        p: config.nonlinearity.p,
        epsilon: config.data.epsilon,
        s_max: config.schedule.s_max,
        grid_l: y_grid.half_width(),
        grid_n: y_grid.len(),
        solver_grid_l: x_grid.half_width(),
        solver_grid_n: x_grid.len(),
        m_star: mass.m_star,
        m_tail_spread: mass.tail_spread,
        lambda_max: exponents.map(|e| e.lambda_max),
        lambda_target,
        predicted_decay_rate: predicted,
        fit_shift,
        fit_raw,
        rate_ok,
        apriori_ratio,
        apriori_ok,
        zero_mean_ok,
        energy_nonneg_ok,
        hardy_h_ok,
        lower_bound_ok,
        max_identity_residual,
        stats: trajectory.stats,
    };

    Ok(RunArtifacts {
        config: config.clone(),
        region,
        forced: force && region != RegionLabel::Omega1,
        reports,
        diags,
        trajectory: Some(trajectory),
        summary,
    })
}

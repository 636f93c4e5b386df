//! Asymptotic-amplitude extraction, Gaussian-profile error measurement,
//! decay-rate fitting, the Hardy-inequality check, and (alpha, beta)-plane
//! sweeps.

use serde::Serialize;

use crate::coefficients::{classify_region, CoefficientModel, RegionLabel};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::pipeline;
use crate::solver::PhysicalState;

/// Least-squares line on (s, log err) over a window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub sample_count: usize,
}

/// Tail estimate of the limiting mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassLimit {
    pub m_star: f64,
    /// max - min over the averaging window; shrinks as the mass settles.
    pub tail_spread: f64,
}

/// Mean of the final quarter of the logged mass series.
pub fn estimate_m_star(series: &[(f64, f64)]) -> Result<MassLimit> {
    if series.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "mass limit estimate needs at least 8 samples, got {}",
            series.len()
        )));
    }
    let window = (series.len() / 4).max(2);
    let tail = &series[series.len() - window..];
    let mean = tail.iter().map(|(_, m)| m).sum::<f64>() / tail.len() as f64;
    let max = tail.iter().map(|(_, m)| *m).fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().map(|(_, m)| *m).fold(f64::INFINITY, f64::min);
    Ok(MassLimit {
        m_star: mean,
        tail_spread: max - min,
    })
}

/// L2 distances between the state and the limiting Gaussian profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileError {
    /// || u - m* G(R+1, .) ||: the scaling-variable-exact comparison.
    pub err_shift: f64,
    /// || u - m* G(R, .) ||: the literal spreading-Gaussian comparison
    /// (undefined at R = 0).
    pub err_raw: Option<f64>,
}

fn heat_kernel_field(state: &PhysicalState, time: f64) -> Field {
    state.grid().sample(|x| {
        (4.0 * std::f64::consts::PI * time).sqrt().recip() * (-x * x / (4.0 * time)).exp()
    })
}

pub fn profile_error(
    state: &PhysicalState,
    m_star: f64,
    coeff: &CoefficientModel,
) -> Result<ProfileError> {
    let big_r = coeff.big_r(state.t)?;
    let shifted = heat_kernel_field(state, big_r + 1.0);
    let err_shift = state.u.linear_comb(1.0, &shifted, -m_star).l2_norm();
    let err_raw = if big_r > 0.0 {
        let raw = heat_kernel_field(state, big_r);
        Some(state.u.linear_comb(1.0, &raw, -m_star).l2_norm())
    } else {
        None
    };
    Ok(ProfileError { err_shift, err_raw })
}

/// As [`profile_error`] but insisting on the literal profile; errors at R = 0
/// where the comparison Gaussian is singular.
pub fn profile_error_raw(
    state: &PhysicalState,
    m_star: f64,
    coeff: &CoefficientModel,
) -> Result<f64> {
    profile_error(state, m_star, coeff)?.err_raw.ok_or_else(|| {
        Error::UndefinedProfile(format!(
            "G(R(t), .) is singular at t = {} where R = 0",
            state.t
        ))
    })
}

/// Least-squares fit of log err against s over the window (inclusive).
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    if !(window.0 < window.1) {
        return Err(Error::InvalidInput(format!(
            "fit window must satisfy lo < hi, got {window:?}"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(s, err) in series {
        if s < window.0 - 1e-12 || s > window.1 + 1e-12 {
            continue;
        }
        if !(err > 0.0) {
            return Err(Error::LogDomain(format!(
                "decay-rate fit requires positive errors, got {err} at s = {s}"
            )));
        }
        xs.push(s);
        ys.push(err.ln());
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "decay-rate fit needs at least 4 samples in the window, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = syy - slope * sxy;
    // A flat series accumulates only round-off in syy; report a perfect fit.
    let syy_floor = 1e-24 * n * (1.0 + mean_y * mean_y);
    let r_squared = if syy <= syy_floor {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        window,
        slope,
        intercept,
        r_squared,
        sample_count: xs.len(),
    })
}

/// Hardy-inequality check: lhs = int F^2 with F the decaying antiderivative,
/// rhs = 4 int y^2 f^2; ratio <= 1 for mean-zero decaying fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn hardy_check(f: &Field) -> Result<HardyCheck> {
    if f.sup_norm() == 0.0 {
        return Ok(HardyCheck {
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
        });
    }
    let anti = f.antideriv_zero_mean()?;
    let lhs = anti.l2_norm_sq();
    let rhs = 4.0 * crate::energy::weighted_dot(f, f, 2);
    Ok(HardyCheck {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// One row of a parameter sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub beta: f64,
    pub region: RegionLabel,
    /// "theorem" for effective-damping points, "exploratory" otherwise,
    /// "failed" when the pipeline errored.
    pub status: String,
    pub m_star: Option<f64>,
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    pub rate_ok: Option<bool>,
    pub error: Option<String>,
}

/// Run the full pipeline per (alpha, beta); per-point failures are recorded
/// in the row, never aborting the sweep.
pub fn sweep(
    alphas: &[f64],
    betas: &[f64],
    base_config: &RunConfig,
    workers: usize,
) -> Result<Vec<SweepPoint>> {
    if alphas.is_empty() || betas.is_empty() {
        return Err(Error::InvalidInput(
            "sweep needs nonempty alpha and beta lists".into(),
        ));
    }
    let points: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .collect();
    let workers = workers.max(1).min(points.len());
    let results: Vec<std::sync::Mutex<Option<SweepPoint>>> =
        (0..points.len()).map(|_| std::sync::Mutex::new(None)).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if idx >= points.len() {
                    break;
                }
                let (alpha, beta) = points[idx];
                let point = run_sweep_point(alpha, beta, base_config);
                *results[idx].lock().unwrap() = Some(point);
            });
        }
    });

    Ok(results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("sweep point computed"))
        .collect())
}

fn run_sweep_point(alpha: f64, beta: f64, base: &RunConfig) -> SweepPoint {
    let region = classify_region(alpha, beta);
    let mut config = base.clone();
    config.coefficients.alpha = alpha;
    config.coefficients.beta = beta;
    let status = if region == RegionLabel::Omega1 {
        "theorem"
    } else {
        "exploratory"
    };
    match pipeline::run_pipeline(&config, true) {
        Ok(artifacts) => SweepPoint {
            alpha,
            beta,
            region,
            status: status.into(),
            m_star: Some(artifacts.summary.m_star),
            slope: artifacts.summary.fit_shift.as_ref().map(|f| f.slope),
            r_squared: artifacts.summary.fit_shift.as_ref().map(|f| f.r_squared),
            rate_ok: if region == RegionLabel::Omega1 {
                artifacts.summary.rate_ok
            } else {
                None
            },
            error: None,
        },
        Err(e) => SweepPoint {
            alpha,
            beta,
            region,
            status: "failed".into(),
            m_star: None,
            slope: None,
            r_squared: None,
            rate_ok: None,
            error: Some(e.to_string()),
        },
    }
}

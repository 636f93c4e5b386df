//! Energy functionals of the scaled remainder pair (f, g) and the
//! antiderivative pair (F, G), their exact differential identities (evaluated
//! as residuals along logged trajectories), composite energies, remainder-norm
//! monitors, and a general identity checker driven by manufactured solutions.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::coefficients::CoefficientModel;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::nonlinearity::NonlinearityModel;
use crate::scaling::{remainder_h_deriv_parts, GaussPoly, ScaledFactors, ScaledState};

pub const IDENTITY_NAMES: [&str; 10] = [
    "E01", "E02", "E11_0", "E12_0", "E11_1", "E12_1", "E21", "E22", "Em1", "Em2",
];

/// Quadrature of y^power * a * b.
pub fn weighted_dot(a: &Field, b: &Field, power: u32) -> f64 {
    debug_assert!(a.grid() == b.grid());
    let pts = a.grid().points();
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .zip(pts)
        .map(|((x, y), &p)| x * y * p.powi(power as i32))
        .sum();
    a.grid().spacing() * sum
}

/// The ten energy functionals at one snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct Energies {
    pub e01: f64,
    pub e02: f64,
    pub e11_0: f64,
    pub e12_0: f64,
    pub e11_1: f64,
    pub e12_1: f64,
    pub e21: f64,
    pub e22: f64,
    pub em1: f64,
    pub em2: f64,
}

impl Energies {
    pub fn as_array(&self) -> [f64; 10] {
        [
            self.e01, self.e02, self.e11_0, self.e12_0, self.e11_1, self.e12_1, self.e21,
            self.e22, self.em1, self.em2,
        ]
    }

    /// The sum-of-squares functionals must be nonnegative.
    pub fn nonnegative_ok(&self) -> bool {
        self.e01 >= 0.0
            && self.e11_0 >= 0.0
            && self.e11_1 >= 0.0
            && self.e21 >= 0.0
            && self.em1 >= 0.0
    }
}

/// Spectral/analytic derivative fields shared by the functional evaluations.
#[derive(Clone, Debug)]
pub struct SnapshotFields {
    pub f_y: Field,
    pub f_yy: Field,
    pub f_yyy: Field,
    pub g_y: Field,
    pub h_y: Field,
    /// (e^s/a) N(e^{-s} v_y)
    pub nonlin_0: Field,
    /// (e^s/a) d/dy N(e^{-s} v_y)
    pub nonlin_1: Field,
    /// (e^s/a) d^2/dy^2 N(e^{-s} v_y)
    pub nonlin_2: Field,
}

pub fn snapshot_fields(
    scaled: &ScaledState,
    factors: &ScaledFactors,
    nonlin: &NonlinearityModel,
) -> Result<SnapshotFields> {
    let f_y = scaled.f.deriv(1)?;
    let f_yy = scaled.f.deriv(2)?;
    let f_yyy = scaled.f.deriv(3)?;
    let g_y = scaled.g.deriv(1)?;
    let h_y = remainder_h_deriv_parts(&scaled.grid, factors, scaled.m, scaled.m_s);

    let grid = &scaled.grid;
    let (nonlin_0, nonlin_1, nonlin_2) = if nonlin.is_zero() {
        (grid.zeros(), grid.zeros(), grid.zeros())
    } else {
        let v_y = scaled.v.deriv(1)?;
        let v_yy = scaled.v.deriv(2)?;
        let v_yyy = scaled.v.deriv(3)?;
        let es = factors.exp_neg_s; // e^{-s}
        let amp = 1.0 / (factors.exp_neg_s * factors.a); // e^{s}/a
        let mut n0 = grid.zeros();
        let mut n1 = grid.zeros();
        let mut n2 = grid.zeros();
        for i in 0..grid.len() {
            let z = es * v_y.values()[i];
            let np0 = nonlin.eval(z, 0)?;
            let np1 = nonlin.eval(z, 1)?;
            let np2 = nonlin.eval(z, 2)?;
            n0.values_mut()[i] = amp * np0;
            n1.values_mut()[i] = amp * np1 * es * v_yy.values()[i];
            n2.values_mut()[i] = amp
                * (np2 * es * es * v_yy.values()[i] * v_yy.values()[i]
                    + np1 * es * v_yyy.values()[i]);
        }
        (n0, n1, n2)
    };

    Ok(SnapshotFields {
        f_y,
        f_yy,
        f_yyy,
        g_y,
        h_y,
        nonlin_0,
        nonlin_1,
        nonlin_2,
    })
}

/// E01 and E02: functionals of the antiderivative pair (F, G); F_y = f and
/// F_yy = f_y by construction.
pub fn eval_e0(
    scaled: &ScaledState,
    fields: &SnapshotFields,
    factors: &ScaledFactors,
) -> (f64, f64) {
    let ff = &scaled.f; // = F_y
    let fy = &fields.f_y; // = F_yy
    let cap_f = &scaled.f_anti;
    let cap_g = &scaled.g_anti;
    let e01 = 0.5 * weighted_dot(ff, ff, 0)
        + 0.5 * factors.c4 * weighted_dot(fy, fy, 0)
        + 0.5 * factors.c1 * weighted_dot(cap_g, cap_g, 0);
    let e02 =
        0.5 * weighted_dot(cap_f, cap_f, 0) + factors.c1 * weighted_dot(cap_f, cap_g, 0);
    (e01, e02)
}

/// E11^(n) and E12^(n) with weight y^{2n}, n in {0, 1}.
pub fn eval_e1(
    scaled: &ScaledState,
    fields: &SnapshotFields,
    factors: &ScaledFactors,
    n: u32,
) -> Result<(f64, f64)> {
    if n > 1 {
        return Err(Error::InvalidInput(format!(
            "weighted energy index must be 0 or 1, got {n}"
        )));
    }
    let w = 2 * n;
    let e11 = 0.5 * weighted_dot(&fields.f_y, &fields.f_y, w)
        + 0.5 * factors.c4 * weighted_dot(&fields.f_yy, &fields.f_yy, w)
        + 0.5 * factors.c1 * weighted_dot(&scaled.g, &scaled.g, w);
    let e12 = 0.5 * weighted_dot(&scaled.f, &scaled.f, w)
        + factors.c1 * weighted_dot(&scaled.f, &scaled.g, w);
    Ok((e11, e12))
}

/// E21 and E22: one more derivative on (f, g).
pub fn eval_e2(fields: &SnapshotFields, factors: &ScaledFactors) -> (f64, f64) {
    let e21 = 0.5
        * (weighted_dot(&fields.f_yy, &fields.f_yy, 0)
            + factors.c4 * weighted_dot(&fields.f_yyy, &fields.f_yyy, 0)
            + factors.c1 * weighted_dot(&fields.g_y, &fields.g_y, 0));
    let e22 = 0.5 * weighted_dot(&fields.f_y, &fields.f_y, 0)
        + factors.c1 * weighted_dot(&fields.f_y, &fields.g_y, 0);
    (e21, e22)
}

/// Em1 and Em2: the mass-sector energies.
pub fn eval_em(m: f64, m_s: f64, factors: &ScaledFactors) -> (f64, f64) {
    let em1 = 0.5 * factors.c1 * m_s * m_s;
    let em2 = 0.5 * m * m + factors.c1 * m * m_s;
    (em1, em2)
}

pub fn eval_energies(
    scaled: &ScaledState,
    fields: &SnapshotFields,
    factors: &ScaledFactors,
) -> Result<Energies> {
    let (e01, e02) = eval_e0(scaled, fields, factors);
    let (e11_0, e12_0) = eval_e1(scaled, fields, factors, 0)?;
    let (e11_1, e12_1) = eval_e1(scaled, fields, factors, 1)?;
    let (e21, e22) = eval_e2(fields, factors);
    let (em1, em2) = eval_em(scaled.m, scaled.m_s, factors);
    Ok(Energies {
        e01,
        e02,
        e11_0,
        e12_0,
        e11_1,
        e12_1,
        e21,
        e22,
        em1,
        em2,
    })
}

/// Weights of the composite energies (all positive).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergyWeights {
    pub c0: f64,
    pub c1_0: f64,
    pub c1_1: f64,
    pub c2: f64,
    pub ctilde0: f64,
    pub ctilde1_0: f64,
    pub ctilde1_1: f64,
}

impl Default for EnergyWeights {
    fn default() -> Self {
        Self {
            c0: 4.0,
            c1_0: 4.0,
            c1_1: 4.0,
            c2: 4.0,
            ctilde0: 8.0,
            ctilde1_0: 4.0,
            ctilde1_1: 2.0,
        }
    }
}

impl EnergyWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.c0,
            self.c1_0,
            self.c1_1,
            self.c2,
            self.ctilde0,
            self.ctilde1_0,
            self.ctilde1_1,
        ];
        if all.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "energy weights must be positive, got {all:?}"
            )));
        }
        Ok(())
    }
}

/// Quadratures feeding the dissipation functional.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct GParts {
    /// int G^2
    pub g_anti_sq: f64,
    /// int g^2
    pub g_sq: f64,
    /// int y^2 g^2
    pub y2_g_sq: f64,
    /// int g_y^2
    pub gy_sq: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct Composites {
    pub ee0: f64,
    pub ee1_0: f64,
    pub ee1_1: f64,
    pub ee2: f64,
    pub cal_e: f64,
    pub cal_g: f64,
    pub cal_e_tilde: f64,
}

pub fn eval_composites(
    energies: &Energies,
    g_parts: &GParts,
    weights: &EnergyWeights,
) -> Result<Composites> {
    weights.validate()?;
    let ee0 = energies.e01 + weights.c0 * energies.e02;
    let ee1_0 = energies.e11_0 + weights.c1_0 * energies.e12_0;
    let ee1_1 = energies.e11_1 + weights.c1_1 * energies.e12_1;
    let ee2 = energies.e21 + weights.c2 * energies.e22;
    let cal_e = weights.ctilde0 * ee0
        + weights.ctilde1_0 * ee1_0
        + weights.ctilde1_1 * ee1_1
        + ee2
        + energies.em1;
    let cal_g = weights.ctilde0 * g_parts.g_anti_sq
        + weights.ctilde1_0 * g_parts.g_sq
        + weights.ctilde1_1 * g_parts.y2_g_sq
        + g_parts.gy_sq;
    Ok(Composites {
        ee0,
        ee1_0,
        ee1_1,
        ee2,
        cal_e,
        cal_g,
        cal_e_tilde: cal_e + energies.em2,
    })
}

/// The six remainder norms monitored along a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct RemainderNorms {
    /// ||H||_{L^2}
    pub h_anti_l2: f64,
    /// ||h||_{H^{0,1}}
    pub h_h01: f64,
    /// ||h_y||_{L^2}
    pub hy_l2: f64,
    /// (e^s/a) ||N(e^{-s} v_y)||_{L^2}
    pub nonlin_l2: f64,
    /// (e^s/a) ||d/dy N(e^{-s} v_y)||_{H^{0,1}}
    pub nonlin_y_h01: f64,
    /// (e^s/a) ||d^2/dy^2 N(e^{-s} v_y)||_{L^2}
    pub nonlin_yy_l2: f64,
}

pub fn remainder_norms(scaled: &ScaledState, fields: &SnapshotFields) -> Result<RemainderNorms> {
    Ok(RemainderNorms {
        h_anti_l2: scaled.h_anti.l2_norm(),
        h_h01: scaled.h.weighted_norm(0, 1.0)?,
        hy_l2: fields.h_y.l2_norm(),
        nonlin_l2: fields.nonlin_0.l2_norm(),
        nonlin_y_h01: fields.nonlin_1.weighted_norm(0, 1.0)?,
        nonlin_yy_l2: fields.nonlin_2.l2_norm(),
    })
}

/// Right-hand sides of the ten energy identities, so that
/// d/ds E_X(s) = rhs_X(s) holds exactly along exact solutions.
pub fn identity_rhs(
    scaled: &ScaledState,
    fields: &SnapshotFields,
    factors: &ScaledFactors,
    energies: &Energies,
) -> [f64; 10] {
    let a1 = factors.a1();
    let a2 = factors.a2();
    let a3 = factors.a3();
    let c1 = factors.c1;
    let c4 = factors.c4;

    let f = &scaled.f;
    let g = &scaled.g;
    let h = &scaled.h;
    let f_y = &fields.f_y;
    let f_yy = &fields.f_yy;
    let f_yyy = &fields.f_yyy;
    let g_y = &fields.g_y;
    let h_y = &fields.h_y;
    let cap_f = &scaled.f_anti;
    let cap_g = &scaled.g_anti;
    let cap_h = &scaled.h_anti;

    // E01: F_y = f, F_yy = f_y.
    let rhs_e01 = -weighted_dot(cap_g, cap_g, 0) + 0.5 * energies.e01
        - a1 * weighted_dot(f_y, f_y, 0)
        - a2 * weighted_dot(cap_g, cap_g, 0)
        + weighted_dot(cap_g, &fields.nonlin_0, 0)
        + weighted_dot(cap_g, cap_h, 0);

    let rhs_e02 = -0.5 * energies.e02 - 2.0 * energies.e01
        + 2.0 * c1 * weighted_dot(cap_g, cap_g, 0)
        + a3 * weighted_dot(cap_f, cap_g, 0)
        + weighted_dot(cap_f, &fields.nonlin_0, 0)
        + weighted_dot(cap_f, cap_h, 0);

    // E11^(n), E12^(n) for n = 0, 1. Terms carrying a factor 2n drop at n = 0.
    let mut rhs_e11 = [0.0; 2];
    let mut rhs_e12 = [0.0; 2];
    for n in 0..=1u32 {
        let w = 2 * n;
        let twon = 2.0 * n as f64;
        let e11 = if n == 0 { energies.e11_0 } else { energies.e11_1 };
        let e12 = if n == 0 { energies.e12_0 } else { energies.e12_1 };
        let mut r1 = -weighted_dot(g, g, w) + 0.5 * (3.0 - twon) * e11
            - a1 * weighted_dot(f_yy, f_yy, w)
            - a2 * weighted_dot(g, g, w)
            + weighted_dot(g, &fields.nonlin_1, w)
            + weighted_dot(g, h, w);
        let mut r2 = -0.5 * e12 - 2.0 * e11 + (1.0 - n as f64) * e12
            + 2.0 * c1 * weighted_dot(g, g, w)
            + a3 * weighted_dot(f, g, w)
            + weighted_dot(f, &fields.nonlin_1, w)
            + weighted_dot(f, h, w);
        if n == 1 {
            r1 += -twon * weighted_dot(f_y, g, w - 1)
                - twon * (twon - 1.0) * c4 * weighted_dot(f_yy, g, w - 2)
                - 2.0 * twon * c4 * weighted_dot(f_yy, g_y, w - 1);
            r2 += -twon * weighted_dot(f, f_y, w - 1)
                - 2.0 * twon * c4 * weighted_dot(f_y, f_yy, w - 1)
                - twon * (twon - 1.0) * c4 * weighted_dot(f, f_yy, w - 2);
        }
        rhs_e11[n as usize] = r1;
        rhs_e12[n as usize] = r2;
    }

    let rhs_e21 = -weighted_dot(g_y, g_y, 0) + 2.5 * energies.e21
        - a1 * weighted_dot(f_yyy, f_yyy, 0)
        - a2 * weighted_dot(g_y, g_y, 0)
        + weighted_dot(g_y, &fields.nonlin_2, 0)
        + weighted_dot(g_y, h_y, 0);

    let rhs_e22 = -2.0 * energies.e21 + 1.5 * energies.e22
        + 2.0 * c1 * weighted_dot(g_y, g_y, 0)
        + a3 * weighted_dot(f_y, g_y, 0)
        + weighted_dot(f_y, &fields.nonlin_2, 0)
        + weighted_dot(f_y, h_y, 0);

    let ms2 = scaled.m_s * scaled.m_s;
    let rhs_em1 = -0.5 * energies.em1 - ms2 + (0.75 * c1 - a2) * ms2;
    let rhs_em2 = 2.0 * energies.em1 + a3 * scaled.m * scaled.m_s;

    [
        rhs_e01, rhs_e02, rhs_e11[0], rhs_e12[0], rhs_e11[1], rhs_e12[1], rhs_e21, rhs_e22,
        rhs_em1, rhs_em2,
    ]
}

/// Everything evaluated at one snapshot.
#[derive(Clone, Debug)]
pub struct EnergyReport {
    pub s: f64,
    pub t: f64,
    pub m: f64,
    pub m_s: f64,
    pub energies: Energies,
    pub composites: Composites,
    pub remainder: RemainderNorms,
    pub identity_rhs: [f64; 10],
    /// Filled by [`identity_residual_series`] once the run is complete.
    pub identity_residuals: BTreeMap<String, f64>,
    /// Quarter of the bracket in the composite lower-bound check.
    pub lower_bound_quarter: f64,
    pub g_parts: GParts,
}

pub fn energy_report(
    scaled: &ScaledState,
    coeff: &CoefficientModel,
    nonlin: &NonlinearityModel,
    weights: &EnergyWeights,
) -> Result<EnergyReport> {
    let factors = ScaledFactors::at_time(coeff, scaled.s, scaled.t)?;
    let fields = snapshot_fields(scaled, &factors, nonlin)?;
    let energies = eval_energies(scaled, &fields, &factors)?;
    let g_parts = GParts {
        g_anti_sq: weighted_dot(&scaled.g_anti, &scaled.g_anti, 0),
        g_sq: weighted_dot(&scaled.g, &scaled.g, 0),
        y2_g_sq: weighted_dot(&scaled.g, &scaled.g, 2),
        gy_sq: weighted_dot(&fields.g_y, &fields.g_y, 0),
    };
    let composites = eval_composites(&energies, &g_parts, weights)?;
    let remainder = remainder_norms(scaled, &fields)?;
    let rhs = identity_rhs(scaled, &fields, &factors, &energies);
    let lower_bound_quarter = 0.25
        * (weighted_dot(&scaled.f, &scaled.f, 0)
            + 0.5 * factors.c4 * weighted_dot(&fields.f_y, &fields.f_y, 0)
            + 0.5 * factors.c1 * g_parts.g_anti_sq
            + weighted_dot(&scaled.f_anti, &scaled.f_anti, 0));
    Ok(EnergyReport {
        s: scaled.s,
        t: scaled.t,
        m: scaled.m,
        m_s: scaled.m_s,
        energies,
        composites,
        remainder,
        identity_rhs: rhs,
        identity_residuals: BTreeMap::new(),
        lower_bound_quarter,
        g_parts,
    })
}

/// A named residual series: (s, residual) pairs at interior samples.
pub type ResidualSeries = (String, Vec<(f64, f64)>);

/// Residual series |centered d/ds E - rhs| for the ten identities, taking
/// every `stride`-th report. Returns, per identity, (s, residual) pairs at
/// the interior samples of the strided series.
pub fn identity_residual_series(
    reports: &[EnergyReport],
    stride: usize,
) -> Result<Vec<ResidualSeries>> {
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be positive".into()));
    }
    let strided: Vec<&EnergyReport> = reports.iter().step_by(stride).collect();
    if strided.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "identity residuals need at least 3 snapshots, got {}",
            strided.len()
        )));
    }
    let ds = strided[1].s - strided[0].s;
    for pair in strided.windows(2) {
        let step = pair[1].s - pair[0].s;
        if (step - ds).abs() > 1e-9 * ds.abs() {
            return Err(Error::InsufficientData(
                "identity residuals require uniformly spaced snapshots".into(),
            ));
        }
    }
    let mut out: Vec<ResidualSeries> = IDENTITY_NAMES
        .iter()
        .map(|n| (n.to_string(), Vec::with_capacity(strided.len() - 2)))
        .collect();
    for i in 1..strided.len() - 1 {
        let prev = strided[i - 1].energies.as_array();
        let next = strided[i + 1].energies.as_array();
        let rhs = strided[i].identity_rhs;
        let s = strided[i].s;
        for j in 0..10 {
            let dds = (next[j] - prev[j]) / (2.0 * ds);
            out[j].1.push((s, (dds - rhs[j]).abs()));
        }
    }
    Ok(out)
}

/// Max-abs of a residual series.
pub fn series_norm(series: &[(f64, f64)]) -> f64 {
    series.iter().fold(0.0, |m, (_, r)| m.max(*r))
}

// ---------------------------------------------------------------------------
// General identity checker (manufactured solutions)
// ---------------------------------------------------------------------------

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A smooth scalar function of s with its derivative.
#[derive(Clone)]
pub struct ScalarWithDeriv {
    pub value: ScalarFn,
    pub deriv: ScalarFn,
}

impl ScalarWithDeriv {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            deriv: Arc::new(deriv),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0)
    }
}

/// The general weighted-energy system
///   f_s - k y f_y - l f = g,
///   c1 (g_s - k y g_y - m g) + c2 g + g = c3 f_yy - c4 f_yyyy + h,
/// realized by a separable manufactured solution f(s, y) = sigma(s) u(y):
/// g follows from the first equation and h is defined as the second
/// equation's defect, so (f, g, h) solves the system exactly.
#[derive(Clone)]
pub struct GeneralIdentitySystem {
    pub k: f64,
    pub l: f64,
    pub m: f64,
    pub n: u32,
    pub c1: ScalarWithDeriv,
    pub c2: ScalarWithDeriv,
    pub c3: ScalarWithDeriv,
    pub c4: ScalarWithDeriv,
    /// sigma, sigma', sigma''.
    #[allow(clippy::type_complexity)]
    pub sigma: (ScalarFn, ScalarFn, ScalarFn),
    pub profile: GaussPoly,
}

/// Fields of the manufactured system at fixed s (all closed-form).
pub struct GeneralFields {
    pub f: Field,
    pub f_y: Field,
    pub f_yy: Field,
    pub f_yyyy: Field,
    pub g: Field,
    pub g_y: Field,
    pub h: Field,
}

impl GeneralIdentitySystem {
    pub fn fields_at(&self, grid: &Grid, s: f64) -> GeneralFields {
        let sg = (self.sigma.0)(s);
        let sg1 = (self.sigma.1)(s);
        let sg2 = (self.sigma.2)(s);
        let u = &self.profile;
        let u1 = u.deriv();
        let u2 = u1.deriv();
        let u3 = u2.deriv();
        let u4 = u3.deriv();

        // g = sigma' u - k sigma y u' - l sigma u
        let y_u1 = u1.mul_y();
        let g_poly = u
            .scale(sg1 - self.l * sg)
            .add(&y_u1.scale(-self.k * sg));
        // g_s = sigma'' u - k sigma' y u' - l sigma' u
        let g_s_poly = u
            .scale(sg2 - self.l * sg1)
            .add(&y_u1.scale(-self.k * sg1));
        let g_y_poly = g_poly.deriv();

        // h = c1 (g_s - k y g_y - m g) + c2 g + g - c3 f_yy + c4 f_yyyy
        let c1 = (self.c1.value)(s);
        let c2 = (self.c2.value)(s);
        let c3 = (self.c3.value)(s);
        let c4 = (self.c4.value)(s);
        let h_poly = g_s_poly
            .add(&g_y_poly.mul_y().scale(-self.k))
            .add(&g_poly.scale(-self.m))
            .scale(c1)
            .add(&g_poly.scale(c2 + 1.0))
            .add(&u2.scale(-c3 * sg))
            .add(&u4.scale(c4 * sg));

        GeneralFields {
            f: u.scale(sg).sample(grid),
            f_y: u1.scale(sg).sample(grid),
            f_yy: u2.scale(sg).sample(grid),
            f_yyyy: u4.scale(sg).sample(grid),
            g: g_poly.sample(grid),
            g_y: g_y_poly.sample(grid),
            h: h_poly.sample(grid),
        }
    }

    /// E1 = (1/2) int y^{2n} (c3 f_y^2 + c4 f_yy^2 + c1 g^2),
    /// E2 = int y^{2n} ((1/2) f^2 + c1 f g).
    pub fn energies_at(&self, grid: &Grid, s: f64) -> (f64, f64) {
        let fl = self.fields_at(grid, s);
        let w = 2 * self.n;
        let c1 = (self.c1.value)(s);
        let c3 = (self.c3.value)(s);
        let c4 = (self.c4.value)(s);
        let e1 = 0.5
            * (c3 * weighted_dot(&fl.f_y, &fl.f_y, w)
                + c4 * weighted_dot(&fl.f_yy, &fl.f_yy, w)
                + c1 * weighted_dot(&fl.g, &fl.g, w));
        let e2 = 0.5 * weighted_dot(&fl.f, &fl.f, w) + c1 * weighted_dot(&fl.f, &fl.g, w);
        (e1, e2)
    }
}

/// The two general right-hand sides as pure functions of field data.
#[allow(clippy::too_many_arguments)]
pub fn general_rhs(
    k: f64,
    l: f64,
    m: f64,
    n: u32,
    c_values: [f64; 4],
    c_derivs: [f64; 4],
    f: &Field,
    f_y: &Field,
    f_yy: &Field,
    g: &Field,
    g_y: &Field,
    h: &Field,
) -> (f64, f64) {
    let [c1, c2, c3, c4] = c_values;
    let [c1p, _c2p, c3p, c4p] = c_derivs;
    let w = 2 * n;
    let twon = 2.0 * n as f64;

    let mut rhs1 = -weighted_dot(g, g, w)
        + (-0.5 * (twon - 1.0) * k + l) * c3 * weighted_dot(f_y, f_y, w)
        + (-0.5 * (twon - 3.0) * k + l) * c4 * weighted_dot(f_yy, f_yy, w)
        + (-0.5 * (twon + 1.0) * k + m) * c1 * weighted_dot(g, g, w)
        - c2 * weighted_dot(g, g, w)
        + 0.5 * c3p * weighted_dot(f_y, f_y, w)
        + 0.5 * c4p * weighted_dot(f_yy, f_yy, w)
        + 0.5 * c1p * weighted_dot(g, g, w)
        + weighted_dot(g, h, w);
    let mut rhs2 = -c3 * weighted_dot(f_y, f_y, w) - c4 * weighted_dot(f_yy, f_yy, w)
        + (-0.5 * (twon + 1.0) * k + l) * weighted_dot(f, f, w)
        + c1 * weighted_dot(g, g, w)
        + ((-(twon + 1.0)) * k + l + m) * c1 * weighted_dot(f, g, w)
        - c2 * weighted_dot(f, g, w)
        + c1p * weighted_dot(f, g, w)
        + weighted_dot(f, h, w);
    if n > 0 {
        rhs1 += -twon * c3 * weighted_dot(f_y, g, w - 1)
            - twon * (twon - 1.0) * c4 * weighted_dot(f_yy, g, w - 2)
            - 2.0 * twon * c4 * weighted_dot(f_yy, g_y, w - 1);
        rhs2 += -twon * c3 * weighted_dot(f, f_y, w - 1)
            - 2.0 * twon * c4 * weighted_dot(f_y, f_yy, w - 1)
            - twon * (twon - 1.0) * c4 * weighted_dot(f, f_yy, w - 2);
    }
    (rhs1, rhs2)
}

#[derive(Clone, Copy, Debug)]
pub struct GeneralResidual {
    pub s: f64,
    pub e1: f64,
    pub e2: f64,
}

/// Residuals of both general identities at the given s samples, with dE/ds
/// from centered differences of spacing ds.
pub fn general_identity_residual(
    sys: &GeneralIdentitySystem,
    grid: &Grid,
    s_samples: &[f64],
    ds: f64,
) -> Result<Vec<GeneralResidual>> {
    if s_samples.is_empty() {
        return Err(Error::InsufficientData(
            "identity residual needs at least one sample".into(),
        ));
    }
    if !(ds > 0.0) {
        return Err(Error::InvalidInput("ds must be positive".into()));
    }
    let mut out = Vec::with_capacity(s_samples.len());
    for &s in s_samples {
        let (e1_minus, e2_minus) = sys.energies_at(grid, s - ds);
        let (e1_plus, e2_plus) = sys.energies_at(grid, s + ds);
        let d1 = (e1_plus - e1_minus) / (2.0 * ds);
        let d2 = (e2_plus - e2_minus) / (2.0 * ds);
        let fl = sys.fields_at(grid, s);
        let c_values = [
            (sys.c1.value)(s),
            (sys.c2.value)(s),
            (sys.c3.value)(s),
            (sys.c4.value)(s),
        ];
        let c_derivs = [
            (sys.c1.deriv)(s),
            (sys.c2.deriv)(s),
            (sys.c3.deriv)(s),
            (sys.c4.deriv)(s),
        ];
        let (rhs1, rhs2) = general_rhs(
            sys.k, sys.l, sys.m, sys.n, c_values, c_derivs, &fl.f, &fl.f_y, &fl.f_yy, &fl.g,
            &fl.g_y, &fl.h,
        );
        out.push(GeneralResidual {
            s,
            e1: (d1 - rhs1).abs(),
            e2: (d2 - rhs2).abs(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::{phi_poly, profile_phi, profile_psi, remainder_h_parts};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    /// int y^{2j} phi^2 dy = (2j-1)!! / (2 sqrt(2 pi)).
    fn phi_sq_moment(j: u32) -> f64 {
        let mut dfact = 1.0;
        let mut k = 2 * j as i64 - 1;
        while k >= 2 {
            dfact *= k as f64;
            k -= 2;
        }
        dfact / (2.0 * (2.0 * PI).sqrt())
    }

    fn synthetic_state(
        grid: &Grid,
        coeff: &CoefficientModel,
        s: f64,
        f: Field,
        g: Field,
        m: f64,
        m_s: f64,
    ) -> ScaledState {
        let t = coeff.big_r_inverse(s.exp() - 1.0).unwrap();
        let factors = ScaledFactors::at_time(coeff, s, t).unwrap();
        let phi = profile_phi(grid);
        let psi = profile_psi(grid);
        let v = f.linear_comb(1.0, &phi, m);
        let w = g.add(&phi.scale(m_s)).add(&psi.scale(m));
        let h = remainder_h_parts(grid, &factors, m, m_s);
        let center = |field: &Field| {
            let mean = field.mean();
            field.map(|v| v - mean)
        };
        ScaledState {
            s,
            t,
            grid: grid.clone(),
            f_anti: center(&f).antideriv_zero_mean().unwrap(),
            g_anti: center(&g).antideriv_zero_mean().unwrap(),
            h_anti: center(&h).antideriv_zero_mean().unwrap(),
            v,
            w,
            m,
            m_s,
            f,
            g,
            h,
        }
    }

    fn zero_state(grid: &Grid, coeff: &CoefficientModel, s: f64) -> ScaledState {
        synthetic_state(grid, coeff, s, grid.zeros(), grid.zeros(), 0.0, 0.0)
    }

    #[test]
    fn energies_vanish_on_zero_state() {
        let grid = Grid::new(20.0, 256).unwrap();
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let scaled = zero_state(&grid, &coeff, 0.7);
        let factors = ScaledFactors::at(&coeff, 0.7).unwrap();
        let fields = snapshot_fields(&scaled, &factors, &NonlinearityModel::linear()).unwrap();
        let e = eval_energies(&scaled, &fields, &factors).unwrap();
        assert_eq!(e.as_array(), [0.0; 10]);
    }

    #[test]
    fn e01_matches_gaussian_moment_oracle() {
        // f = phi_y, g = 0, alpha = beta = 0, s = 0 (c1 = c4 = 1):
        // F = phi, so E01 = (1/2) int phi_y^2 + (1/2) int phi_yy^2.
        let grid = Grid::new(20.0, 512).unwrap();
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let f = phi_poly().deriv().sample(&grid);
        let scaled = synthetic_state(&grid, &coeff, 0.0, f, grid.zeros(), 0.0, 0.0);
        let factors = ScaledFactors::at(&coeff, 0.0).unwrap();
        let fields = snapshot_fields(&scaled, &factors, &NonlinearityModel::linear()).unwrap();
        let (e01, e02) = eval_e0(&scaled, &fields, &factors);
        // int phi_y^2 = M(1)/4; int phi_yy^2 = (M(2) - 4 M(1) + 4 M(0))/16
        let int_phi_y_sq = phi_sq_moment(1) / 4.0;
        let int_phi_yy_sq =
            (phi_sq_moment(2) - 4.0 * phi_sq_moment(1) + 4.0 * phi_sq_moment(0)) / 16.0;
        assert_abs_diff_eq!(
            e01,
            0.5 * int_phi_y_sq + 0.5 * int_phi_yy_sq,
            epsilon = 1e-12
        );
        // E02 with G = 0 reduces to ||F||^2/2
        let expected_e02 = 0.5 * scaled.f_anti.l2_norm_sq();
        assert_abs_diff_eq!(e02, expected_e02, epsilon = 1e-14);
        let norm = scaled.f_anti.weighted_norm(0, 0.0).unwrap();
        assert_abs_diff_eq!(e02, 0.5 * norm * norm, epsilon = 1e-13);
    }

    #[test]
    fn e1_matches_oracles() {
        let grid = Grid::new(20.0, 512).unwrap();
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let factors = ScaledFactors::at(&coeff, 0.0).unwrap();
        // g = 0: E12_0 = ||f||^2/2
        let f = grid.sample(|y| y * (-y * y / 5.0).exp());
        let scaled = synthetic_state(&grid, &coeff, 0.0, f.clone(), grid.zeros(), 0.0, 0.0);
        let fields = snapshot_fields(&scaled, &factors, &NonlinearityModel::linear()).unwrap();
        let (_, e12_0) = eval_e1(&scaled, &fields, &factors, 0).unwrap();
        assert_abs_diff_eq!(e12_0, 0.5 * f.l2_norm_sq(), epsilon = 1e-14);

        // n = 1 with f = phi_y: E11_1 = (1/2) int y^2 phi_yy^2 + (1/2) int y^2 phi_yyy^2
        let f = phi_poly().deriv().sample(&grid);
        let scaled = synthetic_state(&grid, &coeff, 0.0, f, grid.zeros(), 0.0, 0.0);
        let fields = snapshot_fields(&scaled, &factors, &NonlinearityModel::linear()).unwrap();
        let (e11_1, _) = eval_e1(&scaled, &fields, &factors, 1).unwrap();
        // y^2 phi_yy^2 = y^2 (y^2-2)^2 phi^2 / 16 -> (M3 - 4 M2 + 4 M1)/16
        let int_y2_phi_yy_sq =
            (phi_sq_moment(3) - 4.0 * phi_sq_moment(2) + 4.0 * phi_sq_moment(1)) / 16.0;
        // y^2 phi_yyy^2 = y^4 (6-y^2)^2 phi^2 / 64 -> (36 M2 - 12 M3 + M4)/64
        let int_y2_phi_yyy_sq = (36.0 * phi_sq_moment(2) - 12.0 * phi_sq_moment(3)
            + phi_sq_moment(4))
            / 64.0;
        assert_abs_diff_eq!(
            e11_1,
            0.5 * int_y2_phi_yy_sq + 0.5 * int_y2_phi_yyy_sq,
            epsilon = 1e-12
        );
    }

    #[test]
    fn e2_reductions_and_grid_refinement() {
        let coeff = CoefficientModel::power_law(1.0, 0.0).unwrap();
        let factors = ScaledFactors::at(&coeff, 0.4).unwrap();
        let mut values = Vec::new();
        for n in [512usize, 1024] {
            let grid = Grid::new(20.0, n).unwrap();
            let f = grid.sample(|y| (1.0 - 0.3 * y) * y * (-y * y / 6.0).exp() * 1e-1);
            let g = grid.sample(|y| 0.05 * y * (-y * y / 4.0).exp());
            let scaled = synthetic_state(&grid, &coeff, 0.4, f.clone(), g, 0.0, 0.0);
            let fields =
                snapshot_fields(&scaled, &factors, &NonlinearityModel::linear()).unwrap();
            let (e21, _) = eval_e2(&fields, &factors);
            values.push(e21);

            // g = 0 reduction: E22 = ||f_y||^2 / 2
            let scaled0 = synthetic_state(&grid, &coeff, 0.4, f, grid.zeros(), 0.0, 0.0);
            let fields0 =
                snapshot_fields(&scaled0, &factors, &NonlinearityModel::linear()).unwrap();
            let (_, e22) = eval_e2(&fields0, &factors);
            assert_abs_diff_eq!(e22, 0.5 * fields0.f_y.l2_norm_sq(), epsilon = 1e-14);
        }
        assert!(
            (values[0] - values[1]).abs() < 1e-10,
            "grid doubling changed E21 by {}",
            (values[0] - values[1]).abs()
        );
    }

    #[test]
    fn em_values() {
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let factors = ScaledFactors::at(&coeff, 0.0).unwrap();
        let (em1, em2) = eval_em(3.0, 0.0, &factors);
        assert_eq!(em1, 0.0);
        assert_eq!(em2, 4.5);
        let (em1, _) = eval_em(0.0, 2.0, &factors);
        assert_eq!(em1, 2.0);
        let (_, em2) = eval_em(1.0, -1.0, &factors);
        assert_eq!(em2, -0.5);
    }

    #[test]
    fn composites_examples() {
        let zero = Energies::default();
        let gp = GParts::default();
        let w = EnergyWeights::default();
        let c = eval_composites(&zero, &gp, &w).unwrap();
        assert_eq!(c.cal_e, 0.0);
        assert_eq!(c.cal_g, 0.0);
        assert_eq!(c.cal_e_tilde, 0.0);

        // unit weights, every part 1: EE0 = 2, calE = 2+2+2+2+1 = 9
        let ones = Energies {
            e01: 1.0,
            e02: 1.0,
            e11_0: 1.0,
            e12_0: 1.0,
            e11_1: 1.0,
            e12_1: 1.0,
            e21: 1.0,
            e22: 1.0,
            em1: 1.0,
            em2: 1.0,
        };
        let unit = EnergyWeights {
            c0: 1.0,
            c1_0: 1.0,
            c1_1: 1.0,
            c2: 1.0,
            ctilde0: 1.0,
            ctilde1_0: 1.0,
            ctilde1_1: 1.0,
        };
        let c = eval_composites(&ones, &gp, &unit).unwrap();
        assert_eq!(c.ee0, 2.0);
        assert_eq!(c.cal_e, 9.0);
        assert_eq!(c.cal_e_tilde, 10.0);

        let bad = EnergyWeights {
            c0: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            eval_composites(&ones, &gp, &bad),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn remainder_norms_zero_when_trivial() {
        let grid = Grid::new(20.0, 256).unwrap();
        let coeff = CoefficientModel::power_law(0.0, 0.0).unwrap();
        let scaled = zero_state(&grid, &coeff, 0.5);
        let factors = ScaledFactors::at(&coeff, 0.5).unwrap();
        let fields =
            snapshot_fields(&scaled, &factors, &NonlinearityModel::quadratic(1.0)).unwrap();
        let norms = remainder_norms(&scaled, &fields).unwrap();
        assert_eq!(norms.h_anti_l2, 0.0);
        assert_eq!(norms.h_h01, 0.0);
        assert_eq!(norms.hy_l2, 0.0);
        assert_eq!(norms.nonlin_l2, 0.0);
        assert_eq!(norms.nonlin_y_h01, 0.0);
        assert_eq!(norms.nonlin_yy_l2, 0.0);
    }

    #[test]
    fn specialized_rhs_matches_general_instancing() {
        // The eight (f,g)-identities are instances of the general system with
        // k = 1/2, c1 = r^2 e^{-s}/a, c2 = r'/a, c3 = 1, c4 = e^{-s}/a and the
        // respective (l, m, n) and field/inhomogeneity substitutions.
        let grid = Grid::new(20.0, 512).unwrap();
        let coeff = CoefficientModel::power_law(1.0, -0.3).unwrap();
        let s = 0.9;
        let factors = ScaledFactors::at(&coeff, s).unwrap();
        let f = grid.sample(|y| 0.1 * y * (-y * y / 5.0).exp());
        let g = grid.sample(|y| 0.03 * (1.0 - y * y / 7.0) * y * (-y * y / 6.0).exp());
        let scaled = synthetic_state(&grid, &coeff, s, f, g, 0.8, -0.2);
        let nonlin =
            NonlinearityModel::new(1.0, 3.0, crate::nonlinearity::TildeForm::PowerLaw).unwrap();
        let fields = snapshot_fields(&scaled, &factors, &nonlin).unwrap();
        let energies = eval_energies(&scaled, &fields, &factors).unwrap();
        let rhs = identity_rhs(&scaled, &fields, &factors, &energies);

        // closed-form derivatives of the coefficient functions (exact in s)
        let c1p = 2.0 * factors.r_prime / factors.a
            - factors.c1
            - factors.r * factors.a_prime / (factors.a * factors.a);
        let c4p = -factors.c4 - factors.a_prime / (factors.r * factors.a * factors.a);
        let c_values = [factors.c1, factors.rp_over_a(), 1.0, factors.c4];
        let c_derivs = [c1p, 0.0, 0.0, c4p];

        // E11^(n)/E12^(n): l = 1/2, m = 3/2, h_gen = nonlin_1 + h
        for n in 0..=1u32 {
            let h_gen = fields.nonlin_1.add(&scaled.h);
            let (r1, r2) = general_rhs(
                0.5,
                0.5,
                1.5,
                n,
                c_values,
                c_derivs,
                &scaled.f,
                &fields.f_y,
                &fields.f_yy,
                &scaled.g,
                &fields.g_y,
                &h_gen,
            );
            let (i1, i2) = if n == 0 { (2, 3) } else { (4, 5) };
            assert_abs_diff_eq!(rhs[i1], r1, epsilon = 1e-12);
            assert_abs_diff_eq!(rhs[i2], r2, epsilon = 1e-12);
        }

        // E01/E02: fields (F, G), l = 0, m = 1, n = 0, h_gen = nonlin_0 + H
        let h_gen = fields.nonlin_0.add(&scaled.h_anti);
        let cap_f_y = &scaled.f;
        let cap_f_yy = &fields.f_y;
        let (r1, r2) = general_rhs(
            0.5,
            0.0,
            1.0,
            0,
            c_values,
            c_derivs,
            &scaled.f_anti,
            cap_f_y,
            cap_f_yy,
            &scaled.g_anti,
            &scaled.g,
            &h_gen,
        );
        assert_abs_diff_eq!(rhs[0], r1, epsilon = 1e-12);
        assert_abs_diff_eq!(rhs[1], r2, epsilon = 1e-12);

        // E21/E22: fields (f_y, g_y), l = 1, m = 2, n = 0, h_gen = nonlin_2 + h_y
        let h_gen = fields.nonlin_2.add(&fields.h_y);
        let (r1, r2) = general_rhs(
            0.5,
            1.0,
            2.0,
            0,
            c_values,
            c_derivs,
            &fields.f_y,
            &fields.f_yy,
            &fields.f_yyy,
            &fields.g_y,
            &scaled.g.deriv(2).unwrap(),
            &h_gen,
        );
        assert_abs_diff_eq!(rhs[6], r1, epsilon = 1e-12);
        assert_abs_diff_eq!(rhs[7], r2, epsilon = 1e-12);
    }

    fn manufactured_example(n: u32) -> GeneralIdentitySystem {
        GeneralIdentitySystem {
            k: 0.5,
            l: 0.5,
            m: 1.5,
            n,
            c1: ScalarWithDeriv::constant(1.0),
            c2: ScalarWithDeriv::constant(1.0),
            c3: ScalarWithDeriv::constant(1.0),
            c4: ScalarWithDeriv::constant(1.0),
            sigma: (
                Arc::new(|s: f64| (-s).exp()),
                Arc::new(|s: f64| -(-s).exp()),
                Arc::new(|s: f64| (-s).exp()),
            ),
            profile: phi_poly(),
        }
    }

    #[test]
    fn general_identity_zero_system() {
        let grid = Grid::new(20.0, 256).unwrap();
        let mut sys = manufactured_example(0);
        sys.profile = GaussPoly::constant(0.0);
        let res = general_identity_residual(&sys, &grid, &[0.3, 0.7], 1e-3).unwrap();
        for r in res {
            assert_eq!(r.e1, 0.0);
            assert_eq!(r.e2, 0.0);
        }
    }

    #[test]
    fn general_identity_manufactured_refinement() {
        let grid = Grid::new(20.0, 512).unwrap();
        let samples: Vec<f64> = (1..=8).map(|i| 0.125 * i as f64).collect();
        for n in [0u32, 1] {
            let sys = manufactured_example(n);
            let coarse = general_identity_residual(&sys, &grid, &samples, 1e-3).unwrap();
            let fine = general_identity_residual(&sys, &grid, &samples, 5e-4).unwrap();
            let max1 = coarse.iter().fold(0.0f64, |m, r| m.max(r.e1));
            let max2 = coarse.iter().fold(0.0f64, |m, r| m.max(r.e2));
            assert!(max1 < 1e-6 && max2 < 1e-6, "n={n}: {max1:.2e} {max2:.2e}");
            let f1 = fine.iter().fold(0.0f64, |m, r| m.max(r.e1));
            let f2 = fine.iter().fold(0.0f64, |m, r| m.max(r.e2));
            assert!(max1 / f1 >= 3.7, "n={n} E1 ratio {}", max1 / f1);
            assert!(max2 / f2 >= 3.7, "n={n} E2 ratio {}", max2 / f2);
        }
    }

    #[test]
    fn report_composites_match_recomputation_exactly() {
        let grid = Grid::new(20.0, 512).unwrap();
        let coeff = CoefficientModel::power_law(1.0, 0.0).unwrap();
        let f = grid.sample(|y| 0.02 * y * (-y * y / 5.0).exp());
        let g = grid.sample(|y| 0.01 * (1.0 - y * y / 3.0) * y * (-y * y / 6.0).exp());
        let scaled = synthetic_state(&grid, &coeff, 1.2, f, g, 0.4, -0.1);
        let weights = EnergyWeights::default();
        let report = energy_report(
            &scaled,
            &coeff,
            &NonlinearityModel::quadratic(1.0),
            &weights,
        )
        .unwrap();
        let again = eval_composites(&report.energies, &report.g_parts, &weights).unwrap();
        assert_eq!(report.composites, again);
        let direct = weights.ctilde0 * report.composites.ee0
            + weights.ctilde1_0 * report.composites.ee1_0
            + weights.ctilde1_1 * report.composites.ee1_1
            + report.composites.ee2
            + report.energies.em1;
        assert!((report.composites.cal_e - direct).abs() <= 1e-13 * direct.abs().max(1.0));
    }

    #[test]
    fn identity_residual_series_on_synthetic_reports() {
        // E(s) = e^{-2s} with rhs = -2 e^{-2s}: residual = O(ds^2), quarters
        // when the stride halves.
        let mk = |ds: f64, count: usize| -> Vec<EnergyReport> {
            (0..count)
                .map(|i| {
                    let s = ds * i as f64;
                    let e = (-2.0 * s).exp();
                    EnergyReport {
                        s,
                        t: s,
                        m: 0.0,
                        m_s: 0.0,
                        energies: Energies {
                            e01: e,
                            ..Default::default()
                        },
                        composites: Composites::default(),
                        remainder: RemainderNorms::default(),
                        identity_rhs: [-2.0 * e, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                        identity_residuals: BTreeMap::new(),
                        lower_bound_quarter: 0.0,
                        g_parts: GParts::default(),
                    }
                })
                .collect()
        };
        let fine = mk(0.005, 41);
        let coarse_series = identity_residual_series(&fine, 2).unwrap();
        let fine_series = identity_residual_series(&fine, 1).unwrap();
        let rc = series_norm(&coarse_series[0].1);
        let rf = series_norm(&fine_series[0].1);
        assert!(rc / rf > 3.9 && rc / rf < 4.1, "ratio {}", rc / rf);
        // degenerate identities stay identically zero
        for j in 1..10 {
            assert_eq!(series_norm(&fine_series[j].1), 0.0);
        }
    }
}

//! Deterministic result files: CSV tables plus a JSON summary, each carrying
//! a schema-version field; wall-clock metadata goes to a separate sidecar so
//! result files are byte-identical across reruns.

use std::fmt::Write as _;
use std::path::Path;

use crate::coefficients::CoefficientModel;
use crate::error::{Error, Result};
use crate::pipeline::RunArtifacts;
use crate::scaling::to_scaled;

pub const SCHEMA_VERSION: &str = "1.0";

fn schema_line() -> String {
    format!("# schema_version {SCHEMA_VERSION}\n")
}

fn fmt(value: f64) -> String {
    if value.is_nan() {
        "nan".into()
    } else {
        format!("{value:.17e}")
    }
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(fmt).unwrap_or_default()
}

pub fn write_run(artifacts: &RunArtifacts, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let formats = &artifacts.config.output.formats;
    let csv = formats.iter().any(|f| f == "csv");
    let json = formats.iter().any(|f| f == "json");
    let snapshots = formats.iter().any(|f| f == "snapshots");

    if json || !csv {
        write_summary(artifacts, out_dir)?;
    }
    if csv {
        write_summary(artifacts, out_dir)?;
        write_energy_table(artifacts, out_dir)?;
        write_mass_series(artifacts, out_dir)?;
        write_profile_errors(artifacts, out_dir)?;
        write_identity_residuals(artifacts, out_dir)?;
    }
    if snapshots {
        write_snapshots(artifacts, out_dir)?;
    }
    write_meta(out_dir)?;
    Ok(())
}

fn write_summary(artifacts: &RunArtifacts, out_dir: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&artifacts.summary)
        .map_err(|e| Error::InvalidInput(format!("summary serialization failed: {e}")))?;
    std::fs::write(out_dir.join("summary.json"), text + "\n")?;
    Ok(())
}

/// Reject summaries written by a different schema major version.
pub fn read_summary_version(path: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("summary parse failed: {e}")))?;
    let version = value
        .get("schema_version")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::InvalidInput("summary lacks schema_version".into()))?;
    let major = version.split('.').next().unwrap_or("");
    let expected = SCHEMA_VERSION.split('.').next().unwrap_or("");
    if major != expected {
        return Err(Error::InvalidInput(format!(
            "unsupported summary schema major version {version} (reader supports {SCHEMA_VERSION})"
        )));
    }
    Ok(value)
}

fn write_energy_table(artifacts: &RunArtifacts, out_dir: &Path) -> Result<()> {
    let mut text = schema_line();
    text.push_str(
        "s,t,m,m_s,E01,E02,E11_0,E12_0,E11_1,E12_1,E21,E22,Em1,Em2,\
         EE0,EE1_0,EE1_1,EE2,calE,calG,calE_tilde,\
         H_L2,h_H01,hy_L2,nonlin_L2,nonlin_y_H01,nonlin_yy_L2\n",
    );
    for r in &artifacts.reports {
        let e = r.energies.as_array();
        let c = &r.composites;
        let n = &r.remainder;
        let mut row = format!("{},{},{},{}", fmt(r.s), fmt(r.t), fmt(r.m), fmt(r.m_s));
        for v in e {
            let _ = write!(row, ",{}", fmt(v));
        }
        let _ = write!(
            row,
            ",{},{},{},{},{},{},{}",
            fmt(c.ee0),
            fmt(c.ee1_0),
            fmt(c.ee1_1),
            fmt(c.ee2),
            fmt(c.cal_e),
            fmt(c.cal_g),
            fmt(c.cal_e_tilde)
        );
        let _ = writeln!(
            row,
            ",{},{},{},{},{},{}",
            fmt(n.h_anti_l2),
            fmt(n.h_h01),
            fmt(n.hy_l2),
            fmt(n.nonlin_l2),
            fmt(n.nonlin_y_h01),
            fmt(n.nonlin_yy_l2)
        );
        text.push_str(&row);
    }
    std::fs::write(out_dir.join("energy.csv"), text)?;
    Ok(())
}

fn write_mass_series(artifacts: &RunArtifacts, out_dir: &Path) -> Result<()> {
    let mut text = schema_line();
    text.push_str("s,t,m,m_s\n");
    for r in &artifacts.reports {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            fmt(r.s),
            fmt(r.t),
            fmt(r.m),
            fmt(r.m_s)
        );
    }
    std::fs::write(out_dir.join("m_series.csv"), text)?;
    Ok(())
}

fn write_profile_errors(artifacts: &RunArtifacts, out_dir: &Path) -> Result<()> {
    let mut text = schema_line();
    text.push_str("s,t,err_shift,err_raw,v_minus_mstar_phi\n");
    for d in &artifacts.diags {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            fmt(d.s),
            fmt(d.t),
            fmt(d.err_shift),
            fmt_opt(d.err_raw),
            fmt(d.v_minus_mstar_phi)
        );
    }
    std::fs::write(out_dir.join("profile_error.csv"), text)?;
    Ok(())
}

fn write_identity_residuals(artifacts: &RunArtifacts, out_dir: &Path) -> Result<()> {
    let mut text = schema_line();
    text.push_str("s,E01,E02,E11_0,E12_0,E11_1,E12_1,E21,E22,Em1,Em2\n");
    for r in &artifacts.reports {
        if r.identity_residuals.is_empty() {
            continue; // endpoints have no centered difference
        }
        let mut row = fmt(r.s);
        for name in crate::energy::IDENTITY_NAMES {
            let _ = write!(
                row,
                ",{}",
                fmt(*r.identity_residuals.get(name).unwrap_or(&f64::NAN))
            );
        }
        row.push('\n');
        text.push_str(&row);
    }
    std::fs::write(out_dir.join("identities.csv"), text)?;
    Ok(())
}

fn write_snapshots(artifacts: &RunArtifacts, out_dir: &Path) -> Result<()> {
    let Some(trajectory) = &artifacts.trajectory else {
        return Ok(());
    };
    let coeff: CoefficientModel = artifacts.config.coefficient_model()?;
    let y_grid = artifacts.config.y_grid()?;
    let mut text = schema_line();
    let _ = writeln!(
        text,
        "# grid L {} n {}",
        y_grid.half_width(),
        y_grid.len()
    );
    text.push_str("snapshot,s,t,y,v,w,f,g,h\n");
    for (idx, state) in trajectory.snapshots.iter().enumerate() {
        let scaled = to_scaled(state, &coeff, &y_grid)?;
        for (j, &y) in y_grid.points().iter().enumerate() {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{},{},{}",
                idx,
                fmt(scaled.s),
                fmt(scaled.t),
                fmt(y),
                fmt(scaled.v.values()[j]),
                fmt(scaled.w.values()[j]),
                fmt(scaled.f.values()[j]),
                fmt(scaled.g.values()[j]),
                fmt(scaled.h.values()[j]),
            );
        }
    }
    std::fs::write(out_dir.join("snapshots.csv"), text)?;
    Ok(())
}

/// Wall-clock sidecar; the only file allowed to differ between identical runs.
fn write_meta(out_dir: &Path) -> Result<()> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let text = format!(
        "{{\n  \"written_at_unix\": {now},\n  \"tool_version\": \"{}\"\n}}\n",
        env!("CARGO_PKG_VERSION")
    );
    std::fs::write(out_dir.join("run_meta.json"), text)?;
    Ok(())
}

/// Sweep map table: one row per parameter point.
pub fn write_sweep(points: &[crate::analysis::SweepPoint], out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut text = schema_line();
    text.push_str("alpha,beta,region,status,m_star,slope,r_squared,rate_ok,error\n");
    for p in points {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            fmt(p.alpha),
            fmt(p.beta),
            p.region,
            p.status,
            fmt_opt(p.m_star),
            fmt_opt(p.slope),
            fmt_opt(p.r_squared),
            p.rate_ok.map(|b| b.to_string()).unwrap_or_default(),
            p.error
                .as_deref()
                .map(|e| e.replace(',', ";").replace('\n', " "))
                .unwrap_or_default()
        );
    }
    std::fs::write(out_dir.join("sweep_map.csv"), text)?;
    write_meta(out_dir)?;
    Ok(())
}

//! Deterministic file output: CSV with round-trip float precision plus JSON
//! sidecars carrying the effective configuration.

use anyhow::{Context, Result};
use ezone_core::planner::{ComparisonReport, PlanModel, PlanResult};
use ezone_core::reachability::Frontier;
use ezone_core::Circle;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Format a float with 17 significant digits so the decimal text
/// round-trips to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating directory {}", parent.display()))?;
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).context("serializing JSON")?;
    text.push('\n');
    write_text(path, &text)
}

/// Sidecar path: same stem with a .json extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn frontier_csv(frontier: &Frontier) -> String {
    let mut out = String::from("param,x,y\n");
    for v in &frontier.vertices {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(v.param),
            fmt_f64(v.x),
            fmt_f64(v.y)
        ));
    }
    out
}

#[derive(Serialize)]
pub struct FrontierSidecar<'a, C: Serialize> {
    pub config: &'a C,
    pub kind: ezone_core::FrontierKind,
    /// Minimum-turn circles in the same (world) frame as the polyline.
    pub min_turn_circles: Option<[Circle; 2]>,
}

pub fn trajectory_csv(result: &PlanResult, margins: &[f64]) -> String {
    let mut out = String::from("t,x,y,psi_T,margin\n");
    let traj = &result.trajectory;
    for i in 0..traj.times.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(traj.times[i]),
            fmt_f64(traj.positions[i].x),
            fmt_f64(traj.positions[i].y),
            fmt_f64(traj.headings[i]),
            fmt_f64(margins[i])
        ));
    }
    out
}

pub fn model_name(model: PlanModel) -> &'static str {
    match model {
        PlanModel::Nominal => "nominal",
        PlanModel::Bez => "bez",
        PlanModel::Cbez => "cbez",
        PlanModel::Csbez => "csbez",
    }
}

pub fn comparison_csv(report: &ComparisonReport) -> String {
    let mut out = String::from("model,t_f,percent_improvement\n");
    for row in &report.rows {
        let t_f = row.t_f.map(fmt_f64).unwrap_or_default();
        let pct = row.percent_improvement.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", model_name(row.model), t_f, pct));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatted_floats_round_trip() {
        for x in [std::f64::consts::PI, -1.0 / 3.0, 1e-300, 6.02e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}

//! Command-line plumbing: configuration files, result tables and the small
//! link-budget calculators.

pub mod calc;
pub mod config;
pub mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use calc::{locality_check, phase_stability, LinkBudget, LocalityReport, StabilityReport};
pub use config::RunConfig;
pub use report::OutputSet;

use crate::chsh::{
    eta_t_grid, evaluate, figure2_scenarios, figure2_sweep, optimize, threshold, Curve, OptimizerConfig, ParamId,
    ThresholdConfig, ThresholdOutcome, CLASSICAL_BOUND,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("optimizer failure: {0}")]
    NonConvergence(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Parse(_) | Self::Io(_) => 1,
            Self::Domain(_) => 2,
            Self::NonConvergence(_) => 3,
        }
    }
}

impl From<crate::Error> for AppError {
    fn from(e: crate::Error) -> Self {
        use crate::Error as E;
        match e {
            E::OptimizerNonConvergence { .. } | E::NotMonotone { .. } | E::QuadratureNonConvergence { .. } => {
                Self::NonConvergence(e.to_string())
            }
            other => Self::Domain(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Evaluate,
    Optimize,
    /// Swept parameter; falls back to the config's `threshold.param`.
    Threshold(Option<ParamId>),
    Fig2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Runs `mode` on the configuration and writes `<id>.csv`, `<id>.summary.txt`
/// and any mode-specific tables into `out_dir`. On error no file is written.
pub fn run(mode: Mode, cfg: &RunConfig, seed: Option<u64>, out_dir: &Path) -> Result<Report, AppError> {
    let (summary, outputs) = compute(mode, cfg, seed)?;
    let files = outputs.commit(out_dir)?;
    Ok(Report { summary, files })
}

fn compute(mode: Mode, cfg: &RunConfig, seed: Option<u64>) -> Result<(String, OutputSet), AppError> {
    let id = cfg.id.as_str();
    let mut summary = String::new();
    let mut out = OutputSet::default();
    match mode {
        Mode::Evaluate => {
            let sc = cfg.scenario()?;
            let r = evaluate(&sc)?;
            let _ = writeln!(summary, "scenario {id}: evaluate");
            report::describe_result(&mut summary, &r);
            out.add(format!("{id}.csv"), report::results_csv(&[(id.to_string(), &r)])?);
        }
        Mode::Optimize => {
            let sc = cfg.scenario()?;
            if sc.free.is_empty() {
                return Err(AppError::Domain("free: optimize needs at least one free parameter".into()));
            }
            let ocfg = cfg.optimizer(seed);
            let r = optimize(&sc, &ocfg)?;
            let _ = writeln!(
                summary,
                "scenario {id}: optimize over {} parameters (seed {})",
                sc.free.len(),
                ocfg.seed
            );
            report::describe_result(&mut summary, &r);
            out.add(format!("{id}.csv"), report::results_csv(&[(id.to_string(), &r)])?);
        }
        Mode::Threshold(param) => {
            let sc = cfg.scenario()?;
            let (param, tcfg) = cfg.threshold(param, seed)?;
            let outcome = threshold(&sc, param, &tcfg)?;
            let _ = writeln!(
                summary,
                "scenario {id}: threshold in {param} on [{}, {}] (tolerance {}, seed {})",
                tcfg.lower, tcfg.upper, tcfg.tolerance, tcfg.optimizer.seed
            );
            describe_threshold(&mut summary, param, &outcome);
            if let ThresholdOutcome::Crossing { witness, .. } = &outcome {
                out.add(format!("{id}.csv"), report::results_csv(&[(id.to_string(), witness)])?);
            } else {
                out.add(format!("{id}.csv"), report::results_csv(&[])?);
            }
            out.add(format!("{id}-scan.csv"), report::threshold_csv(id, param, &outcome)?);
        }
        Mode::Fig2 => {
            let f = cfg.fig2();
            let grid = eta_t_grid(f.eta_t_start, f.eta_t_stop, f.eta_t_step).map_err(|e| AppError::Domain(format!("fig2: {e}")))?;
            let ocfg = cfg.optimizer(seed);
            let curves = figure2_sweep(&figure2_scenarios(), &grid, &ocfg)?;
            let _ = writeln!(
                summary,
                "scenario {id}: optimized S* over eta_t in [{}, {}] step {} (seed {})",
                f.eta_t_start, f.eta_t_stop, f.eta_t_step, ocfg.seed
            );
            for c in &curves {
                let last = c.points.last().map_or(f64::NAN, |p| p.result.s_value);
                let _ = write!(summary, "{:<20} S*(eta_t = {}) = {:.4}", c.label, grid[grid.len() - 1], last);
                if f.crossings {
                    match curve_crossing(c, &ocfg)? {
                        Some(x) => {
                            let _ = write!(summary, ", S* = 2 crossed at eta_t = {x:.3}");
                        }
                        None => {
                            let _ = write!(summary, ", no crossing inside the grid");
                        }
                    }
                }
                summary.push('\n');
            }
            out.add(format!("{id}.csv"), report::fig2_wide_csv(&curves)?);
            out.add(format!("{id}-long.csv"), report::fig2_long_csv(&curves)?);
        }
    }
    out.add(format!("{id}.summary.txt"), summary.clone());
    Ok((summary, out))
}

fn describe_threshold(out: &mut String, param: ParamId, outcome: &ThresholdOutcome) {
    match outcome {
        ThresholdOutcome::Crossing { value, bracket, witness, .. } => {
            let _ = writeln!(out, "critical {param} = {value:.4}  (bracket [{:.6}, {:.6}])", bracket.0, bracket.1);
            let _ = writeln!(out, "optimum at the violating end of the bracket:");
            report::describe_result(out, witness);
        }
        ThresholdOutcome::AlwaysViolates { .. } => {
            let _ = writeln!(out, "S* > 2 over the whole interval; no threshold inside it");
        }
        ThresholdOutcome::NeverViolates { .. } => {
            let _ = writeln!(out, "S* <= 2 over the whole interval; no threshold inside it");
        }
    }
    let _ = writeln!(out, "scan:");
    for (x, s) in outcome.scan() {
        let _ = writeln!(out, "  {param} = {x:.4}  S* = {s:.10}");
    }
}

/// Bisects between the last grid point without a violation and the first
/// with one.
pub fn curve_crossing(curve: &Curve, ocfg: &OptimizerConfig) -> Result<Option<f64>, AppError> {
    let defaults = ThresholdConfig::default();
    let violates = |s: f64| s > CLASSICAL_BOUND + defaults.violation_margin;
    let k = match curve.points.iter().position(|p| violates(p.result.s_value)) {
        None | Some(0) => return Ok(None),
        Some(k) => k,
    };
    let tcfg = ThresholdConfig {
        lower: curve.points[k - 1].eta_t,
        upper: curve.points[k].eta_t,
        scan_points: 2,
        optimizer: ocfg.clone(),
        ..defaults
    };
    Ok(threshold(&curve.scenario, ParamId::EtaT, &tcfg)?.value())
}

/// Locality report; also written to `out_dir` when given.
pub fn run_locality(lb: &LinkBudget, out_dir: Option<&Path>) -> Result<Report, AppError> {
    let r = locality_check(lb)?;
    let summary = format!("{r}\n");
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        let header = [
            "distance_m",
            "attenuation_db_per_km",
            "detection_time_s",
            "signal_speed_m_per_s",
            "min_separation_m",
            "min_separation_fiber_m",
            "transmission",
            "separated",
        ];
        let row = [
            lb.distance_m,
            lb.attenuation_db_per_km,
            lb.detection_time_s,
            lb.signal_speed_m_per_s,
            r.min_separation_m,
            r.min_separation_fiber_m,
            r.transmission,
        ]
        .map(report::fmt_num)
        .into_iter()
        .chain([r.separated.to_string()]);
        let csv = format!("{}\n{}\n", header.join(","), row.collect::<Vec<_>>().join(","));
        let mut out = OutputSet::default();
        out.add("locality.csv", csv);
        out.add("locality.summary.txt", summary.clone());
        files = out.commit(dir)?;
    }
    Ok(Report { summary, files })
}

pub fn run_stability(k_norm: f64, delta_l: f64, threshold: f64, out_dir: Option<&Path>) -> Result<Report, AppError> {
    let r = phase_stability(k_norm, delta_l, threshold)?;
    let summary = format!("{r}\n");
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        let csv = format!(
            "k_norm_per_m,delta_l_m,product_rad,threshold_rad,stable\n{},{},{},{},{}\n",
            report::fmt_num(r.k_norm_per_m),
            report::fmt_num(r.delta_l_m),
            report::fmt_num(r.product),
            report::fmt_num(r.threshold),
            r.stable
        );
        let mut out = OutputSet::default();
        out.add("stability.csv", csv);
        out.add("stability.summary.txt", summary.clone());
        files = out.commit(dir)?;
    }
    Ok(Report { summary, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(AppError::Parse("x".into()).exit_code(), 1);
        assert_eq!(AppError::from(crate::Error::NonFinite).exit_code(), 2);
        let nc = crate::Error::OptimizerNonConvergence { starts: 1, best: 2.0 };
        assert_eq!(AppError::from(nc).exit_code(), 3);
    }

    #[test]
    fn evaluate_writes_table_and_summary() {
        let cfg = RunConfig::from_toml("id = \"ev\"\n[scenario]\npreset = \"counting_homodyne\"\n").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let rep = run(Mode::Evaluate, &cfg, None, dir.path()).unwrap();
        assert!(rep.summary.contains("S = 2.5586"), "{}", rep.summary);
        assert_eq!(rep.files.len(), 2);
        let csv = std::fs::read_to_string(dir.path().join("ev.csv")).unwrap();
        assert!(csv.starts_with("scenario_id,theta_rad,phi_rad,"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn failed_run_writes_nothing() {
        let cfg = RunConfig::from_toml("id = \"bad\"\n[scenario]\npreset = \"counting_homodyne\"\n").unwrap();
        let dir = tempfile::tempdir().unwrap();
        // No free parameters.
        let err = run(Mode::Optimize, &cfg, None, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}

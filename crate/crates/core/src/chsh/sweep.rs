use rayon::prelude::*;

use super::{optimize, ChshResult, OptimizerConfig, ParamId, Scenario};
use crate::error::{Error, Result};
use crate::model::Imperfections;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub eta_t: f64,
    pub result: ChshResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub scenario: Scenario,
    pub points: Vec<CurvePoint>,
}

impl Curve {
    pub fn s_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.result.s_value).collect()
    }
}

/// `start, start + step, …` up to and including `stop` (within rounding).
pub fn eta_t_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start > stop || step <= 0.0 {
        return Err(Error::InvalidScenario(format!(
            "grid {start}..{stop} step {step} must be increasing inside [0, 1]"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // Rounded to 1e-12 so labels like 0.45 print cleanly.
    Ok((0..=n)
        .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Counting + homodyne at detector efficiencies 1, 0.8, 0.6, 0.4, then the
/// two-homodyne menu; all settings free.
pub fn figure2_scenarios() -> Vec<(String, Scenario)> {
    let mut out: Vec<(String, Scenario)> = [1.0, 0.8, 0.6, 0.4]
        .into_iter()
        .map(|eta_d| {
            let sc = Scenario::counting_homodyne()
                .with_imperfections(Imperfections {
                    eta_d,
                    ..Imperfections::ideal()
                })
                .with_all_settings_free();
            (format!("counting_eta_d_{eta_d:.1}"), sc)
        })
        .collect();
    out.push(("two_homodyne".to_string(), Scenario::two_homodyne().with_all_settings_free()));
    out
}

/// Optimized S* for each scenario at each transmission efficiency.
pub fn figure2_sweep(scenarios: &[(String, Scenario)], grid: &[f64], cfg: &OptimizerConfig) -> Result<Vec<Curve>> {
    if let Some(bad) = grid.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::OutOfDomain {
            name: "eta_t",
            value: *bad,
            domain: "[0, 1]",
        });
    }
    scenarios
        .par_iter()
        .map(|(label, sc)| {
            let points = grid
                .par_iter()
                .map(|&eta_t| {
                    let mut probe = sc.clone();
                    probe.set(ParamId::EtaT, eta_t)?;
                    Ok(CurvePoint {
                        eta_t,
                        result: optimize(&probe, cfg)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Curve {
                label: label.clone(),
                scenario: sc.clone(),
                points,
            })
        })
        .collect()
}

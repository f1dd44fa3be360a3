use rayon::prelude::*;

use super::{optimize, ChshResult, OptimizerConfig, ParamId, Scenario, CLASSICAL_BOUND};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdConfig {
    pub lower: f64,
    pub upper: f64,
    /// Absolute tolerance on the returned critical value.
    pub tolerance: f64,
    /// Points in the coarse monotonicity scan, endpoints included.
    pub scan_points: usize,
    /// S* must exceed the classical bound by this much to count as a violation.
    pub violation_margin: f64,
    /// Largest decrease of S* between neighbouring scan points still read as
    /// optimizer noise rather than non-monotonicity.
    pub monotone_slack: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            lower: 0.0,
            upper: 1.0,
            tolerance: 0.005,
            scan_points: 11,
            violation_margin: 1e-7,
            monotone_slack: 1e-7,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdOutcome {
    /// S* rises through the classical bound at `value`.
    Crossing {
        value: f64,
        bracket: (f64, f64),
        scan: Vec<(f64, f64)>,
        /// `(parameter, S*)` at every bisection probe.
        probes: Vec<(f64, f64)>,
        /// Optimum at the upper bracket end.
        witness: Box<ChshResult>,
    },
    /// Already violating at the lower end of the interval.
    AlwaysViolates { scan: Vec<(f64, f64)> },
    /// No violation anywhere on the interval.
    NeverViolates { scan: Vec<(f64, f64)> },
}

impl ThresholdOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Crossing { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn scan(&self) -> &[(f64, f64)] {
        match self {
            Self::Crossing { scan, .. } | Self::AlwaysViolates { scan } | Self::NeverViolates { scan } => scan,
        }
    }
}

fn optimum_at(sc: &Scenario, param: ParamId, x: f64, cfg: &OptimizerConfig) -> Result<ChshResult> {
    let mut probe = sc.clone();
    probe.set(param, x)?;
    optimize(&probe, cfg)
}

/// Critical value of `param` at which the optimized S* reaches the classical
/// bound. S* must be non-decreasing in `param`; a coarse scan checks this
/// before bisection, and every probe re-optimizes all free parameters.
pub fn threshold(sc: &Scenario, param: ParamId, cfg: &ThresholdConfig) -> Result<ThresholdOutcome> {
    if !matches!(param, ParamId::EtaT | ParamId::EtaD) {
        return Err(Error::InvalidScenario(format!("{param} cannot be swept")));
    }
    if !sc.applies(param) {
        return Err(Error::InvalidScenario(format!("{param} is not part of this scenario")));
    }
    if sc.free.iter().any(|f| f.id == param) {
        return Err(Error::InvalidScenario(format!("{param} is swept and cannot also be free")));
    }
    if !(0.0 <= cfg.lower && cfg.lower < cfg.upper && cfg.upper <= 1.0) {
        return Err(Error::InvalidScenario(format!(
            "sweep interval [{}, {}] must lie inside [0, 1]",
            cfg.lower, cfg.upper
        )));
    }
    if cfg.scan_points < 2 || cfg.tolerance <= 0.0 {
        return Err(Error::InvalidScenario("need >= 2 scan points and a positive tolerance".into()));
    }

    let step = (cfg.upper - cfg.lower) / (cfg.scan_points - 1) as f64;
    let grid: Vec<f64> = (0..cfg.scan_points).map(|k| cfg.lower + k as f64 * step).collect();
    let optima: Vec<ChshResult> = grid
        .par_iter()
        .map(|&x| optimum_at(sc, param, x, &cfg.optimizer))
        .collect::<Result<_>>()?;
    let scan: Vec<(f64, f64)> = grid.iter().zip(&optima).map(|(&x, r)| (x, r.s_value)).collect();

    for w in scan.windows(2) {
        if w[1].1 < w[0].1 - cfg.monotone_slack {
            return Err(Error::NotMonotone {
                param: param.name(),
                detail: format!("S*({:.4}) = {:.10} > S*({:.4}) = {:.10}", w[0].0, w[0].1, w[1].0, w[1].1),
            });
        }
    }

    let violates = |s: f64| s > CLASSICAL_BOUND + cfg.violation_margin;
    let first = match scan.iter().position(|&(_, s)| violates(s)) {
        None => return Ok(ThresholdOutcome::NeverViolates { scan }),
        Some(0) => return Ok(ThresholdOutcome::AlwaysViolates { scan }),
        Some(k) => k,
    };

    let (mut lo, mut hi) = (grid[first - 1], grid[first]);
    let mut witness = optima[first].clone();
    let mut probes = Vec::new();
    while hi - lo > 2.0 * cfg.tolerance {
        let mid = 0.5 * (lo + hi);
        let r = optimum_at(sc, param, mid, &cfg.optimizer.warm_started(&witness))?;
        probes.push((mid, r.s_value));
        if violates(r.s_value) {
            hi = mid;
            witness = r;
        } else {
            lo = mid;
        }
    }

    Ok(ThresholdOutcome::Crossing {
        value: 0.5 * (lo + hi),
        bracket: (lo, hi),
        scan,
        probes,
        witness: Box::new(witness),
    })
}

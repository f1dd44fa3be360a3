//! TOML run configuration. Angles are in radians and efficiencies are
//! dimensionless; key names carry the unit.

use std::path::Path;

use serde::Deserialize;

use super::AppError;
use crate::chsh::{BobSetting, FreeParam, OptimizerConfig, ParamId, Scenario, ThresholdConfig};
use crate::measure::{AtomSetting, Outcome};
use crate::model::{Branching, Imperfections, StateParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    CountingHomodyne,
    TwoHomodyne,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub preset: Option<Preset>,
    /// Free every state and setting parameter with default bounds.
    #[serde(default)]
    pub free_all: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub theta_rad: f64,
    #[serde(default)]
    pub phi_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImperfectionsSection {
    #[serde(default = "one")]
    pub eta_t: f64,
    #[serde(default = "one")]
    pub eta_d: f64,
    #[serde(default = "one")]
    pub f_s: f64,
    #[serde(default)]
    pub f_g: f64,
    #[serde(default)]
    pub f_aux: f64,
    #[serde(default = "one")]
    pub fidelity: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliceSection {
    pub alpha_rad: f64,
    #[serde(default)]
    pub varphi_rad: f64,
    /// Outcome (+1 or -1) reported for the auxiliary level.
    #[serde(default = "minus_one")]
    pub aux_outcome: i64,
}

fn minus_one() -> i64 {
    -1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BobKind {
    Counting,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BobSection {
    pub kind: BobKind,
    pub zeta_rad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSection {
    pub param: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    /// Nelder–Mead evaluation budget per start.
    pub max_evals: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub param: Option<String>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub tolerance: Option<f64>,
    pub scan_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Section {
    #[serde(default = "grid_start")]
    pub eta_t_start: f64,
    #[serde(default = "one")]
    pub eta_t_stop: f64,
    #[serde(default = "grid_step")]
    pub eta_t_step: f64,
    /// Refine each curve's S = 2 crossing by bisection between grid points.
    #[serde(default = "yes")]
    pub crossings: bool,
}

fn grid_start() -> f64 {
    0.4
}

fn grid_step() -> f64 {
    0.05
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario id used in result tables and output file names.
    pub id: String,
    #[serde(default)]
    pub scenario: ScenarioSection,
    pub state: Option<StateSection>,
    pub imperfections: Option<ImperfectionsSection>,
    pub alice: Option<Vec<AliceSection>>,
    pub bob: Option<Vec<BobSection>>,
    pub free: Option<Vec<FreeSection>>,
    pub optimizer: Option<OptimizerSection>,
    pub threshold: Option<ThresholdSection>,
    pub fig2: Option<Fig2Section>,
}

fn field(path: &str, e: impl std::fmt::Display) -> AppError {
    AppError::Domain(format!("{path}: {e}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, AppError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| AppError::Parse(e.to_string()))?;
        if cfg.id.is_empty() || !cfg.id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err(AppError::Parse(format!(
                "id: {:?} must be non-empty and use only letters, digits, '-', '_' or '.'",
                cfg.id
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| AppError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            AppError::Parse(m) => AppError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// The scenario described by the preset and the explicit sections, which
    /// override the preset where given.
    pub fn scenario(&self) -> Result<Scenario, AppError> {
        let mut sc = match self.scenario.preset {
            Some(Preset::CountingHomodyne) => Some(Scenario::counting_homodyne()),
            Some(Preset::TwoHomodyne) => Some(Scenario::two_homodyne()),
            None => None,
        };

        let state = match (&self.state, &sc) {
            (Some(s), _) => StateParams::new(s.theta_rad, s.phi_rad).map_err(|e| field("state", e))?,
            (None, Some(sc)) => sc.state,
            (None, None) => return Err(AppError::Domain("state: required without a preset".into())),
        };

        let imperfections = match &self.imperfections {
            Some(i) => {
                let branching = Branching::new(i.f_s, i.f_g, i.f_aux).map_err(|e| field("imperfections", e))?;
                let imp = Imperfections {
                    eta_t: i.eta_t,
                    eta_d: i.eta_d,
                    branching,
                    fidelity: i.fidelity,
                };
                imp.validate().map_err(|e| field("imperfections", e))?;
                imp
            }
            None => Imperfections::ideal(),
        };

        let alice = match (&self.alice, &sc) {
            (Some(a), _) => {
                if a.len() != 2 {
                    return Err(AppError::Domain(format!("alice: expected 2 settings, found {}", a.len())));
                }
                let mut out = [AtomSetting::new(0.0, 0.0); 2];
                for (k, (dst, src)) in out.iter_mut().zip(a).enumerate() {
                    let aux = Outcome::try_from(src.aux_outcome).map_err(|e| field(&format!("alice[{k}].aux_outcome"), e))?;
                    if !(src.alpha_rad.is_finite() && src.varphi_rad.is_finite()) {
                        return Err(AppError::Domain(format!("alice[{k}]: angles must be finite")));
                    }
                    *dst = AtomSetting::new(src.alpha_rad, src.varphi_rad).with_aux_outcome(aux);
                }
                out
            }
            (None, Some(sc)) => sc.alice,
            (None, None) => return Err(AppError::Domain("alice: required without a preset".into())),
        };

        let bob = match (&self.bob, &sc) {
            (Some(b), _) => {
                if b.len() != 2 {
                    return Err(AppError::Domain(format!("bob: expected 2 measurements, found {}", b.len())));
                }
                let mut out = [BobSetting::Counting; 2];
                for (k, (dst, src)) in out.iter_mut().zip(b).enumerate() {
                    *dst = match (src.kind, src.zeta_rad) {
                        (BobKind::Counting, None) => BobSetting::Counting,
                        (BobKind::Counting, Some(_)) => {
                            return Err(AppError::Domain(format!("bob[{k}].zeta_rad: not used by photon counting")))
                        }
                        (BobKind::Quadrature, zeta) => BobSetting::Quadrature {
                            zeta: zeta.unwrap_or(0.0),
                        },
                    };
                }
                out
            }
            (None, Some(sc)) => sc.bob,
            (None, None) => return Err(AppError::Domain("bob: required without a preset".into())),
        };

        let mut built = sc.take().unwrap_or_else(Scenario::counting_homodyne);
        built.state = state;
        built.imperfections = imperfections;
        built.alice = alice;
        built.bob = bob;
        built.free = Vec::new();

        if self.scenario.free_all {
            built = built.with_all_settings_free();
        }
        if let Some(free) = &self.free {
            for (k, f) in free.iter().enumerate() {
                let path = format!("free[{k}]");
                let id: ParamId = f.param.parse().map_err(|e| field(&path, e))?;
                let (lo, hi) = id.default_bounds();
                let p = FreeParam::new(id, f.lower.unwrap_or(lo), f.upper.unwrap_or(hi)).map_err(|e| field(&path, e))?;
                built.free.retain(|q| q.id != id);
                built.free.push(p);
            }
        }
        built.validate().map_err(|e| field("scenario", e))?;
        Ok(built)
    }

    pub fn optimizer(&self, seed_override: Option<u64>) -> OptimizerConfig {
        let mut cfg = OptimizerConfig::default();
        if let Some(o) = &self.optimizer {
            if let Some(seed) = o.seed {
                cfg.seed = seed;
            }
            if let Some(starts) = o.starts {
                cfg.starts = starts;
            }
            if let Some(max_evals) = o.max_evals {
                cfg.simplex.max_evals = max_evals;
            }
        }
        if let Some(seed) = seed_override {
            cfg.seed = seed;
        }
        cfg
    }

    /// Swept parameter (command line wins over the config) and bisection settings.
    pub fn threshold(
        &self,
        param_override: Option<ParamId>,
        seed_override: Option<u64>,
    ) -> Result<(ParamId, ThresholdConfig), AppError> {
        let section = self.threshold.as_ref();
        let param = match (param_override, section.and_then(|t| t.param.as_deref())) {
            (Some(p), _) => p,
            (None, Some(name)) => name.parse().map_err(|e| field("threshold.param", e))?,
            (None, None) => return Err(AppError::Usage("threshold: no parameter given (--param or threshold.param)".into())),
        };
        let mut cfg = ThresholdConfig {
            optimizer: self.optimizer(seed_override),
            ..ThresholdConfig::default()
        };
        if let Some(t) = section {
            cfg.lower = t.lower.unwrap_or(cfg.lower);
            cfg.upper = t.upper.unwrap_or(cfg.upper);
            cfg.tolerance = t.tolerance.unwrap_or(cfg.tolerance);
            cfg.scan_points = t.scan_points.unwrap_or(cfg.scan_points);
        }
        Ok((param, cfg))
    }

    pub fn fig2(&self) -> Fig2Section {
        self.fig2.clone().unwrap_or(Fig2Section {
            eta_t_start: grid_start(),
            eta_t_stop: 1.0,
            eta_t_step: grid_step(),
            crossings: true,
        })
    }
}

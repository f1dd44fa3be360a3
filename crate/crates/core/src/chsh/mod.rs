//! CHSH evaluation and optimization over experiment scenarios.
//!
//! A [`Scenario`] fixes every physical parameter; its `free` list names the
//! ones [`optimize`] may vary. The CHSH combination is
//! `S = E₁₁ + E₁₂ + E₂₁ − E₂₂` with `Eᵢⱼ` the correlator of Alice's setting
//! `i` against Bob's setting `j`.

mod branching;
mod optimize;
pub mod simplex;
mod sweep;
mod threshold;

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

pub use branching::{branching_slope, branching_slope_with, branching_strategy, BranchingSlope, BRANCHING_EPSILONS};
pub use optimize::{optimize, OptimizerConfig, OptimizerTrace};
pub use sweep::{eta_t_grid, figure2_scenarios, figure2_sweep, Curve, CurvePoint};
pub use threshold::{threshold, ThresholdConfig, ThresholdOutcome};

use crate::error::{Error, Result};
use crate::measure::{atom_effects, correlator, optical_effects, probs_from_effects, AtomSetting, OpticalMeasurement};
use crate::model::{prepare, Branching, Imperfections, StateParams};

/// Local-realist bound.
pub const CLASSICAL_BOUND: f64 = 2.0;

/// Bob's measurement menu entry. The counting efficiency comes from the
/// scenario's [`Imperfections`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BobSetting {
    Counting,
    Quadrature { zeta: f64 },
}

/// Every scalar a scenario exposes to the optimizer or a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamId {
    Theta,
    Phi,
    Alpha1,
    Varphi1,
    Alpha2,
    Varphi2,
    Zeta1,
    Zeta2,
    EtaT,
    EtaD,
}

impl ParamId {
    pub const ALL: [ParamId; 10] = [
        ParamId::Theta,
        ParamId::Phi,
        ParamId::Alpha1,
        ParamId::Varphi1,
        ParamId::Alpha2,
        ParamId::Varphi2,
        ParamId::Zeta1,
        ParamId::Zeta2,
        ParamId::EtaT,
        ParamId::EtaD,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Theta => "theta_rad",
            Self::Phi => "phi_rad",
            Self::Alpha1 => "alpha1_rad",
            Self::Varphi1 => "varphi1_rad",
            Self::Alpha2 => "alpha2_rad",
            Self::Varphi2 => "varphi2_rad",
            Self::Zeta1 => "zeta1_rad",
            Self::Zeta2 => "zeta2_rad",
            Self::EtaT => "eta_t",
            Self::EtaD => "eta_d",
        }
    }

    /// Angles whose physics repeats every 2π.
    pub fn is_periodic(self) -> bool {
        !matches!(self, Self::Theta | Self::EtaT | Self::EtaD)
    }

    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            Self::Theta => (0.0, FRAC_PI_2),
            Self::EtaT | Self::EtaD => (0.0, 1.0),
            _ => (-PI, PI),
        }
    }
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParam {
    pub id: ParamId,
    pub lower: f64,
    pub upper: f64,
}

impl FreeParam {
    pub fn new(id: ParamId, lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidScenario(format!(
                "bounds [{lower}, {upper}] for {id} are not a finite non-empty interval"
            )));
        }
        let (lo, hi) = id.default_bounds();
        if !id.is_periodic() && (lower < lo || upper > hi) {
            return Err(Error::InvalidScenario(format!(
                "bounds [{lower}, {upper}] for {id} leave its domain [{lo}, {hi}]"
            )));
        }
        Ok(Self { id, lower, upper })
    }

    pub fn with_default_bounds(id: ParamId) -> Self {
        let (lower, upper) = id.default_bounds();
        Self { id, lower, upper }
    }

    /// Periodic parameters spanning a full period are wrapped rather than bounded.
    pub fn wraps(&self) -> bool {
        self.id.is_periodic() && self.upper - self.lower >= TAU - 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub state: StateParams,
    pub imperfections: Imperfections,
    pub alice: [AtomSetting; 2],
    pub bob: [BobSetting; 2],
    pub free: Vec<FreeParam>,
}

/// `2 arctan((√π + √(2+π))/√2)`, Alice's optimal polar angle against
/// counting + homodyne on the maximally entangled state.
pub fn optimal_counting_alpha() -> f64 {
    2.0 * ((PI.sqrt() + (2.0 + PI).sqrt()) / 2f64.sqrt()).atan()
}

impl Scenario {
    /// Photon counting (Y₁) and homodyne (Y₂) at the analytically optimal
    /// ideal settings, with no free parameters.
    pub fn counting_homodyne() -> Self {
        let alpha = optimal_counting_alpha();
        Self {
            state: StateParams::maximally_entangled(),
            imperfections: Imperfections::ideal(),
            alice: [AtomSetting::new(alpha, 0.0), AtomSetting::new(-alpha, 0.0)],
            bob: [BobSetting::Counting, BobSetting::Quadrature { zeta: 0.0 }],
            free: Vec::new(),
        }
    }

    /// Homodyne on X̂ (Y₁) and P̂ (Y₂); Alice measures in the equatorial plane
    /// at azimuths ∓π/4.
    pub fn two_homodyne() -> Self {
        Self {
            state: StateParams::maximally_entangled(),
            imperfections: Imperfections::ideal(),
            alice: [
                AtomSetting::new(FRAC_PI_2, -PI / 4.0),
                AtomSetting::new(FRAC_PI_2, PI / 4.0),
            ],
            bob: [
                BobSetting::Quadrature { zeta: 0.0 },
                BobSetting::Quadrature { zeta: FRAC_PI_2 },
            ],
            free: Vec::new(),
        }
    }

    /// Every state and setting parameter applicable to this scenario's
    /// measurement menu, with default bounds.
    pub fn with_all_settings_free(mut self) -> Self {
        self.free = ParamId::ALL[..8]
            .iter()
            .copied()
            .filter(|&id| self.applies(id))
            .map(FreeParam::with_default_bounds)
            .collect();
        self
    }

    pub fn with_imperfections(mut self, imperfections: Imperfections) -> Self {
        self.imperfections = imperfections;
        self
    }

    pub fn with_free(mut self, free: Vec<FreeParam>) -> Self {
        self.free = free;
        self
    }

    /// Whether `id` means anything for this menu (ζ needs a homodyne arm).
    pub fn applies(&self, id: ParamId) -> bool {
        match id {
            ParamId::Zeta1 => matches!(self.bob[0], BobSetting::Quadrature { .. }),
            ParamId::Zeta2 => matches!(self.bob[1], BobSetting::Quadrature { .. }),
            ParamId::EtaD => self.bob.contains(&BobSetting::Counting),
            _ => true,
        }
    }

    pub fn get(&self, id: ParamId) -> Result<f64> {
        let zeta = |b: &BobSetting| match *b {
            BobSetting::Quadrature { zeta } => Ok(zeta),
            BobSetting::Counting => Err(Error::InvalidScenario(format!("{id} needs a quadrature measurement"))),
        };
        Ok(match id {
            ParamId::Theta => self.state.theta(),
            ParamId::Phi => self.state.phi(),
            ParamId::Alpha1 => self.alice[0].alpha,
            ParamId::Varphi1 => self.alice[0].varphi,
            ParamId::Alpha2 => self.alice[1].alpha,
            ParamId::Varphi2 => self.alice[1].varphi,
            ParamId::Zeta1 => zeta(&self.bob[0])?,
            ParamId::Zeta2 => zeta(&self.bob[1])?,
            ParamId::EtaT => self.imperfections.eta_t,
            ParamId::EtaD => self.imperfections.eta_d,
        })
    }

    pub fn set(&mut self, id: ParamId, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::OutOfDomain {
                name: id.name(),
                value,
                domain: "finite",
            });
        }
        let set_zeta = |b: &mut BobSetting| match b {
            BobSetting::Quadrature { zeta } => {
                *zeta = value;
                Ok(())
            }
            BobSetting::Counting => Err(Error::InvalidScenario(format!("{id} needs a quadrature measurement"))),
        };
        match id {
            ParamId::Theta => self.state = StateParams::new(value, self.state.phi())?,
            ParamId::Phi => self.state = StateParams::new(self.state.theta(), value)?,
            ParamId::Alpha1 => self.alice[0].alpha = value,
            ParamId::Varphi1 => self.alice[0].varphi = value,
            ParamId::Alpha2 => self.alice[1].alpha = value,
            ParamId::Varphi2 => self.alice[1].varphi = value,
            ParamId::Zeta1 => set_zeta(&mut self.bob[0])?,
            ParamId::Zeta2 => set_zeta(&mut self.bob[1])?,
            ParamId::EtaT | ParamId::EtaD => {
                let mut imp = self.imperfections;
                if id == ParamId::EtaT {
                    imp.eta_t = value;
                } else {
                    imp.eta_d = value;
                }
                imp.validate()?;
                self.imperfections = imp;
            }
        }
        Ok(())
    }

    pub fn set_branching(&mut self, branching: Branching) {
        self.imperfections.branching = branching;
    }

    /// `(id, value)` for every applicable parameter, in [`ParamId::ALL`] order.
    pub fn param_vector(&self) -> Vec<(ParamId, f64)> {
        ParamId::ALL
            .iter()
            .filter(|&&id| self.applies(id))
            .map(|&id| (id, self.get(id).expect("applicable parameter")))
            .collect()
    }

    pub fn optical_measurement(&self, j: usize) -> Result<OpticalMeasurement> {
        match self.bob[j] {
            BobSetting::Counting => OpticalMeasurement::counting(self.imperfections.eta_d),
            BobSetting::Quadrature { zeta } => OpticalMeasurement::quadrature(zeta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.imperfections.validate()?;
        for a in &self.alice {
            if !(a.alpha.is_finite() && a.varphi.is_finite()) {
                return Err(Error::InvalidScenario("non-finite atom setting".into()));
            }
        }
        for j in 0..2 {
            self.optical_measurement(j)?;
        }
        let mut seen = Vec::new();
        for f in &self.free {
            if !self.applies(f.id) {
                return Err(Error::InvalidScenario(format!("{} is not part of this scenario", f.id)));
            }
            if seen.contains(&f.id) {
                return Err(Error::InvalidScenario(format!("{} listed twice", f.id)));
            }
            seen.push(f.id);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChshResult {
    pub s_value: f64,
    /// `[E₁₁, E₁₂, E₂₁, E₂₂]`
    pub correlators: [f64; 4],
    /// The scenario as evaluated; its parameters are the full parameter vector.
    pub scenario: Scenario,
    pub trace: Option<OptimizerTrace>,
}

impl ChshResult {
    pub fn params(&self) -> Vec<(ParamId, f64)> {
        self.scenario.param_vector()
    }

    pub fn violates(&self) -> bool {
        self.s_value > CLASSICAL_BOUND
    }
}

/// `E₁₁ + E₁₂ + E₂₁ − E₂₂`
pub fn chsh_combination(e: &[f64; 4]) -> f64 {
    e[0] + e[1] + e[2] - e[3]
}

/// S for the scenario's current parameter values. The free list is ignored.
pub fn evaluate(sc: &Scenario) -> Result<ChshResult> {
    sc.validate()?;
    let correlators = correlators(sc)?;
    Ok(ChshResult {
        s_value: chsh_combination(&correlators),
        correlators,
        scenario: sc.clone(),
        trace: None,
    })
}

pub(crate) fn correlators(sc: &Scenario) -> Result<[f64; 4]> {
    let state = prepare(sc.state, &sc.imperfections)?;
    let alice = [atom_effects(&sc.alice[0], state.levels()), atom_effects(&sc.alice[1], state.levels())];
    let bob = [
        optical_effects(&sc.optical_measurement(0)?)?,
        optical_effects(&sc.optical_measurement(1)?)?,
    ];
    let mut e = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            e[2 * i + j] = correlator(&probs_from_effects(&state, &alice[i], &bob[j])?);
        }
    }
    Ok(e)
}

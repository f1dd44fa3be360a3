use std::f64::consts::PI;

use super::{evaluate, BobSetting, Scenario};
use crate::error::{Error, Result};
use crate::measure::{AtomSetting, Outcome};
use crate::model::{Branching, Imperfections, StateParams};

pub const BRANCHING_EPSILONS: [f64; 3] = [0.02, 0.04, 0.08];

/// Alice measures close to σ_z, at `α = ±(π − ε)`, reporting −1 for `aux`;
/// Bob counts photons or measures X̂ on the maximally entangled state.
pub fn branching_strategy(branching: Branching, epsilon: f64) -> Scenario {
    let aux = Outcome::Minus;
    Scenario {
        state: StateParams::maximally_entangled(),
        imperfections: Imperfections {
            branching,
            ..Imperfections::ideal()
        },
        alice: [
            AtomSetting::new(PI - epsilon, 0.0).with_aux_outcome(aux),
            AtomSetting::new(-PI + epsilon, 0.0).with_aux_outcome(aux),
        ],
        bob: [BobSetting::Counting, BobSetting::Quadrature { zeta: 0.0 }],
        free: Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchingSlope {
    pub branching: Branching,
    pub epsilons: [f64; 3],
    pub s_values: [f64; 3],
    /// Constant term of the quadratic through the three samples.
    pub intercept: f64,
    /// dS/dε at ε = 0.
    pub slope: f64,
    /// `4 √(f_s / 2π)`
    pub predicted: f64,
}

/// Quadratic `c₀ + c₁ε + c₂ε²` through three points; returns `(c₀, c₁)`.
fn quadratic_fit(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    // Newton divided differences.
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let c2 = (d12 - d01) / (x[2] - x[0]);
    let c1 = d01 - c2 * (x[0] + x[1]);
    let c0 = y[0] - c1 * x[0] - c2 * x[0] * x[0];
    (c0, c1)
}

pub fn branching_slope_with(branching: Branching) -> Result<BranchingSlope> {
    if branching.f_s() <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "f_s",
            value: branching.f_s(),
            domain: "(0, 1]",
        });
    }
    let mut s_values = [0.0; 3];
    for (s, &eps) in s_values.iter_mut().zip(&BRANCHING_EPSILONS) {
        *s = evaluate(&branching_strategy(branching, eps))?.s_value;
    }
    let (intercept, slope) = quadratic_fit(BRANCHING_EPSILONS, s_values);
    Ok(BranchingSlope {
        branching,
        epsilons: BRANCHING_EPSILONS,
        s_values,
        intercept,
        slope,
        predicted: 4.0 * (branching.f_s() / (2.0 * PI)).sqrt(),
    })
}

/// Slope with every non-s decay sent to the auxiliary level.
pub fn branching_slope(f_s: f64) -> Result<BranchingSlope> {
    if !(f_s > 0.0 && f_s <= 1.0) {
        return Err(Error::OutOfDomain {
            name: "f_s",
            value: f_s,
            domain: "(0, 1]",
        });
    }
    branching_slope_with(Branching::new(f_s, 0.0, 1.0 - f_s)?)
}

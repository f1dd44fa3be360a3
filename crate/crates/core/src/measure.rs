//! Binary measurements for both parties and the joint probability engine.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{quadrature_povm, QuadratureAngle};
use crate::hilbert::{expectation_product, AtomLevels, ComplexMatrix, HybridState, MODE_DIM};
use crate::model::StateParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }

    fn index(self) -> usize {
        match self {
            Self::Plus => 0,
            Self::Minus => 1,
        }
    }
}

impl TryFrom<i64> for Outcome {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Self::Plus),
            -1 => Ok(Self::Minus),
            _ => Err(Error::OutOfDomain {
                name: "outcome",
                value: v as f64,
                domain: "{-1, +1}",
            }),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "+1",
            Self::Minus => "-1",
        })
    }
}

/// Projection onto `cos(α/2)|g⟩ + e^{iφ_a} sin(α/2)|s⟩` (outcome +1) or its
/// orthogonal complement (−1). A three-level atom found in `aux` reports
/// `aux_outcome`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSetting {
    pub alpha: f64,
    pub varphi: f64,
    pub aux_outcome: Outcome,
}

impl AtomSetting {
    pub fn new(alpha: f64, varphi: f64) -> Self {
        Self {
            alpha,
            varphi,
            aux_outcome: Outcome::Minus,
        }
    }

    pub fn with_aux_outcome(self, aux_outcome: Outcome) -> Self {
        Self { aux_outcome, ..self }
    }

    pub fn bloch_vector(&self) -> [Complex64; 2] {
        [
            Complex64::new((0.5 * self.alpha).cos(), 0.0),
            Complex64::from_polar((0.5 * self.alpha).sin(), self.varphi),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalMeasurement {
    /// Click (+1) or no click (−1) on a detector of efficiency `eta_d`.
    Counting { eta_d: f64 },
    /// Sign of the homodyne outcome: x ≤ 0 → −1, x > 0 → +1.
    Quadrature { zeta: QuadratureAngle },
}

impl OpticalMeasurement {
    pub fn counting(eta_d: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta_d) {
            return Err(Error::OutOfDomain {
                name: "eta_d",
                value: eta_d,
                domain: "[0, 1]",
            });
        }
        Ok(Self::Counting { eta_d })
    }

    pub fn quadrature(zeta: f64) -> Result<Self> {
        Ok(Self::Quadrature {
            zeta: QuadratureAngle::new(zeta)?,
        })
    }
}

/// Two-outcome POVM.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryEffects {
    pub plus: ComplexMatrix,
    pub minus: ComplexMatrix,
}

impl BinaryEffects {
    pub fn effect(&self, outcome: Outcome) -> &ComplexMatrix {
        match outcome {
            Outcome::Plus => &self.plus,
            Outcome::Minus => &self.minus,
        }
    }

    /// `E₊ - E₋`
    pub fn observable(&self) -> ComplexMatrix {
        &self.plus - &self.minus
    }
}

pub fn atom_effects(setting: &AtomSetting, levels: AtomLevels) -> BinaryEffects {
    let d = levels.dim();
    let v = setting.bloch_vector();
    let mut plus = ComplexMatrix::zeros(d, d);
    let mut minus = ComplexMatrix::zeros(d, d);
    for i in 0..2 {
        for j in 0..2 {
            let p = v[i] * v[j].conj();
            plus[(i, j)] = p;
            minus[(i, j)] = if i == j { Complex64::new(1.0, 0.0) - p } else { -p };
        }
    }
    if levels == AtomLevels::Three {
        let aux = AtomLevels::AUX;
        match setting.aux_outcome {
            Outcome::Plus => plus[(aux, aux)] = Complex64::new(1.0, 0.0),
            Outcome::Minus => minus[(aux, aux)] = Complex64::new(1.0, 0.0),
        }
    }
    BinaryEffects { plus, minus }
}

pub fn optical_effects(m: &OpticalMeasurement) -> Result<BinaryEffects> {
    match *m {
        OpticalMeasurement::Counting { eta_d } => {
            OpticalMeasurement::counting(eta_d)?;
            Ok(BinaryEffects {
                plus: ComplexMatrix::from_diagonal(&[0.0, eta_d]),
                minus: ComplexMatrix::from_diagonal(&[1.0, 1.0 - eta_d]),
            })
        }
        OpticalMeasurement::Quadrature { zeta } => {
            let povm = quadrature_povm(zeta);
            debug_assert_eq!(povm.e_minus.rows(), MODE_DIM);
            Ok(BinaryEffects {
                plus: povm.e_plus,
                minus: povm.e_minus,
            })
        }
    }
}

/// Joint outcome distribution `p(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbTable {
    p: [[f64; 2]; 2],
}

impl ProbTable {
    pub const NEGATIVITY_TOL: f64 = 1e-12;
    pub const SUM_TOL: f64 = 1e-10;

    pub fn new(pp: f64, pm: f64, mp: f64, mm: f64) -> Result<Self> {
        let t = Self { p: [[pp, pm], [mp, mm]] };
        let min = t.p.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        if min < -Self::NEGATIVITY_TOL || !min.is_finite() {
            return Err(Error::OutOfDomain {
                name: "probability",
                value: min,
                domain: "[0, 1]",
            });
        }
        if (t.total() - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::OutOfDomain {
                name: "probability sum",
                value: t.total(),
                domain: "{1}",
            });
        }
        Ok(t)
    }

    pub fn uniform() -> Self {
        Self { p: [[0.25; 2]; 2] }
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.p[a.index()][b.index()]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    pub fn alice_marginal(&self, a: Outcome) -> f64 {
        self.get(a, Outcome::Plus) + self.get(a, Outcome::Minus)
    }

    pub fn bob_marginal(&self, b: Outcome) -> f64 {
        self.get(Outcome::Plus, b) + self.get(Outcome::Minus, b)
    }

    pub fn correlator(&self) -> f64 {
        correlator(self)
    }
}

/// `E = p(a = b) - p(a ≠ b)`
pub fn correlator(t: &ProbTable) -> f64 {
    t.get(Outcome::Plus, Outcome::Plus) + t.get(Outcome::Minus, Outcome::Minus)
        - t.get(Outcome::Plus, Outcome::Minus)
        - t.get(Outcome::Minus, Outcome::Plus)
}

/// `p(a, b) = Tr[ρ (A_a ⊗ B_b)]` from precomputed effects.
pub fn probs_from_effects(s: &HybridState, alice: &BinaryEffects, bob: &BinaryEffects) -> Result<ProbTable> {
    let mut p = [[0.0; 2]; 2];
    for a in Outcome::BOTH {
        for b in Outcome::BOTH {
            p[a.index()][b.index()] = expectation_product(s.rho(), alice.effect(a), bob.effect(b))?.re;
        }
    }
    ProbTable::new(p[0][0], p[0][1], p[1][0], p[1][1])
}

pub fn joint_probs(s: &HybridState, a: &AtomSetting, b: &OpticalMeasurement) -> Result<ProbTable> {
    probs_from_effects(s, &atom_effects(a, s.levels()), &optical_effects(b)?)
}

/// Analytic correlators for the ideal lossless state:
/// counting gives `-cos α` for every θ, and sign-binned homodyne gives
/// `√(2/π) sin α sin 2θ cos(φ_a - φ + ζ)`.
pub fn correlator_closed_form(p: StateParams, a: &AtomSetting, b: &OpticalMeasurement) -> Result<f64> {
    match *b {
        OpticalMeasurement::Counting { eta_d } => {
            if eta_d != 1.0 {
                return Err(Error::NotIdeal("detector efficiency below one"));
            }
            Ok(-a.alpha.cos())
        }
        OpticalMeasurement::Quadrature { zeta } => Ok((2.0 / PI).sqrt()
            * a.alpha.sin()
            * (2.0 * p.theta()).sin()
            * (a.varphi - p.phi() + zeta.radians()).cos()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ideal_state;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, TAU};

    fn bell() -> StateParams {
        StateParams::maximally_entangled()
    }

    fn effects_sum_to_identity(e: &BinaryEffects) -> f64 {
        let n = e.plus.rows();
        (&e.plus + &e.minus).max_abs_diff(&ComplexMatrix::identity(n))
    }

    #[test]
    fn atom_effects_at_poles() {
        let north = atom_effects(&AtomSetting::new(0.0, 0.0), AtomLevels::Two);
        assert!(north.plus.max_abs_diff(&ComplexMatrix::basis_projector(2, 0)) < 1e-15);
        let south = atom_effects(&AtomSetting::new(PI, 0.0), AtomLevels::Two);
        assert!(south.plus.max_abs_diff(&ComplexMatrix::basis_projector(2, 1)) < 1e-15);
    }

    #[test]
    fn aux_level_follows_setting() {
        let e = atom_effects(&AtomSetting::new(0.7, 0.2), AtomLevels::Three);
        assert_eq!(e.minus[(2, 2)].re, 1.0);
        assert_eq!(e.plus[(2, 2)].re, 0.0);
        assert!(effects_sum_to_identity(&e) < 1e-15);

        let e = atom_effects(&AtomSetting::new(0.7, 0.2).with_aux_outcome(Outcome::Plus), AtomLevels::Three);
        assert_eq!(e.plus[(2, 2)].re, 1.0);
        assert!(effects_sum_to_identity(&e) < 1e-15);
    }

    #[test]
    fn counting_click_probabilities() {
        let one = HybridState::pure(AtomLevels::Two, &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        let a = AtomSetting::new(0.0, 0.0);
        for eta_d in [1.0, 0.4] {
            let t = joint_probs(&one, &a, &OpticalMeasurement::counting(eta_d).unwrap()).unwrap();
            assert_abs_diff_eq!(t.bob_marginal(Outcome::Plus), eta_d, epsilon = 1e-15);
        }
        assert!(OpticalMeasurement::counting(1.5).is_err());
    }

    #[test]
    fn vacuum_homodyne_is_unbiased() {
        let vac = ideal_state(StateParams::new(0.0, 0.0).unwrap());
        let t = joint_probs(&vac, &AtomSetting::new(0.3, 0.0), &OpticalMeasurement::quadrature(0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(t.bob_marginal(Outcome::Minus), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn joint_probs_examples() {
        let s = ideal_state(bell());
        let t = joint_probs(&s, &AtomSetting::new(0.0, 0.0), &OpticalMeasurement::counting(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(t.get(Outcome::Plus, Outcome::Minus), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(Outcome::Minus, Outcome::Plus), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(Outcome::Plus, Outcome::Plus), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.get(Outcome::Minus, Outcome::Minus), 0.0, epsilon = 1e-15);

        for alpha in [0.3, 1.0, 2.2, -0.8] {
            let t = joint_probs(&s, &AtomSetting::new(alpha, 0.0), &OpticalMeasurement::counting(1.0).unwrap()).unwrap();
            assert_abs_diff_eq!(t.correlator(), -alpha.cos(), epsilon = 1e-14);
        }

        let t = joint_probs(&s, &AtomSetting::new(FRAC_PI_2, 0.0), &OpticalMeasurement::quadrature(0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(t.correlator(), (2.0 / PI).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(t.correlator(), 0.7979, epsilon = 1e-4);
    }

    #[test]
    fn correlator_examples() {
        assert_eq!(ProbTable::uniform().correlator(), 0.0);
        assert_eq!(ProbTable::new(0.5, 0.0, 0.0, 0.5).unwrap().correlator(), 1.0);
        let s = ideal_state(bell());
        let t = joint_probs(&s, &AtomSetting::new(FRAC_PI_3, 0.0), &OpticalMeasurement::counting(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(t.correlator(), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn prob_table_rejects_invalid_entries() {
        assert!(ProbTable::new(0.5, 0.5, 0.5, -0.5).is_err());
        assert!(ProbTable::new(0.5, 0.5, 0.5, 0.5).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let counting = OpticalMeasurement::counting(1.0).unwrap();
        assert_abs_diff_eq!(
            correlator_closed_form(bell(), &AtomSetting::new(FRAC_PI_2, 0.0), &counting).unwrap(),
            0.0,
            epsilon = 1e-16
        );
        let x = OpticalMeasurement::quadrature(0.0).unwrap();
        assert_abs_diff_eq!(
            correlator_closed_form(bell(), &AtomSetting::new(FRAC_PI_2, 0.0), &x).unwrap(),
            (2.0 / PI).sqrt(),
            epsilon = 1e-15
        );
        // φ_a - φ + ζ = π/2
        let p = StateParams::new(0.5, 0.4).unwrap();
        let z = OpticalMeasurement::quadrature(0.3).unwrap();
        assert_abs_diff_eq!(
            correlator_closed_form(p, &AtomSetting::new(1.0, FRAC_PI_2 + 0.1), &z).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let lossy = OpticalMeasurement::counting(0.9).unwrap();
        assert!(matches!(
            correlator_closed_form(bell(), &AtomSetting::new(1.0, 0.0), &lossy),
            Err(Error::NotIdeal(_))
        ));
    }

    #[test]
    fn counting_correlator_does_not_depend_on_theta() {
        let counting = OpticalMeasurement::counting(1.0).unwrap();
        for theta in [0.0, 0.2, 0.9, FRAC_PI_2] {
            let s = ideal_state(StateParams::new(theta, 1.3).unwrap());
            let t = joint_probs(&s, &AtomSetting::new(0.77, 2.0), &counting).unwrap();
            assert_abs_diff_eq!(t.correlator(), -(0.77f64).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn blind_detector_never_clicks() {
        let s = ideal_state(StateParams::new(1.1, 0.2).unwrap());
        let t = joint_probs(&s, &AtomSetting::new(0.4, 0.0), &OpticalMeasurement::counting(0.0).unwrap()).unwrap();
        assert_eq!(t.bob_marginal(Outcome::Plus), 0.0);
        assert_eq!(t.get(Outcome::Plus, Outcome::Plus), 0.0);
    }

    #[test]
    fn quadrature_effects_are_psd_and_complete() {
        for k in 0..32 {
            let m = OpticalMeasurement::quadrature(k as f64 * TAU / 32.0).unwrap();
            let e = optical_effects(&m).unwrap();
            assert!(effects_sum_to_identity(&e) < 1e-15);
            assert!(e.plus.hermitian_eigenvalues()[0] > 0.0);
            assert!(e.minus.hermitian_eigenvalues()[0] > 0.0);
        }
    }
}

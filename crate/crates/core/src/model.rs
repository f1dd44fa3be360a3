//! State builders and imperfection channels.
//!
//! Every builder here produces a valid [`HybridState`]; the channels are
//! completely positive and trace preserving, so they can be stacked in any
//! order. Loss acts on the optical mode and dephasing on the atom, so the two
//! commute.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{joint_index, kron, AtomLevels, ComplexMatrix, HybridState, MODE_DIM, ZERO};

const PROB_TOL: f64 = 1e-12;

fn check_unit_interval(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfDomain {
            name,
            value,
            domain: "[0, 1]",
        })
    }
}

/// Pulse-area angle θ and emission phase φ of `cos θ|g,0⟩ + e^{iφ} sin θ|s,1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateParams {
    theta: f64,
    phi: f64,
}

impl StateParams {
    /// θ must lie in `[0, π/2]`; φ is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::OutOfDomain {
                name: "theta",
                value: theta,
                domain: "[0, π/2]",
            });
        }
        if !phi.is_finite() {
            return Err(Error::OutOfDomain {
                name: "phi",
                value: phi,
                domain: "finite",
            });
        }
        Ok(Self {
            theta,
            phi: phi.rem_euclid(TAU),
        })
    }

    /// θ = π/4, φ = 0.
    pub fn maximally_entangled() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_4,
            phi: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Decay probabilities of the excited level into s, g and auxiliary levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branching {
    f_s: f64,
    f_g: f64,
    f_aux: f64,
}

impl Branching {
    pub fn new(f_s: f64, f_g: f64, f_aux: f64) -> Result<Self> {
        check_unit_interval("f_s", f_s)?;
        check_unit_interval("f_g", f_g)?;
        check_unit_interval("f_aux", f_aux)?;
        let total = f_s + f_g + f_aux;
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::OutOfDomain {
                name: "f_s + f_g + f_aux",
                value: total,
                domain: "{1}",
            });
        }
        Ok(Self { f_s, f_g, f_aux })
    }

    pub fn ideal() -> Self {
        Self {
            f_s: 1.0,
            f_g: 0.0,
            f_aux: 0.0,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.f_s == 1.0
    }

    pub fn f_s(&self) -> f64 {
        self.f_s
    }

    pub fn f_g(&self) -> f64 {
        self.f_g
    }

    pub fn f_aux(&self) -> f64 {
        self.f_aux
    }
}

impl Default for Branching {
    fn default() -> Self {
        Self::ideal()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Imperfections {
    /// Transmission efficiency from the atom to the optical measurement.
    pub eta_t: f64,
    /// Photon-counting detector efficiency.
    pub eta_d: f64,
    pub branching: Branching,
    /// Motional fidelity F in `[1/2, 1]`.
    pub fidelity: f64,
}

impl Imperfections {
    pub fn ideal() -> Self {
        Self {
            eta_t: 1.0,
            eta_d: 1.0,
            branching: Branching::ideal(),
            fidelity: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("eta_t", self.eta_t)?;
        check_unit_interval("eta_d", self.eta_d)?;
        check_fidelity(self.fidelity)?;
        Ok(())
    }
}

impl Default for Imperfections {
    fn default() -> Self {
        Self::ideal()
    }
}

fn check_fidelity(f: f64) -> Result<f64> {
    if (0.5..=1.0).contains(&f) {
        Ok(f)
    } else {
        Err(Error::OutOfDomain {
            name: "fidelity",
            value: f,
            domain: "[1/2, 1]",
        })
    }
}

fn hybrid_ket(levels: AtomLevels, amplitudes: &[((usize, usize), Complex64)]) -> Vec<Complex64> {
    let mut ket = vec![ZERO; levels.joint_dim()];
    for &((atom, n), amp) in amplitudes {
        ket[joint_index(atom, n)] = amp;
    }
    ket
}

/// `|ψ^φ⟩⟨ψ^φ|` with `ψ^φ = cos θ|g,0⟩ + e^{iφ} sin θ|s,1⟩`.
pub fn ideal_state(p: StateParams) -> HybridState {
    let ket = hybrid_ket(
        AtomLevels::Two,
        &[
            ((AtomLevels::G, 0), Complex64::new(p.theta.cos(), 0.0)),
            ((AtomLevels::S, 1), Complex64::from_polar(p.theta.sin(), p.phi)),
        ],
    );
    HybridState::new_unchecked(AtomLevels::Two, ComplexMatrix::projector(&ket)).expect("dimension 4")
}

/// ρ_f for imperfect branching, on the (g, s, aux) ⊗ mode space.
///
/// The unnormalized `cos θ|g,0⟩ + e^{iφ} √f_s sin θ|s,1⟩` keeps weight
/// `cos²θ + f_s sin²θ`; the remaining `sin²θ` is split incoherently between
/// `|g,0⟩` (f_g) and `|aux,0⟩` (f_aux).
pub fn branching_state(p: StateParams, branching: Branching) -> HybridState {
    let levels = AtomLevels::Three;
    let sin2 = p.theta.sin().powi(2);
    let ket = hybrid_ket(
        levels,
        &[
            ((AtomLevels::G, 0), Complex64::new(p.theta.cos(), 0.0)),
            (
                (AtomLevels::S, 1),
                Complex64::from_polar(p.theta.sin() * branching.f_s.sqrt(), p.phi),
            ),
        ],
    );
    let mut rho = ComplexMatrix::projector(&ket);
    let g0 = joint_index(AtomLevels::G, 0);
    let aux0 = joint_index(AtomLevels::AUX, 0);
    rho[(g0, g0)] += sin2 * branching.f_g;
    rho[(aux0, aux0)] += sin2 * branching.f_aux;
    HybridState::new_unchecked(levels, rho).expect("dimension 6")
}

/// Kraus operators of photon loss with transmission `eta_t`, acting on the mode:
/// `K₀ = I ⊗ (|0⟩⟨0| + √η|1⟩⟨1|)`, `K₁ = I ⊗ √(1-η)|0⟩⟨1|`.
pub fn loss_kraus(levels: AtomLevels, eta_t: f64) -> Result<[ComplexMatrix; 2]> {
    check_unit_interval("eta_t", eta_t)?;
    let atom = ComplexMatrix::identity(levels.dim());
    let keep = ComplexMatrix::from_diagonal(&[1.0, eta_t.sqrt()]);
    let mut drop = ComplexMatrix::zeros(MODE_DIM, MODE_DIM);
    drop[(0, 1)] = Complex64::new((1.0 - eta_t).sqrt(), 0.0);
    Ok([kron(&atom, &keep), kron(&atom, &drop)])
}

pub fn apply_loss(s: &HybridState, eta_t: f64) -> Result<HybridState> {
    if eta_t == 1.0 {
        return Ok(s.clone());
    }
    let [k0, k1] = loss_kraus(s.levels(), eta_t)?;
    let rho = k0.sandwich(s.rho())?.try_add(&k1.sandwich(s.rho())?)?;
    HybridState::new_unchecked(s.levels(), rho)
}

/// Random-phase dephasing: with probability `1 - F` the s level picks up a
/// π phase, so `ρ → Fρ + (1-F) Z_s ρ Z_s`. Every coherence between s and
/// another atomic level is scaled by `2F - 1`; diagonals are untouched.
pub fn apply_dephasing(s: &HybridState, fidelity: f64) -> Result<HybridState> {
    check_fidelity(fidelity)?;
    if fidelity == 1.0 {
        return Ok(s.clone());
    }
    let factor = 2.0 * fidelity - 1.0;
    let mut rho = s.rho().clone();
    let d = rho.rows();
    for i in 0..d {
        for j in 0..d {
            let row_s = i / MODE_DIM == AtomLevels::S;
            let col_s = j / MODE_DIM == AtomLevels::S;
            if row_s != col_s {
                rho[(i, j)] *= factor;
            }
        }
    }
    HybridState::new_unchecked(s.levels(), rho)
}

/// Prepared state followed by every channel in `imp`: branching (if
/// non-ideal), loss, then dephasing.
pub fn prepare(p: StateParams, imp: &Imperfections) -> Result<HybridState> {
    imp.validate()?;
    let source = if imp.branching.is_ideal() {
        ideal_state(p)
    } else {
        branching_state(p, imp.branching)
    };
    let lossy = apply_loss(&source, imp.eta_t)?;
    apply_dephasing(&lossy, imp.fidelity)
}

/// Trap and collection geometry for the motional-dephasing estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapParams {
    /// Ground-state extent √(ħ/2mω), metres.
    pub a: f64,
    pub n_bar: f64,
    /// |k|, 1/metres.
    pub k_norm: f64,
    /// Angle between pump beam and collected emission, radians.
    pub emission_angle: f64,
}

impl TrapParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("n_bar", self.n_bar),
            ("k_norm", self.k_norm),
            ("emission_angle", self.emission_angle),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::OutOfDomain {
                    name,
                    value: v,
                    domain: "[0, ∞)",
                });
            }
        }
        Ok(())
    }

    /// `Δk = |k| (1 - cos angle)`
    pub fn delta_k(&self) -> f64 {
        self.k_norm * (1.0 - self.emission_angle.cos())
    }
}

/// How Δk enters the motional-fidelity exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityExponent {
    /// `-2a²(n̄+½)Δk`, as commonly printed. Not dimensionless.
    #[default]
    Linear,
    /// `-2a²(n̄+½)Δk²`, the dimensionally consistent Lamb–Dicke form.
    Squared,
}

/// `F = ½(1 + exp(-2a²(n̄+½)·Δkᵖ))` with p = 1 or 2.
pub fn motional_fidelity(t: &TrapParams, exponent: FidelityExponent) -> Result<f64> {
    t.validate()?;
    let dk = t.delta_k();
    let dk_term = match exponent {
        FidelityExponent::Linear => dk,
        FidelityExponent::Squared => dk * dk,
    };
    Ok(0.5 * (1.0 + (-2.0 * t.a * t.a * (t.n_bar + 0.5) * dk_term).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    const G: usize = AtomLevels::G;
    const S: usize = AtomLevels::S;
    const AUX: usize = AtomLevels::AUX;

    fn bell() -> StateParams {
        StateParams::maximally_entangled()
    }

    #[test]
    fn ideal_state_examples() {
        let s = ideal_state(StateParams::new(0.0, 0.0).unwrap());
        assert!(s.rho().max_abs_diff(&ComplexMatrix::basis_projector(4, 0)) < 1e-15);

        let s = ideal_state(bell());
        let pops: Vec<f64> = s.rho().diagonal().iter().map(|z| z.re).collect();
        for (p, want) in pops.iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert_abs_diff_eq!(*p, want, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s.element((G, 0), (S, 1)).re, 0.5, epsilon = 1e-15);
        let ev = s.rho().hermitian_eigenvalues();
        assert_abs_diff_eq!(ev[3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[2], 0.0, epsilon = 1e-12);

        let flipped = ideal_state(StateParams::new(FRAC_PI_4, PI).unwrap());
        assert_abs_diff_eq!(flipped.element((G, 0), (S, 1)).re, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn state_params_domain() {
        assert!(StateParams::new(-0.1, 0.0).is_err());
        assert!(StateParams::new(2.0, 0.0).is_err());
        assert!(StateParams::new(0.2, f64::NAN).is_err());
        assert_abs_diff_eq!(StateParams::new(0.2, -PI).unwrap().phi(), PI);
    }

    #[test]
    fn loss_examples() {
        let s = ideal_state(bell());
        assert_eq!(apply_loss(&s, 1.0).unwrap(), s);

        let gone = apply_loss(&s, 0.0).unwrap();
        assert_abs_diff_eq!(gone.population(G, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(gone.population(S, 0), 0.5, epsilon = 1e-15);
        assert!(gone.rho().hermitian_eigenvalues()[0] > -1e-15);
        assert_abs_diff_eq!(gone.element((G, 0), (S, 1)).norm(), 0.0);
        assert_abs_diff_eq!(gone.element((G, 0), (S, 0)).norm(), 0.0);

        // Hand expansion of N|ψ_η⟩⟨ψ_η| + sin²θ(1-η)|s,0⟩⟨s,0| at η = 0.5.
        let half = apply_loss(&s, 0.5).unwrap();
        assert_abs_diff_eq!(half.population(S, 1), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(half.population(S, 0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(half.element((G, 0), (S, 1)).re, 0.5 * 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn loss_rejects_bad_efficiency() {
        let s = ideal_state(bell());
        assert!(apply_loss(&s, 1.2).is_err());
        assert!(apply_loss(&s, -0.01).is_err());
    }

    #[test]
    fn kraus_operators_are_complete() {
        for levels in [AtomLevels::Two, AtomLevels::Three] {
            let [k0, k1] = loss_kraus(levels, 0.37).unwrap();
            let sum = &(&k0.adjoint() * &k0) + &(&k1.adjoint() * &k1);
            assert!(sum.max_abs_diff(&ComplexMatrix::identity(levels.joint_dim())) < 1e-15);
        }
    }

    #[test]
    fn branching_examples() {
        let perfect = branching_state(bell(), Branching::ideal());
        let ideal = ideal_state(bell());
        for a in [G, S] {
            for b in [G, S] {
                for m in 0..2 {
                    for n in 0..2 {
                        assert_abs_diff_eq!(
                            (perfect.element((a, m), (b, n)) - ideal.element((a, m), (b, n))).norm(),
                            0.0,
                            epsilon = 1e-15
                        );
                    }
                }
            }
        }
        assert_abs_diff_eq!(perfect.population(AUX, 0), 0.0);

        let none = branching_state(bell(), Branching::new(0.0, 0.5, 0.5).unwrap());
        assert_eq!(none.population(S, 1), 0.0);
        assert_abs_diff_eq!(none.rho().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn branching_matches_hand_expansion() {
        // θ = π/4, f = (0.5, 0.3, 0.2): c² = s² = ½.
        let s = branching_state(bell(), Branching::new(0.5, 0.3, 0.2).unwrap());
        assert_abs_diff_eq!(s.population(G, 0), 0.5 + 0.5 * 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.population(S, 1), 0.5 * 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.population(AUX, 0), 0.5 * 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.element((G, 0), (S, 1)).re, 0.5 * 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.population(S, 0), 0.0);
        assert!(s.validate().is_valid());
    }

    #[test]
    fn branching_rejects_bad_triples() {
        assert!(Branching::new(0.5, 0.5, 0.5).is_err());
        assert!(Branching::new(1.2, -0.2, 0.0).is_err());
    }

    #[test]
    fn dephasing_examples() {
        let s = ideal_state(bell());
        assert_eq!(apply_dephasing(&s, 1.0).unwrap(), s);
        let flat = apply_dephasing(&s, 0.5).unwrap();
        assert_eq!(flat.element((G, 0), (S, 1)).norm(), 0.0);
        let partial = apply_dephasing(&s, 0.9).unwrap();
        assert_abs_diff_eq!(partial.element((G, 0), (S, 1)).re, 0.4, epsilon = 1e-15);
        assert!(apply_dephasing(&s, 0.4).is_err());
    }

    #[test]
    fn dephasing_matches_phase_mixture_on_pure_states() {
        let p = StateParams::new(0.6, 1.1).unwrap();
        let q = StateParams::new(0.6, 1.1 + PI).unwrap();
        let f = 0.83;
        let mixture = ideal_state(p).rho().scale_real(f).try_add(&ideal_state(q).rho().scale_real(1.0 - f)).unwrap();
        let channel = apply_dephasing(&ideal_state(p), f).unwrap();
        assert!(channel.rho().max_abs_diff(&mixture) < 1e-15);
    }

    #[test]
    fn motional_fidelity_examples() {
        let forward = TrapParams {
            a: 1e-8,
            n_bar: 10.0,
            k_norm: TAU / 800e-9,
            emission_angle: 0.0,
        };
        assert_eq!(motional_fidelity(&forward, FidelityExponent::Linear).unwrap(), 1.0);
        assert_eq!(motional_fidelity(&forward, FidelityExponent::Squared).unwrap(), 1.0);

        let hot = TrapParams {
            n_bar: 1e30,
            emission_angle: 0.3,
            ..forward
        };
        assert_abs_diff_eq!(motional_fidelity(&hot, FidelityExponent::Linear).unwrap(), 0.5);

        // a = 10 nm, n̄ = 10, 800 nm light collected at 0.1 rad.
        let t = TrapParams {
            emission_angle: 0.1,
            ..forward
        };
        let dk = t.delta_k();
        assert_abs_diff_eq!(dk, 39_237.194, epsilon = 1e-3);
        let linear = motional_fidelity(&t, FidelityExponent::Linear).unwrap();
        let squared = motional_fidelity(&t, FidelityExponent::Squared).unwrap();
        assert_abs_diff_eq!(1.0 - linear, 4.119_905e-11, epsilon = 1e-16);
        assert_abs_diff_eq!(1.0 - squared, 1.616_533e-6, epsilon = 1e-12);
    }

    #[test]
    fn trap_params_must_be_non_negative() {
        let t = TrapParams {
            a: -1.0,
            n_bar: 0.0,
            k_norm: 1.0,
            emission_angle: 0.0,
        };
        assert!(motional_fidelity(&t, FidelityExponent::Linear).is_err());
    }
}

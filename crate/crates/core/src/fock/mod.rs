//! Optical-mode mathematics on the {|0⟩, |1⟩} Fock truncation.
//!
//! The rotated quadrature `cos ζ X̂ + sin ζ P̂` has eigenstates
//! `|x_ζ⟩ = e^{iζn̂}|x⟩`, so `⟨x_ζ|n⟩ = e^{-iζn} Φ_n(x)`. Sign binning of the
//! outcome gives the two-element POVM
//!
//! ```text
//! E₋(ζ) = ∫_{-∞}^{0} |x_ζ⟩⟨x_ζ| dx,   ⟨m|E₋(ζ)|n⟩ = e^{iζ(m-n)} ∫_{-∞}^{0} Φ_m Φ_n dx
//! ```
//!
//! whose off-diagonal is `-e^{-iζ}/√(2π)`. Restricted to the two-level
//! subspace, `E₊ - E₋ = √(2/π) (cos ζ σ_x + sin ζ σ_y)`: a qubit measurement
//! in the equatorial plane with visibility √(2/π).

pub mod quadrature;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{ComplexMatrix, MODE_DIM};

/// Lower cut of the oracle's integration domain; `e^{-x²}` is ~1e-44 there.
pub const ORACLE_CUTOFF: f64 = 10.0;
pub const ORACLE_TOL: f64 = 1e-13;
const ORACLE_MAX_PANELS: usize = 4096;

/// Homodyne angle ζ, kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureAngle(f64);

impl QuadratureAngle {
    pub fn new(zeta: f64) -> Result<Self> {
        if !zeta.is_finite() {
            return Err(Error::OutOfDomain {
                name: "zeta",
                value: zeta,
                domain: "finite",
            });
        }
        Ok(Self(zeta.rem_euclid(TAU)))
    }

    /// `X̂`
    pub fn position() -> Self {
        Self(0.0)
    }

    /// `P̂`
    pub fn momentum() -> Self {
        Self(0.5 * PI)
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

fn check_photon_number(n: usize) -> Result<()> {
    if n < MODE_DIM {
        Ok(())
    } else {
        Err(Error::UnsupportedPhotonNumber(n))
    }
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Quadrature wavefunction `Φ_n(x) = H_n(x) e^{-x²/2} / (2ⁿ n! √π)^{1/2}`.
pub fn phi(n: usize, x: f64) -> Result<f64> {
    check_photon_number(n)?;
    if !x.is_finite() {
        return Err(Error::OutOfDomain {
            name: "x",
            value: x,
            domain: "finite",
        });
    }
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let norm = (2f64.powi(n as i32) * factorial * PI.sqrt()).sqrt();
    Ok(hermite(n, x) * (-0.5 * x * x).exp() / norm)
}

/// `∫_{-∞}^{0} Φ_m(x) Φ_n(x) dx`, closed form.
pub fn halfline_overlap(m: usize, n: usize) -> Result<f64> {
    check_photon_number(m)?;
    check_photon_number(n)?;
    // Equal indices: even integrand, half the norm. Mixed: √2/√π ∫_{-∞}^0 x e^{-x²} dx.
    Ok(if m == n { 0.5 } else { -1.0 / TAU.sqrt() })
}

/// Sign-binned homodyne POVM: `e_minus` for x ≤ 0 (b = −1), `e_plus` for x > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLinePovm {
    pub zeta: QuadratureAngle,
    pub e_minus: ComplexMatrix,
    pub e_plus: ComplexMatrix,
}

impl HalfLinePovm {
    /// `2 |⟨0|E₋|1⟩|`
    pub fn visibility(&self) -> f64 {
        2.0 * self.e_minus[(0, 1)].norm()
    }
}

pub fn quadrature_povm(zeta: QuadratureAngle) -> HalfLinePovm {
    let mut e_minus = ComplexMatrix::zeros(MODE_DIM, MODE_DIM);
    for m in 0..MODE_DIM {
        for n in 0..MODE_DIM {
            let phase = Complex64::from_polar(1.0, zeta.radians() * (m as f64 - n as f64));
            let overlap = halfline_overlap(m, n).expect("indices within truncation");
            e_minus[(m, n)] = phase * overlap;
        }
    }
    let e_plus = &ComplexMatrix::identity(MODE_DIM) - &e_minus;
    HalfLinePovm {
        zeta,
        e_minus,
        e_plus,
    }
}

/// `⟨m|E₋(ζ)|n⟩` by direct numerical integration of the phase-rotated
/// wavefunctions over `[-10, 0]`.
pub fn oracle_halfline(m: usize, n: usize, zeta: QuadratureAngle) -> Result<Complex64> {
    check_photon_number(m)?;
    check_photon_number(n)?;
    let bra = |x: f64| Complex64::from_polar(1.0, zeta.radians() * m as f64) * phi(m, x).unwrap();
    let ket = |x: f64| Complex64::from_polar(1.0, -zeta.radians() * n as f64) * phi(n, x).unwrap();
    let integrand = |x: f64| bra(x) * ket(x);
    let re = quadrature::integrate(|x| integrand(x).re, -ORACLE_CUTOFF, 0.0, ORACLE_TOL, ORACLE_MAX_PANELS)?;
    let im = quadrature::integrate(|x| integrand(x).im, -ORACLE_CUTOFF, 0.0, ORACLE_TOL, ORACLE_MAX_PANELS)?;
    Ok(Complex64::new(re.value, im.value))
}

//! Dense complex linear algebra for the small Hilbert spaces used here.
//!
//! Nothing in this crate exceeds dimension 6 (a three-level atom times a
//! two-level optical mode), so every operator is a plain row-major `Vec`.
//! Joint indices are atom-major: `atom * MODE_DIM + photon_number`, with the
//! atom basis ordered (g, s) or (g, s, aux).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Truncated optical mode: {|0⟩, |1⟩}.
pub const MODE_DIM: usize = 2;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_FLOOR: f64 = -1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries for {rows}x{cols}", rows * cols),
                found: format!("{} entries", data.len()),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// `|ket⟩⟨ket|`
    pub fn projector(ket: &[Complex64]) -> Self {
        let n = ket.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = ket[i] * ket[j].conj();
            }
        }
        m
    }

    /// Projector onto a single computational basis vector.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m[(index, index)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(Complex64::new(k, 0.0))
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.is_square(), "eigenvalues of a non-square matrix");
        let n = self.rows;
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (self[(i, j)] + self[(j, i)].conj()));
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: format!("{} rows", self.cols),
                found: format!("{} rows", rhs.rows),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// `K ρ K†`
    pub fn sandwich(&self, rho: &Self) -> Result<Self> {
        self.matmul(rho)?.matmul(&self.adjoint())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                found: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

// Operator sugar for the common case of matching shapes; panics otherwise.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix addition shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix subtraction shape mismatch")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Tensor product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `Tr(rho · op)`.
pub fn expectation(rho: &ComplexMatrix, op: &ComplexMatrix) -> Result<Complex64> {
    if !rho.is_square() || !op.is_square() || rho.rows != op.rows {
        return Err(Error::DimensionMismatch {
            expected: format!("square {}x{}", rho.rows, rho.rows),
            found: format!("{}x{}", op.rows, op.cols),
        });
    }
    let n = rho.rows;
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += rho[(i, k)] * op[(k, i)];
        }
    }
    Ok(acc)
}

/// `Tr(rho · (a ⊗ b))` without materializing the tensor product.
pub fn expectation_product(rho: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    let (da, db) = (a.rows, b.rows);
    if !a.is_square() || !b.is_square() || !rho.is_square() || rho.rows != da * db {
        return Err(Error::DimensionMismatch {
            expected: format!("square {}x{}", rho.rows, rho.rows),
            found: format!("{da}x{} ⊗ {db}x{}", a.cols, b.cols),
        });
    }
    let mut acc = ZERO;
    for i in 0..da {
        for j in 0..da {
            let aji = a[(j, i)];
            if aji == ZERO {
                continue;
            }
            for m in 0..db {
                for n in 0..db {
                    acc += rho[(i * db + m, j * db + n)] * aji * b[(n, m)];
                }
            }
        }
    }
    Ok(acc)
}

/// Atomic level structure: (g, s) or (g, s, aux).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomLevels {
    Two,
    Three,
}

impl AtomLevels {
    pub const G: usize = 0;
    pub const S: usize = 1;
    pub const AUX: usize = 2;

    pub fn from_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            d => Err(Error::UnsupportedAtomDim(d)),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Two => 2,
            Self::Three => 3,
        }
    }

    pub fn joint_dim(self) -> usize {
        self.dim() * MODE_DIM
    }
}

/// Joint basis index for atom level `atom` and photon number `n`.
pub fn joint_index(atom: usize, n: usize) -> usize {
    atom * MODE_DIM + n
}

/// Density operator on atom ⊗ optical mode.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    levels: AtomLevels,
    rho: ComplexMatrix,
}

impl HybridState {
    /// Wraps a density matrix, rejecting it unless every state check passes.
    pub fn new(levels: AtomLevels, rho: ComplexMatrix) -> Result<Self> {
        let state = Self::new_unchecked(levels, rho)?;
        let report = state.validate();
        if !report.is_valid() {
            return Err(Error::InvalidState(report.to_string()));
        }
        Ok(state)
    }

    /// Only checks the shape. Use [`HybridState::validate`] to inspect the rest.
    pub fn new_unchecked(levels: AtomLevels, rho: ComplexMatrix) -> Result<Self> {
        let d = levels.joint_dim();
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: format!("{d}x{d}"),
                found: format!("{}x{}", rho.rows(), rho.cols()),
            });
        }
        Ok(Self { levels, rho })
    }

    pub fn pure(levels: AtomLevels, ket: &[Complex64]) -> Result<Self> {
        Self::new(levels, ComplexMatrix::projector(ket))
    }

    pub fn levels(&self) -> AtomLevels {
        self.levels
    }

    pub fn atom_dim(&self) -> usize {
        self.levels.dim()
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> ComplexMatrix {
        self.rho
    }

    /// `⟨atom_r, n_r| ρ |atom_c, n_c⟩`
    pub fn element(&self, (atom_r, n_r): (usize, usize), (atom_c, n_c): (usize, usize)) -> Complex64 {
        self.rho[(joint_index(atom_r, n_r), joint_index(atom_c, n_c))]
    }

    pub fn population(&self, atom: usize, n: usize) -> f64 {
        self.element((atom, n), (atom, n)).re
    }

    pub fn validate(&self) -> ValidationReport {
        validate_state(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub passed: bool,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Check {
    fn within(deviation: f64, tolerance: f64) -> Self {
        Self {
            passed: deviation.is_finite() && deviation <= tolerance,
            deviation,
            tolerance,
        }
    }
}

/// Outcome of every state check with the measured deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub finite: bool,
    pub hermitian: Check,
    pub trace: Check,
    /// `deviation` is the most negative eigenvalue, clamped at zero from above.
    pub positive: Check,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.finite && self.hermitian.passed && self.trace.passed && self.positive.passed
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "ok" } else { "FAIL" };
        write!(
            f,
            "finite: {}; hermitian: {} (dev {:.3e}); trace: {} (dev {:.3e}); psd: {} (min eig {:.3e})",
            mark(self.finite),
            mark(self.hermitian.passed),
            self.hermitian.deviation,
            mark(self.trace.passed),
            self.trace.deviation,
            mark(self.positive.passed),
            -self.positive.deviation,
        )
    }
}

pub fn validate_state(s: &HybridState) -> ValidationReport {
    let rho = s.rho();
    let finite = rho
        .entries()
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite());
    let hermitian = Check::within(rho.hermiticity_deviation(), HERMITIAN_TOL);
    let tr = rho.trace();
    let trace = Check::within((tr - ONE).norm(), TRACE_TOL);
    let positive = if finite {
        let min_eig = rho.hermitian_eigenvalues()[0];
        Check::within((-min_eig).max(0.0), -PSD_FLOOR)
    } else {
        Check::within(f64::INFINITY, -PSD_FLOOR)
    };
    ValidationReport {
        finite,
        hermitian,
        trace,
        positive,
    }
}

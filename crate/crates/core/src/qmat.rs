//! Exact 2x2 complex linear algebra for qubit observables and density matrices.
//!
//! Everything here is closed-form: eigenvalues come from the characteristic
//! polynomial of a 2x2 matrix, never from an iterative solver.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Hermiticity residual, relative to max(1, matrix norm).
    pub const HERMITIAN: f64 = 1e-12;
    /// Trace deviation from one for a density matrix.
    pub const TRACE: f64 = 1e-10;
    /// Slack allowed below zero for the smallest eigenvalue of a density matrix.
    pub const PSD_SLACK: f64 = 1e-9;
    /// Hermiticity residual for field values, relative to the field norm.
    pub const FIELD_HERMITIAN: f64 = 1e-10;
    /// Normalization tolerance of a partial Wigner field.
    pub const FIELD_NORM: f64 = 1e-8;
    /// Monitored positivity slack for the spectral solvers.
    pub const SPECTRAL_PSD: f64 = 1e-6;
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A 2x2 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexMat2 {
    pub m: [[C64; 2]; 2],
}

impl fmt::Debug for ComplexMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl ComplexMat2 {
    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Self {
            m: [[m00, m01], [m10, m11]],
        }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn from_real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Self::new(m00.into(), m01.into(), m10.into(), m11.into())
    }

    pub fn diag(d0: f64, d1: f64) -> Self {
        Self::from_real(d0, 0.0, 0.0, d1)
    }

    pub fn pauli_x() -> Self {
        Self::from_real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn pauli_y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Self::diag(1.0, -1.0)
    }

    /// Matrix with a single one at `(row, col)`.
    pub fn elementary(row: usize, col: usize) -> Self {
        let mut out = Self::zero();
        out.m[row][col] = ONE;
        out
    }

    /// Outer product |u><v|.
    pub fn outer(u: [C64; 2], v: [C64; 2]) -> Self {
        Self::new(
            u[0] * v[0].conj(),
            u[0] * v[1].conj(),
            u[1] * v[0].conj(),
            u[1] * v[1].conj(),
        )
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.m[row][col]
    }

    #[inline]
    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    #[inline]
    pub fn trace(&self) -> C64 {
        self.m[0][0] + self.m[1][1]
    }

    #[inline]
    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `self − self†`.
    pub fn hermiticity_residual(&self) -> f64 {
        (*self - self.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol * self.norm().max(1.0)
    }

    /// (M + M†)/2.
    #[inline]
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()) * 0.5
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    #[inline]
    pub(crate) fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.m[0][0].re;
        let d = self.m[1][1].re;
        let b = 0.5 * (self.m[0][1] + self.m[1][0].conj());
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl AddAssign for ComplexMat2 {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for ComplexMat2 {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Neg for ComplexMat2 {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Mul for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.m, &o.m);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<f64> for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn mul(self, s: f64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }
}

impl Mul<C64> for ComplexMat2 {
    type Output = Self;
    #[inline]
    fn mul(self, s: C64) -> Self {
        self.scale(s)
    }
}

/// XY − YX.
#[inline]
pub fn commutator(x: &ComplexMat2, y: &ComplexMat2) -> ComplexMat2 {
    *x * *y - *y * *x
}

/// XY + YX.
#[inline]
pub fn anticommutator(x: &ComplexMat2, y: &ComplexMat2) -> ComplexMat2 {
    *x * *y + *y * *x
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMat2) -> Result<f64> {
    check_hermitian(m)?;
    Ok(m.hermitian_eigenvalues()[0])
}

fn check_hermitian(m: &ComplexMat2) -> Result<()> {
    if m.is_hermitian(tol::HERMITIAN) {
        Ok(())
    } else {
        Err(Error::NotHermitian {
            residual: m.hermiticity_residual(),
        })
    }
}

/// A Hermitian qubit observable together with its closed-form eigendecomposition.
///
/// `eigenbasis` holds the eigenvectors as columns, so that
/// `eigenbasis† · matrix · eigenbasis = diag(a0, a1)`. A diagonal matrix keeps the
/// identity basis and its diagonal order, so σ_z has `a0 = +1` on |0⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observable {
    matrix: ComplexMat2,
    eigenvalues: [f64; 2],
    eigenbasis: ComplexMat2,
}

impl Observable {
    pub fn new(matrix: ComplexMat2) -> Result<Self> {
        check_hermitian(&matrix)?;
        let matrix = matrix.hermitian_part();
        let h00 = matrix.m[0][0].re;
        let h11 = matrix.m[1][1].re;
        let h01 = matrix.m[0][1];

        if h01.norm() <= tol::HERMITIAN * matrix.norm().max(1.0) {
            // Diagonal, possibly degenerate: keep the computational basis.
            let matrix = ComplexMat2::diag(h00, h11);
            return Ok(Self {
                matrix,
                eigenvalues: [h00, h11],
                eigenbasis: ComplexMat2::identity(),
            });
        }

        let mean = 0.5 * (h00 + h11);
        let half_gap = (0.25 * (h00 - h11).powi(2) + h01.norm_sqr()).sqrt();
        let a0 = mean + half_gap;
        let a1 = mean - half_gap;

        // Two algebraically equivalent eigenvectors for a0; take the longer one.
        let v_a = [h01, C64::from(a0 - h00)];
        let v_b = [C64::from(a0 - h11), h01.conj()];
        let len = |v: &[C64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let v = if len(&v_a) >= len(&v_b) { v_a } else { v_b };
        let n = len(&v);
        let u0 = [v[0] / n, v[1] / n];
        let u1 = [-u0[1].conj(), u0[0].conj()];

        Ok(Self {
            matrix,
            eigenvalues: [a0, a1],
            eigenbasis: ComplexMat2::new(u0[0], u1[0], u0[1], u1[1]),
        })
    }

    pub fn sigma_x() -> Self {
        Self::new(ComplexMat2::pauli_x()).expect("σ_x is Hermitian")
    }

    pub fn sigma_y() -> Self {
        Self::new(ComplexMat2::pauli_y()).expect("σ_y is Hermitian")
    }

    pub fn sigma_z() -> Self {
        Self::new(ComplexMat2::pauli_z()).expect("σ_z is Hermitian")
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMat2 {
        &self.matrix
    }

    #[inline]
    pub fn eigenvalues(&self) -> [f64; 2] {
        self.eigenvalues
    }

    #[inline]
    pub fn eigenbasis(&self) -> &ComplexMat2 {
        &self.eigenbasis
    }

    /// max(|a0|, |a1|).
    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues[0].abs().max(self.eigenvalues[1].abs())
    }

    /// V† M V: components of `m` in the eigenbasis.
    #[inline]
    pub fn to_eigenbasis(&self, m: &ComplexMat2) -> ComplexMat2 {
        self.eigenbasis.adjoint() * *m * self.eigenbasis
    }

    /// V M V†: inverse of [`Observable::to_eigenbasis`].
    #[inline]
    pub fn from_eigenbasis(&self, m: &ComplexMat2) -> ComplexMat2 {
        self.eigenbasis * *m * self.eigenbasis.adjoint()
    }

    /// exp(−i·θ·A), evaluated in the eigenbasis.
    pub fn exp_i(&self, theta: f64) -> ComplexMat2 {
        let [a0, a1] = self.eigenvalues;
        let d = ComplexMat2::new(
            C64::from_polar(1.0, -theta * a0),
            ZERO,
            ZERO,
            C64::from_polar(1.0, -theta * a1),
        );
        self.from_eigenbasis(&d)
    }

    /// The observable A², from the matrix square.
    pub fn square(&self) -> ComplexMat2 {
        self.matrix * self.matrix
    }
}

/// A qubit density matrix: Hermitian, unit trace, positive up to [`tol::PSD_SLACK`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitDensity {
    matrix: ComplexMat2,
}

impl QubitDensity {
    pub fn new(matrix: ComplexMat2) -> Result<Self> {
        check_hermitian(&matrix)?;
        let tr = matrix.trace();
        if (tr - ONE).norm() > tol::TRACE {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let matrix = matrix.hermitian_part();
        let lo = matrix.hermitian_eigenvalues()[0];
        if lo < -tol::PSD_SLACK {
            return Err(Error::InvalidDensity(format!(
                "minimum eigenvalue {lo:.3e} is negative"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix without validation. Used by integrators whose output may
    /// legitimately leave the density cone (a monitored failure mode).
    pub fn from_matrix_unchecked(matrix: ComplexMat2) -> Self {
        Self { matrix }
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) state vector.
    pub fn pure(psi: [C64; 2]) -> Result<Self> {
        let n2 = psi[0].norm_sqr() + psi[1].norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let n = n2.sqrt();
        let u = [psi[0] / n, psi[1] / n];
        Self::new(ComplexMat2::outer(u, u))
    }

    /// (I + r·σ)/2.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let m = ComplexMat2::new(
            C64::from(0.5 * (1.0 + r[2])),
            C64::new(0.5 * r[0], -0.5 * r[1]),
            C64::new(0.5 * r[0], 0.5 * r[1]),
            C64::from(0.5 * (1.0 - r[2])),
        );
        Self::new(m)
    }

    /// cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩.
    pub fn bloch_angles(theta: f64, phi: f64) -> Result<Self> {
        Self::pure([
            C64::from((0.5 * theta).cos()),
            C64::from_polar((0.5 * theta).sin(), phi),
        ])
    }

    pub fn zero() -> Self {
        Self {
            matrix: ComplexMat2::diag(1.0, 0.0),
        }
    }

    pub fn one() -> Self {
        Self {
            matrix: ComplexMat2::diag(0.0, 1.0),
        }
    }

    pub fn plus() -> Self {
        Self {
            matrix: ComplexMat2::from_real(0.5, 0.5, 0.5, 0.5),
        }
    }

    pub fn minus() -> Self {
        Self {
            matrix: ComplexMat2::from_real(0.5, -0.5, -0.5, 0.5),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: ComplexMat2::diag(0.5, 0.5),
        }
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMat2 {
        &self.matrix
    }

    /// (tr ρσ_x, tr ρσ_y, tr ρσ_z).
    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.matrix.m;
        [2.0 * m[0][1].re, -2.0 * m[0][1].im, (m[0][0] - m[1][1]).re]
    }

    /// Checks the density invariants without consuming the value.
    pub fn is_valid(&self) -> bool {
        Self::new(self.matrix).is_ok()
    }
}

/// tr(Aρ).
pub fn expectation(a: &Observable, rho: &QubitDensity) -> f64 {
    let z = (*a.matrix() * *rho.matrix()).trace();
    debug_assert!(
        z.im.abs() <= 1e-12 * a.matrix().norm().max(1.0) * rho.matrix().norm().max(1.0),
        "imaginary residue {} in expectation value",
        z.im
    );
    z.re
}

/// ½ Σ |eigenvalues of (ρ1 − ρ2)|.
pub fn trace_distance(r1: &QubitDensity, r2: &QubitDensity) -> f64 {
    let [lo, hi] = (*r1.matrix() - *r2.matrix()).hermitian_eigenvalues();
    0.5 * (lo.abs() + hi.abs())
}

/// tr(ρ²).
pub fn purity(rho: &QubitDensity) -> f64 {
    matrix_purity(rho.matrix())
}

#[inline]
pub(crate) fn matrix_purity(m: &ComplexMat2) -> f64 {
    m.m.iter().flatten().map(|z| z.norm_sqr()).sum()
}

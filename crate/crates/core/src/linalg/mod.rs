//! Dense linear algebra for Gaussian fermionic states: Pfaffians, real
//! orthogonal powers and logarithms, unitary logarithms and the canonical
//! form of real antisymmetric matrices.

mod canonical;
mod orthogonal;
mod pfaffian;
mod unitary;

use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};

pub use canonical::{antisymmetric_canonical, CanonicalForm};
pub use orthogonal::{orthogonal_log, orthogonal_power, OrthogonalLog, OrthogonalMatrix};
pub use pfaffian::{leading_pfaffians, pfaffian};
pub(crate) use pfaffian::{leading_pfaffians_in_place, pfaffian_in_place};
pub use unitary::{unitary_log, UnitaryLog};

pub type C64 = nalgebra::Complex<f64>;

/// Scalars the Pfaffian routines work over: `f64` and `C64`.
pub trait Field: ComplexField<RealField = f64> + Copy {}

impl Field for f64 {}
impl Field for C64 {}

/// Default tolerance for accepting a matrix as antisymmetric.
pub const ANTISYMMETRY_TOL: f64 = 1e-10;

/// Even-dimensional matrix with `A^T = -A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricMatrix<T: Field>(DMatrix<T>);

impl<T: Field> AntisymmetricMatrix<T> {
    /// Validates with [`ANTISYMMETRY_TOL`] and stores the exactly
    /// antisymmetric part `(A - A^T)/2`.
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        Self::with_tolerance(m, ANTISYMMETRY_TOL)
    }

    pub fn with_tolerance(m: DMatrix<T>, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                n,
                m.ncols()
            )));
        }
        if n % 2 != 0 {
            return Err(Error::Dimension(format!(
                "antisymmetric matrix must have even dimension, got {n}"
            )));
        }
        let scale = m.iter().map(|v| v.modulus()).fold(1.0, f64::max);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((m[(i, j)] + m[(j, i)]).modulus());
            }
        }
        if worst > tol * scale {
            return Err(Error::Validation(format!(
                "matrix is not antisymmetric (max |A + A^T| = {worst:e})"
            )));
        }
        let half = T::from_subset(&0.5);
        let sym = DMatrix::from_fn(n, n, |i, j| (m[(i, j)] - m[(j, i)]) * half);
        Ok(Self(sym))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.0
    }
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff<T, R, C, S1, S2>(
    a: &nalgebra::Matrix<T, R, C, S1>,
    b: &nalgebra::Matrix<T, R, C, S2>,
) -> f64
where
    T: Field,
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S1: nalgebra::RawStorage<T, R, C>,
    S2: nalgebra::RawStorage<T, R, C>,
{
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (*x - *y).modulus())
        .fold(0.0, f64::max)
}

/// `max |M M^T - I|`.
pub fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let p = m * m.transpose();
    max_abs_diff(&p, &DMatrix::identity(m.nrows(), m.nrows()))
}

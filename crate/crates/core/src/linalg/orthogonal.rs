use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};

use super::{orthogonality_defect, AntisymmetricMatrix};
use crate::error::{Error, Result};

/// Frobenius tolerance for accepting an input as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Looser tolerance for results of long products.
const DERIVED_TOL: f64 = 1e-9;
/// Rotation angles this close to pi sit on the branch cut of the logarithm.
pub const BRANCH_TOL: f64 = 1e-9;

/// Real square matrix with `V V^T = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix(DMatrix<f64>);

fn frobenius_defect(m: &DMatrix<f64>) -> f64 {
    let p = m * m.transpose() - DMatrix::<f64>::identity(m.nrows(), m.nrows());
    p.norm()
}

impl OrthogonalMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(m, ORTHOGONALITY_TOL)
    }

    pub fn with_tolerance(m: DMatrix<f64>, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let d = frobenius_defect(&m);
        if !(d <= tol) {
            return Err(Error::Validation(format!(
                "matrix is not orthogonal (||V V^T - I||_F = {d:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Largest entry of `|V V^T - I|`.
    pub fn defect(&self) -> f64 {
        orthogonality_defect(&self.0)
    }
}

/// `V^n` by repeated squaring.
pub fn orthogonal_power(v: &OrthogonalMatrix, n: u64) -> Result<OrthogonalMatrix> {
    let dim = v.dim();
    let mut result: Option<DMatrix<f64>> = None;
    let mut base = v.0.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r * &base,
            });
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    let out = result.unwrap_or_else(|| DMatrix::identity(dim, dim));
    OrthogonalMatrix::with_tolerance(out, DERIVED_TOL)
}

/// Real logarithm of a special orthogonal matrix.
#[derive(Debug, Clone)]
pub struct OrthogonalLog {
    /// Real antisymmetric `K` with `exp(K) = V`.
    pub generator: AntisymmetricMatrix<f64>,
    /// Rotation angles in `[0, pi]`, one per invariant plane, ascending.
    pub angles: Vec<f64>,
    /// Some angle lies within [`BRANCH_TOL`] of pi, where the principal
    /// logarithm is not unique.
    pub branch_warning: bool,
}

/// Principal real logarithm of `V` in `SO(2n)`.
///
/// Uses the real Schur form `V = Q T Q^T`. For an orthogonal matrix `T` is
/// block diagonal with 2x2 rotations and `+-1` entries; each rotation by
/// `theta` maps to the generator `theta [[0,-1],[1,0]]` and pairs of `-1`
/// entries to rotations by pi.
pub fn orthogonal_log(v: &OrthogonalMatrix) -> Result<OrthogonalLog> {
    let n = v.dim();
    if n % 2 != 0 {
        return Err(Error::Dimension(format!(
            "orthogonal_log needs an even dimension, got {n}"
        )));
    }
    let schur = Schur::try_new(v.0.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Consistency("real Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();

    let mut d = DMatrix::<f64>::zeros(n, n);
    let mut angles = Vec::with_capacity(n / 2);
    let mut negative = Vec::new();
    let mut positive = 0usize;
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let s = 0.5 * (t[(i + 1, i)] - t[(i, i + 1)]);
            let c = 0.5 * (t[(i, i)] + t[(i + 1, i + 1)]);
            let theta = s.atan2(c);
            d[(i, i + 1)] = -theta;
            d[(i + 1, i)] = theta;
            angles.push(theta.abs());
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                negative.push(i);
            } else {
                positive += 1;
            }
            i += 1;
        }
    }
    if negative.len() % 2 != 0 {
        return Err(Error::Domain(
            "matrix has determinant -1 and no real logarithm".into(),
        ));
    }
    for pair in negative.chunks(2) {
        d[(pair[0], pair[1])] = -PI;
        d[(pair[1], pair[0])] = PI;
        angles.push(PI);
    }
    angles.extend(std::iter::repeat_n(0.0, positive / 2));
    angles.sort_by(|a, b| a.total_cmp(b));
    let branch_warning = angles.iter().any(|&a| a > PI - BRANCH_TOL);

    let k = &q * d * q.transpose();
    let generator = AntisymmetricMatrix::with_tolerance(k, 1e-8)?;
    Ok(OrthogonalLog {
        generator,
        angles,
        branch_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_special_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let x: f64 = rng.random_range(-1.0..1.0);
                k[(i, j)] = x;
                k[(j, i)] = -x;
            }
        }
        let q = k.exp();
        // polish to machine orthogonality
        let svd = q.svd(true, true);
        svd.u.unwrap() * svd.v_t.unwrap()
    }

    #[test]
    fn power_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = OrthogonalMatrix::new(random_special_orthogonal(6, &mut rng)).unwrap();
        let p0 = orthogonal_power(&v, 0).unwrap();
        assert_eq!(p0.as_matrix(), &DMatrix::identity(6, 6));
        let minus = OrthogonalMatrix::new(-DMatrix::<f64>::identity(4, 4)).unwrap();
        let p3 = orthogonal_power(&minus, 3).unwrap();
        assert_eq!(p3.as_matrix(), &(-DMatrix::<f64>::identity(4, 4)));
    }

    #[test]
    fn power_matches_naive_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = random_special_orthogonal(20, &mut rng);
        let v = OrthogonalMatrix::new(m.clone()).unwrap();
        let mut naive = DMatrix::identity(20, 20);
        for _ in 0..7 {
            naive = &naive * &m;
        }
        let fast = orthogonal_power(&v, 7).unwrap();
        assert!(max_abs_diff(fast.as_matrix(), &naive) < 1e-10);
    }

    #[test]
    fn power_stays_orthogonal_at_large_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = OrthogonalMatrix::new(random_special_orthogonal(120, &mut rng)).unwrap();
        let p = orthogonal_power(&v, 1000).unwrap();
        assert!(p.defect() < 1e-9);
    }

    #[test]
    fn non_orthogonal_rejected() {
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(0, 1)] = 1e-6;
        assert!(OrthogonalMatrix::new(m).is_err());
    }

    #[test]
    fn log_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2, 4, 10, 40] {
            let m = random_special_orthogonal(n, &mut rng);
            let v = OrthogonalMatrix::new(m.clone()).unwrap();
            let lg = orthogonal_log(&v).unwrap();
            let back = lg.generator.as_matrix().exp();
            assert!(max_abs_diff(&back, &m) < 1e-10, "n = {n}");
            assert!(!lg.branch_warning);
            assert_eq!(lg.angles.len(), n / 2);
        }
    }

    #[test]
    fn log_of_minus_identity_and_identity() {
        let minus = OrthogonalMatrix::new(-DMatrix::<f64>::identity(4, 4)).unwrap();
        let lg = orthogonal_log(&minus).unwrap();
        assert!(lg.branch_warning);
        let back = lg.generator.as_matrix().exp();
        assert!(max_abs_diff(&back, minus.as_matrix()) < 1e-12);

        let id = OrthogonalMatrix::identity(6);
        let lg = orthogonal_log(&id).unwrap();
        assert!(lg.generator.as_matrix().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn log_rejects_reflection() {
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(0, 0)] = -1.0;
        let v = OrthogonalMatrix::new(m).unwrap();
        assert!(matches!(orthogonal_log(&v), Err(Error::Domain(_))));
    }
}

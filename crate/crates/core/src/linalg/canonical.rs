use nalgebra::{DMatrix, SymmetricEigen};

use super::{orthogonality_defect, AntisymmetricMatrix, C64};
use crate::error::{Error, Result};

/// `O A O^T = diag(e_0 J, e_1 J, ...)` with `J = [[0,1],[-1,0]]`.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    /// Orthogonal `O`; rows `2k, 2k+1` span invariant plane `k`.
    pub rows: DMatrix<f64>,
    /// Non-negative block weights in ascending order.
    pub energies: Vec<f64>,
    /// Number of leading blocks with weight below the zero tolerance; their
    /// energies are reported as exactly zero.
    pub zero_modes: usize,
}

/// Canonical block form of a real antisymmetric matrix via the Hermitian
/// eigenproblem of `iA`: an eigenvector `x + iy` with eigenvalue `e > 0`
/// gives the rows `sqrt(2) y`, `sqrt(2) x`.
pub fn antisymmetric_canonical(
    a: &AntisymmetricMatrix<f64>,
    zero_tol: f64,
) -> Result<CanonicalForm> {
    let n = a.dim();
    let half = n / 2;
    let h = a.as_matrix().map(|x| C64::new(0.0, x));
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::Consistency("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let z = order[half..]
        .iter()
        .filter(|&&k| eig.eigenvalues[k] < zero_tol)
        .count();
    let mut rows = DMatrix::<f64>::zeros(n, n);
    let mut energies = Vec::with_capacity(half);

    if z > 0 {
        let mut basis = DMatrix::<f64>::zeros(n, 4 * z);
        for (c, &k) in order[half - z..half + z].iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            for r in 0..n {
                basis[(r, 2 * c)] = v[r].re;
                basis[(r, 2 * c + 1)] = v[r].im;
            }
        }
        let u = basis
            .svd(true, false)
            .u
            .ok_or_else(|| Error::Consistency("SVD of zero-mode space failed".into()))?;
        for m in 0..2 * z {
            rows.row_mut(m).copy_from(&u.column(m).transpose());
        }
        energies.extend(std::iter::repeat_n(0.0, z));
    }

    let s2 = std::f64::consts::SQRT_2;
    for (b, &k) in order[half + z..].iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let r = 2 * (z + b);
        for c in 0..n {
            rows[(r, c)] = s2 * v[c].im;
            rows[(r + 1, c)] = s2 * v[c].re;
        }
        energies.push(eig.eigenvalues[k]);
    }

    let defect = orthogonality_defect(&rows);
    if defect > 1e-8 {
        return Err(Error::Consistency(format!(
            "canonical basis not orthogonal (defect {defect:e})"
        )));
    }
    Ok(CanonicalForm {
        rows,
        energies,
        zero_modes: z,
    })
}

impl CanonicalForm {
    /// `O^T diag(s_k J) O` for per-block signs or weights `s_k`.
    pub fn assemble(&self, weights: &[f64]) -> DMatrix<f64> {
        let n = self.rows.nrows();
        let mut d = DMatrix::<f64>::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            d[(2 * k, 2 * k + 1)] = w;
            d[(2 * k + 1, 2 * k)] = -w;
        }
        self.rows.transpose() * d * &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reconstructs_random_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 16;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let x: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = -x;
            }
        }
        let a = AntisymmetricMatrix::new(m.clone()).unwrap();
        let c = antisymmetric_canonical(&a, 1e-10).unwrap();
        assert_eq!(c.zero_modes, 0);
        assert!(c.energies.windows(2).all(|w| w[0] <= w[1]));
        assert!(max_abs_diff(&c.assemble(&c.energies), &m) < 1e-12);
    }

    #[test]
    fn handles_exact_zero_modes() {
        // chain of couplings (1,2), (3,4) with 0 and 5 decoupled
        let n = 6;
        let mut m = DMatrix::<f64>::zeros(n, n);
        m[(1, 2)] = 0.4;
        m[(2, 1)] = -0.4;
        m[(3, 4)] = 0.9;
        m[(4, 3)] = -0.9;
        let a = AntisymmetricMatrix::new(m.clone()).unwrap();
        let c = antisymmetric_canonical(&a, 1e-8).unwrap();
        assert_eq!(c.zero_modes, 1);
        assert!((c.energies[1] - 0.4).abs() < 1e-14);
        assert!((c.energies[2] - 0.9).abs() < 1e-14);
        assert!(max_abs_diff(&c.assemble(&c.energies), &m) < 1e-14);
        // the zero-mode plane is spanned by basis vectors 0 and 5
        for r in 0..2 {
            let w = c.rows[(r, 0)].powi(2) + c.rows[(r, 5)].powi(2);
            assert!((w - 1.0).abs() < 1e-12);
        }
    }
}

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};

use super::{orthogonal::BRANCH_TOL, C64};
use crate::error::{Error, Result};

/// Principal logarithm `H` of a unitary `U`, with `exp(iH) = U`.
#[derive(Debug, Clone)]
pub struct UnitaryLog {
    /// Hermitian generator.
    pub h: DMatrix<C64>,
    /// Eigenphases in `(-pi, pi]`, in Schur order.
    pub phases: Vec<f64>,
    /// An eigenphase lies within 1e-9 of the branch cut at `-pi`.
    pub branch_warning: bool,
}

/// Eigen-decomposition based logarithm of a unitary matrix.
pub fn unitary_log(u: &DMatrix<C64>) -> Result<UnitaryLog> {
    let n = u.nrows();
    if n != u.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            n,
            u.ncols()
        )));
    }
    let defect = (u.adjoint() * u - DMatrix::<C64>::identity(n, n)).norm();
    if !(defect <= 1e-10) {
        return Err(Error::Validation(format!(
            "matrix is not unitary (||U^H U - I||_F = {defect:e})"
        )));
    }
    let (q, t) = Schur::try_new(u.clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| Error::Consistency("complex Schur iteration did not converge".into()))?
        .unpack();
    let mut branch_warning = false;
    let phases: Vec<f64> = (0..n)
        .map(|k| {
            let mut p = t[(k, k)].arg();
            if p <= -PI {
                p = PI;
            }
            if PI - p.abs() < BRANCH_TOL {
                branch_warning = true;
            }
            p
        })
        .collect();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        phases.iter().map(|&p| C64::new(p, 0.0)),
    ));
    let h = &q * d * q.adjoint();
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    Ok(UnitaryLog {
        h,
        phases,
        branch_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exp_i(h: &DMatrix<C64>) -> DMatrix<C64> {
        (h * C64::new(0.0, 1.0)).exp()
    }

    #[test]
    fn identity_has_zero_log() {
        let lg = unitary_log(&DMatrix::identity(4, 4)).unwrap();
        assert!(lg.h.iter().all(|z| z.norm() < 1e-15));
        assert!(!lg.branch_warning);
    }

    #[test]
    fn diagonal_phases() {
        let a = PI / 4.0;
        let u = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::from_polar(1.0, a),
            C64::from_polar(1.0, -a),
        ]));
        let lg = unitary_log(&u).unwrap();
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(a, 0.0),
            C64::new(-a, 0.0),
        ]));
        assert!(max_abs_diff(&lg.h, &expect) < 1e-14);
    }

    #[test]
    fn random_orthogonal_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [4, 12, 30] {
            let mut k = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    let x: f64 = rng.random_range(-1.0..1.0);
                    k[(i, j)] = x;
                    k[(j, i)] = -x;
                }
            }
            let svd = k.exp().svd(true, true);
            let o = svd.u.unwrap() * svd.v_t.unwrap();
            let u = o.map(|x| C64::new(x, 0.0));
            let lg = unitary_log(&u).unwrap();
            assert!(max_abs_diff(&exp_i(&lg.h), &u) < 1e-9, "n = {n}");
            // real orthogonal input: iH is real antisymmetric
            let ih = &lg.h * C64::new(0.0, 1.0);
            assert!(ih.iter().all(|z| z.im.abs() < 1e-9));
            let re = ih.map(|z| z.re);
            assert!(max_abs_diff(&re, &(-re.transpose())) < 1e-9);
        }
    }

    #[test]
    fn branch_cut_flagged() {
        let u = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        let lg = unitary_log(&u).unwrap();
        assert!(lg.branch_warning);
        assert!((lg.phases[0] - PI).abs() < 1e-15);
    }

    #[test]
    fn non_unitary_rejected() {
        let u = DMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(unitary_log(&u), Err(Error::Validation(_))));
    }
}

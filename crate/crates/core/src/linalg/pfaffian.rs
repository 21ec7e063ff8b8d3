//! Pfaffians of antisymmetric matrices.
//!
//! [`pfaffian`] is the Parlett-Reid skew-symmetric tridiagonalization with
//! partial pivoting. [`leading_pfaffians`] returns the Pfaffians of every
//! leading even-order principal submatrix in a single sweep, which is what
//! the string operators of the spin chain reduce to.

use nalgebra::DMatrix;

use super::{AntisymmetricMatrix, Field};

/// Pfaffian of a validated antisymmetric matrix.
pub fn pfaffian<T: Field>(a: &AntisymmetricMatrix<T>) -> T {
    let n = a.dim();
    if n == 0 {
        return T::one();
    }
    let mut work = row_major(a.as_matrix());
    pfaffian_in_place(&mut work, n)
}

pub(crate) fn row_major<T: Field>(m: &DMatrix<T>) -> Vec<T> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * m.ncols());
    for i in 0..n {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Parlett-Reid on a row-major `n x n` buffer, which is destroyed.
/// `n` must be even.
pub(crate) fn pfaffian_in_place<T: Field>(a: &mut [T], n: usize) -> T {
    debug_assert_eq!(a.len(), n * n);
    debug_assert!(n % 2 == 0);
    let mut pf = T::one();
    let mut tau = vec![T::zero(); n];
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let mut kp = k + 1;
        let mut best = a[(k + 1) * n + k].modulus();
        for i in k + 2..n {
            let v = a[i * n + k].modulus();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in k..n {
                a.swap((k + 1) * n + j, kp * n + j);
            }
            for i in k..n {
                a.swap(i * n + k + 1, i * n + kp);
            }
            pf = -pf;
        }
        let piv = a[k * n + k + 1];
        if piv == T::zero() {
            return T::zero();
        }
        pf *= piv;
        if k + 2 < n {
            let inv = T::one() / piv;
            for i in k + 2..n {
                tau[i] = a[k * n + i] * inv;
            }
            for i in k + 2..n {
                let ti = tau[i];
                let ci = a[i * n + k + 1];
                for j in k + 2..n {
                    let cj = a[j * n + k + 1];
                    a[i * n + j] += ti * cj - ci * tau[j];
                }
            }
        }
    }
    pf
}

/// Relative pivot threshold for accepting a block in [`leading_pfaffians`].
const ACCEPT: f64 = 0.1;

/// Pfaffians of all leading principal submatrices of even order:
/// `out[k] = pf(a[..2k+2, ..2k+2])`.
///
/// The sweep eliminates the matrix in 2x2 blocks from the top-left corner,
/// so each leading Pfaffian is the running product of block Pfaffians. When
/// a 2x2 pivot is small relative to its column the block is enlarged (look
/// ahead) until it is well conditioned; the leading Pfaffians inside an
/// enlarged block are evaluated directly with pivoting. The cost is
/// `O(n^3)` for the whole list, against `O(n^4)` for separate evaluations.
pub fn leading_pfaffians<T: Field>(a: &DMatrix<T>) -> Vec<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "leading_pfaffians needs a square matrix");
    assert!(n % 2 == 0, "leading_pfaffians needs an even dimension");
    let mut s = row_major(a);
    leading_pfaffians_in_place(&mut s, n)
}

pub(crate) fn leading_pfaffians_in_place<T: Field>(s: &mut [T], n: usize) -> Vec<T> {
    let half = n / 2;
    let mut out = vec![T::zero(); half];
    let mut base = T::one();
    let mut off = 0usize;
    let mut block = Vec::new();
    while off < n {
        let colmax = (off + 1..n)
            .map(|i| s[i * n + off].modulus())
            .fold(0.0, f64::max);
        if colmax == 0.0 {
            // index `off` is decoupled: every remaining leading Pfaffian vanishes
            return out;
        }
        let mut b = 1;
        let size = loop {
            let size = 2 * b;
            let p = if b == 1 {
                s[off * n + off + 1]
            } else {
                block.clear();
                for i in off..off + size {
                    block.extend_from_slice(&s[i * n + off..i * n + off + size]);
                }
                pfaffian_in_place(&mut block, size)
            };
            out[off / 2 + b - 1] = base * p;
            if off + size == n {
                return out;
            }
            let scale = (off..n)
                .flat_map(|i| (off..off + size).map(move |j| (i, j)))
                .map(|(i, j)| s[i * n + j].modulus())
                .fold(0.0, f64::max);
            if p.modulus() >= (ACCEPT * scale).powi(b as i32) {
                base *= p;
                break size;
            }
            b += 1;
        };
        eliminate_block(s, n, off, size);
        off += size;
    }
    out
}

/// Schur complement of the `size x size` block at `off` written into the
/// trailing part of `s`.
fn eliminate_block<T: Field>(s: &mut [T], n: usize, off: usize, size: usize) {
    let rest = off + size;
    if size == 2 {
        let inv = T::one() / s[off * n + off + 1];
        let x: Vec<T> = (rest..n).map(|j| s[off * n + j]).collect();
        let y: Vec<T> = (rest..n).map(|j| s[(off + 1) * n + j]).collect();
        for i in rest..n {
            let u = s[i * n + off] * inv;
            let v = s[i * n + off + 1] * inv;
            let row = &mut s[i * n + rest..(i + 1) * n];
            for (k, r) in row.iter_mut().enumerate() {
                *r += u * y[k] - v * x[k];
            }
        }
        return;
    }
    let m = n - rest;
    let blk = DMatrix::from_fn(size, size, |i, j| s[(off + i) * n + off + j]);
    let rhs = DMatrix::from_fn(size, m, |i, j| s[(off + i) * n + rest + j]);
    let x = blk
        .lu()
        .solve(&rhs)
        .expect("accepted look-ahead block is nonsingular");
    for i in rest..n {
        for j in rest..n {
            let mut acc = T::zero();
            for k in 0..size {
                acc += s[i * n + off + k] * x[(k, j - rest)];
            }
            s[i * n + j] -= acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_antisym(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        m
    }

    fn pf_of(m: &DMatrix<f64>) -> f64 {
        pfaffian(&AntisymmetricMatrix::new(m.clone()).unwrap())
    }

    #[test]
    fn two_by_two_and_four_by_four() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.5, -2.5, 0.0]);
        assert_eq!(pf_of(&a), 2.5);
        let (a12, a13, a14, a23, a24, a34) = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let b = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, a12, a13, a14, -a12, 0.0, a23, a24, -a13, -a23, 0.0, a34, -a14, -a24, -a34,
                0.0,
            ],
        );
        assert!((pf_of(&b) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn odd_dimension_rejected() {
        let m = DMatrix::<f64>::zeros(3, 3);
        assert!(AntisymmetricMatrix::new(m).is_err());
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mut m = DMatrix::<f64>::zeros(2, 2);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = -0.9;
        assert!(AntisymmetricMatrix::new(m).is_err());
    }

    #[test]
    fn square_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let m = random_antisym(20, &mut rng);
            let pf = pf_of(&m);
            let det = m.clone().determinant();
            assert!((pf * pf - det).abs() <= 1e-8 * det.abs());
        }
    }

    #[test]
    fn complex_square_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 12;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        let pf = pfaffian(&AntisymmetricMatrix::new(m.clone()).unwrap());
        let det = m.determinant();
        assert!((pf * pf - det).norm() <= 1e-10 * det.norm());
    }

    #[test]
    fn leading_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 4, 10, 30] {
            let m = random_antisym(n, &mut rng);
            let lead = leading_pfaffians(&m);
            for k in 0..n / 2 {
                let sub = m.view((0, 0), (2 * k + 2, 2 * k + 2)).into_owned();
                let direct = pf_of(&sub);
                assert!(
                    (lead[k] - direct).abs() <= 1e-10 * (1.0 + direct.abs()),
                    "n={n} k={k}: {} vs {}",
                    lead[k],
                    direct
                );
            }
        }
    }

    #[test]
    fn leading_handles_vanishing_minors() {
        // Leading 2x2 and 4x4 blocks are singular; larger ones are not.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut m = random_antisym(12, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = 0.0;
            }
        }
        m[(0, 2)] = 0.7;
        m[(2, 0)] = -0.7;
        m[(1, 3)] = 0.3;
        m[(3, 1)] = -0.3;
        let lead = leading_pfaffians(&m);
        assert_eq!(lead[0], 0.0);
        for k in 0..6 {
            let sub = m.view((0, 0), (2 * k + 2, 2 * k + 2)).into_owned();
            let direct = pf_of(&sub);
            assert!((lead[k] - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
        }
        // a row of zeros kills everything from there on
        let mut z = random_antisym(8, &mut rng);
        for j in 0..8 {
            z[(0, j)] = 0.0;
            z[(j, 0)] = 0.0;
        }
        assert!(leading_pfaffians(&z).iter().all(|&v| v == 0.0));
    }
}

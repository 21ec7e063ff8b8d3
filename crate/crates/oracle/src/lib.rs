//! Dense statevector reference for the kicked Ising chain.
//!
//! Everything here works directly in the 2^L spin Hilbert space and knows
//! nothing about Majorana covariance matrices. It exists so the free-fermion
//! path can be checked against an independent computation of the same
//! physics. Spin `j` (0-based) is bit `j` of the basis index; a set bit means
//! spin down.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;

const I: C64 = Complex { re: 0.0, im: 1.0 };

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Eigenvalue of sigma^z for spin `j` in basis state `s`.
#[inline]
fn z_of(s: usize, j: usize) -> f64 {
    if (s >> j) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// |up down up down ...> with site 0 up.
pub fn neel_state(l: usize) -> DVector<C64> {
    let mut psi = DVector::from_element(1 << l, zero());
    let mut idx = 0usize;
    for j in (1..l).step_by(2) {
        idx |= 1 << j;
    }
    psi[idx] = one();
    psi
}

/// One period of `exp(-i sum J zz) exp(-i (pi/2) g sum x)` applied in place.
pub fn apply_floquet(psi: &mut DVector<C64>, couplings: &[f64], g: f64) {
    let l = couplings.len() + 1;
    assert_eq!(psi.len(), 1 << l);
    let half = 0.5 * std::f64::consts::PI * g;
    let (c, s) = (half.cos(), half.sin());
    for j in 0..l {
        let bit = 1 << j;
        for a in 0..psi.len() {
            if a & bit == 0 {
                let b = a | bit;
                let (pa, pb) = (psi[a], psi[b]);
                psi[a] = pa * c - I * s * pb;
                psi[b] = pb * c - I * s * pa;
            }
        }
    }
    for a in 0..psi.len() {
        let e: f64 = couplings
            .iter()
            .enumerate()
            .map(|(j, &jj)| jj * z_of(a, j) * z_of(a, j + 1))
            .sum();
        psi[a] *= C64::new(0.0, -e).exp();
    }
}

/// <sigma^z_j> for every site.
pub fn sz_profile(psi: &DVector<C64>, l: usize) -> Vec<f64> {
    (0..l)
        .map(|j| {
            psi.iter()
                .enumerate()
                .map(|(a, amp)| z_of(a, j) * amp.norm_sqr())
                .sum()
        })
        .collect()
}

/// `<sigma^z_j(n)>` in the Neel state for `n = 0..=n_max`; row `n`, column `j`.
pub fn neel_sz_history(couplings: &[f64], g: f64, n_max: usize) -> Vec<Vec<f64>> {
    let l = couplings.len() + 1;
    let mut psi = neel_state(l);
    let mut out = vec![sz_profile(&psi, l)];
    for _ in 0..n_max {
        apply_floquet(&mut psi, couplings, g);
        out.push(sz_profile(&psi, l));
    }
    out
}

fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[zero(), one(), one(), zero()])
}

fn pauli_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[zero(), -I, I, zero()])
}

fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[one(), zero(), zero(), -one()])
}

/// Tensor product of single-site operators; `ops[j]` acts on spin `j`.
fn product_operator(ops: &[DMatrix<C64>]) -> DMatrix<C64> {
    let l = ops.len();
    let dim = 1 << l;
    let mut out = DMatrix::from_element(dim, dim, zero());
    for a in 0..dim {
        for b in 0..dim {
            let mut v = one();
            for (j, op) in ops.iter().enumerate() {
                v *= op[((a >> j) & 1, (b >> j) & 1)];
                if v == zero() {
                    break;
                }
            }
            out[(a, b)] = v;
        }
    }
    out
}

/// Majorana operators `gamma_1 .. gamma_2L` (returned 0-based) built from
/// the Jordan-Wigner string `prod_{k<j} (-sigma^x_k)`:
/// `gamma_{2j-1} = -S_j sigma^z_j`, `gamma_{2j} = S_j sigma^y_j`.
pub fn majorana_operators(l: usize) -> Vec<DMatrix<C64>> {
    let id = DMatrix::<C64>::identity(2, 2);
    let mut out = Vec::with_capacity(2 * l);
    for j in 0..l {
        let mut ops: Vec<DMatrix<C64>> = vec![id.clone(); l];
        for op in ops.iter_mut().take(j) {
            *op = -pauli_x();
        }
        ops[j] = -pauli_z();
        out.push(product_operator(&ops));
        ops[j] = pauli_y();
        out.push(product_operator(&ops));
    }
    out
}

/// Single-site or two-site Pauli string as a dense matrix.
pub fn site_operator(l: usize, sites: &[(usize, char)]) -> DMatrix<C64> {
    let mut ops: Vec<DMatrix<C64>> = vec![DMatrix::identity(2, 2); l];
    for &(j, p) in sites {
        let m = match p {
            'x' => pauli_x(),
            'y' => pauli_y(),
            'z' => pauli_z(),
            _ => panic!("unknown Pauli label {p}"),
        };
        ops[j] = &ops[j] * m;
    }
    product_operator(&ops)
}

/// Dense Floquet unitary `exp(-i sum J zz) exp(-i (pi/2) g sum x)`.
pub fn floquet_unitary(couplings: &[f64], g: f64) -> DMatrix<C64> {
    let l = couplings.len() + 1;
    let dim = 1 << l;
    let mut u = DMatrix::from_element(dim, dim, zero());
    for b in 0..dim {
        let mut col = DVector::from_element(dim, zero());
        col[b] = one();
        apply_floquet(&mut col, couplings, g);
        u.set_column(b, &col);
    }
    u
}

/// `(1/4) sum_ij B_ij gamma_i gamma_j` in the spin basis.
pub fn quadratic_form(coeff: &DMatrix<C64>, gammas: &[DMatrix<C64>]) -> DMatrix<C64> {
    let dim = gammas[0].nrows();
    let mut out = DMatrix::from_element(dim, dim, zero());
    for i in 0..gammas.len() {
        for j in 0..gammas.len() {
            let c = coeff[(i, j)];
            if c.norm() > 0.0 {
                out += (&gammas[i] * &gammas[j]) * (c * 0.25);
            }
        }
    }
    out
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn hermitian_spectrum(h: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Ground state (lowest eigenvector) of a Hermitian matrix together with its energy.
pub fn hermitian_ground_state(h: &DMatrix<C64>) -> (f64, DVector<C64>) {
    let eig = h.clone().symmetric_eigen();
    let (k, e) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(k, e)| (k, *e))
        .unwrap();
    (e, eig.eigenvectors.column(k).into_owned())
}

pub fn expectation(op: &DMatrix<C64>, psi: &DVector<C64>) -> C64 {
    psi.dotc(&(op * psi))
}

/// Wick expansion by explicit enumeration of all perfect matchings:
/// `sum over pairings sign * prod w[a][b]` with `a < b` in each pair.
/// Exponential cost; meant for matrices up to about 12x12.
pub fn pairing_sum<T>(w: &[Vec<T>]) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Add<Output = T> + std::ops::Neg<Output = T>,
    T: From<f64>,
{
    fn go<T>(w: &[Vec<T>], rest: &[usize]) -> T
    where
        T: Copy + std::ops::Mul<Output = T> + std::ops::Add<Output = T> + std::ops::Neg<Output = T>,
        T: From<f64>,
    {
        if rest.is_empty() {
            return T::from(1.0);
        }
        let first = rest[0];
        let mut acc = T::from(0.0);
        for k in 1..rest.len() {
            let partner = rest[k];
            let remaining: Vec<usize> = rest[1..]
                .iter()
                .copied()
                .filter(|&x| x != partner)
                .collect();
            // pairing first with the k-th element skips k-1 operators
            let term = w[first][partner] * go(w, &remaining);
            acc = if k % 2 == 1 { acc + term } else { acc + (-term) };
        }
        acc
    }
    let idx: Vec<usize> = (0..w.len()).collect();
    assert!(w.len() % 2 == 0, "pairing sum needs an even number of operators");
    go(w, &idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn majoranas_anticommute() {
        let g = majorana_operators(3);
        let id = DMatrix::<C64>::identity(8, 8);
        for a in 0..6 {
            for b in 0..6 {
                let ac = &g[a] * &g[b] + &g[b] * &g[a];
                let expect = if a == b { &id * C64::new(2.0, 0.0) } else { &id * zero() };
                assert!(close(&ac, &expect) < 1e-12);
            }
        }
    }

    #[test]
    fn bond_and_kick_in_majorana_form() {
        let l = 3;
        let g = majorana_operators(l);
        for j in 0..l {
            let x = site_operator(l, &[(j, 'x')]);
            let alt = (&g[2 * j] * &g[2 * j + 1]) * (-I);
            assert!(close(&x, &alt) < 1e-12);
        }
        for j in 0..l - 1 {
            let zz = site_operator(l, &[(j, 'z'), (j + 1, 'z')]);
            let alt = (&g[2 * j + 1] * &g[2 * j + 2]) * I;
            assert!(close(&zz, &alt) < 1e-12);
        }
    }

    #[test]
    fn neel_profile() {
        let psi = neel_state(4);
        assert_eq!(sz_profile(&psi, 4), vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn floquet_is_unitary() {
        let u = floquet_unitary(&[0.3, 0.1, 0.7], 0.8);
        let id = DMatrix::<C64>::identity(16, 16);
        assert!(close(&(u.adjoint() * &u), &id) < 1e-12);
    }

    #[test]
    fn pairing_sum_4x4() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let w = vec![
            vec![0.0, a[0], a[1], a[2]],
            vec![-a[0], 0.0, a[3], a[4]],
            vec![-a[1], -a[3], 0.0, a[5]],
            vec![-a[2], -a[4], -a[5], 0.0],
        ];
        assert_eq!(pairing_sum(&w), 8.0);
    }
}

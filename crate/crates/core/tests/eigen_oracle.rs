//! Eigenstate data against dense many-body constructions.

use dtc_core::eigenstates::{
    correlation_matrix, effective_hamiltonian, eigenstate_covariance, zz_correlator, Occupation,
};
use dtc_core::linalg::C64;
use dtc_core::model::{sample_disorder, ModelParams};
use dtc_oracle::{
    expectation, floquet_unitary, hermitian_ground_state, majorana_operators, pairing_sum,
    quadratic_form, site_operator,
};
use nalgebra::DMatrix;

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn quadratic_generator_reproduces_many_body_floquet() {
    let l = 6;
    for (idx, g) in [(0u64, 0.9), (1, 0.75), (2, 0.97)] {
        let p = ModelParams::new(l, g);
        let cfg = sample_disorder(&p, 31, idx).unwrap();
        let h = effective_hamiltonian(&cfg, &p).unwrap();
        let gam = majorana_operators(l);
        let hq = quadratic_form(&h.coefficient_matrix(), &gam);
        let u_eff = (&hq * C64::new(0.0, -2.0)).exp();
        let u = floquet_unitary(&cfg.couplings, g);
        // equal up to a global phase
        let (mut best, mut phase) = (0.0, C64::new(1.0, 0.0));
        for (a, b) in u_eff.iter().zip(u.iter()) {
            if b.norm() > best {
                best = b.norm();
                phase = a / b;
            }
        }
        assert!((phase.norm() - 1.0).abs() < 1e-8);
        assert!(max_diff(&u_eff, &(&u * phase)) < 1e-8, "idx {idx}");

        // ground-state energy and zz correlations
        let cov = eigenstate_covariance(&h, &Occupation::Ground).unwrap();
        let (e0, psi) = hermitian_ground_state(&hq);
        assert!((cov.energy - e0).abs() < 1e-7);
        let c = correlation_matrix(&cov).unwrap();
        for i in 0..l {
            for j in i + 1..l {
                let zz = site_operator(l, &[(i, 'z'), (j, 'z')]);
                let want = expectation(&zz, &psi).re;
                assert!((c[(i, j)] - want).abs() < 1e-8, "({i},{j})");
            }
        }
    }
}

#[test]
fn correlator_matches_explicit_pairings() {
    let l = 8;
    let p = ModelParams::new(l, 0.9);
    for seed in 0..5 {
        let cfg = sample_disorder(&p, seed, 0).unwrap();
        let h = effective_hamiltonian(&cfg, &p).unwrap();
        let cov = eigenstate_covariance(&h, &Occupation::Random { seed }).unwrap();
        let m = cov.m.as_matrix();
        for j in 1..=4 {
            for x in 1..=3 {
                let s = 2 * j - 1;
                let w: Vec<Vec<f64>> = (0..2 * x)
                    .map(|a| (0..2 * x).map(|b| m[(s + a, s + b)]).collect())
                    .collect();
                let brute = pairing_sum(&w).abs();
                let v = zz_correlator(&cov, j, x).unwrap();
                assert!((brute - v).abs() < 1e-10);
            }
        }
    }
}

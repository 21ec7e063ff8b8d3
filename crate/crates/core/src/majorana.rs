//! Single-particle Floquet matrix and the Gaussian representation of the
//! Neel initial state.
//!
//! Majoranas are indexed from 0: site `j` (0-based) carries `gamma[2j]` and
//! `gamma[2j+1]`, with `sigma^x_j = -i gamma[2j] gamma[2j+1]` and
//! `sigma^z_j sigma^z_{j+1} = i gamma[2j+1] gamma[2j+2]`. A quadratic
//! Hamiltonian `(i/4) sum A_ab gamma_a gamma_b` with real antisymmetric `A`
//! evolves the Majoranas in the Heisenberg picture as `gamma -> exp(A t) gamma`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{
    antisymmetric_canonical, orthogonal_power, pfaffian, AntisymmetricMatrix, OrthogonalMatrix,
    C64,
};
use crate::model::{DisorderConfig, ModelParams};

/// Quasiparticle energies below this are zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-8;

/// Generator of the kick: `A[2j, 2j+1] = -pi g t1`.
pub fn kick_generator(l: usize, params: &ModelParams) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(2 * l, 2 * l);
    let w = PI * params.g * params.t1;
    for j in 0..l {
        a[(2 * j, 2 * j + 1)] = -w;
        a[(2 * j + 1, 2 * j)] = w;
    }
    a
}

/// Generator of the Ising step: `A[2j+1, 2j+2] = 2 J_j t2`.
pub fn ising_generator(config: &DisorderConfig, params: &ModelParams) -> DMatrix<f64> {
    let l = config.sites();
    let mut a = DMatrix::zeros(2 * l, 2 * l);
    for (j, &jj) in config.couplings.iter().enumerate() {
        let w = 2.0 * jj * params.t2;
        a[(2 * j + 1, 2 * j + 2)] = w;
        a[(2 * j + 2, 2 * j + 1)] = -w;
    }
    a
}

/// `gamma(1) = V gamma(0)` for one Floquet period, kept both dense and as
/// sparse rows (at most four entries each).
#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    v: OrthogonalMatrix,
    rows: Vec<Vec<(usize, f64)>>,
}

impl FloquetMatrix {
    pub fn matrix(&self) -> &OrthogonalMatrix {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.dim()
    }

    pub fn sites(&self) -> usize {
        self.dim() / 2
    }

    /// Largest `|a - b|` over nonzero entries `V[a, b]`.
    pub fn half_bandwidth(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(a, r)| r.iter().map(move |&(b, _)| a.abs_diff(b)))
            .max()
            .unwrap_or(0)
    }

    /// `V x` for a complex vector.
    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(
            x.len(),
            self.rows
                .iter()
                .map(|r| r.iter().map(|&(b, w)| x[b] * w).sum::<C64>()),
        )
    }

    /// `V G V^T`.
    pub fn conjugate(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim();
        // t = V G, then V t^T = (t V^T)^T ... computed as V (V G)^T with G antisymmetric
        let mut t = DMatrix::<f64>::zeros(n, n);
        for (a, r) in self.rows.iter().enumerate() {
            for &(b, w) in r {
                for c in 0..n {
                    t[(a, c)] += w * g[(b, c)];
                }
            }
        }
        let mut out = DMatrix::<f64>::zeros(n, n);
        for (c, r) in self.rows.iter().enumerate() {
            for &(b, w) in r {
                for a in 0..n {
                    out[(a, c)] += w * t[(a, b)];
                }
            }
        }
        out
    }
}

/// Floquet matrix `exp(A_ising) exp(A_kick)` written out entry by entry.
pub fn build_floquet_matrix(config: &DisorderConfig, params: &ModelParams) -> Result<FloquetMatrix> {
    let l = config.sites();
    if l != params.l {
        return Err(Error::Dimension(format!(
            "config has {} sites, params expect {}",
            l, params.l
        )));
    }
    let n = 2 * l;
    let (sg, cg) = (PI * params.g * params.t1).sin_cos();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    rows[0] = vec![(0, cg), (1, -sg)];
    rows[n - 1] = vec![(n - 2, sg), (n - 1, cg)];
    for (m, &jj) in config.couplings.iter().enumerate() {
        let (sj, cj) = (2.0 * jj * params.t2).sin_cos();
        let (a, b) = (2 * m + 1, 2 * m + 2);
        rows[a] = vec![
            (a - 1, cj * sg),
            (a, cj * cg),
            (b, sj * cg),
            (b + 1, -sj * sg),
        ];
        rows[b] = vec![
            (a - 1, -sj * sg),
            (a, -sj * cg),
            (b, cj * cg),
            (b + 1, -cj * sg),
        ];
    }
    let mut dense = DMatrix::zeros(n, n);
    for (a, r) in rows.iter().enumerate() {
        for &(b, w) in r {
            dense[(a, b)] = w;
        }
    }
    let v = OrthogonalMatrix::with_tolerance(dense, 1e-8)
        .map_err(|e| Error::Construction(format!("Floquet matrix: {e}")))?;
    Ok(FloquetMatrix { v, rows })
}

/// Gaussian data for the pair `|0>`, `|1> = eta_0^dag |0>` spanning the
/// Neel state.
#[derive(Debug, Clone)]
pub struct GaussianState {
    /// `G[a, b] = -i <0|gamma_a gamma_b|0>` for `a != b`.
    pub g: DMatrix<f64>,
    /// `C[a] = <0|gamma_a eta_0^dag|0>`.
    pub c: DVector<C64>,
    /// `-1 / C_1` of the initial state; unchanged by evolution.
    pub beta: C64,
    /// Periods elapsed since the initial state.
    pub periods: u64,
}

/// Antisymmetric generator of the parent Hamiltonian `sum_j J_j zz`, whose
/// two degenerate ground states are the Neel states. Zero couplings are
/// replaced by one so the zero mode stays unique.
pub fn parent_generator(config: &DisorderConfig) -> DMatrix<f64> {
    let l = config.sites();
    let mut a = DMatrix::zeros(2 * l, 2 * l);
    for (j, &jj) in config.couplings.iter().enumerate() {
        let w = 2.0 * if jj > 0.0 { jj } else { 1.0 };
        a[(2 * j + 1, 2 * j + 2)] = w;
        a[(2 * j + 2, 2 * j + 1)] = -w;
    }
    a
}

/// Maps the Neel state to Gaussian data via the zero mode of the parent
/// Hamiltonian, choosing the zero-mode orientation that makes the vacuum
/// parity even (`pf(G) = +1`).
pub fn build_initial_state(config: &DisorderConfig, params: &ModelParams) -> Result<GaussianState> {
    if config.sites() != params.l {
        return Err(Error::Dimension(format!(
            "config has {} sites, params expect {}",
            config.sites(),
            params.l
        )));
    }
    let a = AntisymmetricMatrix::new(parent_generator(config))?;
    let canon = antisymmetric_canonical(&a, ZERO_MODE_TOL)?;
    if canon.zero_modes == 0 {
        return Err(Error::ZeroModeMissing {
            smallest: canon.energies[0],
        });
    }
    let mut canon = canon;
    let signs = vec![1.0; canon.energies.len()];
    let mut g = canon.assemble(&signs);
    let parity = pfaffian(&AntisymmetricMatrix::new(g.clone())?);
    if parity < 0.0 {
        canon.rows.swap_rows(0, 1);
        g = canon.assemble(&signs);
    }
    let n = g.nrows();
    let c = DVector::from_fn(n, |k, _| C64::new(canon.rows[(0, k)], -canon.rows[(1, k)]));
    let c1 = c[0];
    if c1.norm() < 1e-10 {
        return Err(Error::DegenerateMapping(c1.norm()));
    }
    let state = GaussianState {
        g,
        c,
        beta: -C64::new(1.0, 0.0) / c1,
        periods: 0,
    };
    let purity = state.purity_defect();
    if purity > 1e-8 {
        return Err(Error::Consistency(format!(
            "initial state not pure (|G G + I| = {purity:e})"
        )));
    }
    Ok(state)
}

impl GaussianState {
    pub fn sites(&self) -> usize {
        self.g.nrows() / 2
    }

    /// `max |G G + I|`.
    pub fn purity_defect(&self) -> f64 {
        let n = self.g.nrows();
        (&self.g * &self.g + DMatrix::<f64>::identity(n, n))
            .iter()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// One Floquet period.
    pub fn step(&self, v: &FloquetMatrix) -> GaussianState {
        GaussianState {
            g: v.conjugate(&self.g),
            c: v.apply(&self.c),
            beta: self.beta,
            periods: self.periods + 1,
        }
    }

    /// `n` further periods.
    pub fn evolve(&self, v: &FloquetMatrix, n: u64) -> Result<GaussianState> {
        if n == 0 {
            return Ok(self.clone());
        }
        if n <= 16 {
            let mut s = self.clone();
            for _ in 0..n {
                s = s.step(v);
            }
            return Ok(s);
        }
        let p = orthogonal_power(v.matrix(), n)?;
        let pm = p.as_matrix();
        let pc = pm.map(|x| C64::new(x, 0.0));
        Ok(GaussianState {
            g: pm * &self.g * pm.transpose(),
            c: pc * &self.c,
            beta: self.beta,
            periods: self.periods + n,
        })
    }
}

/// Free-function form of [`GaussianState::evolve`].
pub fn evolve(state: &GaussianState, v: &FloquetMatrix, n: u64) -> Result<GaussianState> {
    state.evolve(v, n)
}

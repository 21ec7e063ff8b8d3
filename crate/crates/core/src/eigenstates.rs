//! Effective Hamiltonian of one Floquet period, its Gaussian eigenstates and
//! their `zz` correlations.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    antisymmetric_canonical, leading_pfaffians, orthogonal_log, AntisymmetricMatrix,
    CanonicalForm, OrthogonalMatrix, C64,
};
use crate::majorana::{build_floquet_matrix, ising_generator, kick_generator};
use crate::model::{DisorderConfig, ModelParams};

/// Quasienergies closer to zero than this make the occupation ambiguous.
pub const DEGENERATE_TOL: f64 = 1e-9;
const CONSISTENCY_TOL: f64 = 1e-6;

/// `H_eff = i A` with `exp(2 A) = exp(A_ising) exp(A_kick)`; in the
/// normalization `H = (1/4) sum B_ab gamma_a gamma_b`, `B = i A`.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub generator: AntisymmetricMatrix<f64>,
    /// Non-negative quasienergies `e_k`, ascending; the spectrum of `H_eff`
    /// is `{+-e_k}`, inside `[0, pi/2]`.
    pub quasienergies: Vec<f64>,
    /// A quasienergy sits at the branch cut `pi/2`.
    pub branch_warning: bool,
    canonical: CanonicalForm,
}

impl EffectiveHamiltonian {
    pub fn sites(&self) -> usize {
        self.generator.dim() / 2
    }

    /// The Hermitian coefficient matrix `B = i A`.
    pub fn coefficient_matrix(&self) -> DMatrix<C64> {
        self.generator.as_matrix().map(|x| C64::new(0.0, x))
    }

    /// `exp(-2 i B) = exp(2 A)`.
    pub fn floquet_product(&self) -> DMatrix<f64> {
        (self.generator.as_matrix() * 2.0).exp()
    }

    /// All `2L` eigenvalues of `B`, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .quasienergies
            .iter()
            .flat_map(|&e| [-e, e])
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn canonical(&self) -> &CanonicalForm {
        &self.canonical
    }
}

/// Principal effective Hamiltonian of `exp(A_ising) exp(A_kick)`.
pub fn effective_hamiltonian(
    config: &DisorderConfig,
    params: &ModelParams,
) -> Result<EffectiveHamiltonian> {
    let v = build_floquet_matrix(config, params)?;
    effective_hamiltonian_of(v.matrix())
}

/// Same as [`effective_hamiltonian`] for a given single-particle product.
pub fn effective_hamiltonian_of(product: &OrthogonalMatrix) -> Result<EffectiveHamiltonian> {
    let lg = orthogonal_log(product)?;
    let half = lg.generator.as_matrix() * 0.5;
    let generator = AntisymmetricMatrix::new(half)?;
    let canonical = antisymmetric_canonical(&generator, 1e-12)?;
    Ok(EffectiveHamiltonian {
        quasienergies: canonical.energies.clone(),
        branch_warning: lg.branch_warning,
        generator,
        canonical,
    })
}

/// Product of the two single-period factors written as separate matrix
/// exponentials, independent of the explicit Floquet rows.
pub fn factor_product(config: &DisorderConfig, params: &ModelParams) -> DMatrix<f64> {
    ising_generator(config, params).exp() * kick_generator(config.sites(), params).exp()
}

/// Which quasiparticle modes are filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase", tag = "rule")]
pub enum Occupation {
    /// Every negative-quasienergy level filled: the ground state of `H_eff`.
    #[default]
    Ground,
    /// Every positive level filled.
    Highest,
    /// `true` flips mode `k` (ascending quasienergy) relative to the ground state.
    Explicit { flips: Vec<bool> },
    /// Independent fair coin per mode.
    Random { seed: u64 },
}

/// Gaussian eigenstate: `M[a, b] = -i <phi|gamma_a gamma_b|phi>`, `a != b`.
#[derive(Debug, Clone)]
pub struct EigenstateCovariance {
    pub m: AntisymmetricMatrix<f64>,
    /// Per-mode sign relative to the ground state.
    pub signs: Vec<f64>,
    /// `<phi|H_eff|phi>`.
    pub energy: f64,
    /// Some mode has `e_k < 1e-9`, so its filling is ambiguous.
    pub degenerate: bool,
}

impl EigenstateCovariance {
    pub fn sites(&self) -> usize {
        self.m.dim() / 2
    }

    /// `max |M M + I|`.
    pub fn purity_defect(&self) -> f64 {
        let m = self.m.as_matrix();
        let n = m.nrows();
        (m * m + DMatrix::<f64>::identity(n, n))
            .iter()
            .fold(0.0, |a, x| a.max(x.abs()))
    }
}

pub fn eigenstate_covariance(
    h: &EffectiveHamiltonian,
    occupation: &Occupation,
) -> Result<EigenstateCovariance> {
    let modes = h.quasienergies.len();
    let signs: Vec<f64> = match occupation {
        Occupation::Ground => vec![1.0; modes],
        Occupation::Highest => vec![-1.0; modes],
        Occupation::Explicit { flips } => {
            if flips.len() != modes {
                return Err(Error::Dimension(format!(
                    "{} occupation flags for {modes} modes",
                    flips.len()
                )));
            }
            flips.iter().map(|&f| if f { -1.0 } else { 1.0 }).collect()
        }
        Occupation::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..modes)
                .map(|_| if rng.random::<bool>() { -1.0 } else { 1.0 })
                .collect()
        }
    };
    let m = h.canonical.assemble(&signs);
    let energy = -0.5
        * h.quasienergies
            .iter()
            .zip(&signs)
            .map(|(e, s)| e * s)
            .sum::<f64>();
    let degenerate = h.quasienergies.iter().any(|&e| e < DEGENERATE_TOL);
    Ok(EigenstateCovariance {
        m: AntisymmetricMatrix::with_tolerance(m, 1e-8)?,
        signs,
        energy,
        degenerate,
    })
}

/// `<phi|(1/4) sum B_ab gamma_a gamma_b|phi> = -(1/4) sum A_ab M_ab`.
pub fn energy_expectation(h: &EffectiveHamiltonian, cov: &EigenstateCovariance) -> f64 {
    -0.25
        * h.generator
            .as_matrix()
            .iter()
            .zip(cov.m.as_matrix().iter())
            .map(|(a, m)| a * m)
            .sum::<f64>()
}

/// Signed `<sigma^z_i sigma^z_j>` for `j = i+1 ..= L` (sites 1-based).
///
/// `sigma^z_i sigma^z_j = prod_{k=i}^{j-1} (i gamma_{2k} gamma_{2k+1})`, so
/// by Wick's theorem the correlator is `(-1)^x pf` of the covariance
/// restricted to `gamma_{2i} .. gamma_{2j-1}`; those are the leading
/// minors of one block, which gives the whole row in one sweep.
fn correlation_row(cov: &EigenstateCovariance, i: usize) -> Vec<f64> {
    let l = cov.sites();
    let start = 2 * i - 1;
    let size = 2 * (l - i);
    if size == 0 {
        return Vec::new();
    }
    let block = cov.m.as_matrix().view((start, start), (size, size)).into_owned();
    leading_pfaffians(&block)
        .into_iter()
        .enumerate()
        .map(|(k, pf)| if k % 2 == 0 { -pf } else { pf })
        .collect()
}

/// `C_x = |<sigma^z_j sigma^z_{j+x}>|` (sites 1-based).
pub fn zz_correlator(cov: &EigenstateCovariance, j: usize, x: usize) -> Result<f64> {
    let l = cov.sites();
    if j == 0 || j + x > l {
        return Err(Error::Parameter(format!(
            "sites {j} and {} outside 1..={l}",
            j + x
        )));
    }
    if x == 0 {
        return Ok(1.0);
    }
    let start = 2 * j - 1;
    let sub = cov
        .m
        .as_matrix()
        .view((start, start), (2 * x, 2 * x))
        .into_owned();
    let pf = crate::linalg::pfaffian(&AntisymmetricMatrix::new(sub)?);
    let v = pf.abs();
    if v > 1.0 + CONSISTENCY_TOL {
        return Err(Error::Consistency(format!("|C_x| = {v} exceeds one")));
    }
    Ok(v)
}

/// Signed `L x L` matrix `<sigma^z_i sigma^z_j>`.
pub fn correlation_matrix(cov: &EigenstateCovariance) -> Result<DMatrix<f64>> {
    let l = cov.sites();
    let mut c = DMatrix::<f64>::identity(l, l);
    for i in 1..l {
        for (k, v) in correlation_row(cov, i).into_iter().enumerate() {
            let j = i + 1 + k;
            if v.abs() > 1.0 + CONSISTENCY_TOL {
                return Err(Error::Consistency(format!(
                    "<zz> between {i} and {j} is {v}"
                )));
            }
            c[(i - 1, j - 1)] = v;
            c[(j - 1, i - 1)] = v;
        }
    }
    Ok(c)
}

/// Largest eigenvalue of a correlation matrix.
pub fn alpha_of(c: &DMatrix<f64>) -> Result<f64> {
    let n = c.nrows();
    if n != c.ncols() || n == 0 {
        return Err(Error::Dimension("correlation matrix must be square".into()));
    }
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (c[(i, j)] - c[(j, i)]).abs())
        .fold(0.0, f64::max);
    if asym > 1e-8 {
        return Err(Error::Consistency(format!(
            "correlation matrix asymmetric by {asym:e}"
        )));
    }
    let eig = SymmetricEigen::new(c.clone());
    Ok(eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Order parameter: largest eigenvalue of the signed correlation matrix.
pub fn order_parameter_alpha(cov: &EigenstateCovariance) -> Result<f64> {
    alpha_of(&correlation_matrix(cov)?)
}

/// `C_x` at `j = ceil((L - x)/2)` for `x = 1 ..= L-1`.
pub fn cx_profile(cov: &EigenstateCovariance) -> Result<Vec<f64>> {
    let l = cov.sites();
    let c = correlation_matrix(cov)?;
    Ok((1..l)
        .map(|x| {
            let j = (l - x).div_ceil(2);
            c[(j - 1, j + x - 1)].abs()
        })
        .collect())
}

/// Per-realization eigenstate observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub alpha: f64,
    pub cx: Vec<f64>,
    pub energy: f64,
    pub branch_warning: bool,
    pub degenerate: bool,
}

pub fn eigen_observables(
    config: &DisorderConfig,
    params: &ModelParams,
    occupation: &Occupation,
) -> Result<EigenRecord> {
    let h = effective_hamiltonian(config, params)?;
    let cov = eigenstate_covariance(&h, occupation)?;
    let c = correlation_matrix(&cov)?;
    let l = params.l;
    let cx = (1..l)
        .map(|x| {
            let j = (l - x).div_ceil(2);
            c[(j - 1, j + x - 1)].abs()
        })
        .collect();
    Ok(EigenRecord {
        alpha: alpha_of(&c)?,
        cx,
        energy: cov.energy,
        branch_warning: h.branch_warning,
        degenerate: cov.degenerate,
    })
}

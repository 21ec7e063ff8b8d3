//! Model parameters, disorder sampling and the logarithmic detuning variable.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Critical kick strength for the default disorder law, where
/// `(pi/2)(1 - g_c) = J_typ`.
pub const G_CRITICAL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of spins.
    pub l: usize,
    /// Kick strength; `g = 1` is a perfect spin flip.
    pub g: f64,
    pub t1: f64,
    pub t2: f64,
    /// Typical coupling, `exp(E[ln J])`.
    pub j_typ: f64,
    /// Standard deviation of `ln J`.
    pub sigma_j: f64,
    /// Coarse-graining window in Floquet periods.
    pub l_t: usize,
    /// Shift every realization so its sample mean of `ln J` equals `ln J_typ`.
    #[serde(default)]
    pub recenter: bool,
}

impl ModelParams {
    pub fn new(l: usize, g: f64) -> Self {
        Self {
            l,
            g,
            ..Self::default()
        }
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 2 {
            return Err(Error::Parameter(format!("L must be >= 2, got {}", self.l)));
        }
        if self.l_t < 1 {
            return Err(Error::Parameter("L_t must be >= 1".into()));
        }
        if !(self.sigma_j >= 0.0) || !self.sigma_j.is_finite() {
            return Err(Error::Parameter(format!(
                "sigma_J must be finite and >= 0, got {}",
                self.sigma_j
            )));
        }
        if !(self.j_typ > 0.0) || !self.j_typ.is_finite() {
            return Err(Error::Parameter(format!(
                "J_typ must be finite and > 0, got {}",
                self.j_typ
            )));
        }
        if !(0.0..=1.0).contains(&self.g) {
            return Err(Error::Parameter(format!("g must lie in [0, 1], got {}", self.g)));
        }
        if !(self.t1 > 0.0 && self.t2 > 0.0) {
            return Err(Error::Parameter("t1 and t2 must be positive".into()));
        }
        Ok(())
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            l: 20,
            g: G_CRITICAL,
            t1: 1.0,
            t2: 1.0,
            j_typ: 0.05 * PI,
            sigma_j: 0.2 * PI,
            l_t: 10,
            recenter: false,
        }
    }
}

/// One realization of the Ising couplings on an open chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderConfig {
    pub couplings: Vec<f64>,
    pub seed: u64,
    pub index: u64,
}

impl DisorderConfig {
    /// Explicit couplings, for limits and tests. Zero couplings are allowed
    /// here (decoupled bonds); sampled realizations are always positive.
    pub fn from_couplings(couplings: Vec<f64>) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::Parameter("need at least one bond".into()));
        }
        if let Some(bad) = couplings.iter().find(|j| !(j.is_finite() && **j >= 0.0)) {
            return Err(Error::Parameter(format!("coupling {bad} is not finite and >= 0")));
        }
        Ok(Self {
            couplings,
            seed: 0,
            index: 0,
        })
    }

    pub fn uniform(l: usize, j: f64) -> Result<Self> {
        Self::from_couplings(vec![j; l.saturating_sub(1)])
    }

    pub fn sites(&self) -> usize {
        self.couplings.len() + 1
    }
}

/// Standard normal deviate for slot `j` of stream `(seed, index)`.
///
/// ChaCha is used as a counter-based generator: each slot reads a fixed pair
/// of words at a fixed offset, so a coupling never depends on how many other
/// couplings were drawn, or in which order.
fn normal_at(rng: &mut ChaCha8Rng, j: u64) -> f64 {
    rng.set_word_pos(4 * j as u128);
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Draws `L - 1` lognormal couplings: `ln J_j ~ Normal(ln J_typ, sigma_J)`.
pub fn sample_disorder(params: &ModelParams, seed: u64, index: u64) -> Result<DisorderConfig> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let bonds = params.l - 1;
    let z: Vec<f64> = (0..bonds as u64).map(|j| normal_at(&mut rng, j)).collect();
    let shift = if params.recenter {
        z.iter().sum::<f64>() / bonds as f64
    } else {
        0.0
    };
    let couplings = z
        .iter()
        .map(|zj| params.j_typ * (params.sigma_j * (zj - shift)).exp())
        .collect();
    Ok(DisorderConfig {
        couplings,
        seed,
        index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMode {
    /// `(ln[(pi/2)(1-g)] - ln J_typ) / sigma_J^2`, which vanishes at `g_c`.
    #[default]
    Corrected,
    /// `(ln[(pi/2) g] - ln J_typ) / sigma_J^2`, kept for comparison runs.
    Literal,
}

/// Logarithmic detuning from the critical point, positive on the paramagnetic side.
pub fn scaling_delta(g: f64, params: &ModelParams, mode: DeltaMode) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::Parameter(format!("g must lie in (0, 1), got {g}")));
    }
    if !(params.sigma_j > 0.0) {
        return Err(Error::Parameter("delta needs sigma_J > 0".into()));
    }
    let field = match mode {
        DeltaMode::Corrected => FRAC_PI_2 * (1.0 - g),
        DeltaMode::Literal => FRAC_PI_2 * g,
    };
    if field <= 0.0 {
        return Err(Error::SingularArgument(format!("log of zero field at g = {g}")));
    }
    Ok((field.ln() - params.j_typ.ln()) / (params.sigma_j * params.sigma_j))
}

//! Resampling of disorder realizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const MIN_RESAMPLES: usize = 20;
pub const DEFAULT_RESAMPLES: usize = 500;

/// Outcome of a bootstrap run.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapErrors {
    /// Sample standard deviation of each parameter across resamples.
    pub errors: Vec<f64>,
    /// Resamples whose refit failed; they are left out.
    pub failed: usize,
}

/// Draws `resamples` sets of realization indices (with replacement,
/// independently per group of size `group_sizes[k]`) and hands each set to
/// `refit`. Resample `r` uses its own generator stream, so results do not
/// depend on scheduling.
pub fn bootstrap_errors<F>(
    group_sizes: &[usize],
    resamples: usize,
    seed: u64,
    refit: F,
) -> Result<BootstrapErrors>
where
    F: Fn(&[Vec<usize>]) -> Result<Vec<f64>> + Sync,
{
    if resamples < MIN_RESAMPLES {
        return Err(Error::InsufficientResamples(resamples));
    }
    if group_sizes.iter().any(|&n| n == 0) {
        return Err(Error::Parameter("empty resampling group".into()));
    }
    let outcomes: Vec<Result<Vec<f64>>> = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let picks: Vec<Vec<usize>> = group_sizes
                .iter()
                .map(|&n| (0..n).map(|_| rng.random_range(0..n)).collect())
                .collect();
            refit(&picks)
        })
        .collect();
    let ok: Vec<Vec<f64>> = outcomes.iter().filter_map(|o| o.as_ref().ok().cloned()).collect();
    let failed = resamples - ok.len();
    if ok.len() < 2 {
        return Err(Error::FitFailure(format!(
            "only {} of {resamples} bootstrap refits succeeded",
            ok.len()
        )));
    }
    let dim = ok[0].len();
    let n = ok.len() as f64;
    let errors = (0..dim)
        .map(|k| {
            let mean = ok.iter().map(|v| v[k]).sum::<f64>() / n;
            (ok.iter().map(|v| (v[k] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        })
        .collect();
    Ok(BootstrapErrors { errors, failed })
}

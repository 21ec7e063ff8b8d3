//! Spin expectation values from Gaussian data, the coarse-grained staggered
//! autocorrelation and disorder averages.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{leading_pfaffians_in_place, pfaffian_in_place, C64};
use crate::majorana::{build_floquet_matrix, build_initial_state, FloquetMatrix, GaussianState};
use crate::model::{DisorderConfig, ModelParams};

const CONSISTENCY_TOL: f64 = 1e-6;

/// Values below this are raised to it before typical averaging.
pub const TYPICAL_FLOOR: f64 = 1e-12;

fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn checked(v: f64, j: usize) -> Result<f64> {
    if v.abs() > 1.0 + CONSISTENCY_TOL || !v.is_finite() {
        return Err(Error::Consistency(format!("<sigma^z_{j}> = {v} out of range")));
    }
    Ok(v)
}

/// Neel eigenvalue of `sigma^z_j` at time zero, `j` 1-based.
pub fn neel_sign(j: usize) -> f64 {
    if j % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `<sigma^z_j>` in the Neel state for one site (1-based) from the
/// Pfaffian of the `2j x 2j` matrix over `gamma_1 .. gamma_{2j-1}, eta^dag`.
pub fn site_sz(state: &GaussianState, j: usize) -> Result<f64> {
    let l = state.sites();
    if j == 0 || j > l {
        return Err(Error::Parameter(format!("site {j} outside 1..={l}")));
    }
    let n = 2 * j;
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            m[a * n + b] = C64::new(0.0, state.g[(a, b)]);
        }
        m[a * n + n - 1] = state.c[a];
        m[(n - 1) * n + a] = -state.c[a];
    }
    let pf = pfaffian_in_place(&mut m, n);
    checked((state.beta * i_pow(j + 1) * pf).re, j)
}

/// `<sigma^z_j>` for every site at once.
///
/// The Jordan-Wigner string of site `j` equals, up to a phase, the parity
/// operator times the complementary string `gamma_{2j} .. gamma_{2L}`. Since
/// `|0>` is parity even, every site reduces to a trailing Pfaffian of one
/// fixed matrix over `gamma_2 .. gamma_{2L}, eta^dag`, and all of those come
/// out of a single elimination of the reversed matrix.
pub fn sz_profile(state: &GaussianState) -> Result<Vec<f64>> {
    let l = state.sites();
    let n = 2 * l;
    // w in the order (gamma_2, ..., gamma_2L, eta^dag), then reversed
    let entry = |a: usize, b: usize| -> C64 {
        match (a == n - 1, b == n - 1) {
            (false, false) => C64::new(0.0, state.g[(a + 1, b + 1)]),
            (false, true) => state.c[a + 1],
            (true, false) => -state.c[b + 1],
            (true, true) => C64::new(0.0, 0.0),
        }
    };
    let mut r = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            r.push(entry(n - 1 - p, n - 1 - q));
        }
    }
    let lead = leading_pfaffians_in_place(&mut r, n);
    (1..=l)
        .map(|j| {
            let amp = i_pow(l + j - 1) * lead[l - j];
            checked((state.beta * amp).re, j)
        })
        .collect()
}

/// `<sigma^z_j(n)>` starting from `state0`.
pub fn local_sz(state0: &GaussianState, v: &FloquetMatrix, j: usize, n: u64) -> Result<f64> {
    site_sz(&state0.evolve(v, n)?, j)
}

/// `<sigma^z_j(n) sigma^z_j(0)>`, which for the Neel state is the Neel sign
/// times `<sigma^z_j(n)>`.
pub fn autocorrelation(state0: &GaussianState, v: &FloquetMatrix, j: usize, n: u64) -> Result<f64> {
    Ok(neel_sign(j) * local_sz(state0, v, j, n)?)
}

/// Staggered, site-averaged autocorrelation
/// `(1/L) sum_j s_j <sigma^z_j(n)> (-1)^n` at every requested period.
pub fn staggered_series(
    state0: &GaussianState,
    v: &FloquetMatrix,
    periods: &BTreeSet<u64>,
) -> Result<Vec<(u64, f64)>> {
    let l = state0.sites();
    let mut out = Vec::with_capacity(periods.len());
    let mut s = state0.clone();
    for &n in periods {
        while s.periods < n {
            s = s.step(v);
        }
        let prof = sz_profile(&s)?;
        let sum: f64 = prof
            .iter()
            .enumerate()
            .map(|(k, z)| neel_sign(k + 1) * z)
            .sum();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        out.push((n, sign * sum / l as f64));
    }
    Ok(out)
}

/// Periods `T+1 ..= T+L_t` for every `T` in the grid.
pub fn window_periods(t_grid: &[u64], l_t: usize) -> BTreeSet<u64> {
    t_grid
        .iter()
        .flat_map(|&t| (t + 1)..=(t + l_t as u64))
        .collect()
}

/// `O(T)` from a precomputed staggered series.
pub fn coarse_grain(series: &[(u64, f64)], t: u64, l_t: usize) -> f64 {
    let lo = t + 1;
    let hi = t + l_t as u64;
    let sum: f64 = series
        .iter()
        .filter(|(n, _)| (lo..=hi).contains(n))
        .map(|(_, s)| s)
        .sum();
    (sum / l_t as f64).abs()
}

/// `O(T) = |sum_j sum_{n=T+1}^{T+L_t} s_j <sigma^z_j(n)> (-1)^n| / (L L_t)`.
#[allow(non_snake_case)]
pub fn coarse_grained_O(
    state0: &GaussianState,
    v: &FloquetMatrix,
    t: u64,
    l_t: usize,
) -> Result<f64> {
    let periods = window_periods(&[t], l_t);
    let series = staggered_series(state0, v, &periods)?;
    Ok(coarse_grain(&series, t, l_t))
}

/// `O(T, J)` on a time grid for one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub l: usize,
    pub g: f64,
    pub index: u64,
    pub l_t: usize,
    pub t: Vec<u64>,
    pub o: Vec<f64>,
}

/// Simulates one realization from the Neel state and records `O(T)` on the grid.
pub fn trajectory(
    config: &DisorderConfig,
    params: &ModelParams,
    t_grid: &[u64],
) -> Result<TrajectoryRecord> {
    let v = build_floquet_matrix(config, params)?;
    let s0 = build_initial_state(config, params)?;
    let series = staggered_series(&s0, &v, &window_periods(t_grid, params.l_t))?;
    let o = t_grid
        .iter()
        .map(|&t| coarse_grain(&series, t, params.l_t).min(1.0))
        .collect();
    Ok(TrajectoryRecord {
        l: params.l,
        g: params.g,
        index: config.index,
        l_t: params.l_t,
        t: t_grid.to_vec(),
        o,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMode {
    #[default]
    Mean,
    Typical,
}

impl std::str::FromStr for AverageMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Self::Mean),
            "typical" => Ok(Self::Typical),
            other => Err(Error::Parameter(format!("unknown average mode `{other}`"))),
        }
    }
}

/// Arithmetic mean or `exp(mean(ln v))`.
pub fn ensemble_average(values: &[f64], mode: AverageMode) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Parameter("empty ensemble".into()));
    }
    let n = values.len() as f64;
    match mode {
        AverageMode::Mean => Ok(values.iter().sum::<f64>() / n),
        AverageMode::Typical => {
            if let Some(bad) = values.iter().find(|v| !(**v > 0.0)) {
                return Err(Error::Domain(format!(
                    "typical average of non-positive value {bad}"
                )));
            }
            Ok((values.iter().map(|v| v.ln()).sum::<f64>() / n).exp())
        }
    }
}

/// Disorder average with values floored at [`TYPICAL_FLOOR`] in typical mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlooredAverage {
    pub value: f64,
    pub floored: usize,
}

pub fn floored_average(values: &[f64], mode: AverageMode) -> Result<FlooredAverage> {
    match mode {
        AverageMode::Mean => Ok(FlooredAverage {
            value: ensemble_average(values, mode)?,
            floored: 0,
        }),
        AverageMode::Typical => {
            let floored = values.iter().filter(|v| !(**v >= TYPICAL_FLOOR)).count();
            let clipped: Vec<f64> = values.iter().map(|v| v.max(TYPICAL_FLOOR)).collect();
            Ok(FlooredAverage {
                value: ensemble_average(&clipped, mode)?,
                floored,
            })
        }
    }
}

/// Dense copy of `G` restricted to the first `k` Majoranas, for callers that
/// want to inspect the matrices behind [`site_sz`].
pub fn leading_block(state: &GaussianState, k: usize) -> DMatrix<f64> {
    state.g.view((0, 0), (k, k)).into_owned()
}

//! Least-squares fit of `a1 exp(-T/tau) + a2`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|a1|` below this means there is no decaying component.
pub const DEGENERATE_AMPLITUDE: f64 = 1e-3;
const MAX_ITER: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationFit {
    pub a1: f64,
    pub a2: f64,
    pub tau: f64,
    /// Sum of squared residuals.
    pub sse: f64,
    /// `(T_min, T_max)` of the fitted points.
    pub window: (f64, f64),
    pub degenerate: bool,
    /// False when the iteration budget ran out; the record is still returned.
    pub converged: bool,
    pub iterations: usize,
}

fn model(p: &Vector3<f64>, t: f64) -> (f64, Vector3<f64>) {
    // p = (a1, a2, ln tau)
    let tau = p[2].exp();
    let e = (-t / tau).exp();
    (p[0] * e + p[1], Vector3::new(e, 1.0, p[0] * e * t / tau))
}

fn sse(p: &Vector3<f64>, t: &[f64], o: &[f64]) -> f64 {
    t.iter()
        .zip(o)
        .map(|(&ti, &oi)| (oi - model(p, ti).0).powi(2))
        .sum()
}

/// Levenberg-Marquardt in `(a1, a2, ln tau)` from the standard starting
/// point: `a2` = mean of the last quartile, `a1` = first value minus `a2`,
/// `tau` = window span / 4. Points are weighted uniformly.
pub fn fit_relaxation(t: &[f64], o: &[f64]) -> Result<RelaxationFit> {
    if t.len() != o.len() {
        return Err(Error::Dimension(format!(
            "{} times and {} values",
            t.len(),
            o.len()
        )));
    }
    if t.len() < 8 {
        return Err(Error::Parameter(format!(
            "relaxation fit needs at least 8 points, got {}",
            t.len()
        )));
    }
    if let Some(bad) = o.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Parameter(format!("value {bad} outside [0, 1]")));
    }
    let (tmin, tmax) = t
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(tmax > tmin) {
        return Err(Error::Parameter("time window has zero span".into()));
    }
    let mut idx: Vec<usize> = (0..t.len()).collect();
    idx.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
    let q = (t.len() / 4).max(1);
    let a2 = idx[t.len() - q..].iter().map(|&k| o[k]).sum::<f64>() / q as f64;
    let a1 = o[idx[0]] - a2;
    let mut p = Vector3::new(a1, a2, ((tmax - tmin) / 4.0).ln());

    let mut cost = sse(&p, t, o);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for (&ti, &oi) in t.iter().zip(o) {
            let (f, grad) = model(&p, ti);
            jtj += grad * grad.transpose();
            jtr += grad * (oi - f);
        }
        if jtr.amax() < 1e-300 || cost < 1e-30 {
            converged = true;
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut damped = jtj;
            for k in 0..3 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let c = sse(&trial, t, o);
            if c.is_finite() && c <= cost {
                let small = step.amax() <= 1e-13 * (1.0 + p.amax());
                let flat = cost - c <= 1e-16 * cost;
                p = trial;
                cost = c;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if small || flat {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left at machine precision: a minimum
            converged = true;
        }
        if converged {
            break;
        }
    }
    let tau = p[2].exp();
    Ok(RelaxationFit {
        a1: p[0],
        a2: p[1],
        tau,
        sse: cost,
        window: (tmin, tmax),
        degenerate: p[0].abs() < DEGENERATE_AMPLITUDE,
        converged,
        iterations,
    })
}

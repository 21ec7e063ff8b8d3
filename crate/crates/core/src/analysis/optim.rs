//! Small derivative-free minimizer used by the collapse fits.

/// Result of a Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead with standard coefficients, started from an axis-aligned
/// simplex of edge `step[i]`. Coordinates are clamped into `bounds`.
pub fn nelder_mead<F>(
    f: F,
    x0: &[f64],
    step: &[f64],
    bounds: &[(f64, f64)],
    xtol: f64,
    max_eval: usize,
) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *xi = xi.clamp(lo, hi);
        }
    };
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    clamp(&mut start);
    simplex.push(start.clone());
    for i in 0..n {
        let mut p = start.clone();
        p[i] += step[i];
        if p[i] > bounds[i].1 {
            p[i] = start[i] - step[i];
        }
        clamp(&mut p);
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p)).collect();
    let mut converged = false;

    while evals.get() < max_eval {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = simplex[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread < xtol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect();
            clamp(&mut p);
            p
        };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=n {
            let p: Vec<f64> = simplex[i]
                .iter()
                .zip(&simplex[0])
                .map(|(x, b)| b + 0.5 * (x - b))
                .collect();
            values[i] = eval(&p);
            simplex[i] = p;
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evaluations: evals.get(),
        converged,
    }
}

/// Evaluates `f` on a tensor grid and returns the best point and the finite
/// range `(min, max)` of values seen.
pub fn grid_search<F>(f: F, axes: &[Vec<f64>]) -> (Vec<f64>, f64, (f64, f64))
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    use rayon::prelude::*;
    let total: usize = axes.iter().map(|a| a.len()).product();
    let point = |mut k: usize| -> Vec<f64> {
        let mut p = vec![0.0; axes.len()];
        for (d, ax) in axes.iter().enumerate().rev() {
            p[d] = ax[k % ax.len()];
            k /= ax.len();
        }
        p
    };
    let values: Vec<f64> = (0..total).into_par_iter().map(|k| f(&point(k))).collect();
    let mut best = 0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, &v) in values.iter().enumerate() {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
            if v < values[best] || !values[best].is_finite() {
                best = k;
            }
        }
    }
    (point(best), values[best], (lo, hi))
}

/// `n` evenly spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], &[(-5.0, 5.0), (-5.0, 5.0)], 1e-10, 20_000);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2);
        let m = nelder_mead(f, &[0.0], &[0.5], &[(-1.0, 1.0)], 1e-10, 1000);
        assert!((m.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_finds_cell() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] + 0.2).powi(2);
        let (p, v, (lo, hi)) = grid_search(f, &[linspace(-1.0, 1.0, 21), linspace(-1.0, 1.0, 21)]);
        assert!((p[0] - 0.3).abs() < 1e-12 && (p[1] + 0.2).abs() < 1e-12);
        assert!(v < 1e-20);
        assert_eq!(lo, v);
        assert!(hi > 1.0);
    }
}

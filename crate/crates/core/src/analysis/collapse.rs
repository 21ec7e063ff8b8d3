//! Finite-size-scaling data collapse.
//!
//! Quality of collapse is measured against a master curve fitted locally:
//! for every point, each other system size contributes the points around
//! it in the scaling variable (the bracketing pair and one neighbour on each
//! side), a low-order polynomial is fitted through them and the squared
//! residual of the point is accumulated.
//! The objective is the residual sum divided by the total sum of squares of
//! the rescaled values, which makes it invariant under rescaling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::optim::{grid_search, linspace, nelder_mead};
use crate::error::{Error, Result};

/// One disorder-averaged value of `alpha` (or any single-time observable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub l: usize,
    pub g: f64,
    pub value: f64,
}

/// One disorder-averaged value of `O(T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub l: usize,
    pub g: f64,
    pub t: f64,
    pub value: f64,
}

/// `(ln[(pi/2)(1-g)] - ln J_typ) / sigma^2` written relative to the critical
/// point, `ln[(1-g)/(1-g_c)] / sigma^2`; identical when `g_c = 1 - 2 J_typ / pi`.
pub fn detuning(g: f64, g_c: f64, sigma_j: f64) -> f64 {
    ((1.0 - g) / (1.0 - g_c)).ln() / (sigma_j * sigma_j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseMode {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFitResult {
    pub mode: CollapseMode,
    pub g_c: f64,
    pub nu: f64,
    pub a: Option<f64>,
    pub beta: Option<f64>,
    pub b: Option<f64>,
    pub t0: Option<f64>,
    pub objective: f64,
    /// Bootstrap standard errors keyed by parameter name.
    pub errors: BTreeMap<String, f64>,
    /// Objective flat over the search grid, or optimum on its edge.
    pub unidentifiable: bool,
    /// `T0` pinned at a bound of its search interval.
    pub boundary_warning: bool,
    pub points: usize,
}

impl ScalingFitResult {
    /// Fitted parameters in the order used by the bootstrap.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match self.mode {
            CollapseMode::OneD => vec![("a", self.a.unwrap_or(f64::NAN)), ("nu", self.nu)],
            CollapseMode::TwoD => vec![
                ("beta", self.beta.unwrap_or(f64::NAN)),
                ("b", self.b.unwrap_or(f64::NAN)),
                ("t0", self.t0.unwrap_or(f64::NAN)),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collapse1dOptions {
    pub g_c: f64,
    pub sigma_j: f64,
    pub a_range: (f64, f64),
    pub nu_range: (f64, f64),
    pub grid: (usize, usize),
    /// Also optimize `g_c` within this interval.
    pub free_gc: Option<(f64, f64)>,
}

impl Default for Collapse1dOptions {
    fn default() -> Self {
        Self {
            g_c: crate::model::G_CRITICAL,
            sigma_j: 0.2 * std::f64::consts::PI,
            a_range: (-1.5, 1.5),
            nu_range: (0.3, 6.0),
            grid: (61, 58),
            free_gc: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collapse2dOptions {
    pub nu: f64,
    pub g_c: f64,
    pub sigma_j: f64,
    pub beta_range: (f64, f64),
    pub b_range: (f64, f64),
    /// Lower bound for `T0`; the upper bound is the smallest time in the data.
    pub t0_min: f64,
    pub grid: (usize, usize, usize),
}

impl Default for Collapse2dOptions {
    fn default() -> Self {
        Self {
            nu: 2.0,
            g_c: crate::model::G_CRITICAL,
            sigma_j: 0.2 * std::f64::consts::PI,
            beta_range: (-1.0, 2.0),
            b_range: (0.05, 1.5),
            t0_min: 0.1,
            grid: (31, 30, 12),
        }
    }
}

/// Below this relative spread over the grid the objective counts as flat.
const FLAT_TOL: f64 = 1e-3;

/// Local least-squares polynomial through `pts` evaluated at `x`: quadratic
/// when at least four points with three distinct abscissae are available,
/// linear otherwise.
fn local_fit(pts: &[(f64, f64)], x: f64) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let scale = pts.iter().map(|p| (p.0 - x).abs()).fold(0.0, f64::max);
    if scale <= 1e-300 {
        return Some(pts.iter().map(|p| p.1).sum::<f64>() / n);
    }
    let mut distinct: Vec<f64> = pts.iter().map(|p| p.0).collect();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    let degree = if pts.len() >= 4 && distinct.len() >= 3 { 2 } else { 1 };
    if distinct.len() < 2 {
        return Some(pts.iter().map(|p| p.1).sum::<f64>() / n);
    }
    // normal equations in t = (p - x) / scale; the value at x is the constant term
    let m = degree + 1;
    let mut ata = nalgebra::DMatrix::<f64>::zeros(m, m);
    let mut atb = nalgebra::DVector::<f64>::zeros(m);
    for &(px, py) in pts {
        let t = (px - x) / scale;
        let basis = [1.0, t, t * t];
        for r in 0..m {
            atb[r] += basis[r] * py;
            for c in 0..m {
                ata[(r, c)] += basis[r] * basis[c];
            }
        }
    }
    ata.lu().solve(&atb).map(|coef| coef[0])
}

/// Points `k-1 ..= k+2` around a bracket `(k, k+1)`, clipped to the slice.
fn neighbourhood(len: usize, k: usize) -> std::ops::Range<usize> {
    k.saturating_sub(1)..(k + 3).min(len)
}

/// Quadratic interpolation of `(xs, vs)` at `x` inside bracket `k`.
fn interpolate(xs: &[f64], vs: &[f64], k: usize, x: f64) -> f64 {
    if xs.len() < 3 {
        let w = if xs[k + 1] > xs[k] { (x - xs[k]) / (xs[k + 1] - xs[k]) } else { 0.0 };
        return vs[k] + w * (vs[k + 1] - vs[k]);
    }
    // three nodes: the bracket plus the nearer outside neighbour
    let s = if k == 0 {
        0
    } else if k + 2 >= xs.len() {
        xs.len() - 3
    } else if (x - xs[k - 1]).abs() <= (xs[k + 2] - x).abs() {
        k - 1
    } else {
        k
    };
    let (x0, x1, x2) = (xs[s], xs[s + 1], xs[s + 2]);
    if !(x1 > x0 && x2 > x1) {
        let w = if xs[k + 1] > xs[k] { (x - xs[k]) / (xs[k + 1] - xs[k]) } else { 0.0 };
        return vs[k] + w * (vs[k + 1] - vs[k]);
    }
    let l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
    vs[s] * l0 + vs[s + 1] * l1 + vs[s + 2] * l2
}

/// Indices `(k, k+1)` with `xs[k] <= x <= xs[k+1]` in an ascending slice.
fn bracket(xs: &[f64], x: f64) -> Option<usize> {
    if xs.len() < 2 || x < xs[0] || x > xs[xs.len() - 1] {
        return None;
    }
    let k = xs.partition_point(|&v| v <= x);
    Some(k.saturating_sub(1).min(xs.len() - 2))
}

fn normalized_residual(res: &[(f64, f64)], min_points: usize) -> f64 {
    // res holds (value, prediction)
    if res.len() < min_points {
        return f64::INFINITY;
    }
    let n = res.len() as f64;
    let mean = res.iter().map(|r| r.0).sum::<f64>() / n;
    let tss: f64 = res.iter().map(|r| (r.0 - mean).powi(2)).sum();
    let rss: f64 = res.iter().map(|r| (r.0 - r.1).powi(2)).sum();
    if tss <= 0.0 {
        return if rss <= 0.0 { 0.0 } else { f64::INFINITY };
    }
    rss / tss
}

/// Rows grouped by size, deduplicated and sorted by `g` descending (so the
/// detuning ascends).
fn group_1d(data: &[ScalingPoint]) -> Vec<(usize, Vec<(f64, f64)>)> {
    let mut map: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for p in data {
        map.entry(p.l).or_default().push((p.g, p.value));
    }
    map.into_iter()
        .map(|(l, mut v)| {
            v.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
            v.dedup();
            (l, v)
        })
        .collect()
}

/// Collapse objective for `alpha = L^{-a} f(delta L^{1/nu})`.
pub struct Objective1d {
    groups: Vec<(usize, Vec<(f64, f64)>)>,
    sigma_j: f64,
    points: usize,
}

impl Objective1d {
    pub fn new(data: &[ScalingPoint], sigma_j: f64) -> Self {
        let groups = group_1d(data);
        let points = groups.iter().map(|g| g.1.len()).sum();
        Self {
            groups,
            sigma_j,
            points,
        }
    }

    /// Rescaled `(L, g, u, v)` for every point.
    pub fn coordinates(&self, a: f64, nu: f64, g_c: f64) -> Vec<(usize, f64, f64, f64)> {
        self.groups
            .iter()
            .flat_map(|(l, rows)| {
                let lf = *l as f64;
                rows.iter().map(move |&(g, v)| {
                    (
                        *l,
                        g,
                        detuning(g, g_c, self.sigma_j) * lf.powf(1.0 / nu),
                        v * lf.powf(a),
                    )
                })
            })
            .collect()
    }

    pub fn value(&self, a: f64, nu: f64, g_c: f64) -> f64 {
        if !(nu > 0.0) || !(g_c < 1.0) {
            return f64::INFINITY;
        }
        let scaled: Vec<(Vec<f64>, Vec<f64>)> = self
            .groups
            .iter()
            .map(|(l, rows)| {
                let lf = *l as f64;
                let s = lf.powf(1.0 / nu);
                let m = lf.powf(a);
                (
                    rows.iter()
                        .map(|&(g, _)| detuning(g, g_c, self.sigma_j) * s)
                        .collect(),
                    rows.iter().map(|&(_, v)| v * m).collect(),
                )
            })
            .collect();
        let mut res = Vec::with_capacity(self.points);
        let mut near = Vec::new();
        for (gi, (us, vs)) in scaled.iter().enumerate() {
            for (&u, &v) in us.iter().zip(vs) {
                near.clear();
                for (gj, (uo, vo)) in scaled.iter().enumerate() {
                    if gj == gi {
                        continue;
                    }
                    if let Some(k) = bracket(uo, u) {
                        for q in neighbourhood(uo.len(), k) {
                            near.push((uo[q], vo[q]));
                        }
                    }
                }
                if let Some(pred) = local_fit(&near, u) {
                    res.push((v, pred));
                }
            }
        }
        normalized_residual(&res, (self.points / 3).max(3))
    }
}

fn check_1d(data: &[ScalingPoint]) -> Result<()> {
    let groups = group_1d(data);
    if groups.len() < 3 {
        return Err(Error::Parameter(format!(
            "collapse needs at least 3 system sizes, got {}",
            groups.len()
        )));
    }
    let mut gs: Vec<f64> = data.iter().map(|p| p.g).collect();
    gs.sort_by(|a, b| a.total_cmp(b));
    gs.dedup();
    if gs.len() < 5 {
        return Err(Error::Parameter(format!(
            "collapse needs at least 5 g values, got {}",
            gs.len()
        )));
    }
    if data.iter().any(|p| !p.value.is_finite() || p.g >= 1.0) {
        return Err(Error::Parameter("non-finite value or g >= 1".into()));
    }
    Ok(())
}

fn near_edge(x: f64, (lo, hi): (f64, f64)) -> bool {
    let tol = 1e-3 * (hi - lo);
    x <= lo + tol || x >= hi - tol
}

/// Fits `(a, nu)` (and optionally `g_c`) by grid search and Nelder-Mead.
pub fn collapse_1d(data: &[ScalingPoint], opts: &Collapse1dOptions) -> Result<ScalingFitResult> {
    check_1d(data)?;
    let obj = Objective1d::new(data, opts.sigma_j);
    let axes = vec![
        linspace(opts.a_range.0, opts.a_range.1, opts.grid.0),
        linspace(opts.nu_range.0, opts.nu_range.1, opts.grid.1),
    ];
    let (start, _, (lo, hi)) = grid_search(|p| obj.value(p[0], p[1], opts.g_c), &axes);
    let flat = !(hi.is_finite() && hi > 0.0) || (hi - lo) / hi < FLAT_TOL;
    let da = (opts.a_range.1 - opts.a_range.0) / (opts.grid.0 - 1).max(1) as f64;
    let dn = (opts.nu_range.1 - opts.nu_range.0) / (opts.grid.1 - 1).max(1) as f64;
    let (x, value) = match opts.free_gc {
        None => {
            let m = nelder_mead(
                |p| obj.value(p[0], p[1], opts.g_c),
                &start,
                &[da, dn],
                &[opts.a_range, opts.nu_range],
                1e-9,
                4000,
            );
            (vec![m.x[0], m.x[1], opts.g_c], m.value)
        }
        Some(gr) => {
            let m = nelder_mead(
                |p| obj.value(p[0], p[1], p[2]),
                &[start[0], start[1], opts.g_c.clamp(gr.0, gr.1)],
                &[da, dn, 0.2 * (gr.1 - gr.0)],
                &[opts.a_range, opts.nu_range, gr],
                1e-9,
                8000,
            );
            (m.x.clone(), m.value)
        }
    };
    let unidentifiable =
        flat || near_edge(x[1], opts.nu_range) || near_edge(x[0], opts.a_range);
    Ok(ScalingFitResult {
        mode: CollapseMode::OneD,
        g_c: x[2],
        nu: x[1],
        a: Some(x[0]),
        beta: None,
        b: None,
        t0: None,
        objective: value,
        errors: BTreeMap::new(),
        unidentifiable,
        boundary_warning: false,
        points: obj.points,
    })
}

/// Refit of a 1d collapse started from a previous optimum, for bootstrap.
pub fn refit_1d(data: &[ScalingPoint], opts: &Collapse1dOptions, from: &ScalingFitResult) -> Result<Vec<f64>> {
    let obj = Objective1d::new(data, opts.sigma_j);
    let da = (opts.a_range.1 - opts.a_range.0) / (opts.grid.0 - 1).max(1) as f64;
    let dn = (opts.nu_range.1 - opts.nu_range.0) / (opts.grid.1 - 1).max(1) as f64;
    let m = nelder_mead(
        |p| obj.value(p[0], p[1], from.g_c),
        &[from.a.unwrap_or(0.0), from.nu],
        &[da, dn],
        &[opts.a_range, opts.nu_range],
        1e-9,
        4000,
    );
    if !m.value.is_finite() {
        return Err(Error::FitFailure("collapse objective undefined".into()));
    }
    Ok(m.x)
}

struct Curve {
    x: f64,
    /// `(ln T, value)` ascending in `T`
    pts: Vec<(f64, f64)>,
}

/// Collapse objective for `O = L^{-beta/nu} F(delta L^{1/nu}, ln(T/T0) L^{-b})`.
pub struct Objective2d {
    /// per size: curves sorted by `x`
    sizes: Vec<(usize, Vec<Curve>)>,
    nu: f64,
    points: usize,
    t_min: f64,
}

impl Objective2d {
    pub fn new(data: &[SurfacePoint], nu: f64, g_c: f64, sigma_j: f64) -> Self {
        let mut map: BTreeMap<usize, BTreeMap<u64, Vec<(f64, f64)>>> = BTreeMap::new();
        for p in data {
            map.entry(p.l)
                .or_default()
                .entry(p.g.to_bits())
                .or_default()
                .push((p.t, p.value));
        }
        let mut points = 0;
        let sizes = map
            .into_iter()
            .map(|(l, curves)| {
                let s = (l as f64).powf(1.0 / nu);
                let mut cs: Vec<Curve> = curves
                    .into_iter()
                    .map(|(gb, mut pts)| {
                        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
                        pts.dedup();
                        points += pts.len();
                        Curve {
                            x: detuning(f64::from_bits(gb), g_c, sigma_j) * s,
                            pts: pts.into_iter().map(|(t, v)| (t.ln(), v)).collect(),
                        }
                    })
                    .collect();
                cs.sort_by(|a, b| a.x.total_cmp(&b.x));
                (l, cs)
            })
            .collect();
        let t_min = data.iter().map(|p| p.t).fold(f64::INFINITY, f64::min);
        Self {
            sizes,
            nu,
            points,
            t_min,
        }
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn value(&self, beta: f64, b: f64, ln_t0: f64) -> f64 {
        // y = (ln T - ln T0) L^-b, v = O L^(beta/nu)
        struct Scaled {
            x: f64,
            y: Vec<f64>,
            v: Vec<f64>,
        }
        let scaled: Vec<Vec<Scaled>> = self
            .sizes
            .iter()
            .map(|(l, curves)| {
                let lf = *l as f64;
                let sy = lf.powf(-b);
                let sv = lf.powf(beta / self.nu);
                curves
                    .iter()
                    .map(|c| Scaled {
                        x: c.x,
                        y: c.pts.iter().map(|p| (p.0 - ln_t0) * sy).collect(),
                        v: c.pts.iter().map(|p| p.1 * sv).collect(),
                    })
                    .collect()
            })
            .collect();
        let mut res = Vec::with_capacity(self.points);
        let mut cand: Vec<(f64, f64)> = Vec::new();
        let mut near: Vec<(f64, f64)> = Vec::new();
        for (si, curves) in scaled.iter().enumerate() {
            for c in curves {
                for (&y, &v) in c.y.iter().zip(&c.v) {
                    near.clear();
                    for (sj, other) in scaled.iter().enumerate() {
                        if sj == si {
                            continue;
                        }
                        cand.clear();
                        for oc in other {
                            if let Some(k) = bracket(&oc.y, y) {
                                cand.push((oc.x, interpolate(&oc.y, &oc.v, k, y)));
                            }
                        }
                        let xs: Vec<f64> = cand.iter().map(|p| p.0).collect();
                        if let Some(k) = bracket(&xs, c.x) {
                            for q in neighbourhood(xs.len(), k) {
                                near.push(cand[q]);
                            }
                        }
                    }
                    if let Some(pred) = local_fit(&near, c.x) {
                        res.push((v, pred));
                    }
                }
            }
        }
        normalized_residual(&res, (self.points / 4).max(3))
    }

    /// Rescaled `(L, g-index-free x, y, v, T)` of every point.
    pub fn coordinates(&self, beta: f64, b: f64, t0: f64) -> Vec<(usize, f64, f64, f64, f64)> {
        let mut out = Vec::new();
        for (l, curves) in &self.sizes {
            let lf = *l as f64;
            for c in curves {
                for &(lt, v) in &c.pts {
                    out.push((
                        *l,
                        c.x,
                        (lt - t0.ln()) * lf.powf(-b),
                        v * lf.powf(beta / self.nu),
                        lt.exp(),
                    ));
                }
            }
        }
        out
    }
}

fn t0_bounds(obj: &Objective2d, opts: &Collapse2dOptions) -> Result<(f64, f64)> {
    let hi = obj.t_min().ln();
    let lo = opts.t0_min.ln();
    if !(hi > lo) {
        return Err(Error::Parameter(format!(
            "smallest time {} must exceed the T0 lower bound {}",
            obj.t_min(),
            opts.t0_min
        )));
    }
    Ok((lo, hi))
}

/// Fits `(beta, b, T0)` at fixed `nu`.
pub fn collapse_2d(data: &[SurfacePoint], opts: &Collapse2dOptions) -> Result<ScalingFitResult> {
    let sizes: std::collections::BTreeSet<usize> = data.iter().map(|p| p.l).collect();
    if sizes.len() < 2 {
        return Err(Error::Parameter("collapse needs at least 2 system sizes".into()));
    }
    if data
        .iter()
        .any(|p| !(p.t > 0.0) || !p.value.is_finite() || p.g >= 1.0)
    {
        return Err(Error::Parameter("times must be positive and values finite".into()));
    }
    if !(opts.nu > 0.0) {
        return Err(Error::Parameter("nu must be positive".into()));
    }
    let obj = Objective2d::new(data, opts.nu, opts.g_c, opts.sigma_j);
    let t0r = t0_bounds(&obj, opts)?;
    let axes = vec![
        linspace(opts.beta_range.0, opts.beta_range.1, opts.grid.0),
        linspace(opts.b_range.0, opts.b_range.1, opts.grid.1),
        linspace(t0r.0, t0r.1, opts.grid.2),
    ];
    let (start, _, (lo, hi)) = grid_search(|p| obj.value(p[0], p[1], p[2]), &axes);
    let flat = !(hi.is_finite() && hi > 0.0) || (hi - lo) / hi < FLAT_TOL;
    let m = minimize_2d(&obj, opts, t0r, &start);
    let t0 = m.0[2].exp();
    let boundary_warning = near_edge(m.0[2], t0r);
    Ok(ScalingFitResult {
        mode: CollapseMode::TwoD,
        g_c: opts.g_c,
        nu: opts.nu,
        a: None,
        beta: Some(m.0[0]),
        b: Some(m.0[1]),
        t0: Some(t0),
        objective: m.1,
        errors: BTreeMap::new(),
        unidentifiable: flat || near_edge(m.0[1], opts.b_range) || near_edge(m.0[0], opts.beta_range),
        boundary_warning,
        points: obj.points,
    })
}

fn minimize_2d(
    obj: &Objective2d,
    opts: &Collapse2dOptions,
    t0r: (f64, f64),
    start: &[f64],
) -> (Vec<f64>, f64) {
    let step = [
        (opts.beta_range.1 - opts.beta_range.0) / (opts.grid.0 - 1).max(1) as f64,
        (opts.b_range.1 - opts.b_range.0) / (opts.grid.1 - 1).max(1) as f64,
        (t0r.1 - t0r.0) / (opts.grid.2 - 1).max(1) as f64,
    ];
    let bounds = [opts.beta_range, opts.b_range, t0r];
    let f = |p: &[f64]| obj.value(p[0], p[1], p[2]);
    let mut m = nelder_mead(f, start, &step, &bounds, 1e-9, 6000);
    // one restart from the optimum guards against a collapsed simplex
    let small: Vec<f64> = step.iter().map(|s| 0.25 * s).collect();
    let again = nelder_mead(f, &m.x, &small, &bounds, 1e-10, 6000);
    if again.value <= m.value {
        m = again;
    }
    (m.x, m.value)
}

/// Refit of a 2d collapse from a previous optimum, for bootstrap.
pub fn refit_2d(data: &[SurfacePoint], opts: &Collapse2dOptions, from: &ScalingFitResult) -> Result<Vec<f64>> {
    let obj = Objective2d::new(data, opts.nu, opts.g_c, opts.sigma_j);
    let t0r = t0_bounds(&obj, opts)?;
    let start = [
        from.beta.unwrap_or(0.0),
        from.b.unwrap_or(0.5),
        from.t0.unwrap_or(1.0).ln().clamp(t0r.0, t0r.1),
    ];
    let (x, v) = minimize_2d(&obj, opts, t0r, &start);
    if !v.is_finite() {
        return Err(Error::FitFailure("collapse objective undefined".into()));
    }
    Ok(vec![x[0], x[1], x[2].exp()])
}

/// Collapsed point of a 2d fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsedPoint {
    pub l: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
}

/// All points in collapsed coordinates.
pub fn collapsed_surface(data: &[SurfacePoint], fit: &ScalingFitResult, sigma_j: f64) -> Vec<CollapsedPoint> {
    let obj = Objective2d::new(data, fit.nu, fit.g_c, sigma_j);
    obj.coordinates(
        fit.beta.unwrap_or(0.0),
        fit.b.unwrap_or(0.0),
        fit.t0.unwrap_or(1.0),
    )
    .into_iter()
    .map(|(l, x, y, v, t)| CollapsedPoint { l, t, x, y, v })
    .collect()
}

/// Points whose `ln(T/T0) L^{-b}` lies in `[lo, hi]`.
pub fn band_slice(
    data: &[SurfacePoint],
    fit: &ScalingFitResult,
    sigma_j: f64,
    band: (f64, f64),
) -> Vec<CollapsedPoint> {
    collapsed_surface(data, fit, sigma_j)
        .into_iter()
        .filter(|p| p.y >= band.0 && p.y <= band.1)
        .collect()
}

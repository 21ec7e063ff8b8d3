//! Dataset-level analyses: relaxation fits per `(L, g)`, eigenstate summary
//! tables and scaling collapses with bootstrap errors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    bootstrap_errors, collapse_1d, collapse_2d, collapsed_surface, csd_consistency, detuning,
    fit_relaxation, refit_1d, refit_2d, Collapse1dOptions, Collapse2dOptions, CollapseMode,
    CollapsedPoint, CsdReport, ScalingFitResult, ScalingPoint, SurfacePoint,
};
use crate::error::{Error, Result};
use crate::observables::{floored_average, AverageMode};
use crate::store::{Dataset, Payload, RecordKind};

/// Early-time window used for relaxation fits.
pub const RELAX_WINDOW: (f64, f64) = (0.0, 200.0);
/// Long-time window used for the two-variable collapse.
pub const COLLAPSE_WINDOW: (f64, f64) = (108.0, 806.0);
pub const DEFAULT_BOOTSTRAP_SEED: u64 = 0x5eed;

type Cell = (usize, u64);

fn cell(l: usize, g: f64) -> Cell {
    (l, g.to_bits())
}

/// `(L, g)` cells of the configured grid holding fewer than `n_disorder`
/// records of `kind`.
pub fn missing_cells(ds: &Dataset, kind: RecordKind) -> Vec<(usize, f64)> {
    let mut count: BTreeMap<Cell, u64> = BTreeMap::new();
    for r in ds.records().filter(|r| r.kind() == kind) {
        *count.entry(cell(r.l, r.g)).or_default() += 1;
    }
    let mut out = Vec::new();
    for &l in &ds.config.l_values {
        for &g in &ds.config.g_values {
            if count.get(&cell(l, g)).copied().unwrap_or(0) < ds.config.n_disorder {
                out.push((l, g));
            }
        }
    }
    out
}

fn require_complete(ds: &Dataset, kind: RecordKind) -> Result<()> {
    let missing = missing_cells(ds, kind);
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingRecords(missing))
    }
}

/// Per-cell trajectories restricted to a time window: `index -> O(T)`.
struct Trajectories {
    times: Vec<f64>,
    cells: BTreeMap<Cell, (f64, BTreeMap<u64, Vec<f64>>)>,
}

fn trajectories(ds: &Dataset, window: (f64, f64)) -> Result<Trajectories> {
    let mut times: Option<Vec<u64>> = None;
    let mut cells: BTreeMap<Cell, (f64, BTreeMap<u64, Vec<f64>>)> = BTreeMap::new();
    for r in ds.records() {
        if let Payload::Trajectory { t, o, .. } = &r.payload {
            match &times {
                None => times = Some(t.clone()),
                Some(prev) if prev != t => {
                    return Err(Error::Consistency("trajectories use different time grids".into()))
                }
                _ => {}
            }
            let keep: Vec<f64> = t
                .iter()
                .zip(o)
                .filter(|(ti, _)| (**ti as f64) >= window.0 && (**ti as f64) <= window.1)
                .map(|(_, oi)| *oi)
                .collect();
            cells
                .entry(cell(r.l, r.g))
                .or_insert_with(|| (r.g, BTreeMap::new()))
                .1
                .insert(r.index, keep);
        }
    }
    let times = times
        .unwrap_or_default()
        .into_iter()
        .map(|t| t as f64)
        .filter(|t| *t >= window.0 && *t <= window.1)
        .collect();
    Ok(Trajectories { times, cells })
}

/// Disorder average at every time of the selected realizations.
fn average_series<'a>(
    series: impl Iterator<Item = &'a Vec<f64>>,
    len: usize,
    mode: AverageMode,
) -> Result<(Vec<f64>, usize)> {
    let rows: Vec<&Vec<f64>> = series.collect();
    let mut out = Vec::with_capacity(len);
    let mut floored = 0;
    for k in 0..len {
        let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        let a = floored_average(&col, mode)?;
        floored += a.floored;
        out.push(a.value);
    }
    Ok((out, floored))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxRow {
    pub l: usize,
    pub g: f64,
    pub tau: f64,
    pub sse: f64,
    pub degenerate: bool,
    pub converged: bool,
    pub realizations: usize,
    /// Values floored before the typical average.
    pub floored: usize,
    /// Bootstrap standard error of `tau`, when requested.
    pub tau_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxOptions {
    pub mode: AverageMode,
    pub window: (f64, f64),
    /// Bootstrap resamples for `tau` errors; `None` skips them.
    pub resamples: Option<usize>,
    pub seed: u64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self {
            mode: AverageMode::Mean,
            window: RELAX_WINDOW,
            resamples: None,
            seed: DEFAULT_BOOTSTRAP_SEED,
        }
    }
}

/// Disorder-averaged `O(T)` fitted with `a1 exp(-T/tau) + a2` for every
/// `(L, g)` cell, ordered by `g` then `L`.
pub fn relaxation_table(ds: &Dataset, opts: &RelaxOptions) -> Result<Vec<RelaxRow>> {
    require_complete(ds, RecordKind::Trajectory)?;
    let tr = trajectories(ds, opts.window)?;
    let n_t = tr.times.len();
    let mut rows = Vec::new();
    for (&(l, _), (g, runs)) in &tr.cells {
        let (avg, floored) = average_series(runs.values(), n_t, opts.mode)?;
        let fit = fit_relaxation(&tr.times, &avg)?;
        let tau_err = match opts.resamples {
            None => None,
            Some(n) => {
                let series: Vec<&Vec<f64>> = runs.values().collect();
                let e = bootstrap_errors(&[series.len()], n, opts.seed, |picks| {
                    let (a, _) = average_series(picks[0].iter().map(|&p| series[p]), n_t, opts.mode)?;
                    Ok(vec![fit_relaxation(&tr.times, &a)?.tau])
                })?;
                Some(e.errors[0])
            }
        };
        rows.push(RelaxRow {
            l,
            g: *g,
            tau: fit.tau,
            sse: fit.sse,
            degenerate: fit.degenerate,
            converged: fit.converged,
            realizations: runs.len(),
            floored,
            tau_err,
        });
    }
    rows.sort_by(|a, b| a.g.total_cmp(&b.g).then(a.l.cmp(&b.l)));
    Ok(rows)
}

/// Per-cell `alpha` of realizations without a branch warning.
struct Alphas {
    cells: BTreeMap<Cell, (f64, BTreeMap<u64, f64>)>,
    excluded: BTreeMap<Cell, usize>,
}

fn alphas(ds: &Dataset) -> Alphas {
    let mut cells: BTreeMap<Cell, (f64, BTreeMap<u64, f64>)> = BTreeMap::new();
    let mut excluded: BTreeMap<Cell, usize> = BTreeMap::new();
    for r in ds.records() {
        if let Payload::Alpha { alpha, branch_warning, .. } = r.payload {
            let e = cells.entry(cell(r.l, r.g)).or_insert_with(|| (r.g, BTreeMap::new()));
            if branch_warning {
                *excluded.entry(cell(r.l, r.g)).or_default() += 1;
            } else {
                e.1.insert(r.index, alpha);
            }
        }
    }
    Alphas { cells, excluded }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    pub l: usize,
    pub g: f64,
    pub mean: f64,
    pub typical: f64,
    pub realizations: usize,
    /// Realizations dropped for a quasienergy on the branch cut.
    pub excluded: usize,
}

pub fn alpha_table(ds: &Dataset) -> Result<Vec<AlphaRow>> {
    require_complete(ds, RecordKind::EigenAlpha)?;
    let a = alphas(ds);
    let mut rows = Vec::new();
    for (key, (g, vals)) in &a.cells {
        let v: Vec<f64> = vals.values().copied().collect();
        if v.is_empty() {
            continue;
        }
        rows.push(AlphaRow {
            l: key.0,
            g: *g,
            mean: floored_average(&v, AverageMode::Mean)?.value,
            typical: floored_average(&v, AverageMode::Typical)?.value,
            realizations: v.len(),
            excluded: a.excluded.get(key).copied().unwrap_or(0),
        });
    }
    rows.sort_by(|a, b| a.g.total_cmp(&b.g).then(a.l.cmp(&b.l)));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CxRow {
    pub l: usize,
    pub g: f64,
    pub x: usize,
    pub mean: f64,
    pub typical: f64,
}

/// Disorder-averaged `C_x` for `x = 1 .. L-1`.
pub fn cx_table(ds: &Dataset) -> Result<Vec<CxRow>> {
    require_complete(ds, RecordKind::EigenCx)?;
    let mut cells: BTreeMap<Cell, (f64, Vec<&Vec<f64>>)> = BTreeMap::new();
    for r in ds.records() {
        if let Payload::Cx { cx } = &r.payload {
            cells.entry(cell(r.l, r.g)).or_insert_with(|| (r.g, Vec::new())).1.push(cx);
        }
    }
    let mut rows = Vec::new();
    for (&(l, _), (g, profiles)) in &cells {
        let len = profiles.iter().map(|p| p.len()).min().unwrap_or(0);
        for x in 0..len {
            let col: Vec<f64> = profiles.iter().map(|p| p[x]).collect();
            rows.push(CxRow {
                l,
                g: *g,
                x: x + 1,
                mean: floored_average(&col, AverageMode::Mean)?.value,
                typical: floored_average(&col, AverageMode::Typical)?.value,
            });
        }
    }
    rows.sort_by(|a, b| a.g.total_cmp(&b.g).then(a.l.cmp(&b.l)).then(a.x.cmp(&b.x)));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseRequest {
    pub mode: CollapseMode,
    pub average: AverageMode,
    /// Bootstrap resamples; 0 skips the error analysis.
    pub resamples: usize,
    pub seed: u64,
    pub opts_1d: Collapse1dOptions,
    pub opts_2d: Collapse2dOptions,
    /// Time window of the two-variable collapse.
    pub window: (f64, f64),
    /// Error on the fixed `nu` of the two-variable collapse, for the CSD check.
    pub nu_err: f64,
}

impl Default for CollapseRequest {
    fn default() -> Self {
        Self {
            mode: CollapseMode::OneD,
            average: AverageMode::Mean,
            resamples: crate::analysis::DEFAULT_RESAMPLES,
            seed: DEFAULT_BOOTSTRAP_SEED,
            opts_1d: Collapse1dOptions::default(),
            opts_2d: Collapse2dOptions::default(),
            window: COLLAPSE_WINDOW,
            nu_err: 0.0,
        }
    }
}

/// One row of a collapsed-coordinate table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsedRow {
    pub l: usize,
    pub g: f64,
    /// Absent in one-variable collapses.
    pub t: Option<f64>,
    pub x: f64,
    pub y: Option<f64>,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseOutcome {
    pub fit: ScalingFitResult,
    pub average: AverageMode,
    pub resamples: usize,
    pub failed_resamples: usize,
    pub csd: Option<CsdReport>,
    pub collapsed: Vec<CollapsedRow>,
}

/// Realization indices per size, the union over `g`; bootstrap picks
/// positions in these lists, so a resample keeps the same realizations at
/// every `g` of a size.
fn indices_by_size<T>(cells: &BTreeMap<Cell, (f64, BTreeMap<u64, T>)>) -> BTreeMap<usize, Vec<u64>> {
    let mut out: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
    for (&(l, _), (_, m)) in cells {
        out.entry(l).or_default().extend(m.keys().copied());
    }
    out.into_iter().map(|(l, s)| (l, s.into_iter().collect())).collect()
}

fn selected<'a, T>(
    cells: &'a BTreeMap<Cell, (f64, BTreeMap<u64, T>)>,
    index: &'a BTreeMap<usize, Vec<u64>>,
    picks: Option<&'a BTreeMap<usize, Vec<usize>>>,
) -> impl Iterator<Item = (usize, f64, Vec<&'a T>)> + 'a {
    cells.iter().map(move |(&(l, _), (g, m))| {
        let vals: Vec<&T> = match picks {
            None => m.values().collect(),
            Some(p) => p[&l].iter().filter_map(|&k| m.get(&index[&l][k])).collect(),
        };
        (l, *g, vals)
    })
}

fn points_1d(
    a: &Alphas,
    index: &BTreeMap<usize, Vec<u64>>,
    picks: Option<&BTreeMap<usize, Vec<usize>>>,
    mode: AverageMode,
) -> Result<Vec<ScalingPoint>> {
    let mut out = Vec::new();
    for (l, g, vals) in selected(&a.cells, index, picks) {
        if vals.is_empty() {
            continue;
        }
        let v: Vec<f64> = vals.into_iter().copied().collect();
        out.push(ScalingPoint { l, g, value: floored_average(&v, mode)?.value });
    }
    Ok(out)
}

fn points_2d(
    tr: &Trajectories,
    index: &BTreeMap<usize, Vec<u64>>,
    picks: Option<&BTreeMap<usize, Vec<usize>>>,
    mode: AverageMode,
) -> Result<Vec<SurfacePoint>> {
    let mut out = Vec::new();
    for (l, g, vals) in selected(&tr.cells, index, picks) {
        if vals.is_empty() {
            continue;
        }
        let (avg, _) = average_series(vals.into_iter(), tr.times.len(), mode)?;
        for (t, value) in tr.times.iter().zip(avg) {
            out.push(SurfacePoint { l, g, t: *t, value });
        }
    }
    Ok(out)
}

fn picks_map(index: &BTreeMap<usize, Vec<u64>>, picks: &[Vec<usize>]) -> BTreeMap<usize, Vec<usize>> {
    index.keys().copied().zip(picks.iter().cloned()).collect()
}

fn attach_errors(fit: &mut ScalingFitResult, errors: &[f64]) {
    let names: Vec<&str> = fit.parameters().iter().map(|p| p.0).collect();
    for (name, e) in names.into_iter().zip(errors) {
        fit.errors.insert(name.to_string(), *e);
    }
}

/// Runs the requested collapse on the dataset's disorder averages, with
/// bootstrap errors over realizations and, for the two-variable collapse,
/// the critical-slowing-down consistency check.
pub fn collapse_dataset(ds: &Dataset, req: &CollapseRequest) -> Result<CollapseOutcome> {
    match req.mode {
        CollapseMode::OneD => {
            require_complete(ds, RecordKind::EigenAlpha)?;
            let a = alphas(ds);
            let index = indices_by_size(&a.cells);
            let data = points_1d(&a, &index, None, req.average)?;
            let mut fit = collapse_1d(&data, &req.opts_1d)?;
            let mut failed = 0;
            if req.resamples > 0 {
                let sizes: Vec<usize> = index.values().map(|v| v.len()).collect();
                let e = bootstrap_errors(&sizes, req.resamples, req.seed, |picks| {
                    let p = picks_map(&index, picks);
                    let d = points_1d(&a, &index, Some(&p), req.average)?;
                    refit_1d(&d, &req.opts_1d, &fit)
                })?;
                failed = e.failed;
                attach_errors(&mut fit, &e.errors);
            }
            let a_exp = fit.a.unwrap_or(0.0);
            let collapsed = data
                .iter()
                .map(|p| {
                    let lf = p.l as f64;
                    CollapsedRow {
                        l: p.l,
                        g: p.g,
                        t: None,
                        x: detuning(p.g, fit.g_c, req.opts_1d.sigma_j) * lf.powf(1.0 / fit.nu),
                        y: None,
                        v: p.value * lf.powf(a_exp),
                    }
                })
                .collect();
            Ok(CollapseOutcome {
                fit,
                average: req.average,
                resamples: req.resamples,
                failed_resamples: failed,
                csd: None,
                collapsed,
            })
        }
        CollapseMode::TwoD => {
            require_complete(ds, RecordKind::Trajectory)?;
            let tr = trajectories(ds, req.window)?;
            if tr.times.is_empty() {
                return Err(Error::Parameter(format!(
                    "no trajectory times inside [{}, {}]",
                    req.window.0, req.window.1
                )));
            }
            let index = indices_by_size(&tr.cells);
            let data = points_2d(&tr, &index, None, req.average)?;
            let mut fit = collapse_2d(&data, &req.opts_2d)?;
            let mut failed = 0;
            if req.resamples > 0 {
                let sizes: Vec<usize> = index.values().map(|v| v.len()).collect();
                let e = bootstrap_errors(&sizes, req.resamples, req.seed, |picks| {
                    let p = picks_map(&index, picks);
                    let d = points_2d(&tr, &index, Some(&p), req.average)?;
                    refit_2d(&d, &req.opts_2d, &fit)
                })?;
                failed = e.failed;
                attach_errors(&mut fit, &e.errors);
            }
            let nu_fit = ScalingFitResult {
                mode: CollapseMode::OneD,
                g_c: fit.g_c,
                nu: fit.nu,
                a: None,
                beta: None,
                b: None,
                t0: None,
                objective: f64::NAN,
                errors: [("nu".to_string(), req.nu_err)].into_iter().collect(),
                unidentifiable: false,
                boundary_warning: false,
                points: 0,
            };
            let csd = Some(csd_consistency(&nu_fit, &fit));
            let collapsed = collapsed_rows(&data, &fit, req.opts_2d.sigma_j);
            Ok(CollapseOutcome {
                fit,
                average: req.average,
                resamples: req.resamples,
                failed_resamples: failed,
                csd,
                collapsed,
            })
        }
    }
}

/// Collapsed coordinates of a two-variable fit with the `g` of each point.
fn collapsed_rows(data: &[SurfacePoint], fit: &ScalingFitResult, sigma_j: f64) -> Vec<CollapsedRow> {
    let gs: Vec<f64> = data.iter().map(|p| p.g).collect();
    let surf: Vec<CollapsedPoint> = collapsed_surface(data, fit, sigma_j);
    surf.into_iter()
        .map(|p| {
            // invert x = delta(g) L^(1/nu), then snap to the nearest input g
            let delta = p.x / (p.l as f64).powf(1.0 / fit.nu);
            let approx = 1.0 - (1.0 - fit.g_c) * (delta * sigma_j * sigma_j).exp();
            let g = gs
                .iter()
                .copied()
                .min_by(|a, b| (a - approx).abs().total_cmp(&(b - approx).abs()))
                .unwrap_or(approx);
            CollapsedRow {
                l: p.l,
                g,
                t: Some(p.t),
                x: p.x,
                y: Some(p.y),
                v: p.v,
            }
        })
        .collect()
}

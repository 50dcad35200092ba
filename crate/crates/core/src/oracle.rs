//! Brute-force checks of the analytic bounds against the rate model.
//!
//! [`map_region`] walks a `(lambda, alpha_c, tau)` grid, decides per cell
//! whether both users beat OMA by evaluating the rates directly, and compares
//! the result with two analytic verdicts:
//!
//! * the `tau` window `(max(tau_lower, 0), min(tau_upper, 1))` at every
//!   `(lambda, alpha_c)` cell, which is exact everywhere;
//! * the `alpha_c` interval from the feasibility search, for each `lambda`
//!   above the soft lower bound. That interval describes the regime in which
//!   neither private rate alone reaches OMA (both users need a share of the
//!   common rate), so it is compared against the empirical cells of that
//!   regime only. Feasible cells outside it are counted, not flagged.
//!
//! A disagreement is counted only when a point sits more than one grid step
//! inside the other verdict's region. The rate is affine in `tau`, so the
//! feasible `tau` grid points of a cell form one run; it is located by binary
//! search over the grid using direct rate comparisons.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{lambda_soft_lower, tau_bounds, tau_lower, tau_upper};
use crate::error::{invalid, Error, Result};
use crate::feasibility::{alpha_feasible_interval, lambda_strict_lower};
use crate::rate_model::{check_closed_unit, split_rates, split_rates_raw, SinrPair, SplitRates};

/// Mismatches kept verbatim in a report; the count covers all of them.
pub const MAX_LISTED_MISMATCHES: usize = 100;
/// Bisection width of the `tau` frontier oracle.
pub const FRONTIER_TOL: f64 = 1e-12;
/// Agreement required between the frontier oracle and the closed forms.
pub const FRONTIER_AGREEMENT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        let axis = Self { start, end, step };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { start, end, step } = *self;
        if !(start.is_finite() && end.is_finite() && step.is_finite()) {
            return Err(invalid("grid values must be finite"));
        }
        if !(0.0 < start && start < end && end < 1.0) {
            return Err(invalid(format!(
                "grid axis needs 0 < start < end < 1, got ({start}, {end})"
            )));
        }
        if !(step > 0.0 && step <= end - start) {
            return Err(invalid(format!(
                "grid step {step} must be positive and at most end - start"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn at(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.at(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub lambda: GridAxis,
    pub alpha: GridAxis,
    pub tau: GridAxis,
    pub beta: f64,
}

impl GridSpec {
    /// The same axis `(step, 1 - step, step)` for all three parameters.
    pub fn uniform(step: f64, beta: f64) -> Result<Self> {
        let axis = GridAxis::new(step, 1.0 - step, step)?;
        Ok(Self {
            lambda: axis,
            alpha: axis,
            tau: axis,
            beta,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.lambda.validate()?;
        self.alpha.validate()?;
        self.tau.validate()?;
        check_closed_unit("beta", self.beta)
    }
}

/// Test hooks that shift the analytic side of the comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RegionOptions {
    /// Added to every closed-form `tau_lower` before comparing.
    pub tau_lower_offset: f64,
}

/// One `(lambda, alpha_c)` cell with at least one feasible `tau` grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellRecord {
    pub lambda: f64,
    pub alpha: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Neither private rate alone reaches its OMA rate.
    pub common_dependent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceEstimate {
    pub lambda: f64,
    /// Extreme feasible `alpha_c` among common-dependent cells.
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    /// Extreme feasible `alpha_c` over all feasible cells.
    pub alpha_min_any: Option<f64>,
    pub alpha_max_any: Option<f64>,
    /// First analytic interval, when this slice is covered by the search.
    pub analytic: Option<(f64, f64)>,
    pub covered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchKind {
    /// Empirically feasible `tau` outside the closed-form window.
    TauEmpiricalOutside,
    /// Interior point of the closed-form window that fails empirically.
    TauAnalyticMissing,
    /// Common-dependent feasible cell outside the analytic `alpha_c` interval.
    AlphaEmpiricalOutside,
    /// Interior analytic cell with no common-dependent feasible neighbour.
    AlphaAnalyticMissing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mismatch {
    pub kind: MismatchKind,
    pub lambda: f64,
    pub alpha: f64,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub grid: GridSpec,
    pub lambda_soft_lower: f64,
    pub cells: Vec<CellRecord>,
    pub slices: Vec<SliceEstimate>,
    /// Lowest grid `lambda` with a common-dependent feasible cell.
    pub empirical_lambda_min: Option<f64>,
    /// Lowest grid `lambda` with any feasible cell.
    pub empirical_lambda_min_any: Option<f64>,
    /// Common-dependent feasible cells on slices covered by the search.
    pub regime_cells: usize,
    /// Feasible cells where one user's private rate alone already beats OMA.
    pub outside_regime_cells: usize,
    /// Common-dependent feasible cells on slices at or below the soft bound.
    pub regime_cells_below_soft_lower: usize,
    /// Cells whose closed-form `tau` bounds are singular.
    pub singular_cells: usize,
    pub mismatch_count: usize,
    pub mismatches: Vec<Mismatch>,
}

impl RegionReport {
    pub fn passed(&self) -> bool {
        self.mismatch_count == 0
    }

    /// Every feasible `(lambda, alpha_c, tau)` grid point.
    pub fn feasible_cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let tau = self.grid.tau;
        self.cells.iter().flat_map(move |c| {
            let k0 = ((c.tau_min - tau.start) / tau.step).round() as usize;
            let k1 = ((c.tau_max - tau.start) / tau.step).round() as usize;
            (k0..=k1).map(move |k| (c.lambda, c.alpha, tau.at(k)))
        })
    }

    pub fn slice(&self, lambda: f64) -> Option<&SliceEstimate> {
        self.slices.iter().min_by(|a, b| {
            (a.lambda - lambda)
                .abs()
                .total_cmp(&(b.lambda - lambda).abs())
        })
    }
}

/// Feasible `tau` grid indices `(first, last)` for one cell.
fn empirical_tau_run(rates: &SplitRates, tau: &GridAxis) -> Option<(usize, usize)> {
    let n = tau.len();
    let strong = |k: usize| {
        let r = rates.report(tau.at(k));
        r.r_rsma_s > r.r_oma_s
    };
    let weak = |k: usize| {
        let r = rates.report(tau.at(k));
        r.r_rsma_w > r.r_oma_w
    };
    let first = partition_point(n, |k| !strong(k));
    let end = partition_point(n, weak);
    (first < end).then(|| (first, end - 1))
}

/// First index in `0..n` where `pred` turns false (pred must be monotone).
fn partition_point(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn dist_to_interval(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

/// Grid points strictly inside `(lo + step, hi - step)`, as an index range.
fn interior_indices(axis: &GridAxis, lo: f64, hi: f64) -> Option<(usize, usize)> {
    let (a, b) = (lo + axis.step, hi - axis.step);
    if a >= b {
        return None;
    }
    let n = axis.len();
    let first = partition_point(n, |k| axis.at(k) <= a);
    let end = partition_point(n, |k| axis.at(k) < b);
    (first < end).then(|| (first, end - 1))
}

#[derive(Debug, Clone, Copy, Default)]
struct CellState {
    tau_run: Option<(usize, usize)>,
    common_dependent: bool,
    analytic: bool,
    /// The closed-form window has a grid point more than one step inside.
    analytic_interior: bool,
    singular: bool,
    tau_mismatch: Option<MismatchKind>,
    tau_mismatch_at: Option<f64>,
}

struct Row {
    lambda: f64,
    covered: bool,
    intervals: Vec<(f64, f64)>,
    cells: Vec<CellState>,
}

fn tau_layer(
    state: &mut CellState,
    sinr: &SinrPair,
    grid: &GridSpec,
    alpha: f64,
    lambda: f64,
    opts: &RegionOptions,
) {
    let tb = match tau_bounds(sinr, alpha, lambda, grid.beta) {
        Ok(tb) => tb,
        Err(_) => {
            state.singular = true;
            return;
        }
    };
    let tau = &grid.tau;
    let lo = (tb.lower + opts.tau_lower_offset).max(0.0);
    let hi = tb.upper.min(1.0);
    let interior = if lo < hi {
        interior_indices(tau, lo, hi)
    } else {
        None
    };
    state.analytic_interior = interior.is_some();

    if let Some((k0, k1)) = state.tau_run {
        let (e_lo, e_hi) = (tau.at(k0), tau.at(k1));
        let outside = if lo < hi {
            let d = dist_to_interval(e_lo, lo, hi).max(dist_to_interval(e_hi, lo, hi));
            (d > tau.step).then(|| {
                if dist_to_interval(e_lo, lo, hi) > tau.step {
                    e_lo
                } else {
                    e_hi
                }
            })
        } else if lo - hi > 1e-9 {
            Some(e_lo)
        } else {
            None
        };
        if let Some(t) = outside {
            state.tau_mismatch = Some(MismatchKind::TauEmpiricalOutside);
            state.tau_mismatch_at = Some(t);
            return;
        }
    }
    if let Some((a0, a1)) = interior {
        let missing = match state.tau_run {
            None => Some(a0),
            Some((k0, _)) if k0 > a0 => Some(a0),
            Some((_, k1)) if k1 < a1 => Some(a1),
            _ => None,
        };
        if let Some(k) = missing {
            state.tau_mismatch = Some(MismatchKind::TauAnalyticMissing);
            state.tau_mismatch_at = Some(tau.at(k));
        }
    }
}

fn row(sinr: &SinrPair, grid: &GridSpec, soft: f64, lambda: f64, opts: &RegionOptions) -> Row {
    let (covered, intervals) = if lambda > soft {
        match alpha_feasible_interval(sinr, lambda, grid.beta) {
            Ok(iv) => {
                let mut v: Vec<(f64, f64)> = iv.bounds().into_iter().collect();
                v.extend(iv.extra.iter().copied());
                (true, v)
            }
            Err(Error::InfeasibleAtBoundary { lower, .. }) => (true, vec![(lower, 1.0)]),
            Err(_) => (false, Vec::new()),
        }
    } else {
        (false, Vec::new())
    };
    let cells = grid
        .alpha
        .points()
        .into_iter()
        .map(|alpha| {
            let rates = split_rates_raw(sinr, alpha, lambda, grid.beta);
            let mut st = CellState {
                tau_run: empirical_tau_run(&rates, &grid.tau),
                common_dependent: rates.r_priv_s < rates.r_oma_s && rates.r_priv_w < rates.r_oma_w,
                analytic: intervals.iter().any(|&(a, b)| alpha > a && alpha < b),
                ..Default::default()
            };
            tau_layer(&mut st, sinr, grid, alpha, lambda, opts);
            st
        })
        .collect();
    Row {
        lambda,
        covered,
        intervals,
        cells,
    }
}

fn any_in_neighbourhood(mask: &[Vec<bool>], i: usize, j: usize) -> bool {
    let i0 = i.saturating_sub(1);
    let j0 = j.saturating_sub(1);
    (i0..=(i + 1).min(mask.len() - 1))
        .any(|ii| (j0..=(j + 1).min(mask[ii].len() - 1)).any(|jj| mask[ii][jj]))
}

pub fn map_region(sinr: &SinrPair, grid: &GridSpec) -> Result<RegionReport> {
    map_region_with(sinr, grid, &RegionOptions::default())
}

pub fn map_region_with(
    sinr: &SinrPair,
    grid: &GridSpec,
    opts: &RegionOptions,
) -> Result<RegionReport> {
    grid.validate()?;
    let soft = lambda_soft_lower(sinr, grid.beta)?.soft_lower;
    let lambdas = grid.lambda.points();
    let rows: Vec<Row> = lambdas
        .par_iter()
        .map(|&lam| row(sinr, grid, soft, lam, opts))
        .collect();

    let widest = rows
        .iter()
        .flat_map(|r| r.intervals.first())
        .map(|&(a, b)| b - a)
        .fold(None, |acc: Option<f64>, w| {
            Some(acc.map_or(w, |m| m.max(w)))
        });
    // a region that falls entirely between lambda grid points, including the
    // gap above the last one
    let widest = widest.or_else(|| {
        let top = (grid.lambda.end + grid.lambda.step).min(1.0 - crate::feasibility::LAMBDA_MARGIN);
        let strict = lambda_strict_lower(sinr, grid.beta).ok()?;
        (strict < top).then(|| {
            alpha_feasible_interval(sinr, top, grid.beta)
                .map(|iv| iv.width())
                .unwrap_or(0.0)
        })
    });
    if let Some(widest) = widest {
        if widest < 2.0 * grid.alpha.step {
            return Err(Error::GridTooCoarse {
                widest,
                step: grid.alpha.step,
            });
        }
    }

    let alphas = grid.alpha.points();
    let empirical: Vec<Vec<bool>> = rows
        .iter()
        .map(|r| {
            r.cells
                .iter()
                .map(|c| r.covered && c.tau_run.is_some() && c.common_dependent)
                .collect()
        })
        .collect();
    let analytic: Vec<Vec<bool>> = rows
        .iter()
        .map(|r| r.cells.iter().map(|c| c.analytic).collect())
        .collect();

    let mut report = RegionReport {
        grid: *grid,
        lambda_soft_lower: soft,
        cells: Vec::new(),
        slices: Vec::with_capacity(rows.len()),
        empirical_lambda_min: None,
        empirical_lambda_min_any: None,
        regime_cells: 0,
        outside_regime_cells: 0,
        regime_cells_below_soft_lower: 0,
        singular_cells: 0,
        mismatch_count: 0,
        mismatches: Vec::new(),
    };
    let push = |report: &mut RegionReport, m: Mismatch| {
        report.mismatch_count += 1;
        if report.mismatches.len() < MAX_LISTED_MISMATCHES {
            report.mismatches.push(m);
        }
    };

    for (i, r) in rows.iter().enumerate() {
        let mut slice = SliceEstimate {
            lambda: r.lambda,
            alpha_min: None,
            alpha_max: None,
            alpha_min_any: None,
            alpha_max_any: None,
            analytic: r.intervals.first().copied(),
            covered: r.covered,
        };
        for (j, c) in r.cells.iter().enumerate() {
            let alpha = alphas[j];
            if c.singular {
                report.singular_cells += 1;
            }
            if let (Some(kind), Some(t)) = (c.tau_mismatch, c.tau_mismatch_at) {
                push(
                    &mut report,
                    Mismatch {
                        kind,
                        lambda: r.lambda,
                        alpha,
                        tau: Some(t),
                    },
                );
            }
            if let Some((k0, k1)) = c.tau_run {
                report.cells.push(CellRecord {
                    lambda: r.lambda,
                    alpha,
                    tau_min: grid.tau.at(k0),
                    tau_max: grid.tau.at(k1),
                    common_dependent: c.common_dependent,
                });
                slice.alpha_min_any.get_or_insert(alpha);
                slice.alpha_max_any = Some(alpha);
                report.empirical_lambda_min_any.get_or_insert(r.lambda);
                if c.common_dependent {
                    if r.covered {
                        report.regime_cells += 1;
                        slice.alpha_min.get_or_insert(alpha);
                        slice.alpha_max = Some(alpha);
                        report.empirical_lambda_min.get_or_insert(r.lambda);
                    } else {
                        report.regime_cells_below_soft_lower += 1;
                    }
                } else {
                    report.outside_regime_cells += 1;
                }
            }
            if empirical[i][j] && !any_in_neighbourhood(&analytic, i, j) {
                push(
                    &mut report,
                    Mismatch {
                        kind: MismatchKind::AlphaEmpiricalOutside,
                        lambda: r.lambda,
                        alpha,
                        tau: None,
                    },
                );
            }
            if analytic[i][j] && c.analytic_interior && !any_in_neighbourhood(&empirical, i, j) {
                push(
                    &mut report,
                    Mismatch {
                        kind: MismatchKind::AlphaAnalyticMissing,
                        lambda: r.lambda,
                        alpha,
                        tau: None,
                    },
                );
            }
        }
        report.slices.push(slice);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frontier {
    pub tau: f64,
    /// No sign change on `(0, 1)`; `tau` is the saturating endpoint.
    pub saturated: bool,
}

/// Solve `r_rsma_x(tau) = r_oma_x` for `tau` by bisection on the rate model.
pub fn tau_frontier_bisect(
    sinr: &SinrPair,
    alpha_c: f64,
    lambda: f64,
    beta: f64,
    side: Side,
) -> Result<Frontier> {
    let rates = split_rates(sinr, alpha_c, lambda, beta)?;
    // oriented so the gap increases with tau
    let gap = |tau: f64| {
        let r = rates.report(tau);
        match side {
            Side::Strong => r.r_rsma_s - r.r_oma_s,
            Side::Weak => r.r_oma_w - r.r_rsma_w,
        }
    };
    if gap(0.0) >= 0.0 {
        return Ok(Frontier {
            tau: 0.0,
            saturated: true,
        });
    }
    if gap(1.0) <= 0.0 {
        return Ok(Frontier {
            tau: 1.0,
            saturated: true,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > FRONTIER_TOL {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Frontier {
        tau: 0.5 * (lo + hi),
        saturated: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementCheck {
    pub lambda: f64,
    pub alpha_c: f64,
    pub side: Side,
    pub closed_form: f64,
    pub bisected: f64,
    pub passed: bool,
}

/// Compare the closed-form `tau` bounds with the frontier oracle at one point.
/// Saturated frontiers are skipped.
pub fn frontier_agreement(
    sinr: &SinrPair,
    alpha_c: f64,
    lambda: f64,
    beta: f64,
    opts: &RegionOptions,
) -> Result<Vec<AgreementCheck>> {
    let mut out = Vec::with_capacity(2);
    for side in [Side::Strong, Side::Weak] {
        let f = tau_frontier_bisect(sinr, alpha_c, lambda, beta, side)?;
        if f.saturated {
            continue;
        }
        let closed_form = match side {
            Side::Strong => tau_lower(sinr, alpha_c, lambda, beta)? + opts.tau_lower_offset,
            Side::Weak => tau_upper(sinr, alpha_c, lambda, beta)?,
        };
        out.push(AgreementCheck {
            lambda,
            alpha_c,
            side,
            closed_form,
            bisected: f.tau,
            passed: (closed_form - f.tau).abs() < FRONTIER_AGREEMENT,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub region: RegionReport,
    pub lambda_strict_lower: Option<f64>,
    pub agreement: Vec<AgreementCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.region.passed() && self.agreement.iter().all(|a| a.passed)
    }
}

/// Number of analytic slices sampled for the frontier agreement checks.
const AGREEMENT_SLICES: usize = 25;

/// Region map on a uniform grid plus frontier agreement at interval midpoints.
pub fn verify(sinr: &SinrPair, beta: f64, step: f64, opts: &RegionOptions) -> Result<VerifyReport> {
    let grid = GridSpec::uniform(step, beta)?;
    let region = map_region_with(sinr, &grid, opts)?;
    let lambda_strict = match lambda_strict_lower(sinr, beta) {
        Ok(l) => Some(l),
        Err(Error::NoFeasibleLambda { .. }) => None,
        Err(e) => return Err(e),
    };
    let with_interval: Vec<(f64, (f64, f64))> = region
        .slices
        .iter()
        .filter_map(|s| s.analytic.map(|iv| (s.lambda, iv)))
        .filter(|(_, (a, b))| *b < 1.0 && b > a)
        .collect();
    let stride = (with_interval.len() / AGREEMENT_SLICES).max(1);
    let mut agreement = Vec::new();
    for &(lam, (a, b)) in with_interval.iter().step_by(stride) {
        agreement.extend(frontier_agreement(sinr, 0.5 * (a + b), lam, beta, opts)?);
    }
    Ok(VerifyReport {
        region,
        lambda_strict_lower: lambda_strict,
        agreement,
    })
}

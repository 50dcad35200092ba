//! Numeric search on top of the closed-form bounds.
//!
//! The strict upper bound on `alpha_c` and the strict lower bound on
//! `lambda` have no closed form; both are located here from the sign
//! structure of the feasibility cubic. Root isolation scans a uniform grid
//! merged with the cubic's stationary points (so no pair of close roots can
//! hide between two samples) and refines every sign change by bisection.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    alpha_lower, alpha_soft_upper, cubic_coeffs, lambda_soft_lower, tau_bounds, AlphaBounds,
    CubicCoeffs, TauBounds,
};
use crate::error::{Error, Result};
use crate::rate_model::{
    check_closed_unit, check_open_unit, split_rates, RateReport, RsmaParams, SinrPair,
};

/// Grid spacing for the cubic sign scan.
pub const ALPHA_SCAN_STEP: f64 = 1e-4;
/// Bisection width for cubic roots.
pub const ALPHA_ROOT_TOL: f64 = 1e-10;
/// Forward scan step in `lambda`.
pub const LAMBDA_SCAN_STEP: f64 = 1e-3;
/// Bisection width for the strict `lambda` bound.
pub const LAMBDA_TOL: f64 = 1e-9;
/// The `lambda` search stops short of one by this margin.
pub const LAMBDA_MARGIN: f64 = 1e-6;
/// Bisection width for the `beta` crossover.
pub const BETA_TOL: f64 = 1e-10;

/// The first stretch above `alpha_LB` where the feasibility cubic is negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaInterval {
    /// `alpha_LB` as returned by [`alpha_lower`]; may be negative.
    pub alpha_lb: f64,
    pub lb: f64,
    pub ub: f64,
    pub present: bool,
    /// Further negative stretches above `ub`, lowest first.
    pub extra: Vec<(f64, f64)>,
}

impl AlphaInterval {
    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.present.then_some((self.lb, self.ub))
    }

    pub fn width(&self) -> f64 {
        if self.present {
            self.ub - self.lb
        } else {
            0.0
        }
    }

    pub fn contains(&self, alpha: f64) -> bool {
        (self.present && alpha > self.lb && alpha < self.ub)
            || self.extra.iter().any(|&(a, b)| alpha > a && alpha < b)
    }
}

fn bisect_sign_change(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let neg_lo = f(lo) < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximal sub-intervals of `(start, end)` where the cubic is negative.
/// The boolean marks a stretch still negative at `end`.
fn negative_stretches(cubic: &CubicCoeffs, start: f64, end: f64) -> Vec<(f64, f64, bool)> {
    let n = ((end - start) / ALPHA_SCAN_STEP).ceil().max(1.0) as usize;
    let mut xs: Vec<f64> = (0..=n)
        .map(|k| start + (end - start) * k as f64 / n as f64)
        .collect();
    xs.extend(
        cubic
            .critical_points()
            .into_iter()
            .filter(|&x| x > start && x < end),
    );
    xs.sort_by(f64::total_cmp);

    let f = |x: f64| cubic.eval(x);
    let mut out = Vec::new();
    let mut open: Option<f64> = (f(start) < 0.0).then_some(start);
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (na, nb) = (f(a) < 0.0, f(b) < 0.0);
        if na == nb {
            continue;
        }
        let root = bisect_sign_change(f, a, b, ALPHA_ROOT_TOL);
        if nb {
            open = Some(root);
        } else if let Some(s) = open.take() {
            out.push((s, root, false));
        }
    }
    if let Some(s) = open {
        out.push((s, end, true));
    }
    out
}

/// Feasible `alpha_c` interval at a given `lambda`: `alpha_c > alpha_LB` and
/// the feasibility cubic strictly negative.
pub fn alpha_feasible_interval(sinr: &SinrPair, lambda: f64, beta: f64) -> Result<AlphaInterval> {
    let alpha_lb = alpha_lower(sinr, lambda, beta)?;
    let cubic = cubic_coeffs(sinr, lambda, beta)?;
    let start = alpha_lb.max(0.0);
    let mut iv = AlphaInterval {
        alpha_lb,
        lb: f64::NAN,
        ub: f64::NAN,
        present: false,
        extra: Vec::new(),
    };
    if start >= 1.0 {
        return Ok(iv);
    }
    let stretches = negative_stretches(&cubic, start, 1.0);
    let Some(&(lb, ub, open_at_one)) = stretches.first() else {
        return Ok(iv);
    };
    if open_at_one {
        return Err(Error::InfeasibleAtBoundary { lambda, lower: lb });
    }
    iv.lb = lb;
    iv.ub = ub;
    iv.present = true;
    iv.extra = stretches[1..].iter().map(|&(a, b, _)| (a, b)).collect();
    Ok(iv)
}

/// `alpha_LB`, the soft upper value and the strict upper bound together.
pub fn alpha_bounds(sinr: &SinrPair, lambda: f64, beta: f64) -> Result<AlphaBounds> {
    let iv = alpha_feasible_interval(sinr, lambda, beta)?;
    Ok(AlphaBounds {
        lower: iv.alpha_lb,
        soft_upper: alpha_soft_upper(sinr, lambda, beta)?,
        strict_upper: iv.bounds().map(|(_, ub)| ub),
    })
}

fn lambda_admits_alpha(sinr: &SinrPair, lambda: f64, beta: f64) -> Result<bool> {
    match alpha_feasible_interval(sinr, lambda, beta) {
        Ok(iv) => Ok(iv.present),
        Err(Error::InfeasibleAtBoundary { .. }) => Ok(true),
        Err(Error::DenominatorSignViolation { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

fn lambda_scan_points(soft: f64) -> impl Iterator<Item = f64> {
    let limit = 1.0 - LAMBDA_MARGIN;
    (0..)
        .map(move |k| soft + k as f64 * LAMBDA_SCAN_STEP)
        .take_while(move |&l| l < limit)
        .chain(std::iter::once(limit))
}

/// Lowest `lambda` for which some `alpha_c` satisfies both `alpha_c > alpha_LB`
/// and the feasibility cubic.
pub fn lambda_strict_lower(sinr: &SinrPair, beta: f64) -> Result<f64> {
    let soft = lambda_soft_lower(sinr, beta)?.soft_lower;
    let no_lambda = Error::NoFeasibleLambda {
        beta,
        search_from: soft,
    };
    if soft >= 1.0 - LAMBDA_MARGIN {
        return Err(no_lambda);
    }
    let mut last_infeasible = None;
    for lam in lambda_scan_points(soft) {
        if lam <= 0.0 {
            continue;
        }
        if !lambda_admits_alpha(sinr, lam, beta)? {
            last_infeasible = Some(lam);
            continue;
        }
        let Some(mut lo) = last_infeasible else {
            return Ok(lam);
        };
        let mut hi = lam;
        while hi - lo > LAMBDA_TOL {
            let mid = 0.5 * (lo + hi);
            if lambda_admits_alpha(sinr, mid, beta)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Ok(hi);
    }
    Err(no_lambda)
}

/// Re-scan `[soft_lower, 1)` and fail if feasibility ever switches off again.
pub fn check_lambda_monotone(sinr: &SinrPair, beta: f64) -> Result<()> {
    let soft = lambda_soft_lower(sinr, beta)?.soft_lower;
    let mut first_feasible = None;
    for lam in lambda_scan_points(soft) {
        if lam <= 0.0 {
            continue;
        }
        match (lambda_admits_alpha(sinr, lam, beta)?, first_feasible) {
            (true, None) => first_feasible = Some(lam),
            (false, Some(f)) => {
                return Err(Error::NonMonotoneFeasibility {
                    feasible_at: f,
                    infeasible_at: lam,
                })
            }
            _ => {}
        }
    }
    Ok(())
}

/// How selection picks interior points of the feasible ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionPolicy {
    /// Fraction of `1 - lambda_lower` added to the strict `lambda` bound.
    pub lambda_offset: f64,
    /// Relative position inside `(alpha_LB, alpha_UB)`.
    pub alpha_position: f64,
    /// Relative position inside the admissible `tau` window.
    pub tau_position: f64,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        Self {
            lambda_offset: 0.5,
            alpha_position: 0.5,
            tau_position: 0.5,
        }
    }
}

impl SelectionPolicy {
    pub fn validate(&self) -> Result<()> {
        check_open_unit("lambda_offset", self.lambda_offset)?;
        check_open_unit("alpha_position", self.alpha_position)?;
        check_open_unit("tau_position", self.tau_position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedParams {
    pub params: RsmaParams,
    pub lambda_strict_lower: f64,
    pub alpha_interval: AlphaInterval,
    pub tau_bounds: TauBounds,
    #[serde(skip)]
    pub report: RateReport,
}

/// `alpha_c` at `position` within the feasible interval at `lambda`.
pub(crate) fn pick_alpha(iv: &AlphaInterval, position: f64) -> Option<f64> {
    iv.bounds().map(|(lb, ub)| lb + position * (ub - lb))
}

/// `tau` at `position` within the window where both users gain.
pub(crate) fn pick_tau(tb: &TauBounds, position: f64) -> Option<f64> {
    tb.window().map(|(lo, hi)| lo + position * (hi - lo))
}

/// Pick `lambda`, `alpha_c` and `tau` in turn from the strict bounds and
/// check that both users end up above their OMA rates.
pub fn select_params(
    sinr: &SinrPair,
    beta: f64,
    policy: &SelectionPolicy,
) -> Result<SelectedParams> {
    check_closed_unit("beta", beta)?;
    policy.validate()?;
    let lambda_lower = lambda_strict_lower(sinr, beta)?;
    let lambda = lambda_lower + policy.lambda_offset * (1.0 - lambda_lower);
    let alpha_interval = alpha_feasible_interval(sinr, lambda, beta)?;
    let alpha_c = pick_alpha(&alpha_interval, policy.alpha_position).ok_or_else(|| {
        Error::InternalContractViolation(format!(
            "no alpha_c interval at lambda = {lambda} above the strict bound {lambda_lower}"
        ))
    })?;
    let tb = tau_bounds(sinr, alpha_c, lambda, beta)?;
    let tau = pick_tau(&tb, policy.tau_position).ok_or_else(|| {
        Error::InternalContractViolation(format!(
            "empty tau window ({}, {}) inside the alpha_c interval",
            tb.lower, tb.upper
        ))
    })?;
    let params = RsmaParams::new(alpha_c, lambda, tau, beta)?;
    let report = split_rates(sinr, alpha_c, lambda, beta)?.report(tau);
    if !report.both_users_gain() {
        return Err(Error::InternalContractViolation(format!(
            "selected {params:?} gives r_rsma_s - r_oma_s = {}, r_rsma_w - r_oma_w = {}",
            report.r_rsma_s - report.r_oma_s,
            report.r_rsma_w - report.r_oma_w
        )));
    }
    Ok(SelectedParams {
        params,
        lambda_strict_lower: lambda_lower,
        alpha_interval,
        tau_bounds: tb,
        report,
    })
}

/// Smallest `beta` at which the strong user stops beating OMA.
///
/// Returns 0 when it already loses at perfect SIC and 1 when it wins for
/// every `beta`.
pub fn beta_crossover(sinr: &SinrPair, alpha_c: f64, lambda: f64, tau: f64) -> Result<f64> {
    check_open_unit("tau", tau)?;
    let gap = |beta: f64| -> Result<f64> {
        let r = split_rates(sinr, alpha_c, lambda, beta)?.report(tau);
        Ok(r.r_rsma_s - r.r_oma_s)
    };
    if gap(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    if gap(1.0)? > 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BETA_TOL {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

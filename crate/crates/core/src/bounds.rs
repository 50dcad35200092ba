//! Closed-form bounds on `tau`, `alpha_c` and `lambda`.
//!
//! Every expression here is a necessary or sufficient condition for
//! `R^rsma_x > R^oma_x` written in terms of `(gamma_s, gamma_w)` and the
//! power fractions. Out-of-range values are returned as-is; callers decide
//! feasibility with the predicates on the returned types.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rate_model::{check_closed_unit, check_open_unit, SinrPair};

/// Magnitude under which a denominator or a log argument counts as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

fn ratio_of_logs(num_arg: f64, den_arg: f64, what: &str) -> Result<f64> {
    if [num_arg, den_arg]
        .iter()
        .any(|v| v.is_nan() || *v <= SINGULAR_EPS)
    {
        return Err(Error::NumericalDomain(format!(
            "{what}: log argument not positive (numerator {num_arg}, denominator {den_arg})"
        )));
    }
    let den = den_arg.ln();
    if den.abs() < SINGULAR_EPS {
        return Err(Error::NumericalDomain(format!(
            "{what}: common-rate log {den} is singular"
        )));
    }
    Ok(num_arg.ln() / den)
}

fn check_power_fractions(alpha_c: f64, lambda: f64, beta: f64) -> Result<()> {
    check_open_unit("alpha_c", alpha_c)?;
    check_open_unit("lambda", lambda)?;
    check_closed_unit("beta", beta)
}

/// `log2(1 + gamma_cw)` written the way the tau bounds print it.
fn common_log_arg(gw: f64, alpha_c: f64) -> f64 {
    (gw + 1.0) / (gw * (1.0 - alpha_c) + 1.0)
}

/// Smallest `tau` for which the strong user beats OMA.
///
/// May come out negative (the strong user needs none of the common rate)
/// or above one (no split of the common rate is enough).
pub fn tau_lower(sinr: &SinrPair, alpha_c: f64, lambda: f64, beta: f64) -> Result<f64> {
    check_power_fractions(alpha_c, lambda, beta)?;
    let gs = sinr.gamma_s();
    let num = (1.0 + gs).sqrt()
        * (beta * alpha_c * gs + gs * (1.0 - lambda) * (1.0 - alpha_c) + 1.0)
        / (alpha_c * gs * (beta - 1.0) + (gs + 1.0));
    ratio_of_logs(num, common_log_arg(sinr.gamma_w(), alpha_c), "tau_lower")
}

/// Largest `tau` for which the weak user beats OMA.
pub fn tau_upper(sinr: &SinrPair, alpha_c: f64, lambda: f64, beta: f64) -> Result<f64> {
    check_power_fractions(alpha_c, lambda, beta)?;
    let gw = sinr.gamma_w();
    let num = (gw + 1.0) * (alpha_c * gw * (beta - 1.0) + (gw + 1.0))
        / ((1.0 + gw).sqrt()
            * (gw * (1.0 - alpha_c) + 1.0)
            * (beta * alpha_c * gw + lambda * gw * (1.0 - alpha_c) + 1.0));
    ratio_of_logs(num, common_log_arg(gw, alpha_c), "tau_upper")
}

/// Raw `tau` bounds at one `(alpha_c, lambda, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauBounds {
    pub lower: f64,
    pub upper: f64,
}

impl TauBounds {
    /// The admissible `tau` window `(max(lower, 0), min(upper, 1))`, if non-empty.
    pub fn window(&self) -> Option<(f64, f64)> {
        let lo = self.lower.max(0.0);
        let hi = self.upper.min(1.0);
        (lo < hi).then_some((lo, hi))
    }

    pub fn is_feasible(&self) -> bool {
        self.window().is_some()
    }
}

pub fn tau_bounds(sinr: &SinrPair, alpha_c: f64, lambda: f64, beta: f64) -> Result<TauBounds> {
    Ok(TauBounds {
        lower: tau_lower(sinr, alpha_c, lambda, beta)?,
        upper: tau_upper(sinr, alpha_c, lambda, beta)?,
    })
}

/// `lambda` at which the denominator of [`alpha_lower`] changes sign.
pub fn alpha_lower_threshold(sinr: &SinrPair, beta: f64) -> f64 {
    let r = (1.0 + sinr.gamma_s()).sqrt();
    (r - 1.0) * (1.0 - beta) / r
}

/// `lambda` at which the denominator of [`alpha_soft_upper`] changes sign.
pub fn alpha_soft_upper_threshold(sinr: &SinrPair, beta: f64) -> f64 {
    let q = (1.0 + sinr.gamma_w()).sqrt();
    (beta * (q - 1.0) + 1.0) / q
}

/// `alpha_LB`: above it the strong user's private rate alone falls short of
/// its OMA rate, so `tau_lower > 0`.
pub fn alpha_lower(sinr: &SinrPair, lambda: f64, beta: f64) -> Result<f64> {
    check_open_unit("lambda", lambda)?;
    check_closed_unit("beta", beta)?;
    let gs = sinr.gamma_s();
    let r = (1.0 + gs).sqrt();
    let num = r * (lambda * gs - gs - 1.0) + gs + 1.0;
    let den = gs * (r * (beta - 1.0 + lambda) + 1.0 - beta);
    if den <= SINGULAR_EPS {
        return Err(Error::DenominatorSignViolation {
            bound: "alpha_lower",
            lambda,
            threshold: alpha_lower_threshold(sinr, beta),
        });
    }
    Ok(num / den)
}

/// The weak-user counterpart of [`alpha_lower`]. Not a usable upper bound:
/// whenever its denominator is positive the value is at least one.
pub fn alpha_soft_upper(sinr: &SinrPair, lambda: f64, beta: f64) -> Result<f64> {
    check_open_unit("lambda", lambda)?;
    check_closed_unit("beta", beta)?;
    let gw = sinr.gamma_w();
    let q = (1.0 + gw).sqrt();
    let num = q * (lambda * gw + 1.0) - (1.0 + gw);
    let den = gw * (q * (lambda - beta) + beta - 1.0);
    if den.abs() <= SINGULAR_EPS {
        return Err(Error::DenominatorSignViolation {
            bound: "alpha_soft_upper",
            lambda,
            threshold: alpha_soft_upper_threshold(sinr, beta),
        });
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaBounds {
    pub lower: f64,
    pub soft_upper: f64,
    /// End of the first negative stretch of the feasibility cubic above `lower`.
    pub strict_upper: Option<f64>,
}

/// Cubic in `alpha_c` whose negativity is equivalent to `tau_lower < tau_upper`,
/// together with the auxiliary terms it is built from.
///
/// Derivation: with all factors positive, `tau_lower < tau_upper` reads
///
/// ```text
/// A * N_s * P_w * Q_w  <  (gamma_w + 1) * N_w * D_s
/// ```
///
/// where `N_s, D_s` are the numerator/denominator of `1 + gamma_ps`,
/// `N_w, Q_w` those of `1 + gamma_pw`, and `P_w = gamma_w (1 - alpha_c) + 1`.
/// Dividing by `A` and expanding gives the coefficients below. The linear
/// coefficient's `1/A` term collects
/// `(gamma_w + 1) * (gamma_s (beta - 1) (gamma_w + 1) + gamma_w (beta - 1) (gamma_s + 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicCoeffs {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub a_term: f64,
    pub b_term: f64,
    pub c_term: f64,
    pub d_term: f64,
}

impl CubicCoeffs {
    pub fn eval(&self, alpha: f64) -> f64 {
        ((self.c3 * alpha + self.c2) * alpha + self.c1) * alpha + self.c0
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c3
            .abs()
            .max(self.c2.abs())
            .max(self.c1.abs())
            .max(self.c0.abs())
    }

    /// Real stationary points, ascending.
    pub fn critical_points(&self) -> Vec<f64> {
        // 3 c3 x^2 + 2 c2 x + c1
        let (a, b, c) = (3.0 * self.c3, 2.0 * self.c2, self.c1);
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        if a.abs() <= 1e-14 * scale {
            if b.abs() <= 1e-14 * scale {
                return Vec::new();
            }
            return vec![-c / b];
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Vec::new();
        }
        // numerically stable quadratic roots
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        let mut roots = if q == 0.0 {
            vec![0.0]
        } else {
            vec![q / a, c / q]
        };
        roots.sort_by(f64::total_cmp);
        roots.dedup();
        roots
    }
}

pub fn cubic_coeffs(sinr: &SinrPair, lambda: f64, beta: f64) -> Result<CubicCoeffs> {
    check_open_unit("lambda", lambda)?;
    check_closed_unit("beta", beta)?;
    let (gs, gw) = (sinr.gamma_s(), sinr.gamma_w());
    let a = (1.0 + gs).sqrt() * (1.0 + gw).sqrt();
    let b = beta * (beta - 1.0) + lambda * (1.0 - lambda);
    let cross = lambda * (gs * gw * (1.0 - lambda) + gw - gs);
    let c = beta * (gs + gw) + gs * gw * (beta - lambda * (1.0 - lambda)) - cross - gs;
    let d = cross + gs + 1.0;

    let c3 = -gs * gw * gw * b;
    let c2 = gw * (gs * b * (gw + 1.0) - c) - gs * gw * (beta - 1.0).powi(2) * (gw + 1.0) / a;
    let c1 = gw * (c - d) + c - (beta - 1.0) * (gw + 1.0) * (gs + gw + 2.0 * gs * gw) / a;
    let c0 = (gw + 1.0) * (d - (gs + 1.0) * (gw + 1.0) / a);
    Ok(CubicCoeffs {
        c3,
        c2,
        c1,
        c0,
        a_term: a,
        b_term: b,
        c_term: c,
        d_term: d,
    })
}

/// The four necessary lower bounds on `lambda` and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaBounds {
    /// Keeps the numerator of `alpha_LB` positive.
    pub lam_s_num: f64,
    /// Keeps the denominator of `alpha_LB` positive.
    pub lam_s_den: f64,
    /// Keeps the numerator of the soft upper `alpha` bound positive.
    pub lam_w_num: f64,
    /// Keeps the denominator of the soft upper `alpha` bound positive.
    pub lam_w_den: f64,
    pub soft_lower: f64,
}

pub fn lambda_soft_lower(sinr: &SinrPair, beta: f64) -> Result<LambdaBounds> {
    check_closed_unit("beta", beta)?;
    let (gs, gw) = (sinr.gamma_s(), sinr.gamma_w());
    let r = (1.0 + gs).sqrt();
    let q = (1.0 + gw).sqrt();
    let lam_s_num = (r - 1.0) * r / gs;
    let lam_s_den = alpha_lower_threshold(sinr, beta);
    let lam_w_num = (q - 1.0) / gw;
    let lam_w_den = alpha_soft_upper_threshold(sinr, beta);
    Ok(LambdaBounds {
        lam_s_num,
        lam_s_den,
        lam_w_num,
        lam_w_den,
        soft_lower: lam_s_num.max(lam_s_den).max(lam_w_num).max(lam_w_den),
    })
}

//! SINR and rate expressions for OMA and one-layer two-user RSMA with
//! imperfect successive interference cancellation.
//!
//! Everything downstream works in the normalized form where only the power
//! fractions and the OMA SINRs enter: dividing the raw-power SINR of the
//! common stream by `P_t` gives
//!
//! ```text
//! gamma_cx = alpha_c gamma_x / ((1 - alpha_c) gamma_x + 1)
//! ```
//!
//! and the private-stream SINRs carry `beta * alpha_c * gamma_x` of residual
//! common-stream power after cancellation. `beta = 0` is perfect SIC,
//! `beta = 1` leaves the whole common stream as interference.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::units::db_to_linear;

/// Relative margin below which `gamma_s` and `gamma_w` count as equal.
const PAIR_TOLERANCE: f64 = 1e-12;

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be > 0, got {v}")))
    }
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be >= 0, got {v}")))
    }
}

pub(crate) fn check_open_unit(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in (0, 1), got {v}")))
    }
}

pub(crate) fn check_closed_unit(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 1], got {v}")))
    }
}

/// Physical-layer inputs for one strong/weak user pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Transmit power in watts.
    pub p_t: f64,
    /// Channel power gain of the strong user.
    pub gain_s: f64,
    /// Channel power gain of the weak user.
    pub gain_w: f64,
    /// Noise variance in watts.
    pub noise: f64,
    /// Aggregate interference at the strong user in watts.
    pub interference_s: f64,
    /// Aggregate interference at the weak user in watts.
    pub interference_w: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        check_positive("p_t", self.p_t)?;
        check_positive("gain_s", self.gain_s)?;
        check_positive("gain_w", self.gain_w)?;
        check_positive("noise", self.noise)?;
        check_nonnegative("interference_s", self.interference_s)?;
        check_nonnegative("interference_w", self.interference_w)?;
        if self.gain_s < self.gain_w {
            return Err(invalid(format!(
                "gain_s = {} must not be below gain_w = {}",
                self.gain_s, self.gain_w
            )));
        }
        Ok(())
    }
}

/// Ordered OMA SINRs of the strong and weak user, in linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrPair {
    gamma_s: f64,
    gamma_w: f64,
}

impl SinrPair {
    pub fn new(gamma_s: f64, gamma_w: f64) -> Result<Self> {
        check_positive("gamma_s", gamma_s)?;
        check_positive("gamma_w", gamma_w)?;
        if gamma_s <= gamma_w * (1.0 + PAIR_TOLERANCE) {
            return Err(Error::DegeneratePair { gamma_s, gamma_w });
        }
        Ok(Self { gamma_s, gamma_w })
    }

    pub fn from_db(gamma_s_db: f64, gamma_w_db: f64) -> Result<Self> {
        check_finite("gamma_s_db", gamma_s_db)?;
        check_finite("gamma_w_db", gamma_w_db)?;
        Self::new(db_to_linear(gamma_s_db), db_to_linear(gamma_w_db))
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn gamma_w(&self) -> f64 {
        self.gamma_w
    }
}

/// OMA SINR per user: `P_t |h_u|^2 / (noise + I_u)`.
pub fn oma_sinr(budget: &LinkBudget) -> Result<SinrPair> {
    budget.validate()?;
    let gamma_s = budget.p_t * budget.gain_s / (budget.noise + budget.interference_s);
    let gamma_w = budget.p_t * budget.gain_w / (budget.noise + budget.interference_w);
    SinrPair::new(gamma_s, gamma_w)
}

/// OMA rate with the half pre-log of the orthogonal split, in bits/s/Hz.
pub fn oma_rate(gamma: f64) -> Result<f64> {
    check_nonnegative("gamma", gamma)?;
    Ok(0.5 * gamma.ln_1p() / std::f64::consts::LN_2)
}

#[inline]
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// The RSMA decision variables plus the SIC imperfection coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsmaParams {
    pub alpha_c: f64,
    pub lambda: f64,
    pub tau: f64,
    pub beta: f64,
}

impl RsmaParams {
    pub fn new(alpha_c: f64, lambda: f64, tau: f64, beta: f64) -> Result<Self> {
        let p = Self {
            alpha_c,
            lambda,
            tau,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("alpha_c", self.alpha_c)?;
        check_open_unit("lambda", self.lambda)?;
        check_open_unit("tau", self.tau)?;
        check_closed_unit("beta", self.beta)
    }

    pub fn power_split(&self, p_t: f64) -> PowerSplit {
        let p_c = self.alpha_c * p_t;
        let rest = p_t - p_c;
        PowerSplit {
            p_c,
            p_ps: self.lambda * rest,
            p_pw: (1.0 - self.lambda) * rest,
        }
    }
}

/// Stream powers implied by `alpha_c` and `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub p_c: f64,
    pub p_ps: f64,
    pub p_pw: f64,
}

impl PowerSplit {
    pub fn total(&self) -> f64 {
        self.p_c + self.p_ps + self.p_pw
    }
}

/// Per-stream SINRs of the RSMA pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsmaSinrs {
    pub gamma_cs: f64,
    pub gamma_cw: f64,
    pub gamma_ps: f64,
    pub gamma_pw: f64,
}

pub(crate) fn sinrs_raw(sinr: &SinrPair, alpha_c: f64, lambda: f64, beta: f64) -> RsmaSinrs {
    let (gs, gw) = (sinr.gamma_s, sinr.gamma_w);
    let rest = 1.0 - alpha_c;
    RsmaSinrs {
        gamma_cs: alpha_c * gs / (rest * gs + 1.0),
        gamma_cw: alpha_c * gw / (rest * gw + 1.0),
        gamma_ps: lambda * rest * gs / (beta * alpha_c * gs + (1.0 - lambda) * rest * gs + 1.0),
        gamma_pw: (1.0 - lambda) * rest * gw / (beta * alpha_c * gw + lambda * rest * gw + 1.0),
    }
}

fn check_split_inputs(alpha_c: f64, lambda: f64, beta: f64) -> Result<()> {
    check_open_unit("alpha_c", alpha_c)?;
    check_open_unit("lambda", lambda)?;
    check_closed_unit("beta", beta)
}

/// Normalized stream SINRs. `params.tau` plays no part but is validated.
pub fn rsma_sinrs(sinr: &SinrPair, params: &RsmaParams) -> Result<RsmaSinrs> {
    params.validate()?;
    Ok(sinrs_raw(sinr, params.alpha_c, params.lambda, params.beta))
}

/// Stream SINRs from raw powers, channel gains, noise and interference.
pub fn rsma_sinrs_from_budget(budget: &LinkBudget, params: &RsmaParams) -> Result<RsmaSinrs> {
    budget.validate()?;
    params.validate()?;
    let split = params.power_split(budget.p_t);
    let nis = budget.noise + budget.interference_s;
    let niw = budget.noise + budget.interference_w;
    let (hs, hw) = (budget.gain_s, budget.gain_w);
    let residual = params.beta * split.p_c;
    Ok(RsmaSinrs {
        gamma_cs: split.p_c * hs / ((split.p_ps + split.p_pw) * hs + nis),
        gamma_cw: split.p_c * hw / ((split.p_ps + split.p_pw) * hw + niw),
        gamma_ps: split.p_ps * hs / ((residual + split.p_pw) * hs + nis),
        gamma_pw: split.p_pw * hw / ((residual + split.p_ps) * hw + niw),
    })
}

/// Common and private rates before the common rate is divided by `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRates {
    pub r_oma_s: f64,
    pub r_oma_w: f64,
    pub r_comm_s: f64,
    pub r_comm_w: f64,
    pub r_comm: f64,
    pub r_priv_s: f64,
    pub r_priv_w: f64,
}

impl SplitRates {
    /// Full report with `tau` of the common rate credited to the strong user.
    /// `tau` may sit on the closed interval here; search code probes the ends.
    pub fn report(&self, tau: f64) -> RateReport {
        let r_rsma_s = tau * self.r_comm + self.r_priv_s;
        let r_rsma_w = (1.0 - tau) * self.r_comm + self.r_priv_w;
        RateReport {
            r_oma_s: self.r_oma_s,
            r_oma_w: self.r_oma_w,
            r_comm_s: self.r_comm_s,
            r_comm_w: self.r_comm_w,
            r_comm: self.r_comm,
            r_priv_s: self.r_priv_s,
            r_priv_w: self.r_priv_w,
            r_rsma_s,
            r_rsma_w,
            sum_rsma: self.r_comm + self.r_priv_s + self.r_priv_w,
            sum_oma: self.r_oma_s + self.r_oma_w,
        }
    }
}

/// Rates for a given power split, independent of `tau`.
pub fn split_rates(sinr: &SinrPair, alpha_c: f64, lambda: f64, beta: f64) -> Result<SplitRates> {
    check_split_inputs(alpha_c, lambda, beta)?;
    Ok(split_rates_raw(sinr, alpha_c, lambda, beta))
}

pub(crate) fn split_rates_raw(sinr: &SinrPair, alpha_c: f64, lambda: f64, beta: f64) -> SplitRates {
    let s = sinrs_raw(sinr, alpha_c, lambda, beta);
    let r_comm_s = log2_1p(s.gamma_cs);
    let r_comm_w = log2_1p(s.gamma_cw);
    SplitRates {
        r_oma_s: 0.5 * log2_1p(sinr.gamma_s),
        r_oma_w: 0.5 * log2_1p(sinr.gamma_w),
        r_comm_s,
        r_comm_w,
        r_comm: r_comm_s.min(r_comm_w),
        r_priv_s: log2_1p(s.gamma_ps),
        r_priv_w: log2_1p(s.gamma_pw),
    }
}

/// All OMA and RSMA rates for one configuration, in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub r_oma_s: f64,
    pub r_oma_w: f64,
    pub r_comm_s: f64,
    pub r_comm_w: f64,
    pub r_comm: f64,
    pub r_priv_s: f64,
    pub r_priv_w: f64,
    pub r_rsma_s: f64,
    pub r_rsma_w: f64,
    pub sum_rsma: f64,
    pub sum_oma: f64,
}

impl RateReport {
    /// Both users strictly better off than under OMA.
    pub fn both_users_gain(&self) -> bool {
        self.r_rsma_s > self.r_oma_s && self.r_rsma_w > self.r_oma_w
    }

    /// `(name, value)` pairs in a fixed order.
    pub fn fields(&self) -> [(&'static str, f64); 11] {
        [
            ("r_oma_s", self.r_oma_s),
            ("r_oma_w", self.r_oma_w),
            ("r_comm_s", self.r_comm_s),
            ("r_comm_w", self.r_comm_w),
            ("r_comm", self.r_comm),
            ("r_priv_s", self.r_priv_s),
            ("r_priv_w", self.r_priv_w),
            ("r_rsma_s", self.r_rsma_s),
            ("r_rsma_w", self.r_rsma_w),
            ("sum_rsma", self.sum_rsma),
            ("sum_oma", self.sum_oma),
        ]
    }
}

pub fn rsma_rates(sinr: &SinrPair, params: &RsmaParams) -> Result<RateReport> {
    params.validate()?;
    Ok(split_rates_raw(sinr, params.alpha_c, params.lambda, params.beta).report(params.tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nominal_pair() -> SinrPair {
        SinrPair::from_db(6.0, 2.0).unwrap()
    }

    fn rounded_pair() -> SinrPair {
        SinrPair::new(3.9811, 1.5849).unwrap()
    }

    #[test]
    fn oma_sinr_direct_ratio() {
        let b = LinkBudget {
            p_t: 1.0,
            gain_s: 1.0,
            gain_w: 0.5,
            noise: 1.0,
            interference_s: 0.0,
            interference_w: 0.0,
        };
        let p = oma_sinr(&b).unwrap();
        assert_eq!((p.gamma_s(), p.gamma_w()), (1.0, 0.5));

        let b = LinkBudget {
            p_t: 2.0,
            gain_s: 3.0,
            gain_w: 1.0,
            noise: 1.0,
            interference_s: 1.0,
            interference_w: 3.0,
        };
        let p = oma_sinr(&b).unwrap();
        assert_eq!((p.gamma_s(), p.gamma_w()), (3.0, 0.5));
    }

    #[test]
    fn oma_sinr_reaches_nominal_working_point() {
        let b = LinkBudget {
            p_t: 1.0,
            gain_s: db_to_linear(6.0),
            gain_w: db_to_linear(2.0),
            noise: 1.0,
            interference_s: 0.0,
            interference_w: 0.0,
        };
        let p = oma_sinr(&b).unwrap();
        assert!((p.gamma_s() - 3.9811).abs() < 1e-4);
        assert!((p.gamma_w() - 1.5849).abs() < 1e-4);
    }

    #[test]
    fn oma_sinr_errors() {
        let base = LinkBudget {
            p_t: 1.0,
            gain_s: 1.0,
            gain_w: 1.0,
            noise: 1.0,
            interference_s: 0.0,
            interference_w: 0.0,
        };
        assert!(matches!(oma_sinr(&base), Err(Error::DegeneratePair { .. })));
        // equal gains but more interference at s also collapses the ordering
        let b = LinkBudget {
            gain_s: 2.0,
            interference_s: 1.0,
            ..base
        };
        assert!(matches!(oma_sinr(&b), Err(Error::DegeneratePair { .. })));
        for bad in [
            LinkBudget { p_t: 0.0, ..base },
            LinkBudget {
                noise: -1.0,
                ..base
            },
            LinkBudget {
                gain_w: 0.0,
                ..base
            },
            LinkBudget {
                interference_w: -0.1,
                ..base
            },
            LinkBudget {
                gain_s: f64::NAN,
                ..base
            },
            LinkBudget {
                gain_s: 0.5,
                ..base
            },
        ] {
            assert!(
                matches!(oma_sinr(&bad), Err(Error::InvalidInput(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn sinr_pair_rejects_equal_and_reversed() {
        assert!(matches!(
            SinrPair::new(2.0, 2.0),
            Err(Error::DegeneratePair { .. })
        ));
        assert!(matches!(
            SinrPair::from_db(2.0, 6.0),
            Err(Error::DegeneratePair { .. })
        ));
        assert!(SinrPair::new(0.0, -1.0).is_err());
    }

    #[test]
    fn oma_rate_values() {
        assert_eq!(oma_rate(3.0).unwrap(), 1.0);
        assert_eq!(oma_rate(0.0).unwrap(), 0.0);
        // 0.5 log2(4.9811) from a 50-digit evaluation
        assert!((oma_rate(3.9811).unwrap() - 1.158_232_187_341_820_1).abs() < 1e-14);
        assert!(oma_rate(-0.1).is_err());
        assert!(oma_rate(f64::INFINITY).is_err());
    }

    #[test]
    fn rsma_sinr_examples() {
        let p = SinrPair::new(1.0, 0.5).unwrap();
        let s = rsma_sinrs(&p, &RsmaParams::new(0.5, 0.3, 0.5, 0.0).unwrap()).unwrap();
        assert!((s.gamma_cs - 1.0 / 3.0).abs() < 1e-15);

        // 50-digit references at (3.9811, 1.5849, 0.689, 0.99, beta 0)
        let s = rsma_sinrs(
            &rounded_pair(),
            &RsmaParams::new(0.689, 0.99, 0.1, 0.0).unwrap(),
        )
        .unwrap();
        assert!((s.gamma_ps - 1.210_750_311_813_616_7).abs() < 1e-12);
        assert!((s.gamma_cw - 0.731_457_731_472_2).abs() < 1e-12);
        assert!((s.gamma_cs - 1.225_571_160_751_238_7).abs() < 1e-12);
        assert!((s.gamma_pw - 0.003_312_582_174_061_34).abs() < 1e-14);
    }

    #[test]
    fn beta_one_treats_whole_common_stream_as_interference() {
        let pair = nominal_pair();
        let (a, l) = (0.4, 0.8);
        let s = rsma_sinrs(&pair, &RsmaParams::new(a, l, 0.5, 1.0).unwrap()).unwrap();
        let gs = pair.gamma_s();
        let expected = l * (1.0 - a) * gs / (a * gs + (1.0 - l) * (1.0 - a) * gs + 1.0);
        assert_eq!(s.gamma_ps, expected);
    }

    #[test]
    fn fig7_point_beats_oma_for_both_users() {
        let r = rsma_rates(
            &rounded_pair(),
            &RsmaParams::new(0.689, 0.99, 0.1, 0.0).unwrap(),
        )
        .unwrap();
        assert!(r.r_rsma_s > r.r_oma_s);
        assert!(r.r_rsma_w > r.r_oma_w);
        assert!(r.both_users_gain());
    }

    #[test]
    fn imperfect_sic_lowers_sum_rate() {
        let pair = rounded_pair();
        let r0 = rsma_rates(&pair, &RsmaParams::new(0.689, 0.99, 0.1, 0.0).unwrap()).unwrap();
        let r1 = rsma_rates(&pair, &RsmaParams::new(0.689, 0.99, 0.1, 0.1).unwrap()).unwrap();
        assert!(r1.sum_rsma < r0.sum_rsma);
    }

    #[test]
    fn report_identities() {
        let r = rsma_rates(
            &nominal_pair(),
            &RsmaParams::new(0.3, 0.6, 0.7, 0.2).unwrap(),
        )
        .unwrap();
        assert_eq!(r.r_comm, r.r_comm_w);
        assert_eq!(r.sum_oma, r.r_oma_s + r.r_oma_w);
        assert!((r.r_rsma_s + r.r_rsma_w - r.sum_rsma).abs() < 1e-14);
    }

    #[test]
    fn power_split_sums_to_total() {
        let p = RsmaParams::new(0.37, 0.81, 0.5, 0.0)
            .unwrap()
            .power_split(2.5);
        assert!((p.total() - 2.5).abs() <= 4.0 * f64::EPSILON * 2.5);
        assert_eq!(p.p_c, 0.37 * 2.5);
    }

    #[test]
    fn params_reject_closed_endpoints() {
        assert!(RsmaParams::new(0.0, 0.5, 0.5, 0.0).is_err());
        assert!(RsmaParams::new(0.5, 1.0, 0.5, 0.0).is_err());
        assert!(RsmaParams::new(0.5, 0.5, 1.0, 0.0).is_err());
        assert!(RsmaParams::new(0.5, 0.5, 0.5, 1.01).is_err());
        assert!(RsmaParams::new(0.5, 0.5, 0.5, 1.0).is_ok());
        assert!(RsmaParams::new(0.5, 0.5, 0.5, 0.0).is_ok());
    }
}

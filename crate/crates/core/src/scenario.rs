//! Scenario files: the user pair plus optional parameters, in TOML or JSON.
//!
//! ```toml
//! gamma_s_db = 6.0
//! gamma_w_db = 2.0
//! beta = 0.05
//! alpha_c = 0.689
//! lambda = 0.99
//! tau = 0.1
//!
//! [policy]
//! alpha_position = 0.5
//! ```
//!
//! Instead of the two dB values a `[link_budget]` table with `p_t`, `gain_s`,
//! `gain_w`, `noise`, `interference_s` and `interference_w` may be given.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::feasibility::SelectionPolicy;
use crate::rate_model::{oma_sinr, LinkBudget, SinrPair};

/// The user pair, given either as OMA SINRs in dB or as a link budget.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub gamma_s_db: Option<f64>,
    pub gamma_w_db: Option<f64>,
    pub link_budget: Option<LinkBudget>,
}

impl PairSpec {
    pub fn from_db(gamma_s_db: f64, gamma_w_db: f64) -> Self {
        Self {
            gamma_s_db: Some(gamma_s_db),
            gamma_w_db: Some(gamma_w_db),
            link_budget: None,
        }
    }

    pub fn sinr(&self) -> Result<SinrPair> {
        match (self.gamma_s_db, self.gamma_w_db, &self.link_budget) {
            (Some(s), Some(w), None) => SinrPair::from_db(s, w),
            (None, None, Some(b)) => oma_sinr(b),
            (None, None, None) => Err(invalid(
                "scenario needs gamma_s_db and gamma_w_db, or a link_budget table",
            )),
            (Some(_), Some(_), Some(_)) => Err(invalid(
                "scenario gives both dB SINRs and a link_budget; use exactly one",
            )),
            _ => Err(invalid("gamma_s_db and gamma_w_db must be given together")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub gamma_s_db: Option<f64>,
    pub gamma_w_db: Option<f64>,
    pub link_budget: Option<LinkBudget>,
    pub beta: Option<f64>,
    pub alpha_c: Option<f64>,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub policy: Option<SelectionPolicy>,
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("scenario: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("scenario: {e}")))
    }

    /// Read a scenario; `.json` files are parsed as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        if is_json(path) {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn pair(&self) -> PairSpec {
        PairSpec {
            gamma_s_db: self.gamma_s_db,
            gamma_w_db: self.gamma_w_db,
            link_budget: self.link_budget,
        }
    }

    pub fn sinr(&self) -> Result<SinrPair> {
        self.pair().sinr()
    }
}

pub(crate) fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

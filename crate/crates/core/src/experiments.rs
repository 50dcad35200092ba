//! Parameter sweeps written as CSV, and the bundled figure presets.
//!
//! A sweep file names the user pair, the output columns and one or more
//! series. Each series varies one of `lambda`, `alpha_c`, `tau`, `beta` over
//! `start..=end` in steps of `step`; every other parameter is fixed either to a
//! number or to `"select"`, which picks it the way [`select_params`] does:
//! `lambda` at the policy offset above the strict lower bound, `alpha_c` at the
//! policy position inside the feasible interval, and `tau` at the policy
//! position inside `(tau_lower, tau_upper)` when `0 < tau_lower < tau_upper < 1`.
//! A parameter that cannot be selected is left empty, and so are the columns
//! that depend on it.
//!
//! [`select_params`]: crate::feasibility::select_params

use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::bounds::{alpha_lower, alpha_soft_upper, cubic_coeffs, lambda_soft_lower, tau_bounds};
use crate::error::{invalid, Error, Result};
use crate::feasibility::{
    alpha_feasible_interval, beta_crossover, lambda_strict_lower, pick_alpha, AlphaInterval,
    SelectionPolicy,
};
use crate::format::fmt_csv;
use crate::rate_model::{
    check_closed_unit, check_open_unit, oma_rate, sinrs_raw, split_rates, SinrPair,
};
use crate::scenario::{is_json, read_text, PairSpec};

pub const PRESET_NAMES: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

const PRESETS: [(&str, &str); 6] = [
    ("fig2", include_str!("../scenarios/fig2.toml")),
    ("fig3", include_str!("../scenarios/fig3.toml")),
    ("fig4", include_str!("../scenarios/fig4.toml")),
    ("fig5", include_str!("../scenarios/fig5.toml")),
    ("fig6", include_str!("../scenarios/fig6.toml")),
    ("fig7", include_str!("../scenarios/fig7.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Lambda,
    AlphaC,
    Tau,
    Beta,
}

impl Variable {
    pub fn name(self) -> &'static str {
        match self {
            Variable::Lambda => "lambda",
            Variable::AlphaC => "alpha_c",
            Variable::Tau => "tau",
            Variable::Beta => "beta",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSetting {
    Value(f64),
    Word(String),
}

/// A fixed parameter: a number, or `"select"`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "RawSetting")]
pub enum Setting {
    Value(f64),
    Select,
}

impl TryFrom<RawSetting> for Setting {
    type Error = String;

    fn try_from(raw: RawSetting) -> std::result::Result<Self, String> {
        match raw {
            RawSetting::Value(v) => Ok(Setting::Value(v)),
            RawSetting::Word(w) if w == "select" => Ok(Setting::Select),
            RawSetting::Word(w) => Err(format!("expected a number or \"select\", got {w:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub alpha_c: Option<Setting>,
    pub lambda: Option<Setting>,
    pub tau: Option<Setting>,
    pub beta: Option<f64>,
}

macro_rules! outputs {
    ($($variant:ident => $name:literal,)*) => {
        /// Output column vocabulary.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
        #[serde(try_from = "String")]
        pub enum Output {
            $($variant,)*
        }

        impl Output {
            pub const ALL: &'static [Output] = &[$(Output::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Output::$variant => $name,)*
                }
            }
        }
    };
}

outputs! {
    ROmaS => "r_oma_s",
    ROmaW => "r_oma_w",
    RCommS => "r_comm_s",
    RCommW => "r_comm_w",
    RComm => "r_comm",
    RPrivS => "r_priv_s",
    RPrivW => "r_priv_w",
    RRsmaS => "r_rsma_s",
    RRsmaW => "r_rsma_w",
    SumRsma => "sum_rsma",
    SumOma => "sum_oma",
    GammaCs => "gamma_cs",
    GammaCw => "gamma_cw",
    GammaPs => "gamma_ps",
    GammaPw => "gamma_pw",
    TauLower => "tau_lower",
    TauUpper => "tau_upper",
    AlphaLb => "alpha_lb",
    AlphaUb => "alpha_ub",
    AlphaSoftUb => "alpha_soft_ub",
    Cubic => "cubic",
    LambdaSoftLower => "lambda_soft_lower",
    LambdaStrictLower => "lambda_strict_lower",
    BetaCrossover => "beta_crossover",
}

impl TryFrom<String> for Output {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        Output::ALL
            .iter()
            .copied()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown output column {s:?}"))
    }
}

/// One series of a sweep file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub variable: Variable,
    pub start: f64,
    pub end: f64,
    pub step: f64,
    #[serde(default)]
    pub fixed: FixedParams,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub name: Option<String>,
    pub scenario: PairSpec,
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub policy: SelectionPolicy,
    pub sweep: Vec<SeriesSpec>,
}

/// A single one-variable sweep, fully specified.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: PairSpec,
    pub variable: Variable,
    pub start: f64,
    pub end: f64,
    pub step: f64,
    pub fixed: FixedParams,
    pub outputs: Vec<Output>,
    pub policy: SelectionPolicy,
}

impl SweepFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("sweep file: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("sweep file: {e}")))
    }

    /// Read a sweep file; `.json` is parsed as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        if is_json(path) {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn specs(&self) -> Vec<SweepSpec> {
        self.sweep
            .iter()
            .map(|s| SweepSpec {
                scenario: self.scenario,
                variable: s.variable,
                start: s.start,
                end: s.end,
                step: s.step,
                fixed: s.fixed,
                outputs: self.outputs.clone(),
                policy: self.policy,
            })
            .collect()
    }
}

pub fn preset(name: &str) -> Result<SweepFile> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        invalid(format!(
            "unknown preset {name:?}; known: {}",
            PRESET_NAMES.join(", ")
        ))
    })?;
    SweepFile::from_toml(text)
}

impl SweepSpec {
    pub fn validate(&self) -> Result<SinrPair> {
        let sinr = self.scenario.sinr()?;
        self.policy.validate()?;
        if self.outputs.is_empty() {
            return Err(invalid("at least one output column is required"));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.step.is_finite()) {
            return Err(invalid("sweep range must be finite"));
        }
        if !(self.step > 0.0 && self.start <= self.end) {
            return Err(invalid(format!(
                "sweep range needs start <= end and step > 0, got ({}, {}, {})",
                self.start, self.end, self.step
            )));
        }
        let name = self.variable.name();
        let check = |v: f64| match self.variable {
            Variable::Beta => check_closed_unit(name, v),
            _ => check_open_unit(name, v),
        };
        check(self.start)?;
        check(self.end)?;

        let f = &self.fixed;
        let slots = [
            (Variable::Lambda, f.lambda),
            (Variable::AlphaC, f.alpha_c),
            (Variable::Tau, f.tau),
        ];
        for (var, setting) in slots {
            if var == self.variable {
                if setting.is_some() {
                    return Err(invalid(format!(
                        "{} is the sweep variable and cannot be fixed",
                        var.name()
                    )));
                }
                continue;
            }
            match setting {
                None => return Err(invalid(format!("fixed.{} is required", var.name()))),
                Some(Setting::Value(v)) => check_open_unit(var.name(), v)?,
                Some(Setting::Select) => {}
            }
        }
        match (self.variable, f.beta) {
            (Variable::Beta, Some(_)) => {
                return Err(invalid("beta is the sweep variable and cannot be fixed"))
            }
            (Variable::Beta, None) => {}
            (_, None) => return Err(invalid("fixed.beta is required")),
            (_, Some(b)) => check_closed_unit("beta", b)?,
        }
        Ok(sinr)
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: Option<f64>,
    pub alpha_c: Option<f64>,
    pub tau: Option<f64>,
    pub beta: Option<f64>,
    pub values: Vec<Option<f64>>,
    pub feasible: bool,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub outputs: Vec<Output>,
    pub rows: Vec<SweepRow>,
}

impl Table {
    pub fn header(&self) -> Vec<&'static str> {
        let mut h = vec!["lambda", "alpha_c", "tau", "beta"];
        h.extend(self.outputs.iter().map(|o| o.name()));
        h.extend(["feasible", "error"]);
        h
    }

    /// Values of one output column, in row order.
    pub fn column(&self, output: Output) -> Option<Vec<Option<f64>>> {
        let k = self.outputs.iter().position(|&o| o == output)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| invalid(format!("writing CSV: {e}"));
        w.write_record(self.header()).map_err(io)?;
        let cell = |v: Option<f64>| v.map(fmt_csv).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![cell(r.lambda), cell(r.alpha_c), cell(r.tau), cell(r.beta)];
            rec.extend(r.values.iter().map(|&v| cell(v)));
            rec.push(r.feasible.to_string());
            rec.push(r.error.clone());
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| invalid(format!("writing CSV: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

struct RowEval<'a> {
    sinr: &'a SinrPair,
    beta: f64,
    lambda: Option<f64>,
    alpha_c: Option<f64>,
    tau: Option<f64>,
    interval: Option<Result<AlphaInterval>>,
    errors: Vec<String>,
}

impl RowEval<'_> {
    fn note(&mut self, e: Error) {
        let msg = e.to_string();
        if !self.errors.contains(&msg) {
            self.errors.push(msg);
        }
    }

    fn ok<T>(&mut self, r: Result<T>) -> Option<T> {
        r.map_err(|e| self.note(e)).ok()
    }

    fn interval(&mut self) -> Option<AlphaInterval> {
        let lambda = self.lambda?;
        if self.interval.is_none() {
            self.interval = Some(alpha_feasible_interval(self.sinr, lambda, self.beta));
        }
        let r = self.interval.clone().expect("just filled");
        self.ok(r)
    }
}

fn eval_row(spec: &SweepSpec, sinr: &SinrPair, v: f64) -> SweepRow {
    let f = &spec.fixed;
    let pick = |var: Variable, s: Option<Setting>| -> Option<Setting> {
        if spec.variable == var {
            Some(Setting::Value(v))
        } else {
            s
        }
    };
    let beta = if spec.variable == Variable::Beta {
        v
    } else {
        f.beta.expect("validated")
    };
    let mut e = RowEval {
        sinr,
        beta,
        lambda: None,
        alpha_c: None,
        tau: None,
        interval: None,
        errors: Vec::new(),
    };
    let policy = &spec.policy;

    e.lambda = match pick(Variable::Lambda, f.lambda).expect("validated") {
        Setting::Value(l) => Some(l),
        Setting::Select => {
            let r = lambda_strict_lower(sinr, beta);
            e.ok(r).map(|lo| lo + policy.lambda_offset * (1.0 - lo))
        }
    };
    e.alpha_c = match pick(Variable::AlphaC, f.alpha_c).expect("validated") {
        Setting::Value(a) => Some(a),
        Setting::Select => e
            .interval()
            .and_then(|iv| pick_alpha(&iv, policy.alpha_position)),
    };
    e.tau = match pick(Variable::Tau, f.tau).expect("validated") {
        Setting::Value(t) => Some(t),
        Setting::Select => match (e.alpha_c, e.lambda) {
            (Some(a), Some(l)) => {
                let r = tau_bounds(sinr, a, l, beta);
                e.ok(r).and_then(|tb| {
                    (0.0 < tb.lower && tb.lower < tb.upper && tb.upper < 1.0)
                        .then_some(tb.lower + policy.tau_position * (tb.upper - tb.lower))
                })
            }
            _ => None,
        },
    };

    let al = e.alpha_c.zip(e.lambda);
    let rates = match al {
        Some((a, l)) => {
            let r = split_rates(sinr, a, l, beta);
            e.ok(r)
        }
        None => None,
    };
    let report = rates.zip(e.tau).map(|(r, t)| r.report(t));
    let oma = (
        oma_rate(sinr.gamma_s()).expect("validated pair"),
        oma_rate(sinr.gamma_w()).expect("validated pair"),
    );
    let sinrs = al.map(|(a, l)| sinrs_raw(sinr, a, l, beta));
    let tb = match al {
        Some((a, l))
            if spec
                .outputs
                .iter()
                .any(|o| matches!(o, Output::TauLower | Output::TauUpper)) =>
        {
            let r = tau_bounds(sinr, a, l, beta);
            e.ok(r)
        }
        _ => None,
    };

    let mut values = Vec::with_capacity(spec.outputs.len());
    for &o in &spec.outputs {
        let val = match o {
            Output::ROmaS => Some(oma.0),
            Output::ROmaW => Some(oma.1),
            Output::SumOma => Some(oma.0 + oma.1),
            Output::RCommS => rates.map(|r| r.r_comm_s),
            Output::RCommW => rates.map(|r| r.r_comm_w),
            Output::RComm => rates.map(|r| r.r_comm),
            Output::RPrivS => rates.map(|r| r.r_priv_s),
            Output::RPrivW => rates.map(|r| r.r_priv_w),
            Output::RRsmaS => report.map(|r| r.r_rsma_s),
            Output::RRsmaW => report.map(|r| r.r_rsma_w),
            Output::SumRsma => report.map(|r| r.sum_rsma),
            Output::GammaCs => sinrs.map(|s| s.gamma_cs),
            Output::GammaCw => sinrs.map(|s| s.gamma_cw),
            Output::GammaPs => sinrs.map(|s| s.gamma_ps),
            Output::GammaPw => sinrs.map(|s| s.gamma_pw),
            Output::TauLower => tb.map(|t| t.lower),
            Output::TauUpper => tb.map(|t| t.upper),
            Output::AlphaLb => match e.lambda {
                Some(l) => {
                    let r = alpha_lower(sinr, l, beta);
                    e.ok(r)
                }
                None => None,
            },
            Output::AlphaSoftUb => match e.lambda {
                Some(l) => {
                    let r = alpha_soft_upper(sinr, l, beta);
                    e.ok(r)
                }
                None => None,
            },
            Output::AlphaUb => e.interval().and_then(|iv| iv.bounds()).map(|(_, ub)| ub),
            Output::Cubic => match al {
                Some((a, l)) => {
                    let r = cubic_coeffs(sinr, l, beta);
                    e.ok(r).map(|c| c.eval(a))
                }
                None => None,
            },
            Output::LambdaSoftLower => {
                let r = lambda_soft_lower(sinr, beta);
                e.ok(r).map(|b| b.soft_lower)
            }
            Output::LambdaStrictLower => {
                let r = lambda_strict_lower(sinr, beta);
                e.ok(r)
            }
            Output::BetaCrossover => match (al, e.tau) {
                (Some((a, l)), Some(t)) => {
                    let r = beta_crossover(sinr, a, l, t);
                    e.ok(r)
                }
                _ => None,
            },
        };
        values.push(val);
    }

    SweepRow {
        lambda: e.lambda,
        alpha_c: e.alpha_c,
        tau: e.tau,
        beta: Some(beta),
        values,
        feasible: report.is_some_and(|r| r.both_users_gain()),
        error: e.errors.join("; "),
    }
}

/// Evaluate one series. `threads == 1` runs inline; `0` uses all cores.
pub fn run_sweep(spec: &SweepSpec, threads: usize) -> Result<Table> {
    run_specs(std::slice::from_ref(spec), threads)
}

/// Evaluate every series of a sweep file, concatenated in file order.
pub fn run_file(file: &SweepFile, threads: usize) -> Result<Table> {
    if file.sweep.is_empty() {
        return Err(invalid("sweep file has no [[sweep]] entries"));
    }
    run_specs(&file.specs(), threads)
}

fn run_specs(specs: &[SweepSpec], threads: usize) -> Result<Table> {
    let mut jobs = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let sinr = spec.validate()?;
        jobs.extend(spec.points().into_iter().map(|v| (i, sinr, v)));
    }
    let eval = |&(i, sinr, v): &(usize, SinrPair, f64)| eval_row(&specs[i], &sinr, v);
    let rows: Vec<SweepRow> = if threads == 1 {
        jobs.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(eval).collect())
    };
    Ok(Table {
        outputs: specs[0].outputs.clone(),
        rows,
    })
}

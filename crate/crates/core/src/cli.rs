//! Command-line front end. Output is a flat `key = value` document on stdout,
//! diagnostics go to stderr in the same form.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bounds::{alpha_lower, alpha_soft_upper, cubic_coeffs, lambda_soft_lower, tau_bounds};
use crate::error::{invalid, Error, Result};
use crate::experiments::{preset, run_file, SweepFile};
use crate::feasibility::{alpha_feasible_interval, lambda_strict_lower, select_params};
use crate::format::KvDoc;
use crate::oracle::{verify, RegionOptions};
use crate::rate_model::{rsma_sinrs, split_rates, RsmaParams, SinrPair};
use crate::scenario::ScenarioFile;

/// Exit code for a failed region verification.
pub const EXIT_VERIFY_FAILED: i32 = 5;
/// Mismatches printed by `verify` on failure.
const SHOWN_MISMATCHES: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "rsma-bounds",
    version,
    about = "Two-user RSMA rates and the region where both users beat OMA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rates of both users at one operating point.
    Rates(RatesArgs),
    /// Closed-form and numerical bounds on tau, alpha_c and lambda.
    Bounds(BoundsArgs),
    /// Pick lambda, alpha_c and tau inside their feasible ranges.
    Select(SelectArgs),
    /// Run a sweep and write CSV.
    Sweep(SweepArgs),
    /// Check the bounds against a brute-force grid search.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct PairArgs {
    /// Scenario file (TOML, or JSON by extension).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// OMA SINR of the strong user in dB.
    #[arg(long, allow_negative_numbers = true)]
    gamma_s_db: Option<f64>,
    /// OMA SINR of the weak user in dB.
    #[arg(long, allow_negative_numbers = true)]
    gamma_w_db: Option<f64>,
    /// SIC imperfection coefficient; 0 when not given anywhere.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Debug, Args)]
struct RatesArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long)]
    alpha_c: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Enables the alpha_c bounds and the cubic.
    #[arg(long)]
    lambda: Option<f64>,
    /// Together with --lambda, enables the tau bounds.
    #[arg(long)]
    alpha_c: Option<f64>,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long)]
    lambda_offset: Option<f64>,
    #[arg(long)]
    alpha_position: Option<f64>,
    #[arg(long)]
    tau_position: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["preset", "spec"])))]
struct SweepArgs {
    /// Bundled preset: fig2 .. fig7.
    #[arg(long)]
    preset: Option<String>,
    /// Sweep file (TOML, or JSON by extension).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 0.002)]
    grid_step: f64,
    /// Test hook: shift every closed-form tau_lower by this amount.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    perturb_tau_lower: f64,
}

struct Resolved {
    sinr: SinrPair,
    beta: f64,
    file: ScenarioFile,
}

fn resolve(p: &PairArgs) -> Result<Resolved> {
    let mut file = match &p.scenario {
        Some(path) => ScenarioFile::load(path)?,
        None => ScenarioFile::default(),
    };
    match (p.gamma_s_db, p.gamma_w_db) {
        (Some(s), Some(w)) => {
            file.gamma_s_db = Some(s);
            file.gamma_w_db = Some(w);
            file.link_budget = None;
        }
        (None, None) => {}
        _ => {
            return Err(invalid(
                "--gamma-s-db and --gamma-w-db must be given together",
            ))
        }
    }
    let sinr = file.sinr()?;
    let beta = p.beta.or(file.beta).unwrap_or(0.0);
    Ok(Resolved { sinr, beta, file })
}

fn required(flag: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| invalid(format!("--{flag} is required (flag or scenario file)")))
}

fn pair_lines(doc: &mut KvDoc, r: &Resolved) {
    doc.num("gamma_s", r.sinr.gamma_s())
        .num("gamma_w", r.sinr.gamma_w())
        .num("beta", r.beta);
}

fn cmd_rates(a: &RatesArgs) -> Result<String> {
    let r = resolve(&a.pair)?;
    let params = RsmaParams::new(
        required("alpha-c", a.alpha_c.or(r.file.alpha_c))?,
        required("lambda", a.lambda.or(r.file.lambda))?,
        required("tau", a.tau.or(r.file.tau))?,
        r.beta,
    )?;
    let sinrs = rsma_sinrs(&r.sinr, &params)?;
    let report =
        split_rates(&r.sinr, params.alpha_c, params.lambda, params.beta)?.report(params.tau);
    let mut doc = KvDoc::new();
    pair_lines(&mut doc, &r);
    doc.num("alpha_c", params.alpha_c)
        .num("lambda", params.lambda)
        .num("tau", params.tau)
        .num("gamma_cs", sinrs.gamma_cs)
        .num("gamma_cw", sinrs.gamma_cw)
        .num("gamma_ps", sinrs.gamma_ps)
        .num("gamma_pw", sinrs.gamma_pw);
    for (k, v) in report.fields() {
        doc.num(k, v);
    }
    doc.text("both_users_gain", report.both_users_gain());
    Ok(doc.render())
}

/// Prints every bound it can; the first error is returned with the partial document.
fn cmd_bounds(a: &BoundsArgs) -> std::result::Result<String, (String, Error)> {
    let r = resolve(&a.pair).map_err(|e| (String::new(), e))?;
    let lambda = a.lambda.or(r.file.lambda);
    let alpha_c = a.alpha_c.or(r.file.alpha_c);
    let mut doc = KvDoc::new();
    let mut first_err: Option<Error> = None;
    let mut keep = |doc: &mut KvDoc, key: &str, v: Result<f64>| match v {
        Ok(v) => {
            doc.num(key, v);
        }
        Err(e) => {
            doc.text(key, "");
            first_err.get_or_insert(e);
        }
    };
    pair_lines(&mut doc, &r);
    match lambda_soft_lower(&r.sinr, r.beta) {
        Ok(lb) => {
            doc.num("lambda_soft_lower", lb.soft_lower)
                .num("lambda_soft.strong_rate", lb.lam_s_num)
                .num("lambda_soft.strong_denominator", lb.lam_s_den)
                .num("lambda_soft.weak_rate", lb.lam_w_num)
                .num("lambda_soft.weak_denominator", lb.lam_w_den);
        }
        Err(e) => keep(&mut doc, "lambda_soft_lower", Err(e)),
    }
    keep(
        &mut doc,
        "lambda_strict_lower",
        lambda_strict_lower(&r.sinr, r.beta),
    );
    if let Some(l) = lambda {
        doc.num("lambda", l);
        keep(&mut doc, "alpha_lb", alpha_lower(&r.sinr, l, r.beta));
        keep(
            &mut doc,
            "alpha_soft_ub",
            alpha_soft_upper(&r.sinr, l, r.beta),
        );
        match alpha_feasible_interval(&r.sinr, l, r.beta) {
            Ok(iv) => {
                let b = iv.bounds();
                doc.opt("alpha_interval_lower", b.map(|b| b.0))
                    .opt("alpha_interval_upper", b.map(|b| b.1));
                for (k, (lo, hi)) in iv.extra.iter().enumerate() {
                    doc.num(format!("alpha_interval_extra.{}.lower", k + 1), *lo)
                        .num(format!("alpha_interval_extra.{}.upper", k + 1), *hi);
                }
            }
            Err(e) => keep(&mut doc, "alpha_interval_lower", Err(e)),
        }
        match cubic_coeffs(&r.sinr, l, r.beta) {
            Ok(c) => {
                doc.num("cubic.c3", c.c3)
                    .num("cubic.c2", c.c2)
                    .num("cubic.c1", c.c1)
                    .num("cubic.c0", c.c0);
            }
            Err(e) => keep(&mut doc, "cubic.c3", Err(e)),
        }
        if let Some(a) = alpha_c {
            doc.num("alpha_c", a);
            match tau_bounds(&r.sinr, a, l, r.beta) {
                Ok(tb) => {
                    doc.num("tau_lower", tb.lower)
                        .num("tau_upper", tb.upper)
                        .text("tau_window_nonempty", tb.is_feasible());
                }
                Err(e) => keep(&mut doc, "tau_lower", Err(e)),
            }
        }
    }
    match first_err {
        None => Ok(doc.render()),
        Some(e) => Err((doc.render(), e)),
    }
}

fn cmd_select(a: &SelectArgs) -> Result<String> {
    let r = resolve(&a.pair)?;
    let mut policy = r.file.policy.unwrap_or_default();
    if let Some(v) = a.lambda_offset {
        policy.lambda_offset = v;
    }
    if let Some(v) = a.alpha_position {
        policy.alpha_position = v;
    }
    if let Some(v) = a.tau_position {
        policy.tau_position = v;
    }
    let s = select_params(&r.sinr, r.beta, &policy)?;
    let mut doc = KvDoc::new();
    pair_lines(&mut doc, &r);
    let (lb, ub) = s.alpha_interval.bounds().expect("selection succeeded");
    doc.num("lambda", s.params.lambda)
        .num("alpha_c", s.params.alpha_c)
        .num("tau", s.params.tau)
        .num("lambda_strict_lower", s.lambda_strict_lower)
        .num("alpha_lb", s.alpha_interval.alpha_lb)
        .num("alpha_interval_lower", lb)
        .num("alpha_interval_upper", ub)
        .num("tau_lower", s.tau_bounds.lower)
        .num("tau_upper", s.tau_bounds.upper);
    for (k, v) in s.report.fields() {
        doc.num(k, v);
    }
    doc.text("both_users_gain", s.report.both_users_gain());
    Ok(doc.render())
}

fn cmd_sweep(a: &SweepArgs) -> Result<String> {
    let file = match (&a.preset, &a.spec) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => SweepFile::load(path)?,
        _ => return Err(invalid("give exactly one of --preset and --spec")),
    };
    let csv = run_file(&file, a.threads)?.to_csv();
    match &a.out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<(String, bool)> {
    let r = resolve(&a.pair)?;
    let opts = RegionOptions {
        tau_lower_offset: a.perturb_tau_lower,
    };
    let v = verify(&r.sinr, r.beta, a.grid_step, &opts)?;
    let reg = &v.region;
    let mut doc = KvDoc::new();
    pair_lines(&mut doc, &r);
    doc.num("grid_step", a.grid_step)
        .num("lambda_soft_lower", reg.lambda_soft_lower)
        .opt("lambda_strict_lower", v.lambda_strict_lower)
        .opt("empirical_lambda_min", reg.empirical_lambda_min)
        .opt("empirical_lambda_min_any", reg.empirical_lambda_min_any)
        .text("feasible_points", reg.feasible_cells().count())
        .text("regime_cells", reg.regime_cells)
        .text("outside_regime_cells", reg.outside_regime_cells)
        .text(
            "regime_cells_below_soft_lower",
            reg.regime_cells_below_soft_lower,
        )
        .text("singular_cells", reg.singular_cells)
        .text("mismatch_count", reg.mismatch_count)
        .text("agreement_checks", v.agreement.len())
        .text(
            "agreement_failures",
            v.agreement.iter().filter(|c| !c.passed).count(),
        );
    let passed = v.passed();
    if !passed {
        for (k, m) in reg.mismatches.iter().take(SHOWN_MISMATCHES).enumerate() {
            let tau = m.tau.map(|t| format!(" tau={t:?}")).unwrap_or_default();
            doc.text(
                format!("mismatch.{}", k + 1),
                format!(
                    "{:?} lambda={:?} alpha_c={:?}{tau}",
                    m.kind, m.lambda, m.alpha
                ),
            );
        }
        for (k, c) in v
            .agreement
            .iter()
            .filter(|c| !c.passed)
            .take(SHOWN_MISMATCHES)
            .enumerate()
        {
            doc.text(
                format!("agreement_failure.{}", k + 1),
                format!(
                    "{:?} lambda={:?} alpha_c={:?} closed_form={:?} bisected={:?}",
                    c.side, c.lambda, c.alpha_c, c.closed_form, c.bisected
                ),
            );
        }
    }
    doc.text("result", if passed { "pass" } else { "fail" });
    Ok((doc.render(), passed))
}

fn diagnostic(e: &Error) -> String {
    let mut doc = KvDoc::new();
    doc.text("error.kind", e.kind())
        .text("error.message", e)
        .text("error.exit_code", e.exit_code());
    doc.render()
}

/// Run the CLI with explicit argument list and output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    let result: std::result::Result<(String, i32), (String, Error)> = match &cli.command {
        Command::Rates(a) => cmd_rates(a).map(|s| (s, 0)).map_err(|e| (String::new(), e)),
        Command::Bounds(a) => cmd_bounds(a).map(|s| (s, 0)),
        Command::Select(a) => cmd_select(a)
            .map(|s| (s, 0))
            .map_err(|e| (String::new(), e)),
        Command::Sweep(a) => cmd_sweep(a).map(|s| (s, 0)).map_err(|e| (String::new(), e)),
        Command::Verify(a) => cmd_verify(a)
            .map(|(s, ok)| (s, if ok { 0 } else { EXIT_VERIFY_FAILED }))
            .map_err(|e| (String::new(), e)),
    };
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err((partial, e)) => {
            let _ = out.write_all(partial.as_bytes());
            let _ = err.write_all(diagnostic(&e).as_bytes());
            e.exit_code()
        }
    }
}

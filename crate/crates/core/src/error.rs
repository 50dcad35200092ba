use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The strong user's SINR does not exceed the weak user's.
    #[error("degenerate user pair: gamma_s = {gamma_s} must exceed gamma_w = {gamma_w}")]
    DegeneratePair { gamma_s: f64, gamma_w: f64 },

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    /// A bound's denominator has the wrong sign for the requested lambda.
    #[error("{bound}: denominator not positive at lambda = {lambda} (threshold {threshold})")]
    DenominatorSignViolation {
        bound: &'static str,
        lambda: f64,
        threshold: f64,
    },

    /// The feasibility cubic stays negative all the way to alpha_c -> 1.
    #[error(
        "feasible alpha_c interval is open at alpha_c -> 1 (lambda = {lambda}, lower end {lower})"
    )]
    InfeasibleAtBoundary { lambda: f64, lower: f64 },

    #[error("no lambda in [{search_from}, 1) admits a feasible alpha_c interval (beta = {beta})")]
    NoFeasibleLambda { beta: f64, search_from: f64 },

    /// Lambda feasibility switched back from feasible to infeasible during a validation scan.
    #[error("feasibility in lambda is not monotone: feasible at {feasible_at}, infeasible again at {infeasible_at}")]
    NonMonotoneFeasibility {
        feasible_at: f64,
        infeasible_at: f64,
    },

    #[error("internal contract violation: {0}")]
    InternalContractViolation(String),

    #[error("grid too coarse: widest analytic alpha interval {widest} is narrower than two steps of {step}")]
    GridTooCoarse { widest: f64, step: f64 },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::DegeneratePair { .. } | Error::GridTooCoarse { .. } => {
                2
            }
            Error::NumericalDomain(_)
            | Error::DenominatorSignViolation { .. }
            | Error::NonMonotoneFeasibility { .. }
            | Error::InternalContractViolation(_) => 3,
            Error::InfeasibleAtBoundary { .. } | Error::NoFeasibleLambda { .. } => 4,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::DegeneratePair { .. } => "degenerate_pair",
            Error::NumericalDomain(_) => "numerical_domain",
            Error::DenominatorSignViolation { .. } => "denominator_sign_violation",
            Error::InfeasibleAtBoundary { .. } => "infeasible_at_boundary",
            Error::NoFeasibleLambda { .. } => "no_feasible_lambda",
            Error::NonMonotoneFeasibility { .. } => "non_monotone_feasibility",
            Error::InternalContractViolation(_) => "internal_contract_violation",
            Error::GridTooCoarse { .. } => "grid_too_coarse",
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

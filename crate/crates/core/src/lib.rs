//! Two-user downlink rate-splitting multiple access (RSMA) with imperfect
//! successive interference cancellation: rates, closed-form bounds on the
//! power split and common-rate share, and numeric search for the region in
//! which both users beat orthogonal multiple access.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod feasibility;
pub mod format;
pub mod oracle;
pub mod rate_model;
pub mod scenario;
pub mod units;

pub use error::{Error, Result};
pub use rate_model::{LinkBudget, RateReport, RsmaParams, SinrPair};

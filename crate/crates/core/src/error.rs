use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the crate.
///
/// Numerical routines reserve errors for contract violations (bad
/// parameters, malformed data, impossible requests). Statistical outcomes
/// that are merely unfavorable (a test that rejects, a parameter pinned at
/// a bound) are reported in result types, not as errors.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter value violates its documented constraint.
    #[error("invalid parameter {name} = {value}: required {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A causal kernel was evaluated at a negative lag.
    #[error("causal kernel evaluated at negative lag {lag}")]
    NegativeLag { lag: f64 },

    /// An integration interval with `from > to`.
    #[error("reversed integration bounds: from {from} to {to}")]
    ReversedBounds { from: f64, to: f64 },

    /// A time outside the observation window was passed where an in-window
    /// time is required.
    #[error("time {t} outside observation window [{t_start}, {t_end}]")]
    OutsideWindow { t: f64, t_start: f64, t_end: f64 },

    /// The endogenous kernel mass is at or above one, so no stationary
    /// regime exists.
    #[error("non-stationary specification: endogenous kernel mass {endo_mass} >= 1")]
    NonStationary { endo_mass: f64 },

    /// Event times that are not strictly increasing, or that leave the
    /// declared observation window.
    #[error("event series invalid at index {index}: {reason}")]
    InvalidEvents { index: usize, reason: &'static str },

    /// News times that are not sorted.
    #[error("news times not sorted at index {index}")]
    UnsortedNews { index: usize },

    /// Fewer data points than the operation requires.
    #[error("{what}: need at least {needed}, got {got}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    /// Every optimization start failed to produce a finite objective.
    #[error("fit failed: no start reached a finite log-likelihood ({diagnostics})")]
    FitFailed { diagnostics: String },

    /// A model family name that is not one of the supported variants.
    #[error("unknown model variant '{name}' (expected de, pl, de+news, pl+news, pl+news+nc)")]
    UnknownVariant { name: String },

    /// Results computed on different data sets were combined where
    /// identical data is required.
    #[error("data fingerprint mismatch: {left} vs {right}")]
    FingerprintMismatch { left: String, right: String },

    /// Input that is structurally valid but degenerate for the requested
    /// statistic (for example, zero variance in both samples of a t-test).
    #[error("degenerate input: {what}")]
    DegenerateInput { what: String },

    /// A text record that could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// File system failure while reading or writing data files.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

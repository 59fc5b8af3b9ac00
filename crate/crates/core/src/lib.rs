//! Self-exciting point process models of market event activity around
//! scheduled news announcements.
//!
//! The conditional intensity of the event stream is
//!
//! ```text
//! lambda(t) = mu + sum over past events t_i of phi(t - t_i)
//!                + sum over announcements z_j of phi_news(t - z_j)
//! ```
//!
//! where `mu` is a constant baseline, `phi` is an endogenous kernel fed by
//! the process itself (every arrival raises the rate of future arrivals),
//! and `phi_news` is an exogenous kernel pinned to known announcement
//! times. Two endogenous families are provided: a sum of two exponentials
//! and an approximate power law built from a geometric ladder of
//! exponentials. The exogenous kernel is a single exponential, optionally
//! extended with an anticipation branch that ramps activity up *before*
//! the announcement.
//!
//! The crate covers the full working loop around that model:
//!
//! * [`kernels`]: kernel families, their normalizations and integrals.
//! * [`model`]: model specifications, event data, intensity evaluation and
//!   the stationarity condition.
//! * [`likelihood`]: exact log-likelihood, in both O(N) recursive form and
//!   a brute-force form kept as a cross-check.
//! * [`estimation`]: box-constrained maximum likelihood with multi-start
//!   search, curvature-based standard errors, AIC/BIC.
//! * [`simulation`]: exact thinning simulation and count summaries.
//! * [`diagnostics`]: time-change residuals, dispersion and comparison
//!   tests, model selection.
//! * [`newsflow`]: announcement calendars, timestamp conditioning, news
//!   impact and surprise measures.
//!
//! Times are plain `f64` seconds relative to an observation window. All
//! randomized operations take explicit seeds and are bit-reproducible.

pub mod diagnostics;
pub mod estimation;
pub mod kernels;
pub mod likelihood;
pub mod model;
pub mod newsflow;
pub mod simulation;

mod error;

pub use error::{Error, Result};

//! Excitation kernel families.
//!
//! Every kernel here is a finite sum of exponentials `amplitude *
//! exp(-rate * lag)`, which is what makes the O(N) likelihood recursions
//! and closed-form compensators possible. Three families are exposed:
//!
//! * [`DoubleExpKernel`]: two exponential timescales,
//!   `phi(t) = alpha_a exp(-beta_a t) + alpha_b exp(-beta_b t)`.
//! * [`PowerLawKernel`]: an approximate power law assembled from a
//!   geometric ladder of exponential timescales `a_k = tau0 * ratio^k`,
//!   with a short-lag cutoff term on the extra scale `a_{-1}` that forces
//!   `phi(0) = 0`, and a normalization that forces the total mass to the
//!   branching ratio `n`.
//! * [`NewsExpKernel`]: a single exponential pinned to announcement
//!   times, optionally paired with a pre-announcement branch in
//!   [`NonCausalNewsKernel`].
//!
//! Causal kernels are defined for non-negative lags only and report a
//! domain error when evaluated at a negative lag. The non-causal news
//! kernel is defined on the whole line; its value at lag zero is zero by
//! convention, so an announcement contributes nothing at its own instant.

use crate::{Error, Result};

/// One exponential component `amplitude * exp(-rate * lag)`, valid for
/// `lag >= 0`. Amplitudes may be negative (the power-law cutoff term is).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub amplitude: f64,
    pub rate: f64,
}

impl ExpTerm {
    /// Integral of this component over `[0, inf)`.
    pub fn mass(&self) -> f64 {
        self.amplitude / self.rate
    }
}

fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint: "a finite number",
        })
    }
}

fn require_nonnegative(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint: ">= 0",
        })
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    require_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            constraint: "> 0",
        })
    }
}

/// Integral of `amp * exp(-rate * t)` over `[from, to]`, `0 <= from <= to`.
/// `to` may be infinite.
fn exp_increment(amp: f64, rate: f64, from: f64, to: f64) -> f64 {
    (amp / rate) * ((-rate * from).exp() - (-rate * to).exp())
}

fn check_causal_bounds(from: f64, to: f64) -> Result<()> {
    if from < 0.0 {
        return Err(Error::NegativeLag { lag: from });
    }
    if to < from {
        return Err(Error::ReversedBounds { from, to });
    }
    Ok(())
}

/// Endogenous kernel with two exponential timescales.
///
/// Stored in canonical order `beta_a >= beta_b`: component A is the
/// short-timescale (fast) one. The constructor swaps the pairs if given
/// in the other order, which leaves the kernel value unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleExpKernel {
    alpha_a: f64,
    beta_a: f64,
    alpha_b: f64,
    beta_b: f64,
}

impl DoubleExpKernel {
    pub fn new(alpha_a: f64, beta_a: f64, alpha_b: f64, beta_b: f64) -> Result<Self> {
        require_nonnegative("alpha_a", alpha_a)?;
        require_positive("beta_a", beta_a)?;
        require_nonnegative("alpha_b", alpha_b)?;
        require_positive("beta_b", beta_b)?;
        let (alpha_a, beta_a, alpha_b, beta_b) = if beta_a >= beta_b {
            (alpha_a, beta_a, alpha_b, beta_b)
        } else {
            (alpha_b, beta_b, alpha_a, beta_a)
        };
        Ok(Self {
            alpha_a,
            beta_a,
            alpha_b,
            beta_b,
        })
    }

    /// Single-timescale kernel, written as the two-exponential family with
    /// the second amplitude pinned to zero.
    pub fn single(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 0.0, beta)
    }

    pub fn alpha_a(&self) -> f64 {
        self.alpha_a
    }
    pub fn beta_a(&self) -> f64 {
        self.beta_a
    }
    pub fn alpha_b(&self) -> f64 {
        self.alpha_b
    }
    pub fn beta_b(&self) -> f64 {
        self.beta_b
    }

    pub fn eval(&self, lag: f64) -> Result<f64> {
        if lag < 0.0 {
            return Err(Error::NegativeLag { lag });
        }
        Ok(self.eval_pos(lag))
    }

    pub(crate) fn eval_pos(&self, lag: f64) -> f64 {
        self.alpha_a * (-self.beta_a * lag).exp() + self.alpha_b * (-self.beta_b * lag).exp()
    }

    /// Total mass `alpha_a / beta_a + alpha_b / beta_b`. This is the
    /// branching ratio when the kernel is used endogenously.
    pub fn total_mass(&self) -> f64 {
        self.alpha_a / self.beta_a + self.alpha_b / self.beta_b
    }

    /// Integral over `[from, to]` with `0 <= from <= to` (`to` may be
    /// infinite).
    pub fn antiderivative_increment(&self, from: f64, to: f64) -> Result<f64> {
        check_causal_bounds(from, to)?;
        Ok(exp_increment(self.alpha_a, self.beta_a, from, to)
            + exp_increment(self.alpha_b, self.beta_b, from, to))
    }

    pub fn terms(&self) -> Vec<ExpTerm> {
        vec![
            ExpTerm {
                amplitude: self.alpha_a,
                rate: self.beta_a,
            },
            ExpTerm {
                amplitude: self.alpha_b,
                rate: self.beta_b,
            },
        ]
    }
}

/// Default number of ladder timescales for [`PowerLawKernel`].
pub const DEFAULT_LADDER_SCALES: usize = 15;
/// Default geometric ratio between consecutive ladder timescales.
pub const DEFAULT_LADDER_RATIO: f64 = 5.0;

/// Endogenous kernel approximating a power-law decay.
///
/// Built from `scales` exponentials on the geometric ladder
/// `a_k = tau0 * ratio^k`, `k = 0..scales-1`, plus a negative cutoff term
/// on the extra scale `a_{-1} = tau0 / ratio`:
///
/// ```text
/// phi(t) = (n / z_norm) * ( sum_k a_k^-p exp(-t / a_k)
///                           - s_cut * exp(-t / a_{-1}) )
/// ```
///
/// The two derived constants are forced by two exact conditions:
/// `s_cut = sum_k a_k^-p` makes `phi(0) = 0`, and
/// `z_norm = sum_k a_k^(1-p) - s_cut * a_{-1}` makes the total mass equal
/// the branching ratio `n`. Between `tau0` and the slowest ladder scale
/// the kernel decays approximately as `t^-p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawKernel {
    n: f64,
    p: f64,
    tau0: f64,
    ratio: f64,
    /// Ladder weights `a_k^-p`; kept so every evaluation sums them in the
    /// same order as `s_cut`, which makes `eval(0)` exactly zero.
    weights: Vec<f64>,
    /// Ladder timescales `a_k`.
    scales_s: Vec<f64>,
    cutoff_scale: f64,
    s_cut: f64,
    z_norm: f64,
    /// Common amplitude factor `n / z_norm`.
    prefactor: f64,
}

impl PowerLawKernel {
    /// Kernel with the default 15-scale, ratio-5 ladder.
    pub fn new(n: f64, p: f64, tau0: f64) -> Result<Self> {
        Self::with_ladder(n, p, tau0, DEFAULT_LADDER_SCALES, DEFAULT_LADDER_RATIO)
    }

    pub fn with_ladder(n: f64, p: f64, tau0: f64, scales: usize, ratio: f64) -> Result<Self> {
        require_nonnegative("n", n)?;
        if n >= 1.0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: n,
                constraint: "< 1 (branching ratio)",
            });
        }
        require_positive("p", p)?;
        require_positive("tau0", tau0)?;
        if scales < 1 {
            return Err(Error::InvalidParameter {
                name: "scales",
                value: scales as f64,
                constraint: ">= 1",
            });
        }
        require_finite("ratio", ratio)?;
        if ratio <= 1.0 {
            return Err(Error::InvalidParameter {
                name: "ratio",
                value: ratio,
                constraint: "> 1",
            });
        }
        let mut weights = Vec::with_capacity(scales);
        let mut scales_s = Vec::with_capacity(scales);
        let mut s_cut = 0.0;
        let mut z_norm = 0.0;
        for k in 0..scales {
            let a_k = tau0 * ratio.powi(k as i32);
            let w_k = a_k.powf(-p);
            weights.push(w_k);
            scales_s.push(a_k);
            s_cut += w_k;
            z_norm += w_k * a_k;
        }
        let cutoff_scale = tau0 / ratio;
        z_norm -= s_cut * cutoff_scale;
        // z_norm = sum_k a_k^-p (a_k - a_{-1}) > 0 because every ladder
        // scale exceeds the cutoff scale for ratio > 1.
        let prefactor = n / z_norm;
        Ok(Self {
            n,
            p,
            tau0,
            ratio,
            weights,
            scales_s,
            cutoff_scale,
            s_cut,
            z_norm,
            prefactor,
        })
    }

    pub fn n(&self) -> f64 {
        self.n
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn tau0(&self) -> f64 {
        self.tau0
    }
    pub fn ratio(&self) -> f64 {
        self.ratio
    }
    pub fn scales(&self) -> usize {
        self.weights.len()
    }
    /// Slowest ladder timescale `a_{scales-1}`.
    pub fn slowest_scale(&self) -> f64 {
        *self.scales_s.last().expect("ladder is non-empty")
    }
    /// Cutoff timescale `a_{-1} = tau0 / ratio`.
    pub fn cutoff_scale(&self) -> f64 {
        self.cutoff_scale
    }
    pub fn s_cut(&self) -> f64 {
        self.s_cut
    }
    pub fn z_norm(&self) -> f64 {
        self.z_norm
    }

    pub fn eval(&self, lag: f64) -> Result<f64> {
        if lag < 0.0 {
            return Err(Error::NegativeLag { lag });
        }
        Ok(self.eval_pos(lag))
    }

    pub(crate) fn eval_pos(&self, lag: f64) -> f64 {
        // Summed in ladder order so that at lag 0 the ladder sum
        // reproduces s_cut bit for bit and the result is exactly zero.
        let mut ladder = 0.0;
        for (w, a) in self.weights.iter().zip(&self.scales_s) {
            ladder += w * (-lag / a).exp();
        }
        self.prefactor * (ladder - self.s_cut * (-lag / self.cutoff_scale).exp())
    }

    /// Total mass: exactly the branching ratio `n` by construction.
    pub fn total_mass(&self) -> f64 {
        self.n
    }

    pub fn antiderivative_increment(&self, from: f64, to: f64) -> Result<f64> {
        check_causal_bounds(from, to)?;
        let mut acc = 0.0;
        for (w, a) in self.weights.iter().zip(&self.scales_s) {
            acc += exp_increment(self.prefactor * w, 1.0 / a, from, to);
        }
        acc += exp_increment(
            -self.prefactor * self.s_cut,
            1.0 / self.cutoff_scale,
            from,
            to,
        );
        Ok(acc)
    }

    pub fn terms(&self) -> Vec<ExpTerm> {
        let mut out = Vec::with_capacity(self.weights.len() + 1);
        for (w, a) in self.weights.iter().zip(&self.scales_s) {
            out.push(ExpTerm {
                amplitude: self.prefactor * w,
                rate: 1.0 / a,
            });
        }
        out.push(ExpTerm {
            amplitude: -self.prefactor * self.s_cut,
            rate: 1.0 / self.cutoff_scale,
        });
        out
    }
}

/// Exogenous single-exponential kernel pinned to announcement times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewsExpKernel {
    alpha: f64,
    beta: f64,
}

impl NewsExpKernel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        require_nonnegative("alpha_news", alpha)?;
        require_positive("beta_news", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, lag: f64) -> Result<f64> {
        if lag < 0.0 {
            return Err(Error::NegativeLag { lag });
        }
        Ok(self.eval_pos(lag))
    }

    pub(crate) fn eval_pos(&self, lag: f64) -> f64 {
        self.alpha * (-self.beta * lag).exp()
    }

    /// Total mass `alpha / beta`. Unlike the endogenous branching ratio
    /// this may exceed one: a single announcement may spawn far more than
    /// one event on average.
    pub fn total_mass(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn antiderivative_increment(&self, from: f64, to: f64) -> Result<f64> {
        check_causal_bounds(from, to)?;
        Ok(exp_increment(self.alpha, self.beta, from, to))
    }

    pub fn term(&self) -> ExpTerm {
        ExpTerm {
            amplitude: self.alpha,
            rate: self.beta,
        }
    }
}

/// Exogenous kernel with a causal decay after the announcement and an
/// anticipation branch ramping up before it:
///
/// ```text
/// phi(t) = alpha_c  exp(-beta_c  t)   for t > 0
///        = alpha_nc exp( beta_nc t)   for t < 0
///        = 0                          at t = 0
/// ```
///
/// The zero at the announcement instant itself is a convention; both
/// one-sided limits are attained arbitrarily close to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonCausalNewsKernel {
    causal: NewsExpKernel,
    anticipation: NewsExpKernel,
}

impl NonCausalNewsKernel {
    pub fn new(alpha_c: f64, beta_c: f64, alpha_nc: f64, beta_nc: f64) -> Result<Self> {
        Ok(Self {
            causal: NewsExpKernel::new(alpha_c, beta_c)?,
            anticipation: NewsExpKernel::new(alpha_nc, beta_nc)?,
        })
    }

    pub fn causal(&self) -> &NewsExpKernel {
        &self.causal
    }
    pub fn anticipation(&self) -> &NewsExpKernel {
        &self.anticipation
    }

    /// Defined for any finite lag; negative lags hit the anticipation
    /// branch.
    pub fn eval(&self, lag: f64) -> Result<f64> {
        require_finite("lag", lag)?;
        Ok(self.eval_any(lag))
    }

    pub(crate) fn eval_any(&self, lag: f64) -> f64 {
        if lag > 0.0 {
            self.causal.eval_pos(lag)
        } else if lag < 0.0 {
            self.anticipation.eval_pos(-lag)
        } else {
            0.0
        }
    }

    /// Mass of both branches, `alpha_c / beta_c + alpha_nc / beta_nc`.
    pub fn total_mass(&self) -> f64 {
        self.causal.total_mass() + self.anticipation.total_mass()
    }

    /// Integral over any ordered pair `from <= to`; the bounds may be
    /// negative (before the announcement) and infinite.
    pub fn antiderivative_increment(&self, from: f64, to: f64) -> Result<f64> {
        if to < from {
            return Err(Error::ReversedBounds { from, to });
        }
        let mut acc = 0.0;
        if to > 0.0 {
            let lo = from.max(0.0);
            acc += exp_increment(self.causal.alpha, self.causal.beta, lo, to);
        }
        if from < 0.0 {
            let hi = to.min(0.0);
            // Anticipation branch mirrored onto positive lags: integral of
            // alpha_nc exp(beta_nc t) over [from, hi] equals the integral
            // of alpha_nc exp(-beta_nc u) over [-hi, -from].
            acc += exp_increment(self.anticipation.alpha, self.anticipation.beta, -hi, -from);
        }
        Ok(acc)
    }
}

/// Endogenous kernel choice for a model specification.
#[derive(Debug, Clone, PartialEq)]
pub enum EndoKernel {
    DoubleExp(DoubleExpKernel),
    PowerLaw(PowerLawKernel),
}

impl EndoKernel {
    pub fn eval(&self, lag: f64) -> Result<f64> {
        match self {
            EndoKernel::DoubleExp(k) => k.eval(lag),
            EndoKernel::PowerLaw(k) => k.eval(lag),
        }
    }

    pub(crate) fn eval_pos(&self, lag: f64) -> f64 {
        match self {
            EndoKernel::DoubleExp(k) => k.eval_pos(lag),
            EndoKernel::PowerLaw(k) => k.eval_pos(lag),
        }
    }

    /// Branching ratio of the endogenous cascade.
    pub fn total_mass(&self) -> f64 {
        match self {
            EndoKernel::DoubleExp(k) => k.total_mass(),
            EndoKernel::PowerLaw(k) => k.total_mass(),
        }
    }

    pub fn antiderivative_increment(&self, from: f64, to: f64) -> Result<f64> {
        match self {
            EndoKernel::DoubleExp(k) => k.antiderivative_increment(from, to),
            EndoKernel::PowerLaw(k) => k.antiderivative_increment(from, to),
        }
    }

    pub fn terms(&self) -> Vec<ExpTerm> {
        match self {
            EndoKernel::DoubleExp(k) => k.terms(),
            EndoKernel::PowerLaw(k) => k.terms(),
        }
    }
}

/// Exogenous kernel choice for a model specification.
#[derive(Debug, Clone, PartialEq)]
pub enum ExoKernel {
    /// Response after the announcement only.
    Causal(NewsExpKernel),
    /// Response after the announcement plus an anticipation ramp before
    /// it.
    WithAnticipation(NonCausalNewsKernel),
}

impl ExoKernel {
    pub fn causal_part(&self) -> &NewsExpKernel {
        match self {
            ExoKernel::Causal(k) => k,
            ExoKernel::WithAnticipation(k) => k.causal(),
        }
    }

    pub fn anticipation_part(&self) -> Option<&NewsExpKernel> {
        match self {
            ExoKernel::Causal(_) => None,
            ExoKernel::WithAnticipation(k) => Some(k.anticipation()),
        }
    }

    /// Kernel value at a signed lag from the announcement.
    pub(crate) fn eval_any(&self, lag: f64) -> f64 {
        match self {
            ExoKernel::Causal(k) => {
                if lag > 0.0 {
                    k.eval_pos(lag)
                } else {
                    0.0
                }
            }
            ExoKernel::WithAnticipation(k) => k.eval_any(lag),
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            ExoKernel::Causal(k) => k.total_mass(),
            ExoKernel::WithAnticipation(k) => k.total_mass(),
        }
    }

    /// Integral over any ordered pair of signed lags from the
    /// announcement; the causal variant contributes nothing below zero.
    pub fn antiderivative_increment(&self, from: f64, to: f64) -> Result<f64> {
        if to < from {
            return Err(Error::ReversedBounds { from, to });
        }
        match self {
            ExoKernel::Causal(k) => {
                if to <= 0.0 {
                    return Ok(0.0);
                }
                k.antiderivative_increment(from.max(0.0), to)
            }
            ExoKernel::WithAnticipation(k) => k.antiderivative_increment(from, to),
        }
    }
}

/// Running state of the decaying sums `sum_i exp(-rate_q (t - t_i))`, one
/// per exponential term, over a stream of unit impulses. Shared by the
/// likelihood recursion, residual computation and the simulator.
#[derive(Debug, Clone)]
pub(crate) struct ExpSums {
    terms: Vec<ExpTerm>,
    values: Vec<f64>,
}

impl ExpSums {
    pub fn new(terms: Vec<ExpTerm>) -> Self {
        let values = vec![0.0; terms.len()];
        Self { terms, values }
    }

    /// Decay every sum forward by `dt >= 0`.
    pub fn advance(&mut self, dt: f64) {
        debug_assert!(dt >= 0.0, "time must move forward");
        for (v, term) in self.values.iter_mut().zip(&self.terms) {
            *v *= (-term.rate * dt).exp();
        }
    }

    /// Register an impulse at the current time: every sum gains one.
    pub fn add_unit(&mut self) {
        for v in &mut self.values {
            *v += 1.0;
        }
    }

    /// Kernel superposition value `sum_q amplitude_q * value_q`.
    pub fn weighted_value(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.terms)
            .map(|(v, t)| t.amplitude * v)
            .sum()
    }

    /// Superposition of the positive-amplitude terms only; an upper bound
    /// for the kernel superposition at any later time with no new
    /// impulses, because every component decays toward zero.
    pub fn positive_weighted_value(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.terms)
            .filter(|(_, t)| t.amplitude > 0.0)
            .map(|(v, t)| t.amplitude * v)
            .sum()
    }

    /// Integral of the superposition over the next `dt` seconds assuming
    /// no new impulses.
    pub fn increment_mass(&self, dt: f64) -> f64 {
        debug_assert!(dt >= 0.0, "interval length must be non-negative");
        self.values
            .iter()
            .zip(&self.terms)
            .map(|(v, t)| t.mass() * v * (-(-t.rate * dt).exp_m1()))
            .sum()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }
}

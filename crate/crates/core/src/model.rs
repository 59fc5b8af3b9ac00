//! Model specifications, event data and intensity evaluation.
//!
//! A [`HawkesSpec`] bundles a constant baseline rate with an endogenous
//! kernel and an optional exogenous (announcement) kernel. Together with
//! an [`EventSeries`] and the announcement times it determines the
//! conditional intensity
//!
//! ```text
//! lambda(t) = mu + sum_{t_i < t} phi(t - t_i)
//!               + sum_{z_j < t} phi_news(t - z_j)
//!               + sum_{z_j > t} phi_anticipation(z_j - t)
//! ```
//!
//! where the anticipation sum is present only for the non-causal news
//! kernel. All sums are strict: an event or announcement contributes
//! nothing at its own instant.

use sha2::{Digest, Sha256};

use crate::kernels::{EndoKernel, ExoKernel, ExpSums};
use crate::{Error, Result};

/// Strictly increasing event times inside an observation window.
///
/// Times are seconds in the same clock as the window bounds; the
/// conventional choice is seconds since the window opened, making
/// `t_start` zero, but any affine origin works.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSeries {
    times: Vec<f64>,
    t_start: f64,
    t_end: f64,
}

impl EventSeries {
    pub fn new(times: Vec<f64>, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) {
            return Err(Error::InvalidParameter {
                name: "window",
                value: t_end - t_start,
                constraint: "finite bounds with t_start < t_end",
            });
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidEvents {
                    index: i,
                    reason: "non-finite time",
                });
            }
            if t < t_start || t > t_end {
                return Err(Error::InvalidEvents {
                    index: i,
                    reason: "time outside the observation window",
                });
            }
            if i > 0 && t <= times[i - 1] {
                return Err(Error::InvalidEvents {
                    index: i,
                    reason: "times must be strictly increasing",
                });
            }
        }
        Ok(Self {
            times,
            t_start,
            t_end,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn t_start(&self) -> f64 {
        self.t_start
    }
    pub fn t_end(&self) -> f64 {
        self.t_end
    }
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Observed mean rate, events per second over the window.
    pub fn mean_rate(&self) -> f64 {
        self.times.len() as f64 / self.duration()
    }
}

/// Announcement times, sorted non-decreasing. They may fall anywhere
/// relative to an observation window; evaluation code clips their
/// influence to the window as needed.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsTimes {
    times: Vec<f64>,
}

impl NewsTimes {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        for (i, &z) in times.iter().enumerate() {
            if !z.is_finite() {
                return Err(Error::UnsortedNews { index: i });
            }
            if i > 0 && z < times[i - 1] {
                return Err(Error::UnsortedNews { index: i });
            }
        }
        Ok(Self { times })
    }

    pub fn empty() -> Self {
        Self { times: Vec::new() }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Content hash identifying a (events, news) data pair. Fit results carry
/// it so that model comparisons can refuse to mix different data sets.
pub fn data_fingerprint(events: &EventSeries, news: &NewsTimes) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"window");
    hasher.update(events.t_start().to_le_bytes());
    hasher.update(events.t_end().to_le_bytes());
    hasher.update(b"events");
    for t in events.times() {
        hasher.update(t.to_le_bytes());
    }
    hasher.update(b"news");
    for z in news.times() {
        hasher.update(z.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Full model specification: baseline, endogenous kernel, optional
/// exogenous kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct HawkesSpec {
    mu: f64,
    endo: EndoKernel,
    exo: Option<ExoKernel>,
}

impl HawkesSpec {
    pub fn new(mu: f64, endo: EndoKernel, exo: Option<ExoKernel>) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "mu",
                value: mu,
                constraint: ">= 0 and finite",
            });
        }
        Ok(Self { mu, endo, exo })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn endo(&self) -> &EndoKernel {
        &self.endo
    }
    pub fn exo(&self) -> Option<&ExoKernel> {
        self.exo.as_ref()
    }

    /// Branching ratio of the endogenous cascade.
    pub fn endo_mass(&self) -> f64 {
        self.endo.total_mass()
    }

    /// Total exogenous kernel mass (both branches for the non-causal
    /// kernel), zero without an exogenous kernel.
    pub fn exo_mass(&self) -> f64 {
        self.exo.as_ref().map_or(0.0, ExoKernel::total_mass)
    }

    /// A stationary regime exists iff the branching ratio is below one.
    /// The exogenous mass is deliberately unconstrained: announcements
    /// arrive at a fixed finite rate, so even a burst worth hundreds of
    /// events keeps the mean rate finite.
    pub fn is_stationary(&self) -> bool {
        self.endo_mass() < 1.0
    }

    /// Number of free parameters when this specification is fitted:
    /// baseline plus four (double-exponential) or three (power-law ladder
    /// with fixed geometry) endogenous parameters, plus two per exogenous
    /// branch.
    pub fn n_free_params(&self) -> usize {
        let endo = match &self.endo {
            EndoKernel::DoubleExp(_) => 4,
            EndoKernel::PowerLaw(_) => 3,
        };
        let exo = match &self.exo {
            None => 0,
            Some(ExoKernel::Causal(_)) => 2,
            Some(ExoKernel::WithAnticipation(_)) => 4,
        };
        1 + endo + exo
    }

    /// Long-run mean event rate when announcements arrive as a stationary
    /// stream at `news_rate` per second:
    ///
    /// ```text
    /// rate = (mu + news_rate * exo_mass) / (1 - endo_mass)
    /// ```
    ///
    /// Each direct arrival (baseline or announcement-driven) is amplified
    /// by the full endogenous cascade `1 / (1 - n)`.
    pub fn mean_rate(&self, news_rate: f64) -> Result<f64> {
        if !(news_rate.is_finite() && news_rate >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "news_rate",
                value: news_rate,
                constraint: ">= 0 and finite",
            });
        }
        let n = self.endo_mass();
        if n >= 1.0 {
            return Err(Error::NonStationary { endo_mass: n });
        }
        Ok((self.mu + news_rate * self.exo_mass()) / (1.0 - n))
    }
}

/// Conditional intensity at time `t` within the observation window, by
/// direct superposition over all past events and all announcements.
pub fn intensity(
    spec: &HawkesSpec,
    events: &EventSeries,
    news: &NewsTimes,
    t: f64,
) -> Result<f64> {
    if !(t >= events.t_start() && t <= events.t_end()) {
        return Err(Error::OutsideWindow {
            t,
            t_start: events.t_start(),
            t_end: events.t_end(),
        });
    }
    let mut lambda = spec.mu();
    let cut = events.times().partition_point(|&ti| ti < t);
    for &ti in &events.times()[..cut] {
        lambda += spec.endo().eval_pos(t - ti);
    }
    if let Some(exo) = spec.exo() {
        for &z in news.times() {
            lambda += exo.eval_any(t - z);
        }
    }
    Ok(lambda)
}

/// Intensity split into its three sources at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityDecomposition {
    pub t: f64,
    pub baseline_frac: f64,
    pub endo_frac: f64,
    pub exo_frac: f64,
}

/// Decompose the intensity on a sorted grid of times into baseline,
/// endogenous and exogenous fractions, optionally smoothed with a
/// trailing moving average of width `smooth_window` seconds.
///
/// Fractions sum to one at every grid point (before and after smoothing;
/// the smoother is linear). At a point where the intensity is exactly
/// zero, which requires a zero baseline before any activity, the
/// baseline is assigned the whole unit mass, matching the limit of a
/// vanishing baseline.
pub fn decompose_intensity(
    spec: &HawkesSpec,
    events: &EventSeries,
    news: &NewsTimes,
    grid: &[f64],
    smooth_window: Option<f64>,
) -> Result<Vec<IntensityDecomposition>> {
    for (i, &g) in grid.iter().enumerate() {
        if !(g >= events.t_start() && g <= events.t_end()) {
            return Err(Error::OutsideWindow {
                t: g,
                t_start: events.t_start(),
                t_end: events.t_end(),
            });
        }
        if i > 0 && g < grid[i - 1] {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: g,
                constraint: "sorted non-decreasing",
            });
        }
    }
    if let Some(w) = smooth_window {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "smooth_window",
                value: w,
                constraint: ">= 0 and finite",
            });
        }
    }

    // Forward sweep: endogenous and causal-news contributions at each
    // grid point, O((N + G) * terms) instead of a full superposition per
    // point.
    let mut endo_sums = ExpSums::new(spec.endo().terms());
    let mut causal_beta = 0.0;
    let mut causal_alpha = 0.0;
    if let Some(exo) = spec.exo() {
        causal_alpha = exo.causal_part().alpha();
        causal_beta = exo.causal_part().beta();
    }
    let mut causal_sum = 0.0f64; // sum of exp(-beta_c (t - z_j)) over z_j < t
    let mut cursor = events.t_start();
    let mut ev_idx = 0;
    let mut news_idx = 0;
    let times = events.times();
    let zs = news.times();

    // Announcements before the window have already decayed by t_start;
    // fold them in without moving the cursor backwards.
    while news_idx < zs.len() && zs[news_idx] < cursor {
        causal_sum += (-causal_beta * (cursor - zs[news_idx])).exp();
        news_idx += 1;
    }

    let mut raw = Vec::with_capacity(grid.len());
    for &g in grid {
        // Impulses strictly before the grid point, merged in time order;
        // a backwards step would corrupt the decay state.
        loop {
            let next_event = times.get(ev_idx).copied().filter(|&t| t < g);
            let next_news = zs.get(news_idx).copied().filter(|&z| z < g);
            let (t, is_event) = match (next_event, next_news) {
                (None, None) => break,
                (Some(t), None) => (t, true),
                (None, Some(z)) => (z, false),
                (Some(t), Some(z)) => {
                    if t <= z {
                        (t, true)
                    } else {
                        (z, false)
                    }
                }
            };
            endo_sums.advance(t - cursor);
            causal_sum *= (-causal_beta * (t - cursor)).exp();
            cursor = t;
            if is_event {
                endo_sums.add_unit();
                ev_idx += 1;
            } else {
                causal_sum += 1.0;
                news_idx += 1;
            }
        }
        endo_sums.advance(g - cursor);
        causal_sum *= (-causal_beta * (g - cursor)).exp();
        cursor = g;
        let endo_val = endo_sums.weighted_value();
        let exo_causal = causal_alpha * causal_sum;
        raw.push((g, endo_val, exo_causal));
    }

    // Backward sweep for the anticipation ramp at each grid point.
    let mut anticipation = vec![0.0; grid.len()];
    if let Some(exo) = spec.exo() {
        if let Some(anti) = exo.anticipation_part() {
            let (alpha, beta) = (anti.alpha(), anti.beta());
            let mut acc = 0.0f64; // sum of exp(-beta (z_j - s)) over z_j > s
            let mut s_cursor = f64::INFINITY;
            let mut j = zs.len();
            for (gi, &g) in grid.iter().enumerate().rev() {
                if s_cursor.is_finite() {
                    acc *= (-beta * (s_cursor - g)).exp();
                } else {
                    acc = 0.0;
                }
                while j > 0 && zs[j - 1] > g {
                    acc += (-beta * (zs[j - 1] - g)).exp();
                    j -= 1;
                }
                s_cursor = g;
                anticipation[gi] = alpha * acc;
            }
        }
    }

    let mut out: Vec<IntensityDecomposition> = raw
        .iter()
        .zip(&anticipation)
        .map(|(&(t, endo_val, exo_causal), &anti)| {
            let exo_val = exo_causal + anti;
            let lambda = spec.mu() + endo_val + exo_val;
            if lambda > 0.0 {
                IntensityDecomposition {
                    t,
                    baseline_frac: spec.mu() / lambda,
                    endo_frac: endo_val / lambda,
                    exo_frac: exo_val / lambda,
                }
            } else {
                IntensityDecomposition {
                    t,
                    baseline_frac: 1.0,
                    endo_frac: 0.0,
                    exo_frac: 0.0,
                }
            }
        })
        .collect();

    if let Some(w) = smooth_window {
        if w > 0.0 && !out.is_empty() {
            let mut smoothed = Vec::with_capacity(out.len());
            let mut lo = 0usize;
            let mut sums = (0.0f64, 0.0f64, 0.0f64);
            for (i, point) in out.iter().enumerate() {
                sums.0 += point.baseline_frac;
                sums.1 += point.endo_frac;
                sums.2 += point.exo_frac;
                while out[lo].t <= point.t - w {
                    sums.0 -= out[lo].baseline_frac;
                    sums.1 -= out[lo].endo_frac;
                    sums.2 -= out[lo].exo_frac;
                    lo += 1;
                }
                let count = (i - lo + 1) as f64;
                smoothed.push(IntensityDecomposition {
                    t: point.t,
                    baseline_frac: sums.0 / count,
                    endo_frac: sums.1 / count,
                    exo_frac: sums.2 / count,
                });
            }
            out = smoothed;
        }
    }
    Ok(out)
}

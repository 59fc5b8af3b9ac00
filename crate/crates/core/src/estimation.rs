//! Maximum-likelihood fitting of the five model families.
//!
//! A fit minimizes the negative log-likelihood over a box in parameter
//! space with a quasi-Newton method (finite-difference gradients, see
//! `optimizer`), launched from several deterministic low-discrepancy
//! starting points. Amplitude lower bounds are 0 and attainable: a news
//! term the data does not want ends up with its amplitude parked exactly
//! on the boundary rather than at some small positive noise value, and
//! such parameters are flagged and excluded from standard errors.
//!
//! Parameter uncertainties come from the observed information matrix,
//! the finite-difference Hessian of the negative log-likelihood at the
//! optimum. Parameters on a bound violate the interior-optimum premise
//! and get no standard error; parameters with no curvature at all (a
//! decay rate whose amplitude is zero, say) are likewise excluded so the
//! rest of the matrix can still be inverted.

mod optimizer;

use crate::kernels::{
    DoubleExpKernel, EndoKernel, ExoKernel, NewsExpKernel, NonCausalNewsKernel, PowerLawKernel,
    DEFAULT_LADDER_RATIO, DEFAULT_LADDER_SCALES,
};
use crate::likelihood::loglik_recursive;
use crate::model::{data_fingerprint, EventSeries, HawkesSpec, NewsTimes};
use crate::{Error, Result};
use optimizer::{minimize_bounded, Bounds};

/// The model families the fitter knows how to parameterize.
///
/// Text names (accepted by [`std::str::FromStr`] and produced by
/// [`std::fmt::Display`]): `de`, `pl`, `de+news`, `pl+news`,
/// `pl+news+nc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelVariant {
    /// Double-exponential self-excitation, no announcement term.
    DoubleExp,
    /// Power-law self-excitation, no announcement term.
    PowerLaw,
    /// Double-exponential self-excitation plus causal announcement term.
    DoubleExpNews,
    /// Power-law self-excitation plus causal announcement term.
    PowerLawNews,
    /// Power-law self-excitation plus causal announcement term plus a
    /// pre-announcement ramp.
    PowerLawNewsRamp,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 5] = [
        ModelVariant::DoubleExp,
        ModelVariant::PowerLaw,
        ModelVariant::DoubleExpNews,
        ModelVariant::PowerLawNews,
        ModelVariant::PowerLawNewsRamp,
    ];

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelVariant::DoubleExp => &["mu", "alpha_a", "beta_a", "alpha_b", "beta_b"],
            ModelVariant::PowerLaw => &["mu", "n", "tau0", "p"],
            ModelVariant::DoubleExpNews => &[
                "mu", "alpha_a", "beta_a", "alpha_b", "beta_b", "alpha_news", "beta_news",
            ],
            ModelVariant::PowerLawNews => &["mu", "n", "tau0", "p", "alpha_news", "beta_news"],
            ModelVariant::PowerLawNewsRamp => &[
                "mu",
                "n",
                "tau0",
                "p",
                "alpha_news",
                "beta_news",
                "alpha_ramp",
                "beta_ramp",
            ],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    pub fn has_news(self) -> bool {
        !matches!(self, ModelVariant::DoubleExp | ModelVariant::PowerLaw)
    }

    pub fn has_ramp(self) -> bool {
        matches!(self, ModelVariant::PowerLawNewsRamp)
    }
}

impl std::fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ModelVariant::DoubleExp => "de",
            ModelVariant::PowerLaw => "pl",
            ModelVariant::DoubleExpNews => "de+news",
            ModelVariant::PowerLawNews => "pl+news",
            ModelVariant::PowerLawNewsRamp => "pl+news+nc",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "de" => Ok(ModelVariant::DoubleExp),
            "pl" => Ok(ModelVariant::PowerLaw),
            "de+news" => Ok(ModelVariant::DoubleExpNews),
            "pl+news" => Ok(ModelVariant::PowerLawNews),
            "pl+news+nc" => Ok(ModelVariant::PowerLawNewsRamp),
            other => Err(Error::UnknownVariant {
                name: other.to_string(),
            }),
        }
    }
}

/// Build the model specification a parameter vector describes.
///
/// Vector layouts match [`ModelVariant::param_names`]. The power-law
/// ladder shape (`scales`, `ratio`) is fixed per fit, not estimated.
pub fn spec_from_params(
    variant: ModelVariant,
    params: &[f64],
    ladder_scales: usize,
    ladder_ratio: f64,
) -> Result<HawkesSpec> {
    let expected = variant.n_params();
    if params.len() != expected {
        return Err(Error::InsufficientData {
            what: "parameter vector",
            needed: expected,
            got: params.len(),
        });
    }
    let (endo, used) = match variant {
        ModelVariant::DoubleExp | ModelVariant::DoubleExpNews => (
            EndoKernel::DoubleExp(DoubleExpKernel::new(
                params[1], params[2], params[3], params[4],
            )?),
            5,
        ),
        _ => (
            EndoKernel::PowerLaw(PowerLawKernel::with_ladder(
                params[1],
                params[3],
                params[2],
                ladder_scales,
                ladder_ratio,
            )?),
            4,
        ),
    };
    let exo = if variant.has_ramp() {
        Some(ExoKernel::WithAnticipation(NonCausalNewsKernel::new(
            params[used],
            params[used + 1],
            params[used + 2],
            params[used + 3],
        )?))
    } else if variant.has_news() {
        Some(ExoKernel::Causal(NewsExpKernel::new(
            params[used],
            params[used + 1],
        )?))
    } else {
        None
    };
    HawkesSpec::new(params[0], endo, exo)
}

/// Inverse of [`spec_from_params`]: read the free parameters back out of
/// a specification. Double-exponential components come out in canonical
/// order (fast component first) because the kernel stores them that way.
pub fn params_from_spec(variant: ModelVariant, spec: &HawkesSpec) -> Result<Vec<f64>> {
    let mut params = vec![spec.mu()];
    match (variant, spec.endo()) {
        (ModelVariant::DoubleExp | ModelVariant::DoubleExpNews, EndoKernel::DoubleExp(k)) => {
            params.extend([k.alpha_a(), k.beta_a(), k.alpha_b(), k.beta_b()]);
        }
        (
            ModelVariant::PowerLaw | ModelVariant::PowerLawNews | ModelVariant::PowerLawNewsRamp,
            EndoKernel::PowerLaw(k),
        ) => {
            params.extend([k.n(), k.tau0(), k.p()]);
        }
        _ => {
            return Err(Error::DegenerateInput {
                what: format!("specification does not match variant {variant}"),
            })
        }
    }
    match (variant.has_news(), variant.has_ramp(), spec.exo()) {
        (false, _, None) => {}
        (true, false, Some(ExoKernel::Causal(k))) => {
            params.extend([k.alpha(), k.beta()]);
        }
        (true, true, Some(ExoKernel::WithAnticipation(k))) => {
            let c = k.causal();
            let a = k.anticipation();
            params.extend([c.alpha(), c.beta(), a.alpha(), a.beta()]);
        }
        _ => {
            return Err(Error::DegenerateInput {
                what: format!("specification does not match variant {variant}"),
            })
        }
    }
    Ok(params)
}

/// The unique variant a specification belongs to.
pub fn infer_variant(spec: &HawkesSpec) -> Result<ModelVariant> {
    match (spec.endo(), spec.exo()) {
        (EndoKernel::DoubleExp(_), None) => Ok(ModelVariant::DoubleExp),
        (EndoKernel::PowerLaw(_), None) => Ok(ModelVariant::PowerLaw),
        (EndoKernel::DoubleExp(_), Some(ExoKernel::Causal(_))) => Ok(ModelVariant::DoubleExpNews),
        (EndoKernel::PowerLaw(_), Some(ExoKernel::Causal(_))) => Ok(ModelVariant::PowerLawNews),
        (EndoKernel::PowerLaw(_), Some(ExoKernel::WithAnticipation(_))) => {
            Ok(ModelVariant::PowerLawNewsRamp)
        }
        (EndoKernel::DoubleExp(_), Some(ExoKernel::WithAnticipation(_))) => {
            Err(Error::DegenerateInput {
                what: "no model family pairs double-exponential self-excitation with a ramp"
                    .to_string(),
            })
        }
    }
}

/// Fit settings. Defaults follow the documented conventions: 10 starts,
/// convergence at relative decrease below 1e-9 or projected gradient
/// below 1e-6.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub n_starts: usize,
    pub max_iters: usize,
    /// Relative function-decrease tolerance. Zero is allowed and leaves
    /// the projected-gradient test as the only convergence route.
    pub rel_tol: f64,
    pub grad_tol: f64,
    /// Rotates the low-discrepancy starting points.
    pub seed: u64,
    /// Per-parameter `(lo, hi)`; defaults depend on the data (the
    /// baseline cap scales with the observed mean rate).
    pub bounds: Option<(Vec<f64>, Vec<f64>)>,
    /// Explicit starting points; when set, replaces the generated spread
    /// (warm starts, refits).
    pub starts_override: Option<Vec<Vec<f64>>>,
    pub ladder_scales: usize,
    pub ladder_ratio: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_starts: 10,
            max_iters: 400,
            rel_tol: 1e-9,
            grad_tol: 1e-6,
            seed: 0,
            bounds: None,
            starts_override: None,
            ladder_scales: DEFAULT_LADDER_SCALES,
            ladder_ratio: DEFAULT_LADDER_RATIO,
        }
    }
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub variant: ModelVariant,
    pub spec: HawkesSpec,
    pub params: Vec<f64>,
    pub param_names: Vec<&'static str>,
    /// One entry per parameter; `None` when the parameter sits on a bound
    /// or the information matrix is not positive definite.
    pub std_errors: Vec<Option<f64>>,
    /// Parameters resting exactly on a box bound.
    pub at_boundary: Vec<bool>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_events: usize,
    pub converged: bool,
    pub starts_tried: usize,
    /// Best log-likelihood reached from each starting point (not-a-number
    /// when a start never found a finite value).
    pub start_logliks: Vec<f64>,
    pub data_fingerprint: String,
}

pub fn aic(loglik: f64, n_params: usize) -> f64 {
    2.0 * n_params as f64 - 2.0 * loglik
}

pub fn bic(loglik: f64, n_params: usize, n_events: usize) -> f64 {
    n_params as f64 * (n_events as f64).ln() - 2.0 * loglik
}

/// Default parameter box. Amplitudes start at an attainable 0; decay
/// rates and timescales are kept strictly positive; the branching ratio
/// stays below 1 (0.999) so the power-law kernel remains constructible;
/// the baseline is capped at ten times the observed mean rate.
pub fn default_bounds(variant: ModelVariant, events: &EventSeries) -> (Vec<f64>, Vec<f64>) {
    let rate = (events.times().len() as f64 / events.duration()).max(1e-12);
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for name in variant.param_names() {
        let (l, h) = match *name {
            "mu" => (0.0, 10.0 * rate),
            "n" => (0.0, 0.999),
            "tau0" => (1e-4, 1e3),
            "p" => (0.1, 8.0),
            name if name.starts_with("alpha") => (0.0, 1e3),
            _ => (1e-6, 1e3), // decay rates
        };
        lo.push(l);
        hi.push(h);
    }
    (lo, hi)
}

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn log_uniform(u: f64, lo: f64, hi: f64) -> f64 {
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

/// Map a unit-cube coordinate to a plausible starting value for the named
/// parameter, then clamp into the box.
fn start_value(name: &str, u: f64, observed_rate: f64, lo: f64, hi: f64) -> f64 {
    let v = match name {
        "mu" => u * observed_rate,
        "n" => 0.02 + 0.93 * u,
        "p" => 0.5 + 2.5 * u,
        "tau0" => log_uniform(u, 1e-3, 10.0),
        name if name.starts_with("alpha") => log_uniform(u, 1e-3, 50.0),
        _ => log_uniform(u, 1e-3, 100.0),
    };
    v.clamp(lo, hi)
}

/// A parsimonious start: one moment-scaled component carrying branching
/// ratio one half, every surplus amplitude parked at zero. Overcomplete
/// variants then always explore the basin with the extra terms switched
/// off instead of relying on a quasi-random start to stumble into it.
fn structured_start(names: &[&str], observed_rate: f64, bounds: &Bounds) -> Vec<f64> {
    names
        .iter()
        .enumerate()
        .map(|(d, name)| {
            let v = match *name {
                "mu" => 0.5 * observed_rate,
                "alpha_a" => 2.5 * observed_rate,
                "beta_a" => 5.0 * observed_rate,
                "beta_b" => 50.0 * observed_rate,
                "n" => 0.5,
                "tau0" => 0.25 / observed_rate,
                "p" => 1.5,
                "beta_news" => 1.0 / 300.0,
                "beta_ramp" => 1.0 / 600.0,
                _ => 0.0,
            };
            v.clamp(bounds.lo[d], bounds.hi[d])
        })
        .collect()
}

fn generate_starts(
    variant: ModelVariant,
    events: &EventSeries,
    config: &FitConfig,
    bounds: &Bounds,
) -> Vec<Vec<f64>> {
    let names = variant.param_names();
    let observed_rate = events.times().len() as f64 / events.duration();
    let offset = 19 + config.seed % 997;
    (0..config.n_starts)
        .map(|s| {
            if s == 0 {
                return structured_start(names, observed_rate, bounds);
            }
            let index = offset + s as u64;
            names
                .iter()
                .enumerate()
                .map(|(d, name)| {
                    let u = halton(index, HALTON_BASES[d]);
                    start_value(name, u, observed_rate, bounds.lo[d], bounds.hi[d])
                })
                .collect()
        })
        .collect()
}

/// Maximum-likelihood fit of `variant` to the data.
///
/// Returns the best converged start (falling back to the best overall
/// when no start converged); exact ties in log-likelihood (1e-9
/// relative) break toward the representation with more parameters pinned
/// at zero, then toward the lexicographically smallest canonical
/// parameter vector, so reruns and reorderings cannot flip the answer.
pub fn fit(
    variant: ModelVariant,
    events: &EventSeries,
    news: &NewsTimes,
    config: &FitConfig,
) -> Result<FitResult> {
    if events.times().is_empty() {
        return Err(Error::InsufficientData {
            what: "events to fit",
            needed: 1,
            got: 0,
        });
    }
    let k = variant.n_params();
    let (lo, hi) = match &config.bounds {
        Some((lo, hi)) => (lo.clone(), hi.clone()),
        None => default_bounds(variant, events),
    };
    if lo.len() != k || hi.len() != k {
        return Err(Error::InsufficientData {
            what: "bound vectors",
            needed: k,
            got: lo.len().min(hi.len()),
        });
    }
    let bounds = Bounds { lo, hi };

    let ladder = (config.ladder_scales, config.ladder_ratio);
    let mut objective = |x: &[f64]| -> f64 {
        match spec_from_params(variant, x, ladder.0, ladder.1) {
            Ok(spec) => match loglik_recursive(&spec, events, news) {
                Ok(report) if report.loglik.is_finite() => -report.loglik,
                _ => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        }
    };

    let starts = match &config.starts_override {
        Some(list) => list.clone(),
        None => generate_starts(variant, events, config, &bounds),
    };
    if starts.is_empty() {
        return Err(Error::InsufficientData {
            what: "starting points",
            needed: 1,
            got: 0,
        });
    }

    let mut outcomes = Vec::with_capacity(starts.len());
    for start in &starts {
        outcomes.push(minimize_bounded(
            &mut objective,
            start,
            &bounds,
            config.max_iters,
            config.rel_tol,
            config.grad_tol,
        ));
    }

    let start_logliks: Vec<f64> = outcomes
        .iter()
        .map(|o| if o.f.is_finite() { -o.f } else { f64::NAN })
        .collect();

    let any_converged = outcomes.iter().any(|o| o.converged && o.f.is_finite());
    let candidates: Vec<usize> = (0..outcomes.len())
        .filter(|&i| outcomes[i].f.is_finite() && (!any_converged || outcomes[i].converged))
        .collect();
    if candidates.is_empty() {
        let diagnostics = outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| format!("start {i}: {} iterations, {} evals", o.iterations, o.n_evals))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::FitFailed { diagnostics });
    }

    let f_best = candidates
        .iter()
        .map(|&i| outcomes[i].f)
        .fold(f64::INFINITY, f64::min);
    let tie_tol = 1e-9 * f_best.abs().max(1.0);
    let canonical = |x: &[f64]| -> Vec<f64> {
        spec_from_params(variant, x, ladder.0, ladder.1)
            .and_then(|s| params_from_spec(variant, &s))
            .unwrap_or_else(|_| x.to_vec())
    };
    // Ties favor the representation with more parameters switched off
    // outright: a degenerate split of one component across two (or a dead
    // announcement term wandering in the interior) scores the same but
    // says less.
    let zeros = |c: &[f64]| c.iter().filter(|&&v| v == 0.0).count();
    let best_idx = candidates
        .iter()
        .copied()
        .filter(|&i| outcomes[i].f <= f_best + tie_tol)
        .min_by(|&a, &b| {
            let ca = canonical(&outcomes[a].x);
            let cb = canonical(&outcomes[b].x);
            zeros(&cb)
                .cmp(&zeros(&ca))
                .then_with(|| ca.partial_cmp(&cb).unwrap_or(std::cmp::Ordering::Equal))
        })
        .expect("tie set is non-empty");

    let best = &outcomes[best_idx];
    let params = canonical(&best.x);
    let spec = spec_from_params(variant, &params, ladder.0, ladder.1)?;
    let loglik = -best.f;

    let at_boundary: Vec<bool> = (0..k)
        .map(|i| params[i] == bounds.lo[i] || params[i] == bounds.hi[i])
        .collect();
    let std_errors = std_errors_at(&mut objective, &params, &bounds, &at_boundary);

    Ok(FitResult {
        variant,
        spec,
        param_names: variant.param_names().to_vec(),
        std_errors,
        at_boundary,
        loglik,
        aic: aic(loglik, k),
        bic: bic(loglik, k, events.times().len()),
        n_events: events.times().len(),
        converged: best.converged,
        starts_tried: starts.len(),
        start_logliks,
        data_fingerprint: data_fingerprint(events, news),
        params,
    })
}

/// Standard errors from the observed information matrix of a fitted
/// specification, evaluated on the data it was fitted to.
///
/// Parameters sitting on the default box bounds are excluded (no
/// interior optimum there), as are parameters with no curvature, such as
/// decay rates whose amplitude is zero, and parameters the data cannot
/// tell apart (a flat direction of the information matrix). Returns one
/// entry per parameter in the variant's canonical order.
pub fn hessian_std_errors(
    spec: &HawkesSpec,
    events: &EventSeries,
    news: &NewsTimes,
) -> Result<Vec<Option<f64>>> {
    let variant = infer_variant(spec)?;
    let params = params_from_spec(variant, spec)?;
    let (lo, hi) = default_bounds(variant, events);
    let bounds = Bounds { lo, hi };
    let at_boundary: Vec<bool> = (0..params.len())
        .map(|i| params[i] <= bounds.lo[i] || params[i] >= bounds.hi[i])
        .collect();
    let (scales, ratio) = match spec.endo() {
        EndoKernel::PowerLaw(k) => (k.scales(), k.ratio()),
        _ => (DEFAULT_LADDER_SCALES, DEFAULT_LADDER_RATIO),
    };
    let mut objective = |x: &[f64]| -> f64 {
        match spec_from_params(variant, x, scales, ratio) {
            Ok(s) => match loglik_recursive(&s, events, news) {
                Ok(report) if report.loglik.is_finite() => -report.loglik,
                _ => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        }
    };
    Ok(std_errors_at(&mut objective, &params, &bounds, &at_boundary))
}

/// Central finite-difference Hessian restricted to interior parameters,
/// inverted through a Cholesky factorization with an eigenspace fallback
/// for indefinite matrices. Any parameter whose whole Hessian row is
/// exactly zero carries no information and is dropped before inversion.
fn std_errors_at(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    params: &[f64],
    bounds: &Bounds,
    at_boundary: &[bool],
) -> Vec<Option<f64>> {
    let k = params.len();
    let mut out = vec![None; k];

    let mut free: Vec<usize> = Vec::new();
    let mut steps: Vec<f64> = Vec::new();
    for i in 0..k {
        if at_boundary[i] {
            continue;
        }
        let mut h = 1e-4 * params[i].abs().max(1e-3);
        let gap_lo = params[i] - bounds.lo[i];
        let gap_hi = bounds.hi[i] - params[i];
        h = h.min(0.45 * gap_lo).min(0.45 * gap_hi);
        if h > 1e-12 {
            free.push(i);
            steps.push(h);
        }
    }
    if free.is_empty() {
        return out;
    }

    let m = free.len();
    let f0 = objective(params);
    if !f0.is_finite() {
        return out;
    }
    let mut hess = vec![0.0; m * m];
    let mut x = params.to_vec();
    for a in 0..m {
        let (i, hi_step) = (free[a], steps[a]);
        x[i] = params[i] + hi_step;
        let fp = objective(&x);
        x[i] = params[i] - hi_step;
        let fm = objective(&x);
        x[i] = params[i];
        if !fp.is_finite() || !fm.is_finite() {
            return out;
        }
        hess[a * m + a] = (fp - 2.0 * f0 + fm) / (hi_step * hi_step);
        for b in (a + 1)..m {
            let (j, hj) = (free[b], steps[b]);
            x[i] = params[i] + hi_step;
            x[j] = params[j] + hj;
            let fpp = objective(&x);
            x[j] = params[j] - hj;
            let fpm = objective(&x);
            x[i] = params[i] - hi_step;
            let fmm = objective(&x);
            x[j] = params[j] + hj;
            let fmp = objective(&x);
            x[i] = params[i];
            x[j] = params[j];
            if ![fpp, fpm, fmm, fmp].iter().all(|v| v.is_finite()) {
                return out;
            }
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hi_step * hj);
            hess[a * m + b] = v;
            hess[b * m + a] = v;
        }
    }

    // Zero-curvature parameters (dead directions) would make the matrix
    // singular; drop them and keep the informative block.
    let live: Vec<usize> = (0..m)
        .filter(|&a| (0..m).any(|b| hess[a * m + b] != 0.0))
        .collect();
    if live.is_empty() {
        return out;
    }
    let lm = live.len();
    let mut reduced = vec![0.0; lm * lm];
    for (ra, &a) in live.iter().enumerate() {
        for (rb, &b) in live.iter().enumerate() {
            reduced[ra * lm + rb] = hess[a * m + b];
        }
    }

    // A nearly flat direction (a component split the likelihood cannot
    // tell apart) makes the matrix indefinite; fall back to inverting on
    // the identified eigenspace so the well-determined parameters still
    // get error bars. Parameters loading on a flat direction get none.
    let cov_diag = match cholesky_inverse_diagonal(&reduced, lm) {
        Some(d) => d,
        None => match eigen_inverse_diagonal(&reduced, lm) {
            Some(d) => d,
            None => return out,
        },
    };
    for (ra, &a) in live.iter().enumerate() {
        if cov_diag[ra] > 0.0 && cov_diag[ra].is_finite() {
            out[free[a]] = Some(cov_diag[ra].sqrt());
        }
    }
    out
}

/// Diagonal of the inverse of a symmetric positive-definite matrix via
/// Cholesky factorization; `None` when the matrix is not positive
/// definite.
fn cholesky_inverse_diagonal(mat: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = mat[i * n + j];
            for p in 0..j {
                sum -= l[i * n + p] * l[j * n + p];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // Solve L y = e_k, then L' x = y; the diagonal entry of the inverse
    // is x[k].
    let mut diag = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut xcol = vec![0.0; n];
    for col in 0..n {
        for i in 0..n {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let mut sum = rhs;
            for p in 0..i {
                sum -= l[i * n + p] * y[p];
            }
            y[i] = sum / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut sum = y[i];
            for p in (i + 1)..n {
                sum -= l[p * n + i] * xcol[p];
            }
            xcol[i] = sum / l[i * n + i];
        }
        diag[col] = xcol[col];
    }
    Some(diag)
}

/// Diagonal of the Moore-Penrose pseudo-inverse of a symmetric matrix,
/// restricted to its numerically positive eigenspace. Rows that mostly
/// live in a dropped (flat or negative) direction come back infinite so
/// callers can refuse to report an error bar for them; rows with a
/// minority loading keep the variance of their identified part.
fn eigen_inverse_diagonal(mat: &[f64], n: usize) -> Option<Vec<f64>> {
    let (w, v) = jacobi_eigen(mat, n);
    let wmax = w.iter().cloned().fold(0.0f64, f64::max);
    if !wmax.is_finite() || wmax <= 0.0 {
        return None;
    }
    // Eigenvalues below the finite-difference noise floor are not
    // evidence of curvature.
    let cut = 1e-9 * wmax;
    let mut diag = vec![0.0; n];
    for i in 0..n {
        let mut var = 0.0;
        let mut dropped = 0.0;
        for j in 0..n {
            let load = v[i * n + j] * v[i * n + j];
            if w[j] > cut {
                var += load / w[j];
            } else {
                dropped += load;
            }
        }
        diag[i] = if dropped > 0.5 { f64::INFINITY } else { var };
    }
    Some(diag)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues and a matrix whose column `j` (entries `v[i * n + j]`) is
/// the eigenvector for eigenvalue `j`. Plenty for the small observed
/// information matrices here.
fn jacobi_eigen(mat: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = mat.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm: f64 = mat.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-13 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let w: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    (w, v)
}

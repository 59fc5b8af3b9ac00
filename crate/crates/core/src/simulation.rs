//! Exact simulation by thinning, binned-count summaries, and the
//! simulated-versus-real count-ratio experiment.
//!
//! Sampling uses Ogata's thinning scheme with a piecewise dominating
//! bound. The window is cut into segments that never contain an
//! announcement strictly inside, so within a segment the intensity can
//! only move in known directions: self-excitation and the causal
//! announcement response decay, while the pre-announcement ramp grows
//! toward the next announcement. The dominating bound is therefore the
//! decaying parts evaluated at the segment start (negative-amplitude
//! correction terms dropped) plus the ramp evaluated at the segment end.
//! Candidates are drawn from that bound and accepted with probability
//! `lambda/bound`; every accepted event raises the bound immediately.
//! With a ramp present, segments are also capped at one ramp timescale
//! so the bound never runs far ahead of the actual intensity.
//!
//! Replicas are reproducible in isolation: replica `r` uses the stream
//! `r` of a counter-based generator seeded once, so replica 7 of a
//! 10-replica run equals replica 7 of a 100-replica run.

use crate::kernels::ExpSums;
use crate::model::{data_fingerprint, EventSeries, HawkesSpec, NewsTimes};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Five-minute bins, the coarse preset.
pub const BIN_WIDTH_COARSE: f64 = 300.0;
/// One-minute bins, the fine preset.
pub const BIN_WIDTH_FINE: f64 = 60.0;

/// Simulation request: how many replicas of which window, under which
/// announcement calendar.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub seed: u64,
    pub n_replicas: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub news: NewsTimes,
    /// Hard cap per replica; exceeding it is an error rather than a
    /// truncation so a runaway specification cannot silently produce a
    /// biased sample.
    pub max_events: Option<usize>,
}

impl SimConfig {
    pub fn new(t_start: f64, t_end: f64, n_replicas: usize, seed: u64) -> Self {
        Self {
            seed,
            n_replicas,
            t_start,
            t_end,
            news: NewsTimes::empty(),
            max_events: None,
        }
    }

    pub fn with_news(mut self, news: NewsTimes) -> Self {
        self.news = news;
        self
    }
}

/// Draw `config.n_replicas` independent event series from the exact law
/// of the specification's intensity.
pub fn simulate(spec: &HawkesSpec, config: &SimConfig) -> Result<Vec<EventSeries>> {
    if config.n_replicas < 1 {
        return Err(Error::InvalidParameter {
            name: "n_replicas",
            value: 0.0,
            constraint: ">= 1",
        });
    }
    if !(config.t_start.is_finite() && config.t_end.is_finite())
        || config.t_start >= config.t_end
    {
        return Err(Error::ReversedBounds {
            from: config.t_start,
            to: config.t_end,
        });
    }
    if !spec.is_stationary() {
        return Err(Error::NonStationary {
            endo_mass: spec.endo_mass(),
        });
    }

    let duration = config.t_end - config.t_start;
    let zs_rel: Vec<f64> = config
        .news
        .times()
        .iter()
        .map(|z| z - config.t_start)
        .collect();

    let mut replicas = Vec::with_capacity(config.n_replicas);
    for r in 0..config.n_replicas {
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        rng.set_stream(r as u64);
        let rel = simulate_one(spec, &zs_rel, duration, config.max_events, &mut rng)?;
        let abs: Vec<f64> = rel.iter().map(|t| t + config.t_start).collect();
        replicas.push(EventSeries::new(abs, config.t_start, config.t_end)?);
    }
    Ok(replicas)
}

/// Suffix sums `S[j] = sum_{l >= j} exp(-beta (z_l - z_j))`, so the ramp
/// intensity at `t` below the next announcement `z_j` is
/// `alpha * exp(-beta (z_j - t)) * S[j]`.
fn ramp_suffix(zs: &[f64], beta: f64) -> Vec<f64> {
    let mut s = vec![0.0; zs.len()];
    for j in (0..zs.len()).rev() {
        s[j] = 1.0
            + if j + 1 < zs.len() {
                (-beta * (zs[j + 1] - zs[j])).exp() * s[j + 1]
            } else {
                0.0
            };
    }
    s
}

fn simulate_one(
    spec: &HawkesSpec,
    zs: &[f64],
    duration: f64,
    max_events: Option<usize>,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<f64>> {
    let mu = spec.mu();
    let mut endo = ExpSums::new(spec.endo().terms());

    let (alpha_c, beta_c) = match spec.exo() {
        Some(exo) => {
            let c = exo.causal_part();
            (c.alpha(), c.beta())
        }
        None => (0.0, 1.0),
    };
    let ramp = spec.exo().and_then(|exo| exo.anticipation_part());
    let (alpha_nc, beta_nc) = ramp.map_or((0.0, 1.0), |a| (a.alpha(), a.beta()));
    let suffix = if ramp.is_some() {
        ramp_suffix(zs, beta_nc)
    } else {
        Vec::new()
    };
    // Ramp intensity at time t, where j indexes the first announcement
    // strictly ahead of t; zero once no announcements remain.
    let ramp_at = |t: f64, j: usize| -> f64 {
        if alpha_nc == 0.0 || j >= zs.len() {
            0.0
        } else {
            alpha_nc * (-beta_nc * (zs[j] - t)).exp() * suffix[j]
        }
    };

    let mut events: Vec<f64> = Vec::new();
    let mut cursor = 0.0f64;
    let mut causal_sum = 0.0f64; // sum of exp(-beta_c (cursor - z)) over folded news
    let mut next_news = 0usize; // first announcement index with z > cursor

    while zs.get(next_news).is_some_and(|&z| z <= 0.0) {
        causal_sum += (beta_c * zs[next_news]).exp(); // z <= 0 = -|z|
        next_news += 1;
    }

    while cursor < duration {
        let news_end = zs.get(next_news).copied().unwrap_or(f64::INFINITY);
        let mut seg_end = duration.min(news_end);
        if ramp.is_some() && news_end.is_finite() {
            // Cap segment growth so the end-of-segment ramp bound stays
            // within a constant factor of the ramp at the cursor.
            let cap = cursor + (1.0 / beta_nc).max((news_end - cursor) / 2.0);
            seg_end = seg_end.min(cap);
        }

        // One dominating bound serves until the segment ends or an event
        // is accepted.
        loop {
            let bound =
                mu + endo.positive_weighted_value() + alpha_c * causal_sum + ramp_at(seg_end.min(news_end), next_news);
            debug_assert!(bound.is_finite());
            if bound <= 0.0 {
                // Nothing can happen in this segment.
                endo.advance(seg_end - cursor);
                causal_sum *= (-beta_c * (seg_end - cursor)).exp();
                cursor = seg_end;
                break;
            }
            let w = -rng.gen::<f64>().ln() / bound;
            let t_cand = cursor + w;
            if t_cand >= seg_end {
                endo.advance(seg_end - cursor);
                causal_sum *= (-beta_c * (seg_end - cursor)).exp();
                cursor = seg_end;
                break;
            }
            if t_cand <= cursor {
                // Underflow guard: a zero-length step cannot produce a
                // strictly increasing series; redraw.
                continue;
            }
            endo.advance(t_cand - cursor);
            causal_sum *= (-beta_c * (t_cand - cursor)).exp();
            cursor = t_cand;

            let lambda =
                mu + endo.weighted_value() + alpha_c * causal_sum + ramp_at(cursor, next_news);
            assert!(
                lambda <= bound * (1.0 + 1e-12),
                "thinning bound violated: lambda {lambda} > bound {bound}"
            );
            if rng.gen::<f64>() * bound < lambda {
                events.push(cursor);
                endo.add_unit();
                if let Some(cap) = max_events {
                    if events.len() > cap {
                        return Err(Error::DegenerateInput {
                            what: format!("simulation exceeded {cap} events"),
                        });
                    }
                }
            }
        }

        // Fold announcements reached by the cursor into the causal state.
        while zs.get(next_news).is_some_and(|&z| z <= cursor) {
            causal_sum += (-beta_c * (cursor - zs[next_news])).exp();
            next_news += 1;
        }
    }

    Ok(events)
}

/// Event counts on a regular grid of bins covering the window. The last
/// bin absorbs the remainder when the width does not divide the window,
/// so the bins always tile the window and every event lands in exactly
/// one bin.
#[derive(Debug, Clone)]
pub struct BinnedCounts {
    pub bin_width: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// `counts[replica][bin]`.
    pub counts: Vec<Vec<u64>>,
}

impl BinnedCounts {
    pub fn n_bins(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    /// Left edge of each bin.
    pub fn edges(&self) -> Vec<f64> {
        (0..self.n_bins())
            .map(|b| self.t_start + b as f64 * self.bin_width)
            .collect()
    }

    /// Mean count per bin across replicas.
    pub fn mean(&self) -> Vec<f64> {
        let n_bins = self.n_bins();
        let mut mean = vec![0.0; n_bins];
        for row in &self.counts {
            for (m, &c) in mean.iter_mut().zip(row) {
                *m += c as f64;
            }
        }
        let r = self.counts.len() as f64;
        mean.iter_mut().for_each(|m| *m /= r);
        mean
    }

    /// Per-bin standard deviation across replicas (the one-standard-
    /// deviation band around [`Self::mean`]).
    pub fn std(&self) -> Vec<f64> {
        let mean = self.mean();
        let r = self.counts.len();
        if r < 2 {
            return vec![0.0; self.n_bins()];
        }
        let mut var = vec![0.0; self.n_bins()];
        for row in &self.counts {
            for ((v, &c), m) in var.iter_mut().zip(row).zip(&mean) {
                let d = c as f64 - m;
                *v += d * d;
            }
        }
        var.iter_mut().for_each(|v| *v /= (r - 1) as f64);
        var.into_iter().map(f64::sqrt).collect()
    }
}

/// Bin one or more event series sharing a window.
pub fn bin_events(series: &[EventSeries], bin_width: f64) -> Result<BinnedCounts> {
    let first = series.first().ok_or(Error::InsufficientData {
        what: "event series to bin",
        needed: 1,
        got: 0,
    })?;
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "bin_width",
            value: bin_width,
            constraint: "> 0 and finite",
        });
    }
    let (t_start, t_end) = (first.t_start(), first.t_end());
    let n_bins = ((t_end - t_start) / bin_width).ceil().max(1.0) as usize;
    let mut counts = Vec::with_capacity(series.len());
    for s in series {
        if s.t_start() != t_start || s.t_end() != t_end {
            return Err(Error::DegenerateInput {
                what: "binning requires all series to share one window".to_string(),
            });
        }
        let mut row = vec![0u64; n_bins];
        for &t in s.times() {
            let b = (((t - t_start) / bin_width) as usize).min(n_bins - 1);
            row[b] += 1;
        }
        counts.push(row);
    }
    Ok(BinnedCounts {
        bin_width,
        t_start,
        t_end,
        counts,
    })
}

/// Settings for [`count_ratio_experiment`].
#[derive(Debug, Clone)]
pub struct RatioConfig {
    pub seed: u64,
    pub n_replicas: usize,
    pub bin_width: f64,
    /// Length of the summary windows just before and just after each
    /// announcement (default five minutes).
    pub summary_width: f64,
}

impl Default for RatioConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_replicas: 25,
            bin_width: BIN_WIDTH_COARSE,
            summary_width: 300.0,
        }
    }
}

/// Count ratios for one fitted model against the real series.
#[derive(Debug, Clone)]
pub struct ModelCountRatios {
    /// Mean simulated count divided by real count, per bin; `None` where
    /// the real bin is empty.
    pub per_bin: Vec<Option<f64>>,
    /// Standard deviation of the simulated count divided by the real
    /// count, per bin (the width of the ratio band).
    pub per_bin_std: Vec<Option<f64>>,
    /// Pooled ratio over the summary windows following each announcement:
    /// total mean simulated count / total real count. `None` when no real
    /// events fall in any such window.
    pub post_news_ratio: Option<f64>,
    /// Same for the windows immediately preceding each announcement.
    pub pre_news_ratio: Option<f64>,
    pub mean_total: f64,
}

/// Simulate both fitted models over the real window and compare binned
/// counts against the real series, as a per-bin ratio series and as
/// pooled pre/post announcement summaries.
pub fn count_ratio_experiment(
    fit_with_news: &crate::estimation::FitResult,
    fit_without_news: &crate::estimation::FitResult,
    real_events: &EventSeries,
    news: &NewsTimes,
    config: &RatioConfig,
) -> Result<CountRatioReport> {
    if fit_with_news.data_fingerprint != fit_without_news.data_fingerprint {
        return Err(Error::FingerprintMismatch {
            left: fit_with_news.data_fingerprint.clone(),
            right: fit_without_news.data_fingerprint.clone(),
        });
    }
    let expected = data_fingerprint(real_events, news);
    if fit_with_news.data_fingerprint != expected {
        return Err(Error::FingerprintMismatch {
            left: fit_with_news.data_fingerprint.clone(),
            right: expected,
        });
    }
    if real_events.times().is_empty() {
        return Err(Error::InsufficientData {
            what: "real events for ratio reference",
            needed: 1,
            got: 0,
        });
    }

    let sim_config = SimConfig {
        seed: config.seed,
        n_replicas: config.n_replicas,
        t_start: real_events.t_start(),
        t_end: real_events.t_end(),
        news: news.clone(),
        max_events: None,
    };
    let real_bins = bin_events(std::slice::from_ref(real_events), config.bin_width)?;
    let with = model_ratios(
        &fit_with_news.spec,
        &sim_config,
        real_events,
        &real_bins,
        news,
        config,
    )?;
    let without = model_ratios(
        &fit_without_news.spec,
        &sim_config,
        real_events,
        &real_bins,
        news,
        config,
    )?;
    Ok(CountRatioReport {
        bin_width: config.bin_width,
        with_news: with,
        without_news: without,
    })
}

#[derive(Debug, Clone)]
pub struct CountRatioReport {
    pub bin_width: f64,
    pub with_news: ModelCountRatios,
    pub without_news: ModelCountRatios,
}

fn count_in(series: &EventSeries, lo: f64, hi: f64) -> usize {
    let times = series.times();
    let a = times.partition_point(|&t| t < lo);
    let b = times.partition_point(|&t| t < hi);
    b - a
}

fn model_ratios(
    spec: &HawkesSpec,
    sim_config: &SimConfig,
    real_events: &EventSeries,
    real_bins: &BinnedCounts,
    news: &NewsTimes,
    config: &RatioConfig,
) -> Result<ModelCountRatios> {
    let replicas = simulate(spec, sim_config)?;
    let sim_bins = bin_events(&replicas, config.bin_width)?;
    let sim_mean = sim_bins.mean();
    let sim_std = sim_bins.std();
    let real_row = &real_bins.counts[0];

    let per_bin: Vec<Option<f64>> = sim_mean
        .iter()
        .zip(real_row)
        .map(|(&m, &r)| (r > 0).then(|| m / r as f64))
        .collect();
    let per_bin_std: Vec<Option<f64>> = sim_std
        .iter()
        .zip(real_row)
        .map(|(&s, &r)| (r > 0).then(|| s / r as f64))
        .collect();

    // Pooled pre/post summaries: sum simulated means and real counts
    // over the windows around every announcement, then divide once.
    let (t0, t1) = (real_events.t_start(), real_events.t_end());
    let mut post_sim = 0.0;
    let mut post_real = 0usize;
    let mut pre_sim = 0.0;
    let mut pre_real = 0usize;
    for &z in news.times() {
        let post = (z.max(t0), (z + config.summary_width).min(t1));
        let pre = ((z - config.summary_width).max(t0), z.min(t1));
        if post.1 > post.0 {
            post_real += count_in(real_events, post.0, post.1);
            for rep in &replicas {
                post_sim += count_in(rep, post.0, post.1) as f64;
            }
        }
        if pre.1 > pre.0 {
            pre_real += count_in(real_events, pre.0, pre.1);
            for rep in &replicas {
                pre_sim += count_in(rep, pre.0, pre.1) as f64;
            }
        }
    }
    let r = replicas.len() as f64;
    let mean_total = replicas.iter().map(|s| s.times().len() as f64).sum::<f64>() / r;
    Ok(ModelCountRatios {
        per_bin,
        per_bin_std,
        post_news_ratio: (post_real > 0).then(|| post_sim / r / post_real as f64),
        pre_news_ratio: (pre_real > 0).then(|| pre_sim / r / pre_real as f64),
        mean_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{DoubleExpKernel, EndoKernel, ExoKernel, NonCausalNewsKernel};
    use crate::kernels::NewsExpKernel;

    fn poisson_spec(mu: f64) -> HawkesSpec {
        let k = DoubleExpKernel::new(0.0, 1.0, 0.0, 1.0).unwrap();
        HawkesSpec::new(mu, EndoKernel::DoubleExp(k), None).unwrap()
    }

    fn single_exp_spec(mu: f64, alpha: f64, beta: f64) -> HawkesSpec {
        let k = DoubleExpKernel::single(alpha, beta).unwrap();
        HawkesSpec::new(mu, EndoKernel::DoubleExp(k), None).unwrap()
    }

    #[test]
    fn poisson_mean_count_matches_the_law() {
        let spec = poisson_spec(0.5);
        let config = SimConfig::new(0.0, 10_000.0, 200, 42);
        let replicas = simulate(&spec, &config).unwrap();
        let mean = replicas.iter().map(|s| s.times().len() as f64).sum::<f64>() / 200.0;
        // Count variance is 5000 per replica; the mean of 200 replicas
        // has standard error sqrt(5000/200) = 5.
        assert!(
            (mean - 5000.0).abs() < 3.0 * (5000.0f64 / 200.0).sqrt(),
            "mean count {mean} too far from 5000"
        );
    }

    #[test]
    fn hawkes_mean_rate_is_baseline_over_one_minus_mass() {
        let spec = single_exp_spec(0.1, 0.5, 1.0);
        let config = SimConfig::new(0.0, 50_000.0, 20, 7);
        let replicas = simulate(&spec, &config).unwrap();
        let rates: Vec<f64> = replicas
            .iter()
            .map(|s| s.times().len() as f64 / 50_000.0)
            .collect();
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        let sd = (rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>()
            / (rates.len() - 1) as f64)
            .sqrt();
        let se = sd / (rates.len() as f64).sqrt();
        assert!(
            (mean - 0.2).abs() < 3.0 * se,
            "rate {mean} vs 0.2 (se {se})"
        );
    }

    #[test]
    fn replicas_are_deterministic_and_distinct() {
        let spec = single_exp_spec(0.3, 0.4, 1.0);
        let config = SimConfig::new(0.0, 500.0, 3, 11);
        let a = simulate(&spec, &config).unwrap();
        let b = simulate(&spec, &config).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.times(), y.times());
        }
        assert_ne!(a[0].times(), a[1].times());
    }

    #[test]
    fn replica_identity_does_not_depend_on_how_many_are_requested() {
        let spec = single_exp_spec(0.3, 0.4, 1.0);
        let few = simulate(&spec, &SimConfig::new(0.0, 500.0, 2, 11)).unwrap();
        let many = simulate(&spec, &SimConfig::new(0.0, 500.0, 5, 11)).unwrap();
        assert_eq!(few[1].times(), many[1].times());
    }

    #[test]
    fn non_stationary_specification_is_refused() {
        let spec = single_exp_spec(0.1, 1.2, 1.0);
        let err = simulate(&spec, &SimConfig::new(0.0, 100.0, 1, 0)).unwrap_err();
        assert!(matches!(err, Error::NonStationary { .. }));
    }

    #[test]
    fn event_cap_is_enforced() {
        let spec = poisson_spec(1.0);
        let mut config = SimConfig::new(0.0, 1000.0, 1, 0);
        config.max_events = Some(50);
        assert!(simulate(&spec, &config).is_err());
    }

    #[test]
    fn causal_news_lifts_counts_after_the_announcement() {
        let endo = DoubleExpKernel::new(0.4, 1.0, 0.01, 0.1).unwrap();
        let exo = NewsExpKernel::new(3.2, 0.016).unwrap();
        let spec = HawkesSpec::new(
            0.1,
            EndoKernel::DoubleExp(endo),
            Some(ExoKernel::Causal(exo)),
        )
        .unwrap();
        let news = NewsTimes::new(vec![5400.0]).unwrap();
        let config = SimConfig::new(0.0, 10_800.0, 10, 3).with_news(news);
        let replicas = simulate(&spec, &config).unwrap();
        let bins = bin_events(&replicas, BIN_WIDTH_COARSE).unwrap();
        let mean = bins.mean();
        let news_bin = (5400.0 / BIN_WIDTH_COARSE) as usize;
        let peak = mean
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peak, news_bin, "count peak must sit at the news bin");
        // The response must decay: a couple of bins later the mean count
        // has fallen well below the peak.
        assert!(mean[news_bin + 4] < 0.7 * mean[news_bin]);
    }

    #[test]
    fn anticipation_ramp_lifts_counts_before_the_announcement() {
        let endo = DoubleExpKernel::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let exo = NonCausalNewsKernel::new(1e-9, 1.0, 0.9, 0.003).unwrap();
        let spec = HawkesSpec::new(
            0.05,
            EndoKernel::DoubleExp(endo),
            Some(ExoKernel::WithAnticipation(exo)),
        )
        .unwrap();
        let news = NewsTimes::new(vec![3600.0]).unwrap();
        let config = SimConfig::new(0.0, 4000.0, 40, 5).with_news(news);
        let replicas = simulate(&spec, &config).unwrap();
        let mut near = 0usize; // [3300, 3600): ramp nearly fully grown
        let mut far = 0usize; // [2400, 2700): ramp still small
        for rep in &replicas {
            near += count_in(rep, 3300.0, 3600.0);
            far += count_in(rep, 2400.0, 2700.0);
        }
        assert!(
            near as f64 > 2.0 * far as f64,
            "ramp must concentrate events just before the news: near {near}, far {far}"
        );
    }

    #[test]
    fn binned_counts_tile_the_window_and_conserve_events() {
        let s = EventSeries::new(vec![0.5, 10.0, 299.9, 300.0, 640.0], 0.0, 650.0).unwrap();
        let bins = bin_events(std::slice::from_ref(&s), 300.0).unwrap();
        assert_eq!(bins.n_bins(), 3); // [0,300) [300,600) [600,650]
        assert_eq!(bins.counts[0], vec![3, 1, 1]);
        assert_eq!(
            bins.counts[0].iter().sum::<u64>() as usize,
            s.times().len()
        );
        assert_eq!(bins.edges(), vec![0.0, 300.0, 600.0]);
    }

    #[test]
    fn binning_rejects_mismatched_windows() {
        let a = EventSeries::new(vec![1.0], 0.0, 10.0).unwrap();
        let b = EventSeries::new(vec![1.0], 0.0, 20.0).unwrap();
        assert!(bin_events(&[a, b], 5.0).is_err());
    }

    #[test]
    fn ratio_experiment_flags_the_missing_news_term() {
        use crate::estimation::{aic, bic, infer_variant, params_from_spec, FitResult};

        let endo = DoubleExpKernel::new(0.3, 1.0, 0.0, 0.1).unwrap();
        let news_kernel = NewsExpKernel::new(3.2, 0.016).unwrap();
        let spec_news = HawkesSpec::new(
            0.1,
            EndoKernel::DoubleExp(endo.clone()),
            Some(ExoKernel::Causal(news_kernel)),
        )
        .unwrap();
        // The newsless model gets the same total event budget by raising
        // its baseline to absorb the announcement mass.
        let lam_n = 1.0 / 5400.0;
        let mu_flat = 0.1 + lam_n * 200.0;
        let spec_flat =
            HawkesSpec::new(mu_flat, EndoKernel::DoubleExp(endo), None).unwrap();

        let news = NewsTimes::new(vec![5400.0]).unwrap();
        let real = simulate(
            &spec_news,
            &SimConfig::new(0.0, 10_800.0, 1, 99).with_news(news.clone()),
        )
        .unwrap()
        .remove(0);

        let as_fit = |spec: &HawkesSpec| -> FitResult {
            let variant = infer_variant(spec).unwrap();
            let params = params_from_spec(variant, spec).unwrap();
            let k = variant.n_params();
            FitResult {
                variant,
                spec: spec.clone(),
                param_names: variant.param_names().to_vec(),
                std_errors: vec![None; k],
                at_boundary: vec![false; k],
                loglik: 0.0,
                aic: aic(0.0, k),
                bic: bic(0.0, k, real.times().len()),
                n_events: real.times().len(),
                converged: true,
                starts_tried: 0,
                start_logliks: vec![],
                data_fingerprint: data_fingerprint(&real, &news),
                params,
            }
        };

        let config = RatioConfig {
            seed: 4,
            n_replicas: 10,
            ..RatioConfig::default()
        };
        let report = count_ratio_experiment(
            &as_fit(&spec_news),
            &as_fit(&spec_flat),
            &real,
            &news,
            &config,
        )
        .unwrap();
        let post_with = report.with_news.post_news_ratio.unwrap();
        let post_without = report.without_news.post_news_ratio.unwrap();
        assert!(
            post_with > post_without,
            "true model must beat the flat model after news: {post_with} vs {post_without}"
        );
        assert!(
            post_without < 0.9,
            "flat model must underestimate the post-news burst, got {post_without}"
        );
    }

    #[test]
    fn ratio_experiment_refuses_mismatched_fingerprints() {
        use crate::estimation::{fit, FitConfig, ModelVariant};

        let real = simulate(&poisson_spec(0.5), &SimConfig::new(0.0, 400.0, 1, 1))
            .unwrap()
            .remove(0);
        let other = simulate(&poisson_spec(0.5), &SimConfig::new(0.0, 400.0, 1, 2))
            .unwrap()
            .remove(0);
        let quick = FitConfig {
            n_starts: 2,
            ..FitConfig::default()
        };
        let fit_a = fit(ModelVariant::DoubleExp, &real, &NewsTimes::empty(), &quick).unwrap();
        let fit_b = fit(ModelVariant::DoubleExp, &other, &NewsTimes::empty(), &quick).unwrap();
        let err = count_ratio_experiment(
            &fit_a,
            &fit_b,
            &real,
            &NewsTimes::empty(),
            &RatioConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::FingerprintMismatch { .. }));
    }
}

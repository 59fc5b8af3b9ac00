//! Goodness-of-fit and model selection.
//!
//! Under the true model the time change `t -> integral of lambda`
//! converts the event times into a unit-rate Poisson stream, so the
//! per-interval integrals ("residuals") are i.i.d. standard exponential.
//! [`residuals`] computes them in closed form; [`excess_dispersion_test`]
//! checks their variance against 1; [`qq_export`] prepares
//! quantile-quantile pairs for plotting. [`select`] ranks fitted models
//! by information criteria, and [`welch_t_test`] compares two groups of
//! summary values with unequal variances.

use crate::estimation::FitResult;
use crate::kernels::ExpSums;
use crate::model::{EventSeries, HawkesSpec, NewsTimes};
use crate::{Error, Result};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Compensator increments between consecutive events, one per
/// inter-event interval (`n_events - 1` values, all nonnegative).
#[derive(Debug, Clone)]
pub struct ResidualSeries {
    values: Vec<f64>,
}

impl ResidualSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Wrap precomputed residual values (for tests and external data).
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { values }
    }
}

/// Exact time-change residuals of `spec` on the data.
///
/// The integral over each interval splits into baseline, self-excitation,
/// causal announcement response, and anticipation ramp, each with a
/// closed-form antiderivative. Announcements anywhere on the line
/// contribute: one before the first event still feeds its decaying tail
/// into later intervals, one after the last event still feeds its ramp
/// into earlier intervals.
pub fn residuals(
    spec: &HawkesSpec,
    events: &EventSeries,
    news: &NewsTimes,
) -> Result<ResidualSeries> {
    let times = events.times();
    let n = times.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "events for residuals",
            needed: 2,
            got: n,
        });
    }
    let t0 = events.t_start();
    let taus: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let zs: Vec<f64> = news.times().iter().map(|z| z - t0).collect();
    let mu = spec.mu();

    let (alpha_c, beta_c) = match spec.exo() {
        Some(exo) => {
            let c = exo.causal_part();
            (c.alpha(), c.beta())
        }
        None => (0.0, 1.0),
    };
    let anti = spec.exo().and_then(|exo| exo.anticipation_part());
    let (alpha_nc, beta_nc) = anti.map_or((0.0, 1.0), |a| (a.alpha(), a.beta()));

    // Backward sweep: p_incl[i] = sum over news z >= tau_i of
    // exp(-beta_nc (z - tau_i)), needed for the ramp integral over the
    // interval ending at tau_{i+1}.
    let mut p_incl = vec![0.0; n];
    if anti.is_some() {
        let mut q = 0.0f64;
        let mut j = zs.len();
        let mut ref_t = f64::INFINITY;
        for i in (0..n).rev() {
            if ref_t.is_finite() {
                q *= (-beta_nc * (ref_t - taus[i])).exp();
            }
            // News not yet folded all lie below ref_t, so this picks up
            // exactly those in [tau_i, previous reference).
            while j > 0 && zs[j - 1] >= taus[i] {
                q += (-beta_nc * (zs[j - 1] - taus[i])).exp();
                j -= 1;
            }
            ref_t = taus[i];
            p_incl[i] = q;
        }
    }

    // Forward state at the current event: self-excitation accumulators
    // with events <= tau_i folded, causal news sum with z <= tau_i folded.
    let mut endo = ExpSums::new(spec.endo().terms());
    let mut causal = 0.0f64;
    let mut j = zs.partition_point(|&z| z <= taus[0]);
    for &z in &zs[..j] {
        causal += (-beta_c * (taus[0] - z)).exp();
    }
    endo.add_unit();

    let mut out = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let dt = taus[i + 1] - taus[i];
        let mut r = mu * dt + endo.increment_mass(dt);

        if alpha_c != 0.0 {
            let decay = (-beta_c * dt).exp();
            r += alpha_c / beta_c * causal * (1.0 - decay);
            causal *= decay;
        } else {
            causal *= (-beta_c * dt).exp();
        }
        // Announcements inside (tau_i, tau_{i+1}] start contributing at
        // their own instant.
        while j < zs.len() && zs[j] <= taus[i + 1] {
            let tail = (-beta_c * (taus[i + 1] - zs[j])).exp();
            if alpha_c != 0.0 {
                r += alpha_c / beta_c * (1.0 - tail);
            }
            causal += tail;
            j += 1;
        }

        if alpha_nc != 0.0 {
            // News at or beyond the interval end, integrated across the
            // whole interval...
            r += alpha_nc / beta_nc * (1.0 - (-beta_nc * dt).exp()) * p_incl[i + 1];
            // ...plus news strictly inside, integrated up to their own
            // instant.
            let lo = zs.partition_point(|&z| z <= taus[i]);
            let hi = zs.partition_point(|&z| z < taus[i + 1]);
            for &z in &zs[lo..hi] {
                r += alpha_nc / beta_nc * (1.0 - (-beta_nc * (z - taus[i])).exp());
            }
        }

        out.push(r);
        endo.advance(dt);
        endo.add_unit();
    }
    Ok(ResidualSeries { values: out })
}

/// Excess-dispersion statistic and two-sided p-value.
#[derive(Debug, Clone, Copy)]
pub struct DispersionTest {
    pub statistic: f64,
    pub p_value: f64,
    pub n_residuals: usize,
}

/// Variance test for standard-exponential residuals: the statistic
/// `sqrt(N/8) (s^2 - 1)` is asymptotically standard normal because the
/// sampling variance of `s^2` under Exp(1) is `8/N`.
pub fn excess_dispersion_test(residuals: &ResidualSeries) -> Result<DispersionTest> {
    let v = residuals.values();
    let n = v.len();
    if n < 30 {
        return Err(Error::InsufficientData {
            what: "residuals for the dispersion test",
            needed: 30,
            got: n,
        });
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let s2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let statistic = (n as f64 / 8.0).sqrt() * (s2 - 1.0);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p_value = 2.0 * normal.cdf(-statistic.abs());
    Ok(DispersionTest {
        statistic,
        p_value,
        n_residuals: n,
    })
}

/// Quantile-quantile pairs against the standard exponential.
#[derive(Debug, Clone)]
pub struct QqData {
    /// `(theoretical quantile, empirical quantile)`, ascending.
    pub pairs: Vec<(f64, f64)>,
}

impl QqData {
    /// The same pairs with both axes logged, for tail inspection; pairs
    /// with a nonpositive coordinate are dropped.
    pub fn log_pairs(&self) -> Vec<(f64, f64)> {
        self.pairs
            .iter()
            .filter(|(t, e)| *t > 0.0 && *e > 0.0)
            .map(|(t, e)| (t.ln(), e.ln()))
            .collect()
    }
}

/// Sorted residuals paired with standard-exponential plotting positions
/// `-ln(1 - (i - 1/2)/N)`.
pub fn qq_export(residuals: &ResidualSeries) -> Result<QqData> {
    let n = residuals.len();
    if n == 0 {
        return Err(Error::InsufficientData {
            what: "residuals for a quantile plot",
            needed: 1,
            got: 0,
        });
    }
    let mut sorted = residuals.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let pairs = sorted
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let level = (i as f64 + 0.5) / n as f64;
            (-(1.0 - level).ln(), e)
        })
        .collect();
    Ok(QqData { pairs })
}

/// One model's row in a [`SelectionReport`].
#[derive(Debug, Clone)]
pub struct SelectionEntry {
    pub variant: crate::estimation::ModelVariant,
    pub n_params: usize,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub delta_aic: f64,
    pub delta_bic: f64,
    pub relative_likelihood: f64,
}

/// Information-criterion comparison across fits of the same data.
#[derive(Debug, Clone)]
pub struct SelectionReport {
    /// One entry per input fit, in input order.
    pub entries: Vec<SelectionEntry>,
    /// Index of the AIC-best fit.
    pub best: usize,
}

/// Rank fitted models by AIC, with BIC deltas and relative likelihoods
/// `exp(-delta_aic / 2)` alongside.
///
/// Deltas are assembled from the (log-likelihood, parameter count)
/// components against the best fit directly, rather than by subtracting
/// stored AIC values, so two fits with bitwise-equal log-likelihoods and
/// a parameter-count difference of 2 report a delta of exactly 4, with
/// no rounding residue from the large shared term. The pairwise measure
/// is exactly antisymmetric, which keeps the reported deltas independent
/// of the order the fits are passed in. Fits of different data are
/// refused.
pub fn select(fits: &[FitResult]) -> Result<SelectionReport> {
    if fits.len() < 2 {
        return Err(Error::InsufficientData {
            what: "fits to compare",
            needed: 2,
            got: fits.len(),
        });
    }
    for f in &fits[1..] {
        if f.data_fingerprint != fits[0].data_fingerprint {
            return Err(Error::FingerprintMismatch {
                left: fits[0].data_fingerprint.clone(),
                right: f.data_fingerprint.clone(),
            });
        }
    }
    let ln_n = (fits[0].n_events as f64).ln();
    let pair_delta = |i: usize, j: usize| -> f64 {
        2.0 * (fits[i].params.len() as f64 - fits[j].params.len() as f64)
            - 2.0 * (fits[i].loglik - fits[j].loglik)
    };
    let mut best = 0usize;
    for i in 1..fits.len() {
        let d = pair_delta(i, best);
        if d < 0.0 || (d == 0.0 && fits[i].params.len() < fits[best].params.len()) {
            best = i;
        }
    }
    let entries = fits
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let delta_aic = pair_delta(i, best);
            debug_assert!(delta_aic >= 0.0, "best fit dominated after anchoring");
            let delta_bic = (f.params.len() as f64 - fits[best].params.len() as f64) * ln_n
                - 2.0 * (f.loglik - fits[best].loglik);
            SelectionEntry {
                variant: f.variant,
                n_params: f.params.len(),
                loglik: f.loglik,
                aic: f.aic,
                bic: f.bic,
                delta_aic,
                delta_bic,
                relative_likelihood: (-delta_aic / 2.0).exp(),
            }
        })
        .collect();
    Ok(SelectionReport { entries, best })
}

/// Welch's unequal-variance t-test.
#[derive(Debug, Clone, Copy)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom.
pub fn welch_t_test(group_a: &[f64], group_b: &[f64]) -> Result<WelchTest> {
    for (name, g) in [("group_a", group_a), ("group_b", group_b)] {
        if g.len() < 2 {
            return Err(Error::InsufficientData {
                what: if name == "group_a" {
                    "values in group a"
                } else {
                    "values in group b"
                },
                needed: 2,
                got: g.len(),
            });
        }
    }
    let (na, nb) = (group_a.len() as f64, group_b.len() as f64);
    let ma = group_a.iter().sum::<f64>() / na;
    let mb = group_b.iter().sum::<f64>() / nb;
    let va = group_a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / (na - 1.0);
    let vb = group_b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / (nb - 1.0);
    if va == 0.0 && vb == 0.0 {
        if ma == mb {
            // Identical constant groups: no evidence of any difference.
            return Ok(WelchTest {
                t: 0.0,
                df: na + nb - 2.0,
                p_value: 1.0,
            });
        }
        return Err(Error::DegenerateInput {
            what: "both groups have zero variance".to_string(),
        });
    }
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|_| Error::DegenerateInput {
        what: format!("invalid degrees of freedom {df}"),
    })?;
    let p_value = 2.0 * dist.cdf(-t.abs());
    Ok(WelchTest { t, df, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{aic, bic, spec_from_params, ModelVariant};
    use crate::kernels::{
        DoubleExpKernel, EndoKernel, ExoKernel, NonCausalNewsKernel, PowerLawKernel,
    };
    use approx::assert_relative_eq;

    fn fit_stub(
        variant: ModelVariant,
        params: Vec<f64>,
        loglik: f64,
        n_events: usize,
        fingerprint: &str,
    ) -> FitResult {
        let k = params.len();
        let spec = spec_from_params(variant, &params, 15, 5.0).unwrap();
        FitResult {
            variant,
            spec,
            param_names: variant.param_names().to_vec(),
            std_errors: vec![None; k],
            at_boundary: vec![false; k],
            params,
            loglik,
            aic: aic(loglik, k),
            bic: bic(loglik, k, n_events),
            n_events,
            converged: true,
            starts_tried: 1,
            start_logliks: vec![loglik],
            data_fingerprint: fingerprint.to_string(),
        }
    }

    fn poisson_spec(mu: f64) -> HawkesSpec {
        let k = DoubleExpKernel::new(0.0, 1.0, 0.0, 1.0).unwrap();
        HawkesSpec::new(mu, EndoKernel::DoubleExp(k), None).unwrap()
    }

    #[test]
    fn constant_rate_and_constant_spacing_give_unit_residuals() {
        let times: Vec<f64> = (1..=20).map(|i| 0.5 * i as f64).collect();
        let events = EventSeries::new(times, 0.0, 11.0).unwrap();
        let res = residuals(&poisson_spec(2.0), &events, &NewsTimes::empty()).unwrap();
        assert_eq!(res.len(), 19);
        for &r in res.values() {
            assert_eq!(r.to_bits(), 1.0f64.to_bits());
        }
    }

    #[test]
    fn residuals_sum_telescopes_to_the_whole_compensator() {
        // Independent accounting of the integral over [t_1, t_N]: each
        // event's kernel integrated by its own antiderivative, the causal
        // and ramp terms by their closed forms, no interval recursion.
        let endo = PowerLawKernel::new(0.7, 1.3, 0.2).unwrap();
        let exo = NonCausalNewsKernel::new(1.1, 0.02, 0.4, 0.01).unwrap();
        let spec = HawkesSpec::new(
            0.2,
            EndoKernel::PowerLaw(endo),
            Some(ExoKernel::WithAnticipation(exo)),
        )
        .unwrap();
        let times: Vec<f64> = (1..=80).map(|i| (i as f64).powf(1.1)).collect();
        let t_end = 200.0;
        let events = EventSeries::new(times.clone(), 0.0, t_end).unwrap();
        let news = NewsTimes::new(vec![-5.0, 30.0, 55.5, 55.5, 120.0, 500.0]).unwrap();

        let res = residuals(&spec, &events, &news).unwrap();
        let total: f64 = res.values().iter().sum();

        let (a, b) = (times[0], *times.last().unwrap());
        let mut want = spec.mu() * (b - a);
        for &ti in &times {
            if ti < b {
                want += spec.endo().antiderivative_increment(0.0, b - ti).unwrap()
                    - spec
                        .endo()
                        .antiderivative_increment(0.0, (a - ti).max(0.0))
                        .unwrap();
            }
        }
        let exo = spec.exo().unwrap();
        for &z in news.times() {
            want += exo.antiderivative_increment(a - z, b - z).unwrap();
        }
        assert_relative_eq!(total, want, max_relative = 1e-10);
    }

    #[test]
    fn residuals_match_quadrature_of_the_intensity() {
        let endo = DoubleExpKernel::new(0.5, 1.1, 0.1, 0.09).unwrap();
        let exo = NonCausalNewsKernel::new(0.8, 0.05, 0.3, 0.02).unwrap();
        let spec = HawkesSpec::new(
            0.15,
            EndoKernel::DoubleExp(endo),
            Some(ExoKernel::WithAnticipation(exo)),
        )
        .unwrap();
        let times = vec![2.0, 5.0, 5.5, 9.0, 14.0, 30.0, 31.0, 55.0];
        let events = EventSeries::new(times.clone(), 0.0, 60.0).unwrap();
        let news = NewsTimes::new(vec![4.0, 20.0, 58.0]).unwrap();
        let res = residuals(&spec, &events, &news).unwrap();

        // Simpson integration of the pointwise intensity, split at event
        // and news times inside each interval.
        for (i, &r) in res.values().iter().enumerate() {
            let (a, b) = (times[i], times[i + 1]);
            let mut breaks = vec![a];
            for &z in news.times() {
                if z > a && z < b {
                    breaks.push(z);
                }
            }
            breaks.push(b);
            let mut total = 0.0;
            for w in breaks.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let m = 400;
                let h = (hi - lo) / m as f64;
                let f = |t: f64| crate::model::intensity(&spec, &events, &news, t).unwrap();
                let mut s = f(lo + 1e-12) + f(hi - 1e-12);
                for k in 1..m {
                    let t = lo + k as f64 * h;
                    s += f(t) * if k % 2 == 1 { 4.0 } else { 2.0 };
                }
                total += s * h / 3.0;
            }
            assert_relative_eq!(r, total, max_relative = 1e-6);
        }
    }

    #[test]
    fn too_few_events_for_residuals_is_an_error() {
        let events = EventSeries::new(vec![1.0], 0.0, 10.0).unwrap();
        assert!(residuals(&poisson_spec(1.0), &events, &NewsTimes::empty()).is_err());
    }

    #[test]
    fn unit_variance_residuals_score_zero_dispersion() {
        // Alternating 0 and 2 has mean 1; tune one pair to force the
        // unbiased variance to exactly 1.
        let mut v = vec![0.0, 2.0].repeat(20);
        let n = v.len() as f64;
        // variance of the pattern is n/(n-1); shrink around the mean.
        let shrink = ((n - 1.0) / n).sqrt();
        for x in &mut v {
            *x = 1.0 + (*x - 1.0) * shrink;
        }
        let res = ResidualSeries::from_values(v);
        let test = excess_dispersion_test(&res).unwrap();
        assert!(test.statistic.abs() < 1e-12);
        assert!((test.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dispersion_test_requires_thirty_residuals() {
        let res = ResidualSeries::from_values(vec![1.0; 29]);
        assert!(excess_dispersion_test(&res).is_err());
    }

    #[test]
    fn overdispersed_residuals_are_rejected() {
        // Variance 9 on 100 values: statistic sqrt(100/8)*8 = 28 sigma.
        let v: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 4.0 } else { -2.0 }).collect();
        let res = ResidualSeries::from_values(v);
        let test = excess_dispersion_test(&res).unwrap();
        assert!(test.statistic > 10.0);
        assert!(test.p_value < 1e-10);
    }

    #[test]
    fn qq_pairs_recover_the_identity_on_theoretical_quantiles() {
        let n = 1000;
        let values: Vec<f64> = (0..n)
            .map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln())
            .collect();
        let res = ResidualSeries::from_values(values);
        let qq = qq_export(&res).unwrap();
        for (t, e) in &qq.pairs {
            assert_relative_eq!(t, e, max_relative = 1e-12);
        }
        // Monotone in both coordinates.
        for w in qq.pairs.windows(2) {
            assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
        let logs = qq.log_pairs();
        assert_eq!(logs.len(), qq.pairs.len());
    }

    #[test]
    fn residuals_on_a_simulation_from_the_same_model_look_standard_exponential() {
        use crate::simulation::{simulate, SimConfig};
        let endo = DoubleExpKernel::new(0.4, 0.8, 0.0, 1.0).unwrap();
        let exo = NonCausalNewsKernel::new(0.5, 0.05, 0.2, 0.02).unwrap();
        let spec = HawkesSpec::new(
            0.1,
            EndoKernel::DoubleExp(endo),
            Some(ExoKernel::WithAnticipation(exo)),
        )
        .unwrap();
        let zs: Vec<f64> = (0..19).map(|k| 250.0 + 500.0 * k as f64).collect();
        let news = NewsTimes::new(zs).unwrap();
        let config = SimConfig::new(0.0, 10_000.0, 1, 7).with_news(news.clone());
        let series = simulate(&spec, &config).unwrap().remove(0);

        let res = residuals(&spec, &series, &news).unwrap();
        let m = res.len() as f64;
        assert!(m > 1000.0, "simulation too quiet: {m} residuals");
        let mean = res.values().iter().sum::<f64>() / m;
        let var = res
            .values()
            .iter()
            .map(|x| (x - mean).powi(2))
            .sum::<f64>()
            / (m - 1.0);
        // Exp(1) moments: sd(mean) = 1/sqrt(M), sd(s^2) ~ sqrt(8/M).
        assert!((mean - 1.0).abs() < 3.0 / m.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 3.0 * (8.0 / m).sqrt(), "variance {var}");
        let test = excess_dispersion_test(&res).unwrap();
        assert!(test.p_value > 0.003, "dispersion p {}", test.p_value);
    }

    #[test]
    fn equal_loglik_nested_pair_scores_exact_information_deltas() {
        let loglik = -12345.678901234567;
        let base = fit_stub(
            ModelVariant::PowerLaw,
            vec![0.2, 0.5, 0.3, 1.5],
            loglik,
            1000,
            "fp",
        );
        let extended = fit_stub(
            ModelVariant::PowerLawNews,
            vec![0.2, 0.5, 0.3, 1.5, 0.4, 0.02],
            loglik,
            1000,
            "fp",
        );
        let report = select(&[extended, base]).unwrap();
        assert_eq!(report.best, 1);
        let e = &report.entries[0];
        assert_eq!(e.delta_aic.to_bits(), 4.0f64.to_bits());
        assert_eq!(e.delta_bic.to_bits(), (2.0 * (1000.0f64).ln()).to_bits());
        assert_eq!(e.relative_likelihood.to_bits(), (-2.0f64).exp().to_bits());
        let b = &report.entries[1];
        assert_eq!(b.delta_aic.to_bits(), 0.0f64.to_bits());
        assert_eq!(b.relative_likelihood.to_bits(), 1.0f64.to_bits());
    }

    #[test]
    fn a_two_point_aic_gap_gives_relative_likelihood_one_over_e() {
        let a = fit_stub(
            ModelVariant::PowerLaw,
            vec![0.2, 0.5, 0.3, 1.5],
            -100.0,
            500,
            "fp",
        );
        let b = fit_stub(
            ModelVariant::PowerLaw,
            vec![0.25, 0.4, 0.3, 1.5],
            -101.0,
            500,
            "fp",
        );
        let report = select(&[a, b]).unwrap();
        assert_eq!(report.best, 0);
        let worse = &report.entries[1];
        assert_eq!(worse.delta_aic.to_bits(), 2.0f64.to_bits());
        assert_eq!(
            worse.relative_likelihood.to_bits(),
            (-1.0f64).exp().to_bits()
        );
    }

    #[test]
    fn selection_values_do_not_depend_on_input_order() {
        let fits = vec![
            fit_stub(
                ModelVariant::DoubleExp,
                vec![0.2, 0.3, 1.0, 0.1, 0.2],
                -800.25,
                700,
                "fp",
            ),
            fit_stub(
                ModelVariant::PowerLaw,
                vec![0.2, 0.5, 0.3, 1.5],
                -790.5,
                700,
                "fp",
            ),
            fit_stub(
                ModelVariant::PowerLawNews,
                vec![0.2, 0.5, 0.3, 1.5, 0.4, 0.02],
                -788.0,
                700,
                "fp",
            ),
        ];
        let forward = select(&fits).unwrap();
        let reversed: Vec<FitResult> = fits.iter().rev().cloned().collect();
        let backward = select(&reversed).unwrap();
        assert_eq!(
            forward.entries[forward.best].variant,
            backward.entries[backward.best].variant
        );
        for e in &forward.entries {
            let twin = backward
                .entries
                .iter()
                .find(|x| x.variant == e.variant)
                .unwrap();
            assert_eq!(e.delta_aic.to_bits(), twin.delta_aic.to_bits());
            assert_eq!(e.delta_bic.to_bits(), twin.delta_bic.to_bits());
            assert_eq!(
                e.relative_likelihood.to_bits(),
                twin.relative_likelihood.to_bits()
            );
        }
        assert_eq!(forward.entries[forward.best].delta_aic, 0.0);
        assert_eq!(forward.entries[forward.best].relative_likelihood, 1.0);
        for e in &forward.entries {
            assert!(e.relative_likelihood > 0.0 && e.relative_likelihood <= 1.0);
        }
    }

    #[test]
    fn selection_refuses_fits_of_different_data() {
        let a = fit_stub(
            ModelVariant::PowerLaw,
            vec![0.2, 0.5, 0.3, 1.5],
            -100.0,
            500,
            "fp-a",
        );
        let b = fit_stub(
            ModelVariant::DoubleExp,
            vec![0.2, 0.3, 1.0, 0.1, 0.2],
            -99.0,
            500,
            "fp-b",
        );
        let err = select(&[a, b]).unwrap_err();
        assert!(matches!(err, Error::FingerprintMismatch { .. }));
    }

    #[test]
    fn selection_needs_at_least_two_fits() {
        let a = fit_stub(
            ModelVariant::PowerLaw,
            vec![0.2, 0.5, 0.3, 1.5],
            -100.0,
            500,
            "fp",
        );
        assert!(matches!(
            select(&[a]).unwrap_err(),
            Error::InsufficientData { .. }
        ));
    }

    #[test]
    fn welch_test_matches_reference_values() {
        // Frozen against an independent statistics library.
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 4.0, 6.0, 8.0, 10.0];
        let w = welch_t_test(&a, &b).unwrap();
        assert_relative_eq!(w.t, -1.897366596101, max_relative = 1e-9);
        assert_relative_eq!(w.df, 5.882352941176, max_relative = 1e-9);
        assert_relative_eq!(w.p_value, 0.107531194931, max_relative = 1e-8);

        let a2 = [0.9, 1.1, 1.0, 0.95, 1.05, 1.02];
        let b2 = [1.4, 1.5, 1.3];
        let w2 = welch_t_test(&a2, &b2).unwrap();
        assert_relative_eq!(w2.t, -6.136956415240, max_relative = 1e-9);
        assert_relative_eq!(w2.df, 3.063056817000, max_relative = 1e-9);
        assert_relative_eq!(w2.p_value, 0.008187870246, max_relative = 1e-8);
    }

    #[test]
    fn welch_identical_groups_with_spread_give_p_one() {
        let a = [1.0, 2.0, 3.0];
        let w = welch_t_test(&a, &a).unwrap();
        assert_eq!(w.t, 0.0);
        assert!((w.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn welch_separated_constant_groups_degenerate_or_reject() {
        // Zero variance everywhere with different means is refused.
        let err = welch_t_test(&[0.0; 4], &[1.0; 4]).unwrap_err();
        assert!(matches!(err, Error::DegenerateInput { .. }));
        // A whisper of jitter makes the separation overwhelming instead.
        let a = [0.0, 1e-9, 0.0, -1e-9];
        let b = [1.0, 1.0 + 1e-9, 1.0, 1.0 - 1e-9];
        let w = welch_t_test(&a, &b).unwrap();
        assert!(w.p_value < 1e-3);
    }
}

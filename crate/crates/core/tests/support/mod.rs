//! Shared helpers for the integration suites: an adaptive quadrature
//! routine used as an independent oracle for kernel masses and
//! compensators, and Kolmogorov-Smirnov tests for distributional checks.

#![allow(dead_code)]

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute
/// tolerance `eps`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, eps / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, eps / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, fa, b, fb, m, fm, whole, eps, 48)
}

/// Integrate `f` over `[0, hi]` piecewise between the given breakpoints;
/// robust for integrands with widely separated timescales.
pub fn piecewise_simpson(f: &dyn Fn(f64) -> f64, breakpoints: &[f64], eps_total: f64) -> f64 {
    let eps_seg = eps_total / breakpoints.len().max(1) as f64;
    let mut total = 0.0;
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            total += adaptive_simpson(f, w[0], w[1], eps_seg);
        }
    }
    total
}

/// Asymptotic Kolmogorov survival function `P(D > lambda)`.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of `sample` against the CDF `cdf`. Returns
/// (statistic, asymptotic p-value with the Stephens small-sample
/// correction).
pub fn ks_test_cdf(sample: &[f64], cdf: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut xs: Vec<f64> = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        let hi = (i as f64 + 1.0) / n - c;
        let lo = c - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    let p = kolmogorov_survival(d * (n.sqrt() + 0.12 + 0.11 / n.sqrt()));
    (d, p)
}

/// One-sample KS test against the exponential distribution with the given
/// rate.
pub fn ks_test_exponential(sample: &[f64], rate: f64) -> (f64, f64) {
    ks_test_cdf(sample, &|x: f64| 1.0 - (-rate * x).exp())
}

/// One-sample KS test against the uniform distribution on `[lo, hi]`.
pub fn ks_test_uniform(sample: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    ks_test_cdf(sample, &|x: f64| ((x - lo) / (hi - lo)).clamp(0.0, 1.0))
}

/// Two-sample KS test; asymptotic p-value.
pub fn ks_test_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs: Vec<f64> = a.to_vec();
    let mut ys: Vec<f64> = b.to_vec();
    xs.sort_by(|u, v| u.partial_cmp(v).unwrap());
    ys.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = xs[i];
        let y = ys[j];
        let v = x.min(y);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }
    let n_eff = (n as f64 * m as f64) / (n as f64 + m as f64);
    let p = kolmogorov_survival(d * n_eff.sqrt());
    (d, p)
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

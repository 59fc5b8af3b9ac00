//! Shared fixtures for the criterion benches: model specifications and
//! simulated event streams of controlled size.

use newshawk_core::kernels::{
    DoubleExpKernel, EndoKernel, ExoKernel, NewsExpKernel, NonCausalNewsKernel, PowerLawKernel,
};
use newshawk_core::model::{EventSeries, HawkesSpec, NewsTimes};
use newshawk_core::simulation::{simulate, SimConfig};

/// Double-exponential endogenous cascade with a causal announcement
/// response, branching ratio 0.55.
pub fn de_news_spec() -> HawkesSpec {
    let endo = EndoKernel::DoubleExp(DoubleExpKernel::new(0.45, 1.0, 0.005, 0.05).unwrap());
    let exo = ExoKernel::Causal(NewsExpKernel::new(2.0, 0.01).unwrap());
    HawkesSpec::new(0.08, endo, Some(exo)).unwrap()
}

/// Power-law endogenous cascade with both announcement branches.
pub fn pl_news_spec() -> HawkesSpec {
    let endo = EndoKernel::PowerLaw(PowerLawKernel::new(0.55, 1.3, 0.02).unwrap());
    let exo = ExoKernel::WithAnticipation(
        NonCausalNewsKernel::new(2.0, 0.01, 0.1, 0.003).unwrap(),
    );
    HawkesSpec::new(0.08, endo, Some(exo)).unwrap()
}

/// One simulated stream from `spec`, grown until it holds at least
/// `n_events` arrivals, then truncated to exactly that many. Keeps the
/// announcement grid that produced it.
pub fn stream_of_size(spec: &HawkesSpec, n_events: usize, seed: u64) -> (EventSeries, NewsTimes) {
    let mut horizon = n_events as f64 / 0.2;
    loop {
        let news: Vec<f64> = (0..)
            .map(|k| 1800.0 + 3600.0 * k as f64)
            .take_while(|&z| z < horizon)
            .collect();
        let news = NewsTimes::new(news).unwrap();
        let config = SimConfig {
            news: news.clone(),
            ..SimConfig::new(0.0, horizon, 1, seed)
        };
        let series = simulate(spec, &config).unwrap().pop().unwrap();
        if series.times().len() >= n_events {
            let times: Vec<f64> = series.times()[..n_events].to_vec();
            let t_end = times.last().copied().unwrap() + 1.0;
            let series = EventSeries::new(times, 0.0, t_end).unwrap();
            return (series, news);
        }
        horizon *= 2.0;
    }
}

//! Data preparation and announcement analytics.
//!
//! This module turns raw inputs (timestamped market events and an
//! economic calendar) into the structures the models consume: dithered
//! event times, per-minute activity ratios, announcement surprises,
//! and isolated announcement windows. Parsers for both text formats
//! live here too, so the binary stays a thin orchestration layer.

use crate::model::EventSeries;
use crate::{Error, Result};
use chrono::{DateTime, Datelike, NaiveDateTime, NaiveTime, TimeZone, Utc, Weekday};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::fmt;
use std::str::FromStr;

/// Half-width of an isolated announcement window, seconds.
pub const DEFAULT_HALF_WIDTH: f64 = 5400.0;

/// Trailing minutes in the activity-ratio moving average. The length is
/// a configuration choice of this implementation, not an empirically
/// sanctioned constant; report it next to any ratios it produced.
pub const DEFAULT_SMA_WINDOW: usize = 100;

/// Calendar importance grade, ordered `Low < Medium < High`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Importance {
    Low,
    Medium,
    High,
}

impl FromStr for Importance {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(Importance::Low),
            "medium" => Ok(Importance::Medium),
            "high" => Ok(Importance::High),
            other => Err(format!(
                "unknown importance '{other}' (expected low, medium or high)"
            )),
        }
    }
}

impl fmt::Display for Importance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Importance::Low => "low",
            Importance::Medium => "medium",
            Importance::High => "high",
        })
    }
}

/// One calendar announcement.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsRecord {
    pub timestamp: DateTime<Utc>,
    pub currency: String,
    pub importance: Importance,
    pub description: String,
    /// Consensus forecast; absent values leave the surprise undefined.
    pub forecast: Option<f64>,
    /// Released value; absent values leave the surprise undefined.
    pub actual: Option<f64>,
    /// Indicators quoted in percent use the absolute surprise as their
    /// combined value, because a relative surprise of a percentage is
    /// not meaningful.
    pub is_percentage: bool,
}

/// Deviation of a release from its forecast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurpriseValue {
    /// `|actual - forecast|`, in the indicator's own units.
    pub s_abs: f64,
    /// `100 |actual - forecast| / |forecast|`; undefined at zero
    /// forecast.
    pub s_rel: Option<f64>,
    /// The headline number: absolute for percentage indicators,
    /// relative otherwise.
    pub s_combined: Option<f64>,
}

/// Surprise of one record, or `None` when forecast or actual is missing
/// (the record itself stays in the calendar, it just cannot enter
/// surprise statistics).
pub fn surprise(record: &NewsRecord) -> Option<SurpriseValue> {
    let (f, a) = (record.forecast?, record.actual?);
    let s_abs = (a - f).abs();
    let s_rel = if f == 0.0 {
        None
    } else {
        Some(100.0 * s_abs / f.abs())
    };
    let s_combined = if record.is_percentage { Some(s_abs) } else { s_rel };
    Some(SurpriseValue {
        s_abs,
        s_rel,
        s_combined,
    })
}

/// Break timestamp quantization by subtracting an amount uniform on
/// `(0, 0.1]` seconds from every stamp, then re-sorting.
///
/// Recorded event times arrive at 100 ms resolution, which piles many
/// events onto identical instants; the models need strictly increasing
/// times. Each output lies in `[raw - 0.1, raw)`, so stamps that
/// differed by at least one resolution step keep their order. Exact
/// collisions after the jitter (possible only between equal stamps) are
/// resolved by redrawing. Deterministic per seed.
pub fn randomize_times(raw: &[f64], seed: u64) -> Result<EventSeries> {
    for (i, w) in raw.windows(2).enumerate() {
        if !(w[1] >= w[0]) {
            return Err(Error::InvalidEvents {
                index: i + 1,
                reason: "raw stamps must be non-decreasing",
            });
        }
    }
    if let Some(i) = raw.iter().position(|t| !t.is_finite()) {
        return Err(Error::InvalidEvents {
            index: i,
            reason: "raw stamps must be finite",
        });
    }
    if raw.is_empty() {
        // Placeholder window of one resolution step; there is nothing to
        // anchor a real window to.
        return EventSeries::new(Vec::new(), 0.0, 0.1);
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // (0, 0.1]: flip the half-open unit draw so zero is excluded.
    let mut draw = |r: f64| r - 0.1 * (1.0 - rng.gen::<f64>());
    let mut jittered: Vec<(f64, f64)> = raw.iter().map(|&r| (draw(r), r)).collect();
    loop {
        jittered.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut clean = true;
        for i in 1..jittered.len() {
            if jittered[i].0 == jittered[i - 1].0 {
                jittered[i].0 = draw(jittered[i].1);
                clean = false;
            }
        }
        if clean {
            break;
        }
    }
    let t_start = raw[0] - 0.1;
    let t_end = *raw.last().expect("non-empty");
    EventSeries::new(jittered.into_iter().map(|(t, _)| t).collect(), t_start, t_end)
}

/// Per-minute activity relative to its own recent history.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactRow {
    /// Minute index from the start of the observation window.
    pub minute: usize,
    /// Events counted in this minute.
    pub n: u64,
    /// Mean count over the `window_n` prior minutes; `None` until that
    /// much history exists. The current minute never enters its own
    /// average.
    pub sma: Option<f64>,
    /// `n / sma`; `None` when the average is missing or zero.
    pub theta: Option<f64>,
}

/// Activity ratios for every minute of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactSeries {
    pub window_n: usize,
    pub rows: Vec<ImpactRow>,
}

/// Compute the activity ratio for every minute of the series.
///
/// Minutes tile `[t_start, t_end)` in 60 s steps; a final partial
/// minute keeps whatever events fall in it (and an event exactly at
/// `t_end` counts into it).
pub fn impact_series(events: &EventSeries, window_n: usize) -> Result<ImpactSeries> {
    if window_n == 0 {
        return Err(Error::InvalidParameter {
            name: "window_n",
            value: 0.0,
            constraint: "at least one prior minute",
        });
    }
    let t0 = events.t_start();
    let duration = events.t_end() - t0;
    let n_minutes = (duration / 60.0).ceil() as usize;
    if n_minutes == 0 {
        return Err(Error::InsufficientData {
            what: "minutes in the observation window",
            needed: 1,
            got: 0,
        });
    }
    let mut counts = vec![0u64; n_minutes];
    for &t in events.times() {
        let b = (((t - t0) / 60.0) as usize).min(n_minutes - 1);
        counts[b] += 1;
    }
    let mut rows = Vec::with_capacity(n_minutes);
    let mut trailing: u64 = 0;
    for (i, &n) in counts.iter().enumerate() {
        let sma = if i >= window_n {
            Some(trailing as f64 / window_n as f64)
        } else {
            None
        };
        let theta = match sma {
            Some(s) if s > 0.0 => Some(n as f64 / s),
            _ => None,
        };
        rows.push(ImpactRow {
            minute: i,
            n,
            sma,
            theta,
        });
        trailing += n;
        if i >= window_n {
            trailing -= counts[i - window_n];
        }
    }
    Ok(ImpactSeries { window_n, rows })
}

/// Activity ratio of one minute: its event count over the trailing
/// average. `Ok(None)` marks an undefined ratio (not enough history, or
/// a zero average).
pub fn impact(events: &EventSeries, minute_index: usize, window_n: usize) -> Result<Option<f64>> {
    let series = impact_series(events, window_n)?;
    match series.rows.get(minute_index) {
        Some(row) => Ok(row.theta),
        None => Err(Error::InsufficientData {
            what: "minutes before the requested index",
            needed: minute_index + 1,
            got: series.rows.len(),
        }),
    }
}

/// Daily trading session in UTC wall-clock time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Session {
    pub open: NaiveTime,
    pub close: NaiveTime,
}

impl Session {
    pub fn new(open: NaiveTime, close: NaiveTime) -> Result<Self> {
        if open >= close {
            return Err(Error::DegenerateInput {
                what: format!("session open {open} is not before close {close}"),
            });
        }
        Ok(Self { open, close })
    }
}

/// Core 07:30-16:30 UTC trading hours.
impl Default for Session {
    fn default() -> Self {
        Self {
            open: NaiveTime::from_hms_opt(7, 30, 0).expect("valid time"),
            close: NaiveTime::from_hms_opt(16, 30, 0).expect("valid time"),
        }
    }
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            &mut *f,
            "{}-{}",
            self.open.format("%H:%M"),
            self.close.format("%H:%M")
        )
    }
}

impl FromStr for Session {
    type Err = String;

    /// Parse `"HH:MM-HH:MM"` (seconds optional).
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| format!("expected HH:MM-HH:MM, got '{s}'"))?;
        let parse = |part: &str| {
            NaiveTime::parse_from_str(part.trim(), "%H:%M:%S")
                .or_else(|_| NaiveTime::parse_from_str(part.trim(), "%H:%M"))
                .map_err(|_| format!("unrecognized time '{part}'"))
        };
        Session::new(parse(a)?, parse(b)?).map_err(|e| e.to_string())
    }
}

/// An announcement with a clear window around it.
#[derive(Debug, Clone, PartialEq)]
pub struct IsolatedWindow {
    pub record: NewsRecord,
    /// Window start, `half_width` seconds before the announcement.
    pub start: DateTime<Utc>,
    /// Window end, `half_width` seconds after the announcement.
    pub end: DateTime<Utc>,
}

/// Select announcements whose surrounding window contains no other
/// announcement and fits inside one trading session.
///
/// The calendar is first narrowed to medium and high importance and to
/// one record per distinct instant (highest importance wins, then the
/// lexicographically smallest description). A survivor qualifies when
/// no other surviving instant lies within `half_width` seconds (closed
/// comparison at millisecond resolution), its whole window sits inside
/// that day's session, and the day is a weekday. Low-importance records
/// neither qualify nor disqualify anyone.
pub fn isolated_windows(
    calendar: &[NewsRecord],
    session: &Session,
    half_width: f64,
) -> Result<Vec<IsolatedWindow>> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "half_width",
            value: half_width,
            constraint: "a positive number of seconds",
        });
    }
    let half = chrono::Duration::milliseconds((half_width * 1000.0).round() as i64);

    let mut kept: Vec<&NewsRecord> = calendar
        .iter()
        .filter(|r| r.importance >= Importance::Medium)
        .collect();
    kept.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then(b.importance.cmp(&a.importance))
            .then(a.description.cmp(&b.description))
    });
    kept.dedup_by(|later, first| later.timestamp == first.timestamp);

    let mut out = Vec::new();
    for (i, r) in kept.iter().enumerate() {
        let z = r.timestamp;
        if i > 0 && z - kept[i - 1].timestamp <= half {
            continue;
        }
        if i + 1 < kept.len() && kept[i + 1].timestamp - z <= half {
            continue;
        }
        if matches!(z.weekday(), Weekday::Sat | Weekday::Sun) {
            continue;
        }
        let day = z.date_naive();
        let open = Utc.from_utc_datetime(&day.and_time(session.open));
        let close = Utc.from_utc_datetime(&day.and_time(session.close));
        let (start, end) = (z - half, z + half);
        if start < open || end > close {
            continue;
        }
        out.push(IsolatedWindow {
            record: (*r).clone(),
            start,
            end,
        });
    }
    Ok(out)
}

/// One surprise bin of the exceedance curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveBin {
    /// Pairs whose surprise fell in this bin.
    pub count: usize,
    /// Among them, how many had a ratio above one.
    pub exceeded: usize,
    /// `exceeded / count`; `None` for an empty bin.
    pub probability: Option<f64>,
}

/// Empirical probability of an activity jump conditional on surprise.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityCurve {
    /// Bin edges, ascending; bin `k` covers `[edges[k], edges[k+1])`,
    /// with the last bin closed on the right.
    pub edges: Vec<f64>,
    pub bins: Vec<CurveBin>,
}

/// Bin paired `(theta, surprise)` observations by surprise and report
/// the share of each bin with `theta > 1`.
pub fn conditional_activity_curve(
    thetas: &[f64],
    surprises: &[f64],
    edges: &[f64],
) -> Result<ActivityCurve> {
    if thetas.len() != surprises.len() {
        return Err(Error::DegenerateInput {
            what: format!(
                "paired observations required: {} ratios vs {} surprises",
                thetas.len(),
                surprises.len()
            ),
        });
    }
    if edges.len() < 2 {
        return Err(Error::InsufficientData {
            what: "bin edges",
            needed: 2,
            got: edges.len(),
        });
    }
    for w in edges.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::DegenerateInput {
                what: format!("bin edges must increase strictly: {} then {}", w[0], w[1]),
            });
        }
    }
    for (name, vals) in [("theta", thetas), ("surprise", surprises)] {
        if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: if name == "theta" { "theta" } else { "surprise" },
                value: *v,
                constraint: "finite values",
            });
        }
    }
    let n_bins = edges.len() - 1;
    let mut count = vec![0usize; n_bins];
    let mut exceeded = vec![0usize; n_bins];
    for (&th, &s) in thetas.iter().zip(surprises) {
        if s < edges[0] || s > edges[n_bins] {
            continue;
        }
        let b = edges[1..n_bins].partition_point(|&e| e <= s);
        count[b] += 1;
        if th > 1.0 {
            exceeded[b] += 1;
        }
    }
    let bins = count
        .into_iter()
        .zip(exceeded)
        .map(|(c, e)| CurveBin {
            count: c,
            exceeded: e,
            probability: (c > 0).then(|| e as f64 / c as f64),
        })
        .collect();
    Ok(ActivityCurve {
        edges: edges.to_vec(),
        bins,
    })
}

/// Signed seconds from `epoch` to `t`, at millisecond resolution.
pub fn seconds_since(epoch: DateTime<Utc>, t: DateTime<Utc>) -> f64 {
    (t - epoch).num_milliseconds() as f64 / 1000.0
}

fn parse_timestamp(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(naive.and_utc());
        }
    }
    Err(format!(
        "unrecognized timestamp '{s}' (expected an ISO-8601 UTC instant)"
    ))
}

/// Parse an event-time file: one ISO-8601 UTC timestamp per line, with
/// an optional `timestamp` header. Blank lines are skipped; anything
/// else unparseable is an error naming its line.
pub fn parse_event_times(text: &str) -> Result<Vec<DateTime<Utc>>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let s = line.trim();
        if s.is_empty() {
            continue;
        }
        if idx == 0 && s.eq_ignore_ascii_case("timestamp") {
            continue;
        }
        match parse_timestamp(s) {
            Ok(t) => out.push(t),
            Err(message) => return Err(Error::Parse {
                line: idx + 1,
                message,
            }),
        }
    }
    Ok(out)
}

/// Parse a calendar file with columns `timestamp, currency, importance,
/// description, forecast, actual, is_percentage` (any order, comma or
/// tab separated, header required). Empty forecast or actual cells are
/// allowed and leave the surprise undefined.
pub fn parse_calendar(text: &str) -> Result<Vec<NewsRecord>> {
    let delimiter = if text.lines().next().is_some_and(|l| l.contains('\t')) {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column '{name}'"),
            })
    };
    let c_time = col("timestamp")?;
    let c_currency = col("currency")?;
    let c_importance = col("importance")?;
    let c_description = col("description")?;
    let c_forecast = col("forecast")?;
    let c_actual = col("actual")?;
    let c_pct = col("is_percentage")?;

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0);
            Error::Parse {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(0);
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing field {i}"),
            })
        };
        let number = |i: usize, name: &str| -> Result<Option<f64>> {
            let s = field(i)?;
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                line,
                message: format!("bad number '{s}' in column {name}"),
            })
        };
        let timestamp = parse_timestamp(field(c_time)?).map_err(|message| Error::Parse {
            line,
            message,
        })?;
        let importance: Importance = field(c_importance)?
            .parse()
            .map_err(|message| Error::Parse { line, message })?;
        let is_percentage = match field(c_pct)?.to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" | "" => false,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("bad flag '{other}' in column is_percentage"),
                })
            }
        };
        out.push(NewsRecord {
            timestamp,
            currency: field(c_currency)?.to_string(),
            importance,
            description: field(c_description)?.to_string(),
            forecast: number(c_forecast, "forecast")?,
            actual: number(c_actual, "actual")?,
            is_percentage,
        });
    }
    Ok(out)
}

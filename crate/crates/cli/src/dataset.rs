//! Prepared dataset directories: what `ingest` writes, everything else
//! reads.
//!
//! Layout:
//!
//! ```text
//! dataset/
//!   manifest.tsv        run identity
//!   days.tsv            one row per trading day with events
//!   events.tsv          (date, rel_s) event times, seconds since open
//!   calendar.tsv        medium/high announcements with surprise columns
//!   windows.tsv         isolated announcement windows with theta and S
//!   impact.tsv          per-day minute counts, moving average, theta
//!   window_events/      (rel_s) per window, announcement at half-width
//! ```
//!
//! Analysis units are named by the `unit` column of `fits.tsv`: a day is
//! its date (`2023-01-02`), a window is its id (`w0003`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, TimeZone, Utc};

use newshawk_core::model::{EventSeries, NewsTimes};
use newshawk_core::newsflow::{seconds_since, Session};

use crate::error::CliError;
use crate::tsv::{manifest_hash_of, parse_f64, parse_opt_f64, Table};

pub const DAYS_FILE: &str = "days.tsv";
pub const EVENTS_FILE: &str = "events.tsv";
pub const CALENDAR_FILE: &str = "calendar.tsv";
pub const WINDOWS_FILE: &str = "windows.tsv";
pub const IMPACT_FILE: &str = "impact.tsv";
pub const WINDOW_DIR: &str = "window_events";

pub fn format_utc(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string()
}

pub fn parse_utc(s: &str, context: &str) -> Result<DateTime<Utc>, CliError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| CliError::input(format!("{context}: bad timestamp {s:?}: {e}")))
}

/// One analysis unit ready for fitting: events over a window, the
/// announcement times that bear on it, and the window's impact metadata.
pub struct Unit {
    pub id: String,
    pub events: EventSeries,
    pub news: NewsTimes,
    pub theta: Option<f64>,
    pub s_combined: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct WindowInfo {
    pub id: String,
    pub theta: Option<f64>,
    pub s_combined: Option<f64>,
}

pub struct Dataset {
    dir: PathBuf,
    pub manifest_hash: String,
    pub session: Session,
    pub days: Vec<String>,
    day_events: BTreeMap<String, Vec<f64>>,
    pub windows: Vec<WindowInfo>,
    calendar_times: Vec<DateTime<Utc>>,
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Dataset, CliError> {
        let manifest_hash = manifest_hash_of(dir)?;

        let days_path = dir.join(DAYS_FILE);
        let days_table = Table::read(&days_path)?;
        let session: Session = days_table
            .require_meta("session", &days_path)?
            .parse()
            .map_err(CliError::input)?;
        let date_col = days_table.column("date", &days_path)?;
        let days: Vec<String> = days_table
            .rows
            .iter()
            .map(|r| r[date_col].clone())
            .collect();

        let events_path = dir.join(EVENTS_FILE);
        let events_table = Table::read(&events_path)?;
        let ev_date = events_table.column("date", &events_path)?;
        let ev_rel = events_table.column("rel_s", &events_path)?;
        let mut day_events: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for row in &events_table.rows {
            let rel = parse_f64(&row[ev_rel], "events.tsv rel_s")?;
            day_events.entry(row[ev_date].clone()).or_default().push(rel);
        }

        let windows_path = dir.join(WINDOWS_FILE);
        let windows_table = Table::read(&windows_path)?;
        let w_id = windows_table.column("window", &windows_path)?;
        let w_theta = windows_table.column("theta", &windows_path)?;
        let w_s = windows_table.column("s_combined", &windows_path)?;
        let windows = windows_table
            .rows
            .iter()
            .map(|row| -> Result<WindowInfo, CliError> {
                Ok(WindowInfo {
                    id: row[w_id].clone(),
                    theta: parse_opt_f64(&row[w_theta], "windows.tsv theta")?,
                    s_combined: parse_opt_f64(&row[w_s], "windows.tsv s_combined")?,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let calendar_path = dir.join(CALENDAR_FILE);
        let calendar_table = Table::read(&calendar_path)?;
        let c_ts = calendar_table.column("timestamp", &calendar_path)?;
        let calendar_times = calendar_table
            .rows
            .iter()
            .map(|row| parse_utc(&row[c_ts], "calendar.tsv"))
            .collect::<Result<Vec<_>, _>>()?;

        Ok(Dataset {
            dir: dir.to_path_buf(),
            manifest_hash,
            session,
            days,
            day_events,
            windows,
            calendar_times,
        })
    }

    pub fn unit_ids(&self, scope: crate::settings::Scope) -> Vec<String> {
        match scope {
            crate::settings::Scope::PerDay => self.days.clone(),
            crate::settings::Scope::PerWindow => {
                self.windows.iter().map(|w| w.id.clone()).collect()
            }
        }
    }

    pub fn unit(&self, id: &str) -> Result<Unit, CliError> {
        if self.day_events.contains_key(id) {
            return self.day_unit(id);
        }
        if self.windows.iter().any(|w| w.id == id) {
            return self.window_unit(id);
        }
        Err(CliError::input(format!(
            "unknown unit {id:?}; expected a date from days.tsv or a window id"
        )))
    }

    /// A trading day: events relative to the session open, announcements
    /// from the same calendar day. Announcements outside the session are
    /// kept; the causal kernel of a pre-open release still reaches into
    /// the observed window.
    fn day_unit(&self, id: &str) -> Result<Unit, CliError> {
        let date = NaiveDate::parse_from_str(id, "%Y-%m-%d")
            .map_err(|e| CliError::input(format!("unit {id:?}: {e}")))?;
        let open = Utc.from_utc_datetime(&date.and_time(self.session.open));
        let close = Utc.from_utc_datetime(&date.and_time(self.session.close));
        let duration = seconds_since(open, close);
        let times = self.day_events[id].clone();
        let news: Vec<f64> = self
            .calendar_times
            .iter()
            .filter(|t| t.date_naive() == date)
            .map(|&t| seconds_since(open, t))
            .collect();
        Ok(Unit {
            id: id.to_string(),
            events: EventSeries::new(times, 0.0, duration)?,
            news: NewsTimes::new(news)?,
            theta: None,
            s_combined: None,
        })
    }

    /// An isolated announcement window: the announcement sits at
    /// `half_width` inside a window of twice that length.
    fn window_unit(&self, id: &str) -> Result<Unit, CliError> {
        let info = self
            .windows
            .iter()
            .find(|w| w.id == id)
            .expect("caller checked membership");
        let path = self.dir.join(WINDOW_DIR).join(format!("{id}.tsv"));
        let table = Table::read(&path)?;
        let news_rel = parse_f64(
            table.require_meta("news-rel", &path)?,
            "window news-rel",
        )?;
        let duration = parse_f64(table.require_meta("duration", &path)?, "window duration")?;
        let rel = table.column("rel_s", &path)?;
        let times = table
            .rows
            .iter()
            .map(|row| parse_f64(&row[rel], "window rel_s"))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Unit {
            id: id.to_string(),
            events: EventSeries::new(times, 0.0, duration)?,
            news: NewsTimes::new(vec![news_rel])?,
            theta: info.theta,
            s_combined: info.s_combined,
        })
    }
}

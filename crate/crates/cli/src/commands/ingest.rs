//! `newshawk ingest`: turn a raw event-time file and an announcement
//! calendar into a prepared dataset directory.
//!
//! Event stamps are de-quantized with a seeded uniform offset into the
//! 0.1 s before each stamp, split into trading days, and sliced into
//! isolated announcement windows. Per-minute impact series and per-record
//! surprise values are computed once here so later stages only read them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Utc, Weekday};

use newshawk_core::newsflow::{
    impact_series, isolated_windows, parse_calendar, parse_event_times, randomize_times,
    seconds_since, surprise, Importance, NewsRecord,
};
use newshawk_core::model::EventSeries;

use crate::dataset::{
    format_utc, CALENDAR_FILE, DAYS_FILE, EVENTS_FILE, IMPACT_FILE, WINDOWS_FILE, WINDOW_DIR,
};
use crate::error::CliError;
use crate::settings::Settings;
use crate::tsv::{fmt_f64, fmt_opt, sha256_hex, Manifest, Table};

pub fn run(
    settings: &Settings,
    events_path: &Path,
    calendar_path: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let events_text = read(events_path)?;
    let calendar_text = read(calendar_path)?;

    let stamps = parse_event_times(&events_text)
        .map_err(|e| CliError::input(format!("{}: {e}", events_path.display())))?;
    if stamps.is_empty() {
        return Err(CliError::input(format!(
            "{}: no events",
            events_path.display()
        )));
    }
    let records = parse_calendar(&calendar_text)
        .map_err(|e| CliError::input(format!("{}: {e}", calendar_path.display())))?;

    // All times become seconds since midnight of the first event's day.
    let epoch = Utc.from_utc_datetime(&stamps[0].date_naive().and_time(Default::default()));
    let raw: Vec<f64> = stamps.iter().map(|&t| seconds_since(epoch, t)).collect();
    let jittered = randomize_times(&raw, settings.seed)?;
    let times = jittered.times();

    fs::create_dir_all(out.join(WINDOW_DIR))
        .map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;

    let manifest = Manifest::new("ingest", settings.seed)
        .config("session", settings.session.to_string())
        .config("half-width", fmt_f64(settings.half_width))
        .config("sma-window", settings.sma_window.to_string())
        .input("events", sha256_hex(events_text.as_bytes()))
        .input("calendar", sha256_hex(calendar_text.as_bytes()));
    let hash = manifest.write(out)?;

    // Calendar, narrowed to the importances the model uses, with
    // surprise columns. Sorted like the window builder sorts so the two
    // views agree on order.
    let mut filtered: Vec<&NewsRecord> = records
        .iter()
        .filter(|r| r.importance >= Importance::Medium)
        .collect();
    filtered.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then(b.importance.cmp(&a.importance))
            .then(a.description.cmp(&b.description))
    });
    let mut calendar_table = Table::new(
        "calendar",
        &hash,
        &[
            "timestamp",
            "currency",
            "importance",
            "description",
            "forecast",
            "actual",
            "is_percentage",
            "s_abs",
            "s_rel",
            "s_combined",
        ],
    );
    for r in &filtered {
        let s = surprise(r);
        calendar_table.rows.push(vec![
            format_utc(r.timestamp),
            clean(&r.currency),
            r.importance.to_string(),
            clean(&r.description),
            fmt_opt(r.forecast),
            fmt_opt(r.actual),
            r.is_percentage.to_string(),
            s.as_ref().map(|v| fmt_f64(v.s_abs)).unwrap_or_default(),
            s.as_ref().map(|v| fmt_opt(v.s_rel)).unwrap_or_default(),
            s.as_ref()
                .map(|v| fmt_opt(v.s_combined))
                .unwrap_or_default(),
        ]);
    }
    calendar_table.write(&out.join(CALENDAR_FILE))?;

    // Trading days: weekdays with at least one in-session event.
    let mut days_table = Table::new("days", &hash, &["date", "n_events", "n_news"]);
    days_table.push_meta("session", settings.session.to_string());
    let mut events_table = Table::new("events", &hash, &["date", "rel_s"]);
    let mut impact_table = Table::new("impact", &hash, &["date", "minute", "n", "sma", "theta"]);
    impact_table.push_meta("sma-window", settings.sma_window.to_string());
    let mut impacts: BTreeMap<NaiveDate, newshawk_core::newsflow::ImpactSeries> = BTreeMap::new();
    let mut opens: BTreeMap<NaiveDate, f64> = BTreeMap::new();

    let first_day = date_at(epoch, times[0]);
    let last_day = date_at(epoch, *times.last().unwrap());
    let mut day = first_day;
    while day <= last_day {
        if matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            day = day.succ_opt().expect("date range");
            continue;
        }
        let open = Utc.from_utc_datetime(&day.and_time(settings.session.open));
        let close = Utc.from_utc_datetime(&day.and_time(settings.session.close));
        let open_s = seconds_since(epoch, open);
        let close_s = seconds_since(epoch, close);
        let lo = times.partition_point(|&t| t < open_s);
        let hi = times.partition_point(|&t| t <= close_s);
        if lo < hi {
            let rel: Vec<f64> = times[lo..hi].iter().map(|&t| t - open_s).collect();
            let date = day.format("%Y-%m-%d").to_string();
            let n_news = filtered
                .iter()
                .filter(|r| r.timestamp.date_naive() == day)
                .count();
            days_table.rows.push(vec![
                date.clone(),
                (hi - lo).to_string(),
                n_news.to_string(),
            ]);
            for &t in &rel {
                events_table.rows.push(vec![date.clone(), fmt_f64(t)]);
            }
            let duration = seconds_since(open, close);
            let series = EventSeries::new(rel, 0.0, duration)?;
            let impact = impact_series(&series, settings.sma_window)?;
            for row in &impact.rows {
                impact_table.rows.push(vec![
                    date.clone(),
                    row.minute.to_string(),
                    row.n.to_string(),
                    fmt_opt(row.sma),
                    fmt_opt(row.theta),
                ]);
            }
            impacts.insert(day, impact);
            opens.insert(day, open_s);
        }
        day = day.succ_opt().expect("date range");
    }
    days_table.write(&out.join(DAYS_FILE))?;
    events_table.write(&out.join(EVENTS_FILE))?;
    impact_table.write(&out.join(IMPACT_FILE))?;

    // Isolated announcement windows, each sliced from the full jittered
    // stream so window files stand on their own.
    let windows = isolated_windows(&records, &settings.session, settings.half_width)?;
    let mut windows_table = Table::new(
        "windows",
        &hash,
        &[
            "window",
            "date",
            "news_utc",
            "importance",
            "description",
            "s_abs",
            "s_rel",
            "s_combined",
            "theta",
            "n_events",
        ],
    );
    windows_table.push_meta("half-width", fmt_f64(settings.half_width));
    for (idx, w) in windows.iter().enumerate() {
        let id = format!("w{idx:04}");
        let start_s = seconds_since(epoch, w.start);
        let end_s = seconds_since(epoch, w.end);
        let news_s = seconds_since(epoch, w.record.timestamp);
        let lo = times.partition_point(|&t| t < start_s);
        let hi = times.partition_point(|&t| t <= end_s);

        let day = w.record.timestamp.date_naive();
        let theta = impacts.get(&day).and_then(|series| {
            let minute = ((news_s - opens[&day]) / 60.0).floor() as usize;
            series.rows.get(minute).and_then(|r| r.theta)
        });
        let s = surprise(&w.record);

        let mut window_table = Table::new("window-events", &hash, &["rel_s"]);
        window_table.push_meta("window", id.clone());
        window_table.push_meta("news-rel", fmt_f64(news_s - start_s));
        window_table.push_meta("duration", fmt_f64(end_s - start_s));
        for &t in &times[lo..hi] {
            window_table.rows.push(vec![fmt_f64(t - start_s)]);
        }
        window_table.write(&out.join(WINDOW_DIR).join(format!("{id}.tsv")))?;

        windows_table.rows.push(vec![
            id,
            day.format("%Y-%m-%d").to_string(),
            format_utc(w.record.timestamp),
            w.record.importance.to_string(),
            clean(&w.record.description),
            s.as_ref().map(|v| fmt_f64(v.s_abs)).unwrap_or_default(),
            s.as_ref().map(|v| fmt_opt(v.s_rel)).unwrap_or_default(),
            s.as_ref()
                .map(|v| fmt_opt(v.s_combined))
                .unwrap_or_default(),
            fmt_opt(theta),
            (hi - lo).to_string(),
        ]);
    }
    windows_table.write(&out.join(WINDOWS_FILE))?;

    eprintln!(
        "ingest: {} events over {} days, {} calendar entries, {} isolated windows -> {}",
        times.len(),
        days_table.rows.len(),
        filtered.len(),
        windows.len(),
        out.display()
    );
    Ok(())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn date_at(epoch: DateTime<Utc>, seconds: f64) -> NaiveDate {
    (epoch + Duration::milliseconds((seconds * 1000.0).round() as i64)).date_naive()
}

/// Cell text must not carry the table's own delimiters.
fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

//! `newshawk diagnose`: time-change residuals and their dispersion test,
//! quantile pairs against the unit-exponential law, and the intensity
//! decomposition of a fitted unit.

use std::path::Path;

use newshawk_core::diagnostics::{excess_dispersion_test, qq_export, residuals};
use newshawk_core::model::{data_fingerprint, decompose_intensity};
use newshawk_core::Error;

use crate::dataset::Dataset;
use crate::error::CliError;
use crate::fits::FitsFile;
use crate::settings::Settings;
use crate::tsv::{fmt_f64, Manifest, Table};

pub fn run(
    settings: &Settings,
    dataset_dir: &Path,
    unit_id: &str,
    fits_dir: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let dataset = Dataset::load(dataset_dir)?;
    let unit = dataset.unit(unit_id)?;
    let fits = FitsFile::load(fits_dir)?;
    let row = fits.row(unit_id)?;
    let expected = data_fingerprint(&unit.events, &unit.news);
    if row.ok() && row.fingerprint != expected {
        return Err(CliError::refusal(format!(
            "unit {unit_id}: fit was made on different data ({} vs {})",
            row.fingerprint, expected
        )));
    }
    let fit = row.to_fit_result(&fits)?;

    std::fs::create_dir_all(out).map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;
    let manifest = Manifest::new("diagnose", settings.seed)
        .config("bin-width", fmt_f64(settings.bin_width))
        .config("unit", unit_id)
        .input("dataset", dataset.manifest_hash.clone())
        .input("fits", fits.manifest_hash.clone());
    let hash = manifest.write(out)?;

    let res = residuals(&fit.spec, &unit.events, &unit.news)?;

    let mut residuals_table = Table::new("residuals", &hash, &["index", "value"]);
    residuals_table.push_meta("unit", unit_id);
    residuals_table.push_meta("variant", fits.variant.to_string());
    // Too few residuals for the dispersion test is a property of the
    // unit, not a run failure; it is recorded instead of raised.
    match excess_dispersion_test(&res) {
        Ok(ed) => {
            residuals_table.push_meta("ed-statistic", fmt_f64(ed.statistic));
            residuals_table.push_meta("ed-p", fmt_f64(ed.p_value));
            residuals_table.push_meta("ed-n", ed.n_residuals.to_string());
        }
        Err(e @ Error::InsufficientData { .. }) => {
            residuals_table.push_meta("ed-error", e.to_string());
        }
        Err(e) => return Err(e.into()),
    }
    for (i, &v) in res.values().iter().enumerate() {
        residuals_table
            .rows
            .push(vec![i.to_string(), fmt_f64(v)]);
    }
    residuals_table.write(&out.join("residuals.tsv"))?;

    // Quantile pairs, raw and on log scale. The log of an exactly zero
    // empirical quantile is left empty.
    let qq = qq_export(&res)?;
    let mut qq_table = Table::new(
        "qq",
        &hash,
        &["theoretical", "empirical", "log_theoretical", "log_empirical"],
    );
    for &(theo, emp) in &qq.pairs {
        qq_table.rows.push(vec![
            fmt_f64(theo),
            fmt_f64(emp),
            fmt_f64(theo.ln()),
            if emp > 0.0 {
                fmt_f64(emp.ln())
            } else {
                String::new()
            },
        ]);
    }
    qq_table.write(&out.join("qq.tsv"))?;

    // Intensity decomposition on a regular grid over the unit's window.
    let duration = unit.events.duration();
    let step = settings.bin_width;
    let n_ticks = (duration / step).floor() as usize;
    let mut grid: Vec<f64> = (0..=n_ticks)
        .map(|k| k as f64 * step)
        .filter(|&t| t <= duration)
        .collect();
    if grid.last().copied() != Some(duration) {
        grid.push(duration);
    }
    let decomposition = decompose_intensity(&fit.spec, &unit.events, &unit.news, &grid, None)?;
    let mut decomposition_table = Table::new(
        "decomposition",
        &hash,
        &["t", "baseline_frac", "endo_frac", "exo_frac"],
    );
    decomposition_table.push_meta("step", fmt_f64(step));
    for point in &decomposition {
        decomposition_table.rows.push(vec![
            fmt_f64(point.t),
            fmt_f64(point.baseline_frac),
            fmt_f64(point.endo_frac),
            fmt_f64(point.exo_frac),
        ]);
    }
    decomposition_table.write(&out.join("decomposition.tsv"))?;

    eprintln!(
        "diagnose: unit {} ({} residuals) -> {}",
        unit_id,
        res.len(),
        out.display()
    );
    Ok(())
}

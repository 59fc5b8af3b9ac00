//! `newshawk fit`: maximum-likelihood fits of one model variant over
//! every analysis unit of a dataset.
//!
//! Units are independent, so they are fitted by a small worker pool;
//! results land in a slot per unit and the output is assembled in unit
//! order, making the file identical however the workers interleave. A
//! unit whose fit fails keeps its row, with the failure in the `error`
//! column, and the run continues.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use newshawk_core::estimation::{fit, FitConfig};
use newshawk_core::model::data_fingerprint;

use crate::dataset::Dataset;
use crate::error::CliError;
use crate::fits::{FitRow, FitsFile};
use crate::settings::Settings;
use crate::tsv::Manifest;

pub fn run(settings: &Settings, dataset_dir: &Path, out: &Path) -> Result<(), CliError> {
    let variant = settings
        .variant
        .ok_or_else(|| CliError::input("fit needs a model variant (--variant)"))?;
    let dataset = Dataset::load(dataset_dir)?;
    let unit_ids = dataset.unit_ids(settings.scope);
    if unit_ids.is_empty() {
        return Err(CliError::input(format!(
            "dataset has no {} units",
            settings.scope.as_str()
        )));
    }

    let config = FitConfig {
        n_starts: settings.starts,
        seed: settings.seed,
        ..FitConfig::default()
    };

    let slots: Vec<Mutex<Option<Result<FitRow, CliError>>>> =
        unit_ids.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(unit_ids.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= unit_ids.len() {
                    break;
                }
                let row = fit_unit(&dataset, &unit_ids[i], variant, &config);
                *slots[i].lock().unwrap() = Some(row);
            });
        }
    });

    let mut rows = Vec::with_capacity(unit_ids.len());
    let mut failures = 0usize;
    for slot in slots {
        let row = slot.into_inner().unwrap().expect("worker filled slot")?;
        if !row.ok() {
            failures += 1;
        }
        rows.push(row);
    }

    std::fs::create_dir_all(out).map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;
    let manifest = Manifest::new("fit", settings.seed)
        .config("variant", variant.to_string())
        .config("scope", settings.scope.as_str())
        .config("starts", settings.starts.to_string())
        .input("dataset", dataset.manifest_hash.clone());
    let hash = manifest.write(out)?;

    let file = FitsFile {
        dir: out.to_path_buf(),
        manifest_hash: hash,
        dataset_hash: dataset.manifest_hash.clone(),
        variant,
        scope: settings.scope.as_str().to_string(),
        ladder_scales: config.ladder_scales,
        ladder_ratio: config.ladder_ratio,
        rows,
    };
    file.write()?;

    eprintln!(
        "fit: {} on {} {} units, {} failed -> {}",
        variant,
        unit_ids.len(),
        settings.scope.as_str(),
        failures,
        out.display()
    );
    Ok(())
}

/// Fit one unit. Only dataset-shape problems abort the run; a failing
/// optimization is recorded in the row.
fn fit_unit(
    dataset: &Dataset,
    id: &str,
    variant: newshawk_core::estimation::ModelVariant,
    config: &FitConfig,
) -> Result<FitRow, CliError> {
    let unit = dataset.unit(id)?;
    let fingerprint = data_fingerprint(&unit.events, &unit.news);
    let base = FitRow {
        unit: id.to_string(),
        n_events: unit.events.len(),
        duration: unit.events.duration(),
        theta: unit.theta,
        s_combined: unit.s_combined,
        error: None,
        loglik: f64::NAN,
        aic: f64::NAN,
        bic: f64::NAN,
        converged: false,
        starts_tried: 0,
        fingerprint,
        params: Vec::new(),
        std_errors: Vec::new(),
        at_boundary: Vec::new(),
    };
    match fit(variant, &unit.events, &unit.news, config) {
        Ok(result) => Ok(FitRow {
            loglik: result.loglik,
            aic: result.aic,
            bic: result.bic,
            converged: result.converged,
            starts_tried: result.starts_tried,
            params: result.params,
            std_errors: result.std_errors,
            at_boundary: result.at_boundary,
            ..base
        }),
        Err(e) => Ok(FitRow {
            error: Some(e.to_string()),
            ..base
        }),
    }
}

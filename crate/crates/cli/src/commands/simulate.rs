//! `newshawk simulate`: draw replica event series from a fitted model
//! over a unit's real window, bin them against the real counts, and,
//! when a second fit is supplied with `--against`, run the paired
//! count-ratio experiment between the two models.

use std::path::Path;

use newshawk_core::model::data_fingerprint;
use newshawk_core::simulation::{bin_events, count_ratio_experiment, simulate, RatioConfig, SimConfig};

use crate::dataset::{Dataset, Unit};
use crate::error::CliError;
use crate::fits::FitsFile;
use crate::settings::Settings;
use crate::tsv::{fmt_f64, fmt_opt, Manifest, Table};

pub fn run(
    settings: &Settings,
    dataset_dir: &Path,
    unit_id: &str,
    fits_dir: &Path,
    against_dir: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let dataset = Dataset::load(dataset_dir)?;
    let unit = dataset.unit(unit_id)?;

    let fits_a = FitsFile::load(fits_dir)?;
    let fit_a = load_fit(&fits_a, &unit)?;
    let fits_b = against_dir.map(FitsFile::load).transpose()?;
    let fit_b = fits_b
        .as_ref()
        .map(|f| load_fit(f, &unit))
        .transpose()?;

    std::fs::create_dir_all(out).map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;
    let mut manifest = Manifest::new("simulate", settings.seed)
        .config("replicas", settings.replicas.to_string())
        .config("bin-width", fmt_f64(settings.bin_width))
        .config("unit", unit_id)
        .input("dataset", dataset.manifest_hash.clone())
        .input("fits_a", fits_a.manifest_hash.clone());
    if let Some(f) = &fits_b {
        manifest = manifest.input("fits_b", f.manifest_hash.clone());
    }
    let hash = manifest.write(out)?;

    let sim_config = SimConfig {
        seed: settings.seed,
        n_replicas: settings.replicas,
        t_start: unit.events.t_start(),
        t_end: unit.events.t_end(),
        news: unit.news.clone(),
        max_events: None,
    };
    let replicas_a = simulate(&fit_a.spec, &sim_config)?;
    let replicas_b = fit_b
        .as_ref()
        .map(|f| simulate(&f.spec, &sim_config))
        .transpose()?;

    let mut replicas_table = Table::new("replicas", &hash, &["model", "replica", "rel_s"]);
    replicas_table.push_meta("variant-a", fits_a.variant.to_string());
    if let Some(f) = &fits_b {
        replicas_table.push_meta("variant-b", f.variant.to_string());
    }
    for (label, replicas) in std::iter::once(("a", &replicas_a))
        .chain(replicas_b.iter().map(|r| ("b", r)))
    {
        for (idx, series) in replicas.iter().enumerate() {
            for &t in series.times() {
                replicas_table
                    .rows
                    .push(vec![label.to_string(), idx.to_string(), fmt_f64(t)]);
            }
        }
    }
    replicas_table.write(&out.join("replicas.tsv"))?;

    // Binned counts: the real series next to each model's replica mean
    // and one-standard-deviation band.
    let real_bins = bin_events(std::slice::from_ref(&unit.events), settings.bin_width)?;
    let bins_a = bin_events(&replicas_a, settings.bin_width)?;
    let bins_b = replicas_b
        .as_ref()
        .map(|r| bin_events(r, settings.bin_width))
        .transpose()?;
    let mut binned_table = Table::new(
        "binned",
        &hash,
        &[
            "bin_lo", "bin_hi", "real", "mean_a", "std_a", "mean_b", "std_b",
        ],
    );
    binned_table.push_meta("bin-width", fmt_f64(settings.bin_width));
    let real_mean = real_bins.mean();
    let mean_a = bins_a.mean();
    let std_a = bins_a.std();
    let mean_b = bins_b.as_ref().map(|b| b.mean());
    let std_b = bins_b.as_ref().map(|b| b.std());
    for (i, lo) in real_bins.edges().iter().enumerate() {
        binned_table.rows.push(vec![
            fmt_f64(*lo),
            fmt_f64((lo + settings.bin_width).min(unit.events.t_end())),
            fmt_f64(real_mean[i]),
            fmt_f64(mean_a[i]),
            fmt_f64(std_a[i]),
            fmt_opt(mean_b.as_ref().map(|m| m[i])),
            fmt_opt(std_b.as_ref().map(|s| s[i])),
        ]);
    }
    binned_table.write(&out.join("binned.tsv"))?;

    // Paired ratio experiment, model a in the news slot and model b as
    // the baseline.
    if let Some(fit_b) = &fit_b {
        let report = count_ratio_experiment(
            &fit_a,
            fit_b,
            &unit.events,
            &unit.news,
            &RatioConfig {
                seed: settings.seed,
                n_replicas: settings.replicas,
                bin_width: settings.bin_width,
                summary_width: 300.0,
            },
        )?;
        let mut ratio_table = Table::new(
            "ratio",
            &hash,
            &["bin_lo", "ratio_a", "std_a", "ratio_b", "std_b"],
        );
        ratio_table.push_meta("bin-width", fmt_f64(report.bin_width));
        for (model, r) in [("a", &report.with_news), ("b", &report.without_news)] {
            ratio_table.push_meta(
                &format!("post-news-ratio-{model}"),
                fmt_opt(r.post_news_ratio),
            );
            ratio_table.push_meta(
                &format!("pre-news-ratio-{model}"),
                fmt_opt(r.pre_news_ratio),
            );
            ratio_table.push_meta(&format!("mean-total-{model}"), fmt_f64(r.mean_total));
        }
        let edges = real_bins.edges();
        for i in 0..edges.len() {
            ratio_table.rows.push(vec![
                fmt_f64(edges[i]),
                fmt_opt(report.with_news.per_bin[i]),
                fmt_opt(report.with_news.per_bin_std[i]),
                fmt_opt(report.without_news.per_bin[i]),
                fmt_opt(report.without_news.per_bin_std[i]),
            ]);
        }
        ratio_table.write(&out.join("ratio.tsv"))?;
    }

    eprintln!(
        "simulate: {} replicas of unit {} -> {}",
        settings.replicas,
        unit_id,
        out.display()
    );
    Ok(())
}

/// Rebuild the unit's fit from a fits directory, refusing silently
/// mismatched data.
fn load_fit(
    file: &FitsFile,
    unit: &Unit,
) -> Result<newshawk_core::estimation::FitResult, CliError> {
    let row = file.row(&unit.id)?;
    let expected = data_fingerprint(&unit.events, &unit.news);
    if row.ok() && row.fingerprint != expected {
        return Err(CliError::refusal(format!(
            "unit {}: fit was made on different data ({} vs {})",
            unit.id, row.fingerprint, expected
        )));
    }
    row.to_fit_result(file)
}

//! `newshawk compare`: per-unit AIC/BIC deltas between two fit runs on
//! the same dataset, plus median splits of the deltas by news impact
//! and surprise.
//!
//! The delta convention is `score(a) - score(b)`: positive values prefer
//! model b. Deltas are computed component-wise from parameter counts and
//! log-likelihoods, so two fits with identical likelihoods differ by
//! exactly twice the parameter-count difference.

use std::path::Path;

use newshawk_core::diagnostics::welch_t_test;

use crate::error::CliError;
use crate::fits::{FitRow, FitsFile};
use crate::settings::Settings;
use crate::tsv::{fmt_f64, fmt_opt, Manifest, Table};

pub fn run(
    settings: &Settings,
    dir_a: &Path,
    dir_b: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let a = FitsFile::load(dir_a)?;
    let b = FitsFile::load(dir_b)?;
    if a.dataset_hash != b.dataset_hash {
        return Err(CliError::refusal(format!(
            "fits come from different datasets: {} vs {}",
            a.dataset_hash, b.dataset_hash
        )));
    }
    if a.scope != b.scope {
        return Err(CliError::input(format!(
            "fits have different scopes: {} vs {}",
            a.scope, b.scope
        )));
    }

    let k_a = a.variant.n_params() as f64;
    let k_b = b.variant.n_params() as f64;

    struct Delta<'r> {
        row: &'r FitRow,
        loglik_b: f64,
        delta_aic: f64,
        delta_bic: f64,
        preferred: &'static str,
    }

    let mut deltas: Vec<Delta> = Vec::new();
    let mut skipped = 0usize;
    for row_a in &a.rows {
        let Some(row_b) = b.rows.iter().find(|r| r.unit == row_a.unit) else {
            skipped += 1;
            continue;
        };
        if !row_a.ok() || !row_b.ok() {
            skipped += 1;
            continue;
        }
        if row_a.fingerprint != row_b.fingerprint {
            return Err(CliError::refusal(format!(
                "unit {}: fits saw different data ({} vs {})",
                row_a.unit, row_a.fingerprint, row_b.fingerprint
            )));
        }
        let d_loglik = row_a.loglik - row_b.loglik;
        let delta_aic = 2.0 * (k_a - k_b) - 2.0 * d_loglik;
        let delta_bic = (k_a - k_b) * (row_a.n_events as f64).ln() - 2.0 * d_loglik;
        let preferred = if delta_aic > 0.0 {
            "b"
        } else if delta_aic < 0.0 {
            "a"
        } else if k_a < k_b {
            "a"
        } else if k_b < k_a {
            "b"
        } else {
            "tie"
        };
        deltas.push(Delta {
            row: row_a,
            loglik_b: row_b.loglik,
            delta_aic,
            delta_bic,
            preferred,
        });
    }
    if deltas.is_empty() {
        return Err(CliError::input(
            "no unit has a successful fit on both sides",
        ));
    }

    std::fs::create_dir_all(out).map_err(|e| CliError::input(format!("{}: {e}", out.display())))?;
    let manifest = Manifest::new("compare", settings.seed)
        .input("fits_a", a.manifest_hash.clone())
        .input("fits_b", b.manifest_hash.clone());
    let hash = manifest.write(out)?;

    let mut deltas_table = Table::new(
        "deltas",
        &hash,
        &[
            "unit",
            "n_events",
            "theta",
            "s_combined",
            "loglik_a",
            "loglik_b",
            "delta_aic",
            "delta_bic",
            "preferred",
        ],
    );
    deltas_table.push_meta("variant-a", a.variant.to_string());
    deltas_table.push_meta("variant-b", b.variant.to_string());
    deltas_table.push_meta("k-a", (k_a as usize).to_string());
    deltas_table.push_meta("k-b", (k_b as usize).to_string());
    deltas_table.push_meta("sign", "positive prefers b");
    for d in &deltas {
        deltas_table.rows.push(vec![
            d.row.unit.clone(),
            d.row.n_events.to_string(),
            fmt_opt(d.row.theta),
            fmt_opt(d.row.s_combined),
            fmt_f64(d.row.loglik),
            fmt_f64(d.loglik_b),
            fmt_f64(d.delta_aic),
            fmt_f64(d.delta_bic),
            d.preferred.to_string(),
        ]);
    }
    deltas_table.write(&out.join("deltas.tsv"))?;

    // Median splits: rank the units carrying each impact metric and cut
    // the ranking in half, lower half first. Sizes differ by at most one.
    let mut groups_table = Table::new(
        "groups",
        &hash,
        &["metric", "group", "n", "mean_delta_aic", "mean_delta_bic"],
    );
    let mut welch_table = Table::new(
        "welch",
        &hash,
        &["metric", "n_low", "n_high", "t", "df", "p", "note"],
    );
    for (metric, value_of) in [
        ("theta", (|d: &Delta| d.row.theta) as fn(&Delta) -> Option<f64>),
        ("s_combined", |d: &Delta| d.row.s_combined),
    ] {
        let mut carrying: Vec<&Delta> = deltas.iter().filter(|d| value_of(d).is_some()).collect();
        carrying.sort_by(|x, y| {
            value_of(x)
                .unwrap()
                .total_cmp(&value_of(y).unwrap())
                .then_with(|| x.row.unit.cmp(&y.row.unit))
        });
        let n_low = carrying.len().div_ceil(2);
        let (low, high) = carrying.split_at(n_low);
        for (name, group) in [("low", low), ("high", high)] {
            let mean = |f: fn(&Delta) -> f64| {
                if group.is_empty() {
                    None
                } else {
                    Some(group.iter().map(|d| f(d)).sum::<f64>() / group.len() as f64)
                }
            };
            groups_table.rows.push(vec![
                metric.to_string(),
                name.to_string(),
                group.len().to_string(),
                fmt_opt(mean(|d| d.delta_aic)),
                fmt_opt(mean(|d| d.delta_bic)),
            ]);
        }

        let low_vals: Vec<f64> = low.iter().map(|d| d.delta_aic).collect();
        let high_vals: Vec<f64> = high.iter().map(|d| d.delta_aic).collect();
        let mut cells = vec![
            metric.to_string(),
            low.len().to_string(),
            high.len().to_string(),
        ];
        match welch_t_test(&low_vals, &high_vals) {
            Ok(w) => {
                cells.push(fmt_f64(w.t));
                cells.push(fmt_f64(w.df));
                cells.push(fmt_f64(w.p_value));
                cells.push(String::new());
            }
            Err(e) => {
                cells.extend(std::iter::repeat(String::new()).take(3));
                cells.push(e.to_string());
            }
        }
        welch_table.rows.push(cells);
    }
    groups_table.write(&out.join("groups.tsv"))?;
    welch_table.write(&out.join("welch.tsv"))?;

    eprintln!(
        "compare: {} vs {} on {} units ({} skipped) -> {}",
        a.variant,
        b.variant,
        deltas.len(),
        skipped,
        out.display()
    );
    Ok(())
}

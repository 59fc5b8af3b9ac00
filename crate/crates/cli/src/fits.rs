//! The `fits.tsv` artifact: one row per analysis unit, carrying the
//! fitted parameters, their uncertainty, the scores, and the fingerprint
//! of the exact data the fit saw. Failed units keep their row with the
//! failure text in the `error` column so a batch run is never silently
//! shorter than its input.

use std::path::{Path, PathBuf};

use newshawk_core::estimation::{spec_from_params, FitResult, ModelVariant};

use crate::error::CliError;
use crate::tsv::{fmt_f64, fmt_opt, parse_f64, parse_opt_f64, Table};

pub const FITS_FILE: &str = "fits.tsv";

#[derive(Debug, Clone)]
pub struct FitRow {
    pub unit: String,
    pub n_events: usize,
    pub duration: f64,
    pub theta: Option<f64>,
    pub s_combined: Option<f64>,
    /// Failure text for units that did not produce a fit.
    pub error: Option<String>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub starts_tried: usize,
    pub fingerprint: String,
    pub params: Vec<f64>,
    pub std_errors: Vec<Option<f64>>,
    pub at_boundary: Vec<bool>,
}

impl FitRow {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    /// Rebuild the in-memory fit from the persisted row. Parameters are
    /// stored in shortest round-trip form, so the reconstructed
    /// specification is bit-identical to the fitted one.
    pub fn to_fit_result(&self, file: &FitsFile) -> Result<FitResult, CliError> {
        if let Some(err) = &self.error {
            return Err(CliError::input(format!(
                "unit {}: no fit to use ({err})",
                self.unit
            )));
        }
        let spec = spec_from_params(
            file.variant,
            &self.params,
            file.ladder_scales,
            file.ladder_ratio,
        )?;
        Ok(FitResult {
            variant: file.variant,
            spec,
            params: self.params.clone(),
            param_names: file.variant.param_names().to_vec(),
            std_errors: self.std_errors.clone(),
            at_boundary: self.at_boundary.clone(),
            loglik: self.loglik,
            aic: self.aic,
            bic: self.bic,
            n_events: self.n_events,
            converged: self.converged,
            starts_tried: self.starts_tried,
            start_logliks: Vec::new(),
            data_fingerprint: self.fingerprint.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct FitsFile {
    pub dir: PathBuf,
    pub manifest_hash: String,
    pub dataset_hash: String,
    pub variant: ModelVariant,
    pub scope: String,
    pub ladder_scales: usize,
    pub ladder_ratio: f64,
    pub rows: Vec<FitRow>,
}

impl FitsFile {
    pub fn table(&self) -> Table {
        let names = self.variant.param_names();
        let mut header: Vec<String> = [
            "unit",
            "n_events",
            "duration",
            "theta",
            "s_combined",
            "loglik",
            "aic",
            "bic",
            "converged",
            "starts_tried",
            "fingerprint",
            "error",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for n in names {
            header.push(format!("param_{n}"));
        }
        for n in names {
            header.push(format!("se_{n}"));
        }
        for n in names {
            header.push(format!("bd_{n}"));
        }

        let mut table = Table::new("fits", &self.manifest_hash, &[]);
        table.header = header;
        table.push_meta("variant", self.variant.to_string());
        table.push_meta("scope", self.scope.clone());
        table.push_meta("dataset", self.dataset_hash.clone());
        table.push_meta("ladder-scales", self.ladder_scales.to_string());
        table.push_meta("ladder-ratio", fmt_f64(self.ladder_ratio));

        for row in &self.rows {
            let mut cells = vec![
                row.unit.clone(),
                row.n_events.to_string(),
                fmt_f64(row.duration),
                fmt_opt(row.theta),
                fmt_opt(row.s_combined),
            ];
            if row.ok() {
                cells.push(fmt_f64(row.loglik));
                cells.push(fmt_f64(row.aic));
                cells.push(fmt_f64(row.bic));
                cells.push(row.converged.to_string());
                cells.push(row.starts_tried.to_string());
                cells.push(row.fingerprint.clone());
                cells.push(String::new());
                for &p in &row.params {
                    cells.push(fmt_f64(p));
                }
                for &se in &row.std_errors {
                    cells.push(fmt_opt(se));
                }
                for &b in &row.at_boundary {
                    cells.push(b.to_string());
                }
            } else {
                // Score, parameter and uncertainty cells stay empty.
                cells.extend(std::iter::repeat(String::new()).take(5));
                cells.push(row.fingerprint.clone());
                cells.push(row.error.clone().unwrap_or_default());
                cells.extend(std::iter::repeat(String::new()).take(3 * names.len()));
            }
            table.rows.push(cells);
        }
        table
    }

    pub fn write(&self) -> Result<(), CliError> {
        self.table().write(&self.dir.join(FITS_FILE))
    }

    pub fn load(dir: &Path) -> Result<FitsFile, CliError> {
        let path = dir.join(FITS_FILE);
        let table = Table::read(&path)?;
        let manifest_hash = table.require_meta("manifest", &path)?.to_string();
        let variant: ModelVariant = table
            .require_meta("variant", &path)?
            .parse()
            .map_err(|e: newshawk_core::Error| CliError::input(e.to_string()))?;
        let scope = table.require_meta("scope", &path)?.to_string();
        let dataset_hash = table.require_meta("dataset", &path)?.to_string();
        let ladder_scales = table
            .require_meta("ladder-scales", &path)?
            .parse::<usize>()
            .map_err(|e| CliError::input(format!("{}: ladder-scales: {e}", path.display())))?;
        let ladder_ratio = parse_f64(table.require_meta("ladder-ratio", &path)?, "ladder-ratio")?;

        let names = variant.param_names();
        let col = |name: &str| table.column(name, &path);
        let c_unit = col("unit")?;
        let c_n = col("n_events")?;
        let c_dur = col("duration")?;
        let c_theta = col("theta")?;
        let c_s = col("s_combined")?;
        let c_ll = col("loglik")?;
        let c_aic = col("aic")?;
        let c_bic = col("bic")?;
        let c_conv = col("converged")?;
        let c_tried = col("starts_tried")?;
        let c_fp = col("fingerprint")?;
        let c_err = col("error")?;
        let c_params: Vec<usize> = names
            .iter()
            .map(|n| table.column(&format!("param_{n}"), &path))
            .collect::<Result<_, _>>()?;
        let c_ses: Vec<usize> = names
            .iter()
            .map(|n| table.column(&format!("se_{n}"), &path))
            .collect::<Result<_, _>>()?;
        let c_bds: Vec<usize> = names
            .iter()
            .map(|n| table.column(&format!("bd_{n}"), &path))
            .collect::<Result<_, _>>()?;

        let mut rows = Vec::with_capacity(table.rows.len());
        for r in &table.rows {
            let error = if r[c_err].is_empty() {
                None
            } else {
                Some(r[c_err].clone())
            };
            let parse_usize = |s: &str, what: &str| {
                s.parse::<usize>()
                    .map_err(|e| CliError::input(format!("{}: {what}: {e}", path.display())))
            };
            let row = if error.is_none() {
                FitRow {
                    unit: r[c_unit].clone(),
                    n_events: parse_usize(&r[c_n], "n_events")?,
                    duration: parse_f64(&r[c_dur], "duration")?,
                    theta: parse_opt_f64(&r[c_theta], "theta")?,
                    s_combined: parse_opt_f64(&r[c_s], "s_combined")?,
                    error: None,
                    loglik: parse_f64(&r[c_ll], "loglik")?,
                    aic: parse_f64(&r[c_aic], "aic")?,
                    bic: parse_f64(&r[c_bic], "bic")?,
                    converged: r[c_conv] == "true",
                    starts_tried: parse_usize(&r[c_tried], "starts_tried")?,
                    fingerprint: r[c_fp].clone(),
                    params: c_params
                        .iter()
                        .map(|&c| parse_f64(&r[c], "param"))
                        .collect::<Result<_, _>>()?,
                    std_errors: c_ses
                        .iter()
                        .map(|&c| parse_opt_f64(&r[c], "se"))
                        .collect::<Result<_, _>>()?,
                    at_boundary: c_bds.iter().map(|&c| r[c] == "true").collect(),
                }
            } else {
                FitRow {
                    unit: r[c_unit].clone(),
                    n_events: parse_usize(&r[c_n], "n_events")?,
                    duration: parse_f64(&r[c_dur], "duration")?,
                    theta: parse_opt_f64(&r[c_theta], "theta")?,
                    s_combined: parse_opt_f64(&r[c_s], "s_combined")?,
                    error,
                    loglik: f64::NAN,
                    aic: f64::NAN,
                    bic: f64::NAN,
                    converged: false,
                    starts_tried: 0,
                    fingerprint: r[c_fp].clone(),
                    params: Vec::new(),
                    std_errors: Vec::new(),
                    at_boundary: Vec::new(),
                }
            };
            rows.push(row);
        }

        Ok(FitsFile {
            dir: dir.to_path_buf(),
            manifest_hash,
            dataset_hash,
            variant,
            scope,
            ladder_scales,
            ladder_ratio,
            rows,
        })
    }

    pub fn row(&self, unit: &str) -> Result<&FitRow, CliError> {
        self.rows.iter().find(|r| r.unit == unit).ok_or_else(|| {
            CliError::input(format!(
                "unit {unit:?} not present in {}",
                self.dir.join(FITS_FILE).display()
            ))
        })
    }
}

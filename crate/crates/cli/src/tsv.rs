//! Delimited-text output format shared by every command.
//!
//! Each file is tab-separated with a leading metadata block: lines of the
//! form `# key<TAB>value`, then a header row, then data rows. Every file
//! carries the hash of the run manifest that produced it, so any table
//! can be traced back to the exact command, configuration and inputs.
//!
//! Floats are written with `{:?}` (shortest round-trip form), so reading
//! a value back with `str::parse::<f64>` recovers the original bits and
//! rewriting a loaded table reproduces the original bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn fmt_f64(x: f64) -> String {
    format!("{:?}", x)
}

/// Empty cell for a missing value.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn parse_f64(s: &str, context: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .map_err(|_| CliError::input(format!("{context}: expected a number, got {s:?}")))
}

pub fn parse_opt_f64(s: &str, context: &str) -> Result<Option<f64>, CliError> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s, context).map(Some)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        write!(out, "{byte:02x}").unwrap();
    }
    out
}

/// One output table: metadata block, header, rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &str, manifest_hash: &str, header: &[&str]) -> Self {
        Table {
            meta: vec![
                ("schema".to_string(), format!("{schema} v1")),
                ("manifest".to_string(), manifest_hash.to_string()),
            ],
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require_meta(&self, key: &str, file: &Path) -> Result<&str, CliError> {
        self.meta_value(key).ok_or_else(|| {
            CliError::input(format!("{}: missing `{key}` metadata", file.display()))
        })
    }

    /// Column index by header name.
    pub fn column(&self, name: &str, file: &Path) -> Result<usize, CliError> {
        self.header.iter().position(|h| h == name).ok_or_else(|| {
            CliError::input(format!("{}: missing column `{name}`", file.display()))
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = String::new();
        for (key, value) in &self.meta {
            writeln!(text, "# {key}\t{value}").unwrap();
        }
        writeln!(text, "{}", self.header.join("\t")).unwrap();
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len());
            writeln!(text, "{}", row.join("\t")).unwrap();
        }
        write_atomic(path, text.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Table, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut meta = Vec::new();
        let mut header = Vec::new();
        let mut rows = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (key, value) = rest.split_once('\t').ok_or_else(|| {
                    CliError::input(format!("{}: malformed metadata line", path.display()))
                })?;
                meta.push((key.to_string(), value.to_string()));
            } else if header.is_empty() {
                header = line.split('\t').map(|s| s.to_string()).collect();
            } else {
                rows.push(line.split('\t').map(|s| s.to_string()).collect());
            }
        }
        if header.is_empty() {
            return Err(CliError::input(format!(
                "{}: no header row",
                path.display()
            )));
        }
        Ok(Table { meta, header, rows })
    }
}

/// Write through a temporary file so a crash never leaves a half-written
/// table behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let result = (|| -> std::io::Result<()> {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Record of what a command ran with: the command name, tool version,
/// seed, configuration snapshot and input fingerprints. Its hash is the
/// run identity that every output file references. Wall-clock time is
/// reported on stderr rather than persisted, so reruns with the same
/// inputs produce byte-identical files.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub command: &'static str,
    pub seed: u64,
    pub config: Vec<(String, String)>,
    pub inputs: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Manifest {
            command,
            seed,
            config: Vec::new(),
            inputs: Vec::new(),
        }
    }

    pub fn config(mut self, key: &str, value: impl Into<String>) -> Self {
        self.config.push((key.to_string(), value.into()));
        self
    }

    pub fn input(mut self, name: &str, fingerprint: impl Into<String>) -> Self {
        self.inputs.push((name.to_string(), fingerprint.into()));
        self
    }

    fn fields(&self) -> Vec<(String, String)> {
        let mut rows = vec![
            ("command".to_string(), self.command.to_string()),
            (
                "version".to_string(),
                env!("CARGO_PKG_VERSION").to_string(),
            ),
            ("seed".to_string(), self.seed.to_string()),
        ];
        for (key, value) in &self.config {
            rows.push((format!("config.{key}"), value.clone()));
        }
        for (name, print) in &self.inputs {
            rows.push((format!("input.{name}"), print.clone()));
        }
        rows
    }

    pub fn hash(&self) -> String {
        let mut text = String::new();
        for (key, value) in self.fields() {
            writeln!(text, "{key}\t{value}").unwrap();
        }
        sha256_hex(text.as_bytes())
    }

    /// Write `manifest.tsv` into the output directory and return the hash
    /// the other files should reference.
    pub fn write(&self, dir: &Path) -> Result<String, CliError> {
        let hash = self.hash();
        let mut table = Table {
            meta: vec![("schema".to_string(), "manifest v1".to_string())],
            header: vec!["field".to_string(), "value".to_string()],
            rows: Vec::new(),
        };
        for (key, value) in self.fields() {
            table.rows.push(vec![key, value]);
        }
        table.rows.push(vec!["hash".to_string(), hash.clone()]);
        table.write(&dir.join("manifest.tsv"))?;
        Ok(hash)
    }
}

/// Read back the `hash` field of a directory's manifest.
pub fn manifest_hash_of(dir: &Path) -> Result<String, CliError> {
    let path = dir.join("manifest.tsv");
    let table = Table::read(&path)?;
    for row in &table.rows {
        if row.len() == 2 && row[0] == "hash" {
            return Ok(row[1].clone());
        }
    }
    Err(CliError::input(format!(
        "{}: manifest has no hash field",
        path.display()
    )))
}

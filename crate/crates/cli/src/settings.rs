//! Effective run configuration.
//!
//! Precedence, highest first: command-line flags, then the config file
//! (`--config`, or the `NEWSHAWK_CONFIG` environment variable), then
//! built-in defaults. The output root is special: an explicit OUT
//! argument always wins, otherwise `NEWSHAWK_OUT`, otherwise the config
//! file's `out-root`, otherwise the working directory.

use std::fs;
use std::path::{Path, PathBuf};

use newshawk_core::estimation::ModelVariant;
use newshawk_core::newsflow::{Session, DEFAULT_HALF_WIDTH, DEFAULT_SMA_WINDOW};
use newshawk_core::simulation::BIN_WIDTH_COARSE;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    PerDay,
    PerWindow,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::PerDay => "per-day",
            Scope::PerWindow => "per-window",
        }
    }
}

impl std::str::FromStr for Scope {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "per-day" => Ok(Scope::PerDay),
            "per-window" => Ok(Scope::PerWindow),
            other => Err(CliError::input(format!(
                "unknown scope {other:?}; expected per-day or per-window"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub starts: usize,
    pub replicas: usize,
    pub bin_width: f64,
    pub half_width: f64,
    pub sma_window: usize,
    pub session: Session,
    pub variant: Option<ModelVariant>,
    pub scope: Scope,
    out_root: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 0,
            starts: 10,
            replicas: 25,
            bin_width: BIN_WIDTH_COARSE,
            half_width: DEFAULT_HALF_WIDTH,
            sma_window: DEFAULT_SMA_WINDOW,
            session: Session::default(),
            variant: None,
            scope: Scope::PerDay,
            out_root: None,
        }
    }
}

impl Settings {
    /// Defaults, overlaid with the config file if one is named by flag or
    /// environment.
    pub fn load(config_flag: Option<&Path>) -> Result<Self, CliError> {
        let mut settings = Settings::default();
        let env_path = std::env::var_os("NEWSHAWK_CONFIG").map(PathBuf::from);
        let path = config_flag.map(Path::to_path_buf).or(env_path);
        if let Some(path) = path {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::input(format!("config {}: {e}", path.display())))?;
            settings.apply_file(&text, &path)?;
        }
        Ok(settings)
    }

    fn apply_file(&mut self, text: &str, path: &Path) -> Result<(), CliError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::input(format!(
                    "config {} line {}: expected key = value",
                    path.display(),
                    idx + 1
                ))
            })?;
            self.apply_kv(key.trim(), value.trim()).map_err(|e| {
                CliError::input(format!(
                    "config {} line {}: {}",
                    path.display(),
                    idx + 1,
                    e.message
                ))
            })?;
        }
        Ok(())
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        // Accept both spellings so config keys can mirror the flag names.
        let key = key.replace('_', "-");
        match key.as_str() {
            "seed" => self.seed = parse(value, "seed")?,
            "starts" => self.starts = parse(value, "starts")?,
            "replicas" => self.replicas = parse(value, "replicas")?,
            "bin-width" => self.bin_width = parse(value, "bin-width")?,
            "half-width" => self.half_width = parse(value, "half-width")?,
            "sma-window" => self.sma_window = parse(value, "sma-window")?,
            "session" => {
                self.session = value
                    .parse::<Session>()
                    .map_err(|e| CliError::input(e.to_string()))?
            }
            "variant" => {
                self.variant = Some(
                    value
                        .parse::<ModelVariant>()
                        .map_err(|e| CliError::input(e.to_string()))?,
                )
            }
            "scope" => self.scope = value.parse()?,
            "out-root" => self.out_root = Some(PathBuf::from(value)),
            other => {
                return Err(CliError::input(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    /// Resolve an output directory: explicit argument, else a default
    /// name under the output root.
    pub fn out_dir(&self, explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
        if let Some(dir) = explicit {
            return dir;
        }
        let root = std::env::var_os("NEWSHAWK_OUT")
            .map(PathBuf::from)
            .or_else(|| self.out_root.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        root.join(default_name)
    }
}

fn parse<T: std::str::FromStr>(value: &str, key: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::input(format!("invalid value {value:?} for {key}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_overrides_defaults_and_rejects_unknown_keys() {
        let mut s = Settings::default();
        s.apply_file(
            "# comment\nseed = 9\nbin_width = 60\nsession = 08:00-12:00\nvariant = pl+news\n",
            Path::new("test.conf"),
        )
        .unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.bin_width, 60.0);
        assert_eq!(s.session.to_string(), "08:00-12:00");
        assert_eq!(s.variant, Some(ModelVariant::PowerLawNews));
        let err = s.apply_file("colour = red\n", Path::new("test.conf")).unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("colour"));
    }

    #[test]
    fn explicit_out_dir_wins_over_everything() {
        let s = Settings::default();
        let explicit = s.out_dir(Some(PathBuf::from("/tmp/x")), "dataset");
        assert_eq!(explicit, PathBuf::from("/tmp/x"));
    }
}

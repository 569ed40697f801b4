//! Flat key=value configuration with flag overrides.
//!
//! Precedence: built-in defaults, then the `--config` file, then explicit
//! flags. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use changekit::builder::BuildConfig;
use changekit::mask::Connectivity;
use changekit::templates::TemplateBank;
use changekit::vision::VisionConfig;
use changekit::{Error, Result};

#[derive(Debug, Clone)]
pub struct Config {
    pub seed: u64,
    pub dialogues_per_pair: usize,
    pub connectivity: Connectivity,
    pub min_area: usize,
    pub threshold: f64,
    pub template_bank: Option<PathBuf>,
    pub channel_widths: [usize; 4],
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            dialogues_per_pair: 3,
            connectivity: Connectivity::Eight,
            min_area: 1,
            threshold: 0.5,
            template_bank: None,
            channel_widths: [8, 16, 32, 64],
        }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidConfig(format!("invalid value '{value}' for key '{key}'"))
}

impl Config {
    /// Apply a `key=value` config file on top of the current values.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                Error::MissingFile(path.to_path_buf())
            } else {
                Error::Io {
                    path: path.to_path_buf(),
                    source,
                }
            }
        })?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "{}:{}: expected 'key=value'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        self.validate()
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "dialogues_per_pair" => {
                self.dialogues_per_pair = value.parse().map_err(|_| bad(key, value))?
            }
            "connectivity" => self.connectivity = parse_connectivity(value)?,
            "min_area" => self.min_area = value.parse().map_err(|_| bad(key, value))?,
            "threshold" => self.threshold = value.parse().map_err(|_| bad(key, value))?,
            "template_bank" => self.template_bank = Some(PathBuf::from(value)),
            "channel_widths" => {
                let widths: Vec<usize> = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| bad(key, value)))
                    .collect::<Result<_>>()?;
                self.channel_widths = widths
                    .try_into()
                    .map_err(|_| Error::InvalidConfig("channel_widths needs 4 values".into()))?;
            }
            other => {
                return Err(Error::InvalidConfig(format!("unknown config key '{other}'")))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dialogues_per_pair < 1 {
            return Err(Error::InvalidConfig(
                "dialogues_per_pair must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig("threshold must lie in [0, 1]".into()));
        }
        self.vision_config().validate()
    }

    pub fn build_config(&self) -> BuildConfig {
        BuildConfig {
            seed: self.seed,
            dialogues_per_pair: self.dialogues_per_pair,
            connectivity: self.connectivity,
            min_area: self.min_area,
            ..BuildConfig::default()
        }
    }

    pub fn vision_config(&self) -> VisionConfig {
        VisionConfig {
            encoder_channels: self.channel_widths,
            ..VisionConfig::default()
        }
    }

    pub fn template_bank(&self) -> Result<TemplateBank> {
        match &self.template_bank {
            Some(path) => TemplateBank::from_path(path),
            None => Ok(TemplateBank::builtin()),
        }
    }
}

pub fn parse_connectivity(value: &str) -> Result<Connectivity> {
    match value.to_ascii_lowercase().as_str() {
        "four" | "4" => Ok(Connectivity::Four),
        "eight" | "8" => Ok(Connectivity::Eight),
        other => Err(Error::InvalidConfig(format!(
            "connectivity must be 'four' or 'eight', got '{other}'"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_values_apply_and_unknown_keys_fail() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment\nseed=9\nconnectivity=four\nthreshold=0.25").unwrap();
        let mut config = Config::default();
        config.apply_file(file.path()).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.connectivity, Connectivity::Four);
        assert_eq!(config.threshold, 0.25);

        writeln!(file, "nonsense=1").unwrap();
        let mut config = Config::default();
        assert!(config.apply_file(file.path()).is_err());
    }

    #[test]
    fn zero_dialogues_is_rejected() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "dialogues_per_pair=0").unwrap();
        let mut config = Config::default();
        assert!(config.apply_file(file.path()).is_err());
    }
}

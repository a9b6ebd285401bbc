//! Service configuration, read from a TOML file.
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! archive_dir = "data"          # relative to this file
//! seed = 42                     # optional: deterministic ids and clock
//! admin_actors = ["ops"]
//! auto_reindex = true
//!
//! [scoring]
//! k1 = 1.2
//! b = 0.75
//! boost = 0.5
//! expansion_weight = 0.3
//! stemming = false
//! stopwords = false
//! ```

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use iw_core::retrieval::Tokenizer;
use iw_core::ScoringParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming the config file when no flag is given.
pub const CONFIG_ENV: &str = "IW_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("no config file: pass --config or set {CONFIG_ENV}")]
    Missing,
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid scoring constants: {0}")]
    Scoring(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    pub k1: f64,
    pub b: f64,
    pub boost: f64,
    pub expansion_weight: f64,
    pub stemming: bool,
    pub stopwords: bool,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        let p = ScoringParams::default();
        Self {
            k1: p.k1,
            b: p.b,
            boost: p.boost,
            expansion_weight: p.expansion_weight,
            stemming: false,
            stopwords: false,
        }
    }
}

impl ScoringConfig {
    pub fn params(&self) -> ScoringParams {
        ScoringParams {
            k1: self.k1,
            b: self.b,
            boost: self.boost,
            expansion_weight: self.expansion_weight,
        }
    }

    pub fn tokenizer(&self) -> Tokenizer {
        Tokenizer {
            stemming: self.stemming,
            stopwords: self.stopwords,
        }
    }

    fn check(&self) -> Result<(), ConfigError> {
        let finite = [self.k1, self.b, self.boost, self.expansion_weight]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.k1 < 0.0 || !(0.0..=1.0).contains(&self.b) || self.boost < 0.0 || self.expansion_weight < 0.0 {
            return Err(ConfigError::Scoring(format!(
                "k1 >= 0, 0 <= b <= 1, boost >= 0 and expansion_weight >= 0 required, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen: String,
    pub archive_dir: PathBuf,
    pub seed: Option<u64>,
    /// Actors allowed to call admin endpoints.
    pub admin_actors: Vec<String>,
    /// Rebuild a stale index before serving a search.
    pub auto_reindex: bool,
    pub scoring: ScoringConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            archive_dir: PathBuf::from("archive"),
            seed: None,
            admin_actors: Vec::new(),
            auto_reindex: true,
            scoring: ScoringConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let mut config: Self = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })?;
        config.scoring.check()?;
        if config.archive_dir.is_relative() {
            if let Some(parent) = path.parent() {
                config.archive_dir = parent.join(&config.archive_dir);
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, path)
    }

    /// The explicit path if given, else `$IW_CONFIG`.
    pub fn locate(flag: Option<&Path>) -> Result<PathBuf, ConfigError> {
        match flag {
            Some(p) => Ok(p.to_owned()),
            None => env::var_os(CONFIG_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
                .ok_or(ConfigError::Missing),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let c = ServiceConfig::parse("listen = \"0.0.0.0:9000\"\n", Path::new("/etc/iw/iw.toml")).unwrap();
        assert_eq!(c.listen, "0.0.0.0:9000");
        assert_eq!(c.archive_dir, PathBuf::from("/etc/iw/archive"));
        assert_eq!(c.scoring, ScoringConfig::default());
        assert!(c.auto_reindex);
    }

    #[test]
    fn scoring_table_is_read() {
        let c = ServiceConfig::parse(
            "archive_dir = \"/srv/a\"\nseed = 3\n[scoring]\nboost = 1.0\nstemming = true\n",
            Path::new("x.toml"),
        )
        .unwrap();
        assert_eq!(c.archive_dir, PathBuf::from("/srv/a"));
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.scoring.params().boost, 1.0);
        assert!(c.scoring.tokenizer().stemming);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(ServiceConfig::parse("[scoring]\nb = 2.0\n", Path::new("x.toml")).is_err());
        assert!(ServiceConfig::parse("colour = \"red\"\n", Path::new("x.toml")).is_err());
    }
}

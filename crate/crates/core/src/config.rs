//! Run configuration. Parameters resolve as CLI flag > config file > defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::Deserialize;

use crate::event::TimestampMs;
use crate::params::AlgorithmParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmChoice {
    Multimodal,
    Baseline,
    Both,
}

impl FromStr for AlgorithmChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "multimodal" => Ok(Self::Multimodal),
            "baseline" => Ok(Self::Baseline),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown algorithm `{other}` (expected multimodal, baseline or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Self::Json),
            "text" => Ok(Self::Text),
            other => Err(format!("unknown format `{other}` (expected json or text)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub repo_path: PathBuf,
    pub branch: Option<String>,
    pub reviews_path: Option<PathBuf>,
    pub meetings_path: Option<PathBuf>,
    pub algorithm: AlgorithmChoice,
    pub params: AlgorithmParams,
    pub as_of: Option<TimestampMs>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(repo_path: impl Into<PathBuf>) -> Self {
        Self {
            repo_path: repo_path.into(),
            branch: None,
            reviews_path: None,
            meetings_path: None,
            algorithm: AlgorithmChoice::Multimodal,
            params: AlgorithmParams::default(),
            as_of: None,
            format: OutputFormat::Json,
        }
    }
}

/// Optional value for every [`AlgorithmParams`] field. This is both the
/// config-file schema and the set of CLI overrides.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub decay_days: Option<f64>,
    pub mte_minutes: Option<f64>,
    pub fa_weight: Option<f64>,
    pub dl_weight: Option<f64>,
    pub rv_weight: Option<f64>,
    pub log_dl_weight: Option<f64>,
    pub log_rv_weight: Option<f64>,
    pub doa_threshold: Option<f64>,
    pub norm_threshold: Option<f64>,
    pub coverage_threshold: Option<f64>,
    pub meeting_window_days: Option<u32>,
    pub meeting_exclude_keywords: Option<Vec<String>>,
}

impl ParamOverrides {
    pub fn apply(&self, params: &mut AlgorithmParams) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { params.$field = v.clone(); })*
            };
        }
        set!(
            decay_days,
            mte_minutes,
            fa_weight,
            dl_weight,
            rv_weight,
            log_dl_weight,
            log_rv_weight,
            doa_threshold,
            norm_threshold,
            coverage_threshold,
            meeting_window_days,
            meeting_exclude_keywords
        );
    }
}

pub fn parse_config(text: &str) -> Result<ParamOverrides> {
    toml::from_str(text).map_err(|e| Error::InvalidParam {
        name: "config".to_owned(),
        constraint: e.message().to_owned(),
    })
}

/// Resolves algorithm parameters from defaults, an optional TOML config file
/// and CLI overrides, then validates them.
pub fn load_params(file: Option<&Path>, flags: &ParamOverrides) -> Result<AlgorithmParams> {
    let mut params = AlgorithmParams::default();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidParam {
            name: "config".to_owned(),
            constraint: format!("cannot read {}: {e}", path.display()),
        })?;
        parse_config(&text)?.apply(&mut params);
    }
    flags.apply(&mut params);
    params.validate()?;
    Ok(params)
}

/// Parses an RFC 3339 instant or a bare `YYYY-MM-DD` date (midnight UTC).
pub fn parse_instant(text: &str) -> Result<TimestampMs> {
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Ok(t.timestamp_millis());
    }
    if let Ok(d) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp_millis());
    }
    Err(Error::InvalidParam {
        name: "as-of".to_owned(),
        constraint: format!("`{text}` is not an ISO 8601 date or RFC 3339 timestamp"),
    })
}

pub fn format_instant(ms: TimestampMs) -> String {
    DateTime::<Utc>::from_timestamp_millis(ms)
        .map(|t| t.format("%Y-%m-%dT%H:%M:%S%.3fZ").to_string())
        .unwrap_or_else(|| ms.to_string())
}

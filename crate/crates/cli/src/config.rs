//! JSON run configuration.
//!
//! Unknown keys are rejected everywhere. Parse failures report the byte
//! offset; schema and invariant failures report the offending field path.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use submig_core::{make_direction_set, Crack, CrackScene, DirectionSet, SearchGrid};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at byte offset {offset} (line {line}, column {column}): {message}")]
    Parse { offset: usize, line: usize, column: usize, message: String },
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
}

impl ConfigError {
    fn invalid(path: &str, message: impl std::fmt::Display) -> Self {
        ConfigError::Schema { path: path.to_string(), message: message.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub half_length: f64,
    pub cracks: Vec<Crack>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub count: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Overrides `alpha`/`beta` with the whole circle.
    #[serde(default)]
    pub full_view: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Pgm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
    #[serde(default)]
    pub emit_singular_values: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneConfig,
    pub array: ArrayConfig,
    pub frequencies: FrequencyConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Signal-subspace threshold; defaults to 1e-4 without noise, 1e-2 with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub output: OutputConfig,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => ConfigError::Schema { path, message: inner.to_string() },
            _ => ConfigError::Parse {
                offset: byte_offset(text, inner.line(), inner.column()),
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            },
        }
    })?;
    config.validate()?;
    Ok(config)
}

/// Reads, parses and validates the configuration at `path`.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

impl RunConfig {
    /// Canonical pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.crack_scene()?;
        self.direction_set()?;
        self.search_grid()?;
        self.wavenumbers()?;
        let n = &self.noise;
        if !(n.level >= 0.0) || !n.level.is_finite() {
            return Err(ConfigError::invalid(
                "noise.level",
                format!("must be finite and non-negative, got {}", n.level),
            ));
        }
        let tau = self.tau();
        if !(tau > 0.0 && tau < 1.0) {
            return Err(ConfigError::invalid("tau", format!("must lie in (0, 1), got {tau}")));
        }
        if self.output.formats.is_empty() {
            return Err(ConfigError::invalid("output.formats", "at least one of \"csv\", \"pgm\" is required"));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.tau.unwrap_or(if self.noise.level > 0.0 { 1e-2 } else { 1e-4 })
    }

    pub fn crack_scene(&self) -> Result<CrackScene, ConfigError> {
        CrackScene::new(self.scene.cracks.clone(), self.scene.half_length).map_err(|e| ConfigError::invalid("scene", e))
    }

    /// `(alpha, beta)` after applying the full-view flag.
    pub fn aperture(&self) -> (f64, f64) {
        if self.array.full_view {
            (0.0, TAU)
        } else {
            (self.array.alpha, self.array.beta)
        }
    }

    pub fn direction_set(&self) -> Result<DirectionSet, ConfigError> {
        let (a, b) = self.aperture();
        make_direction_set(self.array.count, a, b).map_err(|e| ConfigError::invalid("array", e))
    }

    pub fn search_grid(&self) -> Result<SearchGrid, ConfigError> {
        let g = &self.grid;
        SearchGrid::new(g.x_min, g.x_max, g.y_min, g.y_max, g.nx, g.ny).map_err(|e| ConfigError::invalid("grid", e))
    }

    /// `k_f` equi-distributed on `[2π/λ_max, 2π/λ_min]`; one frequency means `2π/λ_min`.
    pub fn wavenumbers(&self) -> Result<Vec<f64>, ConfigError> {
        let f = &self.frequencies;
        if !(f.lambda_min > 0.0) || !f.lambda_max.is_finite() {
            return Err(ConfigError::invalid("frequencies", "wavelengths must be positive and finite"));
        }
        if f.lambda_min > f.lambda_max {
            return Err(ConfigError::invalid(
                "frequencies",
                format!("lambda_min ({}) exceeds lambda_max ({})", f.lambda_min, f.lambda_max),
            ));
        }
        if f.count == 0 {
            return Err(ConfigError::invalid("frequencies", "count must be at least 1"));
        }
        let k_lo = 2.0 * PI / f.lambda_max;
        let k_hi = 2.0 * PI / f.lambda_min;
        if f.count == 1 {
            return Ok(vec![k_hi]);
        }
        let step = (k_hi - k_lo) / (f.count - 1) as f64;
        Ok((0..f.count).map(|i| if i + 1 == f.count { k_hi } else { k_lo + step * i as f64 }).collect())
    }
}

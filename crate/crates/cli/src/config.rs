//! Recipe files: TOML with one section per part of a sweep.
//!
//! ```toml
//! [sweep]
//! model = "auto_cs"
//! method = "fd"
//! param = "g"
//! convention = "fixed_couplings"
//! workers = 4
//!
//! [grid]
//! from = 0.5
//! to = 1.5
//! points = 101
//! spacing = "linear"
//!
//! [base]
//! gamma = 2.0
//! eta = 1.0
//! j = 10
//!
//! [truncation]
//! n_max = 40
//!
//! [output]
//! path = "transition_cs.csv"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub base: BaseSection,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub gamma_compare: GammaSection,
    #[serde(default)]
    pub ratio_scan: RatioSection,
    #[serde(default)]
    pub converge: ConvergeSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub model: Option<String>,
    pub method: Option<String>,
    pub param: Option<String>,
    pub convention: Option<String>,
    pub tensor: Option<Vec<String>>,
    pub exclusion: Option<f64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<String>,
    /// Explicit grid; overrides `from`/`to`/`points`.
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSection {
    pub g: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub omega: Option<f64>,
    pub theta: Option<f64>,
    pub j: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub n_max: Option<usize>,
    pub n_b: Option<usize>,
    pub sector: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    /// `csv` or `json`; defaults from the file extension, then csv.
    pub format: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaSection {
    pub g: Option<f64>,
    pub gammas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioSection {
    pub g: Option<f64>,
    pub js: Option<Vec<f64>>,
    pub gammas: Option<Vec<f64>>,
    pub etas: Option<Vec<f64>>,
    pub reference: Option<String>,
    pub lab_method: Option<String>,
    pub reference_n_max: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub cutoffs: Option<Vec<usize>>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Config> {
        Ok(toml::from_str(text)?)
    }
}

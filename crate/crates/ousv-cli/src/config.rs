//! Run configuration: TOML schema, dotted-key overrides, and validation.
//!
//! Unknown keys are rejected everywhere so a typo never silently falls back
//! to a default. The resolved configuration is written next to the outputs as
//! `manifest.toml`; re-running that manifest reproduces the run byte for
//! byte.

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ousv::{GridSpec, MarketParams, OUParams, VolFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Price,
    StepStudy,
    ErrorStudy,
    OrderFit,
    DetermCheck,
    Sweep,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::Price => "price",
            Experiment::StepStudy => "step-study",
            Experiment::ErrorStudy => "error-study",
            Experiment::OrderFit => "order-fit",
            Experiment::DetermCheck => "determ-check",
            Experiment::Sweep => "sweep",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub spot: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strike: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maturity: Option<f64>,
    /// Physical drift; carried through to the manifest, unused in pricing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
}

impl MarketConfig {
    pub fn build(&self, section: &str) -> Result<MarketParams> {
        let strike = self
            .strike
            .with_context(|| format!("{section}: market.strike is required"))?;
        let rate = self
            .rate
            .with_context(|| format!("{section}: market.rate is required"))?;
        let maturity = self
            .maturity
            .with_context(|| format!("{section}: market.maturity is required"))?;
        Ok(MarketParams::new(
            self.spot,
            strike,
            rate,
            maturity,
            self.drift.unwrap_or(0.0),
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OuConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub y0: f64,
}

impl OuConfig {
    pub fn build(&self, section: &str) -> Result<OUParams> {
        let alpha = self
            .alpha
            .with_context(|| format!("{section}: ou.alpha is required"))?;
        let k = self.k.with_context(|| format!("{section}: ou.k is required"))?;
        Ok(OUParams::new(alpha, k, self.y0)?)
    }

    pub fn build_with_alpha(&self, alpha: f64, section: &str) -> Result<OUParams> {
        let k = self.k.with_context(|| format!("{section}: ou.k is required"))?;
        Ok(OUParams::new(alpha, k, self.y0)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum VolConfig {
    AbsAffine { a: f64, b: f64 },
    ExpShift { c: f64 },
}

impl VolConfig {
    pub fn build(&self) -> Result<VolFunction> {
        Ok(match *self {
            VolConfig::AbsAffine { a, b } => VolFunction::abs_affine(a, b)?,
            VolConfig::ExpShift { c } => VolFunction::exp_shift(c)?,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            VolConfig::AbsAffine { .. } => "abs-affine",
            VolConfig::ExpShift { .. } => "exp-shift",
        }
    }

    /// (a, b, c) as CSV fields, empty where not applicable.
    pub fn csv_fields(&self) -> (String, String, String) {
        match *self {
            VolConfig::AbsAffine { a, b } => (fmt_f64(a), fmt_f64(b), String::new()),
            VolConfig::ExpShift { c } => (String::new(), String::new(), fmt_f64(c)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

impl GridConfig {
    pub fn build(&self, maturity: f64) -> Result<GridSpec> {
        match (self.dt, self.m) {
            (Some(dt), None) => Ok(GridSpec::from_dt(maturity, dt)?),
            (None, Some(m)) => Ok(GridSpec::new(maturity, m)?),
            _ => bail!("grid: exactly one of grid.dt / grid.m must be set"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub dt_list: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorsConfig {
    pub fine_dt: f64,
    pub coarse_factors: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    SigmaBar,
    Price,
    EmVsExact,
}

impl fmt::Display for FitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FitKind::SigmaBar => "sigma-bar",
            FitKind::Price => "price",
            FitKind::EmVsExact => "em-vs-exact",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderConfig {
    pub fits: Vec<FitKind>,
    pub m_ladder: Vec<usize>,
    /// Ladder for the coupled Euler-vs-exact fit; defaults to `m_ladder`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub em_ladder: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetermScenario {
    pub rate: f64,
    pub strike: f64,
    pub a: f64,
    pub b: f64,
}

/// Deterministic-volatility validation grid. Defaults reproduce the
/// reference table: three (rate, strike, a, b) scenarios crossed with three
/// maturities, two reversion speeds, and both sigma^2 families.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetermConfig {
    pub dt: f64,
    pub maturities: Vec<f64>,
    pub alphas: Vec<f64>,
    pub exp_shift: f64,
    pub scenario: Vec<DetermScenario>,
}

impl Default for DetermConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            maturities: vec![0.25, 0.5, 1.0],
            alphas: vec![1.0, 100.0],
            exp_shift: 0.2,
            scenario: vec![
                DetermScenario { rate: 0.0, strike: 0.8, a: 1.0, b: 0.0 },
                DetermScenario { rate: 0.01, strike: 1.0, a: 1.0, b: 0.2 },
                DetermScenario { rate: 0.02, strike: 1.2, a: 1.0, b: 1.0 },
            ],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepScenario {
    pub rate: f64,
    pub strike: f64,
    pub vol: VolConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepExclude {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maturity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strike: Option<f64>,
}

impl SweepExclude {
    pub fn matches(&self, maturity: f64, k: f64, alpha: f64, rate: f64, strike: f64) -> bool {
        fn hit(field: Option<f64>, v: f64) -> bool {
            field.is_none_or(|x| x == v)
        }
        hit(self.maturity, maturity)
            && hit(self.k, k)
            && hit(self.alpha, alpha)
            && hit(self.rate, rate)
            && hit(self.strike, strike)
    }

    pub fn is_empty(&self) -> bool {
        self.maturity.is_none()
            && self.k.is_none()
            && self.alpha.is_none()
            && self.rate.is_none()
            && self.strike.is_none()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub maturities: Vec<f64>,
    pub ks: Vec<f64>,
    pub alphas: Vec<f64>,
    pub scenario: Vec<SweepScenario>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<SweepExclude>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub market: MarketConfig,
    pub ou: OuConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vol: Option<VolConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "is_default_output")]
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub errors: Option<ErrorsConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub determ: Option<DetermConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "is_default_provenance")]
    pub provenance: Provenance,
}

fn is_default_output(o: &OutputConfig) -> bool {
    o.dir.is_none()
}

fn is_default_provenance(p: &Provenance) -> bool {
    p.version.is_none()
}

impl RunConfig {
    pub fn vol(&self) -> Result<&VolConfig> {
        self.vol
            .as_ref()
            .context("this experiment requires a [vol] section")
    }

    pub fn mc(&self) -> Result<&McConfig> {
        self.mc
            .as_ref()
            .context("this experiment requires an [mc] section")
    }
}

/// Parses a config file, applies `--set` overrides onto the raw TOML tree,
/// then deserializes with unknown keys rejected.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut tree: toml::Value = text
        .parse()
        .with_context(|| format!("cannot parse {} as TOML", path.display()))?;
    for spec in overrides {
        apply_override(&mut tree, spec)?;
    }
    let config: RunConfig = tree
        .try_into()
        .context("config does not match the expected schema")?;
    Ok(config)
}

/// Applies one `dotted.key=value` override, creating tables along the path.
fn apply_override(tree: &mut toml::Value, spec: &str) -> Result<()> {
    let (key, raw_value) = spec
        .split_once('=')
        .with_context(|| format!("--set expects key=value, got '{spec}'"))?;
    let value = parse_override_value(raw_value.trim())?;
    let segments: Vec<&str> = key.trim().split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        bail!("--set key '{key}' has an empty path segment");
    }
    let mut node = tree;
    for segment in &segments[..segments.len() - 1] {
        node = node
            .as_table_mut()
            .with_context(|| format!("--set {key}: '{segment}' is not a table"))?
            .entry(segment.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    node.as_table_mut()
        .with_context(|| format!("--set {key}: parent is not a table"))?
        .insert(segments[segments.len() - 1].to_string(), value);
    Ok(())
}

/// Interprets the value as TOML (numbers, bools, arrays, quoted strings);
/// bare words fall back to strings.
fn parse_override_value(raw: &str) -> Result<toml::Value> {
    let doc = format!("v = {raw}");
    if let Ok(table) = doc.parse::<toml::Table>() {
        if let Some(v) = table.get("v") {
            return Ok(v.clone());
        }
    }
    Ok(toml::Value::String(raw.to_string()))
}

/// Full-precision float formatting for CSV fields (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

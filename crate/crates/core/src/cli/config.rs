//! TOML experiment configuration. Unknown keys are rejected; defaults are
//! filled in so the resolved file written next to the outputs reproduces the
//! run on its own.

use crate::diagonal::MatrixNorm;
use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Grid};
use crate::solver::{DiffusionModel, Scheme, SolverConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const CONFIG_VERSION: &str = "1";

fn default_version() -> String {
    CONFIG_VERSION.to_string()
}
fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub bc: BoundaryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    #[serde(default)]
    pub outputs: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bmo: Option<BmoSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gnbmo: Option<GnbmoSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnose: Option<DiagnoseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonalize: Option<DiagonalizeSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(rename = "N")]
    pub dim: usize,
    pub extents: Vec<f64>,
    pub cells: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelPreset {
    Heat,
    PorousMedia,
    SkewPorous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub preset: ModelPreset,
    #[serde(default)]
    pub k: f64,
    #[serde(default = "one_usize")]
    pub m: usize,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub skew: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "one_usize")]
    pub stride: usize,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_tolerance() -> f64 {
    1e-13
}
fn default_max_iterations() -> usize {
    20_000
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    /// `offset + amplitude·(1 − |x − c|²/width²)₊²` in every component
    Bump,
    /// `offset + amplitude·Π cos(π x_d / L_d)`
    Cosine,
    Constant,
    /// Seeded sum of `modes` cosine modes around `offset`
    RandomSmooth,
    /// Field read from `path`
    Snapshot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: InitialKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

fn default_width() -> f64 {
    0.25
}
fn default_modes() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_snapshots")]
    pub snapshots: String,
    #[serde(default = "default_diagnostics")]
    pub diagnostics: String,
}

fn default_snapshots() -> String {
    "snapshots".into()
}
fn default_diagnostics() -> String {
    "diagnostics.csv".into()
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { snapshots: default_snapshots(), diagnostics: default_diagnostics() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BmoSection {
    pub input: String,
    /// Restricts cubes to the box of this half side around `center`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_side: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnbmoSection {
    #[serde(default = "default_corpus")]
    pub corpus_size: usize,
    #[serde(default = "default_ks")]
    pub k: Vec<f64>,
    #[serde(default = "default_ps")]
    pub p: Vec<f64>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_star: Option<f64>,
    #[serde(default)]
    pub epsilon: f64,
}

fn default_corpus() -> usize {
    20
}
fn default_ks() -> Vec<f64> {
    vec![1.0, 2.0, 3.0]
}
fn default_ps() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_radius() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSection {
    pub trajectory: String,
    #[serde(default = "default_exponents")]
    pub exponents: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "one")]
    pub c_n: f64,
    #[serde(default = "one")]
    pub c_star: f64,
}

fn default_exponents() -> Vec<f64> {
    vec![2.0, 4.0]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiPreset {
    ScalarPower,
    VectorPower,
    ComponentPower,
    Square,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `g = γ`
    #[default]
    Constant,
    /// `g = γ sin(2πt) cos(π x₁ / L₁)`
    Oscillating,
    /// `g = γ e^{−t}`
    Decaying,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(default)]
    pub kind: PotentialKind,
    #[serde(default)]
    pub gamma: f64,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { kind: PotentialKind::Constant, gamma: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessSection {
    pub phi: PhiPreset,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default = "one_usize")]
    pub m: usize,
    #[serde(default)]
    pub g: PotentialSection,
    /// `v₀ = u₀ + δ (1 + cos(π x₁ / L₁))/2`
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_vmax")]
    pub v_max: f64,
}

fn default_delta() -> f64 {
    0.1
}
fn default_vmax() -> f64 {
    2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BPreset {
    Constant,
    Power,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeRange {
    pub r_min: f64,
    pub r_max: f64,
    pub radial: usize,
    pub angular: usize,
}

impl Default for ProbeRange {
    fn default() -> Self {
        Self { r_min: 0.1, r_max: 2.0, radial: 8, angular: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalizeSection {
    pub preset: BPreset,
    #[serde(default = "one")]
    pub l: f64,
    /// Rows of `B₀`.
    pub b0: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(rename = "T", default = "default_t")]
    pub t: f64,
    #[serde(default)]
    pub probes: ProbeRange,
    #[serde(default)]
    pub norm: MatrixNorm,
}

fn default_p() -> f64 {
    2.0
}
fn default_t() -> f64 {
    0.5
}

impl ExperimentConfig {
    /// Canonical TOML of the resolved configuration.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of [`Self::to_toml`], hex encoded.
    pub fn hash(&self) -> Result<String> {
        let text = self.to_toml()?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }

    pub fn require<'a, T>(section: &'a Option<T>, name: &str, command: &str) -> Result<&'a T> {
        section
            .as_ref()
            .ok_or_else(|| Error::Config(format!("missing required section [{name}] for `{command}`")))
    }

    pub fn grid(&self, command: &str) -> Result<Grid> {
        let d = Self::require(&self.domain, "domain", command)?;
        if d.extents.len() != d.dim || d.cells.len() != d.dim {
            return Err(Error::Config(format!(
                "[domain]: N = {} but {} extents and {} cell counts",
                d.dim,
                d.extents.len(),
                d.cells.len()
            )));
        }
        Grid::new(&d.extents, &d.cells, self.bc)
    }

    pub fn solver(&self, command: &str) -> Result<SolverConfig> {
        let t = Self::require(&self.time, "time", command)?;
        let eps = self.model.as_ref().map(|m| m.epsilon).unwrap_or(0.0);
        let cfg = SolverConfig {
            epsilon: eps,
            dt: t.dt,
            horizon: t.horizon,
            scheme: t.scheme,
            boundary: self.bc,
            tolerance: t.tolerance,
            max_iterations: t.max_iterations,
            stride: t.stride,
            gradient_exponents: vec![2.0, 4.0],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Diffusion model from `[model]`; `ε` is applied by the solver.
    pub fn diffusion_model(&self, command: &str) -> Result<DiffusionModel> {
        let m = Self::require(&self.model, "model", command)?;
        if m.m == 0 {
            return Err(Error::Config("[model]: m must be at least 1".into()));
        }
        Ok(match m.preset {
            ModelPreset::Heat => DiffusionModel::heat(m.m),
            ModelPreset::PorousMedia => DiffusionModel::porous_media(m.m, m.k),
            ModelPreset::SkewPorous => DiffusionModel::skew_porous(m.m, m.k, m.skew),
        })
    }
}

/// Parses TOML text; errors carry the line and column from the parser.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if cfg.version != CONFIG_VERSION {
        return Err(Error::Config(format!("unsupported config version '{}'", cfg.version)));
    }
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

//! Experiment configuration files (TOML).
//!
//! Group, measure and family strings inside a config use the grammars in
//! [`super::grammar`]. See `configs/` for one file per packaged experiment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::measures::{FiniteMeasure, MeasureFamily, Weight};

use super::grammar::{parse_family, parse_group_spec, parse_measure_source};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    EscapeContinuity,
    EscapeDiscontinuity,
    EntropyLamplighter,
    EntropyProduct,
    ExpectedVisits,
    MagnusSuite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSettings {
    /// Exact convolution ladders run to this index.
    pub n_max: usize,
    /// Support cap per convolution power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    /// Radial free-group ladder length (entropy-product only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_n_max: Option<usize>,
    /// Index at which the radial `d_n` plateau is read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_at: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plateau_tol: Option<f64>,
    /// Radial ladder prefix also checked in exact arithmetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_exact_n_max: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeSettings {
    /// Nested Monte Carlo horizons, read off the same sample paths.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub horizons: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Width target of the rigorous series interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
    /// Per-k estimates at the last horizon must fall below this value for
    /// every `k` in `threshold_ks`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub threshold_ks: Vec<u64>,
    /// The lower end of the limit's rigorous interval must exceed this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_floor: Option<f64>,
    /// Range-rate cross-check (expected-visits only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnusSettings {
    pub ranks: Vec<usize>,
    pub levels: Vec<usize>,
    /// Random word pairs per (rank, level) for the homomorphism check.
    pub pairs: usize,
    pub max_len: usize,
    /// Random derived-series words per (rank, level) for the kernel check.
    pub derived_words: usize,
    pub budget: usize,
    /// Base measure on `S(d, m)` for the perturbation ladders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb_group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb_base: Option<String>,
    /// Fixed-support perturbations of the base measure.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbations: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub kind: ExperimentKind,
    /// Group for measure literals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// Family references, evaluated at every `k` in `grid`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub families: Vec<String>,
    /// Measure literals or fixed family members.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub measures: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<u64>,
    /// Also evaluate each family's limit measure.
    #[serde(default = "yes")]
    pub include_limit: bool,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escape: Option<EscapeSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnus: Option<MagnusSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSettings>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn group_spec(&self) -> Result<Option<GroupSpec>> {
        self.group.as_deref().map(parse_group_spec).transpose()
    }

    pub fn parsed_families<W: Weight>(&self) -> Result<Vec<MeasureFamily<W>>> {
        self.families.iter().map(|f| Ok(parse_family::<W>(f)?.family)).collect()
    }

    pub fn parsed_measures<W: Weight>(&self) -> Result<Vec<FiniteMeasure<W>>> {
        let spec = self.group_spec()?;
        self.measures.iter().map(|m| parse_measure_source::<W>(spec.as_ref(), m)).collect()
    }

    pub fn uses_monte_carlo(&self) -> bool {
        match self.kind {
            ExperimentKind::EscapeDiscontinuity | ExperimentKind::ExpectedVisits => true,
            ExperimentKind::MagnusSuite => true,
            _ => self.escape.as_ref().is_some_and(|e| !e.horizons.is_empty()),
        }
    }

    /// Checks that every string parses and that the settings the kind needs
    /// are present.
    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(invalid("experiment id is empty"));
        }
        self.group_spec()?;
        self.parsed_families::<f64>()?;
        self.parsed_measures::<f64>()?;
        if self.uses_monte_carlo() && self.seed.is_none() {
            return Err(invalid(format!("experiment {} uses random sampling and needs a seed", self.id)));
        }
        let needs_grid = matches!(
            self.kind,
            ExperimentKind::EscapeContinuity
                | ExperimentKind::EscapeDiscontinuity
                | ExperimentKind::EntropyLamplighter
                | ExperimentKind::EntropyProduct
        );
        if needs_grid {
            if self.families.is_empty() {
                return Err(invalid(format!("experiment {} needs at least one family", self.id)));
            }
            if self.grid.is_empty() {
                return Err(invalid(format!("experiment {} has an empty grid", self.id)));
            }
            if self.grid.contains(&0) {
                return Err(invalid("grid values k must be >= 1"));
            }
        }
        let ladder = || self.ladder.as_ref().ok_or_else(|| invalid(format!("experiment {} needs [ladder]", self.id)));
        let escape = || self.escape.as_ref().ok_or_else(|| invalid(format!("experiment {} needs [escape]", self.id)));
        match self.kind {
            ExperimentKind::EscapeContinuity => {
                ladder()?;
                escape()?.tol.ok_or_else(|| invalid("escape.tol is required"))?;
            }
            ExperimentKind::EscapeDiscontinuity => {
                ladder()?;
                let e = escape()?;
                if e.horizons.is_empty() || e.horizons.contains(&0) {
                    return Err(invalid("escape.horizons must be nonempty and positive"));
                }
                e.samples.ok_or_else(|| invalid("escape.samples is required"))?;
                e.tol.ok_or_else(|| invalid("escape.tol is required"))?;
            }
            ExperimentKind::EntropyLamplighter => {
                ladder()?;
            }
            ExperimentKind::EntropyProduct => {
                ladder()?;
            }
            ExperimentKind::ExpectedVisits => {
                if self.measures.is_empty() {
                    return Err(invalid("expected-visits needs at least one measure"));
                }
                let e = escape()?;
                e.tol.ok_or_else(|| invalid("escape.tol is required"))?;
            }
            ExperimentKind::MagnusSuite => {
                let m = self.magnus.as_ref().ok_or_else(|| invalid("magnus-suite needs [magnus]"))?;
                if m.ranks.is_empty() || m.levels.is_empty() {
                    return Err(invalid("magnus.ranks and magnus.levels must be nonempty"));
                }
                if m.levels.contains(&0) || m.ranks.contains(&0) {
                    return Err(invalid("magnus ranks and levels must be >= 1"));
                }
                if !m.perturbations.is_empty() {
                    ladder()?;
                    let g = m.perturb_group.as_deref().ok_or_else(|| invalid("magnus.perturb_group is required"))?;
                    let spec = parse_group_spec(g)?;
                    let base = m.perturb_base.as_deref().ok_or_else(|| invalid("magnus.perturb_base is required"))?;
                    parse_measure_source::<f64>(Some(&spec), base)?;
                    for p in &m.perturbations {
                        parse_measure_source::<f64>(Some(&spec), p)?;
                    }
                }
            }
        }
        Ok(())
    }
}

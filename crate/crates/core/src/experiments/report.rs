use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::measures::{Entropy, FiniteMeasure, Weight};
use crate::walk::{entropy_ladder, EntropyLadder, EscapeEstimate, InvariantReport, LadderRow};

use super::config::{ExperimentConfig, Format};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WALKLAB_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "walklab-out";

/// Ladder rows plus invariant outcome. Entropy estimates are always
/// reported as the pair (`diff`, `ratio`), never as a bare number.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderSummary {
    pub label: String,
    pub exact: bool,
    pub n_max: usize,
    pub rows: Vec<LadderRow>,
    pub invariants: InvariantReport,
}

impl LadderSummary {
    pub fn of<H: Entropy>(ladder: &EntropyLadder<H>, exact: bool) -> Result<Self> {
        Ok(LadderSummary {
            label: ladder.label().to_string(),
            exact,
            n_max: ladder.n_max(),
            rows: ladder.rows(),
            invariants: ladder.check_invariants()?,
        })
    }

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.15}")).unwrap_or_default();
        let mut out = String::from("n,H,ratio,diff\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.15},{},{}\n", r.n, r.h, opt(r.ratio), opt(r.diff)));
        }
        out
    }
}

/// Exact (or float) ladder of `mu` with its summary.
pub fn ladder_with_summary<W: Weight>(
    label: &str,
    mu: &FiniteMeasure<W>,
    n_max: usize,
    cap: usize,
) -> Result<(EntropyLadder<W::H>, LadderSummary)> {
    let ladder = EntropyLadder::from_values(label, entropy_ladder(mu, n_max, cap)?.entropies().to_vec());
    let summary = LadderSummary::of(&ladder, W::EXACT)?;
    Ok((ladder, summary))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GridPoint {
    pub index: usize,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// `None` for the limit measure or a standalone measure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub group: String,
    pub measure: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub escape: Vec<EscapeEstimate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ladders: Vec<LadderSummary>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expectation {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Set when the tolerance is an engineering choice rather than a
    /// mathematical consequence.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub engineering: bool,
}

impl Expectation {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Expectation { name: name.into(), passed, detail: detail.into(), engineering: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub id: String,
    pub title: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub points: Vec<GridPoint>,
    pub expectations: Vec<Expectation>,
    pub passed: bool,
    /// Excluded from replay comparisons.
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// JSON without the timing field; identical for identical configs.
    pub fn replay_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("wall_clock_seconds");
        }
        serde_json::to_string_pretty(&v).expect("values serialize")
    }

    pub fn failed(&self) -> impl Iterator<Item = &Expectation> {
        self.expectations.iter().filter(|e| !e.passed)
    }

    /// Writes `<id>.json` and one CSV per ladder into `dir`; returns the
    /// paths written.
    pub fn write(&self, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let stem = slug(&self.id);
        if formats.contains(&Format::Json) {
            let p = dir.join(format!("{stem}.json"));
            std::fs::write(&p, self.to_json())?;
            written.push(p);
        }
        if formats.contains(&Format::Csv) {
            for point in &self.points {
                for (j, l) in point.ladders.iter().enumerate() {
                    let p = dir.join(format!("{stem}-{:02}-{}-{j}.csv", point.index, slug(&point.label)));
                    std::fs::write(&p, l.to_csv())?;
                    written.push(p);
                }
            }
        }
        Ok(written)
    }
}

/// Output directory: explicit choice, then the config, then
/// `WALKLAB_OUT_DIR`, then `./walklab-out`.
pub fn resolve_out_dir(explicit: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(d) = config.output.as_ref().and_then(|o| o.dir.as_ref()) {
        return PathBuf::from(d);
    }
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Lowercase alphanumerics and dashes.
pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

/// The packaged experiments, as `(id, TOML source)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("E1", include_str!("../../configs/e1.toml")),
    ("E2", include_str!("../../configs/e2.toml")),
    ("E3", include_str!("../../configs/e3.toml")),
    ("E4", include_str!("../../configs/e4.toml")),
    ("E5", include_str!("../../configs/e5.toml")),
    ("E6", include_str!("../../configs/e6.toml")),
    ("E7", include_str!("../../configs/e7.toml")),
];

pub fn preset_ids() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(id, _)| *id)
}

/// Packaged config by id, case-insensitive.
pub fn preset(id: &str) -> Result<ExperimentConfig> {
    let (_, text) = PRESETS
        .iter()
        .find(|(p, _)| p.eq_ignore_ascii_case(id))
        .ok_or_else(|| Error::InvalidParameter(format!("unknown experiment `{id}`")))?;
    ExperimentConfig::from_toml(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for id in preset_ids() {
            let cfg = preset(id).unwrap();
            assert_eq!(cfg.id, id);
        }
        assert!(preset("e4").is_ok());
        assert!(preset("E9").is_err());
    }

    #[test]
    fn config_round_trips() {
        for id in preset_ids() {
            let cfg = preset(id).unwrap();
            assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        }
    }

    #[test]
    fn validation() {
        let mut cfg = preset("E2").unwrap();
        cfg.seed = None;
        assert!(cfg.validate().is_err());
        let mut cfg = preset("E1").unwrap();
        cfg.grid.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = preset("E1").unwrap();
        cfg.families.push("nope(p=1)".into());
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_toml("id = \"x\"\nkind = \"escape-continuity\"\nbogus = 1").is_err());
    }
}

use walklab::experiments::{preset, run_experiment, ExperimentConfig};

const SMALL: &str = r#"
id = "replay"
title = "replay check"
kind = "escape-discontinuity"
families = ["bs11(p=3/4)", "z-drift"]
grid = [1, 2]
include_limit = true
mode = "exact"
seed = 11

[ladder]
n_max = 3

[escape]
horizons = [10, 100, 1000]
samples = 400
tol = 1e-2
max_terms = 200000
threshold = 1.0
threshold_ks = [1]
limit_floor = 0.0
"#;

fn replay_in_pool(cfg: &ExperimentConfig, threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run_experiment(cfg).unwrap().replay_json())
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts() {
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let one = replay_in_pool(&cfg, 1);
    assert_eq!(one, replay_in_pool(&cfg, 4));
    assert_eq!(one, replay_in_pool(&cfg, 4));
    assert!(!one.contains("wall_clock"));

    let mut other = cfg.clone();
    other.seed = Some(12);
    assert_ne!(one, replay_in_pool(&other, 4));
}

#[test]
fn config_round_trips_through_toml() {
    for id in ["E1", "E2", "E3", "E4", "E5", "E6", "E7"] {
        let cfg = preset(id).unwrap();
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg.to_toml(), back.to_toml());
    }
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let mut unseeded = cfg.clone();
    unseeded.seed = None;
    assert!(run_experiment(&unseeded).is_err());
    assert!(ExperimentConfig::from_toml(&SMALL.replace("seed = 11", "seed = 11\nbogus = 1")).is_err());
}

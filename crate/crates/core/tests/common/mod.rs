#![allow(dead_code)]

use std::path::{Path, PathBuf};

use patchbench::harness::{generator_for, run_experiment, ResolvedConfig, Run, RunConfig};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/replay")
}

/// The shipped replay config, optionally narrowed.
pub fn replay_config(benchmarks: Option<&[&str]>, n: Option<usize>) -> ResolvedConfig {
    let (mut raw, base) = RunConfig::load(&corpus_dir().join("config.json")).unwrap();
    if let Some(b) = benchmarks {
        raw.benchmarks = b.iter().map(|s| s.to_string()).collect();
    }
    if let Some(n) = n {
        raw.n = n;
    }
    raw.resolve(&base).unwrap()
}

pub fn run_replay(config: &ResolvedConfig, dir: &Path) -> Run {
    let generator = generator_for(config).unwrap();
    run_experiment(config, dir, &generator).unwrap()
}

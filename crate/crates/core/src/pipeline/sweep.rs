use super::output::write_outputs;
use super::run::{run_scenario, RunOptions};
use super::scenario::Scenario;
use crate::error::Result;
use crate::par::map_slice;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub scenario: PathBuf,
    pub config_hash: Option<String>,
    pub exit_code: i32,
    pub error: Option<String>,
}

/// Writes one copy of `template` per seed into `dir`, each with its own
/// output directory. Returns the scenario paths in seed order.
pub fn generate_sweep(template: &Scenario, seeds: &[u64], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut s = template.clone().with_seed(seed);
        s.output_dir = dir.join(format!("run_{seed}"));
        let path = dir.join(format!("scenario_{seed}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&s).expect("scenario serializes") + "\n")?;
        paths.push(path);
    }
    Ok(paths)
}

/// `*.json` scenario files directly inside `dir`, sorted by name.
pub fn scenarios_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.is_file())
        .collect();
    out.sort();
    Ok(out)
}

/// Runs the scenarios concurrently, then writes their outputs one at a time.
pub fn run_sweep(paths: &[PathBuf], opts: &RunOptions) -> Vec<SweepEntry> {
    // per-scenario output directories come from the files themselves
    let opts = RunOptions { out_dir: None, ..opts.clone() };
    let reports = map_slice(opts.exec, paths, |p| Scenario::load(p).and_then(|s| run_scenario(s, &opts)));
    paths
        .iter()
        .zip(reports)
        .map(|(path, r)| match r.and_then(|rep| write_outputs(&rep).map(|_| rep)) {
            Ok(rep) => SweepEntry {
                scenario: path.clone(),
                config_hash: Some(rep.config_hash.clone()),
                exit_code: rep.exit_code,
                error: None,
            },
            Err(e) => {
                SweepEntry { scenario: path.clone(), config_hash: None, exit_code: e.exit_code(), error: Some(e.to_string()) }
            }
        })
        .collect()
}

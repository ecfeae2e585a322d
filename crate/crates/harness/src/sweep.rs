//! Vehicle-count sweep: trains one learner per (N, seed) cell, then
//! evaluates every agent on that cell and summarizes mean step energy.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use vanet_aoi_core::SimError;

use crate::config::ExperimentConfig;
use crate::metrics::MetricsWriter;
use crate::run::{self, RunStats};

pub const AGENTS: [&str; 5] =
    ["ddpg", "equal-bandwidth", "random-refresh", "random-offload", "popular-refresh"];

pub const SUMMARY_HEADER: &str = "n_vehicles,seed,agent,mean_step_energy,mean_reward";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub n_vehicles: usize,
    pub seed: u64,
    pub agent: String,
    pub stats: RunStats,
}

/// Runs the full grid and writes one metrics file per (N, seed, agent)
/// plus `summary.csv` in `out_dir`.
pub fn sweep(
    base: &ExperimentConfig,
    vehicle_counts: &[usize],
    seeds: &[u64],
    out_dir: &Path,
) -> Result<Vec<SweepCell>, SimError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| SimError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut cells = Vec::new();
    for &n in vehicle_counts {
        for &seed in seeds {
            let mut cfg = base.clone();
            cfg.scenario.n_vehicles = n;
            cfg.seed = seed;
            cfg.validate()?;
            let actor = run::train_ddpg_selected(
                &cfg,
                cfg.sweep_train_episodes,
                cfg.sweep_snapshot_every,
                cfg.sweep_validation_episodes,
            )?;
            for name in AGENTS {
                let out = out_dir.join(format!("eval_{name}_n{n}_seed{seed}.csv"));
                let mut writer = MetricsWriter::create(&out)?;
                let stats = match name {
                    "ddpg" => run::eval_actor(
                        &cfg,
                        &actor,
                        false,
                        cfg.sweep_eval_episodes,
                        Some(&mut writer),
                    )?,
                    "equal-bandwidth" => run::eval_actor(
                        &cfg,
                        &actor,
                        true,
                        cfg.sweep_eval_episodes,
                        Some(&mut writer),
                    )?,
                    _ => run::run_heuristic(&cfg, name, cfg.sweep_eval_episodes, Some(&mut writer))?,
                };
                writer.finish()?;
                cells.push(SweepCell { n_vehicles: n, seed, agent: name.into(), stats });
            }
        }
    }
    write_summary(out_dir, &cells)?;
    Ok(cells)
}

fn write_summary(out_dir: &Path, cells: &[SweepCell]) -> Result<(), SimError> {
    let path = out_dir.join("summary.csv");
    let mut file = fs::File::create(&path)
        .map_err(|e| SimError::Config(format!("cannot write {}: {e}", path.display())))?;
    let mut text = String::from(SUMMARY_HEADER);
    text.push('\n');
    for c in cells {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            c.n_vehicles, c.seed, c.agent, c.stats.mean_step_energy, c.stats.mean_reward
        ));
    }
    file.write_all(text.as_bytes())
        .map_err(|e| SimError::Config(format!("summary write failed: {e}")))
}

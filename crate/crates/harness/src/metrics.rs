//! Deterministic CSV export: per-step rows plus a per-episode summary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use vanet_aoi_core::SimError;

pub const STEP_HEADER: &str = "episode,step,reward,energy_total,energy_cache,energy_local,energy_offload,mean_status_age,age_violations,deferrals";
pub const EPISODE_HEADER: &str =
    "episode,mean_reward,mean_energy_total,mean_status_age,age_violations,deferrals";

/// One metrics line per environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub episode: usize,
    pub step: usize,
    pub reward: f64,
    pub energy_total: f64,
    pub energy_cache: f64,
    pub energy_local: f64,
    pub energy_offload: f64,
    pub mean_status_age: f64,
    pub age_violations: usize,
    pub deferrals: usize,
}

/// Shortest round-trip decimal; identical inputs give identical bytes.
fn fmt(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

impl MetricsRow {
    fn write_line(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            self.episode,
            self.step,
            fmt(self.reward),
            fmt(self.energy_total),
            fmt(self.energy_cache),
            fmt(self.energy_local),
            fmt(self.energy_offload),
            fmt(self.mean_status_age),
            self.age_violations,
            self.deferrals
        )
    }
}

/// Streams step rows to `<out>` and episode summaries to the sibling
/// `<stem>.episodes.csv` file.
pub struct MetricsWriter {
    steps: BufWriter<File>,
    episodes: BufWriter<File>,
    episode_path: PathBuf,
    // accumulators for the open episode
    open_episode: usize,
    rows_in_episode: usize,
    reward_sum: f64,
    energy_sum: f64,
    age_sum: f64,
    violations: usize,
    deferrals: usize,
}

pub fn episode_summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("metrics");
    out.with_file_name(format!("{stem}.episodes.csv"))
}

impl MetricsWriter {
    pub fn create(out: &Path) -> Result<Self, SimError> {
        let io = |e: std::io::Error| SimError::Config(format!("cannot write {}: {e}", out.display()));
        let mut steps = BufWriter::new(File::create(out).map_err(io)?);
        let episode_path = episode_summary_path(out);
        let mut episodes = BufWriter::new(File::create(&episode_path).map_err(io)?);
        writeln!(steps, "{STEP_HEADER}").map_err(io)?;
        writeln!(episodes, "{EPISODE_HEADER}").map_err(io)?;
        Ok(Self {
            steps,
            episodes,
            episode_path,
            open_episode: 0,
            rows_in_episode: 0,
            reward_sum: 0.0,
            energy_sum: 0.0,
            age_sum: 0.0,
            violations: 0,
            deferrals: 0,
        })
    }

    pub fn episode_path(&self) -> &Path {
        &self.episode_path
    }

    pub fn push(&mut self, row: &MetricsRow) -> Result<(), SimError> {
        if row.episode != self.open_episode && self.rows_in_episode > 0 {
            self.flush_episode()?;
        }
        self.open_episode = row.episode;
        row.write_line(&mut self.steps)
            .map_err(|e| SimError::Config(format!("metrics write failed: {e}")))?;
        self.rows_in_episode += 1;
        self.reward_sum += row.reward;
        self.energy_sum += row.energy_total;
        self.age_sum += row.mean_status_age;
        self.violations += row.age_violations;
        self.deferrals += row.deferrals;
        Ok(())
    }

    fn flush_episode(&mut self) -> Result<(), SimError> {
        let n = self.rows_in_episode as f64;
        writeln!(
            self.episodes,
            "{},{},{},{},{},{}",
            self.open_episode,
            fmt(self.reward_sum / n),
            fmt(self.energy_sum / n),
            fmt(self.age_sum / n),
            self.violations,
            self.deferrals
        )
        .map_err(|e| SimError::Config(format!("metrics write failed: {e}")))?;
        self.rows_in_episode = 0;
        self.reward_sum = 0.0;
        self.energy_sum = 0.0;
        self.age_sum = 0.0;
        self.violations = 0;
        self.deferrals = 0;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), SimError> {
        if self.rows_in_episode > 0 {
            self.flush_episode()?;
        }
        let io = |e: std::io::Error| SimError::Config(format!("metrics flush failed: {e}"));
        self.steps.flush().map_err(io)?;
        self.episodes.flush().map_err(io)?;
        Ok(())
    }
}

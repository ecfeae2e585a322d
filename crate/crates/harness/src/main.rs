use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vanet_aoi_sim::checkpoint;
use vanet_aoi_sim::config::ExperimentConfig;
use vanet_aoi_sim::run;
use vanet_aoi_sim::sweep;

#[derive(Parser)]
#[command(name = "vanet-aoi", about = "UAV-assisted vehicular edge simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config file (flat key=value); defaults apply if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value overrides, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(|e| e.to_string())?,
            None => ExperimentConfig::default(),
        };
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| format!("--set expects KEY=VALUE, got {pair:?}"))?;
            cfg.set(k.trim(), v.trim()).map_err(|e| e.to_string())?;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one agent and write per-step metrics.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// ddpg | equal-bandwidth | random-refresh | random-offload | popular-refresh
        #[arg(long)]
        agent: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        episodes: Option<usize>,
        /// Step-metrics CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Restore learner weights instead of training.
        #[arg(long)]
        load_checkpoint: Option<PathBuf>,
        /// Save learner weights after the run.
        #[arg(long)]
        save_checkpoint: Option<PathBuf>,
    },
    /// Train and evaluate every agent across vehicle counts and seeds.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated vehicle counts, e.g. 10,20,30,40,50.
        #[arg(long)]
        vehicles: String,
        /// Seeds as a..b range or comma list, e.g. 1..5 or 1,2,3.
        #[arg(long)]
        seeds: String,
        /// Output directory for per-cell metrics and summary.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train-and-save or load-and-verify learner weights.
    Checkpoint {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        episodes: Option<usize>,
        /// Train per the config, then save weights here.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Load weights from here and report their shape.
        #[arg(long)]
        load: Option<PathBuf>,
    },
}

fn parse_list(text: &str, what: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad {what} range {text:?}"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad {what} range {text:?}"))?;
        if a > b {
            return Err(format!("bad {what} range {text:?}"));
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| format!("bad {what} list {text:?}")))
        .collect()
}

fn main_inner() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            agent,
            seed,
            episodes,
            out,
            load_checkpoint,
            save_checkpoint,
        } => {
            let mut cfg = config.load()?;
            if let Some(agent) = agent {
                cfg.agent = agent;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(episodes) = episodes {
                cfg.episodes = episodes;
            }
            let stats = run::simulate(
                &cfg,
                &out,
                load_checkpoint.as_deref(),
                save_checkpoint.as_deref(),
            )
            .map_err(|e| e.to_string())?;
            println!(
                "simulate agent={} episodes={} steps={} mean_reward={} mean_step_energy={}",
                cfg.agent, cfg.episodes, stats.steps, stats.mean_reward, stats.mean_step_energy
            );
            Ok(())
        }
        Command::Sweep { config, vehicles, seeds, out } => {
            let cfg = config.load()?;
            let vehicles: Vec<usize> = parse_list(&vehicles, "vehicles")?
                .into_iter()
                .map(|v| v as usize)
                .collect();
            let seeds = parse_list(&seeds, "seeds")?;
            let cells =
                sweep::sweep(&cfg, &vehicles, &seeds, &out).map_err(|e| e.to_string())?;
            println!("sweep cells={} out={}", cells.len(), out.display());
            Ok(())
        }
        Command::Checkpoint { config, seed, episodes, save, load } => {
            let mut cfg = config.load()?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(episodes) = episodes {
                cfg.episodes = episodes;
            }
            match (save, load) {
                (Some(save), None) => {
                    let (agent, stats) =
                        run::train_ddpg(&cfg, cfg.episodes, None).map_err(|e| e.to_string())?;
                    checkpoint::save_agent(&save, &agent).map_err(|e| e.to_string())?;
                    println!(
                        "checkpoint saved path={} mean_reward={}",
                        save.display(),
                        stats.mean_reward
                    );
                    Ok(())
                }
                (None, Some(load)) => {
                    let agent =
                        checkpoint::load_agent(&load, &cfg).map_err(|e| e.to_string())?;
                    println!(
                        "checkpoint loaded path={} state_dim={} action_dim={} actor_params={}",
                        load.display(),
                        agent.state_dim(),
                        agent.action_dim(),
                        agent.actor.param_count()
                    );
                    Ok(())
                }
                (Some(save), Some(load)) => {
                    let agent =
                        checkpoint::load_agent(&load, &cfg).map_err(|e| e.to_string())?;
                    checkpoint::save_agent(&save, &agent).map_err(|e| e.to_string())?;
                    println!("checkpoint copied from={} to={}", load.display(), save.display());
                    Ok(())
                }
                (None, None) => Err("checkpoint needs --save and/or --load".into()),
            }
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

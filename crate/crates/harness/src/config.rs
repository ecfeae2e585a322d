//! Flat key=value experiment configuration with CLI overrides.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use vanet_aoi_core::agent::Hyperparams;
use vanet_aoi_core::ScenarioConfig;
use vanet_aoi_core::SimError;

/// Everything one experiment needs: the scenario, the learner, and the
/// run shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub hyper: Hyperparams,
    pub episodes: usize,
    pub seed: u64,
    pub agent: String,
    /// Slot period of the popularity baseline's re-fetch cycle.
    pub refresh_period: u64,
    /// Episodes each sweep cell trains the learner before evaluation.
    pub sweep_train_episodes: usize,
    /// Episodes each sweep cell evaluates every agent.
    pub sweep_eval_episodes: usize,
    /// Actor snapshot period (episodes) for sweep checkpoint selection.
    pub sweep_snapshot_every: usize,
    /// Noise-free episodes per snapshot when scoring candidates.
    pub sweep_validation_episodes: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            hyper: Hyperparams::default(),
            episodes: 500,
            seed: 1,
            agent: "ddpg".into(),
            refresh_period: 5,
            sweep_train_episodes: 150,
            sweep_eval_episodes: 20,
            sweep_snapshot_every: 10,
            sweep_validation_episodes: 3,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(SimError::Config(format!(
                    "line {}: expected key = value, got {line:?}",
                    lineno + 1
                )));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.scenario.validate()?;
        self.hyper.validate()?;
        if self.refresh_period == 0 {
            return Err(SimError::Config("run.refresh_period must be > 0".into()));
        }
        Ok(())
    }

    /// Applies one dotted-key override. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SimError> {
        let bad = |what: &str| SimError::Config(format!("key {key}: invalid {what} {value:?}"));
        let f = || value.parse::<f64>().map_err(|_| bad("number"));
        let u = || value.parse::<usize>().map_err(|_| bad("integer"));
        let b = || value.parse::<bool>().map_err(|_| bad("boolean"));
        let s = &mut self.scenario;
        match key {
            "scenario.n_vehicles" => s.n_vehicles = u()?,
            "scenario.n_uavs" => s.n_uavs = u()?,
            "scenario.n_task_types" => s.n_task_types = u()?,
            "scenario.steps_per_episode" => {
                s.steps_per_episode = u()?;
                self.hyper.steps_per_episode = s.steps_per_episode;
            }
            "geometry.street_length" => s.geometry.street_length = f()?,
            "geometry.uav_height" => s.geometry.uav_height = f()?,
            "geometry.coverage_radius" => s.geometry.coverage_radius = f()?,
            "geometry.bs_x" => s.geometry.bs_position[0] = f()?,
            "geometry.bs_y" => s.geometry.bs_position[1] = f()?,
            "geometry.bs_z" => s.geometry.bs_position[2] = f()?,
            "geometry.slot_seconds" => s.geometry.slot_seconds = f()?,
            "geometry.vehicle_speed_min" => s.geometry.vehicle_speed_range[0] = f()?,
            "geometry.vehicle_speed_max" => s.geometry.vehicle_speed_range[1] = f()?,
            "geometry.uav_speed" => s.geometry.uav_speed = f()?,
            "geometry.lane_half_width" => s.geometry.lane_half_width = f()?,
            "channel.carrier_hz" => s.channel.carrier_hz = f()?,
            "channel.path_loss_exp" => s.channel.path_loss_exp = f()?,
            "channel.eta_los" => s.channel.eta_los = f()?,
            "channel.eta_nlos" => s.channel.eta_nlos = f()?,
            "channel.gamma_env" => s.channel.gamma_env = f()?,
            "channel.psi" => s.channel.psi = f()?,
            "channel.noise_watts" => s.channel.noise_watts = f()?,
            "channel.tx_power_watts" => s.channel.tx_power_watts = f()?,
            "channel.total_bandwidth_hz" => s.channel.total_bandwidth_hz = f()?,
            "compute.vehicle_cpu_min" => s.compute.vehicle_cpu_range[0] = f()?,
            "compute.vehicle_cpu_max" => s.compute.vehicle_cpu_range[1] = f()?,
            "compute.uav_cpu" => s.compute.uav_cpu = f()?,
            "compute.bs_cpu" => s.compute.bs_cpu = f()?,
            "compute.mu" => s.compute.mu = f()?,
            "tasks.p_gen" => s.tasks.p_gen = f()?,
            "tasks.zipf_exponent" => s.tasks.zipf_exponent = f()?,
            "tasks.upload_bits_min" => s.tasks.upload_bits_range[0] = f()?,
            "tasks.upload_bits_max" => s.tasks.upload_bits_range[1] = f()?,
            "tasks.cycles_min" => s.tasks.cycles_range[0] = f()?,
            "tasks.cycles_max" => s.tasks.cycles_range[1] = f()?,
            "tasks.input_bits_min" => s.tasks.input_bits_range[0] = f()?,
            "tasks.input_bits_max" => s.tasks.input_bits_range[1] = f()?,
            "cache.theta" => s.cache.theta = f()?,
            "cache.vehicle_capacity_tasks" => s.cache.vehicle_capacity_tasks = u()?,
            "cache.uav_capacity_tasks" => s.cache.uav_capacity_tasks = u()?,
            "reward.age_threshold" => s.reward.age_threshold = u()? as u32,
            "reward.kappa_age" => s.reward.kappa_age = f()?,
            "reward.kappa_def" => s.reward.kappa_def = f()?,
            "reward.e_ref_per_vehicle" => s.reward.e_ref_per_vehicle = f()?,
            "agent.hidden" => {
                let sizes: Result<Vec<usize>, _> = value
                    .split(',')
                    .map(|p| p.trim().parse::<usize>().map_err(|_| bad("size list")))
                    .collect();
                self.hyper.hidden = sizes?;
            }
            "agent.actor_lr" => self.hyper.actor_lr = f()?,
            "agent.critic_lr" => self.hyper.critic_lr = f()?,
            "agent.gamma" => self.hyper.gamma = f()?,
            "agent.chi_soft" => self.hyper.chi_soft = f()?,
            "agent.batch_size" => self.hyper.batch_size = u()?,
            "agent.ou_theta" => self.hyper.ou_theta = f()?,
            "agent.ou_sigma" => self.hyper.ou_sigma = f()?,
            "agent.ou_sigma_decay" => self.hyper.ou_sigma_decay = f()?,
            "agent.replay_capacity_each" => self.hyper.replay_capacity_each = u()?,
            "agent.rho" => self.hyper.rho = f()?,
            "agent.chi_replay" => self.hyper.chi_replay = f()?,
            "agent.r_th_fixed" => {
                self.hyper.r_th_fixed =
                    if value == "none" { None } else { Some(f()?) };
            }
            "agent.invert_split" => self.hyper.invert_split = b()?,
            "agent.differentiated" => self.hyper.differentiated = b()?,
            "run.episodes" => self.episodes = u()?,
            "run.seed" => self.seed = value.parse::<u64>().map_err(|_| bad("seed"))?,
            "run.agent" => self.agent = value.to_string(),
            "run.refresh_period" => {
                self.refresh_period = value.parse::<u64>().map_err(|_| bad("period"))?
            }
            "run.sweep_train_episodes" => self.sweep_train_episodes = u()?,
            "run.sweep_eval_episodes" => self.sweep_eval_episodes = u()?,
            "run.sweep_snapshot_every" => self.sweep_snapshot_every = u()?,
            "run.sweep_validation_episodes" => self.sweep_validation_episodes = u()?,
            _ => return Err(SimError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Serializes back to the flat format (round-trips through `set`).
    pub fn to_text(&self) -> String {
        let s = &self.scenario;
        let h = &self.hyper;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("scenario.n_vehicles", s.n_vehicles.to_string());
        kv("scenario.n_uavs", s.n_uavs.to_string());
        kv("scenario.n_task_types", s.n_task_types.to_string());
        kv("scenario.steps_per_episode", s.steps_per_episode.to_string());
        kv("tasks.p_gen", s.tasks.p_gen.to_string());
        kv("tasks.zipf_exponent", s.tasks.zipf_exponent.to_string());
        kv("agent.hidden", h.hidden.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        kv("agent.differentiated", h.differentiated.to_string());
        kv("run.episodes", self.episodes.to_string());
        kv("run.seed", self.seed.to_string());
        kv("run.agent", self.agent.clone());
        out
    }
}

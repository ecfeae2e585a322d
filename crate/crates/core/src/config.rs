//! Scenario and learner configuration with validated defaults.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::SimError;

/// Street, UAV loiter, and slot geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    /// Length of the street segment in meters (x wraps around).
    pub street_length: f64,
    /// Fixed UAV loiter altitude in meters.
    pub uav_height: f64,
    /// Radius of a UAV's projected coverage disk in meters.
    pub coverage_radius: f64,
    /// Base-station position (x, y, z) in meters.
    pub bs_position: [f64; 3],
    /// Slot length in seconds.
    pub slot_seconds: f64,
    /// Vehicle speed range (signed magnitude drawn uniformly) in m/s.
    pub vehicle_speed_range: [f64; 2],
    /// UAV loiter speed in m/s.
    pub uav_speed: f64,
    /// Lane half-width: vehicle y is uniform in [-lane_half_width, +lane_half_width].
    pub lane_half_width: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            street_length: 500.0,
            uav_height: 40.0,
            coverage_radius: 100.0,
            bs_position: [250.0, 50.0, 25.0],
            slot_seconds: 0.1,
            vehicle_speed_range: [10.0, 20.0],
            uav_speed: 10.0,
            lane_half_width: 10.0,
        }
    }
}

/// Air-to-ground and vehicle-to-BS channel parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Path-loss exponent.
    pub path_loss_exp: f64,
    /// Excess path loss in the LoS case (linear, > 1).
    pub eta_los: f64,
    /// Excess path loss in the NLoS case (linear, > eta_los).
    pub eta_nlos: f64,
    /// Environment constant of the LoS-probability sigmoid.
    pub gamma_env: f64,
    /// Slope constant of the LoS-probability sigmoid.
    pub psi: f64,
    /// Noise power in watts.
    pub noise_watts: f64,
    /// Vehicle transmit power in watts.
    pub tx_power_watts: f64,
    /// Total system bandwidth in Hz.
    pub total_bandwidth_hz: f64,
}

impl ChannelConfig {
    /// Channel gain at unit distance, (4 pi f_c / c)^(-alpha).
    pub fn unit_gain(&self) -> f64 {
        const C: f64 = 299_792_458.0;
        libm::pow(4.0 * core::f64::consts::PI * self.carrier_hz / C, -self.path_loss_exp)
    }
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 2.0e9,
            path_loss_exp: 2.0,
            eta_los: 2.0,
            eta_nlos: 200.0,
            gamma_env: 9.61,
            psi: 0.16,
            noise_watts: 1.0e-13,
            tx_power_watts: 1.0,
            total_bandwidth_hz: 1.0e7,
        }
    }
}

/// CPU capabilities and the compute-energy coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeConfig {
    /// Vehicle CPU range in cycles/s (drawn uniformly per vehicle at build).
    pub vehicle_cpu_range: [f64; 2],
    /// UAV CPU capacity in cycles/s.
    pub uav_cpu: f64,
    /// BS CPU capacity in cycles/s.
    pub bs_cpu: f64,
    /// Energy coefficient per CPU cycle (energy = mu * f^2 * z).
    pub mu: f64,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            vehicle_cpu_range: [4.5e8, 5.5e8],
            uav_cpu: 3.0e9,
            bs_cpu: 1.0e10,
            mu: 1.0e-27,
        }
    }
}

/// Task-catalog and arrival-process parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskConfig {
    /// Per-vehicle per-slot arrival probability.
    pub p_gen: f64,
    /// Zipf exponent for the task-type popularity law.
    pub zipf_exponent: f64,
    /// Task upload size range in bits (drawn per type at build).
    pub upload_bits_range: [f64; 2],
    /// Required CPU cycles range (drawn per type at build).
    pub cycles_range: [f64; 2],
    /// Cached input-data size range in bits (drawn per type at build).
    pub input_bits_range: [f64; 2],
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            p_gen: 0.3,
            zipf_exponent: 1.0,
            // 100..150 Kbit, Kbit = 1e3 bits
            upload_bits_range: [1.0e5, 1.5e5],
            cycles_range: [1.0e7, 1.5e7],
            // 1..4 Mbit of input data per type
            input_bits_range: [1.0e6, 4.0e6],
        }
    }
}

/// Cache sizing and refresh-energy parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheConfig {
    /// Energy per fetched bit, J/bit.
    pub theta: f64,
    /// Vehicle cache capacity in units of the largest input data (1 task).
    pub vehicle_capacity_tasks: usize,
    /// UAV cache capacity in units of the largest input data (3 tasks).
    pub uav_capacity_tasks: usize,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self { theta: 1.0e-8, vehicle_capacity_tasks: 1, uav_capacity_tasks: 3 }
    }
}

/// Reward shaping: normalization scale and penalty coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardConfig {
    /// Status-age threshold in slots (Eq. 7 analogue, enforced as penalty).
    pub age_threshold: u32,
    /// Penalty per vehicle whose status age exceeds the threshold.
    pub kappa_age: f64,
    /// Penalty per deferred execution attempt.
    pub kappa_def: f64,
    /// Per-vehicle energy scale: f(x) = exp(-x / (n_vehicles * e_ref_per_vehicle)).
    pub e_ref_per_vehicle: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self { age_threshold: 20, kappa_age: 1.0, kappa_def: 0.5, e_ref_per_vehicle: 5.0e-3 }
    }
}

/// Everything needed to build one simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_vehicles: usize,
    pub n_uavs: usize,
    pub n_task_types: usize,
    pub steps_per_episode: usize,
    pub geometry: GeometryConfig,
    pub channel: ChannelConfig,
    pub compute: ComputeConfig,
    pub tasks: TaskConfig,
    pub cache: CacheConfig,
    pub reward: RewardConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_vehicles: 10,
            n_uavs: 2,
            n_task_types: 5,
            steps_per_episode: 100,
            geometry: GeometryConfig::default(),
            channel: ChannelConfig::default(),
            compute: ComputeConfig::default(),
            tasks: TaskConfig::default(),
            cache: CacheConfig::default(),
            reward: RewardConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Validates every field against the module invariants.
    pub fn validate(&self) -> Result<(), SimError> {
        let mut problems: Vec<String> = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                problems.push(String::from(msg));
            }
        };
        check(self.n_vehicles > 0, "n_vehicles must be > 0");
        check(self.n_uavs > 0, "n_uavs must be > 0");
        check(self.n_task_types > 0, "n_task_types must be > 0");
        check(self.steps_per_episode > 0, "steps_per_episode must be > 0");
        let g = &self.geometry;
        check(g.street_length > 0.0, "geometry.street_length must be > 0");
        check(g.uav_height > 0.0, "geometry.uav_height must be > 0");
        check(g.coverage_radius > 0.0, "geometry.coverage_radius must be > 0");
        check(g.slot_seconds > 0.0, "geometry.slot_seconds must be > 0");
        check(
            g.vehicle_speed_range[0] <= g.vehicle_speed_range[1],
            "geometry.vehicle_speed_range must be ordered",
        );
        let ch = &self.channel;
        check(ch.eta_los > 1.0, "channel.eta_los must be > 1");
        check(ch.eta_nlos > ch.eta_los, "channel.eta_nlos must exceed eta_los");
        check(ch.total_bandwidth_hz > 0.0, "channel.total_bandwidth_hz must be > 0");
        check(ch.noise_watts > 0.0, "channel.noise_watts must be > 0");
        check(ch.tx_power_watts > 0.0, "channel.tx_power_watts must be > 0");
        let cp = &self.compute;
        check(cp.vehicle_cpu_range[0] > 0.0, "compute.vehicle_cpu_range must be positive");
        check(cp.uav_cpu > 0.0, "compute.uav_cpu must be > 0");
        check(cp.bs_cpu > 0.0, "compute.bs_cpu must be > 0");
        check(cp.mu > 0.0, "compute.mu must be > 0");
        let t = &self.tasks;
        check((0.0..=1.0).contains(&t.p_gen), "tasks.p_gen must lie in [0,1]");
        check(t.zipf_exponent > 0.0, "tasks.zipf_exponent must be > 0");
        check(t.upload_bits_range[0] > 0.0, "tasks.upload_bits_range must be positive");
        check(t.cycles_range[0] > 0.0, "tasks.cycles_range must be positive");
        check(t.input_bits_range[0] > 0.0, "tasks.input_bits_range must be positive");
        let c = &self.cache;
        check(c.theta >= 0.0, "cache.theta must be >= 0");
        check(c.vehicle_capacity_tasks >= 1, "cache.vehicle_capacity_tasks must be >= 1");
        check(c.uav_capacity_tasks >= 1, "cache.uav_capacity_tasks must be >= 1");
        check(
            c.uav_capacity_tasks <= self.n_task_types,
            "cache.uav_capacity_tasks cannot exceed n_task_types",
        );
        let r = &self.reward;
        check(r.age_threshold >= 1, "reward.age_threshold must be >= 1");
        check(r.e_ref_per_vehicle > 0.0, "reward.e_ref_per_vehicle must be > 0");
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SimError::Config(format!("{}", problems.join("; "))))
        }
    }

    /// Reward normalization scale N * e_ref_per_vehicle.
    pub fn energy_ref(&self) -> f64 {
        self.n_vehicles as f64 * self.reward.e_ref_per_vehicle
    }

    /// Length of the flattened MDP state vector.
    pub fn state_dim(&self) -> usize {
        let (n, m, w) = (self.n_vehicles, self.n_uavs, self.n_task_types);
        2 * n + 2 * m + n * w + m * w + n
    }

    /// Length of the raw action vector.
    pub fn action_dim(&self) -> usize {
        let (n, m, w) = (self.n_vehicles, self.n_uavs, self.n_task_types);
        n * w + m * w + n * (m + 2) + n
    }
}

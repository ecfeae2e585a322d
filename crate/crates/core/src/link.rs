//! Channel gains, transmission rates and times, offload energy, and
//! bandwidth validation.

use alloc::vec::Vec;

use crate::config::ChannelConfig;
use crate::error::SimError;

/// LoS probability as a sigmoid in the elevation angle (degrees).
pub fn los_probability(elevation_deg: f64, cfg: &ChannelConfig) -> f64 {
    1.0 / (1.0 + cfg.gamma_env * libm::exp(-cfg.psi * (elevation_deg - cfg.gamma_env)))
}

/// Air-to-ground channel gain: LoS/NLoS mixture of the log-distance law.
pub fn uav_channel_gain(distance: f64, elevation_deg: f64, cfg: &ChannelConfig) -> f64 {
    let p_los = los_probability(elevation_deg, cfg);
    let base = cfg.unit_gain() * libm::pow(distance, -cfg.path_loss_exp);
    p_los * base / cfg.eta_los + (1.0 - p_los) * base / cfg.eta_nlos
}

/// Vehicle-to-BS gain: deterministic log-distance model.
pub fn bs_channel_gain(distance: f64, cfg: &ChannelConfig) -> f64 {
    cfg.unit_gain() * libm::pow(distance, -cfg.path_loss_exp)
}

/// Shannon rate b * log2(1 + P * gain / sigma^2), bits/s.
pub fn rate(bandwidth_hz: f64, gain: f64, cfg: &ChannelConfig) -> f64 {
    if bandwidth_hz <= 0.0 {
        return 0.0;
    }
    let snr = cfg.tx_power_watts * gain / cfg.noise_watts;
    bandwidth_hz * libm::log2(1.0 + snr)
}

/// Transmission time of `task_bits` at `rate_bps`.
pub fn tx_time(task_bits: f64, rate_bps: f64) -> Result<f64, SimError> {
    if task_bits == 0.0 {
        return Ok(0.0);
    }
    if rate_bps <= 0.0 {
        return Err(SimError::InfeasibleLink);
    }
    Ok(task_bits / rate_bps)
}

/// Offload energy: transmit power times transmission time.
pub fn offload_energy(tx_power_watts: f64, tx_seconds: f64) -> f64 {
    tx_power_watts * tx_seconds
}

/// Per-vehicle bandwidth shares in Hz (zero for non-offloaders).
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthPlan {
    pub shares_hz: Vec<f64>,
}

impl BandwidthPlan {
    pub fn none(n_vehicles: usize) -> Self {
        Self { shares_hz: alloc::vec![0.0; n_vehicles] }
    }
}

/// True iff all shares are nonnegative and their sum fits the budget.
pub fn validate_bandwidth(plan: &BandwidthPlan, cfg: &ChannelConfig) -> bool {
    let sum: f64 = plan.shares_hz.iter().sum();
    plan.shares_hz.iter().all(|b| *b >= 0.0) && sum <= cfg.total_bandwidth_hz * (1.0 + 1e-12)
}

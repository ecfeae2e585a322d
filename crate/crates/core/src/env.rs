//! The MDP around the simulator: state encoding, raw-action decoding
//! into a feasible plan, the one-slot transition, and reward shaping.
//!
//! A slot runs in two halves so that policies can observe post-arrival
//! state: `begin_slot` samples task arrivals, then either `decode_action`
//! plus `finish_slot` (learned agent) or a baseline-built plan plus
//! `finish_slot`. `step` wraps the whole slot for raw-action callers.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;

use crate::caching::{CacheCatalog, CacheState, RefreshPlan};
use crate::config::ScenarioConfig;
use crate::error::SimError;
use crate::execution::{self, ExecutionChoice};
use crate::link::{self, BandwidthPlan};
use crate::rng::SeedSpawner;
use crate::tasks::{StatusAges, TaskBuffers, TaskCatalog};
use crate::util::Grid;
use crate::world::{self, WorldState};

/// Logit threshold above which already-cached data is re-fetched.
pub const REFRESH_LOGIT_THRESHOLD: f64 = 0.5;

/// Fully decoded per-slot decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionPlan {
    pub refresh: RefreshPlan,
    pub exec: Vec<ExecutionChoice>,
    pub bandwidth: BandwidthPlan,
}

/// One completed task: who, what, when generated, where executed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub vehicle: usize,
    pub task: usize,
    pub generated_at: u64,
    pub executed_at: ExecutionChoice,
    /// Cached-data age used in the status update (0 for BS).
    pub data_age: u32,
}

/// Everything a trace replayer needs about one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotEvents {
    pub t: u64,
    pub plan: ActionPlan,
    /// Head task per vehicle at decision time: (type, generation slot).
    pub heads: Vec<Option<(usize, u64)>>,
    pub completions: Vec<Completion>,
}

/// Per-slot result of the environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub energy_cache: f64,
    pub energy_local: f64,
    pub energy_offload: f64,
    pub age_violations: usize,
    pub deferrals: usize,
    pub state: Vec<f64>,
    pub events: SlotEvents,
}

impl StepOutcome {
    pub fn energy_total(&self) -> f64 {
        self.energy_cache + self.energy_local + self.energy_offload
    }
}

/// Scenario constants drawn once at reset.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub catalog: TaskCatalog,
    pub cache_catalog: CacheCatalog,
    /// Per-vehicle local CPU in cycles/s.
    pub vehicle_cpu: Vec<f64>,
}

/// Mutable simulation state for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub world: WorldState,
    pub cache: CacheState,
    pub buffers: TaskBuffers,
    pub status: StatusAges,
    pub t: u64,
}

#[derive(Debug, Clone)]
pub struct Env {
    pub scenario: Scenario,
    pub state: SimState,
    arrivals_rng: ChaCha12Rng,
    slot_open: bool,
}

impl Env {
    /// Builds the scenario and initial state deterministically from the
    /// seed: positions, per-type task draws, per-vehicle CPU draws,
    /// empty caches and buffers, zero status ages.
    pub fn reset(config: ScenarioConfig, seed: u64) -> Result<Self, SimError> {
        config.validate()?;
        let spawner = SeedSpawner::new(seed);
        let mut scenario_rng = spawner.stream("scenario");
        let catalog = TaskCatalog::build(&config.tasks, config.n_task_types, &mut scenario_rng);
        let cache_catalog = CacheCatalog::from_sizes(
            catalog.input_bits(),
            config.cache.vehicle_capacity_tasks,
            config.cache.uav_capacity_tasks,
        );
        let vehicle_cpu = {
            use rand::Rng;
            let [lo, hi] = config.compute.vehicle_cpu_range;
            (0..config.n_vehicles).map(|_| scenario_rng.gen_range(lo..=hi)).collect()
        };
        let mut mobility_rng = spawner.stream("mobility");
        let world = WorldState::build(
            config.geometry.clone(),
            config.n_vehicles,
            config.n_uavs,
            &mut mobility_rng,
        );
        let state = SimState {
            world,
            cache: CacheState::empty(config.n_vehicles, config.n_uavs, config.n_task_types),
            buffers: TaskBuffers::empty(config.n_vehicles, config.n_task_types),
            status: StatusAges::zeroed(config.n_vehicles),
            t: 0,
        };
        Ok(Self {
            scenario: Scenario { config, catalog, cache_catalog, vehicle_cpu },
            state,
            arrivals_rng: spawner.stream("arrivals"),
            slot_open: false,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.scenario.config
    }

    /// Samples this slot's task arrivals. Must be called exactly once
    /// before building or decoding the slot's plan.
    pub fn begin_slot(&mut self) {
        debug_assert!(!self.slot_open, "begin_slot called twice");
        self.state.buffers.sample_arrivals(
            &self.scenario.catalog,
            self.scenario.config.tasks.p_gen,
            self.state.t,
            &mut self.arrivals_rng,
        );
        self.slot_open = true;
    }

    /// Flattened MDP state, every entry scaled into [0, 1].
    pub fn encode_state(&self) -> Vec<f64> {
        let cfg = &self.scenario.config;
        let l = cfg.geometry.street_length;
        let lane = cfg.geometry.lane_half_width;
        let age_cap = (cfg.reward.age_threshold + 1) as f64;
        let clamp_age = |a: &Option<u32>| -> f64 {
            match a {
                Some(v) => (*v as f64).min(age_cap) / age_cap,
                None => 1.0,
            }
        };
        let mut out = Vec::with_capacity(cfg.state_dim());
        for v in &self.state.world.vehicles {
            out.push(v.x / l);
            out.push((v.y + lane) / l);
        }
        for u in &self.state.world.uavs {
            out.push(u.x / l);
            out.push((u.y + lane) / l);
        }
        out.extend(self.state.cache.veh.iter().map(clamp_age));
        out.extend(self.state.cache.uav.iter().map(clamp_age));
        out.extend(
            self.state.status.iter().map(|a| (a as f64).min(age_cap) / age_cap),
        );
        out
    }

    /// Channel gain towards UAV `j` for vehicle `i`, current-slot positions.
    pub fn uav_gain(&self, vehicle: usize, uav: usize) -> f64 {
        let g = &self.scenario.config.geometry;
        let d = world::slant_distance(
            &self.state.world.vehicles[vehicle],
            &self.state.world.uavs[uav],
            g,
            false,
        );
        // d >= H always holds at fixed altitude.
        let elevation = world::elevation_angle(g.uav_height, d).unwrap_or(90.0);
        link::uav_channel_gain(d, elevation, &self.scenario.config.channel)
    }

    /// Channel gain towards the BS for vehicle `i`.
    pub fn bs_gain(&self, vehicle: usize) -> f64 {
        link::bs_channel_gain(self.state.world.bs_distance(vehicle), &self.scenario.config.channel)
    }

    /// Next-slot coverage test for offloading to UAV `j`.
    pub fn in_coverage(&self, vehicle: usize, uav: usize) -> bool {
        world::in_coverage(
            &self.state.world.vehicles[vehicle],
            &self.state.world.uavs[uav],
            &self.scenario.config.geometry,
        )
    }

    /// Projects a raw action vector onto a feasible plan. Returns the
    /// plan and the number of deferral violations recorded because the
    /// unmasked execution argmax was infeasible.
    pub fn decode_action(&self, raw: &[f64]) -> Result<(ActionPlan, usize), SimError> {
        let cfg = &self.scenario.config;
        let (n, m, w) = (cfg.n_vehicles, cfg.n_uavs, cfg.n_task_types);
        let dim = cfg.action_dim();
        if raw.len() != dim {
            return Err(SimError::Shape { expected: dim, got: raw.len() });
        }
        let (veh_logits, rest) = raw.split_at(n * w);
        let (uav_logits, rest) = rest.split_at(m * w);
        let (exec_logits, bw_weights) = rest.split_at(n * (m + 2));

        let refresh = self.decode_refresh(veh_logits, uav_logits);
        let (exec, violations) = self.decode_exec(exec_logits, &refresh);
        let bandwidth = decode_bandwidth(bw_weights, &exec, cfg.channel.total_bandwidth_hz);
        Ok((ActionPlan { refresh, exec, bandwidth }, violations))
    }

    fn decode_refresh(&self, veh_logits: &[f64], uav_logits: &[f64]) -> RefreshPlan {
        let cfg = &self.scenario.config;
        let w = cfg.n_task_types;
        let build = |logits: &[f64], rows: usize, k: usize, cached: &Grid<Option<u32>>| {
            let mut y = Grid::filled(rows, w, false);
            let mut next_c = Grid::filled(rows, w, false);
            for r in 0..rows {
                let row = &logits[r * w..(r + 1) * w];
                for &task in top_k(row, k).iter() {
                    next_c.set(r, task, true);
                    let already = cached.get(r, task).is_some();
                    let refetch = row[task] > REFRESH_LOGIT_THRESHOLD;
                    y.set(r, task, !already || refetch);
                }
            }
            (y, next_c)
        };
        let (y_veh, next_c_veh) = build(
            veh_logits,
            cfg.n_vehicles,
            cfg.cache.vehicle_capacity_tasks,
            &self.state.cache.veh,
        );
        let (y_uav, next_c_uav) =
            build(uav_logits, cfg.n_uavs, cfg.cache.uav_capacity_tasks, &self.state.cache.uav);
        RefreshPlan { y_veh, next_c_veh, y_uav, next_c_uav }
    }

    fn decode_exec(
        &self,
        exec_logits: &[f64],
        refresh: &RefreshPlan,
    ) -> (Vec<ExecutionChoice>, usize) {
        let cfg = &self.scenario.config;
        let (n, m) = (cfg.n_vehicles, cfg.n_uavs);
        let mut choices = vec![ExecutionChoice::Defer; n];
        let mut violations = 0usize;
        for i in 0..n {
            let Some((task, _)) = self.state.buffers.head_task(i) else {
                continue;
            };
            let logits = &exec_logits[i * (m + 2)..(i + 1) * (m + 2)];
            let feasible = |slot: usize| -> bool {
                match choice_of(slot, m) {
                    ExecutionChoice::Local => *refresh.next_c_veh.get(i, task),
                    ExecutionChoice::Uav(j) => {
                        *refresh.next_c_uav.get(j, task) && self.in_coverage(i, j)
                    }
                    ExecutionChoice::Bs => true,
                    ExecutionChoice::Defer => false,
                }
            };
            let argmax_all = argmax(logits);
            let best_feasible = logits
                .iter()
                .enumerate()
                .filter(|(slot, _)| feasible(*slot))
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                .map(|(slot, _)| slot);
            match best_feasible {
                Some(slot) => {
                    if !feasible(argmax_all) {
                        violations += 1;
                    }
                    choices[i] = choice_of(slot, m);
                }
                None => {
                    violations += 1;
                }
            }
        }
        (choices, violations)
    }

    /// Executes a full slot from a raw action vector.
    pub fn step(&mut self, raw: &[f64]) -> Result<StepOutcome, SimError> {
        self.begin_slot();
        let (plan, violations) = self.decode_action(raw)?;
        self.finish_slot(plan, violations)
    }

    /// Applies a decoded plan: cache refresh, task execution with
    /// slot-feasibility checks, status-age bookkeeping, reward, and
    /// mobility advance.
    pub fn finish_slot(
        &mut self,
        plan: ActionPlan,
        decode_violations: usize,
    ) -> Result<StepOutcome, SimError> {
        debug_assert!(self.slot_open, "finish_slot without begin_slot");
        self.slot_open = false;
        let cfg = self.scenario.config.clone();
        let t = self.state.t;
        let heads: Vec<Option<(usize, u64)>> =
            (0..cfg.n_vehicles).map(|i| self.state.buffers.head_task(i)).collect();

        // Cache refresh, charged out-of-band at theta per bit.
        self.state.cache.evolve_ages(&plan.refresh)?;
        let energy_cache =
            crate::caching::refresh_energy(&plan.refresh, &self.scenario.cache_catalog, cfg.cache.theta);

        // Offload counts fix the equal CPU split at decision time.
        let mut uav_count = vec![0usize; cfg.n_uavs];
        let mut bs_count = 0usize;
        for choice in &plan.exec {
            match choice {
                ExecutionChoice::Uav(j) => uav_count[*j] += 1,
                ExecutionChoice::Bs => bs_count += 1,
                _ => {}
            }
        }

        let tau = cfg.geometry.slot_seconds;
        let mut energy_local = 0.0;
        let mut energy_offload = 0.0;
        let mut deferrals = decode_violations;
        let mut completions = Vec::new();
        for i in 0..cfg.n_vehicles {
            let Some((task, t_g)) = heads[i] else { continue };
            let choice = plan.exec[i];
            let ty = self.scenario.catalog.types[task];
            let executed = match choice {
                ExecutionChoice::Defer => None,
                ExecutionChoice::Local => {
                    let exec_t = execution::local_time(ty.cycles, self.scenario.vehicle_cpu[i]);
                    if execution::slot_feasible(choice, 0.0, exec_t, tau) {
                        energy_local +=
                            execution::local_energy(ty.cycles, self.scenario.vehicle_cpu[i], cfg.compute.mu);
                        let age = self.state.cache.veh.get(i, task).expect("gated on cache");
                        Some(age)
                    } else {
                        None
                    }
                }
                ExecutionChoice::Uav(j) => {
                    let share = execution::cpu_share(cfg.compute.uav_cpu, uav_count[j])?;
                    let exec_t = execution::mec_time(ty.cycles, share);
                    let rate = link::rate(plan.bandwidth.shares_hz[i], self.uav_gain(i, j), &cfg.channel);
                    match link::tx_time(ty.upload_bits, rate) {
                        Ok(tx) if execution::slot_feasible(choice, tx, exec_t, tau) => {
                            energy_offload += link::offload_energy(cfg.channel.tx_power_watts, tx);
                            let age = self.state.cache.uav.get(j, task).expect("gated on cache");
                            Some(age)
                        }
                        _ => None,
                    }
                }
                ExecutionChoice::Bs => {
                    let share = execution::cpu_share(cfg.compute.bs_cpu, bs_count)?;
                    let exec_t = execution::mec_time(ty.cycles, share);
                    let rate = link::rate(plan.bandwidth.shares_hz[i], self.bs_gain(i), &cfg.channel);
                    match link::tx_time(ty.upload_bits, rate) {
                        Ok(tx) if execution::slot_feasible(choice, tx, exec_t, tau) => {
                            energy_offload += link::offload_energy(cfg.channel.tx_power_watts, tx);
                            Some(0)
                        }
                        _ => None,
                    }
                }
            };
            match executed {
                Some(data_age) => {
                    self.state.status.complete(i, t, t_g, data_age);
                    self.state.buffers.remove(i, task);
                    completions.push(Completion {
                        vehicle: i,
                        task,
                        generated_at: t_g,
                        executed_at: choice,
                        data_age,
                    });
                }
                None => {
                    if choice != ExecutionChoice::Defer {
                        // Chosen destination could not meet the slot: defer.
                        deferrals += 1;
                    }
                    self.state.status.idle_tick(i);
                }
            }
        }
        // Vehicles with no pending task also just age.
        for i in 0..cfg.n_vehicles {
            if heads[i].is_none() {
                self.state.status.idle_tick(i);
            }
        }

        let age_violations = self.state.status.threshold_violations(cfg.reward.age_threshold);
        let energy = energy_cache + energy_local + energy_offload;
        let reward = libm::exp(-energy / self.scenario.config.energy_ref())
            - cfg.reward.kappa_age * age_violations as f64
            - cfg.reward.kappa_def * deferrals as f64;

        self.state.world.advance();
        self.state.t += 1;

        Ok(StepOutcome {
            reward,
            energy_cache,
            energy_local,
            energy_offload,
            age_violations,
            deferrals,
            state: self.encode_state(),
            events: SlotEvents { t, plan, heads, completions },
        })
    }
}

fn choice_of(slot: usize, n_uavs: usize) -> ExecutionChoice {
    if slot == 0 {
        ExecutionChoice::Local
    } else if slot <= n_uavs {
        ExecutionChoice::Uav(slot - 1)
    } else {
        ExecutionChoice::Bs
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Indices of the k largest values, ties to the lower index.
fn top_k(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|a, b| values[*b].partial_cmp(&values[*a]).unwrap().then(a.cmp(b)));
    idx.truncate(k.min(values.len()));
    idx
}

/// Shifts offloaders' weights to be nonnegative and normalizes them to
/// consume the whole bandwidth budget; non-offloaders get zero.
fn decode_bandwidth(weights: &[f64], exec: &[ExecutionChoice], total_hz: f64) -> BandwidthPlan {
    let offloading: Vec<usize> = exec
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c, ExecutionChoice::Uav(_) | ExecutionChoice::Bs))
        .map(|(i, _)| i)
        .collect();
    let mut shares = vec![0.0; exec.len()];
    if offloading.is_empty() {
        return BandwidthPlan { shares_hz: shares };
    }
    let shifted: Vec<f64> = offloading.iter().map(|i| (weights[*i] + 1.0) / 2.0).collect();
    let sum: f64 = shifted.iter().sum();
    // Tied weights get the exact equal division rather than the
    // normalized form, avoiding last-ulp rounding asymmetry.
    let uniform = shifted.iter().all(|&s| s == shifted[0]);
    if sum <= 0.0 || uniform {
        let each = total_hz / offloading.len() as f64;
        for &i in &offloading {
            shares[i] = each;
        }
    } else {
        for (&i, &s) in offloading.iter().zip(&shifted) {
            shares[i] = s / sum * total_hz;
        }
    }
    BandwidthPlan { shares_hz: shares }
}

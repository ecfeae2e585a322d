//! The four comparison policies. Each emits a plan through the same
//! feasibility projection contract as the learned agent's decoder.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::agent::Mlp;
use crate::caching::RefreshPlan;
use crate::env::{ActionPlan, Env};
use crate::error::SimError;
use crate::execution::{self, ExecutionChoice};
use crate::link::{self, BandwidthPlan};
use crate::util::Grid;

/// A per-slot decision maker. `observed_state` is the encoded MDP state
/// the learned agent saw at slot start (pre-arrival); heuristics read
/// the environment directly.
pub trait Policy {
    fn plan(
        &mut self,
        env: &Env,
        observed_state: &[f64],
        rng: &mut ChaCha12Rng,
    ) -> Result<(ActionPlan, usize), SimError>;
}

/// Cache contents re-drawn uniformly (and re-fetched) every slot;
/// execution and bandwidth follow the greedy rule.
pub struct RandomRefresh;

/// Execution destination drawn uniformly, ignoring cache availability;
/// infeasible draws defer to the next slot. Caching follows the
/// popularity rule.
pub struct RandomOffload {
    popular: PopularRefresh,
}

impl RandomOffload {
    pub fn new(refresh_period: u64) -> Self {
        Self { popular: PopularRefresh::new(refresh_period) }
    }
}

/// Caches the most popular task types everywhere, re-fetching every
/// `refresh_period` slots; execution and bandwidth follow the greedy rule.
pub struct PopularRefresh {
    refresh_period: u64,
}

impl PopularRefresh {
    pub fn new(refresh_period: u64) -> Self {
        Self { refresh_period }
    }
}

/// The trained agent's decisions with the bandwidth stage replaced by an
/// equal split over offloaders.
pub struct EqualBandwidth {
    actor: Mlp,
}

impl EqualBandwidth {
    pub fn new(actor: Mlp) -> Self {
        Self { actor }
    }
}

impl Policy for RandomRefresh {
    fn plan(
        &mut self,
        env: &Env,
        _observed_state: &[f64],
        rng: &mut ChaCha12Rng,
    ) -> Result<(ActionPlan, usize), SimError> {
        let cfg = env.config();
        let w = cfg.n_task_types;
        let mut refresh = RefreshPlan::noop(&env.state.cache);
        for i in 0..cfg.n_vehicles {
            let chosen = random_subset(w, cfg.cache.vehicle_capacity_tasks, rng);
            for t in 0..w {
                let selected = chosen.contains(&t);
                refresh.next_c_veh.set(i, t, selected);
                refresh.y_veh.set(i, t, selected);
            }
        }
        for j in 0..cfg.n_uavs {
            let chosen = random_subset(w, cfg.cache.uav_capacity_tasks, rng);
            for t in 0..w {
                let selected = chosen.contains(&t);
                refresh.next_c_uav.set(j, t, selected);
                refresh.y_uav.set(j, t, selected);
            }
        }
        let (exec, violations) = greedy_execution(env, &refresh);
        let bandwidth = equal_split_bandwidth(&exec, cfg.channel.total_bandwidth_hz);
        Ok((ActionPlan { refresh, exec, bandwidth }, violations))
    }
}

impl Policy for RandomOffload {
    fn plan(
        &mut self,
        env: &Env,
        observed_state: &[f64],
        rng: &mut ChaCha12Rng,
    ) -> Result<(ActionPlan, usize), SimError> {
        let cfg = env.config();
        let (refresh, _) = {
            let (plan, v) = self.popular.plan(env, observed_state, rng)?;
            (plan.refresh, v)
        };
        let mut exec = vec![ExecutionChoice::Defer; cfg.n_vehicles];
        let mut violations = 0usize;
        for i in 0..cfg.n_vehicles {
            let Some((task, _)) = env.state.buffers.head_task(i) else { continue };
            // Uniform over {local, uav 1..M, bs}, cache state ignored.
            let draw = rng.gen_range(0..cfg.n_uavs + 2);
            let choice = if draw == 0 {
                ExecutionChoice::Local
            } else if draw <= cfg.n_uavs {
                ExecutionChoice::Uav(draw - 1)
            } else {
                ExecutionChoice::Bs
            };
            let feasible = match choice {
                ExecutionChoice::Local => *refresh.next_c_veh.get(i, task),
                ExecutionChoice::Uav(j) => {
                    *refresh.next_c_uav.get(j, task) && env.in_coverage(i, j)
                }
                ExecutionChoice::Bs => true,
                ExecutionChoice::Defer => false,
            };
            if feasible {
                exec[i] = choice;
            } else {
                // Task waits for the next slot.
                violations += 1;
            }
        }
        let bandwidth = equal_split_bandwidth(&exec, cfg.channel.total_bandwidth_hz);
        Ok((ActionPlan { refresh, exec, bandwidth }, violations))
    }
}

impl Policy for PopularRefresh {
    fn plan(
        &mut self,
        env: &Env,
        _observed_state: &[f64],
        _rng: &mut ChaCha12Rng,
    ) -> Result<(ActionPlan, usize), SimError> {
        let cfg = env.config();
        let w = cfg.n_task_types;
        let due = env.state.t % self.refresh_period == 0;
        let mut refresh = RefreshPlan::noop(&env.state.cache);
        let fill = |next_c: &mut Grid<bool>, y: &mut Grid<bool>, cached: &Grid<Option<u32>>, k: usize| {
            for r in 0..next_c.rows() {
                for t in 0..w {
                    // Types are ordered by popularity: top-k is 0..k.
                    let selected = t < k;
                    next_c.set(r, t, selected);
                    y.set(r, t, selected && (due || cached.get(r, t).is_none()));
                }
            }
        };
        fill(
            &mut refresh.next_c_veh,
            &mut refresh.y_veh,
            &env.state.cache.veh,
            cfg.cache.vehicle_capacity_tasks.min(w),
        );
        fill(
            &mut refresh.next_c_uav,
            &mut refresh.y_uav,
            &env.state.cache.uav,
            cfg.cache.uav_capacity_tasks.min(w),
        );
        let (exec, violations) = greedy_execution(env, &refresh);
        let bandwidth = equal_split_bandwidth(&exec, cfg.channel.total_bandwidth_hz);
        Ok((ActionPlan { refresh, exec, bandwidth }, violations))
    }
}

impl Policy for EqualBandwidth {
    fn plan(
        &mut self,
        env: &Env,
        observed_state: &[f64],
        _rng: &mut ChaCha12Rng,
    ) -> Result<(ActionPlan, usize), SimError> {
        let raw = self.actor.forward(observed_state)?;
        let (mut plan, violations) = env.decode_action(raw.output())?;
        plan.bandwidth =
            equal_split_bandwidth(&plan.exec, env.config().channel.total_bandwidth_hz);
        Ok((plan, violations))
    }
}

/// Uniform k-subset of 0..n via partial Fisher-Yates.
fn random_subset(n: usize, k: usize, rng: &mut ChaCha12Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let k = k.min(n);
    for pos in 0..k {
        let pick = rng.gen_range(pos..n);
        idx.swap(pos, pick);
    }
    idx.truncate(k);
    idx
}

/// Cheapest-estimated-energy feasible destination per vehicle, with the
/// same gating as the learned decoder. Returns choices plus the number
/// of vehicles left to defer with a pending task.
pub fn greedy_execution(env: &Env, refresh: &RefreshPlan) -> (Vec<ExecutionChoice>, usize) {
    let cfg = env.config();
    let n = cfg.n_vehicles;
    let n_heads = (0..n).filter(|i| env.state.buffers.head_task(*i).is_some()).count();
    let b_est = cfg.channel.total_bandwidth_hz / n_heads.max(1) as f64;
    let tau = cfg.geometry.slot_seconds;
    let mut exec = vec![ExecutionChoice::Defer; n];
    let mut violations = 0usize;
    for i in 0..n {
        let Some((task, _)) = env.state.buffers.head_task(i) else { continue };
        let ty = env.scenario.catalog.types[task];
        let mut best: Option<(f64, ExecutionChoice)> = None;
        let mut consider = |energy: f64, choice: ExecutionChoice| {
            if best.map_or(true, |(e, _)| energy < e) {
                best = Some((energy, choice));
            }
        };
        if *refresh.next_c_veh.get(i, task) {
            let exec_t = execution::local_time(ty.cycles, env.scenario.vehicle_cpu[i]);
            if exec_t <= tau {
                consider(
                    execution::local_energy(ty.cycles, env.scenario.vehicle_cpu[i], cfg.compute.mu),
                    ExecutionChoice::Local,
                );
            }
        }
        for j in 0..cfg.n_uavs {
            if *refresh.next_c_uav.get(j, task) && env.in_coverage(i, j) {
                let rate = link::rate(b_est, env.uav_gain(i, j), &cfg.channel);
                if let Ok(tx) = link::tx_time(ty.upload_bits, rate) {
                    let exec_t = execution::mec_time(ty.cycles, cfg.compute.uav_cpu);
                    if tx + exec_t <= tau {
                        consider(
                            link::offload_energy(cfg.channel.tx_power_watts, tx),
                            ExecutionChoice::Uav(j),
                        );
                    }
                }
            }
        }
        {
            let rate = link::rate(b_est, env.bs_gain(i), &cfg.channel);
            if let Ok(tx) = link::tx_time(ty.upload_bits, rate) {
                let exec_t = execution::mec_time(ty.cycles, cfg.compute.bs_cpu);
                if tx + exec_t <= tau {
                    consider(
                        link::offload_energy(cfg.channel.tx_power_watts, tx),
                        ExecutionChoice::Bs,
                    );
                }
            }
        }
        match best {
            Some((_, choice)) => exec[i] = choice,
            None => violations += 1,
        }
    }
    (exec, violations)
}

/// Each offloading vehicle gets exactly B / K.
pub fn equal_split_bandwidth(exec: &[ExecutionChoice], total_hz: f64) -> BandwidthPlan {
    let offloaders: Vec<usize> = exec
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c, ExecutionChoice::Uav(_) | ExecutionChoice::Bs))
        .map(|(i, _)| i)
        .collect();
    let mut shares = vec![0.0; exec.len()];
    if !offloaders.is_empty() {
        let each = total_hz / offloaders.len() as f64;
        for i in offloaders {
            shares[i] = each;
        }
    }
    BandwidthPlan { shares_hz: shares }
}

/// Selects a baseline by name (the CLI agent selector values).
pub fn by_name(name: &str, refresh_period: u64) -> Option<Box<dyn Policy>> {
    match name {
        "random-refresh" => Some(Box::new(RandomRefresh)),
        "random-offload" => Some(Box::new(RandomOffload::new(refresh_period))),
        "popular-refresh" => Some(Box::new(PopularRefresh::new(refresh_period))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caching::check_capacity;
    use crate::config::ScenarioConfig;
    use rand::SeedableRng;

    fn env_with(n: usize, seed: u64) -> Env {
        let mut cfg = ScenarioConfig::default();
        cfg.n_vehicles = n;
        Env::reset(cfg, seed).unwrap()
    }

    #[test]
    fn random_subset_uniform_over_singletons() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let mut counts = [0usize; 5];
        let draws = 50_000;
        for _ in 0..draws {
            let s = random_subset(5, 1, &mut rng);
            counts[s[0]] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.2).abs() < 0.01, "{freq}");
        }
    }

    #[test]
    fn random_subset_uniform_over_triples() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let mut counts = std::collections::HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            let mut s = random_subset(5, 3, &mut rng);
            s.sort();
            *counts.entry(s).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 10); // C(5,3)
        for (_, c) in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.1).abs() < 0.01, "{freq}");
        }
    }

    #[test]
    fn all_baselines_emit_feasible_plans() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let mut policies: Vec<Box<dyn Policy>> = vec![
            Box::new(RandomRefresh),
            Box::new(RandomOffload::new(5)),
            Box::new(PopularRefresh::new(5)),
        ];
        for policy in policies.iter_mut() {
            let mut env = env_with(4, 17);
            for _ in 0..100 {
                let observed = env.encode_state();
                env.begin_slot();
                let (plan, v) = policy.plan(&env, &observed, &mut rng).unwrap();
                assert!(check_capacity(&plan.refresh, &env.scenario.cache_catalog));
                for (i, choice) in plan.exec.iter().enumerate() {
                    match choice {
                        ExecutionChoice::Local => {
                            let (w, _) = env.state.buffers.head_task(i).unwrap();
                            assert!(*plan.refresh.next_c_veh.get(i, w));
                        }
                        ExecutionChoice::Uav(j) => {
                            let (w, _) = env.state.buffers.head_task(i).unwrap();
                            assert!(*plan.refresh.next_c_uav.get(*j, w));
                            assert!(env.in_coverage(i, *j));
                        }
                        _ => {}
                    }
                }
                assert!(link::validate_bandwidth(&plan.bandwidth, &env.config().channel));
                env.finish_slot(plan, v).unwrap();
            }
        }
    }

    #[test]
    fn equal_split_sums_to_budget() {
        let exec = vec![
            ExecutionChoice::Bs,
            ExecutionChoice::Uav(0),
            ExecutionChoice::Defer,
            ExecutionChoice::Bs,
            ExecutionChoice::Local,
        ];
        let bw = equal_split_bandwidth(&exec, 1.0e7);
        let sum: f64 = bw.shares_hz.iter().sum();
        assert!((sum - 1.0e7).abs() < 1e-6);
        assert!((bw.shares_hz[0] - 1.0e7 / 3.0).abs() < 1e-6);
        assert_eq!(bw.shares_hz[2], 0.0);
        assert_eq!(bw.shares_hz[4], 0.0);
    }

    #[test]
    fn equal_split_single_offloader_gets_everything() {
        let bw = equal_split_bandwidth(&[ExecutionChoice::Bs], 1.0e7);
        assert_eq!(bw.shares_hz[0], 1.0e7);
    }

    #[test]
    fn equal_split_no_offloaders_allocates_nothing() {
        let bw = equal_split_bandwidth(&[ExecutionChoice::Defer, ExecutionChoice::Local], 1.0e7);
        assert!(bw.shares_hz.iter().all(|b| *b == 0.0));
    }

    #[test]
    fn popular_refresh_caches_top_types() {
        let mut env = env_with(2, 7);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let mut policy = PopularRefresh::new(5);
        let observed = env.encode_state();
        env.begin_slot();
        let (plan, _) = policy.plan(&env, &observed, &mut rng).unwrap();
        for i in 0..2 {
            assert!(*plan.refresh.next_c_veh.get(i, 0));
            for t in 1..5 {
                assert!(!*plan.refresh.next_c_veh.get(i, t));
            }
        }
        for j in 0..2 {
            for t in 0..3 {
                assert!(*plan.refresh.next_c_uav.get(j, t));
            }
            for t in 3..5 {
                assert!(!*plan.refresh.next_c_uav.get(j, t));
            }
        }
    }

    #[test]
    fn popular_refresh_contents_stable_between_periods() {
        let mut env = env_with(2, 8);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut policy = PopularRefresh::new(5);
        let mut fetch_slots = Vec::new();
        for t in 0..11u64 {
            let observed = env.encode_state();
            env.begin_slot();
            let (plan, v) = policy.plan(&env, &observed, &mut rng).unwrap();
            if *plan.refresh.y_veh.get(0, 0) {
                fetch_slots.push(t);
            }
            env.finish_slot(plan, v).unwrap();
        }
        assert_eq!(fetch_slots, vec![0, 5, 10]);
    }

    #[test]
    fn policies_are_reproducible() {
        let run = |seed: u64| -> Vec<f64> {
            let mut env = env_with(3, 6);
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut policy = RandomRefresh;
            (0..30)
                .map(|_| {
                    let observed = env.encode_state();
                    env.begin_slot();
                    let (plan, v) = policy.plan(&env, &observed, &mut rng).unwrap();
                    env.finish_slot(plan, v).unwrap().reward
                })
                .collect()
        };
        assert_eq!(run(9), run(9));
    }
}

//! Task generation, per-vehicle buffers, and the age of status updates.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::config::TaskConfig;

/// One task type: cached input-data size, upload size, CPU demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskType {
    /// Input-data size l_w in bits.
    pub input_bits: f64,
    /// Upload size s_w in bits.
    pub upload_bits: f64,
    /// Required CPU cycles z_w.
    pub cycles: f64,
}

/// The scenario's fixed task catalog plus the Zipf popularity law.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskCatalog {
    pub types: Vec<TaskType>,
    /// Zipf probability per type, most popular first (type 0).
    pub popularity: Vec<f64>,
}

impl TaskCatalog {
    /// Draws per-type sizes once from the scenario stream.
    pub fn build<R: Rng>(cfg: &TaskConfig, n_types: usize, rng: &mut R) -> Self {
        let types = (0..n_types)
            .map(|_| TaskType {
                input_bits: rng.gen_range(cfg.input_bits_range[0]..=cfg.input_bits_range[1]),
                upload_bits: rng.gen_range(cfg.upload_bits_range[0]..=cfg.upload_bits_range[1]),
                cycles: rng.gen_range(cfg.cycles_range[0]..=cfg.cycles_range[1]),
            })
            .collect();
        Self { types, popularity: zipf_probabilities(n_types, cfg.zipf_exponent) }
    }

    pub fn n_types(&self) -> usize {
        self.types.len()
    }

    pub fn input_bits(&self) -> Vec<f64> {
        self.types.iter().map(|t| t.input_bits).collect()
    }

    /// Draws one type index from the Zipf law by inverse CDF.
    pub fn sample_type<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (w, p) in self.popularity.iter().enumerate() {
            acc += p;
            if u < acc {
                return w;
            }
        }
        self.popularity.len() - 1
    }
}

/// Zipf law over ranks 1..=n: p(w) = w^-s / sum_k k^-s.
pub fn zipf_probabilities(n: usize, exponent: f64) -> Vec<f64> {
    let weights: Vec<f64> = (1..=n).map(|k| libm::pow(k as f64, -exponent)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Per-vehicle pending tasks, at most one per type, with generation slots.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskBuffers {
    /// `pending[i][w]` is the generation slot of the pending type-w task, if any.
    pending: Vec<Vec<Option<u64>>>,
}

impl TaskBuffers {
    pub fn empty(n_vehicles: usize, n_types: usize) -> Self {
        Self { pending: vec![vec![None; n_types]; n_vehicles] }
    }

    /// Bernoulli arrival per vehicle, Zipf-typed; an arrival of an
    /// already-buffered type is dropped (the older entry wins).
    pub fn sample_arrivals<R: Rng>(
        &mut self,
        catalog: &TaskCatalog,
        p_gen: f64,
        t: u64,
        rng: &mut R,
    ) {
        for vehicle in &mut self.pending {
            if rng.gen::<f64>() < p_gen {
                let w = catalog.sample_type(rng);
                if vehicle[w].is_none() {
                    vehicle[w] = Some(t);
                }
            }
        }
    }

    /// The first unprocessed task: greatest system time, ties to the
    /// lowest type index. Returns (type, generation slot).
    pub fn head_task(&self, vehicle: usize) -> Option<(usize, u64)> {
        self.pending[vehicle]
            .iter()
            .enumerate()
            .filter_map(|(w, t_g)| t_g.map(|t| (w, t)))
            .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    pub fn remove(&mut self, vehicle: usize, task: usize) {
        self.pending[vehicle][task] = None;
    }

    pub fn is_pending(&self, vehicle: usize, task: usize) -> bool {
        self.pending[vehicle][task].is_some()
    }
}

/// Per-vehicle age of the latest completed status update.
#[derive(Debug, Clone, PartialEq)]
pub struct StatusAges {
    ages: Vec<u32>,
}

impl StatusAges {
    pub fn zeroed(n_vehicles: usize) -> Self {
        Self { ages: vec![0; n_vehicles] }
    }

    pub fn get(&self, vehicle: usize) -> u32 {
        self.ages[vehicle]
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.ages.iter().copied()
    }

    /// On completion at slot `t` of a task generated at `t_g`, the new
    /// status age is the task's system time plus the executing node's
    /// cached-data age.
    pub fn complete(&mut self, vehicle: usize, t: u64, t_g: u64, data_age: u32) {
        self.ages[vehicle] = (t - t_g) as u32 + data_age;
    }

    /// No completion this slot: the status age grows by one.
    pub fn idle_tick(&mut self, vehicle: usize) {
        self.ages[vehicle] += 1;
    }

    /// Number of vehicles whose status age exceeds the threshold.
    pub fn threshold_violations(&self, threshold: u32) -> usize {
        self.ages.iter().filter(|a| **a > threshold).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn catalog(n: usize) -> TaskCatalog {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        TaskCatalog::build(&TaskConfig::default(), n, &mut rng)
    }

    #[test]
    fn zipf_probabilities_w5() {
        // w^-1 / H_5, H_5 = 1 + 1/2 + 1/3 + 1/4 + 1/5 = 2.28333...
        let p = zipf_probabilities(5, 1.0);
        let expected = [0.4380, 0.2190, 0.1460, 0.1095, 0.0876];
        for (got, want) in p.iter().zip(expected) {
            assert!((got - want).abs() < 5e-5, "{got} vs {want}");
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_arrival_keeps_older_entry() {
        let cat = catalog(1); // single type: every arrival is type 0
        let mut buf = TaskBuffers::empty(1, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        buf.sample_arrivals(&cat, 1.0, 3, &mut rng);
        buf.sample_arrivals(&cat, 1.0, 4, &mut rng);
        assert_eq!(buf.head_task(0), Some((0, 3)));
    }

    #[test]
    fn zero_probability_no_arrivals() {
        let cat = catalog(3);
        let mut buf = TaskBuffers::empty(4, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        buf.sample_arrivals(&cat, 0.0, 0, &mut rng);
        for i in 0..4 {
            assert_eq!(buf.head_task(i), None);
        }
    }

    #[test]
    fn zipf_sampling_matches_law() {
        let cat = catalog(5);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let mut counts = [0usize; 5];
        let draws = 200_000;
        for _ in 0..draws {
            counts[cat.sample_type(&mut rng)] += 1;
        }
        for (w, p) in cat.popularity.iter().enumerate() {
            let freq = counts[w] as f64 / draws as f64;
            assert!((freq - p).abs() < 0.005, "type {w}: {freq} vs {p}");
        }
    }

    #[test]
    fn head_task_is_oldest() {
        let mut buf = TaskBuffers::empty(1, 5);
        buf.pending[0][2] = Some(3);
        buf.pending[0][4] = Some(5);
        assert_eq!(buf.head_task(0), Some((2, 3)));
    }

    #[test]
    fn head_task_tie_breaks_to_lowest_type() {
        let mut buf = TaskBuffers::empty(1, 5);
        buf.pending[0][3] = Some(2);
        buf.pending[0][1] = Some(2);
        assert_eq!(buf.head_task(0), Some((1, 2)));
    }

    #[test]
    fn head_task_empty_is_none() {
        let buf = TaskBuffers::empty(1, 5);
        assert_eq!(buf.head_task(0), None);
    }

    #[test]
    fn completion_sets_system_time_plus_data_age() {
        let mut status = StatusAges::zeroed(1);
        status.complete(0, 5, 3, 0); // BS: data age 0
        assert_eq!(status.get(0), 2);
        status.complete(0, 5, 3, 2); // UAV with data age 2
        assert_eq!(status.get(0), 4);
        status.complete(0, 5, 5, 1); // same-slot completion, local data age 1
        assert_eq!(status.get(0), 1);
    }

    #[test]
    fn idle_tick_increments() {
        let mut status = StatusAges::zeroed(1);
        status.idle_tick(0);
        assert_eq!(status.get(0), 1);
        status.idle_tick(0);
        assert_eq!(status.get(0), 2);
    }

    #[test]
    fn threshold_violations_counts_strict_exceedance() {
        let mut status = StatusAges::zeroed(3);
        for _ in 0..20 {
            for i in 0..3 {
                status.idle_tick(i);
            }
        }
        assert_eq!(status.threshold_violations(20), 0); // at threshold: fine
        status.idle_tick(0);
        assert_eq!(status.threshold_violations(20), 1);
        status.idle_tick(1);
        status.idle_tick(2);
        assert_eq!(status.threshold_violations(20), 3);
    }
}

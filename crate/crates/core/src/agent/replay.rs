//! Split experience replay: transitions are routed into a positive or a
//! negative ring buffer by a reward threshold, and sampled in a fixed
//! proportion during the first fraction of each episode.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;

/// One stored experience tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

/// Where a batch came from, for sampling-statistics checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleInfo {
    /// Entries drawn from the negative buffer.
    pub from_negative: usize,
    /// Whether the fixed-proportion (differentiated) rule was in force.
    pub differentiated: bool,
}

#[derive(Debug, Clone)]
pub struct SplitReplay {
    positive: VecDeque<Transition>,
    negative: VecDeque<Transition>,
    capacity_each: usize,
    reward_threshold: f64,
    /// Reproduces the published listing's inverted inequalities when set.
    invert_split: bool,
    /// Fraction of each batch drawn from the negative buffer.
    rho: f64,
    batch_size: usize,
    /// Differentiated sampling applies to the first `n_ne` steps of an episode.
    n_ne: usize,
    /// Uniform-replay ablation: fills a single logical buffer rule.
    differentiated: bool,
}

impl SplitReplay {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        capacity_each: usize,
        reward_threshold: f64,
        invert_split: bool,
        rho: f64,
        batch_size: usize,
        n_ne: usize,
        differentiated: bool,
    ) -> Self {
        Self {
            positive: VecDeque::with_capacity(capacity_each),
            negative: VecDeque::with_capacity(capacity_each),
            capacity_each,
            reward_threshold,
            invert_split,
            rho,
            batch_size,
            n_ne,
            differentiated,
        }
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positive_len(&self) -> usize {
        self.positive.len()
    }

    pub fn negative_len(&self) -> usize {
        self.negative.len()
    }

    pub fn reward_threshold(&self) -> f64 {
        self.reward_threshold
    }

    pub fn set_reward_threshold(&mut self, threshold: f64) {
        self.reward_threshold = threshold;
    }

    /// Routes by reward: at or above the threshold is positive
    /// experience (inverted when configured). Oldest entries are
    /// evicted once a buffer is full.
    pub fn store(&mut self, transition: Transition) {
        let favorable = transition.reward >= self.reward_threshold;
        let to_positive = favorable != self.invert_split;
        let buf = if to_positive { &mut self.positive } else { &mut self.negative };
        if buf.len() == self.capacity_each {
            buf.pop_front();
        }
        buf.push_back(transition);
    }

    /// Draws a batch. During the first `n_ne` steps of an episode the
    /// negative buffer contributes round(rho * batch) entries (topped up
    /// from the other buffer when short); afterwards draws are uniform
    /// over the union. Returns None until enough transitions exist.
    pub fn sample<R: Rng>(
        &self,
        step_in_episode: usize,
        rng: &mut R,
    ) -> Option<(Vec<&Transition>, SampleInfo)> {
        if self.len() < self.batch_size {
            return None;
        }
        let differentiated = self.differentiated && step_in_episode < self.n_ne;
        let n_negative = if differentiated {
            let target = libm::round(self.rho * self.batch_size as f64) as usize;
            let mut n = target.min(self.negative.len());
            // Top up from the negative side if the positive side is short.
            let n_pos = self.batch_size - n;
            if n_pos > self.positive.len() {
                n = self.batch_size - self.positive.len();
            }
            n
        } else {
            // Uniform over the union, weighted by buffer sizes.
            let total = self.len();
            (0..self.batch_size)
                .filter(|_| rng.gen_range(0..total) < self.negative.len())
                .count()
        };
        let mut batch = Vec::with_capacity(self.batch_size);
        for _ in 0..n_negative {
            batch.push(&self.negative[rng.gen_range(0..self.negative.len())]);
        }
        for _ in n_negative..self.batch_size {
            batch.push(&self.positive[rng.gen_range(0..self.positive.len())]);
        }
        Some((batch, SampleInfo { from_negative: n_negative, differentiated }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn transition(reward: f64) -> Transition {
        Transition { state: vec![0.0], action: vec![0.0], reward, next_state: vec![0.0] }
    }

    fn replay(threshold: f64) -> SplitReplay {
        SplitReplay::new(5000, threshold, false, 0.1, 64, 10, true)
    }

    #[test]
    fn high_reward_goes_positive() {
        let mut r = replay(0.3);
        r.store(transition(0.9));
        assert_eq!(r.positive_len(), 1);
        assert_eq!(r.negative_len(), 0);
    }

    #[test]
    fn boundary_reward_goes_positive() {
        let mut r = replay(0.3);
        r.store(transition(0.3));
        assert_eq!(r.positive_len(), 1);
    }

    #[test]
    fn low_reward_goes_negative() {
        let mut r = replay(0.3);
        r.store(transition(-1.0));
        assert_eq!(r.negative_len(), 1);
    }

    #[test]
    fn inverted_split_swaps_sides() {
        let mut r = SplitReplay::new(100, 0.3, true, 0.1, 4, 10, true);
        r.store(transition(0.9));
        assert_eq!(r.negative_len(), 1);
        r.store(transition(-1.0));
        assert_eq!(r.positive_len(), 1);
    }

    #[test]
    fn ring_evicts_oldest() {
        let mut r = SplitReplay::new(3, 0.0, false, 0.1, 2, 10, true);
        for k in 0..4 {
            r.store(transition(k as f64 + 1.0));
        }
        assert_eq!(r.positive_len(), 3);
        // Oldest (reward 1.0) evicted.
        assert_eq!(r.positive[0].reward, 2.0);
    }

    #[test]
    fn differentiated_batch_has_exact_negative_count() {
        let mut r = replay(0.0);
        for _ in 0..100 {
            r.store(transition(1.0));
            r.store(transition(-1.0));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (batch, info) = r.sample(0, &mut rng).unwrap();
            assert_eq!(batch.len(), 64);
            assert_eq!(info.from_negative, 6); // round(0.1 * 64)
            assert!(info.differentiated);
            assert_eq!(batch.iter().filter(|t| t.reward < 0.0).count(), 6);
        }
    }

    #[test]
    fn rho_zero_all_positive() {
        let mut r = SplitReplay::new(5000, 0.0, false, 0.0, 64, 10, true);
        for _ in 0..100 {
            r.store(transition(1.0));
            r.store(transition(-1.0));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let (_, info) = r.sample(0, &mut rng).unwrap();
        assert_eq!(info.from_negative, 0);
    }

    #[test]
    fn empty_negative_buffer_tops_up_from_positive() {
        let mut r = replay(0.0);
        for _ in 0..100 {
            r.store(transition(1.0));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let (batch, info) = r.sample(0, &mut rng).unwrap();
        assert_eq!(batch.len(), 64);
        assert_eq!(info.from_negative, 0);
    }

    #[test]
    fn short_positive_buffer_tops_up_from_negative() {
        let mut r = replay(0.0);
        for _ in 0..10 {
            r.store(transition(1.0));
        }
        for _ in 0..100 {
            r.store(transition(-1.0));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let (batch, info) = r.sample(0, &mut rng).unwrap();
        assert_eq!(batch.len(), 64);
        assert_eq!(info.from_negative, 64 - 10);
    }

    #[test]
    fn after_cutover_sampling_is_weighted_uniform() {
        let mut r = replay(0.0);
        for _ in 0..300 {
            r.store(transition(1.0));
            r.store(transition(-1.0));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut total_negative = 0usize;
        let trials = 2000;
        for _ in 0..trials {
            let (_, info) = r.sample(10, &mut rng).unwrap();
            assert!(!info.differentiated);
            total_negative += info.from_negative;
        }
        // Half the union is negative: expect ~32 of 64 per batch.
        let mean = total_negative as f64 / trials as f64;
        assert!((mean - 32.0).abs() < 1.0, "mean negative {mean}");
    }

    #[test]
    fn not_ready_until_one_batch() {
        let mut r = replay(0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for _ in 0..63 {
            r.store(transition(1.0));
        }
        assert!(r.sample(0, &mut rng).is_none());
        r.store(transition(1.0));
        assert!(r.sample(0, &mut rng).is_some());
    }

    #[test]
    fn uniform_ablation_ignores_cutover() {
        let mut r = SplitReplay::new(5000, 0.0, false, 0.1, 64, 10, false);
        for _ in 0..200 {
            r.store(transition(1.0));
            r.store(transition(-1.0));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let (_, info) = r.sample(0, &mut rng).unwrap();
        assert!(!info.differentiated);
    }
}

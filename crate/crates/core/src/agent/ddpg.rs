//! The DDPG training loop pieces: action selection with exploration
//! noise, target computation, critic descent, actor ascent through the
//! critic, and soft target updates.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;

use crate::agent::mlp::{Gradients, Mlp, OutputActivation};
use crate::agent::noise::OuNoise;
use crate::agent::replay::{SampleInfo, SplitReplay, Transition};
use crate::error::SimError;
use crate::rng::SeedSpawner;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Hidden layer widths shared by actor and critic.
    pub hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    /// Soft-update step size.
    pub chi_soft: f64,
    pub batch_size: usize,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub ou_sigma_decay: f64,
    /// Capacity of each of the two replay buffers.
    pub replay_capacity_each: usize,
    /// Fraction of a differentiated batch drawn from the negative buffer.
    pub rho: f64,
    /// Fraction of each episode's steps that sample differentiated.
    pub chi_replay: f64,
    /// Fixed reward threshold; None selects the adaptive percentile rule.
    pub r_th_fixed: Option<f64>,
    /// Reproduce the published listing's inverted split inequalities.
    pub invert_split: bool,
    /// Disable the split sampling entirely (uniform-replay ablation).
    pub differentiated: bool,
    /// Steps per episode, used to size the differentiated window.
    pub steps_per_episode: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            hidden: alloc::vec![64, 32],
            actor_lr: 1.0e-4,
            critic_lr: 1.0e-3,
            gamma: 0.95,
            chi_soft: 0.005,
            batch_size: 64,
            ou_theta: 0.15,
            ou_sigma: 0.2,
            ou_sigma_decay: 0.995,
            replay_capacity_each: 5000,
            rho: 0.1,
            chi_replay: 0.1,
            r_th_fixed: None,
            invert_split: false,
            differentiated: true,
            steps_per_episode: 100,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.actor_lr > 0.0
            && self.critic_lr > 0.0
            && self.gamma > 0.0
            && self.gamma < 1.0
            && self.chi_soft > 0.0
            && self.chi_soft < 1.0
            && self.batch_size > 0
            && (0.0..=1.0).contains(&self.rho)
            && self.replay_capacity_each > 0
            && self.steps_per_episode > 0;
        if ok {
            Ok(())
        } else {
            Err(SimError::Config(format!("invalid hyperparameters: {self:?}")))
        }
    }

    /// Differentiated-step budget per episode.
    pub fn n_ne(&self) -> usize {
        libm::round(self.steps_per_episode as f64 * self.chi_replay) as usize
    }
}

/// Diagnostics of one training step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainReport {
    pub critic_loss: f64,
    pub sample: SampleInfo,
}

#[derive(Debug, Clone)]
pub struct DdpgAgent {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
    pub noise: OuNoise,
    pub replay: SplitReplay,
    hp: Hyperparams,
    state_dim: usize,
    action_dim: usize,
    noise_rng: ChaCha12Rng,
    sample_rng: ChaCha12Rng,
    /// Recent rewards feeding the adaptive threshold.
    reward_window: VecDeque<f64>,
}

const REWARD_WINDOW: usize = 500;
/// Output layers start near zero (uniform init scaled down) so the
/// initial policy emits small logits.
const FINAL_LAYER_INIT_SCALE: f64 = 0.01;
/// Percentile of recent rewards used as the adaptive split threshold.
const R_TH_PERCENTILE: f64 = 0.25;

impl DdpgAgent {
    pub fn new(
        state_dim: usize,
        action_dim: usize,
        hp: Hyperparams,
        spawner: &SeedSpawner,
    ) -> Result<Self, SimError> {
        hp.validate()?;
        let mut init_rng = spawner.stream("network-init");
        let actor_sizes: Vec<usize> = core::iter::once(state_dim)
            .chain(hp.hidden.iter().copied())
            .chain(core::iter::once(action_dim))
            .collect();
        let critic_sizes: Vec<usize> = core::iter::once(state_dim + action_dim)
            .chain(hp.hidden.iter().copied())
            .chain(core::iter::once(1))
            .collect();
        let mut actor = Mlp::random(&actor_sizes, OutputActivation::Tanh, &mut init_rng);
        let mut critic = Mlp::random(&critic_sizes, OutputActivation::Identity, &mut init_rng);
        actor.scale_final_layer(FINAL_LAYER_INIT_SCALE);
        critic.scale_final_layer(FINAL_LAYER_INIT_SCALE);
        let replay = SplitReplay::new(
            hp.replay_capacity_each,
            hp.r_th_fixed.unwrap_or(0.0),
            hp.invert_split,
            hp.rho,
            hp.batch_size,
            hp.n_ne(),
            hp.differentiated,
        );
        Ok(Self {
            target_actor: actor.clone(),
            target_critic: critic.clone(),
            actor,
            critic,
            noise: OuNoise::new(action_dim, hp.ou_theta, hp.ou_sigma, hp.ou_sigma_decay),
            replay,
            hp,
            state_dim,
            action_dim,
            noise_rng: spawner.stream("noise"),
            sample_rng: spawner.stream("replay-sampling"),
            reward_window: VecDeque::with_capacity(REWARD_WINDOW),
        })
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    /// Deterministic policy output plus OU noise, clamped to [-1, 1].
    /// With `explore` off this is exactly the actor output.
    pub fn select_action(&mut self, state: &[f64], explore: bool) -> Result<Vec<f64>, SimError> {
        let cache = self.actor.forward(state)?;
        let mut action = cache.output().to_vec();
        if explore {
            let noise = self.noise.step(&mut self.noise_rng);
            for (a, n) in action.iter_mut().zip(noise) {
                *a = (*a + n).clamp(-1.0, 1.0);
            }
        }
        Ok(action)
    }

    /// Stores a transition and feeds the adaptive-threshold window.
    pub fn store(&mut self, transition: Transition) {
        if self.reward_window.len() == REWARD_WINDOW {
            self.reward_window.pop_front();
        }
        self.reward_window.push_back(transition.reward);
        self.replay.store(transition);
    }

    /// One critic-descent / actor-ascent / soft-update cycle on a batch
    /// sampled for `step_in_episode`. Returns None while the replay is
    /// not yet warm.
    pub fn train_step(&mut self, step_in_episode: usize) -> Result<Option<TrainReport>, SimError> {
        let Some((batch, sample)) = self.replay.sample(step_in_episode, &mut self.sample_rng)
        else {
            return Ok(None);
        };
        let batch: Vec<Transition> = batch.into_iter().cloned().collect();
        let inv_batch = 1.0 / batch.len() as f64;

        // Targets y = r + gamma * Q'(s', mu'(s')).
        let mut targets = Vec::with_capacity(batch.len());
        for tr in &batch {
            let next_action = self.target_actor.forward(&tr.next_state)?;
            let q_next = self
                .target_critic
                .forward(&concat(&tr.next_state, next_action.output()))?
                .output()[0];
            targets.push(tr.reward + self.hp.gamma * q_next);
        }

        // Critic: descend the mean-square error.
        let mut critic_grads = Gradients::zeros_like(&self.critic);
        let mut critic_loss = 0.0;
        for (tr, y) in batch.iter().zip(&targets) {
            let cache = self.critic.forward(&concat(&tr.state, &tr.action))?;
            let q = cache.output()[0];
            let err = y - q;
            critic_loss += err * err * inv_batch;
            // dL/dQ = -2 (y - Q) / |B|
            let g = self.critic.backward(&cache, &[-2.0 * err * inv_batch])?;
            critic_grads.add_scaled(&g, 1.0);
        }
        if !critic_loss.is_finite() {
            return Err(SimError::TrainingDiverged(format!("critic loss {critic_loss}")));
        }

        // Actor: ascend the Monte-Carlo policy gradient
        // mean_i grad_theta mu(s_i) * grad_a Q(s_i, a)|_{a = mu(s_i)}.
        let mut actor_grads = Gradients::zeros_like(&self.actor);
        for tr in &batch {
            let actor_cache = self.actor.forward(&tr.state)?;
            let critic_cache =
                self.critic.forward(&concat(&tr.state, actor_cache.output()))?;
            let dq = self.critic.backward(&critic_cache, &[1.0])?;
            let dq_da = &dq.dinput[self.state_dim..];
            let g = self.actor.backward(&actor_cache, dq_da)?;
            actor_grads.add_scaled(&g, inv_batch);
        }

        self.critic.apply_gradient(&critic_grads, -self.hp.critic_lr);
        self.actor.apply_gradient(&actor_grads, self.hp.actor_lr);
        if !self.critic.all_finite() || !self.actor.all_finite() {
            return Err(SimError::TrainingDiverged(
                format!("non-finite parameters after update (critic loss {critic_loss})"),
            ));
        }

        self.target_critic.soft_update_from(&self.critic, self.hp.chi_soft);
        self.target_actor.soft_update_from(&self.actor, self.hp.chi_soft);
        Ok(Some(TrainReport { critic_loss, sample }))
    }

    /// Episode boundary: decay exploration and, under the adaptive rule,
    /// recompute the split threshold from recent rewards.
    pub fn end_episode(&mut self) {
        self.noise.end_episode();
        if self.hp.r_th_fixed.is_none() && !self.reward_window.is_empty() {
            let mut rewards: Vec<f64> = self.reward_window.iter().copied().collect();
            rewards.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let idx = ((rewards.len() - 1) as f64 * R_TH_PERCENTILE) as usize;
            self.replay.set_reward_threshold(rewards[idx]);
        }
    }
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    out.extend_from_slice(a);
    out.extend_from_slice(b);
    out
}

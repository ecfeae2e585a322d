//! DDPG learner with hand-written forward/backward passes,
//! Ornstein-Uhlenbeck exploration, soft-updated target networks, and a
//! split (positive/negative) experience replay.

mod ddpg;
mod mlp;
mod noise;
mod replay;

pub use ddpg::{DdpgAgent, Hyperparams, TrainReport};
pub use mlp::{ForwardCache, Gradients, Mlp, OutputActivation};
pub use noise::OuNoise;
pub use replay::{SampleInfo, SplitReplay, Transition};

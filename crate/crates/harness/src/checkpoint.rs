//! Learner checkpoints: a versioned text format storing the four
//! networks bit-exactly (f64 values as hex bit patterns).

use std::fs;
use std::path::Path;

use vanet_aoi_core::agent::{DdpgAgent, Mlp};
use vanet_aoi_core::rng::SeedSpawner;
use vanet_aoi_core::SimError;

use crate::config::ExperimentConfig;

const MAGIC: &str = "vanet-aoi-checkpoint 1";
const NETS: [&str; 4] = ["actor", "critic", "target_actor", "target_critic"];

fn err(msg: String) -> SimError {
    SimError::Config(msg)
}

pub fn save_agent(path: &Path, agent: &DdpgAgent) -> Result<(), SimError> {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("state_dim {}\n", agent.state_dim()));
    out.push_str(&format!("action_dim {}\n", agent.action_dim()));
    let hidden: Vec<String> =
        agent.hyperparams().hidden.iter().map(|h| h.to_string()).collect();
    out.push_str(&format!("hidden {}\n", hidden.join(",")));
    let nets = [&agent.actor, &agent.critic, &agent.target_actor, &agent.target_critic];
    for (name, net) in NETS.iter().zip(nets) {
        let params = net.params_flat();
        out.push_str(&format!("net {name} {}\n", params.len()));
        for chunk in params.chunks(8) {
            let words: Vec<String> =
                chunk.iter().map(|x| format!("{:016x}", x.to_bits())).collect();
            out.push_str(&words.join(" "));
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|e| err(format!("cannot write {}: {e}", path.display())))
}

/// Rebuilds an agent from the run config's hyperparameters and the
/// checkpoint's weights. Network shapes must agree.
pub fn load_agent(path: &Path, cfg: &ExperimentConfig) -> Result<DdpgAgent, SimError> {
    let text = fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(err(format!("{}: not a checkpoint file", path.display())));
    }
    let field = |line: Option<&str>, key: &str| -> Result<String, SimError> {
        let line = line.ok_or_else(|| err(format!("truncated checkpoint, missing {key}")))?;
        line.strip_prefix(key)
            .map(|v| v.trim().to_string())
            .ok_or_else(|| err(format!("expected {key}, got {line:?}")))
    };
    let state_dim: usize =
        field(lines.next(), "state_dim")?.parse().map_err(|_| err("bad state_dim".into()))?;
    let action_dim: usize =
        field(lines.next(), "action_dim")?.parse().map_err(|_| err("bad action_dim".into()))?;
    let hidden: Vec<usize> = field(lines.next(), "hidden")?
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| err("bad hidden sizes".into())))
        .collect::<Result<_, _>>()?;
    if state_dim != cfg.scenario.state_dim() || action_dim != cfg.scenario.action_dim() {
        return Err(err(format!(
            "checkpoint dims ({state_dim}, {action_dim}) do not match config ({}, {})",
            cfg.scenario.state_dim(),
            cfg.scenario.action_dim()
        )));
    }
    let mut hp = cfg.hyper.clone();
    hp.hidden = hidden;
    let spawner = SeedSpawner::new(cfg.seed);
    let mut agent = DdpgAgent::new(state_dim, action_dim, hp, &spawner)?;
    {
        let nets: [&mut Mlp; 4] = [
            &mut agent.actor,
            &mut agent.critic,
            &mut agent.target_actor,
            &mut agent.target_critic,
        ];
        for (name, net) in NETS.iter().zip(nets) {
            let header = field(lines.next(), "net")?;
            let mut parts = header.split_whitespace();
            let got_name = parts.next().unwrap_or("");
            let count: usize = parts
                .next()
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| err(format!("bad net header for {name}")))?;
            if got_name != *name {
                return Err(err(format!("expected net {name}, got {got_name}")));
            }
            if count != net.param_count() {
                return Err(err(format!(
                    "net {name}: checkpoint has {count} params, config shape needs {}",
                    net.param_count()
                )));
            }
            let mut params = Vec::with_capacity(count);
            while params.len() < count {
                let line =
                    lines.next().ok_or_else(|| err(format!("net {name}: truncated params")))?;
                for word in line.split_whitespace() {
                    let bits = u64::from_str_radix(word, 16)
                        .map_err(|_| err(format!("net {name}: bad hex word {word:?}")))?;
                    params.push(f64::from_bits(bits));
                }
            }
            if params.len() != count {
                return Err(err(format!("net {name}: expected {count} params, got more")));
            }
            net.set_params_flat(&params)?;
        }
    }
    Ok(agent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::train_ddpg;

    fn tiny_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.scenario.n_vehicles = 2;
        cfg.scenario.steps_per_episode = 5;
        cfg.hyper.steps_per_episode = 5;
        cfg.hyper.hidden = vec![8];
        cfg.hyper.batch_size = 4;
        cfg.hyper.replay_capacity_each = 20;
        cfg
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let cfg = tiny_cfg();
        let (agent, _) = train_ddpg(&cfg, 1, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ckpt");
        save_agent(&path, &agent).unwrap();
        let loaded = load_agent(&path, &cfg).unwrap();
        assert_eq!(agent.actor.params_flat(), loaded.actor.params_flat());
        assert_eq!(agent.critic.params_flat(), loaded.critic.params_flat());
        assert_eq!(agent.target_actor.params_flat(), loaded.target_actor.params_flat());
        assert_eq!(agent.target_critic.params_flat(), loaded.target_critic.params_flat());
    }

    #[test]
    fn dim_mismatch_rejected() {
        let cfg = tiny_cfg();
        let (agent, _) = train_ddpg(&cfg, 1, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ckpt");
        save_agent(&path, &agent).unwrap();
        let mut other = cfg.clone();
        other.scenario.n_vehicles = 3;
        assert!(load_agent(&path, &other).is_err());
    }

    #[test]
    fn garbage_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ckpt");
        std::fs::write(&path, "not a checkpoint\n").unwrap();
        assert!(load_agent(&path, &tiny_cfg()).is_err());
    }
}

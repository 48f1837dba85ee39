use agents::a2c::{a2c_train, AgentEnv, TrainConfig, TrainError};
use agents::net::{Arch, NetConfig};
use agents::{train_gridworld, EnvSpec, LrSchedule, SizeSpec};
use gridworld::{Mode, TaskCategory};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One-step episodes: the state is one of three features and the reward
/// depends on the state only.
struct Bandit {
    state: u32,
}

const PAYOFF: [f64; 3] = [0.7, -0.4, 0.1];

impl AgentEnv for Bandit {
    fn observe(&self) -> Result<(Vec<u32>, Vec<u32>), TrainError> {
        Ok((vec![self.state], vec![]))
    }

    fn step(&mut self, _action: usize) -> Result<(f64, bool), TrainError> {
        Ok((PAYOFF[self.state as usize], true))
    }

    fn begin_episode(&mut self, rng: &mut ChaCha8Rng, _step: u64) -> Result<(), TrainError> {
        self.state = rng.gen_range(0..3);
        Ok(())
    }
}

fn bandit_net(arch: Arch) -> NetConfig {
    let mut c = NetConfig::new(3, 1, 2, arch);
    (c.h1, c.h2, c.bottleneck, c.hidden) = (8, 8, 4, 8);
    c
}

#[test]
fn myopic_critic_regresses_reward() {
    for arch in [Arch::Standard, Arch::LatentGoal] {
        let cfg = TrainConfig {
            gamma: 0.0,
            total_steps: 30_000,
            eval_interval: 1_000,
            n_envs: 4,
            lr: LrSchedule::Constant(3e-3),
            ..TrainConfig::default()
        };
        let envs = (0..4).map(|i| Bandit { state: i % 3 }).collect();
        let net = bandit_net(arch);
        let res = a2c_train(envs, &net, &cfg).unwrap();
        let h = res.params.initial_hidden();
        let mse = (0..3u32)
            .map(|s| (res.params.forward(&[s], &[], &h).unwrap().value - PAYOFF[s as usize]).powi(2))
            .sum::<f64>()
            / 3.0;
        assert!(mse < 0.01, "{arch:?}: {mse}");
        assert_eq!(res.curve.points.len(), 30);
    }
}

fn gridworld_run(seed: u64) -> agents::TrainResult {
    let mut spec = EnvSpec::new(Mode::Minecraft);
    spec.categories = vec![TaskCategory::Reachability];
    spec.objects = Some(3);
    let mut net = agents::net_config_for(&spec, Arch::LatentGoal);
    (net.h1, net.h2, net.hidden) = (16, 16, 16);
    let cfg = TrainConfig { total_steps: 3_000, eval_interval: 700, n_envs: 4, seed, ..TrainConfig::default() };
    train_gridworld(&spec, SizeSpec::Fixed(5), &net, &cfg).unwrap()
}

#[test]
fn training_is_deterministic() {
    let a = gridworld_run(4);
    let b = gridworld_run(4);
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.params, b.params);
    assert_eq!(a.curve.points.len(), 3_000 / 700);
    assert_ne!(gridworld_run(5).params, a.params);
}

#[test]
fn curve_length_and_step_count() {
    let cfg = TrainConfig { total_steps: 1_000, eval_interval: 100, n_envs: 3, rollout: 7, ..TrainConfig::default() };
    let envs = (0..3).map(|i| Bandit { state: i }).collect();
    let res = a2c_train(envs, &bandit_net(Arch::Standard), &cfg).unwrap();
    assert_eq!(res.curve.points.len(), 10);
    assert_eq!(res.steps, 1_008);
    assert_eq!(res.updates, 48);
    assert_eq!(res.episodes, 1_008);
    assert!(res.curve.points.iter().all(|p| p.episodes > 0));
}

#[test]
fn config_validation() {
    let bad = [
        TrainConfig { gamma: 1.0, ..TrainConfig::default() },
        TrainConfig { entropy: -1.0, ..TrainConfig::default() },
        TrainConfig { eval_interval: 0, ..TrainConfig::default() },
    ];
    for c in bad {
        assert!(matches!(c.validate(), Err(TrainError::Config(_))));
    }
    let mut spec = EnvSpec::new(Mode::Minecraft);
    spec.categories = vec![TaskCategory::Reachability];
    let wrong = NetConfig::new(10, 10, 4, Arch::Standard);
    let cfg = TrainConfig { total_steps: 100, eval_interval: 10, ..TrainConfig::default() };
    assert!(matches!(train_gridworld(&spec, SizeSpec::Fixed(5), &wrong, &cfg), Err(TrainError::Net(_))));
}

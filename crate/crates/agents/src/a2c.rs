//! Synchronous advantage actor-critic over parallel environments.
//!
//! Each update collects `rollout` steps from each of `n_envs` environments
//! in index order, backpropagates every rollout through time, averages the
//! gradients over all collected steps and takes one RMSProp step. The
//! recurrent state persists across rollouts and resets at episode ends.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use gridworld::{actions, Action, EnvError, GridEnv, ObjectCatalog};

use crate::episodes::{mix, EnvSpec, SampleError, SizeSpec};
use crate::instr::{encode_instruction, UnknownAtom};
use crate::net::{net_backward_into, LossParts, LossWeights, NetConfig, NetError, NetParams, Rollout, Transition};
use crate::optim::{grad_norm, scale, LrSchedule, RmsProp};
use crate::policy::sample_index;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Instruction(#[from] UnknownAtom),
}

/// An environment as seen by the learner.
pub trait AgentEnv {
    /// Active feature indices and instruction indices of the current state.
    fn observe(&self) -> Result<(Vec<u32>, Vec<u32>), TrainError>;

    /// Reward and whether the episode ended.
    fn step(&mut self, action: usize) -> Result<(f64, bool), TrainError>;

    /// Replace the finished episode by a new one. `step` is the number of
    /// environment steps taken so far across all environments.
    fn begin_episode(&mut self, rng: &mut ChaCha8Rng, step: u64) -> Result<(), TrainError>;
}

/// Gridworld episodes drawn from an [`EnvSpec`].
pub struct TaskEnv {
    spec: EnvSpec,
    sizes: SizeSpec,
    catalog: Arc<ObjectCatalog>,
    env: GridEnv,
    acts: &'static [Action],
}

impl TaskEnv {
    pub fn new(spec: EnvSpec, sizes: SizeSpec, catalog: Arc<ObjectCatalog>, rng: &mut ChaCha8Rng) -> Result<Self, TrainError> {
        let env = spec.sample(&catalog, sizes.sample(rng, 0), rng)?;
        let acts = actions(spec.mode);
        Ok(TaskEnv { spec, sizes, catalog, env, acts })
    }

    pub fn env(&self) -> &GridEnv {
        &self.env
    }
}

impl AgentEnv for TaskEnv {
    fn observe(&self) -> Result<(Vec<u32>, Vec<u32>), TrainError> {
        Ok((self.env.features().active, encode_instruction(&self.catalog, &self.env.instruction())?))
    }

    fn step(&mut self, action: usize) -> Result<(f64, bool), TrainError> {
        let s = self.env.step(self.acts[action])?;
        Ok((s.reward.reward.as_f64(), s.done))
    }

    fn begin_episode(&mut self, rng: &mut ChaCha8Rng, step: u64) -> Result<(), TrainError> {
        let n = self.sizes.sample(rng, step);
        self.env = self.spec.sample(&self.catalog, n, rng)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub gamma: f64,
    pub value_weight: f64,
    pub entropy: f64,
    pub rollout: usize,
    pub n_envs: usize,
    pub lr: LrSchedule,
    pub rms_decay: f64,
    pub rms_eps: f64,
    /// Initial squared-gradient accumulator; damps the first few updates.
    #[serde(default)]
    pub rms_init: f64,
    /// Rescale the averaged gradient to at most this norm.
    pub max_grad_norm: Option<f64>,
    pub total_steps: u64,
    pub eval_interval: u64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.99,
            value_weight: 0.5,
            entropy: 1e-3,
            rollout: 5,
            n_envs: 16,
            lr: LrSchedule::Constant(1e-3),
            rms_decay: 0.99,
            rms_eps: 1e-5,
            rms_init: 0.0,
            max_grad_norm: None,
            total_steps: 200_000,
            eval_interval: 10_000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// `gamma` may be 0, which turns the critic into a reward regressor.
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.into()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if self.value_weight < 0.0 || self.entropy < 0.0 {
            return bad("loss weights must be non-negative");
        }
        if self.rollout == 0 || self.n_envs == 0 {
            return bad("rollout length and environment count must be positive");
        }
        if self.eval_interval == 0 || self.total_steps < self.eval_interval {
            return bad("eval_interval must be positive and at most total_steps");
        }
        if self.rms_init < 0.0 || self.rms_eps <= 0.0 || !(0.0..1.0).contains(&self.rms_decay) {
            return bad("rms_init must be >= 0, rms_eps > 0 and rms_decay in [0, 1)");
        }
        Ok(())
    }

    pub fn weights(&self) -> LossWeights {
        LossWeights { gamma: self.gamma, value_weight: self.value_weight, entropy: self.entropy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Last environment step of the window.
    pub step: u64,
    pub mean_return: f64,
    pub sd: f64,
    /// Episodes ending in the window; when 0 the previous window's
    /// statistics are repeated.
    pub episodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub interval: u64,
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    fn from_returns(interval: u64, windows: usize, buckets: &[Vec<f64>]) -> Self {
        let mut points = Vec::with_capacity(windows);
        let (mut mean, mut sd) = (0.0, 0.0);
        for (w, b) in buckets.iter().enumerate().take(windows) {
            if !b.is_empty() {
                (mean, sd) = mean_sd(b);
            }
            points.push(CurvePoint { step: (w as u64 + 1) * interval, mean_return: mean, sd, episodes: b.len() });
        }
        LearningCurve { interval, points }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,mean_return,sd,episodes\n");
        for p in &self.points {
            s.push_str(&format!("{},{},{},{}\n", p.step, p.mean_return, p.sd, p.episodes));
        }
        s
    }
}

pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub params: NetParams,
    pub curve: LearningCurve,
    pub steps: u64,
    pub updates: u64,
    pub episodes: usize,
    /// Loss terms of the last update, averaged per step.
    pub last_loss: LossParts,
}

/// Statistics of one update, passed to the progress callback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateInfo {
    pub update: u64,
    pub steps: u64,
    pub lr: f64,
    /// Gradient norm before clipping.
    pub grad_norm: f64,
    /// Per-step averages.
    pub loss: LossParts,
}

/// Train a fresh network on the given environments; `envs.len()` overrides
/// `cfg.n_envs`.
pub fn a2c_train<E: AgentEnv>(envs: Vec<E>, net_cfg: &NetConfig, cfg: &TrainConfig) -> Result<TrainResult, TrainError> {
    a2c_train_with(envs, net_cfg, cfg, |_| {})
}

/// [`a2c_train`] calling `on_update` after every parameter update.
pub fn a2c_train_with<E: AgentEnv>(
    mut envs: Vec<E>,
    net_cfg: &NetConfig,
    cfg: &TrainConfig,
    mut on_update: impl FnMut(&UpdateInfo),
) -> Result<TrainResult, TrainError> {
    cfg.validate()?;
    if envs.is_empty() {
        return Err(TrainError::Config("no environments".into()));
    }
    let mut params = NetParams::init(net_cfg)?;
    let mut opt = RmsProp::new(&params, cfg.rms_decay, cfg.rms_eps, cfg.rms_init);
    let w = cfg.weights();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[cfg.seed, 1]));
    let mut env_rngs: Vec<ChaCha8Rng> =
        (0..envs.len()).map(|i| ChaCha8Rng::seed_from_u64(mix(&[cfg.seed, 2, i as u64]))).collect();
    let mut hidden = vec![params.initial_hidden(); envs.len()];
    let mut running = vec![0.0; envs.len()];

    let windows = (cfg.total_steps / cfg.eval_interval) as usize;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); windows];
    let (mut steps, mut updates, mut episodes) = (0u64, 0u64, 0usize);
    let mut last_loss = LossParts::default();

    while steps < cfg.total_steps {
        let mut grads = params.zeros_like();
        let mut parts = LossParts::default();
        let mut count = 0usize;
        for e in 0..envs.len() {
            let h0 = hidden[e].clone();
            let mut tr = Vec::with_capacity(cfg.rollout);
            for _ in 0..cfg.rollout {
                let (feat, instr) = envs[e].observe()?;
                let out = params.forward(&feat, &instr, &hidden[e])?;
                let action = sample_index(&out.probs, &mut rng);
                let (reward, done) = envs[e].step(action)?;
                steps += 1;
                running[e] += reward;
                tr.push(Transition { feat, instr, action, reward, done });
                if done {
                    let wdx = (((steps - 1) / cfg.eval_interval) as usize).min(windows - 1);
                    buckets[wdx].push(running[e]);
                    running[e] = 0.0;
                    episodes += 1;
                    envs[e].begin_episode(&mut env_rngs[e], steps)?;
                    hidden[e] = params.initial_hidden();
                } else {
                    hidden[e] = out.hidden;
                }
            }
            let bootstrap = if tr.last().is_some_and(|t| t.done) {
                0.0
            } else {
                let (feat, instr) = envs[e].observe()?;
                params.forward(&feat, &instr, &hidden[e])?.value
            };
            count += tr.len();
            let p = net_backward_into(&params, &Rollout { h0, steps: tr, bootstrap }, &w, &mut grads)?;
            parts.policy += p.policy;
            parts.value += p.value;
            parts.entropy += p.entropy;
        }
        let inv = 1.0 / count as f64;
        scale(&mut grads, inv);
        let norm = grad_norm(&grads);
        if let Some(max) = cfg.max_grad_norm {
            if norm > max {
                scale(&mut grads, max / norm);
            }
        }
        let lr = cfg.lr.at(steps);
        opt.step(&mut params, &grads, lr);
        updates += 1;
        last_loss = LossParts { policy: parts.policy * inv, value: parts.value * inv, entropy: parts.entropy * inv };
        on_update(&UpdateInfo { update: updates, steps, lr, grad_norm: norm, loss: last_loss });
    }

    Ok(TrainResult {
        params,
        curve: LearningCurve::from_returns(cfg.eval_interval, windows, &buckets),
        steps,
        updates,
        episodes,
        last_loss,
    })
}

/// Train on `cfg.n_envs` gridworld environments drawn from `spec`.
pub fn train_gridworld(spec: &EnvSpec, sizes: SizeSpec, net_cfg: &NetConfig, cfg: &TrainConfig) -> Result<TrainResult, TrainError> {
    train_gridworld_with(spec, sizes, net_cfg, cfg, |_| {})
}

pub fn train_gridworld_with(
    spec: &EnvSpec,
    sizes: SizeSpec,
    net_cfg: &NetConfig,
    cfg: &TrainConfig,
    on_update: impl FnMut(&UpdateInfo),
) -> Result<TrainResult, TrainError> {
    let catalog = spec.catalog();
    let expect = (spec.feature_width(&catalog), spec.instr_width(&catalog), spec.action_count());
    if (net_cfg.feature_width, net_cfg.instr_width, net_cfg.actions) != expect {
        return Err(NetError::DimensionMismatch(format!(
            "network sized {:?} for an environment of {:?}",
            (net_cfg.feature_width, net_cfg.instr_width, net_cfg.actions),
            expect
        ))
        .into());
    }
    let envs = (0..cfg.n_envs)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(&[cfg.seed, 3, i as u64]));
            TaskEnv::new(spec.clone(), sizes, catalog.clone(), &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    a2c_train_with(envs, net_cfg, cfg, on_update)
}

/// Network config matching the observation and action sizes of `spec`.
/// Small-budget recipe for a latent-goal agent: ReLU, wider init on the
/// sparse inputs, a damped optimizer start and a learning rate annealed to 0.
pub fn desk_recipe(spec: &EnvSpec, total_steps: u64, seed: u64) -> (NetConfig, TrainConfig) {
    let mut net = net_config_for(spec, crate::net::Arch::LatentGoal);
    net.activation = crate::net::Activation::Relu;
    net.input_scale = 3.0;
    net.instr_init = Some(2.0);
    net.seed = seed;
    let cfg = TrainConfig {
        lr: LrSchedule::Linear { from: 3e-3, to: 0.0, steps: total_steps },
        rms_init: 1e-4,
        max_grad_norm: Some(0.5),
        total_steps,
        eval_interval: (total_steps / 20).max(1),
        seed,
        ..TrainConfig::default()
    };
    (net, cfg)
}

pub fn net_config_for(spec: &EnvSpec, arch: crate::net::Arch) -> NetConfig {
    let c = spec.catalog();
    NetConfig::new(spec.feature_width(&c), spec.instr_width(&c), spec.action_count(), arch)
}

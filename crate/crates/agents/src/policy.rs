//! Policies acting in a [`GridEnv`].

use std::collections::VecDeque;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sattl::{AtomicTask, Outcome, Reward, Trace};
use serde::{Deserialize, Serialize};

use gridworld::{actions, Action, EnvError, GridEnv};

use crate::instr::encode_instruction;
use crate::net::NetParams;
use crate::oracle::plan_from;

pub trait Policy: Send + Sync {
    fn name(&self) -> String;

    /// Called before the first step of every episode.
    fn reset(&mut self) {}

    fn act(&mut self, env: &GridEnv, rng: &mut ChaCha8Rng) -> Action;

    /// A fresh copy for an independent episode worker.
    fn fork(&self) -> Box<dyn Policy>;
}

/// Uniform over the mode's actions, stateless.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn name(&self) -> String {
        "random".into()
    }

    fn act(&mut self, env: &GridEnv, rng: &mut ChaCha8Rng) -> Action {
        *actions(env.mode()).choose(rng).expect("non-empty action set")
    }

    fn fork(&self) -> Box<dyn Policy> {
        Box::new(*self)
    }
}

/// Follows an optimal plan for the instruction it is shown. It replans when
/// the instruction changes or the plan runs out, and moves at random when
/// the instruction's goal appears nowhere on the map.
#[derive(Debug, Clone, Default)]
pub struct OraclePolicy {
    queue: VecDeque<Action>,
    planned_for: Option<AtomicTask>,
}

impl OraclePolicy {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn reset(&mut self) {
        self.queue.clear();
        self.planned_for = None;
    }

    fn act(&mut self, env: &GridEnv, rng: &mut ChaCha8Rng) -> Action {
        let instr = env.instruction();
        if self.queue.is_empty() || self.planned_for.as_ref() != Some(&instr) {
            self.queue.clear();
            if let Ok(p) = plan_from(env.catalog(), env.map(), &instr, env.pos(), env.dir(), env.steps_left()) {
                self.queue.extend(p.actions);
            }
            self.planned_for = Some(instr);
        }
        self.queue.pop_front().unwrap_or_else(|| RandomPolicy.act(env, rng))
    }

    fn fork(&self) -> Box<dyn Policy> {
        Box::new(OraclePolicy::new())
    }
}

/// Actor head of a trained network; samples from it, or takes its mode
/// when `greedy`.
#[derive(Debug, Clone)]
pub struct NetPolicy {
    params: Arc<NetParams>,
    hidden: Vec<f64>,
    pub greedy: bool,
    label: String,
}

impl NetPolicy {
    pub fn new(params: Arc<NetParams>, label: impl Into<String>) -> Self {
        let hidden = params.initial_hidden();
        NetPolicy { params, hidden, greedy: false, label: label.into() }
    }

    pub fn params(&self) -> &Arc<NetParams> {
        &self.params
    }
}

pub fn sample_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

impl Policy for NetPolicy {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn reset(&mut self) {
        self.hidden = self.params.initial_hidden();
    }

    fn act(&mut self, env: &GridEnv, rng: &mut ChaCha8Rng) -> Action {
        let feat = env.features().active;
        let instr = encode_instruction(env.catalog(), &env.instruction()).expect("instruction over catalog atoms");
        let out = self.params.forward(&feat, &instr, &self.hidden).expect("network sized for this environment");
        self.hidden = out.hidden;
        let i = if self.greedy { argmax(&out.probs) } else { sample_index(&out.probs, rng) };
        actions(env.mode())[i]
    }

    fn fork(&self) -> Box<dyn Policy> {
        let mut p = self.clone();
        p.reset();
        Box::new(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub total: Reward,
    pub steps: usize,
    pub outcome: Outcome,
    pub trace: Trace,
    pub actions: Vec<Action>,
}

/// Run `policy` from the current state of `env` until the episode ends.
pub fn run_episode(env: &mut GridEnv, policy: &mut dyn Policy, rng: &mut ChaCha8Rng) -> Result<EpisodeResult, EnvError> {
    policy.reset();
    let mut trace = Trace::default();
    let mut total = Reward::ZERO;
    let mut taken = Vec::new();
    while !env.is_done() {
        let a = policy.act(env, rng);
        let s = env.step(a)?;
        total += s.reward.reward;
        trace.push(s.labels);
        taken.push(a);
    }
    Ok(EpisodeResult {
        total,
        steps: trace.len(),
        outcome: env.sm().outcome().expect("finished episode"),
        trace,
        actions: taken,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use gridworld::{build_catalog, generate_map, MapConfig, Mode};
    use rand::SeedableRng;
    use sattl::parse_task;

    #[test]
    fn random_frequencies_near_uniform() {
        for mode in [Mode::Minecraft, Mode::MiniGrid] {
            let c = Arc::new(build_catalog(3, mode));
            let name = c.atom(gridworld::ObjectId(0)).to_string();
            let task = parse_task(&format!("true U + {name}")).unwrap();
            let map = generate_map(&MapConfig::new(mode, 7, 1), &task, &c).unwrap();
            let env = GridEnv::new(c, map, task.into());
            let acts = actions(mode);
            let mut counts = vec![0usize; acts.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut p = RandomPolicy;
            let draws = 10_000;
            for _ in 0..draws {
                let a = p.act(&env, &mut rng);
                counts[acts.iter().position(|&b| b == a).unwrap()] += 1;
            }
            for c in counts {
                let f = c as f64 / draws as f64;
                assert!((f - 1.0 / acts.len() as f64).abs() < 0.02, "{f}");
            }
        }
    }

    #[test]
    fn oracle_episode_matches_plan() {
        let c = Arc::new(build_catalog(3, Mode::MiniGrid));
        let task = parse_task("- red_lava U + blue_key").unwrap();
        for seed in 0..20 {
            let map = generate_map(&MapConfig::new(Mode::MiniGrid, 9, seed), &task, &c).unwrap();
            let plan = crate::oracle::plan_oracle(&c, &map, &task).unwrap();
            let mut env = GridEnv::new(c.clone(), map, task.clone().into());
            let r = run_episode(&mut env, &mut OraclePolicy::new(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
            assert_eq!(r.total, plan.expected_return);
            assert_eq!(r.actions, plan.actions);
        }
    }

    #[test]
    fn sampling_and_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_index(&[0.0, 1.0, 0.0], &mut rng), 1);
        assert_eq!(argmax(&[0.1, 0.5, 0.5]), 1);
    }
}

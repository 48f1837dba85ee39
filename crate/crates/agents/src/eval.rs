//! Paired evaluation of policies and the instruction-reliability experiment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use gridworld::{InstructionView, TaskCategory};

use crate::a2c::mean_sd;
use crate::episodes::{mix, EnvSpec, SampleError};
use crate::policy::{run_episode, Policy, RandomPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub policy: String,
    pub size: usize,
    pub mean: f64,
    pub sd: f64,
    pub episodes: usize,
    /// 100 for the best mean at this size, see [`normalize`].
    pub normalized: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<EvalRow>,
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("policy,size,mean,sd,episodes,normalized\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{},{},{}\n", r.policy, r.size, r.mean, r.sd, r.episodes, r.normalized));
        }
        s
    }

    pub fn get(&self, policy: &str, size: usize) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.policy == policy && r.size == size)
    }
}

/// Returns of one policy on the paired episodes `0..count` of size `n`.
/// Episode `i` uses the same map and task for every policy; the policy's
/// own randomness is seeded per episode as well.
pub fn episode_returns(
    policy: &dyn Policy,
    spec: &EnvSpec,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>, SampleError> {
    let catalog = spec.catalog();
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut env = spec.paired(&catalog, n, seed, i)?;
            let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, n as u64, i, 0xA5]));
            let mut p = policy.fork();
            let r = run_episode(&mut env, p.as_mut(), &mut rng).expect("fresh episode");
            Ok(r.total.as_f64())
        })
        .collect()
}

/// Mean undiscounted return per size, normalized across `policies`.
pub fn evaluate(
    policies: &[&dyn Policy],
    spec: &EnvSpec,
    sizes: &[usize],
    maps_per_size: usize,
    seed: u64,
) -> Result<ResultTable, SampleError> {
    let mut table = ResultTable::default();
    for &n in sizes {
        for p in policies {
            let r = episode_returns(*p, spec, n, maps_per_size, seed)?;
            let (mean, sd) = mean_sd(&r);
            table.rows.push(EvalRow { policy: p.name(), size: n, mean, sd, episodes: r.len(), normalized: 0.0 });
        }
    }
    normalize(&mut table);
    Ok(table)
}

/// `100 + 100 * (mean - best) / max(|best|, 1)` per size: the best mean
/// maps to exactly 100 and every gap of `|best|` costs 100 points, which
/// stays meaningful when returns are negative.
pub fn normalize(table: &mut ResultTable) {
    let sizes: Vec<usize> = table.rows.iter().map(|r| r.size).collect();
    for n in sizes {
        let best = table.rows.iter().filter(|r| r.size == n).map(|r| r.mean).fold(f64::NEG_INFINITY, f64::max);
        let scale = best.abs().max(1.0);
        for r in table.rows.iter_mut().filter(|r| r.size == n) {
            r.normalized = if r.mean == best { 100.0 } else { 100.0 + 100.0 * (r.mean - best) / scale };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlTable {
    pub reliable: f64,
    pub occluded: f64,
    pub deceptive: f64,
    pub random: f64,
    pub episodes: usize,
}

/// Run `policy` on `n_tasks` paired NegativeCond episodes under each
/// instruction view, plus a random walker. Rewards always follow the true
/// task.
pub fn control_experiment(policy: &dyn Policy, spec: &EnvSpec, n: usize, n_tasks: usize, seed: u64) -> Result<ControlTable, SampleError> {
    let mut spec = spec.clone();
    spec.categories = vec![TaskCategory::NegativeCond];
    let mut run = |view, p: &dyn Policy| -> Result<f64, SampleError> {
        spec.view = view;
        Ok(mean_sd(&episode_returns(p, &spec, n, n_tasks, seed)?).0)
    };
    Ok(ControlTable {
        reliable: run(InstructionView::Reliable, policy)?,
        occluded: run(InstructionView::Occluded, policy)?,
        deceptive: run(InstructionView::Deceptive, policy)?,
        random: run(InstructionView::Reliable, &RandomPolicy)?,
        episodes: n_tasks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(policy: &str, size: usize, mean: f64) -> EvalRow {
        EvalRow { policy: policy.into(), size, mean, sd: 0.0, episodes: 1, normalized: 0.0 }
    }

    #[test]
    fn normalization() {
        let mut t = ResultTable { rows: vec![row("a", 7, -2.0), row("b", 7, -4.0), row("a", 14, 0.5), row("b", 14, 0.25)] };
        normalize(&mut t);
        let v: Vec<f64> = t.rows.iter().map(|r| r.normalized).collect();
        assert_eq!(v, vec![100.0, 0.0, 100.0, 75.0]);
    }
}

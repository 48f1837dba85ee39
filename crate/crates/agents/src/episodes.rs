//! Distributions over (map, task) episodes.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use gridworld::features::feature_len;
use gridworld::map::{sample_train_size, TRAIN_SIZES};
use gridworld::tasks::pool;
use gridworld::{
    actions, build_catalog, generate_map, sample_task_from, CountRange, EnvConfig, GridEnv, InstructionView,
    MapConfig, MapError, Mode, ObjectCatalog, ObjectId, Split, TaskCategory,
};

use crate::instr::instr_width;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("{0}")]
    Split(#[from] gridworld::tasks::SplitTooSmall),
    #[error("no placeable map after {attempts} attempts: {last}")]
    Map { attempts: usize, last: MapError },
    #[error("no task categories given")]
    NoCategories,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub mode: Mode,
    pub catalog_seed: u64,
    pub split: Split,
    pub categories: Vec<TaskCategory>,
    /// Keep only the first `k` objects of each category pool; distractors
    /// are then drawn from the kept objects too.
    pub objects: Option<usize>,
    pub goal_objects: CountRange,
    pub constraint_objects: Option<CountRange>,
    pub distractors: CountRange,
    pub horizon: Option<usize>,
    pub env: EnvConfig,
    pub view: InstructionView,
}

const MAP_ATTEMPTS: usize = 100;

impl EnvSpec {
    pub fn new(mode: Mode) -> Self {
        let m = MapConfig::new(mode, 7, 0);
        EnvSpec {
            mode,
            catalog_seed: 0,
            split: Split::Train,
            categories: TaskCategory::ALL.to_vec(),
            objects: None,
            goal_objects: m.goal_objects,
            constraint_objects: m.constraint_objects,
            distractors: m.distractors,
            horizon: None,
            env: EnvConfig::default(),
            view: InstructionView::Reliable,
        }
    }

    pub fn catalog(&self) -> Arc<ObjectCatalog> {
        Arc::new(build_catalog(self.catalog_seed, self.mode))
    }

    pub fn feature_width(&self, catalog: &ObjectCatalog) -> usize {
        match self.mode {
            Mode::Minecraft => feature_len(catalog, Some(self.env.feature_radius)),
            Mode::MiniGrid => feature_len(catalog, None),
        }
    }

    pub fn instr_width(&self, catalog: &ObjectCatalog) -> usize {
        instr_width(catalog)
    }

    pub fn action_count(&self) -> usize {
        actions(self.mode).len()
    }

    fn task_pool(&self, catalog: &ObjectCatalog, category: TaskCategory) -> Vec<ObjectId> {
        let mut p = pool(catalog, category, self.split);
        if let Some(k) = self.objects {
            p.truncate(k);
        }
        p
    }

    fn distractor_pool(&self, catalog: &ObjectCatalog) -> Option<Vec<ObjectId>> {
        self.objects?;
        let mut all: Vec<ObjectId> = self.categories.iter().flat_map(|&c| self.task_pool(catalog, c)).collect();
        all.sort();
        all.dedup();
        Some(all)
    }

    /// A fresh episode on an `n x n` map.
    pub fn sample<R: Rng + ?Sized>(&self, catalog: &Arc<ObjectCatalog>, n: usize, rng: &mut R) -> Result<GridEnv, SampleError> {
        let category = *self.categories.choose(rng).ok_or(SampleError::NoCategories)?;
        let task = sample_task_from(catalog, &self.task_pool(catalog, category), category, rng)?;
        let mut last = MapError::Unsolvable;
        for _ in 0..MAP_ATTEMPTS {
            let cfg = MapConfig {
                split: self.split,
                goal_objects: self.goal_objects,
                constraint_objects: self.constraint_objects,
                distractors: self.distractors,
                horizon: self.horizon,
                distractor_pool: self.distractor_pool(catalog),
                ..MapConfig::new(self.mode, n, rng.gen())
            };
            match generate_map(&cfg, &task, catalog) {
                Ok(map) => {
                    return Ok(GridEnv::new(catalog.clone(), map, task.into())
                        .with_config(self.env)
                        .with_view(self.view))
                }
                Err(e) => last = e,
            }
        }
        Err(SampleError::Map { attempts: MAP_ATTEMPTS, last })
    }

    /// The episode with index `i` of size `n` under `seed`; identical for
    /// every caller, which pairs evaluations of different policies.
    pub fn paired(&self, catalog: &Arc<ObjectCatalog>, n: usize, seed: u64, i: u64) -> Result<GridEnv, SampleError> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, n as u64, i]));
        self.sample(catalog, n, &mut rng)
    }
}

/// Map sides used during training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SizeSpec {
    Fixed(usize),
    /// Size 7 with probability `p_small` before `until_step`, then uniform
    /// over the training sizes.
    Curriculum { p_small: f64, until_step: u64 },
}

impl SizeSpec {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, step: u64) -> usize {
        match *self {
            SizeSpec::Fixed(n) => n,
            SizeSpec::Curriculum { p_small, until_step } => {
                if step < until_step {
                    sample_train_size(rng, p_small)
                } else {
                    rng.gen_range(TRAIN_SIZES)
                }
            }
        }
    }
}

/// SplitMix64 fold of several words into one seed.
pub fn mix(words: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &w in words {
        h ^= w;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restricted_objects() {
        let mut spec = EnvSpec::new(Mode::Minecraft);
        spec.categories = vec![TaskCategory::Reachability];
        spec.objects = Some(3);
        let c = spec.catalog();
        let allowed = spec.task_pool(&c, TaskCategory::Reachability);
        assert_eq!(allowed.len(), 3);
        for i in 0..200 {
            let env = spec.paired(&c, 5, 1, i).unwrap();
            assert!(env.map().cells().iter().flatten().all(|id| allowed.contains(id)));
            assert_eq!(env.map().n, 5);
        }
    }

    #[test]
    fn paired_is_deterministic() {
        let spec = EnvSpec::new(Mode::MiniGrid);
        let c = spec.catalog();
        let a = spec.paired(&c, 9, 4, 17).unwrap();
        let b = spec.paired(&c, 9, 4, 17).unwrap();
        assert_eq!((a.map(), a.formula()), (b.map(), b.formula()));
    }

    #[test]
    fn curriculum_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = SizeSpec::Curriculum { p_small: 1.0, until_step: 10 };
        assert_eq!(s.sample(&mut rng, 3), 7);
        assert!((0..50).map(|_| s.sample(&mut rng, 11)).any(|n| n != 7));
    }
}

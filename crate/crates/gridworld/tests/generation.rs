use std::sync::Arc;

use gridworld::map::EVAL_SIZES;
use gridworld::{
    build_catalog, generate_map, sample_task, Action, GridEnv, MapConfig, Mode, Split, TaskCategory,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sattl::{parse_task, Atom, LabelSet};

#[test]
fn thousand_generations_hold_invariants() {
    for mode in [Mode::Minecraft, Mode::MiniGrid] {
        let cat = build_catalog(7, mode);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..1_000u64 {
            let category = TaskCategory::ALL[i as usize % 4];
            let task = sample_task(&cat, category, Split::Test, &mut rng).unwrap();
            let n = EVAL_SIZES[i as usize % 3];
            let mut cfg = MapConfig::new(mode, n, i);
            cfg.split = Split::Test;
            let m = generate_map(&cfg, &task, &cat).unwrap();
            assert_eq!(m.cells().len(), n * n);
            assert_eq!(m.cell(m.start), None);
            assert_eq!(m.start_dir.is_some(), mode == Mode::MiniGrid);
            assert!(!m.goal_cells(&cat, &task).is_empty(), "{task}");
            let placed: Vec<_> = m.cells().iter().flatten().collect();
            assert!(placed.len() >= 2, "{task}");
            for id in placed {
                assert!(gridworld::tasks::split_objects(&cat, Split::Test).contains(id) || task.atoms().any(|a| cat.id_of(a) == Some(*id)));
            }
        }
    }
}

#[test]
fn hazard_map_contains_key_lava_and_distractors() {
    let cat = build_catalog(7, Mode::MiniGrid);
    let task = parse_task("- orange_lava U + gray_key").unwrap();
    let lava = cat.id_of(&Atom::new("orange_lava").unwrap()).unwrap();
    let key = cat.id_of(&Atom::new("gray_key").unwrap()).unwrap();
    for seed in 0..200 {
        let m = generate_map(&MapConfig::new(Mode::MiniGrid, 22, seed), &task, &cat).unwrap();
        assert!(m.cells().contains(&Some(key)));
        assert!(m.cells().contains(&Some(lava)));
        assert!(m.cells().iter().flatten().any(|&id| id != key && id != lava));
    }
}

fn random_env(mode: Mode, seed: u64) -> GridEnv {
    let cat = Arc::new(build_catalog(7, mode));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let task = sample_task(&cat, TaskCategory::NegativeCond, Split::Train, &mut rng).unwrap();
    let n = rng.gen_range(3..=9);
    let mut cfg = MapConfig::new(mode, n, seed);
    cfg.distractors = gridworld::CountRange::new(0, n * n / 4);
    cfg.constraint_objects = Some(gridworld::CountRange::new(0, n * n / 4));
    cfg.horizon = Some(30);
    let m = generate_map(&cfg, &task, &cat).unwrap();
    GridEnv::new(cat, m, task.into())
}

fn run(env: &mut GridEnv, actions: &[usize]) -> Vec<LabelSet> {
    let acts = gridworld::actions(env.mode());
    let mut out = Vec::new();
    for &a in actions {
        if env.is_done() {
            break;
        }
        out.push(env.step(acts[a % acts.len()]).unwrap().labels);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn agent_stays_on_map_and_labels_match_cells(
        mg in any::<bool>(), seed in 0u64..1_000, acts in prop::collection::vec(0usize..4, 1..40)
    ) {
        let mode = if mg { Mode::MiniGrid } else { Mode::Minecraft };
        let mut env = random_env(mode, seed);
        let n = env.map().n;
        let moves = gridworld::actions(mode);
        for &a in &acts {
            if env.is_done() {
                break;
            }
            let before = env.pos();
            let s = env.step(moves[a % moves.len()]).unwrap();
            let p = env.pos();
            prop_assert!(p.0 < n && p.1 < n);
            prop_assert!(p.0.abs_diff(before.0) + p.1.abs_diff(before.1) <= 1);
            // Independent re-read of the cell array.
            let cell = env.map().cells()[p.0 * n + p.1];
            let mut expected: LabelSet = cell.map(|id| env.catalog().atom(id).clone()).into_iter().collect();
            if s.done {
                expected.insert(Atom::end());
            }
            prop_assert_eq!(&s.labels, &expected);
            prop_assert_eq!(s.done, env.is_done());
        }
    }

    #[test]
    fn same_seed_and_actions_give_same_trace(
        mg in any::<bool>(), seed in 0u64..1_000, acts in prop::collection::vec(0usize..4, 1..40)
    ) {
        let mode = if mg { Mode::MiniGrid } else { Mode::Minecraft };
        let a = run(&mut random_env(mode, seed), &acts);
        let b = std::thread::spawn(move || run(&mut random_env(mode, seed), &acts)).join().unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn features_ignore_the_instruction(
        mg in any::<bool>(), seed in 0u64..1_000, acts in prop::collection::vec(0usize..4, 1..30)
    ) {
        let mode = if mg { Mode::MiniGrid } else { Mode::Minecraft };
        let env = random_env(mode, seed);
        let other = parse_task(&format!("true U + {}", env.catalog().atoms()[1])).unwrap();
        let mut a = env.clone();
        let mut b = GridEnv::new(env.catalog().clone(), env.map().clone(), other.into());
        let moves = gridworld::actions(mode);
        prop_assert_eq!(a.features(), b.features());
        for &k in &acts {
            if a.is_done() || b.is_done() {
                break;
            }
            let sa = a.step(moves[k % moves.len()]).unwrap();
            let sb = b.step(moves[k % moves.len()]).unwrap();
            prop_assert_eq!(sa.obs.features, sb.obs.features);
        }
    }
}

#[test]
fn last_step_carries_end_exactly_once() {
    let mut env = random_env(Mode::Minecraft, 5);
    let mut ends = Vec::new();
    while !env.is_done() {
        let s = env.step(Action::Up).unwrap();
        ends.push(s.labels.contains(&Atom::end()));
    }
    assert_eq!(ends.iter().filter(|&&e| e).count(), 1);
    assert!(*ends.last().unwrap());
}

use gridworld::tasks::{pool, within_split};
use gridworld::{build_catalog, sample_task, Mode, Split, TaskCategory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn sampled_tasks_never_leak_across_splits() {
    for mode in [Mode::Minecraft, Mode::MiniGrid] {
        let cat = build_catalog(7, mode);
        for category in TaskCategory::ALL {
            for split in [Split::Train, Split::Test] {
                let mut rng = ChaCha8Rng::seed_from_u64(category as u64 * 2 + split as u64);
                let other = pool(&cat, category, split.other());
                for _ in 0..10_000 {
                    let t = sample_task(&cat, category, split, &mut rng).unwrap();
                    assert!(within_split(&cat, &t, category, split), "{t}");
                    assert!(t.atoms().all(|a| !other.contains(&cat.id_of(a).unwrap())), "{t}");
                    assert!(category.matches(&t), "{t} is not {}", category.name());
                }
            }
        }
    }
}

#[test]
fn minigrid_test_reachability_uses_held_out_colors_and_shapes() {
    let cat = build_catalog(11, Mode::MiniGrid);
    let sets = cat.minigrid().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..2_000 {
        let t = sample_task(&cat, TaskCategory::Reachability, Split::Test, &mut rng).unwrap();
        for a in t.atoms() {
            let (c, f) = cat.decompose(cat.id_of(a).unwrap());
            assert!(sets.c[1].contains(&c) && sets.f[1].contains(&f));
            // The pair never appears in a training reachability task.
            assert!(!sets.c[0].contains(&c) && !sets.f[0].contains(&f));
        }
    }
}

#[test]
fn sampling_is_seed_deterministic() {
    let cat = build_catalog(7, Mode::MiniGrid);
    for category in TaskCategory::ALL {
        let a = sample_task(&cat, category, Split::Train, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        let b = sample_task(&cat, category, Split::Train, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        assert_eq!(a, b);
    }
}

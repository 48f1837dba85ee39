use proptest::prelude::*;
use sattl::symbolic::{episode_log, episode_return};
use sattl::{
    format_formula, parse_formula, satisfies, satisfies_naive, satisfies_with_restarts, sm_init, sm_step,
    Atom, AtomicTask, LabelSet, Literal, Outcome, Reward, RewardStatus, SignedAtom, TemporalFormula, Trace,
};

fn atom() -> impl Strategy<Value = Atom> {
    "[a-z][a-z0-9_]{0,5}"
        .prop_filter("reserved", |s| s != "true" && s != "end")
        .prop_map(|s| Atom::new(s).unwrap())
}

fn signed(atoms: BoxedStrategy<Atom>) -> impl Strategy<Value = SignedAtom> {
    (atoms, any::<bool>()).prop_map(|(a, pos)| if pos { SignedAtom::pos(a) } else { SignedAtom::neg(a) })
}

fn literal(atoms: BoxedStrategy<Atom>) -> impl Strategy<Value = Literal> {
    prop_oneof![
        1 => Just(Literal::True),
        4 => prop::collection::vec(signed(atoms), 1..4).prop_map(|v| Literal::any(v).unwrap()),
    ]
}

fn task(atoms: BoxedStrategy<Atom>) -> impl Strategy<Value = AtomicTask> {
    (literal(atoms.clone()), literal(atoms)).prop_map(|(c, g)| AtomicTask::new(c, g))
}

fn formula(atoms: BoxedStrategy<Atom>, depth: u32) -> impl Strategy<Value = TemporalFormula> {
    task(atoms).prop_map(TemporalFormula::from).prop_recursive(depth, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TemporalFormula::seq(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| TemporalFormula::choice(a, b)),
        ]
    })
}

fn small_atoms() -> BoxedStrategy<Atom> {
    prop::sample::select(vec!["a", "b", "c"]).prop_map(|s| Atom::new(s).unwrap()).boxed()
}

fn trace(max_len: usize) -> impl Strategy<Value = Trace> {
    prop::collection::vec(prop::collection::btree_set(small_atoms(), 0..3), 0..=max_len)
        .prop_map(|steps| Trace::new(steps.into_iter().collect::<Vec<LabelSet>>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn print_then_parse_is_identity(f in formula(atom().boxed(), 4)) {
        let text = format_formula(&f);
        prop_assert_eq!(parse_formula(&text).unwrap(), f);
    }

    #[test]
    fn table_agrees_with_recursive_reading(t in trace(8), f in formula(small_atoms(), 3)) {
        prop_assume!(f.depth() <= 3);
        prop_assert_eq!(satisfies(&t, &f), satisfies_naive(&t, &f).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn reward_total_matches_counts(t in trace(12), f in formula(small_atoms(), 3)) {
        let mut s = sm_init(&f);
        for labels in t.steps() {
            if s.is_done() {
                break;
            }
            s = sm_step(&s, labels).unwrap().0;
            prop_assert_eq!(s.total_reward(), s.closed_form_reward());
        }
    }

    #[test]
    fn atomic_episode_matches_restart_scan(t in trace(12), a in task(small_atoms())) {
        let f = TemporalFormula::from(a.clone());
        let r = episode_return(&t, &f);
        let report = satisfies_with_restarts(&t, &a);
        prop_assert_eq!(r.violations, report.violation_count);
        prop_assert_eq!(r.outcome == Outcome::Satisfied, report.satisfied);
        let goal = if report.satisfied { 20 } else { 0 };
        let ordinary = (r.steps - r.violations - usize::from(report.satisfied)) as i64;
        prop_assert_eq!(r.total, Reward::from_twentieths(goal - 20 * report.violation_count as i64 - ordinary));
        let fired: Vec<usize> = episode_log(&t, &f)
            .iter()
            .filter(|l| l.status == RewardStatus::GoalReached)
            .map(|l| l.t)
            .collect();
        prop_assert_eq!(fired, report.completion_index.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn sm_step_is_pure(t in trace(6), f in formula(small_atoms(), 2)) {
        let mut s = sm_init(&f);
        for labels in t.steps() {
            if s.is_done() {
                break;
            }
            let x = sm_step(&s, labels).unwrap();
            let y = sm_step(&s, labels).unwrap();
            prop_assert_eq!(&x, &y);
            s = x.0;
        }
    }

    #[test]
    fn restart_report_is_well_formed(t in trace(12), a in task(small_atoms())) {
        let r = satisfies_with_restarts(&t, &a);
        prop_assert_eq!(r.satisfied, r.completion_index.is_some());
        prop_assert_eq!(r.violation_count, r.violation_indices.len());
        prop_assert!(r.violation_indices.windows(2).all(|w| w[0] < w[1]));
        if let Some(k) = r.completion_index {
            prop_assert!(r.violation_indices.iter().all(|&v| v < k));
        }
    }
}

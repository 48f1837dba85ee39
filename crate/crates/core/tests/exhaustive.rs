use sattl::gen::{letters, small_family, small_literals, small_tasks};
use sattl::semantics::satisfies_window;
use sattl::{
    check_truth_preservation, enumerate_traces, eval_ltlf, extract, literal_holds, normalize, parse_formula,
    satisfies, satisfies_with_restarts, translate, Atom, AtomicTask, Literal, TemporalFormula, Trace,
};

fn traces(n_atoms: usize, max_len: usize) -> Vec<Trace> {
    enumerate_traces(&letters(n_atoms), max_len).unwrap().collect()
}

#[test]
fn translation_preserves_truth_on_family() {
    let atoms = letters(2);
    let fam = small_family(&atoms);
    assert!(fam.len() >= 200);
    for f in &fam {
        let r = check_truth_preservation(f, &atoms, 5).unwrap();
        assert_eq!(r.cases, 1364);
        assert!(r.disagreements.is_empty(), "{f}: {:?}", r.disagreements[0]);
    }
}

#[test]
fn normalization_preserves_satisfaction() {
    let ts = traces(2, 5);
    for f in small_family(&letters(2)) {
        let g = normalize(&f);
        for t in &ts {
            assert_eq!(satisfies(t, &f), satisfies(t, &g), "{f} vs {g}");
        }
    }
}

#[test]
fn choice_translates_to_disjunction() {
    let ts = traces(2, 4);
    let fam = small_family(&letters(2));
    for (i, x) in fam.iter().step_by(17).enumerate() {
        let y = &fam[(i * 31 + 5) % fam.len()];
        let both = translate(&TemporalFormula::choice(x.clone(), y.clone()));
        let (tx, ty) = (translate(x), translate(y));
        for t in &ts {
            assert_eq!(eval_ltlf(&both, t), eval_ltlf(&tx, t) || eval_ltlf(&ty, t));
        }
    }
}

#[test]
fn extracted_sequences_cover_satisfaction() {
    let ts = traces(2, 5);
    for f in small_family(&letters(2)) {
        let seqs: Vec<TemporalFormula> = extract(&f)
            .sequences()
            .iter()
            .map(|s| TemporalFormula::sequence_of(s).unwrap())
            .collect();
        for t in &ts {
            assert_eq!(satisfies(t, &f), seqs.iter().any(|s| satisfies(t, s)), "{f} on {t:?}");
        }
    }
}

#[test]
fn extending_the_window_never_falsifies() {
    let ts = traces(2, 5);
    let fam = small_family(&letters(2));
    for f in fam.iter().step_by(3) {
        for t in &ts {
            let n = t.len();
            for j in 0..n {
                if satisfies_window(t, f, 0, j) {
                    assert!((j..n).all(|k| satisfies_window(t, f, 0, k)), "{f} on {t:?} at {j}");
                }
            }
        }
    }
}

#[test]
fn eventually_means_some_instant() {
    let ts = traces(2, 5);
    for l in small_literals(&letters(2)) {
        let f = parse_formula(&format!("<> {l}")).unwrap();
        assert_eq!(f, AtomicTask::eventually(l.clone()).into());
        for t in &ts {
            assert_eq!(satisfies(t, &f), t.steps().iter().any(|s| literal_holds(&l, s)));
        }
    }
}

#[test]
fn always_means_every_instant_before_end() {
    let end = Atom::end();
    // Environment traces: `end` on the final instant, or nowhere.
    let mut env_traces = Vec::new();
    for t in traces(2, 5) {
        let mut steps = t.steps().to_vec();
        env_traces.push(Trace::new(steps.clone()));
        steps.last_mut().unwrap().insert(end.clone());
        env_traces.push(Trace::from_env(steps).unwrap());
    }
    for l in small_literals(&letters(2)).into_iter().filter(|l| !l.is_true()) {
        let f = parse_formula(&format!("[] {l}")).unwrap();
        assert_eq!(f, AtomicTask::new(l.clone(), Literal::pos(end.clone())).into());
        for t in &env_traces {
            let n = t.len();
            let expected = t[n - 1].contains(&end) && (0..n - 1).all(|i| literal_holds(&l, &t[i]));
            assert_eq!(satisfies(t, &f), expected, "{l} on {t:?}");
        }
    }
}

#[test]
fn clean_restart_completion_satisfies_prefix() {
    let ts = traces(2, 5);
    for a in small_tasks(&letters(2)) {
        let f: TemporalFormula = a.clone().into();
        for t in &ts {
            let r = satisfies_with_restarts(t, &a);
            if r.satisfied && r.violation_count == 0 {
                let k = r.completion_index.unwrap();
                assert!(satisfies(&t.prefix(k + 1), &f));
            }
        }
    }
}

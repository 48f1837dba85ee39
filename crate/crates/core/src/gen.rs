//! Formula and trace generators for exhaustive checks and fuzzing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::syntax::{Atom, AtomicTask, Literal, SignedAtom, TemporalFormula};
use crate::trace::{LabelSet, Trace};

/// `TRUE`, every signed atom, and every two-entry disjunction of distinct
/// signed atoms.
pub fn small_literals(atoms: &[Atom]) -> Vec<Literal> {
    let signed: Vec<SignedAtom> = atoms
        .iter()
        .flat_map(|a| [SignedAtom::pos(a.clone()), SignedAtom::neg(a.clone())])
        .collect();
    let mut out = vec![Literal::True];
    out.extend(signed.iter().map(|s| Literal::Any(vec![s.clone()])));
    for i in 0..signed.len() {
        for j in i + 1..signed.len() {
            out.push(Literal::Any(vec![signed[i].clone(), signed[j].clone()]));
        }
    }
    out
}

/// Every `cond U goal` with both literals from [`small_literals`].
pub fn small_tasks(atoms: &[Atom]) -> Vec<AtomicTask> {
    let lits = small_literals(atoms);
    let mut out = Vec::with_capacity(lits.len() * lits.len());
    for c in &lits {
        for g in &lits {
            out.push(AtomicTask::new(c.clone(), g.clone()));
        }
    }
    out
}

/// The fixed family used by exhaustive checks: every small atomic task, all
/// depth-1 sequences and choices over a spread of thirteen of them, and
/// depth-2 compositions pairing a spread of those with an atomic task on
/// either side.
pub fn small_family(atoms: &[Atom]) -> Vec<TemporalFormula> {
    let tasks = small_tasks(atoms);
    let base: Vec<TemporalFormula> = tasks.iter().step_by(10).cloned().map(Into::into).collect();
    let mut out: Vec<TemporalFormula> = tasks.into_iter().map(Into::into).collect();

    let mut depth1 = Vec::new();
    for x in &base {
        for y in &base {
            depth1.push(TemporalFormula::seq(x.clone(), y.clone()));
            depth1.push(TemporalFormula::choice(x.clone(), y.clone()));
        }
    }
    let mut depth2 = Vec::new();
    for (k, d) in depth1.iter().step_by(7).enumerate() {
        let x = &base[k % base.len()];
        depth2.push(TemporalFormula::seq(d.clone(), x.clone()));
        depth2.push(TemporalFormula::seq(x.clone(), d.clone()));
        depth2.push(TemporalFormula::choice(d.clone(), x.clone()));
        depth2.push(TemporalFormula::choice(x.clone(), d.clone()));
    }
    out.extend(depth1);
    out.extend(depth2);
    out
}

/// A literal with probability `p_true` of being `TRUE`, otherwise
/// `1..=max_disjuncts` signed atoms.
pub fn random_literal<R: Rng + ?Sized>(
    rng: &mut R,
    atoms: &[Atom],
    max_disjuncts: usize,
    p_true: f64,
) -> Literal {
    if atoms.is_empty() || rng.gen_bool(p_true) {
        return Literal::True;
    }
    let k = rng.gen_range(1..=max_disjuncts.max(1));
    let entries = (0..k).map(|_| {
        let a = atoms.choose(rng).expect("non-empty").clone();
        if rng.gen_bool(0.5) {
            SignedAtom::pos(a)
        } else {
            SignedAtom::neg(a)
        }
    });
    Literal::any(entries).expect("k >= 1")
}

pub fn random_task<R: Rng + ?Sized>(rng: &mut R, atoms: &[Atom]) -> AtomicTask {
    AtomicTask::new(random_literal(rng, atoms, 2, 0.25), random_literal(rng, atoms, 2, 0.1))
}

/// A formula of depth at most `max_depth`; composite nodes are chosen with
/// probability 0.6 while depth remains.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, atoms: &[Atom], max_depth: usize) -> TemporalFormula {
    if max_depth == 0 || !rng.gen_bool(0.6) {
        return random_task(rng, atoms).into();
    }
    let a = random_formula(rng, atoms, max_depth - 1);
    let b = random_formula(rng, atoms, max_depth - 1);
    if rng.gen_bool(0.5) {
        TemporalFormula::seq(a, b)
    } else {
        TemporalFormula::choice(a, b)
    }
}

/// A trace of length `0..=max_len` where each atom is present independently
/// with probability `density`.
pub fn random_trace<R: Rng + ?Sized>(rng: &mut R, atoms: &[Atom], max_len: usize, density: f64) -> Trace {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| atoms.iter().filter(|_| rng.gen_bool(density)).cloned().collect::<LabelSet>())
        .collect()
}

/// Atoms `a`, `b`, `c`, ... up to `n` (at most 26).
pub fn letters(n: usize) -> Vec<Atom> {
    (b'a'..=b'z')
        .take(n)
        .map(|c| Atom::new((c as char).to_string()).expect("letter atom"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn family_sizes() {
        let atoms = letters(2);
        assert_eq!(small_literals(&atoms).len(), 11);
        assert_eq!(small_tasks(&atoms).len(), 121);
        let fam = small_family(&atoms);
        assert!(fam.len() >= 200, "{}", fam.len());
        assert!(fam.iter().all(|f| f.depth() <= 2));
        assert!(fam.iter().any(|f| f.depth() == 2));
    }

    #[test]
    fn random_formula_respects_depth() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let atoms = letters(3);
        for _ in 0..500 {
            assert!(random_formula(&mut rng, &atoms, 3).depth() <= 3);
            assert!(random_trace(&mut rng, &atoms, 8, 0.4).len() <= 8);
        }
    }
}

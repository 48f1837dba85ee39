//! Translation of task formulas into LTLf and an evaluator for the target
//! logic, used to check that the translation preserves truth on finite traces.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SizeGuardError;
use crate::semantics::satisfies;
use crate::syntax::{Atom, AtomicTask, Literal, Sign, TemporalFormula};
use crate::trace::{LabelSet, Trace};

/// LTLf in negation normal form; `Next` is the strong next.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LtlfFormula {
    TT,
    FF,
    Prop(Atom),
    NotProp(Atom),
    And(Box<LtlfFormula>, Box<LtlfFormula>),
    Or(Box<LtlfFormula>, Box<LtlfFormula>),
    Next(Box<LtlfFormula>),
    Until(Box<LtlfFormula>, Box<LtlfFormula>),
}

impl LtlfFormula {
    pub fn and(a: LtlfFormula, b: LtlfFormula) -> Self {
        LtlfFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: LtlfFormula, b: LtlfFormula) -> Self {
        LtlfFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn next(a: LtlfFormula) -> Self {
        LtlfFormula::Next(Box::new(a))
    }

    pub fn until(a: LtlfFormula, b: LtlfFormula) -> Self {
        LtlfFormula::Until(Box::new(a), Box::new(b))
    }
}

/// Prefix form, e.g. `U(!grass, |(axe, sword))`.
impl fmt::Display for LtlfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtlfFormula::TT => f.write_str("true"),
            LtlfFormula::FF => f.write_str("false"),
            LtlfFormula::Prop(p) => write!(f, "{p}"),
            LtlfFormula::NotProp(p) => write!(f, "!{p}"),
            LtlfFormula::And(a, b) => write!(f, "&({a}, {b})"),
            LtlfFormula::Or(a, b) => write!(f, "|({a}, {b})"),
            LtlfFormula::Next(a) => write!(f, "X({a})"),
            LtlfFormula::Until(a, b) => write!(f, "U({a}, {b})"),
        }
    }
}

/// Rewrite `(T1;T2);T3` to `T1;(T2;T3)` and `(T1++T2);T3` to
/// `(T1;T3)++(T2;T3)` until the left operand of every sequence is atomic.
pub fn normalize(f: &TemporalFormula) -> TemporalFormula {
    match f {
        TemporalFormula::Atomic(_) => f.clone(),
        TemporalFormula::Choice(a, b) => TemporalFormula::choice(normalize(a), normalize(b)),
        TemporalFormula::Seq(l, r) => match l.as_ref() {
            TemporalFormula::Atomic(_) => TemporalFormula::seq((**l).clone(), normalize(r)),
            TemporalFormula::Seq(l1, l2) => normalize(&TemporalFormula::seq(
                (**l1).clone(),
                TemporalFormula::seq((**l2).clone(), (**r).clone()),
            )),
            TemporalFormula::Choice(l1, l2) => TemporalFormula::choice(
                normalize(&TemporalFormula::seq((**l1).clone(), (**r).clone())),
                normalize(&TemporalFormula::seq((**l2).clone(), (**r).clone())),
            ),
        },
    }
}

fn translate_literal(l: &Literal) -> LtlfFormula {
    match l {
        Literal::True => LtlfFormula::TT,
        Literal::Any(entries) => {
            let mut it = entries.iter().map(|e| match e.sign {
                Sign::Positive => LtlfFormula::Prop(e.atom.clone()),
                Sign::Negative => LtlfFormula::NotProp(e.atom.clone()),
            });
            let first = it.next().unwrap_or(LtlfFormula::FF);
            it.fold(first, LtlfFormula::or)
        }
    }
}

fn translate_task(t: &AtomicTask) -> LtlfFormula {
    LtlfFormula::until(translate_literal(&t.cond), translate_literal(&t.goal))
}

// Expects a normalized formula.
fn translate_normal(f: &TemporalFormula) -> LtlfFormula {
    match f {
        TemporalFormula::Atomic(t) => translate_task(t),
        TemporalFormula::Choice(a, b) => LtlfFormula::or(translate_normal(a), translate_normal(b)),
        TemporalFormula::Seq(l, r) => {
            let TemporalFormula::Atomic(t) = l.as_ref() else {
                unreachable!("normalized sequences start with an atomic task")
            };
            // c U (g & X(true U rest)): the continuation may start any time
            // after the goal instant.
            LtlfFormula::until(
                translate_literal(&t.cond),
                LtlfFormula::and(
                    translate_literal(&t.goal),
                    LtlfFormula::next(LtlfFormula::until(LtlfFormula::TT, translate_normal(r))),
                ),
            )
        }
    }
}

pub fn translate(f: &TemporalFormula) -> LtlfFormula {
    translate_normal(&normalize(f))
}

/// Standard finite-trace semantics at position 0. Every formula, `TT`
/// included, is false on the empty trace.
pub fn eval_ltlf(g: &LtlfFormula, trace: &Trace) -> bool {
    !trace.is_empty() && holds(g, trace.steps(), 0)
}

fn holds(g: &LtlfFormula, tr: &[LabelSet], i: usize) -> bool {
    match g {
        LtlfFormula::TT => true,
        LtlfFormula::FF => false,
        LtlfFormula::Prop(p) => tr[i].contains(p),
        LtlfFormula::NotProp(p) => !tr[i].contains(p),
        LtlfFormula::And(a, b) => holds(a, tr, i) && holds(b, tr, i),
        LtlfFormula::Or(a, b) => holds(a, tr, i) || holds(b, tr, i),
        LtlfFormula::Next(a) => i + 1 < tr.len() && holds(a, tr, i + 1),
        LtlfFormula::Until(a, b) => {
            for k in i..tr.len() {
                if holds(b, tr, k) {
                    return true;
                }
                if !holds(a, tr, k) {
                    return false;
                }
            }
            false
        }
    }
}

pub const ENUM_MAX_ATOMS: usize = 3;
pub const ENUM_MAX_LEN: usize = 6;

/// Every trace of length `1..=max_len` over subsets of `atoms`, shorter traces
/// first, then lexicographically with label sets ordered by bitmask.
pub fn enumerate_traces(atoms: &[Atom], max_len: usize) -> Result<TraceEnumerator, SizeGuardError> {
    if atoms.len() > ENUM_MAX_ATOMS || max_len > ENUM_MAX_LEN {
        return Err(SizeGuardError {
            atoms: atoms.len(),
            max_len,
            max_atoms: ENUM_MAX_ATOMS,
            max_len_limit: ENUM_MAX_LEN,
        });
    }
    let subsets = (0..1u32 << atoms.len())
        .map(|mask| {
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| a.clone())
                .collect()
        })
        .collect();
    Ok(TraceEnumerator { subsets, max_len, digits: vec![0], done: max_len == 0 })
}

/// Iterator returned by [`enumerate_traces`].
pub struct TraceEnumerator {
    subsets: Vec<LabelSet>,
    max_len: usize,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for TraceEnumerator {
    type Item = Trace;

    fn next(&mut self) -> Option<Trace> {
        if self.done {
            return None;
        }
        let trace: Trace = self.digits.iter().map(|&d| self.subsets[d].clone()).collect();
        // Odometer increment, last position fastest.
        let base = self.subsets.len();
        let mut pos = self.digits.len();
        loop {
            if pos == 0 {
                if self.digits.len() == self.max_len {
                    self.done = true;
                } else {
                    self.digits = vec![0; self.digits.len() + 1];
                }
                break;
            }
            pos -= 1;
            self.digits[pos] += 1;
            if self.digits[pos] < base {
                break;
            }
            self.digits[pos] = 0;
        }
        Some(trace)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub cases: usize,
    pub disagreements: Vec<Trace>,
}

/// Compare `satisfies(f)` with `eval_ltlf(translate(f))` on every enumerated trace.
pub fn check_truth_preservation(
    f: &TemporalFormula,
    atoms: &[Atom],
    max_len: usize,
) -> Result<PreservationReport, SizeGuardError> {
    let g = translate(f);
    let mut report = PreservationReport { cases: 0, disagreements: Vec::new() };
    for trace in enumerate_traces(atoms, max_len)? {
        report.cases += 1;
        if satisfies(&trace, f) != eval_ltlf(&g, &trace) {
            report.disagreements.push(trace);
        }
    }
    Ok(report)
}

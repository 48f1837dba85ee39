//! Finite-trace satisfaction.
//!
//! A formula is evaluated on windows `[a, b]` of a trace. An atomic task
//! `c U g` holds on `[a, b]` when some `k` in the window has `g` true at `k`
//! and `c` true at every instant of `[a, k)`. A sequence `T ; T'` splits the
//! window at some `j` so that `T` holds on `[a, j]` and `T'` on `[j+1, b]`.
//! Nothing holds on an empty window.

use serde::{Deserialize, Serialize};

use crate::error::TraceError;
use crate::syntax::{AtomicTask, Literal, Sign, TemporalFormula};
use crate::trace::{LabelSet, Trace};

pub fn literal_holds(l: &Literal, labels: &LabelSet) -> bool {
    match l {
        Literal::True => true,
        Literal::Any(entries) => entries.iter().any(|e| match e.sign {
            Sign::Positive => labels.contains(&e.atom),
            Sign::Negative => !labels.contains(&e.atom),
        }),
    }
}

/// Truth table of a formula over every window of a trace, `n * n` entries
/// indexed `a * n + b`; entries with `b < a` are false.
struct WindowTable {
    n: usize,
    cells: Vec<bool>,
}

impl WindowTable {
    fn get(&self, a: usize, b: usize) -> bool {
        self.cells[a * self.n + b]
    }

    fn build(f: &TemporalFormula, steps: &[LabelSet]) -> WindowTable {
        let n = steps.len();
        let mut cells = vec![false; n * n];
        match f {
            TemporalFormula::Atomic(task) => {
                let goal: Vec<bool> = steps.iter().map(|s| literal_holds(&task.goal, s)).collect();
                let cond: Vec<bool> = steps.iter().map(|s| literal_holds(&task.cond, s)).collect();
                for a in 0..n {
                    // Earliest goal instant reachable from `a` without breaking `cond`.
                    let mut first = None;
                    for k in a..n {
                        if goal[k] {
                            first = Some(k);
                            break;
                        }
                        if !cond[k] {
                            break;
                        }
                    }
                    if let Some(k) = first {
                        for b in k..n {
                            cells[a * n + b] = true;
                        }
                    }
                }
            }
            TemporalFormula::Seq(l, r) => {
                let lt = WindowTable::build(l, steps);
                let rt = WindowTable::build(r, steps);
                for a in 0..n {
                    for j in a..n.saturating_sub(1) {
                        if !lt.get(a, j) {
                            continue;
                        }
                        for b in j + 1..n {
                            if rt.get(j + 1, b) {
                                cells[a * n + b] = true;
                            }
                        }
                    }
                }
            }
            TemporalFormula::Choice(l, r) => {
                let lt = WindowTable::build(l, steps);
                let rt = WindowTable::build(r, steps);
                for (c, (x, y)) in cells.iter_mut().zip(lt.cells.iter().zip(&rt.cells)) {
                    *c = *x || *y;
                }
            }
        }
        WindowTable { n, cells }
    }
}

/// Whether `f` holds on the whole trace. False on the empty trace.
pub fn satisfies(trace: &Trace, f: &TemporalFormula) -> bool {
    let n = trace.len();
    n > 0 && WindowTable::build(f, trace.steps()).get(0, n - 1)
}

/// Whether `f` holds on the window `[a, b]` (inclusive).
pub fn satisfies_window(trace: &Trace, f: &TemporalFormula, a: usize, b: usize) -> bool {
    if b < a || b >= trace.len() {
        return false;
    }
    WindowTable::build(f, trace.steps()).get(a, b)
}

/// Longest trace accepted by [`satisfies_naive`].
pub const NAIVE_MAX_LEN: usize = 32;

/// Direct recursive reading of the satisfaction relation over sub-traces.
/// Intended as a reference for [`satisfies`].
pub fn satisfies_naive(trace: &Trace, f: &TemporalFormula) -> Result<bool, TraceError> {
    if trace.len() > NAIVE_MAX_LEN {
        return Err(TraceError::TooLong { len: trace.len(), limit: NAIVE_MAX_LEN });
    }
    Ok(naive(trace.steps(), f))
}

// A literal on a (sub)trace looks at its first state only.
fn naive_literal(l: &Literal, sub: &[LabelSet]) -> bool {
    match sub.first() {
        Some(first) => literal_holds(l, first),
        None => false,
    }
}

fn naive(tr: &[LabelSet], f: &TemporalFormula) -> bool {
    let len = tr.len();
    match f {
        TemporalFormula::Atomic(AtomicTask { cond, goal }) => (0..len).any(|j| {
            naive_literal(goal, &tr[j..]) && (0..j).all(|t| naive_literal(cond, &tr[t..j]))
        }),
        TemporalFormula::Seq(l, r) => {
            (0..len).any(|j| naive(&tr[..=j], l) && naive(&tr[j + 1..], r))
        }
        TemporalFormula::Choice(l, r) => naive(tr, l) || naive(tr, r),
    }
}

/// Outcome of scanning a trace for an atomic task while tolerating
/// violations of its safety condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatReport {
    pub satisfied: bool,
    pub completion_index: Option<usize>,
    pub violation_count: usize,
    pub violation_indices: Vec<usize>,
}

/// Scan left to right: the first goal instant completes the task; each
/// instant that breaks the condition before it is a violation after which
/// the task restarts from the next instant.
pub fn satisfies_with_restarts(trace: &Trace, task: &AtomicTask) -> SatReport {
    let mut violations = Vec::new();
    for (t, labels) in trace.steps().iter().enumerate() {
        if literal_holds(&task.goal, labels) {
            return SatReport {
                satisfied: true,
                completion_index: Some(t),
                violation_count: violations.len(),
                violation_indices: violations,
            };
        }
        if !literal_holds(&task.cond, labels) {
            violations.push(t);
        }
    }
    SatReport {
        satisfied: false,
        completion_index: None,
        violation_count: violations.len(),
        violation_indices: violations,
    }
}

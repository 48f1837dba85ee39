//! The symbolic side of the agent: decomposes a formula into the sequences of
//! atomic tasks that satisfy it, tracks progress through them from labels, and
//! turns each labelled instant into a reward.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::SmError;
use crate::semantics::literal_holds;
use crate::syntax::{Atom, AtomicTask, TemporalFormula};
use crate::trace::{LabelSet, Trace};

/// A reward measured in whole units of 0.05, so sums are exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Reward(i64);

impl Reward {
    pub const ZERO: Reward = Reward(0);
    pub const GOAL: Reward = Reward(20);
    pub const VIOLATION: Reward = Reward(-20);
    pub const STEP: Reward = Reward(-1);

    pub const fn from_twentieths(units: i64) -> Self {
        Reward(units)
    }

    pub const fn twentieths(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 20.0
    }
}

impl Add for Reward {
    type Output = Reward;

    fn add(self, rhs: Reward) -> Reward {
        Reward(self.0 + rhs.0)
    }
}

impl AddAssign for Reward {
    fn add_assign(&mut self, rhs: Reward) {
        self.0 += rhs.0;
    }
}

impl Sum for Reward {
    fn sum<I: Iterator<Item = Reward>>(iter: I) -> Reward {
        Reward(iter.map(|r| r.0).sum())
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.as_f64())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RewardStatus {
    GoalReached,
    Violation,
    Ongoing,
}

impl RewardStatus {
    pub fn reward(self) -> Reward {
        match self {
            RewardStatus::GoalReached => Reward::GOAL,
            RewardStatus::Violation => Reward::VIOLATION,
            RewardStatus::Ongoing => Reward::STEP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RewardEvent {
    pub reward: Reward,
    pub status: RewardStatus,
}

impl From<RewardStatus> for RewardEvent {
    fn from(status: RewardStatus) -> Self {
        RewardEvent { reward: status.reward(), status }
    }
}

/// +1 when the goal holds, otherwise -1 when the condition is broken,
/// otherwise -0.05.
pub fn reward_of(labels: &LabelSet, task: &AtomicTask) -> RewardEvent {
    let status = if literal_holds(&task.goal, labels) {
        RewardStatus::GoalReached
    } else if !literal_holds(&task.cond, labels) {
        RewardStatus::Violation
    } else {
        RewardStatus::Ongoing
    };
    status.into()
}

/// All sequences of atomic tasks whose completion satisfies a formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskList {
    sequences: Vec<Vec<AtomicTask>>,
}

impl TaskList {
    pub fn sequences(&self) -> &[Vec<AtomicTask>] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// Head of the first sequence.
    pub fn first_task(&self) -> Option<&AtomicTask> {
        self.sequences.first().and_then(|s| s.first())
    }
}

fn push_unique(out: &mut Vec<Vec<AtomicTask>>, s: Vec<AtomicTask>) {
    if !out.contains(&s) {
        out.push(s);
    }
}

/// Sequences of `a ; b` are all concatenations, those of `a ++ b` the union;
/// the left operand's sequences come first and duplicates are dropped.
pub fn extract(f: &TemporalFormula) -> TaskList {
    fn go(f: &TemporalFormula) -> Vec<Vec<AtomicTask>> {
        match f {
            TemporalFormula::Atomic(t) => vec![vec![t.clone()]],
            TemporalFormula::Seq(a, b) => {
                let (left, right) = (go(a), go(b));
                let mut out = Vec::with_capacity(left.len() * right.len());
                for s in &left {
                    for s2 in &right {
                        let mut joined = s.clone();
                        joined.extend(s2.iter().cloned());
                        push_unique(&mut out, joined);
                    }
                }
                out
            }
            TemporalFormula::Choice(a, b) => {
                let mut out = go(a);
                for s in go(b) {
                    push_unique(&mut out, s);
                }
                out
            }
        }
    }
    TaskList { sequences: go(f) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Satisfied,
    HorizonReached,
}

/// Progress of the symbolic module through one episode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmState {
    remaining: TaskList,
    current: AtomicTask,
    steps_on_current: usize,
    total_reward: Reward,
    completions: usize,
    violations: usize,
    ordinary_steps: usize,
    outcome: Option<Outcome>,
}

pub fn sm_init(f: &TemporalFormula) -> SmState {
    let remaining = extract(f);
    let current = remaining
        .first_task()
        .cloned()
        .expect("extract yields at least one non-empty sequence");
    SmState {
        remaining,
        current,
        steps_on_current: 0,
        total_reward: Reward::ZERO,
        completions: 0,
        violations: 0,
        ordinary_steps: 0,
        outcome: None,
    }
}

/// Pure form of [`SmState::advance`].
pub fn sm_step(s: &SmState, labels: &LabelSet) -> Result<(SmState, RewardEvent), SmError> {
    let mut next = s.clone();
    let ev = next.advance(labels)?;
    Ok((next, ev))
}

impl SmState {
    pub fn remaining(&self) -> &TaskList {
        &self.remaining
    }

    /// The task the neural module should currently pursue.
    pub fn current(&self) -> &AtomicTask {
        &self.current
    }

    pub fn steps_on_current(&self) -> usize {
        self.steps_on_current
    }

    pub fn total_reward(&self) -> Reward {
        self.total_reward
    }

    pub fn completions(&self) -> usize {
        self.completions
    }

    pub fn violations(&self) -> usize {
        self.violations
    }

    pub fn ordinary_steps(&self) -> usize {
        self.ordinary_steps
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    /// Reward the labels against the current task and progress the task list.
    ///
    /// Completing the current task drops it from every sequence it heads and
    /// discards the others; the episode is satisfied once a sequence runs
    /// out. A violation leaves the task in place. Labels containing `end`
    /// close an unsatisfied episode at the horizon.
    pub fn advance(&mut self, labels: &LabelSet) -> Result<RewardEvent, SmError> {
        if self.outcome.is_some() {
            return Err(SmError::StateDone);
        }
        let ev = reward_of(labels, &self.current);
        self.total_reward += ev.reward;
        self.steps_on_current += 1;
        match ev.status {
            RewardStatus::GoalReached => {
                self.completions += 1;
                let done = &self.current;
                let mut rest = Vec::new();
                let mut finished = false;
                for seq in &self.remaining.sequences {
                    if seq.first() == Some(done) {
                        if seq.len() == 1 {
                            finished = true;
                        } else {
                            rest.push(seq[1..].to_vec());
                        }
                    }
                }
                self.remaining.sequences = rest;
                if finished {
                    self.outcome = Some(Outcome::Satisfied);
                } else if let Some(t) = self.remaining.first_task() {
                    self.current = t.clone();
                    self.steps_on_current = 0;
                }
            }
            RewardStatus::Violation => self.violations += 1,
            RewardStatus::Ongoing => self.ordinary_steps += 1,
        }
        if self.outcome.is_none() && labels.iter().any(Atom::is_end) {
            self.outcome = Some(Outcome::HorizonReached);
        }
        Ok(ev)
    }

    /// Mark an unfinished episode as cut off by the horizon.
    pub fn close_at_horizon(&mut self) {
        if self.outcome.is_none() {
            self.outcome = Some(Outcome::HorizonReached);
        }
    }

    /// `completions - violations - 0.05 * ordinary_steps`, in reward units.
    pub fn closed_form_reward(&self) -> Reward {
        Reward::from_twentieths(
            Reward::GOAL.twentieths() * self.completions as i64
                + Reward::VIOLATION.twentieths() * self.violations as i64
                + Reward::STEP.twentieths() * self.ordinary_steps as i64,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeReturn {
    pub total: Reward,
    pub outcome: Outcome,
    pub completions: usize,
    pub violations: usize,
    pub ordinary_steps: usize,
    /// Instants consumed before the episode ended.
    pub steps: usize,
}

/// Replay the symbolic module over a recorded trace.
pub fn episode_return(trace: &Trace, f: &TemporalFormula) -> EpisodeReturn {
    let mut sm = sm_init(f);
    let mut steps = 0;
    for labels in trace.steps() {
        if sm.is_done() {
            break;
        }
        sm.advance(labels).expect("state checked above");
        steps += 1;
    }
    sm.close_at_horizon();
    EpisodeReturn {
        total: sm.total_reward,
        outcome: sm.outcome.unwrap_or(Outcome::HorizonReached),
        completions: sm.completions,
        violations: sm.violations,
        ordinary_steps: sm.ordinary_steps,
        steps,
    }
}

/// One line of an episode log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub t: usize,
    pub labels: Vec<Atom>,
    pub reward: f64,
    pub status: RewardStatus,
    pub current_task: String,
}

/// Per-step log of replaying a trace; `current_task` is the task in force
/// when the labels arrived.
pub fn episode_log(trace: &Trace, f: &TemporalFormula) -> Vec<StepLog> {
    let mut sm = sm_init(f);
    let mut out = Vec::new();
    for (t, labels) in trace.steps().iter().enumerate() {
        if sm.is_done() {
            break;
        }
        let current_task = sm.current.to_string();
        let ev = sm.advance(labels).expect("state checked above");
        out.push(StepLog {
            t,
            labels: labels.iter().cloned().collect(),
            reward: ev.reward.as_f64(),
            status: ev.status,
            current_task,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_task};

    fn task(s: &str) -> AtomicTask {
        parse_task(s).unwrap()
    }

    fn labels(names: &[&str]) -> LabelSet {
        names.iter().map(|n| Atom::new(*n).unwrap()).collect()
    }

    fn tr(steps: &[&[&str]]) -> Trace {
        Trace::from_names(steps).unwrap()
    }

    #[test]
    fn reward_cases() {
        let t = task("- grass U + axe");
        assert_eq!(reward_of(&labels(&["axe"]), &t), RewardStatus::GoalReached.into());
        assert_eq!(reward_of(&labels(&["grass"]), &t).reward, Reward::VIOLATION);
        assert_eq!(reward_of(&labels(&[]), &t).reward.as_f64(), -0.05);
        // Goal wins over a simultaneous violation.
        assert_eq!(reward_of(&labels(&["grass", "axe"]), &t).status, RewardStatus::GoalReached);
    }

    #[test]
    fn extract_cases() {
        let a1 = task("true U +a");
        let a2 = task("true U +b");
        let a3 = task("true U +c");
        assert_eq!(extract(&a1.clone().into()).sequences(), &[vec![a1.clone()]]);
        let f = parse_formula("<> +a ; (<> +b ++ <> +c)").unwrap();
        assert_eq!(
            extract(&f).sequences(),
            &[vec![a1.clone(), a2.clone()], vec![a1.clone(), a3.clone()]]
        );
        let f = parse_formula("<> +a ++ <> +a").unwrap();
        assert_eq!(extract(&f).sequences(), &[vec![a1.clone()]]);
        let f = parse_formula("(<> +a ++ <> +b) ; (<> +c ++ <> +a)").unwrap();
        assert_eq!(extract(&f).len(), 4);
    }

    #[test]
    fn init_picks_first_sequence_head() {
        let f = parse_formula("(<> +a ; <> +b) ++ (<> +c ; <> +d)").unwrap();
        let s = sm_init(&f);
        assert_eq!(s.current(), &task("true U +a"));
        assert_eq!(s.remaining().len(), 2);
        assert_eq!(s.total_reward(), Reward::ZERO);
    }

    #[test]
    fn progression_drops_completed_heads() {
        let f = parse_formula("(<> +a ; <> +b) ++ (<> +a ; <> +c)").unwrap();
        let s = sm_init(&f);
        let (s, ev) = sm_step(&s, &labels(&["a"])).unwrap();
        assert_eq!(ev.reward, Reward::GOAL);
        assert_eq!(s.current(), &task("true U +b"));
        assert_eq!(
            s.remaining().sequences(),
            &[vec![task("true U +b")], vec![task("true U +c")]]
        );
        assert!(!s.is_done());
        let (s, _) = sm_step(&s, &labels(&["b"])).unwrap();
        assert_eq!(s.outcome(), Some(Outcome::Satisfied));
        assert_eq!(sm_step(&s, &labels(&[])), Err(SmError::StateDone));
    }

    #[test]
    fn completion_discards_other_branches() {
        let f = parse_formula("(<> +a ; <> +b) ++ (<> +c ; <> +d)").unwrap();
        let s = sm_init(&f);
        let (s, _) = sm_step(&s, &labels(&["a"])).unwrap();
        assert_eq!(s.remaining().sequences(), &[vec![task("true U +b")]]);
    }

    #[test]
    fn violation_keeps_task_and_end_closes_episode() {
        let f: TemporalFormula = task("- lava U + key").into();
        let s = sm_init(&f);
        let (s, ev) = sm_step(&s, &labels(&["lava"])).unwrap();
        assert_eq!(ev.status, RewardStatus::Violation);
        assert_eq!(s.current(), &task("- lava U + key"));
        let (s, _) = sm_step(&s, &labels(&["end"])).unwrap();
        assert_eq!(s.outcome(), Some(Outcome::HorizonReached));
        assert_eq!(s.total_reward(), s.closed_form_reward());
    }

    #[test]
    fn always_task_completes_at_end() {
        let f = parse_formula("[] -lava").unwrap();
        let r = episode_return(&tr(&[&[], &["lava"], &["end"]]), &f);
        assert_eq!(r.outcome, Outcome::Satisfied);
        assert_eq!(r.total, Reward::from_twentieths(-1 - 20 + 20));
    }

    #[test]
    fn episode_return_examples() {
        let r = episode_return(&tr(&[&[], &["axe"]]), &parse_formula("true U + axe").unwrap());
        assert_eq!(r.total, Reward::from_twentieths(19));
        assert_eq!(r.total.as_f64(), 0.95);
        assert_eq!(r.outcome, Outcome::Satisfied);

        let r = episode_return(&tr(&[&["grass"], &[], &["axe"]]), &parse_formula("- grass U + axe").unwrap());
        assert_eq!(r.total, Reward::from_twentieths(-1));
        assert_eq!(r.violations, 1);

        let r = episode_return(&tr(&[&[], &[]]), &parse_formula("true U + axe").unwrap());
        assert_eq!(r.total, Reward::from_twentieths(-2));
        assert_eq!(r.outcome, Outcome::HorizonReached);
    }

    #[test]
    fn replay_stops_at_completion() {
        let r = episode_return(&tr(&[&["axe"], &["axe"], &[]]), &parse_formula("true U + axe").unwrap());
        assert_eq!(r.steps, 1);
        assert_eq!(r.total, Reward::GOAL);
    }

    #[test]
    fn log_lines() {
        let f = parse_formula("- grass U + axe").unwrap();
        let log = episode_log(&tr(&[&["grass"], &["axe"]]), &f);
        assert_eq!(log.len(), 2);
        assert_eq!(log[0].status, RewardStatus::Violation);
        assert_eq!(log[1].reward, 1.0);
        assert_eq!(log[1].current_task, "- grass U + axe");
        let line = serde_json::to_string(&log[0]).unwrap();
        assert_eq!(
            line,
            r#"{"t":0,"labels":["grass"],"reward":-1.0,"status":"Violation","current_task":"- grass U + axe"}"#
        );
    }
}

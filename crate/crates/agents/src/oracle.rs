//! Optimal planner against an atomic task.
//!
//! Backward induction over (cell, heading, steps left). Each step is scored
//! exactly as the environment scores it: +1 on entering a goal cell (which
//! ends the episode), -1 on a condition-breaking cell, -0.05 otherwise, and
//! the step that exhausts the horizon sees `end` among its labels. Returns
//! are kept in integer twentieths, so ties and optima are exact.

use sattl::{reward_of, Atom, AtomicTask, LabelSet, Reward, RewardStatus};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use gridworld::{actions, transition, Action, Dir, GridMap, Mode, ObjectCatalog, Pos};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub actions: Vec<Action>,
    pub expected_return: Reward,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("no cell of the map satisfies the goal")]
    Unreachable,
}

/// Plan from the map's start pose over its whole horizon.
pub fn plan_oracle(catalog: &ObjectCatalog, map: &GridMap, task: &AtomicTask) -> Result<Plan, OracleError> {
    plan_from(catalog, map, task, map.start, map.start_dir, map.horizon)
}

struct Scored {
    reward: i64,
    terminal: bool,
}

fn score(labels: &LabelSet, task: &AtomicTask) -> Scored {
    let ev = reward_of(labels, task);
    Scored { reward: ev.reward.twentieths(), terminal: ev.status == RewardStatus::GoalReached }
}

/// Plan from an arbitrary pose with `steps_left` steps before the horizon.
pub fn plan_from(
    catalog: &ObjectCatalog,
    map: &GridMap,
    task: &AtomicTask,
    pos: Pos,
    dir: Option<Dir>,
    steps_left: usize,
) -> Result<Plan, OracleError> {
    let acts = actions(map.mode);
    let dirs = match map.mode {
        Mode::Minecraft => 1,
        Mode::MiniGrid => 4,
    };
    let cells = map.n * map.n;
    let states = cells * dirs;
    let state_of = |p: Pos, d: Option<Dir>| (p.0 * map.n + p.1) * dirs + d.map_or(0, Dir::index);
    let pose_of = |s: usize| {
        let c = s / dirs;
        ((c / map.n, c % map.n), (dirs == 4).then(|| Dir::ALL[s % dirs]))
    };

    // Per-cell score of an ordinary step and of the step that hits the horizon.
    let mut ordinary = Vec::with_capacity(cells);
    let mut last = Vec::with_capacity(cells);
    for p in map.positions() {
        let mut labels = map.labels_at(catalog, p);
        ordinary.push(score(&labels, task));
        labels.insert(Atom::end());
        last.push(score(&labels, task));
    }
    if !ordinary.iter().chain(&last).any(|s| s.terminal) {
        return Err(OracleError::Unreachable);
    }

    let next: Vec<usize> = (0..states)
        .flat_map(|s| {
            let (p, d) = pose_of(s);
            acts.iter().map(move |&a| {
                let (p2, d2) = transition(map, p, d, a);
                state_of(p2, d2)
            })
        })
        .collect();

    // best[k - 1][s]: first optimal action with k steps left.
    let mut best = vec![vec![0u8; states]; steps_left];
    let mut v_prev = vec![0i64; states];
    let mut v = vec![0i64; states];
    for k in 1..=steps_left {
        let table = if k == 1 { &last } else { &ordinary };
        for s in 0..states {
            let mut top = i64::MIN;
            let mut arg = 0u8;
            for (ai, &s2) in next[s * acts.len()..(s + 1) * acts.len()].iter().enumerate() {
                let sc = &table[s2 / dirs];
                let q = sc.reward + if sc.terminal { 0 } else { v_prev[s2] };
                if q > top {
                    top = q;
                    arg = ai as u8;
                }
            }
            v[s] = top;
            best[k - 1][s] = arg;
        }
        std::mem::swap(&mut v, &mut v_prev);
    }

    let start = state_of(pos, dir);
    let expected_return = Reward::from_twentieths(if steps_left == 0 { 0 } else { v_prev[start] });
    let mut plan = Vec::new();
    let mut s = start;
    for k in (1..=steps_left).rev() {
        let ai = best[k - 1][s] as usize;
        plan.push(acts[ai]);
        s = next[s * acts.len() + ai];
        let table = if k == 1 { &last } else { &ordinary };
        if table[s / dirs].terminal {
            break;
        }
    }
    Ok(Plan { actions: plan, expected_return })
}

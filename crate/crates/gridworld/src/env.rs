//! Episode dynamics: movement, labelling, horizon and the symbolic module
//! that scores each step.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sattl::{sm_init, Atom, AtomicTask, LabelSet, Outcome, RewardEvent, SmState, TemporalFormula};

use crate::catalog::{Mode, ObjectCatalog};
use crate::features::{forward_view, window_view, FeatureView};
use crate::map::{Dir, GridMap, Pos};
use crate::tasks::{deceive, occlude};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Forward,
    TurnLeft,
    TurnRight,
}

const MC_ACTIONS: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];
const MG_ACTIONS: [Action; 3] = [Action::Forward, Action::TurnLeft, Action::TurnRight];

pub fn actions(mode: Mode) -> &'static [Action] {
    match mode {
        Mode::Minecraft => &MC_ACTIONS,
        Mode::MiniGrid => &MG_ACTIONS,
    }
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Up => "up",
            Action::Down => "down",
            Action::Left => "left",
            Action::Right => "right",
            Action::Forward => "forward",
            Action::TurnLeft => "turn_left",
            Action::TurnRight => "turn_right",
        }
    }
}

impl std::str::FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let short = match s {
            "u" => Some(Action::Up),
            "d" => Some(Action::Down),
            "l" => Some(Action::Left),
            "r" => Some(Action::Right),
            "f" => Some(Action::Forward),
            "tl" => Some(Action::TurnLeft),
            "tr" => Some(Action::TurnRight),
            _ => None,
        };
        short
            .or_else(|| MC_ACTIONS.iter().chain(&MG_ACTIONS).copied().find(|a| a.name() == s))
            .ok_or_else(|| format!("unknown action {s:?}"))
    }
}

/// Agent pose after `action`; moves off the map leave the position unchanged.
pub fn transition(map: &GridMap, pos: Pos, dir: Option<Dir>, action: Action) -> (Pos, Option<Dir>) {
    let go = |d: Dir| map.offset(pos, d).unwrap_or(pos);
    match (action, dir) {
        (Action::Up, _) => (go(Dir::N), dir),
        (Action::Down, _) => (go(Dir::S), dir),
        (Action::Left, _) => (go(Dir::W), dir),
        (Action::Right, _) => (go(Dir::E), dir),
        (Action::Forward, Some(d)) => (go(d), dir),
        (Action::TurnLeft, Some(d)) => (pos, Some(d.left())),
        (Action::TurnRight, Some(d)) => (pos, Some(d.right())),
        (_, None) => (pos, dir),
    }
}

/// How the task scored by the environment is shown to the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstructionView {
    Reliable,
    /// Safety condition hidden.
    Occluded,
    /// Safety condition signs flipped.
    Deceptive,
}

impl InstructionView {
    pub fn apply(self, task: &AtomicTask) -> AtomicTask {
        match self {
            InstructionView::Reliable => task.clone(),
            InstructionView::Occluded => occlude(task),
            InstructionView::Deceptive => deceive(task),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvConfig {
    /// Radius of the Minecraft feature window; the view is the agent-centred
    /// square of side `2 * radius + 1`.
    pub feature_radius: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig { feature_radius: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("episode already finished")]
    EpisodeDone,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub features: FeatureView,
    pub instruction: AtomicTask,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub obs: Observation,
    pub labels: LabelSet,
    pub reward: RewardEvent,
    pub done: bool,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone)]
pub struct GridEnv {
    catalog: Arc<ObjectCatalog>,
    map: GridMap,
    task: TemporalFormula,
    view: InstructionView,
    cfg: EnvConfig,
    pos: Pos,
    dir: Option<Dir>,
    t: usize,
    sm: SmState,
    done: bool,
}

impl GridEnv {
    /// A reset environment scoring `task` on `map`.
    pub fn new(catalog: Arc<ObjectCatalog>, map: GridMap, task: TemporalFormula) -> Self {
        let sm = sm_init(&task);
        GridEnv {
            catalog,
            pos: map.start,
            dir: map.start_dir,
            map,
            task,
            view: InstructionView::Reliable,
            cfg: EnvConfig::default(),
            t: 0,
            sm,
            done: false,
        }
    }

    pub fn with_view(mut self, view: InstructionView) -> Self {
        self.view = view;
        self
    }

    pub fn with_config(mut self, cfg: EnvConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn reset(&mut self) -> Observation {
        self.pos = self.map.start;
        self.dir = self.map.start_dir;
        self.t = 0;
        self.sm = sm_init(&self.task);
        self.done = false;
        self.observation()
    }

    pub fn step(&mut self, action: Action) -> Result<Step, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeDone);
        }
        (self.pos, self.dir) = transition(&self.map, self.pos, self.dir, action);
        self.t += 1;
        let mut labels = self.map.labels_at(&self.catalog, self.pos);
        let last = self.t >= self.map.horizon;
        if last {
            labels.insert(Atom::end());
        }
        let reward = self.sm.advance(&labels).expect("not done");
        if last {
            self.sm.close_at_horizon();
        } else if self.sm.is_done() {
            // Completion ends the episode, so this is its final instant.
            labels.insert(Atom::end());
        }
        self.done = self.sm.is_done();
        Ok(Step {
            obs: self.observation(),
            labels,
            reward,
            done: self.done,
            outcome: self.sm.outcome(),
        })
    }

    pub fn observation(&self) -> Observation {
        Observation { features: self.features(), instruction: self.instruction() }
    }

    pub fn features(&self) -> FeatureView {
        match self.map.mode {
            Mode::Minecraft => window_view(&self.catalog, &self.map, self.pos, self.cfg.feature_radius),
            Mode::MiniGrid => forward_view(&self.catalog, &self.map, self.pos, self.dir.expect("minigrid heading")),
        }
    }

    /// The task shown to the agent: the symbolic module's current task under
    /// the instruction view.
    pub fn instruction(&self) -> AtomicTask {
        self.view.apply(self.sm.current())
    }

    /// The task the environment is scoring right now.
    pub fn true_task(&self) -> &AtomicTask {
        self.sm.current()
    }

    pub fn formula(&self) -> &TemporalFormula {
        &self.task
    }

    pub fn view(&self) -> InstructionView {
        self.view
    }

    pub fn config(&self) -> EnvConfig {
        self.cfg
    }

    pub fn catalog(&self) -> &Arc<ObjectCatalog> {
        &self.catalog
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn mode(&self) -> Mode {
        self.map.mode
    }

    pub fn pos(&self) -> Pos {
        self.pos
    }

    pub fn dir(&self) -> Option<Dir> {
        self.dir
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn horizon(&self) -> usize {
        self.map.horizon
    }

    pub fn steps_left(&self) -> usize {
        self.map.horizon.saturating_sub(self.t)
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn sm(&self) -> &SmState {
        &self.sm
    }
}

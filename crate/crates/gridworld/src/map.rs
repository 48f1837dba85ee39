//! Map configuration, procedural map generation and the map snapshot format.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use sattl::{literal_holds, Atom, AtomicTask, LabelSet, Sign};

use crate::catalog::{Mode, ObjectCatalog, ObjectId};
use crate::tasks::{split_objects, Split};

/// `(row, col)`; row 0 is the top edge.
pub type Pos = (usize, usize);

pub const TRAIN_SIZES: std::ops::RangeInclusive<usize> = 7..=10;
pub const EVAL_SIZES: [usize; 3] = [7, 14, 22];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    N,
    E,
    S,
    W,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

    pub fn left(self) -> Dir {
        match self {
            Dir::N => Dir::W,
            Dir::W => Dir::S,
            Dir::S => Dir::E,
            Dir::E => Dir::N,
        }
    }

    pub fn right(self) -> Dir {
        self.left().left().left()
    }

    pub fn delta(self) -> (isize, isize) {
        match self {
            Dir::N => (-1, 0),
            Dir::E => (0, 1),
            Dir::S => (1, 0),
            Dir::W => (0, -1),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Dir::N => "N",
            Dir::E => "E",
            Dir::S => "S",
            Dir::W => "W",
        }
    }
}

/// Inclusive count range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub lo: usize,
    pub hi: usize,
}

impl CountRange {
    pub const fn new(lo: usize, hi: usize) -> Self {
        CountRange { lo, hi }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> usize {
        rng.gen_range(self.lo..=self.hi.max(self.lo))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    pub mode: Mode,
    pub n: usize,
    pub seed: u64,
    pub split: Split,
    pub goal_objects: CountRange,
    /// `None` means `1..=max(2, n*n/12)`.
    pub constraint_objects: Option<CountRange>,
    pub distractors: CountRange,
    /// `None` means `max(100, 2*n*n)`.
    pub horizon: Option<usize>,
    /// Objects drawn as distractors; `None` means every object of the split.
    pub distractor_pool: Option<Vec<ObjectId>>,
}

impl MapConfig {
    pub fn new(mode: Mode, n: usize, seed: u64) -> Self {
        MapConfig {
            mode,
            n,
            seed,
            split: Split::Train,
            goal_objects: CountRange::new(1, 2),
            constraint_objects: None,
            distractors: CountRange::new(2, 6),
            horizon: None,
            distractor_pool: None,
        }
    }

    pub fn constraint_range(&self) -> CountRange {
        self.constraint_objects.unwrap_or(CountRange::new(1, (self.n * self.n / 12).max(2)))
    }

    pub fn horizon(&self) -> usize {
        self.horizon.unwrap_or_else(|| default_horizon(self.n))
    }
}

pub fn default_horizon(n: usize) -> usize {
    (2 * n * n).max(100)
}

/// Training map side: 7 with probability `p_small`, otherwise uniform over
/// the training sizes.
pub fn sample_train_size<R: Rng + ?Sized>(rng: &mut R, p_small: f64) -> usize {
    if rng.gen_bool(p_small.clamp(0.0, 1.0)) {
        *TRAIN_SIZES.start()
    } else {
        rng.gen_range(TRAIN_SIZES)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("cannot place {needed} objects and the agent on {cells} cells")]
    Unplaceable { needed: usize, cells: usize },
    #[error("atom {0} is not in the catalog")]
    UnknownAtom(String),
    #[error("no cell can satisfy the goal literal")]
    Unsolvable,
    #[error("map side must be at least 2, got {0}")]
    TooSmall(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridMap {
    pub mode: Mode,
    pub n: usize,
    cells: Vec<Option<ObjectId>>,
    pub start: Pos,
    /// Starting orientation, MiniGrid only.
    pub start_dir: Option<Dir>,
    pub horizon: usize,
    pub seed: u64,
}

impl GridMap {
    /// A map with the given cells (row-major, `n * n` entries).
    pub fn from_cells(
        mode: Mode,
        n: usize,
        cells: Vec<Option<ObjectId>>,
        start: Pos,
        start_dir: Option<Dir>,
        horizon: usize,
    ) -> Self {
        assert_eq!(cells.len(), n * n, "cell count");
        assert!(start.0 < n && start.1 < n, "start outside the map");
        assert_eq!(mode == Mode::MiniGrid, start_dir.is_some(), "orientation only in MiniGrid");
        GridMap { mode, n, cells, start, start_dir, horizon, seed: 0 }
    }

    pub fn cell(&self, p: Pos) -> Option<ObjectId> {
        self.cells[p.0 * self.n + p.1]
    }

    pub fn cells(&self) -> &[Option<ObjectId>] {
        &self.cells
    }

    pub fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.n).flat_map(move |r| (0..self.n).map(move |c| (r, c)))
    }

    /// Neighbour of `p` in direction `d`, if on the map.
    pub fn offset(&self, p: Pos, d: Dir) -> Option<Pos> {
        let (dr, dc) = d.delta();
        let r = p.0.checked_add_signed(dr)?;
        let c = p.1.checked_add_signed(dc)?;
        (r < self.n && c < self.n).then_some((r, c))
    }

    /// The labelling function: the atom of the occupied cell's object, if any.
    pub fn labels_at(&self, catalog: &ObjectCatalog, p: Pos) -> LabelSet {
        self.cell(p).map(|id| catalog.atom(id).clone()).into_iter().collect()
    }

    /// Cells whose labels satisfy the goal of `task`.
    pub fn goal_cells(&self, catalog: &ObjectCatalog, task: &AtomicTask) -> Vec<Pos> {
        self.positions().filter(|&p| literal_holds(&task.goal, &self.labels_at(catalog, p))).collect()
    }

    pub fn object_count(&self) -> usize {
        self.cells.iter().flatten().count()
    }

    pub fn snapshot(&self, catalog: &ObjectCatalog, agent: Pos, dir: Option<Dir>) -> MapSnapshot {
        MapSnapshot {
            mode: self.mode.name().to_string(),
            n: self.n,
            cells: (0..self.n)
                .map(|r| (0..self.n).map(|c| self.cell((r, c)).map(|id| id.0)).collect())
                .collect(),
            names: Some(
                (0..self.n)
                    .map(|r| {
                        (0..self.n)
                            .map(|c| self.cell((r, c)).map(|id| catalog.atom(id).as_str().to_string()))
                            .collect()
                    })
                    .collect(),
            ),
            agent: [agent.0, agent.1],
            dir: dir.map(|d| d.name().to_string()),
            seed: self.seed,
        }
    }
}

/// JSON form of a map: `{"mode", "n", "cells", "agent", "dir", "seed"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapSnapshot {
    pub mode: String,
    pub n: usize,
    pub cells: Vec<Vec<Option<u16>>>,
    /// Atom names alongside `cells`, for readability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<Vec<Option<String>>>>,
    pub agent: [usize; 2],
    pub dir: Option<String>,
    pub seed: u64,
}

impl MapSnapshot {
    /// Rebuild a map whose start is the snapshot's agent placement.
    pub fn to_map(&self, horizon: Option<usize>) -> Result<GridMap, String> {
        let mode: Mode = self.mode.parse()?;
        if self.cells.len() != self.n || self.cells.iter().any(|r| r.len() != self.n) {
            return Err("cells are not n x n".into());
        }
        let dir = match self.dir.as_deref() {
            None => None,
            Some(s) => Some(Dir::ALL.into_iter().find(|d| d.name() == s).ok_or(format!("bad dir {s:?}"))?),
        };
        if (mode == Mode::MiniGrid) != dir.is_some() {
            return Err("orientation must be given exactly in MiniGrid mode".into());
        }
        let [r, c] = self.agent;
        if r >= self.n || c >= self.n {
            return Err("agent outside the map".into());
        }
        let cells = self.cells.iter().flatten().map(|c| c.map(ObjectId)).collect();
        let mut m =
            GridMap::from_cells(mode, self.n, cells, (r, c), dir, horizon.unwrap_or(default_horizon(self.n)));
        m.seed = self.seed;
        Ok(m)
    }
}

fn ids_of(catalog: &ObjectCatalog, atoms: &[&Atom]) -> Result<Vec<ObjectId>, MapError> {
    atoms
        .iter()
        .filter(|a| !a.is_end())
        .map(|a| catalog.id_of(a).ok_or_else(|| MapError::UnknownAtom(a.to_string())))
        .collect()
}

/// Place goal, constraint and distractor objects for `task` and pick a
/// random empty starting cell (and orientation in MiniGrid).
pub fn generate_map(cfg: &MapConfig, task: &AtomicTask, catalog: &ObjectCatalog) -> Result<GridMap, MapError> {
    let n = cfg.n;
    if n < 2 {
        return Err(MapError::TooSmall(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let positive_goal: Vec<&Atom> =
        task.goal.entries().iter().filter(|e| e.sign == Sign::Positive).map(|e| &e.atom).collect();
    let goal_atoms: Vec<&Atom> =
        if positive_goal.is_empty() { task.goal.atoms().collect() } else { positive_goal };
    let goal_ids = ids_of(catalog, &goal_atoms)?;
    let cond_ids = ids_of(catalog, &task.cond.atoms().collect::<Vec<_>>())?;
    let task_ids = ids_of(catalog, &task.atoms().collect::<Vec<_>>())?;

    let mut objects = Vec::new();
    if !goal_ids.is_empty() {
        for _ in 0..cfg.goal_objects.sample(&mut rng).max(1) {
            objects.push(*goal_ids.choose(&mut rng).expect("non-empty"));
        }
    }
    if !cond_ids.is_empty() {
        for _ in 0..cfg.constraint_range().sample(&mut rng) {
            objects.push(*cond_ids.choose(&mut rng).expect("non-empty"));
        }
    }
    let pool: Vec<ObjectId> = cfg
        .distractor_pool
        .clone()
        .unwrap_or_else(|| split_objects(catalog, cfg.split))
        .into_iter()
        .filter(|id| !task_ids.contains(id))
        .collect();
    if !pool.is_empty() {
        for _ in 0..cfg.distractors.sample(&mut rng) {
            objects.push(*pool.choose(&mut rng).expect("non-empty"));
        }
    }
    if objects.len() + 1 > n * n {
        return Err(MapError::Unplaceable { needed: objects.len(), cells: n * n });
    }

    let mut order: Vec<usize> = (0..n * n).collect();
    order.shuffle(&mut rng);
    let mut cells = vec![None; n * n];
    for (&cell, &id) in order.iter().zip(&objects) {
        cells[cell] = Some(id);
    }
    let start_cell = order[objects.len()..].choose(&mut rng).copied().expect("a free cell remains");
    let start_dir = match cfg.mode {
        Mode::Minecraft => None,
        Mode::MiniGrid => Some(*Dir::ALL.choose(&mut rng).expect("non-empty")),
    };
    let map = GridMap {
        mode: cfg.mode,
        n,
        cells,
        start: (start_cell / n, start_cell % n),
        start_dir,
        horizon: cfg.horizon(),
        seed: cfg.seed,
    };
    if map.goal_cells(catalog, task).is_empty() {
        return Err(MapError::Unsolvable);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_catalog;
    use sattl::parse_task;

    #[test]
    fn small_map_has_goal() {
        let c = build_catalog(7, Mode::Minecraft);
        let t = parse_task("true U + obj3").unwrap();
        let m = generate_map(&MapConfig::new(Mode::Minecraft, 7, 11), &t, &c).unwrap();
        assert_eq!(m.n, 7);
        assert!(!m.goal_cells(&c, &t).is_empty());
        assert_eq!(m.cell(m.start), None);
        assert_eq!(m.horizon, 100);
        assert_eq!(m, generate_map(&MapConfig::new(Mode::Minecraft, 7, 11), &t, &c).unwrap());
    }

    #[test]
    fn large_minigrid_map() {
        let c = build_catalog(7, Mode::MiniGrid);
        let t = parse_task("- orange_lava U + gray_key").unwrap();
        let m = generate_map(&MapConfig::new(Mode::MiniGrid, 22, 5), &t, &c).unwrap();
        let lava = c.id_of(&sattl::Atom::new("orange_lava").unwrap()).unwrap();
        assert!(m.cells().contains(&Some(lava)));
        assert!(m.start_dir.is_some());
        assert_eq!(m.horizon, 2 * 22 * 22);
    }

    #[test]
    fn unplaceable_and_unknown() {
        let c = build_catalog(7, Mode::Minecraft);
        let t = parse_task("- obj1 U + obj3").unwrap();
        let mut cfg = MapConfig::new(Mode::Minecraft, 2, 1);
        cfg.distractors = CountRange::new(6, 6);
        assert!(matches!(generate_map(&cfg, &t, &c), Err(MapError::Unplaceable { .. })));
        let t = parse_task("true U + axe").unwrap();
        assert_eq!(generate_map(&MapConfig::new(Mode::Minecraft, 7, 1), &t, &c), Err(MapError::UnknownAtom("axe".into())));
    }

    #[test]
    fn snapshot_round_trip() {
        let c = build_catalog(7, Mode::MiniGrid);
        let t = parse_task("true U + red_ball").unwrap();
        let m = generate_map(&MapConfig::new(Mode::MiniGrid, 7, 3), &t, &c).unwrap();
        let s = m.snapshot(&c, m.start, m.start_dir);
        let json = serde_json::to_string(&s).unwrap();
        let back: MapSnapshot = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_map(Some(m.horizon)).unwrap(), m);
    }

    #[test]
    fn turning() {
        for d in Dir::ALL {
            assert_eq!(d.left().right(), d);
            assert_eq!(d.left().left().left().left(), d);
        }
        assert_eq!(Dir::N.right(), Dir::E);
    }
}

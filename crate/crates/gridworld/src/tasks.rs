//! Procedural task sampling per instruction category, with train/test
//! object splits, plus the instruction transforms of the control experiments.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use sattl::{parse_formula, AtomicTask, Literal, SignedAtom, SyntaxError, TemporalFormula};

use crate::catalog::{Mode, ObjectCatalog, ObjectId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskCategory {
    /// `true U +p`
    Reachability,
    /// `true U -p` or `true U (-p1 | -p2)`
    NegReachability,
    /// `+p1 U +p2` or `(+p1 | +p2) U (+p3 | +p4)`
    PositiveCond,
    /// `-p1 U +p2` or `-p1 U (+p2 | +p3)`
    NegativeCond,
}

impl TaskCategory {
    pub const ALL: [TaskCategory; 4] = [
        TaskCategory::Reachability,
        TaskCategory::NegReachability,
        TaskCategory::PositiveCond,
        TaskCategory::NegativeCond,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskCategory::Reachability => "reachability",
            TaskCategory::NegReachability => "neg-reachability",
            TaskCategory::PositiveCond => "positive-cond",
            TaskCategory::NegativeCond => "negative-cond",
        }
    }

    /// Largest number of distinct atoms a template of this category uses.
    pub fn max_atoms(self) -> usize {
        match self {
            TaskCategory::Reachability => 1,
            TaskCategory::NegReachability => 2,
            TaskCategory::PositiveCond => 4,
            TaskCategory::NegativeCond => 3,
        }
    }

    /// Whether `task` has the exact shape of one of this category's templates.
    pub fn matches(self, task: &AtomicTask) -> bool {
        let signs = |l: &Literal, positive: bool, lens: &[usize]| match l {
            Literal::True => false,
            Literal::Any(e) => {
                lens.contains(&e.len())
                    && e.iter().all(|s| (s.sign == sattl::Sign::Positive) == positive)
            }
        };
        let distinct = {
            let mut atoms: Vec<_> = task.atoms().collect();
            let n = atoms.len();
            atoms.sort();
            atoms.dedup();
            atoms.len() == n
        };
        distinct
            && match self {
                TaskCategory::Reachability => task.cond.is_true() && signs(&task.goal, true, &[1]),
                TaskCategory::NegReachability => task.cond.is_true() && signs(&task.goal, false, &[1, 2]),
                TaskCategory::PositiveCond => {
                    let (c, g) = (task.cond.entries().len(), task.goal.entries().len());
                    (c, g) == (1, 1) && signs(&task.cond, true, &[1]) && signs(&task.goal, true, &[1])
                        || (c, g) == (2, 2) && signs(&task.cond, true, &[2]) && signs(&task.goal, true, &[2])
                }
                TaskCategory::NegativeCond => signs(&task.cond, false, &[1]) && signs(&task.goal, true, &[1, 2]),
            }
    }
}

impl std::str::FromStr for TaskCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        TaskCategory::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown task category {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    pub fn other(self) -> Split {
        match self {
            Split::Train => Split::Test,
            Split::Test => Split::Train,
        }
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("split supplies {available} objects but the task needs {needed}")]
pub struct SplitTooSmall {
    pub needed: usize,
    pub available: usize,
}

/// Objects a task of `category` may mention under `split`.
pub fn pool(catalog: &ObjectCatalog, category: TaskCategory, split: Split) -> Vec<ObjectId> {
    match catalog.mode {
        Mode::Minecraft => {
            let s = catalog.minecraft().expect("minecraft catalog");
            match split {
                Split::Train => s.x2.clone(),
                Split::Test => s.x3.clone(),
            }
        }
        Mode::MiniGrid => {
            let s = catalog.minigrid().expect("minigrid catalog");
            let k = match (category, split) {
                (TaskCategory::Reachability, Split::Train) => 0,
                (TaskCategory::Reachability, Split::Test) => 1,
                (_, Split::Train) => 2,
                (_, Split::Test) => 3,
            };
            let mut out = Vec::with_capacity(s.c[k].len() * s.f[k].len());
            for &c in &s.c[k] {
                for &f in &s.f[k] {
                    out.push(catalog.compose(c, f));
                }
            }
            out
        }
    }
}

/// Every object any category may mention under `split`; the distractor pool.
pub fn split_objects(catalog: &ObjectCatalog, split: Split) -> Vec<ObjectId> {
    let mut out: Vec<ObjectId> = TaskCategory::ALL.iter().flat_map(|&c| pool(catalog, c, split)).collect();
    out.sort();
    out.dedup();
    out
}

pub fn sample_task<R: Rng + ?Sized>(
    catalog: &ObjectCatalog,
    category: TaskCategory,
    split: Split,
    rng: &mut R,
) -> Result<AtomicTask, SplitTooSmall> {
    sample_task_from(catalog, &pool(catalog, category, split), category, rng)
}

/// Sample from an explicit object pool; atoms within a task are distinct and
/// the template is chosen uniformly within the category.
pub fn sample_task_from<R: Rng + ?Sized>(
    catalog: &ObjectCatalog,
    pool: &[ObjectId],
    category: TaskCategory,
    rng: &mut R,
) -> Result<AtomicTask, SplitTooSmall> {
    let wide = rng.gen_bool(0.5);
    let needed = match category {
        TaskCategory::Reachability => 1,
        TaskCategory::NegReachability => 1 + wide as usize,
        TaskCategory::PositiveCond => 2 + 2 * wide as usize,
        TaskCategory::NegativeCond => 2 + wide as usize,
    };
    if pool.len() < needed {
        return Err(SplitTooSmall { needed, available: pool.len() });
    }
    let p: Vec<_> = pool.choose_multiple(rng, needed).map(|&id| catalog.atom(id).clone()).collect();
    let any = |v: Vec<SignedAtom>| Literal::any(v).expect("non-empty");
    let pos = |i: usize| SignedAtom::pos(p[i].clone());
    let neg = |i: usize| SignedAtom::neg(p[i].clone());
    Ok(match (category, wide) {
        (TaskCategory::Reachability, _) => AtomicTask::eventually(any(vec![pos(0)])),
        (TaskCategory::NegReachability, false) => AtomicTask::eventually(any(vec![neg(0)])),
        (TaskCategory::NegReachability, true) => AtomicTask::eventually(any(vec![neg(0), neg(1)])),
        (TaskCategory::PositiveCond, false) => AtomicTask::new(any(vec![pos(0)]), any(vec![pos(1)])),
        (TaskCategory::PositiveCond, true) => {
            AtomicTask::new(any(vec![pos(0), pos(1)]), any(vec![pos(2), pos(3)]))
        }
        (TaskCategory::NegativeCond, false) => AtomicTask::new(any(vec![neg(0)]), any(vec![pos(1)])),
        (TaskCategory::NegativeCond, true) => AtomicTask::new(any(vec![neg(0)]), any(vec![pos(1), pos(2)])),
    })
}

/// Whether every atom of `task` lies in the category's pool for `split`.
pub fn within_split(catalog: &ObjectCatalog, task: &AtomicTask, category: TaskCategory, split: Split) -> bool {
    let allowed = pool(catalog, category, split);
    task.atoms().all(|a| catalog.id_of(a).is_some_and(|id| allowed.contains(&id)))
}

/// Hide the safety condition: `c U g` becomes `true U g`.
pub fn occlude(task: &AtomicTask) -> AtomicTask {
    AtomicTask::new(Literal::True, task.goal.clone())
}

/// Flip every sign in the safety condition.
pub fn deceive(task: &AtomicTask) -> AtomicTask {
    AtomicTask::new(task.cond.flip_signs(), task.goal.clone())
}

/// A formula of exactly `depth` composition levels over tasks sampled from
/// random categories of `split`.
pub fn compose_random<R: Rng + ?Sized>(
    catalog: &ObjectCatalog,
    split: Split,
    depth: usize,
    rng: &mut R,
) -> Result<TemporalFormula, SplitTooSmall> {
    if depth == 0 {
        let cat = *TaskCategory::ALL.choose(rng).expect("non-empty");
        return sample_task(catalog, cat, split, rng).map(Into::into);
    }
    let deep = compose_random(catalog, split, depth - 1, rng)?;
    let other_depth = rng.gen_range(0..depth);
    let other = compose_random(catalog, split, other_depth, rng)?;
    let (a, b) = if rng.gen_bool(0.5) { (deep, other) } else { (other, deep) };
    Ok(if rng.gen_bool(0.5) { TemporalFormula::seq(a, b) } else { TemporalFormula::choice(a, b) })
}

#[derive(Debug, Error)]
pub enum TaskListError {
    #[error("line {line}: expected `formula<TAB>split`")]
    Shape { line: usize },
    #[error("line {line}: {source}")]
    Formula {
        line: usize,
        #[source]
        source: SyntaxError,
    },
    #[error("line {line}: {msg}")]
    Split { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_task_list<W: Write>(mut w: W, tasks: &[(TemporalFormula, Split)]) -> std::io::Result<()> {
    for (f, s) in tasks {
        writeln!(w, "{f}\t{}", s.name())?;
    }
    Ok(())
}

pub fn read_task_list<R: BufRead>(r: R) -> Result<Vec<(TemporalFormula, Split)>, TaskListError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (f, s) = line.split_once('\t').ok_or(TaskListError::Shape { line: i + 1 })?;
        let f = parse_formula(f).map_err(|source| TaskListError::Formula { line: i + 1, source })?;
        let s = s.trim().parse().map_err(|msg| TaskListError::Split { line: i + 1, msg })?;
        out.push((f, s));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_catalog;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use sattl::parse_task;

    #[test]
    fn minecraft_reachability_uses_x2() {
        let c = build_catalog(7, Mode::Minecraft);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = sample_task(&c, TaskCategory::Reachability, Split::Train, &mut rng).unwrap();
        assert!(TaskCategory::Reachability.matches(&t));
        let id = c.id_of(&t.goal.entries()[0].atom).unwrap();
        assert!(c.minecraft().unwrap().x2.contains(&id));
    }

    #[test]
    fn minigrid_negative_cond_test_uses_c4_f4() {
        let c = build_catalog(7, Mode::MiniGrid);
        let sets = c.minigrid().unwrap().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let t = sample_task(&c, TaskCategory::NegativeCond, Split::Test, &mut rng).unwrap();
            assert!(TaskCategory::NegativeCond.matches(&t), "{t}");
            for a in t.atoms() {
                let (col, shp) = c.decompose(c.id_of(a).unwrap());
                assert!(sets.c[3].contains(&col) && sets.f[3].contains(&shp));
            }
        }
    }

    #[test]
    fn positive_cond_uses_distinct_atoms() {
        let c = build_catalog(7, Mode::MiniGrid);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut wide = 0;
        for _ in 0..100 {
            let t = sample_task(&c, TaskCategory::PositiveCond, Split::Train, &mut rng).unwrap();
            assert!(TaskCategory::PositiveCond.matches(&t), "{t}");
            wide += (t.atoms().count() == 4) as usize;
        }
        assert!(wide > 20 && wide < 80);
    }

    #[test]
    fn small_pool_is_reported() {
        let c = build_catalog(7, Mode::Minecraft);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pool = [ObjectId(0)];
        let r = (0..20).map(|_| sample_task_from(&c, &pool, TaskCategory::NegativeCond, &mut rng));
        assert!(r.into_iter().all(|r| matches!(r, Err(SplitTooSmall { available: 1, .. }))));
    }

    #[test]
    fn transforms() {
        let t = parse_task("- c U + p").unwrap();
        assert_eq!(occlude(&t), parse_task("true U + p").unwrap());
        assert_eq!(deceive(&t), parse_task("+ c U + p").unwrap());
        assert_eq!(deceive(&deceive(&t)), t);
        let r = parse_task("true U + p").unwrap();
        assert_eq!(occlude(&r), r);
        assert_eq!(deceive(&r), r);
    }

    #[test]
    fn compose_depth() {
        let c = build_catalog(7, Mode::Minecraft);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 0..4 {
            assert_eq!(compose_random(&c, Split::Train, d, &mut rng).unwrap().depth(), d);
        }
    }

    #[test]
    fn task_list_file() {
        let f = parse_formula("(<> +a) ; (-b U +c)").unwrap();
        let mut buf = Vec::new();
        write_task_list(&mut buf, &[(f.clone(), Split::Test)]).unwrap();
        let back = read_task_list(buf.as_slice()).unwrap();
        assert_eq!(back, vec![(f, Split::Test)]);
        assert!(matches!(read_task_list("true U +a\n".as_bytes()), Err(TaskListError::Shape { line: 1 })));
    }
}

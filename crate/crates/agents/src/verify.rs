//! Independent references used by the test suites: finite-difference
//! gradients and exhaustive search over action sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sattl::{sm_init, Atom, AtomicTask, Reward, SmState, TemporalFormula};

use gridworld::{actions, transition, Dir, GridMap, ObjectCatalog, Pos};

use crate::net::{net_backward, rollout_loss, LossWeights, NetConfig, NetError, NetParams, Rollout, Transition};

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

pub const FD_EPS: f64 = 1e-5;
pub const REL_FLOOR: f64 = 1e-6;

/// Parameters with every entry drawn uniformly from `[-0.5, 0.5]`.
pub fn random_params(cfg: &NetConfig, rng: &mut ChaCha8Rng) -> Result<NetParams, NetError> {
    let mut p = NetParams::init(cfg)?;
    for (_, l) in p.layers_mut() {
        l.values_mut().for_each(|v| *v = rng.gen_range(-0.5..0.5));
    }
    Ok(p)
}

/// A rollout of `len` steps with random sparse inputs, actions, rewards and
/// episode ends.
pub fn random_rollout(cfg: &NetConfig, len: usize, rng: &mut ChaCha8Rng) -> Rollout {
    let pick = |width: usize, rng: &mut ChaCha8Rng| {
        let mut v: Vec<u32> = (0..width as u32).filter(|_| rng.gen_bool(0.3)).collect();
        v.dedup();
        v
    };
    let steps = (0..len)
        .map(|_| Transition {
            feat: pick(cfg.feature_width, rng),
            instr: pick(cfg.instr_width, rng),
            action: rng.gen_range(0..cfg.actions),
            reward: rng.gen_range(-1.0..1.0),
            done: rng.gen_bool(0.15),
        })
        .collect();
    Rollout { h0: (0..cfg.hidden).map(|_| rng.gen_range(-0.5..0.5)).collect(), steps, bootstrap: rng.gen_range(-1.0..1.0) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// Layer holding the worst entry.
    pub worst_layer: &'static str,
    pub checked: usize,
}

/// Compare [`net_backward`] with central differences on every parameter.
/// The advantages stay fixed at their unperturbed values, matching their
/// treatment as constants in the policy term.
pub fn gradient_check(p: &NetParams, r: &Rollout, w: &LossWeights) -> Result<GradCheck, NetError> {
    let (analytic, _) = net_backward(p, r, w)?;
    let (_, adv, _) = rollout_loss(p, r, w, None)?;
    let mut probe = p.clone();
    let mut out = GradCheck { max_rel_error: 0.0, worst_layer: "", checked: 0 };
    let names: Vec<&'static str> = p.layers().iter().map(|(n, _)| *n).collect();
    for (li, name) in names.iter().enumerate() {
        let len = p.layers()[li].1.w.len() + p.layers()[li].1.b.len();
        for k in 0..len {
            let orig = value(&probe, li, k);
            set(&mut probe, li, k, orig + FD_EPS);
            let up = rollout_loss(&probe, r, w, Some(&adv))?.0;
            set(&mut probe, li, k, orig - FD_EPS);
            let down = rollout_loss(&probe, r, w, Some(&adv))?.0;
            set(&mut probe, li, k, orig);
            let numeric = (up - down) / (2.0 * FD_EPS);
            let e = relative_error(value(&analytic, li, k), numeric, REL_FLOOR);
            if e > out.max_rel_error {
                out.max_rel_error = e;
                out.worst_layer = name;
            }
            out.checked += 1;
        }
    }
    Ok(out)
}

fn value(p: &NetParams, li: usize, k: usize) -> f64 {
    let l = p.layers()[li].1;
    if k < l.w.len() {
        l.w[k]
    } else {
        l.b[k - l.w.len()]
    }
}

fn set(p: &mut NetParams, li: usize, k: usize, v: f64) {
    let mut layers = p.layers_mut();
    let l = &mut layers[li].1;
    if k < l.w.len() {
        l.w[k] = v;
    } else {
        let n = l.w.len();
        l.b[k - n] = v;
    }
}

/// Best episode return over every action sequence from the map's start,
/// stepping the symbolic module directly. Exponential in the horizon.
pub fn exhaustive_best(catalog: &ObjectCatalog, map: &GridMap, task: &AtomicTask) -> Reward {
    fn go(catalog: &ObjectCatalog, map: &GridMap, pos: Pos, dir: Option<Dir>, t: usize, sm: &SmState) -> Reward {
        let mut best: Option<Reward> = None;
        for &a in actions(map.mode) {
            let (p2, d2) = transition(map, pos, dir, a);
            let mut labels = map.labels_at(catalog, p2);
            let last = t + 1 >= map.horizon;
            if last {
                labels.insert(Atom::end());
            }
            let mut next = sm.clone();
            let r = next.advance(&labels).expect("live episode").reward;
            let total = if last || next.is_done() { r } else { r + go(catalog, map, p2, d2, t + 1, &next) };
            if best.map_or(true, |b| total > b) {
                best = Some(total);
            }
        }
        best.expect("non-empty action set")
    }
    if map.horizon == 0 {
        return Reward::ZERO;
    }
    go(catalog, map, map.start, map.start_dir, 0, &sm_init(&TemporalFormula::from(task.clone())))
}

/// Seeded generator for verification draws.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random map of side 2..=4 with horizon 1..=8, cells filled from four
/// catalog objects, and a random task over those objects whose goal
/// appears on the map or is reachable through `end`.
pub fn small_planning_instance(catalog: &ObjectCatalog, rng: &mut ChaCha8Rng) -> (GridMap, AtomicTask) {
    use gridworld::tasks::{pool, sample_task_from};
    use gridworld::{Mode, Split, TaskCategory};
    let objs: Vec<_> = pool(catalog, TaskCategory::PositiveCond, Split::Train).into_iter().take(4).collect();
    loop {
        let n = rng.gen_range(2..=4);
        let cells = (0..n * n).map(|_| rng.gen_bool(0.5).then(|| objs[rng.gen_range(0..objs.len())])).collect();
        let start = (rng.gen_range(0..n), rng.gen_range(0..n));
        let dir = (catalog.mode == Mode::MiniGrid).then(|| Dir::ALL[rng.gen_range(0..4)]);
        let map = GridMap::from_cells(catalog.mode, n, cells, start, dir, rng.gen_range(1..=8));
        let cat = TaskCategory::ALL[rng.gen_range(0..4)];
        let task = sample_task_from(catalog, &objs, cat, rng).expect("four objects suffice");
        if crate::oracle::plan_oracle(catalog, &map, &task).is_ok() {
            return (map, task);
        }
    }
}

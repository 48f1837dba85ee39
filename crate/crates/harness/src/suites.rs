//! Equivalence and hygiene checks shared by the `fuzz` subcommand and the
//! acceptance run. Each suite counts its cases and every disagreement.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use agents::episodes::mix;
use agents::{run_episode, RandomPolicy};
use gridworld::tasks::{pool, within_split};
use gridworld::{build_catalog, generate_map, sample_task, GridEnv, MapConfig, Mode, Split, TaskCategory};
use sattl::gen::{letters, random_formula, random_trace, small_family};
use sattl::{
    enumerate_traces, eval_ltlf, extract, format_formula, parse_formula, satisfies, satisfies_naive,
    satisfies_with_restarts, translate, Reward, TemporalFormula, Trace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    DpVsNaive,
    RoundTrip,
    TruthPreservation,
    ExtractorSoundness,
    RewardAccounting,
    SplitHygiene,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::DpVsNaive,
        Suite::RoundTrip,
        Suite::TruthPreservation,
        Suite::ExtractorSoundness,
        Suite::RewardAccounting,
        Suite::SplitHygiene,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::DpVsNaive => "dp-vs-naive",
            Suite::RoundTrip => "round-trip",
            Suite::TruthPreservation => "truth-preservation",
            Suite::ExtractorSoundness => "extractor-soundness",
            Suite::RewardAccounting => "reward-accounting",
            Suite::SplitHygiene => "split-hygiene",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            format!("unknown suite {s:?}, expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub cases: usize,
    /// How the cases were made up, e.g. `1364 traces × 245 formulas`.
    pub shape: String,
    pub disagreements: usize,
    /// The first disagreement found.
    pub example: Option<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.disagreements == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}, {} disagreements", self.suite, self.shape, self.disagreements)?;
        if let Some(e) = &self.example {
            write!(f, " (first: {e})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzParams {
    /// Atom count of the exhaustive suites.
    pub atoms: usize,
    /// Longest trace of the exhaustive suites.
    pub max_len: usize,
    /// Cases of the random suites.
    pub cases: usize,
    /// Longest random trace.
    pub trace_len: usize,
    /// Deepest random formula.
    pub depth: usize,
    pub seed: u64,
}

impl Default for FuzzParams {
    fn default() -> Self {
        FuzzParams { atoms: 2, max_len: 5, cases: 10_000, trace_len: 8, depth: 3, seed: 0 }
    }
}

pub fn run_suite(suite: Suite, p: &FuzzParams) -> Result<SuiteReport, String> {
    match suite {
        Suite::DpVsNaive => Ok(dp_vs_naive(p.cases, p.trace_len, p.depth, p.seed)),
        Suite::RoundTrip => Ok(round_trip(p.cases, p.depth, p.seed)),
        Suite::TruthPreservation => truth_preservation(p.atoms, p.max_len),
        Suite::ExtractorSoundness => extractor_soundness(p.atoms, p.max_len),
        Suite::RewardAccounting => Ok(reward_accounting(p.cases.min(1_000), p.seed)),
        Suite::SplitHygiene => Ok(split_hygiene(p.cases, p.seed)),
    }
}

struct Tally {
    count: usize,
    first: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { count: 0, first: None }
    }

    fn miss(&mut self, what: impl FnOnce() -> String) {
        self.count += 1;
        if self.first.is_none() {
            self.first = Some(what());
        }
    }

    fn report(self, suite: Suite, cases: usize, shape: String) -> SuiteReport {
        SuiteReport { suite: suite.name(), cases, shape, disagreements: self.count, example: self.first }
    }
}

fn show(t: &Trace) -> String {
    let steps: Vec<String> = t
        .steps()
        .iter()
        .map(|s| format!("{{{}}}", s.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("[{}]", steps.join(" "))
}

fn exhaustive(atoms: usize, max_len: usize) -> Result<(Vec<Trace>, Vec<TemporalFormula>), String> {
    let names = letters(atoms);
    let traces: Vec<Trace> = enumerate_traces(&names, max_len).map_err(|e| e.to_string())?.collect();
    Ok((traces, small_family(&names)))
}

/// The window-table semantics against the recursive reading on random
/// traces and formulas.
pub fn dp_vs_naive(cases: usize, trace_len: usize, depth: usize, seed: u64) -> SuiteReport {
    let atoms = letters(3);
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, 1]));
    let mut t = Tally::new();
    for _ in 0..cases {
        let f = random_formula(&mut rng, &atoms, depth);
        let tr = random_trace(&mut rng, &atoms, trace_len, 0.4);
        match satisfies_naive(&tr, &f) {
            Ok(v) if v == satisfies(&tr, &f) => {}
            Ok(v) => t.miss(|| format!("{f} on {}: naive {v}", show(&tr))),
            Err(e) => t.miss(|| format!("{f} on {}: {e}", show(&tr))),
        }
    }
    t.report(Suite::DpVsNaive, cases, format!("{cases} random (trace ≤ {trace_len}, depth ≤ {depth}) cases"))
}

/// Printing then parsing gives back the same tree.
pub fn round_trip(cases: usize, depth: usize, seed: u64) -> SuiteReport {
    let atoms: Vec<_> = ["a", "b", "c", "axe", "grass", "obj12", "red_key", "end"]
        .iter()
        .map(|s| sattl::Atom::new(*s).expect("valid atom"))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, 2]));
    let mut t = Tally::new();
    for _ in 0..cases {
        let f = without_negated_end(random_formula(&mut rng, &atoms, depth));
        let text = format_formula(&f);
        match parse_formula(&text) {
            Ok(g) if g == f => {}
            Ok(g) => t.miss(|| format!("{text} reparsed as {g}")),
            Err(e) => t.miss(|| format!("{text}: {e}")),
        }
    }
    t.report(Suite::RoundTrip, cases, format!("{cases} random formulas of depth ≤ {depth}"))
}

/// `- end` is not a formula of the language, so generated negations of it
/// become positive.
fn without_negated_end(f: TemporalFormula) -> TemporalFormula {
    use sattl::{AtomicTask, Literal, Sign, SignedAtom};
    let fix = |l: Literal| match l {
        Literal::True => Literal::True,
        Literal::Any(es) => Literal::any(es.into_iter().map(|e| {
            if e.atom.is_end() && e.sign == Sign::Negative {
                SignedAtom::pos(e.atom)
            } else {
                e
            }
        }))
        .expect("non-empty"),
    };
    match f {
        TemporalFormula::Atomic(t) => TemporalFormula::Atomic(AtomicTask::new(fix(t.cond), fix(t.goal))),
        TemporalFormula::Seq(a, b) => TemporalFormula::seq(without_negated_end(*a), without_negated_end(*b)),
        TemporalFormula::Choice(a, b) => TemporalFormula::choice(without_negated_end(*a), without_negated_end(*b)),
    }
}

/// `satisfies(f)` against `eval_ltlf(translate(f))` on every trace and
/// every formula of the fixed family.
pub fn truth_preservation(atoms: usize, max_len: usize) -> Result<SuiteReport, String> {
    let (traces, fam) = exhaustive(atoms, max_len)?;
    let misses: Vec<(usize, String)> = fam
        .par_iter()
        .map(|f| {
            let g = translate(f);
            let bad: Vec<&Trace> = traces.iter().filter(|t| satisfies(t, f) != eval_ltlf(&g, t)).collect();
            (bad.len(), bad.first().map(|t| format!("{f} on {}", show(t))).unwrap_or_default())
        })
        .collect();
    let mut t = Tally::new();
    for (n, what) in misses {
        for _ in 0..n {
            t.miss(|| what.clone());
        }
    }
    let shape = format!("{} traces × {} formulas", traces.len(), fam.len());
    Ok(t.report(Suite::TruthPreservation, traces.len() * fam.len(), shape))
}

/// A formula holds exactly when one of its extracted task sequences,
/// read as a right-nested sequence, holds.
pub fn extractor_soundness(atoms: usize, max_len: usize) -> Result<SuiteReport, String> {
    let (traces, fam) = exhaustive(atoms, max_len)?;
    let misses: Vec<(usize, String)> = fam
        .par_iter()
        .map(|f| {
            let seqs: Vec<TemporalFormula> = extract(f)
                .sequences()
                .iter()
                .filter_map(|s| TemporalFormula::sequence_of(s))
                .collect();
            let bad: Vec<&Trace> =
                traces.iter().filter(|t| satisfies(t, f) != seqs.iter().any(|s| satisfies(t, s))).collect();
            (bad.len(), bad.first().map(|t| format!("{f} on {}", show(t))).unwrap_or_default())
        })
        .collect();
    let mut t = Tally::new();
    for (n, what) in misses {
        for _ in 0..n {
            t.miss(|| what.clone());
        }
    }
    let shape = format!("{} traces × {} formulas", traces.len(), fam.len());
    Ok(t.report(Suite::ExtractorSoundness, traces.len() * fam.len(), shape))
}

/// Random-walk episodes on atomic tasks of every category in both modes.
/// The environment's total must equal `+1` for a completion, `-1` per
/// violation and `-0.05` per other step, with the counts read off an
/// independent restart scan of the recorded trace.
pub fn reward_accounting(episodes: usize, seed: u64) -> SuiteReport {
    let catalogs = [Arc::new(build_catalog(seed, Mode::Minecraft)), Arc::new(build_catalog(seed, Mode::MiniGrid))];
    let results: Vec<Option<String>> = (0..episodes as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, 3, i]));
            let catalog = &catalogs[(i % 2) as usize];
            let category = TaskCategory::ALL[rng.gen_range(0..4)];
            let task = sample_task(catalog, category, Split::Train, &mut rng).expect("split pools are large");
            let mut cfg = MapConfig::new(catalog.mode, rng.gen_range(5..=9), rng.gen());
            cfg.horizon = Some(rng.gen_range(10..=60));
            let Ok(map) = generate_map(&cfg, &task, catalog) else {
                return Some(format!("episode {i}: no map for {task}"));
            };
            let mut env = GridEnv::new(catalog.clone(), map, task.clone().into());
            let mut prng = ChaCha8Rng::seed_from_u64(mix(&[seed, 4, i]));
            let ep = run_episode(&mut env, &mut RandomPolicy, &mut prng).expect("fresh episode");
            let scan = satisfies_with_restarts(&ep.trace, &task);
            let done = usize::from(scan.satisfied);
            let ordinary = ep.trace.len() - scan.violation_count - done;
            let closed = Reward::from_twentieths(
                Reward::GOAL.twentieths() * done as i64
                    + Reward::VIOLATION.twentieths() * scan.violation_count as i64
                    + Reward::STEP.twentieths() * ordinary as i64,
            );
            (ep.total != closed).then(|| format!("episode {i} ({task}): env {} vs closed form {}", ep.total, closed))
        })
        .collect();
    let mut t = Tally::new();
    for r in results.into_iter().flatten() {
        t.miss(|| r);
    }
    t.report(Suite::RewardAccounting, episodes, format!("{episodes} atomic-task episodes"))
}

/// Sampled tasks stay inside their split's pools and match their category.
pub fn split_hygiene(samples: usize, seed: u64) -> SuiteReport {
    let catalogs = [build_catalog(seed, Mode::Minecraft), build_catalog(seed, Mode::MiniGrid)];
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, 5]));
    let mut t = Tally::new();
    for _ in 0..samples {
        let cat = &catalogs[rng.gen_range(0..2)];
        let category = TaskCategory::ALL[rng.gen_range(0..4)];
        let split = if rng.gen_bool(0.5) { Split::Train } else { Split::Test };
        let task = match sample_task(cat, category, split, &mut rng) {
            Ok(task) => task,
            Err(e) => {
                t.miss(|| format!("{} {} {}: {e}", cat.mode.name(), category.name(), split.name()));
                continue;
            }
        };
        let other = pool(cat, category, split.other());
        let leaked = task.atoms().any(|a| cat.id_of(a).map_or(true, |id| other.contains(&id)));
        if leaked || !within_split(cat, &task, category, split) || !category.matches(&task) {
            t.miss(|| format!("{} {} {}: {task}", cat.mode.name(), category.name(), split.name()));
        }
    }
    t.report(Suite::SplitHygiene, samples, format!("{samples} sampled tasks"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse_back() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>(), Ok(s));
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_runs_agree() {
        assert!(dp_vs_naive(200, 6, 2, 1).passed());
        assert!(round_trip(200, 3, 1).passed());
        assert!(reward_accounting(40, 1).passed());
        assert!(split_hygiene(400, 1).passed());
    }

    #[test]
    fn exhaustive_shape_counts_traces() {
        let r = truth_preservation(1, 3).unwrap();
        assert!(r.shape.starts_with("14 traces × "), "{}", r.shape);
        assert!(r.passed());
    }
}

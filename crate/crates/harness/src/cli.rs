//! The `sattl` command line.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use agents::checkpoint::save_checkpoint;
use agents::episodes::mix;
use agents::net::Activation;
use agents::{control_experiment, desk_recipe, Arch, EnvSpec, SizeSpec};
use gridworld::render::{ascii, env_pixels, Pixels};
use gridworld::tasks::{compose_random, write_task_list};
use gridworld::{
    build_catalog, generate_map, sample_task, Action, CountRange, GridEnv, MapConfig, MapSnapshot, Mode, Split,
    TaskCategory,
};
use sattl::trace::{read_jsonl, write_jsonl, TraceRecord};
use sattl::{
    episode_return, parse_formula, parse_task, satisfies, satisfies_with_restarts, translate, TemporalFormula,
};

use crate::campaign::{campaign_eval, load_policy, percentile};
use crate::config::RunConfig;
use crate::suites::{run_suite, FuzzParams, Suite};

/// A failure reported as one `error kind=... msg="..."` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: &'static str,
    pub msg: String,
    pub code: i32,
}

impl CliError {
    pub fn new(kind: &'static str, msg: impl fmt::Display) -> Self {
        CliError { kind, msg: msg.to_string(), code: 1 }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error kind={} msg={:?}", self.kind, self.msg)
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::new("io", format!("{}: {e}", path.display()))
}

#[derive(Parser, Debug)]
#[command(name = "sattl", version, about = "Safety-aware task formulas, gridworlds and agents")]
struct Cli {
    /// Flat key=value file of flag defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sample task formulas.
    GenTask(GenTask),
    /// Generate a map for a task.
    GenMap(GenMap),
    /// Run one episode with a scripted action list or a policy.
    Play(Play),
    /// Train agents with advantage actor-critic.
    Train(Train),
    /// Paired evaluation campaign over map sizes.
    Eval(Eval),
    /// Reliable, occluded and deceptive instructions on NegativeCond tasks.
    ControlExp(ControlExp),
    /// Check recorded traces against a formula.
    CheckTrace(CheckTrace),
    /// Print the LTLf translation of a formula.
    Translate(Translate),
    /// Run equivalence and hygiene suites.
    Fuzz(Fuzz),
}

fn parse_range(s: &str) -> Result<CountRange, String> {
    let (lo, hi) = s.split_once('-').unwrap_or((s, s));
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad count {v:?}: {e}"));
    let (lo, hi) = (p(lo)?, p(hi)?);
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok(CountRange::new(lo, hi))
}

#[derive(Args, Debug, Clone)]
struct World {
    #[arg(long, default_value = "minecraft")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    catalog_seed: u64,
    /// `train` or `test`; evaluation defaults to `test`, everything else to `train`.
    #[arg(long)]
    split: Option<Split>,
    /// Task categories, comma separated; all when absent.
    #[arg(long, value_delimiter = ',')]
    category: Vec<TaskCategory>,
    /// Restrict every category to the first k objects of its pool.
    #[arg(long)]
    objects: Option<usize>,
    /// Constraint objects per map, `lo-hi`.
    #[arg(long, value_parser = parse_range)]
    constraints: Option<CountRange>,
    /// Distractor objects per map, `lo-hi`.
    #[arg(long, value_parser = parse_range)]
    distractors: Option<CountRange>,
    #[arg(long)]
    horizon: Option<usize>,
}

impl World {
    fn spec(&self, default_split: Split) -> EnvSpec {
        let mut s = EnvSpec::new(self.mode);
        s.catalog_seed = self.catalog_seed;
        s.split = self.split.unwrap_or(default_split);
        if !self.category.is_empty() {
            s.categories = self.category.clone();
        }
        s.objects = self.objects;
        if self.constraints.is_some() {
            s.constraint_objects = self.constraints;
        }
        if let Some(d) = self.distractors {
            s.distractors = d;
        }
        s.horizon = self.horizon;
        s
    }
}

#[derive(Args, Debug)]
struct GenTask {
    #[command(flatten)]
    world: World,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Composition depth; 0 gives atomic tasks.
    #[arg(long, default_value_t = 0)]
    depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenMap {
    #[command(flatten)]
    world: World,
    #[arg(long, default_value_t = 7)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Atomic task to place; sampled when absent.
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Render {
    Ascii,
    Pixels,
}

#[derive(Args, Debug)]
struct Play {
    #[command(flatten)]
    world: World,
    #[arg(long, default_value_t = 7)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Map file written by `gen-map`; sampled when absent.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Actions separated by commas or whitespace, or a file of them.
    #[arg(long)]
    actions: Option<String>,
    /// `oracle`, `random` or a checkpoint path; ignored with `--actions`.
    #[arg(long, default_value = "random")]
    policy: String,
    #[arg(long, value_enum)]
    render: Option<Render>,
    /// Directory for pixel frames.
    #[arg(long, default_value = "frames")]
    out: PathBuf,
    /// Write the episode's labels as one JSON line here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ArchArg {
    LatentGoal,
    Standard,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ActivationArg {
    Relu,
    Tanh,
}

#[derive(Args, Debug)]
struct Train {
    #[command(flatten)]
    world: World,
    #[arg(long, default_value_t = 5)]
    size: usize,
    #[arg(long, default_value_t = 200_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent runs; run k uses seed `seed + k`.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, value_enum, default_value = "latent-goal")]
    arch: ArchArg,
    #[arg(long)]
    bottleneck: Option<usize>,
    #[arg(long, value_enum)]
    activation: Option<ActivationArg>,
    /// Initial learning rate, annealed linearly to 0.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    n_envs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Eval {
    #[command(flatten)]
    world: World,
    #[arg(long, value_delimiter = ',', default_values_t = [7usize, 14, 22])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    maps_per_size: usize,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// `oracle`, `random` or checkpoint paths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = ["oracle".to_string(), "random".to_string()])]
    policy: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ControlExp {
    #[command(flatten)]
    world: World,
    #[arg(long, default_value_t = 7)]
    size: usize,
    #[arg(long, default_value_t = 500)]
    maps: usize,
    #[arg(long, default_value = "oracle")]
    policy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct CheckTrace {
    #[arg(long, allow_hyphen_values = true)]
    formula: String,
    /// JSON Lines file, one episode per line.
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Args, Debug)]
struct Translate {
    #[arg(long, allow_hyphen_values = true)]
    formula: String,
}

#[derive(Args, Debug)]
struct Fuzz {
    /// Suites, comma separated; all when absent.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<Suite>,
    #[arg(long, default_value_t = 2)]
    atoms: usize,
    #[arg(long, default_value_t = 5)]
    max_len: usize,
    #[arg(long, default_value_t = 10_000)]
    cases: usize,
    #[arg(long, default_value_t = 8)]
    trace_len: usize,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A map file: the task it was generated for and the map itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub task: String,
    pub horizon: usize,
    pub map: MapSnapshot,
}

fn command() -> clap::Command {
    let mut cmd = Cli::command().args_override_self(true);
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for n in names {
        cmd = cmd.mut_subcommand(n, |s| s.args_override_self(true));
    }
    cmd
}

/// Splice `--config` entries in right after the subcommand so that flags
/// typed on the command line override them.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::new();
    let mut path = None;
    let mut it = args.into_iter();
    let prog = it.next().unwrap_or_else(|| "sattl".into());
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| CliError { code: 2, ..CliError::new("usage", "--config needs a path") })?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(std::iter::once(prog).chain(rest).collect());
    };
    let text = fs::read_to_string(&path).map_err(io_err(Path::new(&path)))?;
    let mut cfg = RunConfig::parse(&text).map_err(|e| CliError::new("config", e))?;
    // List flags append, so a typed flag must replace the file's entry rather than follow it.
    let typed: Vec<&str> = rest.iter().filter_map(|a| a.strip_prefix("--")).map(|a| a.split('=').next().unwrap_or(a)).collect();
    cfg.entries.retain(|k, _| !typed.contains(&k.as_str()));
    let subs: Vec<String> = Cli::command().get_subcommands().map(|s| s.get_name().to_string()).collect();
    let at = rest.iter().position(|a| subs.contains(a));
    let mut out = vec![prog];
    match at {
        Some(i) => {
            if !cfg.command.is_empty() && cfg.command != rest[i] {
                return Err(CliError::new("config", format!("config is for {:?}, not {:?}", cfg.command, rest[i])));
            }
            out.extend(rest[..=i].iter().cloned());
            out.extend(cfg.to_args());
            out.extend(rest[i + 1..].iter().cloned());
        }
        None if !cfg.command.is_empty() => {
            out.push(cfg.command.clone());
            out.extend(cfg.to_args());
            out.extend(rest);
        }
        None => return Err(CliError { code: 2, ..CliError::new("usage", "no subcommand given") }),
    }
    Ok(out)
}

/// Every resolved flag of the subcommand, defaults included.
fn run_config(name: &str, m: &ArgMatches) -> RunConfig {
    let mut cfg = RunConfig { command: name.to_string(), ..Default::default() };
    let cmd = command();
    let sub = cmd.find_subcommand(name).expect("known subcommand");
    for arg in sub.get_arguments() {
        let (Some(long), id) = (arg.get_long(), arg.get_id().as_str()) else { continue };
        if long == "config" || long == "help" || long == "version" {
            continue;
        }
        if let Ok(Some(vals)) = m.try_get_raw(id) {
            let vals: Vec<String> = vals.map(|v| v.to_string_lossy().into_owned()).collect();
            if !vals.is_empty() {
                cfg.entries.insert(long.to_string(), vals.join(","));
            }
        }
    }
    cfg
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn main_with(args: Vec<OsString>) -> i32 {
    let args: Vec<String> = args.into_iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code
        }
    }
}

fn run(args: Vec<String>) -> Result<(), CliError> {
    let args = expand_config(args)?;
    let matches = match command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) if !e.use_stderr() => {
            // Help and version requests.
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return Err(CliError { code: 2, ..CliError::new("usage", first) });
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError { code: 2, ..CliError::new("usage", e) })?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let cfg = run_config(name, sub);
    match cli.cmd {
        Cmd::GenTask(a) => gen_task(a),
        Cmd::GenMap(a) => gen_map(a),
        Cmd::Play(a) => play(a),
        Cmd::Train(a) => train(a, &cfg),
        Cmd::Eval(a) => eval(a, &cfg),
        Cmd::ControlExp(a) => control(a),
        Cmd::CheckTrace(a) => check_trace(a),
        Cmd::Translate(a) => {
            let f = parse_formula(&a.formula).map_err(|e| CliError::new("syntax", e))?;
            println!("{}", translate(&f));
            Ok(())
        }
        Cmd::Fuzz(a) => fuzz(a),
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(io_err(p)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen_task(a: GenTask) -> Result<(), CliError> {
    let spec = a.world.spec(Split::Train);
    let catalog = spec.catalog();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut tasks = Vec::with_capacity(a.count);
    for _ in 0..a.count {
        let f: TemporalFormula = if a.depth == 0 {
            let cat = spec.categories[rng.gen_range(0..spec.categories.len())];
            sample_task(&catalog, cat, spec.split, &mut rng).map_err(|e| CliError::new("sample", e))?.into()
        } else {
            compose_random(&catalog, spec.split, a.depth, &mut rng).map_err(|e| CliError::new("sample", e))?
        };
        tasks.push((f, spec.split));
    }
    let mut buf = Vec::new();
    write_task_list(&mut buf, &tasks).expect("writing to memory");
    write_out(a.out.as_deref(), &String::from_utf8(buf).expect("utf-8 formulas"))
}

fn sampled_env(world: &World, size: usize, seed: u64) -> Result<GridEnv, CliError> {
    let spec = world.spec(Split::Train);
    spec.paired(&spec.catalog(), size, seed, 0).map_err(|e| CliError::new("sample", e))
}

fn gen_map(a: GenMap) -> Result<(), CliError> {
    let env = match &a.task {
        Some(text) => {
            let task = parse_task(text).map_err(|e| CliError::new("syntax", e))?;
            let spec = a.world.spec(Split::Train);
            let catalog = spec.catalog();
            let cfg = MapConfig {
                split: spec.split,
                constraint_objects: spec.constraint_objects,
                distractors: spec.distractors,
                horizon: spec.horizon,
                ..MapConfig::new(spec.mode, a.size, a.seed)
            };
            let map = generate_map(&cfg, &task, &catalog).map_err(|e| CliError::new("map", e))?;
            GridEnv::new(catalog, map, task.into())
        }
        None => sampled_env(&a.world, a.size, a.seed)?,
    };
    let file = MapFile {
        task: env.true_task().to_string(),
        horizon: env.horizon(),
        map: env.map().snapshot(env.catalog(), env.pos(), env.dir()),
    };
    let json = serde_json::to_string(&file).expect("serializable map") + "\n";
    if a.out.is_some() {
        print!("{}", ascii(env.map(), env.pos()));
    }
    write_out(a.out.as_deref(), &json)
}

fn load_map(world: &World, path: &Path) -> Result<GridEnv, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file: MapFile = serde_json::from_str(&text).map_err(|e| CliError::new("map", e))?;
    let map = file.map.to_map(Some(file.horizon)).map_err(|e| CliError::new("map", e))?;
    let task = parse_formula(&file.task).map_err(|e| CliError::new("syntax", e))?;
    let catalog = Arc::new(build_catalog(world.catalog_seed, map.mode));
    if let Some(a) = task_atoms(&task).into_iter().find(|a| !a.is_end() && catalog.id_of(a).is_none()) {
        return Err(CliError::new("map", format!("atom {a} is not in the {} catalog", map.mode.name())));
    }
    Ok(GridEnv::new(catalog, map, task))
}

fn task_atoms(f: &TemporalFormula) -> Vec<sattl::Atom> {
    match f {
        TemporalFormula::Atomic(t) => t.atoms().cloned().collect(),
        TemporalFormula::Seq(a, b) | TemporalFormula::Choice(a, b) => {
            let mut v = task_atoms(a);
            v.extend(task_atoms(b));
            v
        }
    }
}

fn scripted(text: &str) -> Result<Vec<Action>, CliError> {
    let body = match fs::read_to_string(text) {
        Ok(s) => s,
        Err(_) => text.to_string(),
    };
    body.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Action>().map_err(|e| CliError::new("usage", e)))
        .collect()
}

fn write_frame(env: &GridEnv, dir: &Path, t: usize) -> Result<(), CliError> {
    let px = env_pixels(env);
    let ext = match px {
        Pixels::Gray(_) => "pgm",
        Pixels::Rgb(_) => "ppm",
    };
    let path = dir.join(format!("frame-{t:04}.{ext}"));
    let f = fs::File::create(&path).map_err(io_err(&path))?;
    px.write(std::io::BufWriter::new(f)).map_err(io_err(&path))
}

fn play(a: Play) -> Result<(), CliError> {
    let mut env = match &a.map {
        Some(p) => load_map(&a.world, p)?,
        None => sampled_env(&a.world, a.size, a.seed)?,
    };
    let script = a.actions.as_deref().map(scripted).transpose()?;
    let mut policy = load_policy(&a.policy).map_err(|e| CliError::new("policy", e))?;
    let allowed = gridworld::actions(env.mode());
    if let Some(bad) = script.iter().flatten().find(|x| !allowed.contains(x)) {
        return Err(CliError::new("usage", format!("action {} is not available in {}", bad.name(), env.mode().name())));
    }
    if a.render == Some(Render::Pixels) {
        fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
        write_frame(&env, &a.out, 0)?;
    }
    println!("task {}", env.formula());
    if a.render == Some(Render::Ascii) {
        print!("{}", ascii(env.map(), env.pos()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[a.seed, 0xA5]));
    policy.reset();
    let mut trace = sattl::Trace::default();
    let mut total = sattl::Reward::ZERO;
    let mut k = 0;
    while !env.is_done() {
        let action = match &script {
            Some(s) if k < s.len() => s[k],
            Some(_) => break,
            None => policy.act(&env, &mut rng),
        };
        k += 1;
        let step = env.step(action).map_err(|e| CliError::new("env", e))?;
        total += step.reward.reward;
        let labels: Vec<&str> = step.labels.iter().map(|l| l.as_str()).collect();
        println!(
            "t={} action={} labels=[{}] reward={} status={:?}",
            env.t(),
            action.name(),
            labels.join(","),
            step.reward.reward,
            step.reward.status
        );
        trace.push(step.labels);
        match a.render {
            Some(Render::Ascii) => print!("{}", ascii(env.map(), env.pos())),
            Some(Render::Pixels) => write_frame(&env, &a.out, env.t())?,
            None => {}
        }
    }
    let outcome = env.sm().outcome().map_or("unfinished".to_string(), |o| format!("{o:?}"));
    println!("return={total} steps={} outcome={outcome}", trace.len());
    if let Some(p) = &a.trace {
        let meta = serde_json::json!({ "task": env.formula().to_string(), "seed": a.seed, "return": total.as_f64() });
        let f = fs::File::create(p).map_err(io_err(p))?;
        write_jsonl(f, &[TraceRecord::from_trace(&trace, meta)]).map_err(io_err(p))?;
    }
    Ok(())
}

fn train(a: Train, cfg: &RunConfig) -> Result<(), CliError> {
    let spec = a.world.spec(Split::Train);
    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    fs::write(a.out.join("run.cfg"), cfg.to_string()).map_err(io_err(&a.out))?;
    let mut curves = Vec::new();
    for k in 0..a.runs {
        let seed = a.seed + k as u64;
        let (mut net, mut tc) = desk_recipe(&spec, a.steps, seed);
        if a.arch == ArchArg::Standard {
            net.arch = Arch::Standard;
        }
        if let Some(b) = a.bottleneck {
            net.bottleneck = b;
        }
        match a.activation {
            Some(ActivationArg::Tanh) => net.activation = Activation::Tanh,
            Some(ActivationArg::Relu) => net.activation = Activation::Relu,
            None => {}
        }
        if let Some(lr) = a.lr {
            tc.lr = agents::LrSchedule::Linear { from: lr, to: 0.0, steps: a.steps };
        }
        if let Some(n) = a.n_envs {
            tc.n_envs = n;
        }
        if net.wide_bottleneck() {
            eprintln!("note: bottleneck {} is wider than the narrow default", net.bottleneck);
        }
        let res = agents::train_gridworld(&spec, SizeSpec::Fixed(a.size), &net, &tc)
            .map_err(|e| CliError::new("train", e))?;
        let dir = a.out.join(format!("run-{k}"));
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        fs::write(dir.join("curve.csv"), res.curve.to_csv()).map_err(io_err(&dir))?;
        let path = dir.join("checkpoint.json");
        let f = fs::File::create(&path).map_err(io_err(&path))?;
        save_checkpoint(&res.params, std::io::BufWriter::new(f)).map_err(|e| CliError::new("io", e))?;
        let last = res.curve.points.last().map_or(f64::NAN, |p| p.mean_return);
        println!("run={k} seed={seed} steps={} updates={} episodes={} final_window_mean={last:.3}", res.steps, res.updates, res.episodes);
        curves.push(res.curve);
    }
    let mut s = String::from("step,p25,p50,p75\n");
    for (i, p) in curves[0].points.iter().enumerate() {
        let v: Vec<f64> = curves.iter().map(|c| c.points[i].mean_return).collect();
        s.push_str(&format!("{},{},{},{}\n", p.step, percentile(&v, 0.25), percentile(&v, 0.5), percentile(&v, 0.75)));
    }
    fs::write(a.out.join("curves.csv"), s).map_err(io_err(&a.out))
}

fn eval(a: Eval, cfg: &RunConfig) -> Result<(), CliError> {
    let spec = a.world.spec(Split::Test);
    let owned = a.policy.iter().map(|p| load_policy(p)).collect::<Result<Vec<_>, _>>().map_err(|e| CliError::new("policy", e))?;
    let policies: Vec<&dyn agents::Policy> = owned.iter().map(|p| p.as_ref()).collect();
    let report = campaign_eval(&policies, &spec, &a.sizes, a.maps_per_size, a.runs, a.seed)
        .map_err(|e| CliError::new("eval", e))?;
    print!("{}", report.table());
    if let Some(dir) = &a.out {
        report.write(dir).map_err(io_err(dir))?;
        fs::write(dir.join("run.cfg"), cfg.to_string()).map_err(io_err(dir))?;
    }
    Ok(())
}

fn control(a: ControlExp) -> Result<(), CliError> {
    let spec = a.world.spec(Split::Train);
    let policy = load_policy(&a.policy).map_err(|e| CliError::new("policy", e))?;
    let t = control_experiment(policy.as_ref(), &spec, a.size, a.maps, a.seed).map_err(|e| CliError::new("sample", e))?;
    println!("condition,mean_return");
    println!("reliable,{}", t.reliable);
    println!("occluded,{}", t.occluded);
    println!("deceptive,{}", t.deceptive);
    println!("random,{}", t.random);
    Ok(())
}

fn check_trace(a: CheckTrace) -> Result<(), CliError> {
    let f = parse_formula(&a.formula).map_err(|e| CliError::new("syntax", e))?;
    let file = fs::File::open(&a.trace).map_err(io_err(&a.trace))?;
    let episodes = read_jsonl(BufReader::new(file)).map_err(|e| CliError::new("trace", e))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (i, (trace, _)) in episodes.iter().enumerate() {
        let ret = episode_return(trace, &f);
        let mut line = serde_json::json!({
            "episode": i,
            "satisfied": satisfies(trace, &f),
            "return": ret.total.as_f64(),
            "outcome": format!("{:?}", ret.outcome),
            "violations": ret.violations,
        });
        if let TemporalFormula::Atomic(task) = &f {
            let r = satisfies_with_restarts(trace, task);
            line["report"] = serde_json::to_value(&r).expect("serializable report");
        }
        writeln!(out, "{line}").map_err(|e| CliError::new("io", e))?;
    }
    Ok(())
}

fn fuzz(a: Fuzz) -> Result<(), CliError> {
    let suites = if a.suite.is_empty() { Suite::ALL.to_vec() } else { a.suite };
    let p = FuzzParams {
        atoms: a.atoms,
        max_len: a.max_len,
        cases: a.cases,
        trace_len: a.trace_len,
        depth: a.depth,
        seed: a.seed,
    };
    let mut failed = Vec::new();
    for s in suites {
        let r = run_suite(s, &p).map_err(|e| CliError::new("usage", e))?;
        println!("{r}");
        if !r.passed() {
            failed.push(format!("{}={}", r.suite, r.disagreements));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::new("disagreement", failed.join(" ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("2-5"), Ok(CountRange::new(2, 5)));
        assert_eq!(parse_range("3"), Ok(CountRange::new(3, 3)));
        assert!(parse_range("5-2").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn command_definition_is_consistent() {
        command().debug_assert();
    }

    #[test]
    fn later_flags_override_earlier_ones() {
        let m = command().try_get_matches_from(s(&["sattl", "eval", "--runs", "2", "--runs", "3"])).unwrap();
        let cli = Cli::from_arg_matches(&m).unwrap();
        let Cmd::Eval(e) = cli.cmd else { panic!("eval expected") };
        assert_eq!(e.runs, 3);
        assert_eq!(e.sizes, [7, 14, 22]);
        assert_eq!(e.maps_per_size, 500);
    }

    #[test]
    fn resolved_config_round_trips_through_flags() {
        let m = command()
            .try_get_matches_from(s(&["sattl", "eval", "--sizes", "7,14", "--catalog-seed", "4"]))
            .unwrap();
        let (name, sub) = m.subcommand().unwrap();
        let cfg = run_config(name, sub);
        assert_eq!(cfg.entries["sizes"], "7,14");
        assert_eq!(cfg.entries["catalog-seed"], "4");
        let again = command()
            .try_get_matches_from(std::iter::once("sattl".to_string()).chain([name.to_string()]).chain(cfg.to_args()))
            .unwrap();
        assert_eq!(run_config(name, again.subcommand().unwrap().1), cfg);
    }
}
